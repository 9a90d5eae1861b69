#include "replaymod/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace replaymod {

namespace {
constexpr double kPi = 3.14159265358979323846;

// In-place iterative radix-2 transform. sign = -1 forward, +1 inverse
// (unscaled; the caller divides by N on the inverse path).
void transform_pow2(std::vector<std::complex<double>>& a, int sign) {
    const size_t n = a.size();
    if (n < 2) return;

    // Bit-reversal permutation.
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}
}  // namespace

int Spectrum::sample_rate() const {
    return static_cast<int>(std::lround(delta_f * static_cast<double>(bins.size())));
}

size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

double bin_frequency(size_t k, size_t n, double delta_f) {
    const size_t folded = std::min(k, n - k);
    return static_cast<double>(folded) * delta_f;
}

Spectrum fft(const Signal& s) {
    if (s.samples.empty()) throw std::invalid_argument("empty input");
    if (s.sample_rate <= 0) throw std::invalid_argument("non-positive sample rate");

    const size_t length = s.samples.size();
    const size_t n = next_pow2(length);

    Spectrum spec;
    spec.bins.assign(n, {0.0, 0.0});
    for (size_t i = 0; i < length; ++i) spec.bins[i] = {s.samples[i], 0.0};
    transform_pow2(spec.bins, -1);

    spec.delta_f = static_cast<double>(s.sample_rate) / static_cast<double>(n);
    spec.original_length = length;
    return spec;
}

Signal ifft(const Spectrum& spec) {
    const size_t n = spec.bins.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("spectrum size must be a power of two");
    if (spec.original_length == 0 || spec.original_length > n)
        throw std::invalid_argument("invalid original_length");

    std::vector<std::complex<double>> work = spec.bins;
    transform_pow2(work, +1);

    const double inv_n = 1.0 / static_cast<double>(n);
    double max_imag = 0.0;
    for (const auto& v : work) max_imag = std::max(max_imag, std::abs(v.imag()) * inv_n);
    if (max_imag >= 1e-6) throw std::invalid_argument("non-conjugate-symmetric spectrum");

    Signal out;
    out.sample_rate = spec.sample_rate();
    out.samples.resize(spec.original_length);
    for (size_t i = 0; i < spec.original_length; ++i)
        out.samples[i] = work[i].real() * inv_n;
    return out;
}

std::pair<AmplitudeSpectrum, PhaseSpectrum> split(const Spectrum& spec) {
    AmplitudeSpectrum amps;
    PhaseSpectrum phases;
    amps.delta_f = spec.delta_f;
    amps.magnitudes.resize(spec.bins.size());
    phases.phases.resize(spec.bins.size());
    for (size_t k = 0; k < spec.bins.size(); ++k) {
        const auto& b = spec.bins[k];
        amps.magnitudes[k] = std::abs(b);
        // arg(0) := 0; a zero bin carries no phase information.
        phases.phases[k] = (b.real() == 0.0 && b.imag() == 0.0)
                               ? 0.0
                               : std::atan2(b.imag(), b.real());
    }
    return {std::move(amps), std::move(phases)};
}

Spectrum combine(const AmplitudeSpectrum& amps, const PhaseSpectrum& phases,
                 double delta_f, size_t original_length) {
    if (amps.magnitudes.size() != phases.phases.size())
        throw std::invalid_argument("amplitude/phase length mismatch");

    Spectrum spec;
    spec.delta_f = delta_f;
    spec.original_length = original_length;
    spec.bins.resize(amps.magnitudes.size());
    for (size_t k = 0; k < spec.bins.size(); ++k) {
        const double m = amps.magnitudes[k];
        const double p = phases.phases[k];
        spec.bins[k] = {m * std::cos(p), m * std::sin(p)};
    }
    return spec;
}

}  // namespace replaymod
