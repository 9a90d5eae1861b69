#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "replaymod/signal.hpp"

namespace replaymod {

// Complex frequency spectrum of a zero-padded signal. bins.size() is a power
// of two >= original_length; delta_f = sample_rate / bins.size().
struct Spectrum {
    std::vector<std::complex<double>> bins;
    double delta_f = 0.0;
    size_t original_length = 0;

    size_t size() const { return bins.size(); }
    int sample_rate() const;
};

struct AmplitudeSpectrum {
    std::vector<double> magnitudes;
    double delta_f = 0.0;

    size_t size() const { return magnitudes.size(); }
};

struct PhaseSpectrum {
    std::vector<double> phases;  // radians, each in (-pi, pi]

    size_t size() const { return phases.size(); }
};

size_t next_pow2(size_t n);

// Frequency in Hz that bin k of an n-bin spectrum carries for a real signal:
// min(k, n-k) * delta_f (the upper half mirrors the lower).
double bin_frequency(size_t k, size_t n, double delta_f);

// Forward transform with zero-padding to the smallest power of two >= L.
// Throws std::invalid_argument("empty input") on an empty signal.
Spectrum fft(const Signal& s);

// Inverse transform; returns the first original_length samples (the padding
// tail is discarded). Throws std::invalid_argument
// ("non-conjugate-symmetric spectrum") if the reconstruction has imaginary
// residue >= 1e-6.
Signal ifft(const Spectrum& spec);

// Polar decomposition; arg(0) is defined as 0.
std::pair<AmplitudeSpectrum, PhaseSpectrum> split(const Spectrum& spec);

// Rebuilds bins[k] = amps[k] * exp(i * phases[k]). Throws on length mismatch.
Spectrum combine(const AmplitudeSpectrum& amps, const PhaseSpectrum& phases,
                 double delta_f, size_t original_length);

}  // namespace replaymod
