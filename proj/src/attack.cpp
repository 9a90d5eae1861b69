#include "replaymod/attack.hpp"

#include <cmath>
#include <stdexcept>

#include "replaymod/rng.hpp"

namespace replaymod {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::Genuine: return "genuine";
        case Provenance::ClassicalReplay: return "classical_replay";
        case Provenance::ModulatedReplay: return "modulated_replay";
    }
    return "unknown";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "genuine") return Provenance::Genuine;
    if (s == "classical_replay") return Provenance::ClassicalReplay;
    if (s == "modulated_replay") return Provenance::ModulatedReplay;
    throw std::invalid_argument("unknown provenance label: " + s);
}

ModulatedAudio modulate(const Signal& genuine,
                        std::shared_ptr<const InverseFilter> filter) {
    if (!filter) throw std::invalid_argument("null filter");
    validate(genuine);

    const Spectrum spec = fft(genuine);
    if (filter->gains.size() != spec.size())
        throw std::invalid_argument("filter resolution mismatch");

    auto [amps, phases] = split(spec);
    for (size_t k = 0; k < amps.magnitudes.size(); ++k)
        amps.magnitudes[k] *= filter->gains[k];

    // The phase spectrum is left untouched; only amplitudes are compensated.
    const Spectrum compensated =
        combine(amps, phases, spec.delta_f, spec.original_length);

    ModulatedAudio out;
    out.signal = ifft(compensated);
    out.provenance = Provenance::Genuine;  // modulation alone is not a replay
    out.source_filter = std::move(filter);
    return out;
}

ModulatedAudio modulate(const Signal& genuine, const InverseFilter& filter) {
    return modulate(genuine, std::make_shared<const InverseFilter>(filter));
}

Signal apply_speaker(const Signal& s, const SpeakerProfile& profile, uint64_t seed) {
    validate(s);

    Spectrum spec = fft(s);
    if (profile.size() != spec.size())
        throw std::invalid_argument("profile resolution mismatch");

    for (size_t k = 0; k < spec.size(); ++k) {
        const double h = profile.true_amplitude[k];
        const double psi = profile.true_phase[k];
        spec.bins[k] *= std::complex<double>(h * std::cos(psi), h * std::sin(psi));
    }

    Signal out = ifft(spec);

    if (profile.subbass_noise_level > 0.0) {
        // Enclosure resonance: 3 tones at seeded frequencies in [20, 60] Hz,
        // normalized so the summed waveform has exactly the requested RMS.
        SplitMix64 rng(seed);
        double freqs[3], phases[3];
        for (int t = 0; t < 3; ++t) {
            freqs[t] = rng.next_range(20.0, 60.0);
            phases[t] = rng.next_range(0.0, 2.0 * kPi);
        }
        std::vector<double> resonance(out.samples.size());
        double power = 0.0;
        for (size_t i = 0; i < resonance.size(); ++i) {
            const double t = static_cast<double>(i) / out.sample_rate;
            double v = 0.0;
            for (int j = 0; j < 3; ++j)
                v += std::sin(2.0 * kPi * freqs[j] * t + phases[j]);
            resonance[i] = v;
            power += v * v;
        }
        power /= static_cast<double>(resonance.size());
        if (power > 0.0) {
            const double scale = profile.subbass_noise_level / std::sqrt(power);
            for (size_t i = 0; i < out.samples.size(); ++i)
                out.samples[i] += scale * resonance[i];
        }
    }
    return out;
}

ModulatedAudio classical_replay(const Signal& genuine, const SpeakerProfile& profile,
                                uint64_t seed) {
    ModulatedAudio out;
    out.signal = apply_speaker(genuine, profile, seed);
    out.provenance = Provenance::ClassicalReplay;
    return out;
}

ModulatedAudio modulated_replay(const Signal& genuine,
                                std::shared_ptr<const InverseFilter> filter,
                                const SpeakerProfile& profile, uint64_t seed) {
    ModulatedAudio modulated = modulate(genuine, std::move(filter));
    ModulatedAudio out;
    out.signal = apply_speaker(modulated.signal, profile, seed);
    out.provenance = Provenance::ModulatedReplay;
    out.source_filter = std::move(modulated.source_filter);
    return out;
}

ModulatedAudio modulated_replay(const Signal& genuine, const InverseFilter& filter,
                                const SpeakerProfile& profile, uint64_t seed) {
    return modulated_replay(genuine, std::make_shared<const InverseFilter>(filter),
                            profile, seed);
}

double l2_similarity(const AmplitudeSpectrum& a, const AmplitudeSpectrum& b) {
    if (a.size() != b.size()) throw std::invalid_argument("bin count mismatch");
    if (a.size() == 0) throw std::invalid_argument("empty spectrum");

    double pa = 0.0, pb = 0.0;
    for (double v : a.magnitudes) pa += v * v;
    for (double v : b.magnitudes) pb += v * v;
    if (pa <= 0.0 || pb <= 0.0) throw std::invalid_argument("zero spectrum");

    double dist = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        const double da = a.magnitudes[k] * a.magnitudes[k] / pa;
        const double db = b.magnitudes[k] * b.magnitudes[k] / pb;
        dist += (da - db) * (da - db);
    }
    return dist;
}

}  // namespace replaymod
