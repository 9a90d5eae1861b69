#include "replaymod/voice.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "replaymod/rng.hpp"

namespace replaymod {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Signal synth_voice(const VoiceSpec& spec, int sample_rate) {
    if (sample_rate <= 0) throw std::invalid_argument("non-positive sample rate");
    if (!(spec.duration_s > 0.0)) throw std::invalid_argument("duration must be positive");
    if (spec.n_harmonics < 1) throw std::invalid_argument("need at least one harmonic");
    if (!(spec.f0 > 0.0)) throw std::invalid_argument("f0 must be positive");
    const double nyquist = sample_rate / 2.0;
    if (spec.f0 * spec.n_harmonics >= nyquist)
        throw std::invalid_argument("harmonic above Nyquist");

    const auto n = static_cast<size_t>(std::llround(spec.duration_s * sample_rate));
    if (n == 0) throw std::invalid_argument("duration resolves to zero samples");

    SplitMix64 rng(spec.seed);
    const double glottal_phase = rng.next_range(0.0, 2.0 * kPi);
    const double vibrato_phase = rng.next_range(0.0, 2.0 * kPi);
    const double syllable_phase = rng.next_range(0.0, 2.0 * kPi);
    std::vector<double> jitter(static_cast<size_t>(spec.n_harmonics));
    for (double& j : jitter) j = rng.next_range(-spec.phase_jitter, spec.phase_jitter);

    // Vibrato as sinusoidal modulation of the fundamental; harmonics track
    // the running fundamental phase so they stay phase-locked.
    const double vib_frac = std::pow(2.0, spec.vibrato_cents / 1200.0) - 1.0;
    const double dt = 1.0 / sample_rate;

    Signal out;
    out.sample_rate = sample_rate;
    out.samples.assign(n, 0.0);

    double theta = glottal_phase;  // running fundamental phase
    double peak = 0.0;
    const double attack = std::max(spec.attack_s, 0.0);
    const double release = std::max(spec.release_s, 0.0);
    const double total = spec.duration_s;
    for (size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        double v = 0.0;
        for (int h = 1; h <= spec.n_harmonics; ++h) {
            const double amp = std::pow(static_cast<double>(h), -spec.decay);
            v += amp * std::sin(h * theta + jitter[static_cast<size_t>(h - 1)]);
        }

        double env = 1.0;
        if (attack > 0.0 && t < attack)
            env *= 0.5 - 0.5 * std::cos(kPi * t / attack);
        if (release > 0.0 && t > total - release)
            env *= 0.5 - 0.5 * std::cos(kPi * (total - t) / release);
        if (spec.syllable_rate_hz > 0.0) {
            // Syllable-rate loudness pattern; dips stay voiced (depth < 1).
            const double burst =
                0.5 + 0.5 * std::sin(2.0 * kPi * spec.syllable_rate_hz * t +
                                     syllable_phase);
            env *= 1.0 - spec.syllable_depth * (1.0 - burst * burst);
        }
        v *= env;

        out.samples[i] = v;
        peak = std::max(peak, std::abs(v));

        const double f_inst =
            spec.f0 * (1.0 + vib_frac * std::sin(2.0 * kPi * spec.vibrato_rate_hz * t +
                                                 vibrato_phase));
        theta += 2.0 * kPi * f_inst * dt;
    }

    if (peak > 0.0) {
        const double scale = 0.5 / peak;
        for (double& s : out.samples) s *= scale;
    }
    return out;
}

VoiceSpec random_voice_spec(uint64_t seed) {
    SplitMix64 rng(seed);
    VoiceSpec spec;
    spec.seed = seed;
    spec.f0 = rng.next_range(85.0, 400.0);
    spec.vibrato_cents = rng.next_range(8.0, 22.0);
    spec.vibrato_rate_hz = rng.next_range(4.0, 6.5);
    spec.syllable_rate_hz = rng.next_range(2.5, 5.5);
    return spec;
}

}  // namespace replaymod
