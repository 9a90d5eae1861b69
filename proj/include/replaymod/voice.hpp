#pragma once

#include <cstdint>

#include "replaymod/signal.hpp"

namespace replaymod {

// Harmonic voice model: fundamental f0 with n_harmonics partials whose
// amplitudes fall as 1/n^decay, phase-locked to the fundamental like a
// pulse-excited voice (plus a small seeded per-harmonic jitter), with
// sinusoidal vibrato, a syllable-rate amplitude pattern, and a raised-cosine
// attack/release envelope.
struct VoiceSpec {
    double f0 = 200.0;           // Hz
    int n_harmonics = 12;        // capped below Nyquist at synthesis
    double decay = 2.0;          // amplitude exponent: A_n proportional to n^-decay
    double duration_s = 1.0;
    double vibrato_cents = 15.0;
    double vibrato_rate_hz = 5.0;
    double phase_jitter = 0.25;  // radians, uniform per harmonic
    double syllable_rate_hz = 4.0;  // 0 disables the syllable pattern
    double syllable_depth = 0.94;   // envelope dips to 1 - depth between bursts
    double attack_s = 0.02;
    double release_s = 0.005;
    uint64_t seed = 1;
};

// Deterministic per seed; peak-normalized to 0.5 full scale. Throws if any
// harmonic falls at or above Nyquist or the spec is degenerate.
Signal synth_voice(const VoiceSpec& spec, int sample_rate);

// Draws f0 uniformly in [85, 400] Hz plus jittered vibrato parameters; all
// other fields keep their defaults.
VoiceSpec random_voice_spec(uint64_t seed);

}  // namespace replaymod
