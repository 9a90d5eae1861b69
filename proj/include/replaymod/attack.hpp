#pragma once

#include <cstdint>
#include <memory>

#include "replaymod/fft.hpp"
#include "replaymod/signal.hpp"
#include "replaymod/speaker.hpp"

namespace replaymod {

enum class Provenance { Genuine, ClassicalReplay, ModulatedReplay };

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

// Pipeline output: same length as the source genuine signal.
struct ModulatedAudio {
    Signal signal;
    Provenance provenance = Provenance::Genuine;
    std::shared_ptr<const InverseFilter> source_filter;  // null for classical replay
};

// The modulation processor: FFT -> split -> amplitude *= H^-1 -> combine with
// the untouched phase spectrum -> iFFT -> truncate to the input length.
// Throws std::invalid_argument("filter resolution mismatch") when the filter
// bin count differs from the padded FFT size.
ModulatedAudio modulate(const Signal& genuine,
                        std::shared_ptr<const InverseFilter> filter);
ModulatedAudio modulate(const Signal& genuine, const InverseFilter& filter);

// Playback-device storage model for replay sources. Disabled (the default)
// is the identity channel. Enabled, the stored file is peak-normalized to
// full scale (the D/A range is fixed and playback stays at the set volume,
// so inverse-filter bass boost costs headroom) and optionally quantized.
struct DacModel {
    bool enabled = false;
    int bits = 16;  // 0 = no quantization, normalization only

    static DacModel identity() { return {}; }
    static DacModel cd_quality() { return {true, 16}; }
};

// Peak-normalizes to full scale and quantizes to the given bit depth.
Signal store_digital(const Signal& s, const DacModel& dac);

// Virtual replay channel: per-bin gain and phase shift (conjugate-mirrored),
// truncation to the input length, then the seeded 20-60 Hz enclosure
// resonance (3 tones, total RMS = profile.subbass_noise_level).
Signal apply_speaker(const Signal& s, const SpeakerProfile& profile, uint64_t seed);

// Replays the (stored) genuine signal directly through the speaker.
ModulatedAudio classical_replay(const Signal& genuine, const SpeakerProfile& profile,
                                uint64_t seed, const DacModel& dac = {});

// Modulates, stores, then replays.
ModulatedAudio modulated_replay(const Signal& genuine,
                                std::shared_ptr<const InverseFilter> filter,
                                const SpeakerProfile& profile, uint64_t seed,
                                const DacModel& dac = {});
ModulatedAudio modulated_replay(const Signal& genuine, const InverseFilter& filter,
                                const SpeakerProfile& profile, uint64_t seed,
                                const DacModel& dac = {});

// Squared Euclidean distance between the two spectra's normalized power
// distributions (each scaled to sum to 1). Throws on length mismatch or an
// all-zero spectrum.
double l2_similarity(const AmplitudeSpectrum& a, const AmplitudeSpectrum& b);

}  // namespace replaymod
