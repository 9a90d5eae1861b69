#pragma once

#include <cstdint>
#include <vector>

namespace replaymod {

// Time-domain audio. Samples are dimensionless amplitudes, nominally in
// [-1, 1]; sample_rate is in Hz. The universal currency of the pipeline.
struct Signal {
    std::vector<double> samples;
    int sample_rate = 0;

    size_t size() const { return samples.size(); }
};

// Mean power (mean of squared samples). 0 for an empty signal.
double mean_power(const Signal& s);

// Throws std::invalid_argument if the signal is empty, has a non-positive
// sample rate, or contains non-finite samples.
void validate(const Signal& s);

// Fixed-length rectangular frames cut from one signal.
struct FrameSequence {
    std::vector<Signal> frames;
    size_t frame_length = 0;
    size_t hop = 0;  // samples
};

// Rectangular framing with a trailing partial frame dropped.
// Requires frame_ms >= hop_ms > 0 and at least one full frame of audio.
FrameSequence frame_signal(const Signal& s, double frame_ms, double hop_ms);

// Adds seeded Gaussian white noise scaled so that
// 10*log10(P_signal / P_noise) equals snr_db exactly. snr_db = +infinity is
// the no-noise sentinel and returns the input unchanged. Throws on
// zero-power input.
Signal mix_noise(const Signal& s, double snr_db, uint64_t seed);

// Capture-side noise floor at a fixed absolute RMS (a microphone floor does
// not scale with the signal): mix_noise at the equivalent per-signal SNR.
// floor_rms <= 0 returns the input unchanged.
Signal add_capture_floor(const Signal& s, double floor_rms, uint64_t seed);

}  // namespace replaymod
