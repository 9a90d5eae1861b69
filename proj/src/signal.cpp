#include "replaymod/signal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "replaymod/rng.hpp"

namespace replaymod {

double mean_power(const Signal& s) {
    if (s.samples.empty()) return 0.0;
    double acc = 0.0;
    for (double v : s.samples) acc += v * v;
    return acc / static_cast<double>(s.samples.size());
}

void validate(const Signal& s) {
    if (s.samples.empty()) throw std::invalid_argument("empty input");
    if (s.sample_rate <= 0) throw std::invalid_argument("non-positive sample rate");
    for (double v : s.samples)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite sample");
}

FrameSequence frame_signal(const Signal& s, double frame_ms, double hop_ms) {
    if (!(hop_ms > 0.0) || frame_ms < hop_ms)
        throw std::invalid_argument("require frame_ms >= hop_ms > 0");
    validate(s);

    const size_t frame_len =
        static_cast<size_t>(std::llround(frame_ms * 1e-3 * s.sample_rate));
    const size_t hop =
        static_cast<size_t>(std::llround(hop_ms * 1e-3 * s.sample_rate));
    if (frame_len == 0 || hop == 0) throw std::invalid_argument("frame resolves to zero samples");
    if (s.samples.size() < frame_len) throw std::invalid_argument("too short");

    FrameSequence seq;
    seq.frame_length = frame_len;
    seq.hop = hop;
    for (size_t start = 0; start + frame_len <= s.samples.size(); start += hop) {
        Signal f;
        f.sample_rate = s.sample_rate;
        f.samples.assign(s.samples.begin() + static_cast<ptrdiff_t>(start),
                         s.samples.begin() + static_cast<ptrdiff_t>(start + frame_len));
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

Signal add_capture_floor(const Signal& s, double floor_rms, uint64_t seed) {
    if (floor_rms <= 0.0) return s;
    const double p_signal = mean_power(s);
    if (p_signal <= 0.0) throw std::invalid_argument("zero-power signal");
    const double snr_db = 10.0 * std::log10(p_signal / (floor_rms * floor_rms));
    return mix_noise(s, snr_db, seed);
}

Signal mix_noise(const Signal& s, double snr_db, uint64_t seed) {
    validate(s);
    if (std::isinf(snr_db) && snr_db > 0) return s;  // no-noise sentinel

    const double p_signal = mean_power(s);
    if (p_signal <= 0.0) throw std::invalid_argument("zero-power signal");

    SplitMix64 rng(seed);
    std::vector<double> noise(s.samples.size());
    double p_noise_raw = 0.0;
    for (double& v : noise) {
        v = rng.next_gaussian();
        p_noise_raw += v * v;
    }
    p_noise_raw /= static_cast<double>(noise.size());
    if (p_noise_raw <= 0.0) throw std::runtime_error("degenerate noise draw");

    // Scale so the realized power ratio matches the request exactly.
    const double p_noise_target = p_signal / std::pow(10.0, snr_db / 10.0);
    const double scale = std::sqrt(p_noise_target / p_noise_raw);

    Signal out;
    out.sample_rate = s.sample_rate;
    out.samples.resize(s.samples.size());
    for (size_t i = 0; i < noise.size(); ++i)
        out.samples[i] = s.samples[i] + scale * noise[i];
    return out;
}

}  // namespace replaymod
