#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "replaymod/signal.hpp"

namespace replaymod {

// Local-extrema ratios for window parameters r = 1..r_max; each in [0, 1].
struct LerPattern {
    std::vector<double> values;

    size_t size() const { return values.size(); }
};

// Linear max-margin classifier over standardized LerPattern features.
// Positive margin means the modulated-replay class.
struct SvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<double> feature_mean;
    std::vector<double> feature_scale;  // entries > 0
    std::string trained_on;             // corpus fingerprint, not serialized
    double train_accuracy = 0.0;        // on the training set, not serialized

    size_t r_max() const { return weights.size(); }
};

struct SvmTrainConfig {
    double lambda = 1e-3;  // L2 regularization strength
    int epochs = 200;
    uint64_t seed = 1;     // shuffling seed
};

struct FreqDecision {
    double auc = 0.0;
    double threshold = 0.0;
    bool is_replay = false;  // auc < threshold
};

enum class Verdict { Genuine, ClassicalReplay, ModulatedReplay };
const char* to_string(Verdict v);

struct DetectionVerdict {
    Verdict label = Verdict::Genuine;
    double ler_score = 0.0;             // signed SVM margin
    std::optional<FreqDecision> freq;   // absent when the time check already fired
};

enum class SpectrumSide { OneSided, TwoSided };

struct DetectorConfig {
    int r_max = 20;
    double frame_ms = 32.0;
    double hop_ms = 16.0;
    double silence_power = 1e-6;  // frames below this mean power are skipped
    SpectrumSide side = SpectrumSide::OneSided;
    double auc_threshold = 0.817;
};

// Fraction of interior samples that are the minimum or maximum of their
// (2r+1)-length window (window indices clamp at the segment bounds, which
// realizes nearest-element padding). Requires length >= 3 and r >= 1.
double local_extrema_ratio(const Signal& segment, int r);

// values[r-1] = local_extrema_ratio(segment, r) for r = 1..r_max.
LerPattern extract_lep(const Signal& segment, int r_max);

// Deterministic subgradient descent on the L2-regularized hinge loss, with
// z-score standardization fitted on the training data. Throws if either
// class is empty.
SvmModel train_svm(const std::vector<LerPattern>& genuine_feats,
                   const std::vector<LerPattern>& modulated_feats,
                   const SvmTrainConfig& cfg = {});

// Returns {is_modulated, margin} with margin = w . standardize(feat) + b.
std::pair<bool, double> classify_time(const SvmModel& model, const LerPattern& feat);

// Area under the CDF of the normalized power spectrum. One-sided uses bins
// 0..N/2 of the N-point FFT; two-sided uses all N bins. n_fft = 0 derives the
// smallest power of two >= segment length. Throws
// std::invalid_argument("silent segment") on zero power.
double spectral_auc(const Signal& segment, size_t n_fft = 0,
                    SpectrumSide side = SpectrumSide::OneSided);

// is_replay = (auc < threshold); equality passes as genuine.
FreqDecision classify_freq(double auc, double threshold);

// Threshold minimizing total misclassifications over the two AUC samples
// (candidates are midpoints of adjacent sorted values; ties resolve toward
// the larger threshold). Throws if a set is empty.
double tune_threshold(const std::vector<double>& genuine_aucs,
                      const std::vector<double>& replay_aucs);

// Dual-domain check for one segment: time-domain classifier first, then the
// frequency-domain AUC threshold. Returns nullopt for silent segments.
std::optional<DetectionVerdict> detect(const Signal& segment, const SvmModel& model,
                                       const DetectorConfig& cfg = {});

// Frames the utterance, runs detect per voiced frame, and majority-votes the
// labels (ties fail closed: ModulatedReplay > ClassicalReplay > Genuine).
// Throws std::runtime_error("no voiced content") if every frame is silent.
DetectionVerdict detect_utterance(const Signal& utterance, const SvmModel& model,
                                  const DetectorConfig& cfg = {});

// Per-frame label tallies for evaluation reports.
struct UtteranceReport {
    DetectionVerdict verdict;
    size_t genuine_frames = 0;
    size_t classical_frames = 0;
    size_t modulated_frames = 0;
    size_t silent_frames = 0;
};
UtteranceReport detect_utterance_report(const Signal& utterance, const SvmModel& model,
                                        const DetectorConfig& cfg = {});

// Versioned text serialization ("dualguard-svm v1"); numeric round trip is
// exact (shortest-representation decimals).
void save_svm(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_svm(const std::filesystem::path& path);

}  // namespace replaymod
