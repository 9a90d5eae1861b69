#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "replaymod/attack.hpp"
#include "replaymod/detect.hpp"

namespace replaymod {

// Evaluation harness: synthesizes a three-class corpus in memory, extracts
// per-frame features once per noise condition, and scores the dual-domain
// detector with utterance-level k-fold cross-validation.

struct EvalConfig {
    int n_per_class = 500;
    std::string speaker = "phone";
    int sample_rate = 96000;
    double duration_s = 0.5;
    double eps = 1e-3;
    double capture_floor_rms = 2e-4;  // ASR microphone floor
    uint64_t seed = 1;
    int folds = 10;
    // Conditions the detector is scored under; +inf = quiet.
    std::vector<double> eval_snrs = {std::numeric_limits<double>::infinity(), 60.0,
                                     40.0};
    // Conditions pooled into each fold's training set (noise augmentation).
    std::vector<double> train_snrs = {std::numeric_limits<double>::infinity(), 60.0,
                                      40.0};
    DetectorConfig detector;
    int threads = 0;  // 0 = hardware concurrency
};

// Cached per-frame features of one utterance under one noise condition.
struct UtteranceFeatures {
    Provenance label = Provenance::Genuine;
    std::vector<LerPattern> leps;  // voiced frames only
    std::vector<double> aucs;
};

struct EvalDataset {
    std::vector<double> snrs;  // condition axis
    // features[condition][utterance]; utterances come in trios sharing a
    // voice seed: index 3*i = genuine, 3*i+1 = classical, 3*i+2 = modulated.
    std::vector<std::vector<UtteranceFeatures>> features;
    int n_per_class = 0;
};

EvalDataset build_eval_dataset(const EvalConfig& cfg);

struct ConditionMetrics {
    double snr_db = 0.0;
    // Utterance-level rates, aggregated over CV folds. "Detection" counts a
    // verdict other than Genuine.
    double modulated_detection = 0.0;
    double classical_detection = 0.0;
    double false_positive_rate = 0.0;
    double overall_accuracy = 0.0;  // accept/reject correctness over all classes
    std::array<std::array<size_t, 3>, 3> confusion{};  // [true][predicted]
    // Frequency-threshold-only baseline on the same folds.
    double freq_only_modulated_detection = 0.0;
    double freq_only_classical_detection = 0.0;
    double freq_only_overall = 0.0;
    double mean_tuned_threshold = 0.0;
};

struct EvalResult {
    std::vector<ConditionMetrics> conditions;  // aligned with cfg.eval_snrs
    double svm_frame_cv_accuracy = 0.0;  // genuine-vs-modulated, frame level, quiet
    double median_frame_detect_ms = 0.0;
    // Mean LER per window parameter r and class, quiet condition (rows r=1..).
    std::vector<std::array<double, 3>> mean_ler_by_r;
    // Per-utterance mean AUC by class, quiet condition.
    std::vector<std::vector<double>> utterance_aucs;  // [class][utterance]
};

EvalResult run_eval(const EvalConfig& cfg, const EvalDataset& dataset);

// Plot-ready CSV emitters (metrics.csv, confusion.csv, ler_vs_r.csv,
// auc_distribution.csv), all with a versioned header line.
void write_eval_csvs(const std::filesystem::path& dir, const EvalConfig& cfg,
                     const EvalResult& result);

}  // namespace replaymod
