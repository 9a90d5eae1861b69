#include "replaymod/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "replaymod/corpus.hpp"
#include "replaymod/fft.hpp"
#include "replaymod/rng.hpp"
#include "replaymod/voice.hpp"

namespace replaymod {

namespace {

bool is_quiet(double snr) { return std::isinf(snr) && snr > 0; }

std::string snr_label(double snr) {
    if (is_quiet(snr)) return "quiet";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%gdB", snr);
    return buf;
}

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

UtteranceFeatures extract_features(const Signal& s, Provenance label,
                                   const DetectorConfig& det) {
    UtteranceFeatures feats;
    feats.label = label;
    const FrameSequence frames = frame_signal(s, det.frame_ms, det.hop_ms);
    for (const auto& f : frames.frames) {
        if (mean_power(f) < det.silence_power) continue;
        feats.leps.push_back(extract_lep(f, det.r_max));
        feats.aucs.push_back(spectral_auc(f, 0, det.side));
    }
    return feats;
}

// Mirrors detect(): time-domain check first, then the AUC threshold, on
// cached features.
Verdict verdict_from_features(const SvmModel& model, double threshold,
                              const LerPattern& lep, double auc) {
    if (classify_time(model, lep).first) return Verdict::ModulatedReplay;
    return auc < threshold ? Verdict::ClassicalReplay : Verdict::Genuine;
}

Verdict majority_verdict(const std::vector<Verdict>& votes) {
    size_t counts[3] = {0, 0, 0};
    for (Verdict v : votes) ++counts[static_cast<size_t>(v)];
    Verdict label = Verdict::ModulatedReplay;
    size_t best = counts[static_cast<size_t>(Verdict::ModulatedReplay)];
    if (counts[static_cast<size_t>(Verdict::ClassicalReplay)] > best) {
        label = Verdict::ClassicalReplay;
        best = counts[static_cast<size_t>(Verdict::ClassicalReplay)];
    }
    if (counts[static_cast<size_t>(Verdict::Genuine)] > best) label = Verdict::Genuine;
    return label;
}

size_t class_index(Provenance p) { return static_cast<size_t>(p); }

}  // namespace

EvalDataset build_eval_dataset(const EvalConfig& cfg) {
    if (cfg.n_per_class < 10) throw std::invalid_argument("n_per_class must be >= 10");

    // The condition axis is the union of evaluation and training SNRs.
    std::vector<double> snrs = cfg.eval_snrs;
    for (double s : cfg.train_snrs) {
        const bool present = std::any_of(snrs.begin(), snrs.end(), [&](double x) {
            return (is_quiet(x) && is_quiet(s)) || x == s;
        });
        if (!present) snrs.push_back(s);
    }

    const auto length =
        static_cast<size_t>(std::llround(cfg.duration_s * cfg.sample_rate));
    const size_t n_fft = next_pow2(length);
    const AttackKit kit =
        prepare_attack_kit(cfg.speaker, cfg.sample_rate, n_fft, cfg.eps,
                           SplitMix64::derive(cfg.seed, 0x5000));

    EvalDataset dataset;
    dataset.snrs = snrs;
    dataset.n_per_class = cfg.n_per_class;
    dataset.features.assign(snrs.size(),
                            std::vector<UtteranceFeatures>(
                                static_cast<size_t>(cfg.n_per_class) * 3));

    parallel_for(static_cast<size_t>(cfg.n_per_class), cfg.threads, [&](size_t i) {
        const uint64_t voice_seed = SplitMix64::derive(cfg.seed, i);
        VoiceSpec spec = random_voice_spec(voice_seed);
        spec.duration_s = cfg.duration_s;
        const Signal genuine = synth_voice(spec, cfg.sample_rate);
        const uint64_t replay_seed = SplitMix64::derive(voice_seed, 0x10);

        // What the ASR front end captures in the quiet lab: signal plus the
        // microphone floor.
        std::array<Signal, 3> captured = {
            add_capture_floor(genuine, cfg.capture_floor_rms,
                              SplitMix64::derive(voice_seed, 0x0F)),
            add_capture_floor(classical_replay(genuine, kit.profile, replay_seed).signal,
                              cfg.capture_floor_rms, SplitMix64::derive(voice_seed, 0x1F)),
            add_capture_floor(
                modulated_replay(genuine, kit.filter, kit.profile, replay_seed).signal,
                cfg.capture_floor_rms, SplitMix64::derive(voice_seed, 0x2F)),
        };
        const Provenance labels[3] = {Provenance::Genuine, Provenance::ClassicalReplay,
                                      Provenance::ModulatedReplay};

        for (size_t c = 0; c < snrs.size(); ++c) {
            const double snr = snrs[c];
            for (size_t j = 0; j < 3; ++j) {
                const Signal& base = captured[j];
                const Signal heard =
                    is_quiet(snr)
                        ? base
                        : mix_noise(base, snr,
                                    SplitMix64::derive(voice_seed, 0x90 + j + 8 * c));
                dataset.features[c][3 * i + j] =
                    extract_features(heard, labels[j], cfg.detector);
            }
        }
    });
    return dataset;
}

EvalResult run_eval(const EvalConfig& cfg, const EvalDataset& dataset) {
    const size_t n = static_cast<size_t>(dataset.n_per_class);
    const int folds = std::max(2, cfg.folds);

    std::vector<size_t> condition_of_eval;  // eval snr -> dataset condition index
    for (double snr : cfg.eval_snrs) {
        auto it = std::find_if(dataset.snrs.begin(), dataset.snrs.end(), [&](double x) {
            return (is_quiet(x) && is_quiet(snr)) || x == snr;
        });
        if (it == dataset.snrs.end())
            throw std::invalid_argument("evaluation SNR missing from dataset");
        condition_of_eval.push_back(static_cast<size_t>(it - dataset.snrs.begin()));
    }
    std::vector<size_t> condition_of_train;
    for (double snr : cfg.train_snrs) {
        auto it = std::find_if(dataset.snrs.begin(), dataset.snrs.end(), [&](double x) {
            return (is_quiet(x) && is_quiet(snr)) || x == snr;
        });
        if (it == dataset.snrs.end())
            throw std::invalid_argument("training SNR missing from dataset");
        condition_of_train.push_back(static_cast<size_t>(it - dataset.snrs.begin()));
    }

    EvalResult result;
    result.conditions.resize(cfg.eval_snrs.size());
    for (size_t e = 0; e < cfg.eval_snrs.size(); ++e)
        result.conditions[e].snr_db = cfg.eval_snrs[e];

    size_t frame_cv_correct = 0, frame_cv_total = 0;
    std::vector<double> thresholds;

    for (int fold = 0; fold < folds; ++fold) {
        // Trio i belongs to fold i % folds, so paired variants never straddle
        // the train/test split.
        std::vector<LerPattern> train_genuine, train_modulated;
        std::vector<double> genuine_aucs, classical_aucs, replay_aucs_all;
        for (size_t i = 0; i < n; ++i) {
            if (static_cast<int>(i % static_cast<size_t>(folds)) == fold) continue;
            for (size_t c : condition_of_train) {
                const auto& g = dataset.features[c][3 * i];
                const auto& cr = dataset.features[c][3 * i + 1];
                const auto& mr = dataset.features[c][3 * i + 2];
                train_genuine.insert(train_genuine.end(), g.leps.begin(), g.leps.end());
                train_modulated.insert(train_modulated.end(), mr.leps.begin(),
                                       mr.leps.end());
                genuine_aucs.insert(genuine_aucs.end(), g.aucs.begin(), g.aucs.end());
                classical_aucs.insert(classical_aucs.end(), cr.aucs.begin(),
                                      cr.aucs.end());
                replay_aucs_all.insert(replay_aucs_all.end(), cr.aucs.begin(),
                                       cr.aucs.end());
                replay_aucs_all.insert(replay_aucs_all.end(), mr.aucs.begin(),
                                       mr.aucs.end());
            }
        }

        SvmTrainConfig train_cfg;
        train_cfg.seed = SplitMix64::derive(cfg.seed, 0x7000 + static_cast<size_t>(fold));
        const SvmModel model = train_svm(train_genuine, train_modulated, train_cfg);
        const double threshold = tune_threshold(genuine_aucs, classical_aucs);
        const double freq_only_threshold = tune_threshold(genuine_aucs, replay_aucs_all);
        thresholds.push_back(threshold);

        for (size_t e = 0; e < condition_of_eval.size(); ++e) {
            auto& metrics = result.conditions[e];
            const auto& feats = dataset.features[condition_of_eval[e]];
            for (size_t i = 0; i < n; ++i) {
                if (static_cast<int>(i % static_cast<size_t>(folds)) != fold) continue;
                for (size_t j = 0; j < 3; ++j) {
                    const auto& utt = feats[3 * i + j];
                    if (utt.leps.empty()) continue;

                    std::vector<Verdict> votes, freq_votes;
                    for (size_t k = 0; k < utt.leps.size(); ++k) {
                        votes.push_back(verdict_from_features(model, threshold,
                                                              utt.leps[k], utt.aucs[k]));
                        freq_votes.push_back(utt.aucs[k] < freq_only_threshold
                                                 ? Verdict::ClassicalReplay
                                                 : Verdict::Genuine);
                    }
                    const Verdict verdict = majority_verdict(votes);
                    const Verdict freq_verdict = majority_verdict(freq_votes);
                    const size_t truth = class_index(utt.label);
                    metrics.confusion[truth][static_cast<size_t>(verdict)] += 1;

                    const bool is_replay_class = utt.label != Provenance::Genuine;
                    const bool flagged = verdict != Verdict::Genuine;
                    const bool freq_flagged = freq_verdict != Verdict::Genuine;
                    if (is_replay_class == flagged) metrics.overall_accuracy += 1.0;
                    if (is_replay_class == freq_flagged) metrics.freq_only_overall += 1.0;
                    if (utt.label == Provenance::ModulatedReplay) {
                        metrics.modulated_detection += flagged ? 1.0 : 0.0;
                        metrics.freq_only_modulated_detection += freq_flagged ? 1.0 : 0.0;
                    } else if (utt.label == Provenance::ClassicalReplay) {
                        metrics.classical_detection += flagged ? 1.0 : 0.0;
                        metrics.freq_only_classical_detection += freq_flagged ? 1.0 : 0.0;
                    } else {
                        metrics.false_positive_rate += flagged ? 1.0 : 0.0;
                    }
                }
            }
        }

        // Frame-level CV accuracy of the classifier itself (quiet condition).
        const auto& quiet = dataset.features[condition_of_eval[0]];
        for (size_t i = 0; i < n; ++i) {
            if (static_cast<int>(i % static_cast<size_t>(folds)) != fold) continue;
            for (size_t j : {size_t{0}, size_t{2}}) {
                const auto& utt = quiet[3 * i + j];
                const bool want_modulated = utt.label == Provenance::ModulatedReplay;
                for (const auto& lep : utt.leps) {
                    if (classify_time(model, lep).first == want_modulated)
                        ++frame_cv_correct;
                    ++frame_cv_total;
                }
            }
        }
    }

    for (auto& metrics : result.conditions) {
        const auto dn = static_cast<double>(n);
        metrics.modulated_detection /= dn;
        metrics.classical_detection /= dn;
        metrics.false_positive_rate /= dn;
        metrics.overall_accuracy /= 3.0 * dn;
        metrics.freq_only_modulated_detection /= dn;
        metrics.freq_only_classical_detection /= dn;
        metrics.freq_only_overall /= 3.0 * dn;
    }
    if (!thresholds.empty()) {
        double acc = 0.0;
        for (double t : thresholds) acc += t;
        for (auto& metrics : result.conditions)
            metrics.mean_tuned_threshold = acc / static_cast<double>(thresholds.size());
    }
    result.svm_frame_cv_accuracy =
        frame_cv_total ? static_cast<double>(frame_cv_correct) /
                             static_cast<double>(frame_cv_total)
                       : 0.0;

    // Fig 7-style means and Fig 10-style AUC distributions from the quiet
    // condition.
    const auto& quiet = dataset.features[condition_of_eval[0]];
    const size_t r_max = static_cast<size_t>(cfg.detector.r_max);
    result.mean_ler_by_r.assign(r_max, {0.0, 0.0, 0.0});
    std::array<size_t, 3> frame_counts{};
    result.utterance_aucs.assign(3, {});
    for (const auto& utt : quiet) {
        const size_t cls = class_index(utt.label);
        for (const auto& lep : utt.leps) {
            for (size_t r = 0; r < r_max; ++r)
                result.mean_ler_by_r[r][cls] += lep.values[r];
            ++frame_counts[cls];
        }
        if (!utt.aucs.empty()) {
            double mean_auc = 0.0;
            for (double a : utt.aucs) mean_auc += a;
            result.utterance_aucs[cls].push_back(mean_auc /
                                                 static_cast<double>(utt.aucs.size()));
        }
    }
    for (size_t r = 0; r < r_max; ++r)
        for (size_t cls = 0; cls < 3; ++cls)
            if (frame_counts[cls])
                result.mean_ler_by_r[r][cls] /= static_cast<double>(frame_counts[cls]);

    // Median wall-clock cost of one full detect() on a fresh 32 ms frame.
    {
        const uint64_t timing_seed = SplitMix64::derive(cfg.seed, 0x11E);
        VoiceSpec spec = random_voice_spec(timing_seed);
        spec.duration_s = cfg.duration_s;
        const Signal voice = synth_voice(spec, cfg.sample_rate);
        const FrameSequence frames =
            frame_signal(voice, cfg.detector.frame_ms, cfg.detector.hop_ms);
        SvmTrainConfig train_cfg;
        std::vector<LerPattern> g, m;
        const auto& quiet_feats = dataset.features[condition_of_eval[0]];
        for (size_t i = 0; i < std::min(n, size_t{20}); ++i) {
            const auto& gu = quiet_feats[3 * i];
            const auto& mu = quiet_feats[3 * i + 2];
            g.insert(g.end(), gu.leps.begin(), gu.leps.end());
            m.insert(m.end(), mu.leps.begin(), mu.leps.end());
        }
        const SvmModel model = train_svm(g, m, train_cfg);
        DetectorConfig det = cfg.detector;
        std::vector<double> times_ms;
        for (const auto& f : frames.frames) {
            const auto start = std::chrono::steady_clock::now();
            (void)detect(f, model, det);
            const auto stop = std::chrono::steady_clock::now();
            times_ms.push_back(
                std::chrono::duration<double, std::milli>(stop - start).count());
        }
        std::sort(times_ms.begin(), times_ms.end());
        result.median_frame_detect_ms =
            times_ms.empty() ? 0.0 : times_ms[times_ms.size() / 2];
    }

    return result;
}

void write_eval_csvs(const std::filesystem::path& dir, const EvalConfig& cfg,
                     const EvalResult& result) {
    std::filesystem::create_directories(dir);

    {
        // Deterministic given the seed; wall-clock timing goes to timing.csv.
        std::ofstream out(dir / "metrics.csv", std::ios::trunc);
        out << "# replaymod-metrics v1\n";
        out << "condition,modulated_detection,classical_detection,false_positive_rate,"
               "overall_accuracy,freq_only_modulated_detection,"
               "freq_only_classical_detection,freq_only_overall,mean_tuned_threshold,"
               "svm_frame_cv_accuracy\n";
        for (const auto& m : result.conditions) {
            out << snr_label(m.snr_db) << ',' << m.modulated_detection << ','
                << m.classical_detection << ',' << m.false_positive_rate << ','
                << m.overall_accuracy << ',' << m.freq_only_modulated_detection << ','
                << m.freq_only_classical_detection << ',' << m.freq_only_overall << ','
                << m.mean_tuned_threshold << ',' << result.svm_frame_cv_accuracy
                << '\n';
        }
    }
    {
        std::ofstream out(dir / "timing.csv", std::ios::trunc);
        out << "# replaymod-timing v1\n";
        out << "median_frame_detect_ms,frame_ms\n";
        out << result.median_frame_detect_ms << ',' << cfg.detector.frame_ms << '\n';
    }
    {
        std::ofstream out(dir / "confusion.csv", std::ios::trunc);
        out << "# replaymod-confusion v1\n";
        out << "condition,true_label,pred_genuine,pred_classical,pred_modulated\n";
        const char* names[3] = {"genuine", "classical_replay", "modulated_replay"};
        for (const auto& m : result.conditions)
            for (size_t t = 0; t < 3; ++t)
                out << snr_label(m.snr_db) << ',' << names[t] << ','
                    << m.confusion[t][0] << ',' << m.confusion[t][1] << ','
                    << m.confusion[t][2] << '\n';
    }
    {
        std::ofstream out(dir / "ler_vs_r.csv", std::ios::trunc);
        out << "# replaymod-ler-vs-r v1\n";
        out << "r,mean_ler_genuine,mean_ler_classical,mean_ler_modulated\n";
        for (size_t r = 0; r < result.mean_ler_by_r.size(); ++r)
            out << (r + 1) << ',' << result.mean_ler_by_r[r][0] << ','
                << result.mean_ler_by_r[r][1] << ',' << result.mean_ler_by_r[r][2]
                << '\n';
    }
    {
        std::ofstream out(dir / "auc_distribution.csv", std::ios::trunc);
        out << "# replaymod-auc-distribution v1\n";
        out << "class,utterance_mean_auc\n";
        const char* names[3] = {"genuine", "classical_replay", "modulated_replay"};
        for (size_t cls = 0; cls < 3; ++cls)
            for (double a : result.utterance_aucs[cls])
                out << names[cls] << ',' << a << '\n';
    }
}

}  // namespace replaymod
