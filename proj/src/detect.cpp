#include "replaymod/detect.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "replaymod/fft.hpp"
#include "replaymod/rng.hpp"

namespace replaymod {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Genuine: return "Genuine";
        case Verdict::ClassicalReplay: return "ClassicalReplay";
        case Verdict::ModulatedReplay: return "ModulatedReplay";
    }
    return "unknown";
}

double local_extrema_ratio(const Signal& segment, int r) {
    const auto& y = segment.samples;
    const size_t l = y.size();
    if (l < 3) throw std::invalid_argument("segment too short");
    if (r < 1) throw std::invalid_argument("window parameter r must be >= 1");

    // Sliding window min/max over the clamped window [i-r, i+r] via monotonic
    // deques; a naive full-scan oracle lives in the tests.
    std::deque<size_t> min_q, max_q;
    size_t right = 0;  // exclusive
    size_t count = 0;

    auto push_right = [&](size_t idx) {
        while (!min_q.empty() && y[min_q.back()] >= y[idx]) min_q.pop_back();
        min_q.push_back(idx);
        while (!max_q.empty() && y[max_q.back()] <= y[idx]) max_q.pop_back();
        max_q.push_back(idx);
    };

    const size_t ur = static_cast<size_t>(r);
    for (size_t i = 1; i + 1 < l; ++i) {
        const size_t lo = i > ur ? i - ur : 0;
        const size_t hi = std::min(i + ur, l - 1);  // inclusive
        while (right <= hi) push_right(right++);
        while (!min_q.empty() && min_q.front() < lo) min_q.pop_front();
        while (!max_q.empty() && max_q.front() < lo) max_q.pop_front();
        if (y[i] == y[min_q.front()] || y[i] == y[max_q.front()]) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(l - 2);
}

LerPattern extract_lep(const Signal& segment, int r_max) {
    if (r_max < 1) throw std::invalid_argument("r_max must be >= 1");
    LerPattern lep;
    lep.values.reserve(static_cast<size_t>(r_max));
    for (int r = 1; r <= r_max; ++r) lep.values.push_back(local_extrema_ratio(segment, r));
    return lep;
}

namespace {

std::vector<double> standardize(const SvmModel& model, const LerPattern& feat) {
    if (feat.size() != model.weights.size())
        throw std::invalid_argument("feature dimension mismatch");
    std::vector<double> z(feat.size());
    for (size_t i = 0; i < z.size(); ++i)
        z[i] = (feat.values[i] - model.feature_mean[i]) / model.feature_scale[i];
    return z;
}

}  // namespace

SvmModel train_svm(const std::vector<LerPattern>& genuine_feats,
                   const std::vector<LerPattern>& modulated_feats,
                   const SvmTrainConfig& cfg) {
    if (genuine_feats.empty() || modulated_feats.empty())
        throw std::invalid_argument("both classes must be non-empty");

    const size_t dim = genuine_feats.front().size();
    const size_t m = genuine_feats.size() + modulated_feats.size();

    std::vector<const LerPattern*> feats;
    std::vector<double> labels;  // modulated = +1, genuine = -1
    feats.reserve(m);
    labels.reserve(m);
    for (const auto& f : genuine_feats) { feats.push_back(&f); labels.push_back(-1.0); }
    for (const auto& f : modulated_feats) { feats.push_back(&f); labels.push_back(+1.0); }
    for (const auto* f : feats)
        if (f->size() != dim) throw std::invalid_argument("inconsistent feature dimensions");

    SvmModel model;
    model.feature_mean.assign(dim, 0.0);
    model.feature_scale.assign(dim, 0.0);
    for (const auto* f : feats)
        for (size_t i = 0; i < dim; ++i) model.feature_mean[i] += f->values[i];
    for (size_t i = 0; i < dim; ++i) model.feature_mean[i] /= static_cast<double>(m);
    for (const auto* f : feats)
        for (size_t i = 0; i < dim; ++i) {
            const double d = f->values[i] - model.feature_mean[i];
            model.feature_scale[i] += d * d;
        }
    for (size_t i = 0; i < dim; ++i) {
        model.feature_scale[i] = std::sqrt(model.feature_scale[i] / static_cast<double>(m));
        if (model.feature_scale[i] <= 0.0) model.feature_scale[i] = 1.0;
    }

    std::vector<std::vector<double>> z(m);
    for (size_t j = 0; j < m; ++j) {
        z[j].resize(dim);
        for (size_t i = 0; i < dim; ++i)
            z[j][i] = (feats[j]->values[i] - model.feature_mean[i]) / model.feature_scale[i];
    }

    // Pegasos-style subgradient descent on
    //   lambda/2 ||w||^2 + mean(hinge(y * (w.z + b))).
    model.weights.assign(dim, 0.0);
    model.bias = 0.0;
    std::vector<size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(cfg.seed);
    size_t t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t j = m - 1; j > 0; --j)
            std::swap(order[j], order[rng.next_u64() % (j + 1)]);
        for (size_t idx : order) {
            ++t;
            const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
            const auto& x = z[idx];
            const double y = labels[idx];
            double margin = model.bias;
            for (size_t i = 0; i < dim; ++i) margin += model.weights[i] * x[i];
            const double shrink = 1.0 - eta * cfg.lambda;
            if (y * margin < 1.0) {
                for (size_t i = 0; i < dim; ++i)
                    model.weights[i] = shrink * model.weights[i] + eta * y * x[i];
                model.bias += eta * y;
            } else {
                for (size_t i = 0; i < dim; ++i) model.weights[i] *= shrink;
            }
        }
    }

    size_t correct = 0;
    for (size_t j = 0; j < m; ++j) {
        double margin = model.bias;
        for (size_t i = 0; i < dim; ++i) margin += model.weights[i] * z[j][i];
        if ((margin > 0.0 ? 1.0 : -1.0) == labels[j]) ++correct;
    }
    model.train_accuracy = static_cast<double>(correct) / static_cast<double>(m);

    std::ostringstream fp;
    fp << "g" << genuine_feats.size() << "-m" << modulated_feats.size() << "-d" << dim
       << "-s" << cfg.seed;
    model.trained_on = fp.str();
    return model;
}

std::pair<bool, double> classify_time(const SvmModel& model, const LerPattern& feat) {
    if (model.weights.empty()) throw std::invalid_argument("untrained model");
    const std::vector<double> z = standardize(model, feat);
    double margin = model.bias;
    for (size_t i = 0; i < z.size(); ++i) margin += model.weights[i] * z[i];
    return {margin > 0.0, margin};
}

double spectral_auc(const Signal& segment, size_t n_fft, SpectrumSide side) {
    validate(segment);
    if (n_fft == 0) n_fft = next_pow2(segment.size());
    if ((n_fft & (n_fft - 1)) != 0 || n_fft < segment.size())
        throw std::invalid_argument("n_fft must be a power of two >= segment length");

    Signal padded = segment;
    padded.samples.resize(n_fft, 0.0);
    const Spectrum spec = fft(padded);

    const size_t count = side == SpectrumSide::OneSided ? n_fft / 2 + 1 : n_fft;
    double total = 0.0;
    for (size_t k = 0; k < count; ++k) total += std::norm(spec.bins[k]);
    if (total <= 0.0) throw std::invalid_argument("silent segment");

    double cdf = 0.0, area = 0.0;
    for (size_t k = 0; k < count; ++k) {
        cdf += std::norm(spec.bins[k]) / total;
        area += cdf;
    }
    return area / static_cast<double>(count);
}

FreqDecision classify_freq(double auc, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("threshold must lie in (0, 1)");
    return {auc, threshold, auc < threshold};
}

double tune_threshold(const std::vector<double>& genuine_aucs,
                      const std::vector<double>& replay_aucs) {
    if (genuine_aucs.empty() || replay_aucs.empty())
        throw std::invalid_argument("both AUC sets must be non-empty");

    std::vector<double> all;
    all.reserve(genuine_aucs.size() + replay_aucs.size());
    all.insert(all.end(), genuine_aucs.begin(), genuine_aucs.end());
    all.insert(all.end(), replay_aucs.begin(), replay_aucs.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());

    std::vector<double> candidates;
    for (size_t i = 0; i + 1 < all.size(); ++i)
        candidates.push_back(0.5 * (all[i] + all[i + 1]));
    candidates.push_back(all.front());  // degenerate single-value case and
    candidates.push_back(all.back());   // the all-one-side extremes
    std::sort(candidates.begin(), candidates.end());

    auto errors_at = [&](double t) {
        size_t e = 0;
        for (double a : genuine_aucs)
            if (a < t) ++e;  // genuine flagged as replay
        for (double a : replay_aucs)
            if (!(a < t)) ++e;  // replay passed as genuine
        return e;
    };

    double best_t = candidates.front();
    size_t best_e = errors_at(best_t);
    for (double t : candidates) {
        const size_t e = errors_at(t);
        if (e < best_e || (e == best_e && t > best_t)) {
            best_e = e;
            best_t = t;
        }
    }
    return best_t;
}

std::optional<DetectionVerdict> detect(const Signal& segment, const SvmModel& model,
                                       const DetectorConfig& cfg) {
    if (mean_power(segment) < cfg.silence_power) return std::nullopt;

    DetectionVerdict verdict;
    const LerPattern lep = extract_lep(segment, cfg.r_max);
    const auto [is_modulated, margin] = classify_time(model, lep);
    verdict.ler_score = margin;
    if (is_modulated) {
        verdict.label = Verdict::ModulatedReplay;
        return verdict;  // candidate audio never reaches the frequency check
    }

    const double auc = spectral_auc(segment, 0, cfg.side);
    verdict.freq = classify_freq(auc, cfg.auc_threshold);
    verdict.label = verdict.freq->is_replay ? Verdict::ClassicalReplay : Verdict::Genuine;
    return verdict;
}

UtteranceReport detect_utterance_report(const Signal& utterance, const SvmModel& model,
                                        const DetectorConfig& cfg) {
    const FrameSequence frames = frame_signal(utterance, cfg.frame_ms, cfg.hop_ms);

    UtteranceReport report;
    double margin_sum = 0.0;
    std::vector<double> aucs;
    for (const auto& f : frames.frames) {
        const auto v = detect(f, model, cfg);
        if (!v) {
            ++report.silent_frames;
            continue;
        }
        margin_sum += v->ler_score;
        if (v->freq) aucs.push_back(v->freq->auc);
        switch (v->label) {
            case Verdict::Genuine: ++report.genuine_frames; break;
            case Verdict::ClassicalReplay: ++report.classical_frames; break;
            case Verdict::ModulatedReplay: ++report.modulated_frames; break;
        }
    }

    const size_t voiced =
        report.genuine_frames + report.classical_frames + report.modulated_frames;
    if (voiced == 0) throw std::runtime_error("no voiced content");

    // Majority vote; ties fail closed (ModulatedReplay > ClassicalReplay >
    // Genuine).
    Verdict label = Verdict::ModulatedReplay;
    size_t best = report.modulated_frames;
    if (report.classical_frames > best) {
        label = Verdict::ClassicalReplay;
        best = report.classical_frames;
    }
    if (report.genuine_frames > best) label = Verdict::Genuine;

    report.verdict.label = label;
    report.verdict.ler_score = margin_sum / static_cast<double>(voiced);
    if (!aucs.empty()) {
        std::sort(aucs.begin(), aucs.end());
        report.verdict.freq =
            classify_freq(aucs[aucs.size() / 2], cfg.auc_threshold);
    }
    return report;
}

DetectionVerdict detect_utterance(const Signal& utterance, const SvmModel& model,
                                  const DetectorConfig& cfg) {
    return detect_utterance_report(utterance, model, cfg).verdict;
}

namespace {

std::string join_doubles(const std::vector<double>& vals) {
    std::string out;
    char buf[32];
    for (size_t i = 0; i < vals.size(); ++i) {
        auto res = std::to_chars(buf, buf + sizeof(buf), vals[i]);
        if (i) out.push_back(' ');
        out.append(buf, res.ptr);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& line, const std::string& key) {
    std::istringstream ss(line);
    std::string name;
    ss >> name;
    if (name != key) throw std::runtime_error("expected '" + key + "' line");
    std::vector<double> vals;
    std::string tok;
    while (ss >> tok) {
        double v;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc{}) throw std::runtime_error("bad number in " + key);
        vals.push_back(v);
    }
    return vals;
}

}  // namespace

void save_svm(const std::filesystem::path& path, const SvmModel& model) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "dualguard-svm v1\n";
    out << "rmax " << model.weights.size() << "\n";
    out << "mean " << join_doubles(model.feature_mean) << "\n";
    out << "scale " << join_doubles(model.feature_scale) << "\n";
    out << "weights " << join_doubles(model.weights) << "\n";
    out << "bias " << join_doubles({model.bias}) << "\n";
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

SvmModel load_svm(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    std::string line;
    if (!std::getline(in, line) || line != "dualguard-svm v1")
        throw std::runtime_error(path.string() + ": bad magic line");

    SvmModel model;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": truncated");
    const std::vector<double> rmax = parse_doubles(line, "rmax");
    if (rmax.size() != 1) throw std::runtime_error(path.string() + ": bad rmax");
    const auto dim = static_cast<size_t>(rmax[0]);

    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": truncated");
    model.feature_mean = parse_doubles(line, "mean");
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": truncated");
    model.feature_scale = parse_doubles(line, "scale");
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": truncated");
    model.weights = parse_doubles(line, "weights");
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": truncated");
    const std::vector<double> bias = parse_doubles(line, "bias");
    if (bias.size() != 1) throw std::runtime_error(path.string() + ": bad bias");
    model.bias = bias[0];

    if (model.feature_mean.size() != dim || model.feature_scale.size() != dim ||
        model.weights.size() != dim)
        throw std::runtime_error(path.string() + ": dimension mismatch");
    for (double s : model.feature_scale)
        if (!(s > 0.0)) throw std::runtime_error(path.string() + ": non-positive scale");
    return model;
}

}  // namespace replaymod
