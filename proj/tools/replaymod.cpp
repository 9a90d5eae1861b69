#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "replaymod/corpus.hpp"
#include "replaymod/detect.hpp"
#include "replaymod/eval.hpp"
#include "replaymod/fft.hpp"
#include "replaymod/rng.hpp"
#include "replaymod/speaker.hpp"
#include "replaymod/voice.hpp"
#include "replaymod/wav.hpp"

namespace {

using namespace replaymod;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shared run configuration: flags > config file > defaults; the default seed
// can come from REPLAYMOD_SEED.
struct RunConfig {
    int sample_rate = 96000;
    double frame_ms = 32.0;
    double hop_ms = 16.0;
    int r_max = 20;
    double eps = 1e-3;
    double auc_threshold = 0.817;
    std::string spectrum_convention = "one_sided";
    uint64_t seed = 1;

    DetectorConfig detector() const {
        DetectorConfig det;
        det.r_max = r_max;
        det.frame_ms = frame_ms;
        det.hop_ms = hop_ms;
        det.side = spectrum_convention == "two_sided" ? SpectrumSide::TwoSided
                                                      : SpectrumSide::OneSided;
        det.auc_threshold = auc_threshold;
        return det;
    }
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t\r");
            s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
        };
        trim(key);
        trim(value);
        try {
            if (key == "sample_rate") cfg.sample_rate = std::stoi(value);
            else if (key == "frame_ms") cfg.frame_ms = std::stod(value);
            else if (key == "hop_ms") cfg.hop_ms = std::stod(value);
            else if (key == "r_max") cfg.r_max = std::stoi(value);
            else if (key == "eps") cfg.eps = std::stod(value);
            else if (key == "auc_threshold") cfg.auc_threshold = std::stod(value);
            else if (key == "spectrum_convention") cfg.spectrum_convention = value;
            else if (key == "seed") cfg.seed = std::stoull(value);
            else throw UsageError("unknown config key: " + key);
        } catch (const std::invalid_argument&) {
            throw UsageError("bad value for config key " + key + ": " + value);
        }
    }
    if (cfg.spectrum_convention != "one_sided" && cfg.spectrum_convention != "two_sided")
        throw UsageError("spectrum_convention must be one_sided or two_sided");
}

double parse_snr_flag(const std::string& s) {
    if (s == "inf" || s.empty()) return kInf;
    return std::stod(s);
}

int cmd_gen(const RunConfig& run, int n, const std::vector<std::string>& speakers,
            const std::string& out_dir, const std::string& snr, double duration) {
    CorpusConfig cfg;
    cfg.n_per_class = n;
    if (!speakers.empty()) cfg.speakers = speakers;
    cfg.snr_db = parse_snr_flag(snr);
    cfg.sample_rate = run.sample_rate;
    cfg.duration_s = duration;
    cfg.eps = run.eps;
    cfg.seed = run.seed;
    const CorpusManifest manifest = build_corpus(cfg, out_dir);

    size_t counts[3] = {0, 0, 0};
    for (const auto& e : manifest.entries) ++counts[static_cast<size_t>(e.label)];
    std::cout << "wrote " << manifest.entries.size() << " files to " << out_dir << " ("
              << counts[0] << " genuine, " << counts[1] << " classical_replay, "
              << counts[2] << " modulated_replay)\n";
    return 0;
}

int cmd_measure(const RunConfig& run, const std::string& speaker,
                const std::string& out_path) {
    const size_t n_fft = next_pow2(static_cast<size_t>(run.sample_rate) / 2);
    const SpeakerProfile profile =
        make_preset_speaker(speaker, run.sample_rate, n_fft, run.seed);
    const DiscreteResponse response =
        measure_speaker(profile, run.sample_rate, n_fft, SplitMix64::derive(run.seed, 0x6EA5));

    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw std::runtime_error(out_path + ": cannot open for writing");
    out << "freq_hz,gain\n";
    for (const auto& p : response.points) out << p.freq_hz << ',' << p.gain << '\n';
    std::cout << "measured " << response.points.size() << " points for speaker '"
              << speaker << "' -> " << out_path << "\n";
    return 0;
}

DiscreteResponse read_response_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::string line;
    if (!std::getline(in, line) || line != "freq_hz,gain")
        throw std::runtime_error(path + ": expected 'freq_hz,gain' header");
    DiscreteResponse r;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string f, g;
        if (!std::getline(ss, f, ',') || !std::getline(ss, g, ','))
            throw std::runtime_error(path + ": malformed row");
        r.points.push_back({std::stod(f), std::stod(g)});
    }
    return r;
}

int cmd_fit(const std::string& in_path, const std::string& out_path, double step_hz) {
    const DiscreteResponse measured = read_response_csv(in_path);
    const ResponseCurve curve = fit_response(measured);

    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw std::runtime_error(out_path + ": cannot open for writing");
    out << "freq_hz,gain\n";
    for (double f = curve.f_min; f <= curve.f_max + 1e-9; f += step_hz)
        out << f << ',' << curve(f) << '\n';
    std::cout << "fitted " << measured.points.size() << " knots -> " << out_path
              << "\n";
    return 0;
}

int cmd_modulate(const RunConfig& run, const std::string& in_path,
                 const std::string& out_path, const std::string& speaker) {
    const Signal input = read_wav(in_path);
    const size_t n_fft = next_pow2(input.size());
    const AttackKit kit =
        prepare_attack_kit(speaker, input.sample_rate, n_fft, run.eps, run.seed);
    const ModulatedAudio modulated = modulate(input, kit.filter);
    write_wav(out_path, modulated.signal);
    std::cout << "modulated " << in_path << " -> " << out_path << " (speaker '"
              << speaker << "', eps " << run.eps << ")\n";
    return 0;
}

int cmd_replay(const RunConfig& run, const std::string& in_path,
               const std::string& out_path, const std::string& speaker,
               bool modulate_first) {
    const Signal input = read_wav(in_path);
    const size_t n_fft = next_pow2(input.size());
    const uint64_t speaker_seed = run.seed;
    const uint64_t replay_seed = SplitMix64::derive(run.seed, 0x10);

    ModulatedAudio out;
    if (modulate_first) {
        const AttackKit kit =
            prepare_attack_kit(speaker, input.sample_rate, n_fft, run.eps, speaker_seed);
        out = modulated_replay(input, kit.filter, kit.profile, replay_seed);
    } else {
        const SpeakerProfile profile =
            make_preset_speaker(speaker, input.sample_rate, n_fft, speaker_seed);
        out = classical_replay(input, profile, replay_seed);
    }
    write_wav(out_path, out.signal);
    std::cout << to_string(out.provenance) << ": " << in_path << " -> " << out_path
              << "\n";
    return 0;
}

int cmd_train(const RunConfig& run, const std::string& corpus_dir,
              const std::string& model_path) {
    const std::filesystem::path dir(corpus_dir);
    const CorpusManifest manifest = load_manifest(dir / "manifest.csv");
    const DetectorConfig det = run.detector();

    std::vector<LerPattern> genuine, modulated;
    std::vector<double> genuine_aucs, classical_aucs;
    for (const auto& e : manifest.entries) {
        if (e.label == Provenance::ClassicalReplay &&
            !genuine_aucs.empty() && classical_aucs.size() > 4000)
            continue;  // plenty for threshold tuning
        const Signal s = read_wav(dir / e.path);
        const FrameSequence frames = frame_signal(s, det.frame_ms, det.hop_ms);
        for (const auto& f : frames.frames) {
            if (mean_power(f) < det.silence_power) continue;
            if (e.label == Provenance::Genuine) {
                genuine.push_back(extract_lep(f, det.r_max));
                genuine_aucs.push_back(spectral_auc(f, 0, det.side));
            } else if (e.label == Provenance::ModulatedReplay) {
                modulated.push_back(extract_lep(f, det.r_max));
            } else {
                classical_aucs.push_back(spectral_auc(f, 0, det.side));
            }
        }
    }

    SvmTrainConfig train_cfg;
    train_cfg.seed = run.seed;
    const SvmModel model = train_svm(genuine, modulated, train_cfg);
    save_svm(model_path, model);
    std::cout << "trained on " << genuine.size() << " genuine / " << modulated.size()
              << " modulated frames; training accuracy " << model.train_accuracy
              << "\n";
    if (!genuine_aucs.empty() && !classical_aucs.empty())
        std::cout << "suggested auc_threshold "
                  << tune_threshold(genuine_aucs, classical_aucs) << "\n";
    std::cout << "model written to " << model_path << "\n";
    return 0;
}

int cmd_detect(const RunConfig& run, const std::string& model_path,
               const std::string& wav_path) {
    const SvmModel model = load_svm(model_path);
    const Signal s = read_wav(wav_path);
    const UtteranceReport report = detect_utterance_report(s, model, run.detector());
    std::cout << wav_path << ": " << to_string(report.verdict.label)
              << " (frames genuine=" << report.genuine_frames
              << " classical=" << report.classical_frames
              << " modulated=" << report.modulated_frames
              << " silent=" << report.silent_frames
              << ", mean margin=" << report.verdict.ler_score;
    if (report.verdict.freq)
        std::cout << ", median AUC=" << report.verdict.freq->auc << " vs threshold "
                  << report.verdict.freq->threshold;
    std::cout << ")\n";
    return 0;
}

int cmd_eval(const RunConfig& run, int n, const std::string& speaker,
             const std::string& out_dir, int folds, double duration) {
    EvalConfig cfg;
    cfg.n_per_class = n;
    cfg.speaker = speaker;
    cfg.sample_rate = run.sample_rate;
    cfg.duration_s = duration;
    cfg.eps = run.eps;
    cfg.seed = run.seed;
    cfg.folds = folds;
    cfg.detector = run.detector();

    std::cout << "building evaluation corpus (" << n << " utterances/class, speaker '"
              << speaker << "')...\n";
    const EvalDataset dataset = build_eval_dataset(cfg);
    const EvalResult result = run_eval(cfg, dataset);
    write_eval_csvs(out_dir, cfg, result);

    for (const auto& m : result.conditions) {
        std::cout << "condition " << (std::isinf(m.snr_db) ? "quiet" : std::to_string(m.snr_db) + " dB")
                  << ": modulated detection " << 100.0 * m.modulated_detection
                  << "%, classical detection " << 100.0 * m.classical_detection
                  << "%, false positives " << 100.0 * m.false_positive_rate
                  << "%, overall " << 100.0 * m.overall_accuracy << "%\n";
    }
    std::cout << "frequency-only modulated detection (quiet): "
              << 100.0 * result.conditions.front().freq_only_modulated_detection
              << "%\n";
    std::cout << "svm frame-level cv accuracy: " << 100.0 * result.svm_frame_cv_accuracy
              << "%\n";
    std::cout << "median per-frame detection time: " << result.median_frame_detect_ms
              << " ms (frame length " << run.frame_ms << " ms)\n";
    std::cout << "reports written to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"replaymod: modulated replay attack synthesis and dual-domain detection"};
    app.require_subcommand(1);

    RunConfig run;
    if (const char* env_seed = std::getenv("REPLAYMOD_SEED")) {
        try {
            run.seed = std::stoull(env_seed);
        } catch (...) {
            std::cerr << "REPLAYMOD_SEED is not an integer\n";
            return 2;
        }
    }

    std::string config_path;
    bool seed_given = false;
    uint64_t seed_flag = 0;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--seed", seed_flag, "master seed")->each([&](const std::string&) {
        seed_given = true;
    });
    app.add_option("--fs", run.sample_rate, "sample rate in Hz");
    app.add_option("--eps", run.eps, "inverse filter eps guard");
    app.add_option("--frame-ms", run.frame_ms, "analysis frame length (ms)");
    app.add_option("--hop-ms", run.hop_ms, "frame hop (ms)");
    app.add_option("--r-max", run.r_max, "largest local-extrema window parameter");
    app.add_option("--auc-threshold", run.auc_threshold, "frequency decision threshold");
    app.add_option("--spectrum-convention", run.spectrum_convention,
                   "one_sided or two_sided AUC bins");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic attack corpus");
    int gen_n = 10;
    std::vector<std::string> gen_speakers;
    std::string gen_out, gen_snr = "inf";
    double gen_duration = 1.0;
    gen->add_option("--n", gen_n, "utterances per class");
    gen->add_option("--speaker", gen_speakers, "speaker preset (repeatable)");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--snr", gen_snr, "mix noise at this SNR in dB ('inf' = none)");
    gen->add_option("--duration", gen_duration, "utterance length in seconds");

    // measure
    auto* measure = app.add_subcommand("measure", "measure a virtual speaker's response");
    std::string measure_speaker_name = "phone", measure_out;
    measure->add_option("--speaker", measure_speaker_name, "speaker preset");
    measure->add_option("--out", measure_out, "response CSV path")->required();

    // fit
    auto* fit = app.add_subcommand("fit", "fit a response CSV with a cubic spline");
    std::string fit_in, fit_out;
    double fit_step = 1.0;
    fit->add_option("--in", fit_in, "measured response CSV")->required();
    fit->add_option("--out", fit_out, "fitted curve CSV")->required();
    fit->add_option("--step", fit_step, "output sampling step in Hz");

    // modulate
    auto* mod = app.add_subcommand("modulate", "apply the inverse filter to a WAV");
    std::string mod_in, mod_out, mod_speaker = "phone";
    mod->add_option("--in", mod_in, "input WAV")->required();
    mod->add_option("--out", mod_out, "output WAV")->required();
    mod->add_option("--speaker", mod_speaker, "speaker preset to compensate");

    // replay
    auto* replay = app.add_subcommand("replay", "play a WAV through a virtual speaker");
    std::string replay_in, replay_out, replay_speaker = "phone";
    bool replay_modulated = false;
    replay->add_option("--in", replay_in, "input WAV")->required();
    replay->add_option("--out", replay_out, "output WAV")->required();
    replay->add_option("--speaker", replay_speaker, "speaker preset");
    replay->add_flag("--modulated", replay_modulated,
                     "modulate with the matched inverse filter before replaying");

    // train
    auto* train = app.add_subcommand("train", "train the time-domain classifier");
    std::string train_corpus, train_out;
    train->add_option("--corpus", train_corpus, "corpus directory with manifest.csv")
        ->required();
    train->add_option("--out", train_out, "model output path")->required();

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "classify a WAV");
    std::string detect_model, detect_in;
    detect_cmd->add_option("--model", detect_model, "trained model path")->required();
    detect_cmd->add_option("--in", detect_in, "input WAV")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "run the evaluation harness");
    int eval_n = 100, eval_folds = 10;
    std::string eval_speaker = "phone", eval_out = "eval_out";
    double eval_duration = 0.5;
    eval->add_option("--n", eval_n, "utterances per class");
    eval->add_option("--speaker", eval_speaker, "speaker preset");
    eval->add_option("--out", eval_out, "report directory");
    eval->add_option("--folds", eval_folds, "cross-validation folds");
    eval->add_option("--duration", eval_duration, "utterance length in seconds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!config_path.empty()) {
            // Flags win over the config file: take file values only for
            // options that were not given on the command line.
            RunConfig from_file = run;
            apply_config_file(from_file, config_path);
            if (app.count("--fs") == 0) run.sample_rate = from_file.sample_rate;
            if (app.count("--eps") == 0) run.eps = from_file.eps;
            if (app.count("--frame-ms") == 0) run.frame_ms = from_file.frame_ms;
            if (app.count("--hop-ms") == 0) run.hop_ms = from_file.hop_ms;
            if (app.count("--r-max") == 0) run.r_max = from_file.r_max;
            if (app.count("--auc-threshold") == 0)
                run.auc_threshold = from_file.auc_threshold;
            if (app.count("--spectrum-convention") == 0)
                run.spectrum_convention = from_file.spectrum_convention;
            if (!seed_given) run.seed = from_file.seed;
        }
        if (seed_given) run.seed = seed_flag;
        if (run.spectrum_convention != "one_sided" &&
            run.spectrum_convention != "two_sided")
            throw UsageError("spectrum_convention must be one_sided or two_sided");

        if (gen->parsed()) return cmd_gen(run, gen_n, gen_speakers, gen_out, gen_snr, gen_duration);
        if (measure->parsed()) return cmd_measure(run, measure_speaker_name, measure_out);
        if (fit->parsed()) return cmd_fit(fit_in, fit_out, fit_step);
        if (mod->parsed()) return cmd_modulate(run, mod_in, mod_out, mod_speaker);
        if (replay->parsed())
            return cmd_replay(run, replay_in, replay_out, replay_speaker, replay_modulated);
        if (train->parsed()) return cmd_train(run, train_corpus, train_out);
        if (detect_cmd->parsed()) return cmd_detect(run, detect_model, detect_in);
        if (eval->parsed())
            return cmd_eval(run, eval_n, eval_speaker, eval_out, eval_folds, eval_duration);
        std::cerr << "no subcommand given\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
