#include "replaymod/corpus.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "replaymod/fft.hpp"
#include "replaymod/rng.hpp"
#include "replaymod/speaker.hpp"
#include "replaymod/voice.hpp"
#include "replaymod/wav.hpp"

namespace replaymod {

namespace {

std::string format_snr(double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return "inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), snr_db);
    return std::string(buf, res.ptr);
}

double parse_snr(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    double v;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw std::runtime_error("bad snr_db field: " + s);
    return v;
}

Signal maybe_noisy(const Signal& s, double snr_db, uint64_t seed) {
    if (std::isinf(snr_db) && snr_db > 0) return s;
    return mix_noise(s, snr_db, seed);
}

}  // namespace

AttackKit prepare_attack_kit(const std::string& preset, int fs, size_t n_fft,
                             double eps, uint64_t seed) {
    AttackKit kit;
    kit.profile = make_preset_speaker(preset, fs, n_fft, seed);

    // The attacker measures on a tone grid of its own analysis size and
    // resamples the fitted curve onto the target signal's bin grid.
    const size_t measure_fft = next_pow2(static_cast<size_t>(fs) / 2);
    const SpeakerProfile measured_profile =
        make_preset_speaker(preset, fs, measure_fft, seed);
    const DiscreteResponse measured =
        measure_speaker(measured_profile, fs, measure_fft,
                        SplitMix64::derive(seed, 0x6EA5));
    const ResponseCurve curve = fit_response(measured);
    const double delta_f = static_cast<double>(fs) / static_cast<double>(n_fft);
    kit.filter = std::make_shared<const InverseFilter>(
        build_inverse_filter(sample_response(curve, delta_f, n_fft), delta_f, eps));
    return kit;
}

CorpusManifest build_corpus(const CorpusConfig& cfg,
                            const std::filesystem::path& out_dir) {
    if (cfg.n_per_class < 10) throw std::invalid_argument("n_per_class must be >= 10");
    if (cfg.speakers.empty()) throw std::invalid_argument("need at least one speaker");
    if (cfg.sample_rate <= 0) throw std::invalid_argument("non-positive sample rate");

    std::filesystem::create_directories(out_dir);

    const auto length =
        static_cast<size_t>(std::llround(cfg.duration_s * cfg.sample_rate));
    const size_t n_fft = next_pow2(length);

    std::vector<AttackKit> kits;
    for (size_t si = 0; si < cfg.speakers.size(); ++si) {
        const uint64_t speaker_seed = SplitMix64::derive(cfg.seed, 0x5000 + si);
        kits.push_back(prepare_attack_kit(cfg.speakers[si], cfg.sample_rate, n_fft,
                                          cfg.eps, speaker_seed));
    }

    CorpusManifest manifest;
    char name_buf[64];
    for (int i = 0; i < cfg.n_per_class; ++i) {
        const uint64_t voice_seed = SplitMix64::derive(cfg.seed, static_cast<uint64_t>(i));
        VoiceSpec spec = random_voice_spec(voice_seed);
        spec.duration_s = cfg.duration_s;
        const Signal genuine = synth_voice(spec, cfg.sample_rate);

        // What the ASR front end captures: signal + microphone floor, plus
        // the optional ambient mix.
        auto captured = [&](const Signal& s, uint64_t base_seed) {
            const Signal floored = add_capture_floor(s, cfg.capture_floor_rms,
                                                     SplitMix64::derive(base_seed, 0x0F));
            return maybe_noisy(floored, cfg.snr_db, SplitMix64::derive(base_seed, 0x90));
        };

        std::snprintf(name_buf, sizeof(name_buf), "genuine_%04d.wav", i);
        write_wav(out_dir / name_buf, captured(genuine, voice_seed));
        manifest.entries.push_back(
            {name_buf, Provenance::Genuine, "-", cfg.snr_db, voice_seed});

        for (size_t si = 0; si < kits.size(); ++si) {
            const auto& kit = kits[si];
            const uint64_t replay_seed = SplitMix64::derive(voice_seed, 0x10 + si);

            const ModulatedAudio classical =
                classical_replay(genuine, kit.profile, replay_seed);
            std::snprintf(name_buf, sizeof(name_buf), "classical_%s_%04d.wav",
                          kit.profile.name.c_str(), i);
            write_wav(out_dir / name_buf,
                      captured(classical.signal, SplitMix64::derive(replay_seed, 1)));
            manifest.entries.push_back({name_buf, Provenance::ClassicalReplay,
                                        kit.profile.name, cfg.snr_db, replay_seed});

            const ModulatedAudio modulated =
                modulated_replay(genuine, kit.filter, kit.profile, replay_seed);
            std::snprintf(name_buf, sizeof(name_buf), "modulated_%s_%04d.wav",
                          kit.profile.name.c_str(), i);
            write_wav(out_dir / name_buf,
                      captured(modulated.signal, SplitMix64::derive(replay_seed, 2)));
            manifest.entries.push_back({name_buf, Provenance::ModulatedReplay,
                                        kit.profile.name, cfg.snr_db, replay_seed});
        }
    }

    save_manifest(out_dir / "manifest.csv", manifest);
    return manifest;
}

void save_manifest(const std::filesystem::path& path, const CorpusManifest& manifest) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "path,label,speaker,snr_db,seed\n";
    for (const auto& e : manifest.entries) {
        out << e.path << ',' << to_string(e.label) << ',' << e.speaker << ','
            << format_snr(e.snr_db) << ',' << e.seed << '\n';
    }
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    std::string line;
    if (!std::getline(in, line) || line != "path,label,speaker,snr_db,seed")
        throw std::runtime_error(path.string() + ": bad manifest header");

    CorpusManifest manifest;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string path_field, label, speaker, snr, seed;
        if (!std::getline(ss, path_field, ',') || !std::getline(ss, label, ',') ||
            !std::getline(ss, speaker, ',') || !std::getline(ss, snr, ',') ||
            !std::getline(ss, seed, ','))
            throw std::runtime_error(path.string() + ": malformed row");
        ManifestEntry e;
        e.path = path_field;
        e.label = provenance_from_string(label);
        e.speaker = speaker;
        e.snr_db = parse_snr(snr);
        e.seed = std::stoull(seed);
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

}  // namespace replaymod
