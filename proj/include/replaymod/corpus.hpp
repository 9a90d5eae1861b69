#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "replaymod/attack.hpp"

namespace replaymod {

struct ManifestEntry {
    std::string path;  // relative to the manifest's directory
    Provenance label = Provenance::Genuine;
    std::string speaker;  // "-" for genuine entries
    double snr_db = 0.0;  // +inf = no noise
    uint64_t seed = 0;
};

struct CorpusManifest {
    int format_version = 1;
    std::vector<ManifestEntry> entries;
};

struct CorpusConfig {
    int n_per_class = 10;
    std::vector<std::string> speakers = {"phone"};
    double snr_db = std::numeric_limits<double>::infinity();  // ambient mix
    int sample_rate = 96000;
    double duration_s = 1.0;
    double eps = 1e-3;
    double capture_floor_rms = 2e-4;  // ASR microphone floor, absolute RMS
    uint64_t seed = 1;
};

// A speaker profile paired with the inverse filter an attacker would derive
// for it (measure -> fit -> sample -> build), realized for n_fft-bin signals.
struct AttackKit {
    SpeakerProfile profile;
    std::shared_ptr<const InverseFilter> filter;
};
AttackKit prepare_attack_kit(const std::string& preset, int fs, size_t n_fft,
                             double eps, uint64_t seed);

// Synthesizes n_per_class genuine voices and, per speaker, derives the
// classical and modulated replay variants through the measured-and-fitted
// inverse filter. Writes one WAV per entry plus manifest.csv into out_dir.
// A pure function of the config: reruns produce byte-identical trees.
CorpusManifest build_corpus(const CorpusConfig& cfg,
                            const std::filesystem::path& out_dir);

// UTF-8 CSV with header "path,label,speaker,snr_db,seed".
void save_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);
CorpusManifest load_manifest(const std::filesystem::path& path);

}  // namespace replaymod
