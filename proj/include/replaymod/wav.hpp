#pragma once

#include <filesystem>

#include "replaymod/signal.hpp"

namespace replaymod {

// RIFF/WAVE reader. Accepts mono 16-bit signed PCM (samples map to [-1, 1)
// by division by 32768) and mono 32-bit IEEE float. Throws std::runtime_error
// with the offending path on malformed or unsupported files.
Signal read_wav(const std::filesystem::path& path);

// Writes mono 32-bit IEEE float, little-endian. Deterministic byte output
// for identical input.
void write_wav(const std::filesystem::path& path, const Signal& s);

}  // namespace replaymod
