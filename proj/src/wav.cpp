#include "replaymod/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace replaymod {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error(path.string() + ": " + what);
}

uint32_t read_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xFF));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<uint8_t>((v >> 24) & 0xFF));
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xFF));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
}

void put_tag(std::vector<uint8_t>& out, const char* tag) {
    out.insert(out.end(), tag, tag + 4);
}

}  // namespace

Signal read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
        std::memcmp(data.data() + 8, "WAVE", 4) != 0)
        fail(path, "not a RIFF/WAVE file");

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    bool have_fmt = false;
    size_t data_off = 0, data_len = 0;

    size_t pos = 12;
    while (pos + 8 <= data.size()) {
        const uint8_t* hdr = data.data() + pos;
        const uint32_t chunk_len = read_u32(hdr + 4);
        const size_t body = pos + 8;
        if (body + chunk_len > data.size()) fail(path, "truncated chunk");
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (chunk_len < 16) fail(path, "short fmt chunk");
            format = read_u16(data.data() + body);
            channels = read_u16(data.data() + body + 2);
            sample_rate = read_u32(data.data() + body + 4);
            bits = read_u16(data.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data_off = body;
            data_len = chunk_len;
        }
        pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
    }

    if (!have_fmt || data_off == 0) fail(path, "missing fmt or data chunk");
    if (channels != 1) fail(path, "only mono supported");
    if (sample_rate == 0) fail(path, "zero sample rate");

    Signal s;
    s.sample_rate = static_cast<int>(sample_rate);
    if (format == 1 && bits == 16) {
        const size_t n = data_len / 2;
        s.samples.resize(n);
        for (size_t i = 0; i < n; ++i) {
            const uint8_t* p = data.data() + data_off + 2 * i;
            const int16_t v = static_cast<int16_t>(p[0] | (p[1] << 8));
            s.samples[i] = static_cast<double>(v) / 32768.0;
        }
    } else if (format == 3 && bits == 32) {
        const size_t n = data_len / 4;
        s.samples.resize(n);
        for (size_t i = 0; i < n; ++i) {
            uint32_t raw = read_u32(data.data() + data_off + 4 * i);
            float f;
            std::memcpy(&f, &raw, 4);
            s.samples[i] = static_cast<double>(f);
        }
    } else {
        fail(path, "unsupported format (want 16-bit PCM or 32-bit float mono)");
    }
    return s;
}

void write_wav(const std::filesystem::path& path, const Signal& s) {
    if (s.sample_rate <= 0) fail(path, "non-positive sample rate");

    const uint32_t n = static_cast<uint32_t>(s.samples.size());
    const uint32_t data_bytes = n * 4;
    std::vector<uint8_t> out;
    out.reserve(58 + data_bytes);

    put_tag(out, "RIFF");
    put_u32(out, 4 + (8 + 18) + (8 + 4) + (8 + data_bytes));
    put_tag(out, "WAVE");

    // fmt chunk, WAVE_FORMAT_IEEE_FLOAT with the required cbSize field.
    put_tag(out, "fmt ");
    put_u32(out, 18);
    put_u16(out, 3);  // IEEE float
    put_u16(out, 1);  // mono
    put_u32(out, static_cast<uint32_t>(s.sample_rate));
    put_u32(out, static_cast<uint32_t>(s.sample_rate) * 4);
    put_u16(out, 4);
    put_u16(out, 32);
    put_u16(out, 0);

    // fact chunk (sample count), expected by strict readers for non-PCM.
    put_tag(out, "fact");
    put_u32(out, 4);
    put_u32(out, n);

    put_tag(out, "data");
    put_u32(out, data_bytes);
    for (double v : s.samples) {
        const float f = static_cast<float>(v);
        uint32_t raw;
        std::memcpy(&raw, &f, 4);
        put_u32(out, raw);
    }

    std::ofstream o(path, std::ios::binary | std::ios::trunc);
    if (!o) fail(path, "cannot open for writing");
    o.write(reinterpret_cast<const char*>(out.data()),
            static_cast<std::streamsize>(out.size()));
    if (!o) fail(path, "write failed");
}

}  // namespace replaymod
