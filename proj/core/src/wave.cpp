#include "vcmorph/wave.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <vector>

#include "vcmorph/errors.hpp"

namespace vc {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16(std::ostream& os, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

Waveform load_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open WAV file: " + path.string());

    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw DataError("malformed RIFF/WAVE header: " + path.string());
    }

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;
    bool have_fmt = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        std::uint32_t chunk_size = read_u32(chunk + 4);
        std::size_t body = pos + 8;
        if (body + chunk_size > bytes.size()) chunk_size = static_cast<std::uint32_t>(bytes.size() - body);
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw DataError("truncated fmt chunk: " + path.string());
            format = read_u16(chunk + 8);
            channels = read_u16(chunk + 10);
            rate = read_u32(chunk + 12);
            bits = read_u16(chunk + 22);
            if (format == kFormatExtensible && chunk_size >= 40) {
                // subformat GUID starts with the base format tag
                format = read_u16(chunk + 8 + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = chunk_size;
        }
        pos = body + chunk_size + (chunk_size & 1);
    }

    if (!have_fmt) throw DataError("missing fmt chunk: " + path.string());
    if (rate == 0 || channels == 0) throw DataError("malformed fmt chunk: " + path.string());
    if (data == nullptr || data_size == 0) throw DataError("empty data chunk: " + path.string());

    const bool pcm16 = format == kFormatPcm && bits == 16;
    const bool f32 = format == kFormatFloat && bits == 32;
    if (!pcm16 && !f32) {
        throw DataError("unsupported WAV codec (format " + std::to_string(format) + ", " +
                        std::to_string(bits) + " bit): " + path.string());
    }
    if (channels > 1) {
        std::cerr << "warning: " << path.string() << " has " << channels
                  << " channels, keeping channel 0\n";
    }

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t stride = bytes_per_sample * channels;
    const std::size_t n = data_size / stride;

    Waveform w;
    w.sample_rate = static_cast<int>(rate);
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* s = data + i * stride;
        if (pcm16) {
            std::int16_t v = static_cast<std::int16_t>(read_u16(s));
            w.samples[i] = static_cast<double>(v) / 32768.0;
        } else {
            float f;
            std::memcpy(&f, s, 4);
            if (!std::isfinite(f)) throw DataError("non-finite sample in " + path.string());
            w.samples[i] = std::clamp(static_cast<double>(f), -1.0, 1.0);
        }
    }
    return w;
}

void save_wav(const Waveform& w, const std::filesystem::path& path) {
    if (w.empty()) throw DataError("refusing to write empty waveform: " + path.string());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path.string());

    const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
    const std::uint32_t data_size = n * 2;
    const std::uint32_t rate = static_cast<std::uint32_t>(w.sample_rate);

    out.write("RIFF", 4);
    write_u32(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_u32(out, 16);
    write_u16(out, kFormatPcm);
    write_u16(out, 1);  // mono
    write_u32(out, rate);
    write_u32(out, rate * 2);  // byte rate
    write_u16(out, 2);         // block align
    write_u16(out, 16);
    out.write("data", 4);
    write_u32(out, data_size);

    for (double x : w.samples) {
        double c = std::clamp(x, -1.0, 1.0);
        long q = std::lround(c * 32768.0);
        q = std::clamp(q, -32768L, 32767L);
        write_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    if (!out) throw DataError("short write: " + path.string());
}

Waveform peak_normalize(const Waveform& w, double peak) {
    double m = 0.0;
    for (double x : w.samples) m = std::max(m, std::fabs(x));
    if (m <= 0.0) return w;
    Waveform out = w;
    const double s = peak / m;
    for (double& x : out.samples) x *= s;
    return out;
}

}  // namespace vc
