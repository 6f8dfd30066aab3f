#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dip/matrix.hpp"

namespace dip {

// Little-endian binary helpers. Arrays on disk are LE regardless of host.

namespace io {

inline void put_u32(std::string& buf, std::uint32_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
    buf.push_back(static_cast<char>((v >> 16) & 0xff));
    buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::string& buf, float v) { put_u32(buf, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

inline std::uint32_t get_u32(const std::string& buf, std::size_t off) {
    return static_cast<std::uint8_t>(buf[off]) | (static_cast<std::uint8_t>(buf[off + 1]) << 8) |
           (static_cast<std::uint8_t>(buf[off + 2]) << 16) |
           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[off + 3])) << 24);
}

inline std::uint64_t get_u64(const std::string& buf, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(buf[off + i]);
    return v;
}

inline float get_f32(const std::string& buf, std::size_t off) {
    return std::bit_cast<float>(get_u32(buf, off));
}
inline double get_f64(const std::string& buf, std::size_t off) {
    return std::bit_cast<double>(get_u64(buf, off));
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open for writing: " + path.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw ConfigError("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("missing file: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return bytes;
}

// FNV-1a 64, used to fingerprint resolved configs in reports.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return std::string(out);
}

}  // namespace io
}  // namespace dip
