#pragma once

// Little-endian binary readers/writers shared by the file-format code.

#include "ternhash/common.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

namespace ternhash::binio {

inline void write_bytes(std::ostream& os, const void* p, size_t len) {
    os.write(static_cast<const char*>(p), std::streamsize(len));
}

inline void write_u32(std::ostream& os, uint32_t v) {
    uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
    write_bytes(os, b, 4);
}

inline void write_u64(std::ostream& os, uint64_t v) {
    uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = uint8_t(v >> (8 * i));
    write_bytes(os, b, 8);
}

inline void write_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(os, bits);
}

inline void write_f32(std::ostream& os, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(os, bits);
}

inline void read_bytes(std::istream& is, void* p, size_t len, const char* what) {
    is.read(static_cast<char*>(p), std::streamsize(len));
    if (!is) throw DataError(std::string("unexpected end of file reading ") + what);
}

inline uint32_t read_u32(std::istream& is, const char* what) {
    uint8_t b[4];
    read_bytes(is, b, 4, what);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

inline uint64_t read_u64(std::istream& is, const char* what) {
    uint8_t b[8];
    read_bytes(is, b, 8, what);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
    return v;
}

inline double read_f64(std::istream& is, const char* what) {
    uint64_t bits = read_u64(is, what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline float read_f32(std::istream& is, const char* what) {
    uint32_t bits = read_u32(is, what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

inline void write_magic(std::ostream& os, const char magic[4]) { write_bytes(os, magic, 4); }

inline void expect_magic(std::istream& is, const char magic[4], const std::string& path) {
    char got[4];
    read_bytes(is, got, 4, "magic");
    if (std::memcmp(got, magic, 4) != 0)
        throw DataError(path + ": bad magic, not a " + std::string(magic, 4) + " file");
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path);
    return os;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open for reading: " + path);
    return is;
}

}  // namespace ternhash::binio
