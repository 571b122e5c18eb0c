#ifndef GAZECAP_BINARY_IO_HPP
#define GAZECAP_BINARY_IO_HPP

#include "gazecap/types.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace gazecap::binio {

// Explicit little-endian encoding, independent of the host byte order.

inline void put_u32(std::ostream& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint64_t get_uint(std::istream& in, int bytes, const char* what) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) throw InputError(std::string("truncated file while reading ") + what);
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

inline std::uint32_t get_u32(std::istream& in, const char* what) {
    return static_cast<std::uint32_t>(get_uint(in, 4, what));
}
inline float get_f32(std::istream& in, const char* what) { return std::bit_cast<float>(get_u32(in, what)); }
inline double get_f64(std::istream& in, const char* what) {
    return std::bit_cast<double>(get_uint(in, 8, what));
}

inline std::string get_string(std::istream& in, const char* what, std::uint32_t max_len = 1u << 26) {
    const std::uint32_t n = get_u32(in, what);
    if (n > max_len) throw InputError(std::string("implausible length while reading ") + what);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw InputError(std::string("truncated file while reading ") + what);
    return s;
}

inline void expect_magic(std::istream& in, const char (&magic)[5], const std::string& path) {
    char buf[4];
    in.read(buf, 4);
    if (!in || std::memcmp(buf, magic, 4) != 0) throw InputError(path + ": bad magic, expected " + magic);
}

}  // namespace gazecap::binio

#endif  // GAZECAP_BINARY_IO_HPP
