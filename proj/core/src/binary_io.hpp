#pragma once

// Little-endian scalar IO shared by the trajectory and checkpoint formats.

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include <adjts/errors.hpp>
#include <adjts/linalg.hpp>

namespace adjts::detail
{

inline void put_u64(std::ostream &os, std::uint64_t v)
{
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    os.write(reinterpret_cast<const char *>(b), 8);
}

inline void put_u32(std::ostream &os, std::uint32_t v)
{
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    os.write(reinterpret_cast<const char *>(b), 4);
}

inline void put_f64(std::ostream &os, double d)
{
    std::uint64_t v = 0;
    std::memcpy(&v, &d, 8);
    put_u64(os, v);
}

inline void put_vector(std::ostream &os, const Vector &v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        put_f64(os, v[i]);
    }
}

inline std::uint64_t get_u64(std::istream &is, const char *what)
{
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char *>(b), 8)) {
        throw Error(std::string("truncated ") + what);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    return v;
}

inline std::uint32_t get_u32(std::istream &is, const char *what)
{
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char *>(b), 4)) {
        throw Error(std::string("truncated ") + what);
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    }
    return v;
}

inline double get_f64(std::istream &is, const char *what)
{
    const std::uint64_t v = get_u64(is, what);
    double d = 0.0;
    std::memcpy(&d, &v, 8);
    return d;
}

inline Vector get_vector(std::istream &is, Eigen::Index n, const char *what)
{
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = get_f64(is, what);
    }
    return v;
}

} // namespace adjts::detail
