#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace sedpf {
namespace gf {

// GF(256) with the AES reduction polynomial x^8+x^4+x^3+x+1 (0x11B).
// Addition is XOR; multiplication goes through a 256x256 table built once
// at startup.

using Elem = std::uint8_t;

constexpr unsigned kReductionPoly = 0x11B;

inline Elem add(Elem a, Elem b) { return static_cast<Elem>(a ^ b); }
inline Elem sub(Elem a, Elem b) { return static_cast<Elem>(a ^ b); }

namespace detail {

// Shift-and-add product, reducing on overflow past x^8.
constexpr Elem mul_slow(Elem a, Elem b) {
    unsigned acc = 0;
    unsigned aa = a;
    unsigned bb = b;
    while (bb) {
        if (bb & 1u) acc ^= aa;
        aa <<= 1;
        if (aa & 0x100u) aa ^= kReductionPoly;
        bb >>= 1;
    }
    return static_cast<Elem>(acc);
}

struct Tables {
    std::array<std::array<Elem, 256>, 256> mul{};
    std::array<Elem, 256> inv{};

    Tables() {
        for (unsigned a = 0; a < 256; ++a) {
            for (unsigned b = a; b < 256; ++b) {
                Elem p = mul_slow(static_cast<Elem>(a), static_cast<Elem>(b));
                mul[a][b] = p;
                mul[b][a] = p;
                if (p == 1) {
                    inv[a] = static_cast<Elem>(b);
                    inv[b] = static_cast<Elem>(a);
                }
            }
        }
    }
};

inline const Tables& tables() {
    static const Tables t;
    return t;
}

}  // namespace detail

inline Elem mul(Elem a, Elem b) { return detail::tables().mul[a][b]; }

inline Elem inv(Elem a) {
    if (a == 0) throw std::domain_error("gf::inv: zero has no inverse");
    return detail::tables().inv[a];
}

// a / b == a * inv(b)
inline Elem div(Elem a, Elem b) { return mul(a, inv(b)); }

}  // namespace gf
}  // namespace sedpf
