#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sedpf/gf256.hpp"
#include "sedpf/rng.hpp"

namespace sedpf {

using Bytes = std::vector<std::uint8_t>;

struct InfoPacket {
    std::uint32_t seq = 0;  // 1-based, strictly increasing per flow
    Bytes payload;
};

// Random linear combination of the info packets in [window_lo, window_hi].
// Coefficients are regenerated from coeff_seed on both sides; the expanded
// vector is kept in memory for local use but never serialized.
struct CodedPacket {
    std::uint32_t coded_index = 0;
    std::uint32_t window_lo = 0;
    std::uint32_t window_hi = 0;
    std::uint64_t coeff_seed = 0;
    std::vector<gf::Elem> coeffs;  // one per seq in [window_lo, window_hi]
    Bytes payload;

    std::uint32_t window_len() const { return window_hi - window_lo + 1; }
};

// Uniform coefficients on [0,255], deterministic for a given rng state.
inline std::vector<gf::Elem> draw_coeffs(Rng& rng, std::size_t window_len) {
    std::vector<gf::Elem> out(window_len);
    for (auto& c : out) c = rng.byte();
    return out;
}

// Wire form, little-endian:
//   kind u8 (0=info, 1=coded), seq/coded_index u32, window_lo u32,
//   window_hi u32, coeff_seed u64, payload_len u16, payload bytes.
namespace wire {

constexpr std::size_t kHeaderSize = 1 + 4 + 4 + 4 + 8 + 2;

namespace detail {

inline void put_u16(Bytes& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void put_u32(Bytes& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_u64(Bytes& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}
inline std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace detail

inline Bytes serialize(const InfoPacket& pkt) {
    Bytes out;
    out.reserve(kHeaderSize + pkt.payload.size());
    out.push_back(0);
    detail::put_u32(out, pkt.seq);
    detail::put_u32(out, pkt.seq);  // window degenerates to [seq, seq]
    detail::put_u32(out, pkt.seq);
    detail::put_u64(out, 0);
    detail::put_u16(out, static_cast<std::uint16_t>(pkt.payload.size()));
    out.insert(out.end(), pkt.payload.begin(), pkt.payload.end());
    return out;
}

inline Bytes serialize(const CodedPacket& pkt) {
    Bytes out;
    out.reserve(kHeaderSize + pkt.payload.size());
    out.push_back(1);
    detail::put_u32(out, pkt.coded_index);
    detail::put_u32(out, pkt.window_lo);
    detail::put_u32(out, pkt.window_hi);
    detail::put_u64(out, pkt.coeff_seed);
    detail::put_u16(out, static_cast<std::uint16_t>(pkt.payload.size()));
    out.insert(out.end(), pkt.payload.begin(), pkt.payload.end());
    return out;
}

struct Parsed {
    bool coded = false;
    InfoPacket info;
    CodedPacket cp;
};

inline Parsed parse(const Bytes& buf) {
    if (buf.size() < kHeaderSize) throw std::invalid_argument("wire: short header");
    Parsed out;
    const std::uint8_t* p = buf.data();
    std::uint8_t kind = p[0];
    std::uint32_t seq = detail::get_u32(p + 1);
    std::uint32_t lo = detail::get_u32(p + 5);
    std::uint32_t hi = detail::get_u32(p + 9);
    std::uint64_t seed = detail::get_u64(p + 13);
    std::uint16_t len = detail::get_u16(p + 21);
    if (buf.size() != kHeaderSize + len) throw std::invalid_argument("wire: length mismatch");
    Bytes payload(buf.begin() + kHeaderSize, buf.end());
    if (kind == 0) {
        out.coded = false;
        out.info = InfoPacket{seq, std::move(payload)};
    } else if (kind == 1) {
        if (hi < lo) throw std::invalid_argument("wire: bad coded window");
        out.coded = true;
        out.cp.coded_index = seq;
        out.cp.window_lo = lo;
        out.cp.window_hi = hi;
        out.cp.coeff_seed = seed;
        out.cp.payload = std::move(payload);
        Rng rng(seed);
        out.cp.coeffs = draw_coeffs(rng, out.cp.window_len());
    } else {
        throw std::invalid_argument("wire: unknown kind");
    }
    return out;
}

}  // namespace wire
}  // namespace sedpf
