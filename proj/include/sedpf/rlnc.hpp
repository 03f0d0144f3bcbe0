#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <stdexcept>
#include <vector>

#include "sedpf/gf256.hpp"
#include "sedpf/packet.hpp"
#include "sedpf/rng.hpp"

namespace sedpf {

// payload[i] ^= coeff * other[i], with other zero-padded past its length.
inline void axpy(Bytes& payload, gf::Elem coeff, const Bytes& other) {
    if (coeff == 0) return;
    if (payload.size() < other.size()) payload.resize(other.size(), 0);
    for (std::size_t i = 0; i < other.size(); ++i)
        payload[i] = gf::add(payload[i], gf::mul(coeff, other[i]));
}

// GF(256) linear combination of a contiguous window of info packets.
// Payload length is the max in the window; shorter payloads are zero-padded.
inline CodedPacket encode(const std::vector<InfoPacket>& window,
                          const std::vector<gf::Elem>& coeffs) {
    if (window.empty()) throw std::invalid_argument("encode: empty window");
    if (window.size() != coeffs.size())
        throw std::invalid_argument("encode: window/coeff length mismatch");
    for (std::size_t i = 1; i < window.size(); ++i)
        if (window[i].seq != window[i - 1].seq + 1)
            throw std::invalid_argument("encode: window seqs not contiguous");
    CodedPacket out;
    out.window_lo = window.front().seq;
    out.window_hi = window.back().seq;
    out.coeffs = coeffs;
    for (std::size_t i = 0; i < window.size(); ++i)
        axpy(out.payload, coeffs[i], window[i].payload);
    std::size_t max_len = 0;
    for (const auto& u : window) max_len = std::max(max_len, u.payload.size());
    out.payload.resize(max_len, 0);
    return out;
}

// Sliding-window encoder: combines the currently unacked packets, capped at
// max_window newest. Acked prefixes are pruned and never re-enter a window.
class Encoder {
public:
    explicit Encoder(std::uint32_t max_window = 64) : max_window_(max_window) {
        if (max_window_ == 0) throw std::invalid_argument("Encoder: max_window 0");
    }

    InfoPacket push(Bytes payload) {
        InfoPacket pkt{next_seq_++, std::move(payload)};
        buffer_.push_back(pkt);
        return pkt;
    }

    // Cumulative ack: everything <= seq is delivered, drop it.
    void ack_prefix(std::uint32_t seq) {
        while (!buffer_.empty() && buffer_.front().seq <= seq) buffer_.pop_front();
    }

    bool has_window() const { return !buffer_.empty(); }
    std::uint32_t next_seq() const { return next_seq_; }

    // Coefficients come from the seed so the receiver can regenerate them
    // from the header alone. All-zero draws are re-seeded (a zero row is
    // never innovative).
    CodedPacket make_coded(std::uint64_t seed) {
        if (buffer_.empty()) throw std::logic_error("make_coded: empty window");
        std::size_t first = 0;
        if (buffer_.size() > max_window_) first = buffer_.size() - max_window_;
        std::vector<InfoPacket> window(buffer_.begin() + static_cast<long>(first),
                                       buffer_.end());
        std::vector<gf::Elem> coeffs;
        for (;;) {
            Rng rng(seed);
            coeffs = draw_coeffs(rng, window.size());
            bool all_zero = std::all_of(coeffs.begin(), coeffs.end(),
                                        [](gf::Elem c) { return c == 0; });
            if (!all_zero) break;
            seed = mix_seed(seed, 0x5EEDu);
        }
        CodedPacket out = encode(window, coeffs);
        out.coded_index = ++coded_count_;
        out.coeff_seed = seed;
        return out;
    }

private:
    std::uint32_t max_window_;
    std::uint32_t next_seq_ = 1;
    std::uint32_t coded_count_ = 0;
    std::deque<InfoPacket> buffer_;
};

// Result of feeding one packet to the decoder.
struct IngestResult {
    int rank_delta = 0;               // 1 iff the packet was innovative
    std::vector<InfoPacket> delivered;  // contiguous run extending the frontier
    bool stale = false;               // referenced seqs below the pruned window
};

// On-the-fly Gaussian elimination over the active window. Rows are kept in
// reduced row-echelon form keyed by pivot seq; a row that shrinks to a
// singleton is decodable, and decodable rows contiguous with the frontier
// are delivered.
class Decoder {
public:
    IngestResult ingest(const InfoPacket& pkt) {
        Row r;
        r.lo = pkt.seq;
        r.coeffs = {1};
        r.payload = pkt.payload;
        return ingest_row(std::move(r));
    }

    IngestResult ingest(const CodedPacket& pkt) {
        if (pkt.window_hi < pkt.window_lo || pkt.coeffs.size() != pkt.window_len())
            throw std::invalid_argument("Decoder: malformed coded packet");
        prune_below(pkt.window_lo);
        Row r;
        r.lo = pkt.window_lo;
        r.coeffs = pkt.coeffs;
        r.payload = pkt.payload;
        return ingest_row(std::move(r));
    }

    // Drop delivered-payload cache below lo; packets referencing older seqs
    // are reported stale.
    void prune_below(std::uint32_t lo) {
        if (lo <= prune_base_) return;
        prune_base_ = lo;
        delivered_cache_.erase(delivered_cache_.begin(),
                               delivered_cache_.lower_bound(lo));
    }

    std::uint32_t frontier() const { return frontier_; }
    std::uint32_t rank() const { return rank_; }

    // Keep at most n delivered payloads behind the frontier for coded-row
    // substitution; 0 means keep everything.
    void set_retain(std::uint32_t n) { retain_ = n; }

private:
    struct Row {
        std::uint32_t lo = 0;            // seq of coeffs[0]
        std::vector<gf::Elem> coeffs;    // dense from lo
        Bytes payload;

        gf::Elem at(std::uint32_t seq) const {
            if (seq < lo || seq >= lo + coeffs.size()) return 0;
            return coeffs[seq - lo];
        }
        void set(std::uint32_t seq, gf::Elem v) {
            if (seq < lo) {
                coeffs.insert(coeffs.begin(), lo - seq, 0);
                lo = seq;
            } else if (seq >= lo + coeffs.size()) {
                coeffs.resize(seq - lo + 1, 0);
            }
            coeffs[seq - lo] = v;
        }
        // this -= factor * other
        void eliminate(gf::Elem factor, const Row& other) {
            if (factor == 0) return;
            for (std::size_t i = 0; i < other.coeffs.size(); ++i) {
                if (other.coeffs[i] == 0) continue;
                std::uint32_t seq = other.lo + static_cast<std::uint32_t>(i);
                set(seq, gf::add(at(seq), gf::mul(factor, other.coeffs[i])));
            }
            axpy(payload, factor, other.payload);
        }
        void scale(gf::Elem factor) {
            for (auto& c : coeffs) c = gf::mul(c, factor);
            for (auto& b : payload) b = gf::mul(b, factor);
        }
        bool singleton_at(std::uint32_t seq) const {
            for (std::size_t i = 0; i < coeffs.size(); ++i)
                if (coeffs[i] != 0 && lo + i != seq) return false;
            return at(seq) != 0;
        }
        // First nonzero seq, or 0 when the row vanished.
        std::uint32_t pivot() const {
            for (std::size_t i = 0; i < coeffs.size(); ++i)
                if (coeffs[i] != 0) return lo + static_cast<std::uint32_t>(i);
            return 0;
        }
    };

    IngestResult ingest_row(Row r) {
        IngestResult res;
        // Substitute already-delivered payloads out of the row.
        for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
            if (r.coeffs[i] == 0) continue;
            std::uint32_t seq = r.lo + static_cast<std::uint32_t>(i);
            if (seq > frontier_) continue;
            auto it = delivered_cache_.find(seq);
            if (it == delivered_cache_.end()) {
                res.stale = true;  // needs a payload we already pruned
                return res;
            }
            axpy(r.payload, r.coeffs[i], it->second);
            r.coeffs[i] = 0;
        }
        // Eliminate every existing pivot out of r. Stored rows are in RREF,
        // so each elimination removes one pivot column for good.
        for (bool again = true; again;) {
            again = false;
            for (auto it = rows_.lower_bound(r.lo); it != rows_.end(); ++it) {
                if (it->first >= r.lo + r.coeffs.size()) break;
                gf::Elem c = r.at(it->first);
                if (c != 0) {
                    r.eliminate(c, it->second);
                    again = true;  // support may have grown, rescan
                    break;
                }
            }
        }
        std::uint32_t p = r.pivot();
        if (p == 0) return res;  // dependent row
        r.scale(gf::inv(r.at(p)));
        // Back-substitute the new pivot out of every other row.
        for (auto& [q, row] : rows_) {
            gf::Elem c = row.at(p);
            if (c != 0) row.eliminate(c, r);
        }
        rows_.emplace(p, std::move(r));
        ++rank_;
        res.rank_delta = 1;
        // Deliver the maximal contiguous decoded run past the frontier.
        for (;;) {
            auto it = rows_.find(frontier_ + 1);
            if (it == rows_.end() || !it->second.singleton_at(frontier_ + 1)) break;
            ++frontier_;
            res.delivered.push_back(InfoPacket{frontier_, it->second.payload});
            delivered_cache_.emplace(frontier_, std::move(it->second.payload));
            rows_.erase(it);
        }
        if (retain_ != 0 && frontier_ > retain_)
            prune_below(frontier_ - retain_);
        return res;
    }

    std::map<std::uint32_t, Row> rows_;  // pivot seq -> row
    std::map<std::uint32_t, Bytes> delivered_cache_;
    std::uint32_t frontier_ = 0;
    std::uint32_t rank_ = 0;
    std::uint32_t prune_base_ = 1;
    std::uint32_t retain_ = 0;
};

}  // namespace sedpf
