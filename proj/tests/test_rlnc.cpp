#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "sedpf/rlnc.hpp"

using namespace sedpf;

namespace {

Bytes random_payload(Rng& rng, std::size_t n) {
    Bytes b(n);
    for (auto& x : b) x = rng.byte();
    return b;
}

std::vector<InfoPacket> make_window(Rng& rng, std::uint32_t first_seq, std::size_t n,
                                    std::size_t payload_len) {
    std::vector<InfoPacket> w;
    for (std::size_t i = 0; i < n; ++i)
        w.push_back({first_seq + static_cast<std::uint32_t>(i),
                     random_payload(rng, payload_len)});
    return w;
}

}  // namespace

TEST_CASE("encode basics") {
    Rng rng(7);
    auto w = make_window(rng, 1, 2, 16);

    SECTION("single-packet identity") {
        auto c = encode({w[0]}, {0x01});
        CHECK(c.payload == w[0].payload);
        CHECK(c.window_lo == 1);
        CHECK(c.window_hi == 1);
    }
    SECTION("all-zero payloads give all-zero combination") {
        std::vector<InfoPacket> z = {{1, Bytes(8, 0)}, {2, Bytes(8, 0)}};
        auto c = encode(z, {0x13, 0x9C});
        CHECK(c.payload == Bytes(8, 0));
    }
    SECTION("per-byte oracle via gf_mul") {
        auto c = encode(w, {0x02, 0x03});
        for (std::size_t i = 0; i < 16; ++i)
            CHECK(c.payload[i] == (gf::mul(0x02, w[0].payload[i]) ^
                                   gf::mul(0x03, w[1].payload[i])));
    }
    SECTION("empty window rejected") {
        CHECK_THROWS_AS(encode({}, {}), std::invalid_argument);
    }
    SECTION("shorter payloads zero-padded to the window max") {
        std::vector<InfoPacket> m = {{1, Bytes{0xAA}}, {2, Bytes{0x11, 0x22, 0x33}}};
        auto c = encode(m, {0x01, 0x01});
        REQUIRE(c.payload.size() == 3);
        CHECK(c.payload[0] == (0xAA ^ 0x11));
        CHECK(c.payload[1] == 0x22);
        CHECK(c.payload[2] == 0x33);
    }
}

TEST_CASE("draw_coeffs determinism and bounds") {
    Rng a(42), b(42);
    auto ca = draw_coeffs(a, 32);
    auto cb = draw_coeffs(b, 32);
    CHECK(ca == cb);
    Rng c(42);
    CHECK(draw_coeffs(c, 0).empty());
}

TEST_CASE("draw_coeffs byte frequencies pass chi-square at 99%") {
    Rng rng(2024);
    constexpr std::size_t kDraws = 100000;
    std::array<std::size_t, 256> counts{};
    auto cs = draw_coeffs(rng, kDraws);
    for (auto c : cs) counts[c]++;
    double expected = static_cast<double>(kDraws) / 256.0;
    double chi2 = 0.0;
    for (auto n : counts) {
        double d = static_cast<double>(n) - expected;
        chi2 += d * d / expected;
    }
    // 99% quantile of chi-square with 255 dof
    CHECK(chi2 < 310.457);
}

TEST_CASE("decoder ingest examples") {
    Rng rng(3);
    auto w = make_window(rng, 1, 2, 8);

    SECTION("first info packet delivers immediately") {
        Decoder d;
        auto r = d.ingest(w[0]);
        CHECK(r.rank_delta == 1);
        REQUIRE(r.delivered.size() == 1);
        CHECK(r.delivered[0].seq == 1);
        CHECK(r.delivered[0].payload == w[0].payload);
    }

    SECTION("coded packet repairs a leading loss") {
        Decoder d;
        auto r2 = d.ingest(w[1]);  // seq 1 lost
        CHECK(r2.rank_delta == 1);
        CHECK(r2.delivered.empty());

        auto c = encode(w, {0x01, 0x01});
        auto rc = d.ingest(c);
        CHECK(rc.rank_delta == 1);
        REQUIRE(rc.delivered.size() == 2);
        CHECK(rc.delivered[0].seq == 1);
        CHECK(rc.delivered[0].payload == w[0].payload);
        CHECK(rc.delivered[1].seq == 2);
        CHECK(rc.delivered[1].payload == w[1].payload);
    }

    SECTION("duplicate coded packet is dependent") {
        Decoder d;
        auto c = encode(w, {0x02, 0x05});
        CHECK(d.ingest(c).rank_delta == 1);
        auto r = d.ingest(c);
        CHECK(r.rank_delta == 0);
        CHECK(r.delivered.empty());
    }

    SECTION("stale coded packet reported after pruning") {
        Decoder d;
        d.ingest(w[0]);
        d.ingest(w[1]);
        d.prune_below(3);
        auto c = encode(w, {0x01, 0x02});  // references pruned seqs 1..2
        auto r = d.ingest(c);
        CHECK(r.stale);
        CHECK(r.rank_delta == 0);
    }
}

TEST_CASE("round-trip under random losses with sufficient coded packets") {
    // Property: <= d losses in a window plus >= d innovative coded packets
    // recover everything byte-exactly.
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + rng.below(24);
        auto w = make_window(rng, 1, n, 1 + rng.below(64));
        std::size_t d = rng.below(n + 1);
        std::set<std::size_t> lost;
        while (lost.size() < d) lost.insert(rng.below(n));

        Decoder dec;
        for (std::size_t i = 0; i < n; ++i)
            if (!lost.count(i)) dec.ingest(w[i]);

        std::size_t sent = 0;
        while (dec.rank() < n && sent < d + 12) {
            auto coeffs = draw_coeffs(rng, n);
            dec.ingest(encode(w, coeffs));
            ++sent;
        }
        REQUIRE(dec.frontier() == n);
    }
}

TEST_CASE("innovation probability over a one-gap window") {
    // Window of 8 with one undelivered seq: a fresh random coded packet is
    // non-innovative only if it lands in the received span, prob ~ 1/256.
    Rng rng(5);
    const std::size_t n = 8;
    auto w = make_window(rng, 1, n, 4);
    Decoder base;
    for (std::size_t i = 0; i < n; ++i)
        if (i != 3) base.ingest(w[i]);
    REQUIRE(base.rank() == n - 1);

    constexpr std::size_t kTrials = 100000;
    std::size_t innovative = 0;
    for (std::size_t t = 0; t < kTrials; ++t) {
        Decoder d = base;
        auto c = encode(w, draw_coeffs(rng, n));
        innovative += static_cast<std::size_t>(d.ingest(c).rank_delta);
    }
    double p = 1.0 - 1.0 / 256.0;
    double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(kTrials));
    double freq = static_cast<double>(innovative) / static_cast<double>(kTrials);
    CHECK(freq >= p - 3.0 * sigma);
}

TEST_CASE("rank and frontier are monotone, rank bounded by window") {
    Rng rng(17);
    auto w = make_window(rng, 1, 16, 8);
    Decoder d;
    std::uint32_t last_rank = 0, last_frontier = 0;
    for (int step = 0; step < 200; ++step) {
        if (rng.bernoulli(0.5)) {
            d.ingest(w[rng.below(16)]);
        } else {
            d.ingest(encode(w, draw_coeffs(rng, 16)));
        }
        CHECK(d.rank() >= last_rank);
        CHECK(d.frontier() >= last_frontier);
        CHECK(d.rank() <= 16);
        last_rank = d.rank();
        last_frontier = d.frontier();
    }
}

TEST_CASE("encoder sliding window and seeded coded packets") {
    Encoder enc(4);
    std::vector<InfoPacket> sent;
    for (int i = 0; i < 6; ++i) sent.push_back(enc.push(Bytes{static_cast<std::uint8_t>(i)}));

    auto c = enc.make_coded(123);
    CHECK(c.window_hi == 6);
    CHECK(c.window_lo == 3);  // capped at max_window newest
    CHECK(c.coeffs.size() == 4);

    // Receiver regenerates identical coefficients from the header seed.
    Rng rr(c.coeff_seed);
    CHECK(draw_coeffs(rr, 4) == c.coeffs);

    enc.ack_prefix(5);
    auto c2 = enc.make_coded(124);
    CHECK(c2.window_lo == 6);
    CHECK(c2.window_hi == 6);
}

TEST_CASE("wire round trip preserves packets") {
    Rng rng(31);
    auto w = make_window(rng, 10, 3, 20);

    auto buf = wire::serialize(w[1]);
    auto parsed = wire::parse(buf);
    REQUIRE_FALSE(parsed.coded);
    CHECK(parsed.info.seq == 11);
    CHECK(parsed.info.payload == w[1].payload);

    Encoder enc(8);
    for (auto& u : w) enc.push(u.payload);
    auto c = enc.make_coded(777);
    auto cbuf = wire::serialize(c);
    CHECK(cbuf.size() == wire::kHeaderSize + c.payload.size());
    auto cp = wire::parse(cbuf);
    REQUIRE(cp.coded);
    CHECK(cp.cp.window_lo == c.window_lo);
    CHECK(cp.cp.window_hi == c.window_hi);
    CHECK(cp.cp.coeffs == c.coeffs);
    CHECK(cp.cp.payload == c.payload);

    CHECK_THROWS_AS(wire::parse(Bytes(5, 0)), std::invalid_argument);
}
