#include <catch2/catch_amalgamated.hpp>

#include "sedpf/netsim.hpp"

using namespace sedpf;

namespace {

ChannelSpec fixed_channel(double T, double delay, double eps, double fb = 0.050) {
    ChannelSpec c;
    c.slot_duration = T;
    c.delay_mode = DelayMode::Iid;
    c.base_delay = delay;
    c.jitter_sd = 0.0;
    c.erasure = eps;
    c.feedback_delay = fb;
    return c;
}

}  // namespace

TEST_CASE("channel: fixed delay, no loss") {
    auto spec = fixed_channel(0.01, 0.050, 0.0);
    Channel ch(spec, 7);
    for (int s = 0; s < 50; ++s) {
        auto a = ch.transmit(s * 0.01);
        REQUIRE(a);
        CHECK(*a == Catch::Approx(s * 0.01 + 0.050));
    }
}

TEST_CASE("channel: erasure one always drops") {
    auto spec = fixed_channel(0.01, 0.050, 1.0);
    Channel ch(spec, 7);
    for (int s = 0; s < 100; ++s) CHECK_FALSE(ch.transmit(s * 0.01).has_value());
}

TEST_CASE("channel: correlated mode is monotone over 1e5 slots") {
    ChannelSpec spec;
    spec.slot_duration = 0.001;
    spec.delay_mode = DelayMode::CorrelatedMonotone;
    spec.base_delay = 0.050;
    spec.jitter_sd = 0.0005;
    spec.erasure = 0.0;
    Channel ch(spec, 99);
    double last = -1.0;
    for (int s = 0; s < 100000; ++s) {
        auto a = ch.transmit(s * 0.001);
        REQUIRE(a);
        REQUIRE(*a >= last);
        REQUIRE(*a >= s * 0.001);  // causality
        last = *a;
    }
}

TEST_CASE("two identical lossless fixed-delay paths, edpf, no coding: zero buffering") {
    SimConfig cfg;
    cfg.channels = {fixed_channel(0.01, 0.050, 0.0), fixed_channel(0.01, 0.050, 0.0)};
    cfg.selector = Selector::Edpf;
    cfg.total_packets = 2000;
    cfg.seed = 5;
    auto m = run_sim(cfg);
    CHECK(m.delivered == 2000);
    CHECK(m.undelivered == 0);
    CHECK(m.mean_buffering_delay() == 0.0);
    CHECK(m.ascending_ok);
    // Both paths carry traffic under the alternating schedule.
    CHECK(m.per_path_sent[0] > 0);
    CHECK(m.per_path_sent[1] > 0);
}

TEST_CASE("cross-path blocking matches the reassembly rule") {
    // rr sends packet 1 on the slow path and packet 2 on the fast one at the
    // same instant; packet 2 waits for packet 1.
    SimConfig cfg;
    cfg.channels = {fixed_channel(0.001, 0.100, 0.0), fixed_channel(0.001, 0.010, 0.0)};
    cfg.selector = Selector::Rr;
    cfg.total_packets = 2;
    cfg.seed = 1;
    auto m = run_sim(cfg);
    REQUIRE(m.delivered == 2);
    CHECK(m.in_order_delays[0] == Catch::Approx(0.100));
    CHECK(m.in_order_delays[1] == Catch::Approx(0.100));
    CHECK(m.buffering_delays[0] == 0.0);
    CHECK(m.buffering_delays[1] == Catch::Approx(0.090));
}

TEST_CASE("conservation and losses without recovery") {
    SimConfig cfg;
    cfg.channels = {fixed_channel(0.002, 0.030, 0.1)};
    cfg.selector = Selector::Edpf;
    cfg.total_packets = 3000;
    cfg.seed = 11;
    auto m = run_sim(cfg);
    CHECK(m.sent_info == 3000);
    CHECK(m.delivered + m.undelivered == m.sent_info);
    CHECK(m.undelivered > 0);  // no ARQ, no FEC: losses stay lost
    CHECK(m.erased > 0);
}

TEST_CASE("ideal ARQ recovers every packet") {
    SimConfig cfg;
    cfg.channels = {fixed_channel(0.002, 0.050, 0.05), fixed_channel(0.002, 0.050, 0.0)};
    cfg.selector = Selector::Edpf;
    cfg.arq = true;
    cfg.total_packets = 4000;
    cfg.seed = 21;
    auto m = run_sim(cfg);
    CHECK(m.delivered == 4000);
    CHECK(m.undelivered == 0);
    CHECK(m.sent_retx > 0);

    // Causality floor: a retransmitted packet cannot beat detection + one
    // feedback trip + the retransmit transit.
    double worst = 0.0;
    for (double d : m.in_order_delays) worst = std::max(worst, d);
    CHECK(worst >= 0.050 + 0.050);
}

TEST_CASE("no losses means no retransmissions") {
    SimConfig cfg;
    cfg.channels = {fixed_channel(0.002, 0.040, 0.0)};
    cfg.arq = true;
    cfg.total_packets = 1000;
    cfg.seed = 3;
    auto m = run_sim(cfg);
    CHECK(m.sent_retx == 0);
    CHECK(m.delivered == 1000);
    CHECK(m.mean_buffering_delay() == 0.0);
}

TEST_CASE("coding recovers losses and costs one slot per frame") {
    SimConfig cfg;
    cfg.channels = {fixed_channel(0.001, 0.050, 0.05), fixed_channel(0.001, 0.050, 0.0)};
    cfg.selector = Selector::Sedpf;
    cfg.tau = 4;
    cfg.coding_window = 512;
    cfg.total_packets = 20000;
    cfg.seed = 17;
    auto m = run_sim(cfg);
    CHECK(m.sent_coded > 0);
    // Frame accounting: coded slots are one per tau emissions.
    double coded_share =
        static_cast<double>(m.sent_coded) / static_cast<double>(m.sent_info + m.sent_coded);
    CHECK(coded_share == Catch::Approx(0.25).margin(0.01));
    // Capacity holds, so nearly everything decodes before the horizon.
    CHECK(static_cast<double>(m.undelivered) < 0.01 * static_cast<double>(m.sent_info));
    CHECK(m.goodput_ratio() == Catch::Approx(0.75).margin(0.01));
    CHECK(m.frames_completed > 0);
    std::uint64_t frame_total = 0;
    for (auto c : m.frame_counts) frame_total += c;
    CHECK(frame_total >= m.frames_completed * 4);
}

TEST_CASE("coded path rides the lossiest link") {
    SimConfig cfg;
    cfg.channels = {fixed_channel(0.001, 0.050, 0.0), fixed_channel(0.001, 0.050, 0.08)};
    cfg.selector = Selector::Edpf;
    cfg.tau = 4;
    cfg.coding_window = 512;
    cfg.total_packets = 4000;
    cfg.seed = 29;
    cfg.record_trace = true;
    auto m = run_sim(cfg);
    for (const auto& row : m.trace)
        if (row.kind == 'c' && (row.event == "send" || row.event == "erased"))
            CHECK(row.path == 2);
}

TEST_CASE("determinism: same config and seed give identical metrics") {
    SimConfig cfg;
    cfg.channels = {fixed_channel(0.002, 0.040, 0.03)};
    ChannelSpec j = fixed_channel(0.002, 0.060, 0.0);
    j.jitter_sd = 0.010;
    cfg.channels.push_back(j);
    cfg.selector = Selector::Sedpf;
    cfg.tau = 8;
    cfg.coding_window = 256;
    cfg.arq = false;
    cfg.total_packets = 5000;
    cfg.seed = 12345;
    auto a = run_sim(cfg);
    auto b = run_sim(cfg);
    CHECK(a.sent_info == b.sent_info);
    CHECK(a.sent_coded == b.sent_coded);
    CHECK(a.erased == b.erased);
    CHECK(a.delivered == b.delivered);
    REQUIRE(a.in_order_delays.size() == b.in_order_delays.size());
    for (std::size_t i = 0; i < a.in_order_delays.size(); ++i)
        REQUIRE(a.in_order_delays[i] == b.in_order_delays[i]);
    for (std::size_t i = 0; i < a.buffering_delays.size(); ++i)
        REQUIRE(a.buffering_delays[i] == b.buffering_delays[i]);
}

TEST_CASE("delivery timestamps are nondecreasing in packet index") {
    SimConfig cfg;
    ChannelSpec noisy = fixed_channel(0.002, 0.050, 0.0);
    noisy.jitter_sd = 0.015;
    cfg.channels = {noisy, fixed_channel(0.002, 0.050, 0.0)};
    cfg.selector = Selector::Rr;  // forces cross-path reordering
    cfg.total_packets = 3000;
    cfg.seed = 31;
    auto m = run_sim(cfg);
    REQUIRE(m.delivered == 3000);
    // in_order_delays are recorded in delivery (== seq) order; reconstruct
    // absolute delivery times via the definition Y_k = delay_k + send_k and
    // check monotonicity through the trace instead.
    CHECK(m.ascending_ok);
}

TEST_CASE("adaptive estimation keeps the run healthy") {
    SimConfig cfg;
    ChannelSpec a = fixed_channel(0.002, 0.050, 0.02);
    a.jitter_sd = 0.005;
    cfg.channels = {a, fixed_channel(0.002, 0.050, 0.0)};
    cfg.selector = Selector::Sedpf;
    cfg.tau = 4;
    cfg.coding_window = 256;
    cfg.adaptive = true;
    cfg.total_packets = 8000;
    cfg.seed = 77;
    auto m = run_sim(cfg);
    CHECK(static_cast<double>(m.undelivered) < 0.02 * static_cast<double>(m.sent_info));
    auto n = run_sim(cfg);
    CHECK(m.delivered == n.delivered);  // adaptive path is deterministic too
}

TEST_CASE("trace export is time sorted and complete") {
    SimConfig cfg;
    cfg.channels = {fixed_channel(0.005, 0.020, 0.0)};
    cfg.total_packets = 50;
    cfg.record_trace = true;
    cfg.seed = 2;
    auto m = run_sim(cfg);
    REQUIRE_FALSE(m.trace.empty());
    double last = 0.0;
    std::size_t sends = 0, deliveries = 0;
    for (const auto& row : m.trace) {
        REQUIRE(row.t >= last);
        last = row.t;
        if (row.event == "send") ++sends;
        if (row.event == "deliver") ++deliveries;
    }
    CHECK(sends == 50);
    CHECK(deliveries == 50);
}

TEST_CASE("config validation") {
    SimConfig cfg;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // no channels
    cfg.channels = {fixed_channel(0.01, 0.05, 0.0)};
    cfg.tau = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.tau = 4;
    cfg.pinned_layout = {1, 1};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.pinned_layout = {1, 1, 1, 1};
    CHECK_NOTHROW(cfg.validate());
}
