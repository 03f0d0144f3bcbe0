#include <catch2/catch_amalgamated.hpp>

#include "sedpf/rng.hpp"
#include "sedpf/scheduler.hpp"

using namespace sedpf;

namespace {

PathModel make_model(int id, double slot, double owd, double var, double eps = 0.0) {
    PathModel m;
    m.path_id = id;
    m.slot_duration = slot;
    m.owd_mean = owd;
    m.delay_bound = std::max(owd, slot);
    m.window = std::max(1, static_cast<int>(std::ceil(m.delay_bound / slot)));
    m.delta_mean = slot;  // steady-state arrival cadence tracks the slots
    m.delta_var = var;
    m.erasure_rate = eps;
    return m;
}

}  // namespace

TEST_CASE("sedpf with a single path always picks it") {
    ScheduleState st({make_model(1, 0.01, 0.05, 1e-6)});
    for (int i = 0; i < 5; ++i) CHECK(sedpf_select(st).path_id == 1);
}

TEST_CASE("sedpf with zero variances reduces to earliest arrival") {
    ScheduleState st({make_model(1, 0.01, 0.010, 0.0), make_model(2, 0.01, 0.020, 0.0)});
    auto a = sedpf_select(st);
    CHECK(a.path_id == 1);

    ScheduleState st2({make_model(1, 0.01, 0.020, 0.0), make_model(2, 0.01, 0.010, 0.0)});
    CHECK(sedpf_select(st2).path_id == 2);
}

TEST_CASE("fig-2 setting: first packet avoids the high-variance path") {
    // Equal mean delay; path 1 jitters, path 2 is deterministic.
    auto noisy = make_model(1, 0.01, 0.050, 25e-6);
    auto fixed = make_model(2, 0.01, 0.050, 0.0);
    ScheduleState st({noisy, fixed});
    auto a = sedpf_select(st);
    CHECK(a.path_id == 2);

    // Mirrored order flips the answer with it.
    ScheduleState st2({fixed, noisy});
    st2.set_model(1, [&] { auto m = fixed; m.path_id = 1; return m; }());
    st2.set_model(2, [&] { auto m = noisy; m.path_id = 2; return m; }());
    CHECK(sedpf_select(st2).path_id == 1);
}

TEST_CASE("edpf basics and tie-breaks") {
    ScheduleState sym({make_model(1, 0.01, 0.05, 0.0), make_model(2, 0.01, 0.05, 0.0)});
    CHECK(edpf_select(sym).path_id == 1);  // tie -> lowest id

    ScheduleState st({make_model(1, 0.01, 0.05, 0.0), make_model(2, 0.01, 0.03, 0.0)});
    CHECK(edpf_select(st).path_id == 2);
}

TEST_CASE("sedpf equals edpf on random zero-variance instances") {
    Rng rng(314);
    for (int trial = 0; trial < 300; ++trial) {
        int paths = 2 + static_cast<int>(rng.below(2));
        std::vector<PathModel> models;
        for (int p = 1; p <= paths; ++p)
            models.push_back(make_model(p, 0.005 + rng.uniform01() * 0.02,
                                        0.01 + rng.uniform01() * 0.08, 0.0));
        ScheduleState st(models, 0.0);
        // Random reachable history: some claims, some acked arrivals.
        double now = 0.0;
        for (int p = 1; p <= paths; ++p) {
            int k = static_cast<int>(rng.below(8));
            for (int i = 0; i < k; ++i) st.claim(p, false, 0.0);
            if (k > 0 && rng.bernoulli(0.7)) {
                std::uint64_t slot = 1 + rng.below(static_cast<std::uint64_t>(k));
                st.record_arrival(p, slot,
                                  slot * models[p - 1].slot_duration +
                                      models[p - 1].owd_mean + rng.uniform01() * 0.01);
            }
        }
        ScheduleState a = st, b = st;
        REQUIRE(sedpf_select(a, now).path_id == edpf_select(b, now).path_id);
    }
}

TEST_CASE("lowrtt picks the smallest rtt among open slots") {
    ScheduleState st({make_model(1, 0.01, 0.020, 0.0), make_model(2, 0.01, 0.015, 0.0)});
    auto a = lowrtt_select(st, 0.0);
    REQUIRE(a);
    CHECK(a->path_id == 2);  // RTTs {40ms, 30ms}

    ScheduleState eq({make_model(1, 0.01, 0.02, 0.0), make_model(2, 0.01, 0.02, 0.0)});
    auto b = lowrtt_select(eq, 0.0);
    REQUIRE(b);
    CHECK(b->path_id == 1);

    // All slots in the future: backpressure.
    ScheduleState busy({make_model(1, 0.01, 0.02, 0.0)});
    busy.claim(1, false, 0.0);
    CHECK_FALSE(lowrtt_select(busy, 0.005).has_value());
}

TEST_CASE("rr cycles path ids") {
    ScheduleState st({make_model(1, 0.01, 0.02, 0.0), make_model(2, 0.01, 0.02, 0.0),
                      make_model(3, 0.01, 0.02, 0.0)});
    std::vector<int> got;
    for (int i = 0; i < 6; ++i) {
        auto a = rr_select(st, 1.0 + i * 0.02);  // a fresh slot opens each step
        REQUIRE(a);
        got.push_back(a->path_id);
    }
    CHECK(got == std::vector<int>{1, 2, 3, 1, 2, 3});
}

TEST_CASE("coded path selection follows the highest erasure rate") {
    auto m1 = make_model(1, 0.01, 0.02, 0.0, 0.1);
    auto m2 = make_model(2, 0.01, 0.02, 0.0, 0.2);
    CHECK(coded_path_select({m1, m2}) == 2);

    auto z1 = make_model(1, 0.01, 0.02, 0.0, 0.0);
    auto z2 = make_model(2, 0.01, 0.02, 0.0, 0.0);
    CHECK(coded_path_select({z1, z2}) == 1);

    auto a = make_model(1, 0.01, 0.02, 0.0, 0.3);
    auto b = make_model(2, 0.01, 0.02, 0.0, 0.3);
    auto c = make_model(3, 0.01, 0.02, 0.0, 0.1);
    CHECK(coded_path_select({a, b, c}) == 1);
}

TEST_CASE("eq-9 objective is invariant to a uniform time shift") {
    auto mk = [](double start) {
        ScheduleState st({make_model(1, 0.01, 0.05, 9e-6), make_model(2, 0.012, 0.03, 1e-6)},
                         start);
        st.claim(1, false, start);
        st.claim(2, false, start);
        st.claim(2, false, start);
        return st;
    };
    const double shift = 123.456;
    auto a = mk(0.0);
    auto b = mk(shift);
    a.record_arrival(1, 1, 0.061);
    b.record_arrival(1, 1, 0.061 + shift);
    auto sa = sedpf_select(a, 0.05);
    auto sb = sedpf_select(b, 0.05 + shift);
    CHECK(sa.path_id == sb.path_id);
    CHECK(sb.predicted_cost - sa.predicted_cost == Catch::Approx(shift).epsilon(1e-9));
}

TEST_CASE("frame_step emits u,u,u,c for tau=4 and u,c for tau=2") {
    ScheduleState st({make_model(1, 0.01, 0.05, 0.0, 0.05), make_model(2, 0.01, 0.05, 0.0)});
    FramePlan plan;
    plan.tau = 4;
    std::string pattern;
    for (int i = 0; i < 8; ++i) {
        auto r = frame_step(st, plan, Selector::Edpf, 10.0, true);
        REQUIRE(r);
        pattern += r->coded ? 'c' : 'u';
        if (r->coded) CHECK(r->assignment.path_id == 1);  // lossiest path
    }
    CHECK(pattern == "uuucuuuc");
    CHECK(plan.frames_completed == 2);

    FramePlan p2;
    p2.tau = 2;
    ScheduleState st2({make_model(1, 0.01, 0.05, 0.0)});
    std::string pat2;
    for (int i = 0; i < 4; ++i) {
        auto r = frame_step(st2, p2, Selector::Edpf, 10.0, true);
        REQUIRE(r);
        pat2 += r->coded ? 'c' : 'u';
    }
    CHECK(pat2 == "ucuc");
}

TEST_CASE("frame stalls at an info position without pending data") {
    ScheduleState st({make_model(1, 0.01, 0.05, 0.0)});
    FramePlan plan;
    plan.tau = 3;
    CHECK_FALSE(frame_step(st, plan, Selector::Edpf, 1.0, false).has_value());
    CHECK(plan.pos == 0);  // nothing advanced
}

TEST_CASE("frame accounting: m frames give m coded and m*(tau-1) info emissions") {
    ScheduleState st({make_model(1, 0.01, 0.05, 0.0), make_model(2, 0.01, 0.05, 0.0)});
    FramePlan plan;
    plan.tau = 4;
    int coded = 0, info = 0;
    const int frames = 25;
    for (int i = 0; i < frames * 4; ++i) {
        auto r = frame_step(st, plan, Selector::Sedpf, 100.0, true);
        REQUIRE(r);
        (r->coded ? coded : info)++;
    }
    CHECK(coded == frames);
    CHECK(info == frames * 3);
    std::uint64_t total = 0;
    for (auto c : plan.frame_counts) total += c;
    CHECK(total == static_cast<std::uint64_t>(frames) * 4);
}

TEST_CASE("pinned layout routes every position deterministically") {
    ScheduleState st({make_model(1, 0.01, 0.05, 0.0, 0.1), make_model(2, 0.01, 0.05, 0.0)});
    FramePlan plan;
    plan.tau = 4;
    plan.pinned_layout = {2, 1, 2, 1};  // coded on path 1
    std::vector<int> path_seq;
    for (int i = 0; i < 8; ++i) {
        auto r = frame_step(st, plan, Selector::Pinned, 10.0, true);
        REQUIRE(r);
        path_seq.push_back(r->assignment.path_id);
    }
    CHECK(path_seq == std::vector<int>{2, 1, 2, 1, 2, 1, 2, 1});
}

TEST_CASE("assigned info slots ascend per path") {
    Rng rng(5);
    ScheduleState st({make_model(1, 0.008, 0.04, 4e-6), make_model(2, 0.012, 0.05, 1e-6)});
    std::vector<std::uint64_t> last(3, 0);
    for (int k = 0; k < 200; ++k) {
        auto a = sedpf_select(st, k * 0.002);
        REQUIRE(a.slot_index > last[static_cast<std::size_t>(a.path_id)]);
        last[static_cast<std::size_t>(a.path_id)] = a.slot_index;
    }
}
