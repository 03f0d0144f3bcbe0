#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sedpf/gaussian.hpp"
#include "sedpf/path_stats.hpp"

namespace sedpf {

enum class Selector { Sedpf, Edpf, LowRtt, Rr, Pinned };

inline const char* to_string(Selector s) {
    switch (s) {
        case Selector::Sedpf: return "sedpf";
        case Selector::Edpf: return "edpf";
        case Selector::LowRtt: return "lowrtt";
        case Selector::Rr: return "rr";
        case Selector::Pinned: return "pinned";
    }
    return "?";
}

inline Selector selector_from_string(const std::string& s) {
    if (s == "sedpf") return Selector::Sedpf;
    if (s == "edpf") return Selector::Edpf;
    if (s == "lowrtt") return Selector::LowRtt;
    if (s == "rr") return Selector::Rr;
    if (s == "pinned") return Selector::Pinned;
    throw std::invalid_argument("unknown selector: " + s);
}

struct Assignment {
    bool coded = false;
    int path_id = 1;
    std::uint64_t slot_index = 0;
    double send_time = 0.0;
    double predicted_cost = 0.0;  // Eq.-9 objective for sedpf, mean arrival otherwise
};

// Coded packets ride the lossiest path; ties break to the lowest path id.
inline int coded_path_select(const std::vector<PathModel>& models) {
    if (models.empty()) throw std::invalid_argument("coded_path_select: no paths");
    int best = 0;
    for (int p = 1; p < static_cast<int>(models.size()); ++p)
        if (models[p].erasure_rate > models[best].erasure_rate) best = p;
    return best + 1;
}

// Per-flow scheduling state: one slot cursor per path plus the model
// snapshots and arrival anchors the predictors run on.
class ScheduleState {
public:
    explicit ScheduleState(std::vector<PathModel> models, double start_time = 0.0) {
        if (models.empty()) throw std::invalid_argument("ScheduleState: no paths");
        for (std::size_t i = 0; i < models.size(); ++i) {
            models[i].validate();
            PathState ps;
            ps.model = models[i];
            ps.next_slot_time = start_time;
            paths_.push_back(ps);
        }
    }

    int paths() const { return static_cast<int>(paths_.size()); }
    const PathModel& model(int path_id) const { return at(path_id).model; }
    void set_model(int path_id, const PathModel& m) { at(path_id).model = m; }

    std::vector<PathModel> models() const {
        std::vector<PathModel> out;
        for (const auto& p : paths_) out.push_back(p.model);
        return out;
    }

    double next_slot_time(int path_id) const { return at(path_id).next_slot_time; }
    std::uint64_t last_info_slot(int path_id) const { return at(path_id).last_info_slot; }

    // ACK feedback: the realisation of a_{p,s}. Only the newest is kept.
    void record_arrival(int path_id, std::uint64_t slot, double arrival) {
        auto& ps = at(path_id);
        if (!ps.has_anchor || slot > ps.anchor_slot) {
            ps.anchor_slot = slot;
            ps.anchor_arrival = arrival;
            ps.has_anchor = true;
        }
    }

    // Claim the first free slot on path_id; sending can never predate `now`.
    Assignment claim(int path_id, bool coded, double now) {
        auto& ps = at(path_id);
        Assignment a;
        a.coded = coded;
        a.path_id = path_id;
        a.slot_index = ps.next_slot;
        a.send_time = std::max(ps.next_slot_time, now);
        ps.next_slot_time = a.send_time + ps.model.slot_duration;
        if (!coded) ps.last_info_slot = ps.next_slot;
        ++ps.next_slot;
        return a;
    }

    // Linear arrival predictor anchored at the newest ACKed arrival: the
    // realisation when known, last_arrival + mean-increment extrapolation
    // otherwise.
    double estimate_arrival(int path_id, double slot) const {
        const auto& ps = at(path_id);
        double s0, a0;
        if (ps.has_anchor) {
            s0 = static_cast<double>(ps.anchor_slot);
            a0 = ps.anchor_arrival;
        } else {
            // Virtual slot-0 anchor one increment before the first slot's
            // predicted arrival.
            s0 = 0.0;
            a0 = first_slot_ref(ps) + ps.model.owd_mean - ps.model.delta_mean;
        }
        return a0 + (slot - s0) * ps.model.delta_mean;
    }

    // Term the path's already-assigned packets contribute to Eq. 9:
    // Z_p anchored delta_p slots behind the last assigned info slot (the
    // virtual slot-0 anchor when nothing was assigned yet).
    Gaussian history_term(int path_id) const {
        const auto& ps = at(path_id);
        Gaussian z = z_distribution(ps.model);
        double anchor_slot = static_cast<double>(ps.last_info_slot) - ps.model.window;
        return Gaussian{estimate_arrival(path_id, anchor_slot) + z.mean, z.var};
    }

    // Predicted arrival of a packet placed in the path's first free slot.
    Gaussian candidate_term(int path_id, double now) const {
        const auto& ps = at(path_id);
        double send = std::max(ps.next_slot_time, now);
        double slot = static_cast<double>(ps.next_slot);
        double mean = std::max(estimate_arrival(path_id, slot), send + ps.model.owd_mean);
        double anchor = ps.has_anchor ? static_cast<double>(ps.anchor_slot) : 0.0;
        double span = std::max(1.0, slot - anchor);
        return Gaussian{mean, span * ps.model.delta_var};
    }

    std::uint64_t rr_cursor = 0;  // round-robin position

private:
    struct PathState {
        PathModel model;
        std::uint64_t next_slot = 1;
        double next_slot_time = 0.0;
        std::uint64_t last_info_slot = 0;
        std::uint64_t anchor_slot = 0;
        double anchor_arrival = 0.0;
        bool has_anchor = false;
    };

    double first_slot_ref(const PathState& ps) const {
        // Time the path's slot grid started (slot 1).
        return ps.next_slot_time - (static_cast<double>(ps.next_slot) - 1.0) *
                                       ps.model.slot_duration;
    }

    PathState& at(int path_id) {
        if (path_id < 1 || path_id > paths()) throw std::out_of_range("bad path id");
        return paths_[static_cast<std::size_t>(path_id - 1)];
    }
    const PathState& at(int path_id) const {
        if (path_id < 1 || path_id > paths()) throw std::out_of_range("bad path id");
        return paths_[static_cast<std::size_t>(path_id - 1)];
    }

    std::vector<PathState> paths_;
};

// S-EDPF: minimise E[max{Z_1+a_1, ..., Z_P+a_P, a_cand}] over candidate
// paths. Ties resolve by lower candidate mean (so zero-variance instances
// reduce exactly to EDPF), then by lowest path id.
inline Assignment sedpf_select(ScheduleState& state, double now = 0.0) {
    std::vector<Gaussian> base;
    for (int p = 1; p <= state.paths(); ++p) base.push_back(state.history_term(p));

    int best_path = 0;
    double best_obj = std::numeric_limits<double>::infinity();
    double best_mean = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= state.paths(); ++p) {
        auto terms = base;
        Gaussian cand = state.candidate_term(p, now);
        terms.push_back(cand);
        double obj = expected_max(std::move(terms));
        if (obj < best_obj - 1e-15 ||
            (obj <= best_obj + 1e-15 && cand.mean < best_mean - 1e-15)) {
            best_obj = obj;
            best_mean = cand.mean;
            best_path = p;
        }
    }
    Assignment a = state.claim(best_path, false, now);
    a.predicted_cost = best_obj;
    return a;
}

// EDPF: earliest mean predicted arrival, means only.
inline Assignment edpf_select(ScheduleState& state, double now = 0.0) {
    int best_path = 1;
    double best_mean = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= state.paths(); ++p) {
        double m = state.candidate_term(p, now).mean;
        if (m < best_mean - 1e-15) {
            best_mean = m;
            best_path = p;
        }
    }
    Assignment a = state.claim(best_path, false, now);
    a.predicted_cost = best_mean;
    return a;
}

// LowRTT: among paths with an open slot now, the smallest estimated RTT
// (2x mean one-way delay). Backpressure when nothing is open.
inline std::optional<Assignment> lowrtt_select(ScheduleState& state, double now) {
    int best_path = 0;
    double best_rtt = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= state.paths(); ++p) {
        if (state.next_slot_time(p) > now) continue;
        double rtt = 2.0 * state.model(p).owd_mean;
        if (rtt < best_rtt - 1e-15) {
            best_rtt = rtt;
            best_path = p;
        }
    }
    if (best_path == 0) return std::nullopt;
    Assignment a = state.claim(best_path, false, now);
    a.predicted_cost = now + best_rtt / 2.0;
    return a;
}

// RR: cycle path ids over the currently open slots.
inline std::optional<Assignment> rr_select(ScheduleState& state, double now) {
    int n = state.paths();
    for (int i = 0; i < n; ++i) {
        int p = static_cast<int>((state.rr_cursor + i) % n) + 1;
        if (state.next_slot_time(p) > now) continue;
        state.rr_cursor = (state.rr_cursor + i + 1) % n;
        Assignment a = state.claim(p, false, now);
        a.predicted_cost = state.model(p).owd_mean + a.send_time;
        return a;
    }
    return std::nullopt;
}

// Frame construction: N_tau = tau-1 info emissions routed by the active
// selector, then one coded emission on the coded path. tau == 0 disables
// coding (info only). A pinned layout fixes the per-position path choice.
struct FramePlan {
    int tau = 0;
    std::vector<int> pinned_layout;          // size tau when used; last entry = coded path
    int pos = 0;                             // position within the frame
    std::vector<std::uint64_t> frame_counts; // realized N_{tau,p} accumulation
    std::uint64_t frames_completed = 0;

    bool coding_on() const { return tau >= 2; }
    int n_info() const { return tau - 1; }

    void validate(int paths) const {
        if (tau == 1 || tau < 0) throw std::invalid_argument("FramePlan: tau must be 0 or >= 2");
        if (!pinned_layout.empty()) {
            if (static_cast<int>(pinned_layout.size()) != tau)
                throw std::invalid_argument("FramePlan: layout length must equal tau");
            for (int p : pinned_layout)
                if (p < 1 || p > paths) throw std::invalid_argument("FramePlan: bad layout path");
        }
    }
};

struct FrameStepResult {
    Assignment assignment;
    bool coded = false;
};

// One emission. `has_info` reports whether an info packet is pending; a
// frame stalls (nullopt) at an info position without one.
inline std::optional<FrameStepResult> frame_step(ScheduleState& state, FramePlan& plan,
                                                 Selector selector, double now,
                                                 bool has_info) {
    if (plan.frame_counts.size() != static_cast<std::size_t>(state.paths()))
        plan.frame_counts.assign(static_cast<std::size_t>(state.paths()), 0);

    const bool coded_position = plan.coding_on() && plan.pos == plan.n_info();
    if (!coded_position && !has_info) return std::nullopt;

    std::optional<Assignment> a;
    if (coded_position) {
        int pc = plan.pinned_layout.empty() ? coded_path_select(state.models())
                                            : plan.pinned_layout.back();
        a = state.claim(pc, true, now);
    } else if (selector == Selector::Pinned) {
        if (plan.pinned_layout.empty())
            throw std::invalid_argument("frame_step: pinned selector without layout");
        a = state.claim(plan.pinned_layout[static_cast<std::size_t>(plan.pos)], false, now);
    } else if (selector == Selector::Sedpf) {
        a = sedpf_select(state, now);
    } else if (selector == Selector::Edpf) {
        a = edpf_select(state, now);
    } else if (selector == Selector::LowRtt) {
        a = lowrtt_select(state, now);
    } else {
        a = rr_select(state, now);
    }
    if (!a) return std::nullopt;  // backpressure from the selector

    if (plan.coding_on()) {
        plan.frame_counts[static_cast<std::size_t>(a->path_id - 1)] += 1;
        ++plan.pos;
        if (plan.pos == plan.tau) {
            plan.pos = 0;
            ++plan.frames_completed;
        }
    }
    return FrameStepResult{*a, coded_position};
}

}  // namespace sedpf
