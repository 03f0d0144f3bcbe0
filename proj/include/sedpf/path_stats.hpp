#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sedpf/gaussian.hpp"
#include "sedpf/stats.hpp"

namespace sedpf {

// Per-path stochastic snapshot. Immutable value; the scheduler reads these
// while the feedback path rewrites estimators.
struct PathModel {
    int path_id = 1;
    double slot_duration = 0.001;   // T_p, seconds
    double delay_bound = 0.001;     // T-bar_p, seconds
    int window = 1;                 // delta_p = ceil(T-bar_p / T_p)
    double delta_mean = 0.001;      // mean arrival increment, seconds
    double delta_var = 0.0;         // increment variance, seconds^2
    double erasure_rate = 0.0;
    double last_arrival = 0.0;      // latest known/estimated arrival realisation
    double owd_mean = 0.0;          // mean one-way delay, seconds
    bool stale = false;

    void validate() const {
        if (slot_duration <= 0) throw std::invalid_argument("PathModel: T_p <= 0");
        if (delay_bound < slot_duration)
            throw std::invalid_argument("PathModel: delay bound below slot duration");
        if (delta_var < 0) throw std::invalid_argument("PathModel: negative variance");
        if (delta_mean < 0) throw std::invalid_argument("PathModel: negative mean increment");
        if (erasure_rate < 0 || erasure_rate >= 1)
            throw std::invalid_argument("PathModel: erasure rate outside [0,1)");
    }
};

// Sliding-window estimator of arrival increments, one-way delay and loss
// rate from (send, arrival) feedback.
class DelayEstimator {
public:
    explicit DelayEstimator(std::size_t capacity = 256) : capacity_(capacity) {}

    void observe(double send_time, double arrival_time) {
        check_send(send_time);
        if (arrival_time < send_time)
            throw std::invalid_argument("DelayEstimator: arrival before send");
        if (have_arrival_) {
            increments_.push_back(arrival_time - last_arrival_);
            if (increments_.size() > capacity_) increments_.pop_front();
        }
        last_arrival_ = arrival_time;
        have_arrival_ = true;
        owd_.push_back(arrival_time - send_time);
        if (owd_.size() > capacity_) owd_.pop_front();
        ++delivered_;
        ++total_;
    }

    void observe_loss(double send_time) {
        check_send(send_time);
        ++losses_;
        ++total_;
    }

    std::size_t delivered_count() const { return delivered_; }
    std::size_t total_count() const { return total_; }

    double erasure_rate() const {
        return total_ ? static_cast<double>(losses_) / static_cast<double>(total_) : 0.0;
    }

    // Mean/variance of arrival increments over the window, mean clamped at 0
    // (increments are nonnegative when arrivals are in-path monotone; an iid
    // reordering channel can produce negative samples).
    double increment_mean() const {
        std::vector<double> v(increments_.begin(), increments_.end());
        return std::max(0.0, stats::mean(v));
    }
    double increment_var() const {
        std::vector<double> v(increments_.begin(), increments_.end());
        return stats::variance(v);
    }

    double send_cadence() const {
        std::vector<double> v(send_gaps_.begin(), send_gaps_.end());
        return stats::mean(v);
    }

    double owd_mean() const {
        std::vector<double> v(owd_.begin(), owd_.end());
        return stats::mean(v);
    }
    double owd_quantile(double q) const {
        return stats::quantile({owd_.begin(), owd_.end()}, q);
    }

    double last_arrival() const { return last_arrival_; }

private:
    void check_send(double send_time) {
        if (have_send_ && send_time < last_send_)
            throw std::invalid_argument("DelayEstimator: send times must be nondecreasing");
        if (have_send_) {
            send_gaps_.push_back(send_time - last_send_);
            if (send_gaps_.size() > capacity_) send_gaps_.pop_front();
        }
        last_send_ = send_time;
        have_send_ = true;
    }

    std::size_t capacity_;
    std::deque<double> increments_;
    std::deque<double> owd_;
    std::deque<double> send_gaps_;
    double last_send_ = 0.0;
    double last_arrival_ = 0.0;
    bool have_send_ = false;
    bool have_arrival_ = false;
    std::size_t delivered_ = 0;
    std::size_t losses_ = 0;
    std::size_t total_ = 0;
};

// Refresh cadence from feedback; estimator needs min_samples delivered
// observations or the previous model is kept and flagged stale.
inline PathModel refresh(const PathModel& model, const DelayEstimator& est,
                         std::size_t min_samples = 8) {
    if (est.delivered_count() < min_samples) {
        PathModel kept = model;
        kept.stale = true;
        return kept;
    }
    PathModel next = model;
    next.stale = false;
    next.delta_mean = est.increment_mean();
    next.delta_var = est.increment_var();
    next.erasure_rate = std::min(est.erasure_rate(), 0.999999);
    double cadence = est.send_cadence();
    if (cadence > 0) next.slot_duration = cadence;
    // 99.9th percentile stands in for the hard delay bound; robust to the
    // odd outlier.
    next.delay_bound = std::max(est.owd_quantile(0.999), next.slot_duration);
    next.window = static_cast<int>(std::ceil(next.delay_bound / next.slot_duration));
    next.owd_mean = est.owd_mean();
    next.last_arrival = est.last_arrival();
    return next;
}

// Theorem-1 invariant distribution: with in-path monotone arrivals the
// window max collapses to the last arrival, a sum of delta_p iid increments.
inline Gaussian z_distribution(const PathModel& model) {
    if (model.window < 1) throw std::invalid_argument("z_distribution: window < 1");
    double d = static_cast<double>(model.window);
    return Gaussian{d * model.delta_mean, d * model.delta_var};
}

// Offline model fitting from CSV lines `path_id,send_time_s,arrival_time_s|LOST`.
inline std::map<int, DelayEstimator> parse_trace(std::istream& in) {
    std::map<int, DelayEstimator> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string path_s, send_s, arr_s;
        if (!std::getline(ss, path_s, ',') || !std::getline(ss, send_s, ',') ||
            !std::getline(ss, arr_s))
            throw std::invalid_argument("trace line " + std::to_string(lineno) +
                                        ": expected 3 fields");
        int path = std::stoi(path_s);
        double send = std::stod(send_s);
        auto it = out.emplace(path, DelayEstimator{}).first;
        if (arr_s == "LOST")
            it->second.observe_loss(send);
        else
            it->second.observe(send, std::stod(arr_s));
    }
    return out;
}

}  // namespace sedpf
