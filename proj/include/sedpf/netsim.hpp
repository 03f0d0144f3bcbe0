#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sedpf/packet.hpp"
#include "sedpf/path_stats.hpp"
#include "sedpf/rlnc.hpp"
#include "sedpf/rng.hpp"
#include "sedpf/scheduler.hpp"
#include "sedpf/s_process.hpp"
#include "sedpf/stats.hpp"

namespace sedpf {

enum class DelayMode { CorrelatedMonotone, Iid };

inline const char* to_string(DelayMode m) {
    return m == DelayMode::Iid ? "iid" : "correlated";
}

struct ChannelSpec {
    int path_id = 1;
    double slot_duration = 0.001;   // T_p
    DelayMode delay_mode = DelayMode::Iid;
    double base_delay = 0.050;      // iid: mean one-way delay
    double jitter_sd = 0.0;         // iid: delay stddev; correlated: increment stddev
    double inc_mean = -1.0;         // correlated: increment mean; < 0 means slot_duration
    double erasure = 0.0;
    double feedback_delay = 0.050;  // ACK one-way latency

    double increment_mean() const { return inc_mean < 0 ? slot_duration : inc_mean; }

    void validate() const {
        if (slot_duration <= 0) throw std::invalid_argument("ChannelSpec: T_p <= 0");
        if (base_delay < 0 || jitter_sd < 0 || feedback_delay < 0)
            throw std::invalid_argument("ChannelSpec: negative delay parameter");
        if (erasure < 0 || erasure > 1)
            throw std::invalid_argument("ChannelSpec: erasure outside [0,1]");
    }
};

struct SimConfig {
    std::vector<ChannelSpec> channels;
    Selector selector = Selector::Sedpf;
    int tau = 0;                    // 0 disables coding
    std::vector<int> pinned_layout; // per frame position; last entry = coded path
    bool arq = false;
    std::uint64_t total_packets = 10000;
    double max_time = 1e6;
    std::uint64_t seed = 1;
    std::uint32_t payload_size = 1000;  // bytes, accounting only
    std::uint32_t coding_window = 64;
    bool adaptive = false;          // refresh models from feedback every refresh_period
    double refresh_period = 0.5;
    bool record_trace = false;

    void validate() const {
        if (channels.empty()) throw std::invalid_argument("SimConfig: no channels");
        for (const auto& c : channels) c.validate();
        if (tau == 1 || tau < 0) throw std::invalid_argument("SimConfig: tau must be 0 or >= 2");
        if (total_packets == 0) throw std::invalid_argument("SimConfig: nothing to send");
        if (!pinned_layout.empty() && static_cast<int>(pinned_layout.size()) != tau)
            throw std::invalid_argument("SimConfig: layout length must equal tau");
    }
};

struct TraceRow {
    double t = 0.0;
    std::string event;
    int path = 0;
    std::uint64_t slot = 0;
    std::uint32_t seq = 0;
    char kind = 'u';
};

struct SimMetrics {
    std::uint64_t sent_info = 0;
    std::uint64_t sent_coded = 0;
    std::uint64_t sent_retx = 0;
    std::uint64_t erased = 0;
    std::uint64_t delivered = 0;
    std::uint64_t undelivered = 0;
    std::uint64_t stale_packets = 0;
    std::uint64_t dependent_coded = 0;   // non-innovative coded arrivals
    double duration = 0.0;
    bool ascending_ok = true;
    std::vector<double> in_order_delays;   // Y_k - t_{p_k,s_k}, delivered packets
    std::vector<double> buffering_delays;  // delivery - own arrival, delivered packets
    std::vector<std::uint64_t> per_path_sent;
    std::vector<std::uint64_t> frame_counts;  // realized per-path N_{tau,p} totals
    std::uint64_t frames_completed = 0;
    std::vector<TraceRow> trace;

    double total_transmitted() const {
        return static_cast<double>(sent_info + sent_coded + sent_retx);
    }
    double mean_in_order_delay() const { return stats::mean(in_order_delays); }
    double mean_buffering_delay() const { return stats::mean(buffering_delays); }
    double buffering_per_transmitted() const {
        double total = 0.0;
        for (double d : buffering_delays) total += d;
        double n = total_transmitted();
        return n > 0 ? total / n : 0.0;
    }
    double goodput_bps(const SimConfig& cfg) const {
        if (duration <= 0) return 0.0;
        return static_cast<double>(delivered) * cfg.payload_size * 8.0 / duration;
    }
    double raw_bps(const SimConfig& cfg) const {
        if (duration <= 0) return 0.0;
        return total_transmitted() * cfg.payload_size * 8.0 / duration;
    }
    double goodput_ratio() const {
        double n = total_transmitted();
        return n > 0 ? static_cast<double>(delivered) / n : 0.0;
    }
};

// Per-slot channel draw. Erasures are independent per slot; the arrival
// process advances even for erased slots so the path keeps its timeline.
class Channel {
public:
    Channel(const ChannelSpec& spec, std::uint64_t seed) : spec_(spec), rng_(seed) {}

    // nullopt == erased. Causality: arrivals never precede the send.
    std::optional<double> transmit(double send_time) {
        bool lost = rng_.uniform01() < spec_.erasure;
        double arrival;
        if (spec_.delay_mode == DelayMode::Iid) {
            arrival = send_time + std::max(0.0, rng_.normal(spec_.base_delay, spec_.jitter_sd));
        } else {
            if (!started_) {
                started_ = true;
                last_arrival_ = send_time + spec_.base_delay;
                arrival = last_arrival_;
            } else {
                double inc = std::max(0.0, rng_.normal(spec_.increment_mean(), spec_.jitter_sd));
                arrival = std::max(last_arrival_ + inc, send_time);
                last_arrival_ = arrival;
            }
        }
        if (lost) return std::nullopt;
        return arrival;
    }

private:
    ChannelSpec spec_;
    Rng rng_;
    bool started_ = false;
    double last_arrival_ = 0.0;
};

// Oracle-initialised model snapshot from the channel ground truth.
inline PathModel model_from_channel(const ChannelSpec& ch) {
    PathModel m;
    m.path_id = ch.path_id;
    m.slot_duration = ch.slot_duration;
    m.owd_mean = ch.base_delay;
    double spread = 4.0 * ch.jitter_sd;
    m.delay_bound = std::max(ch.base_delay + spread, ch.slot_duration);
    m.window = std::max(1, static_cast<int>(std::ceil(m.delay_bound / m.slot_duration)));
    if (ch.delay_mode == DelayMode::Iid) {
        // Increments of an iid-delay path telescope: the delta_p-window sum
        // is T*delta + D_s - D_{s-delta}, variance 2*sd^2 regardless of the
        // window. Spread that over the window so the modelled Z variance
        // (window * delta_var) matches the physical one.
        m.delta_mean = ch.slot_duration;
        m.delta_var = 2.0 * ch.jitter_sd * ch.jitter_sd / m.window;
    } else {
        m.delta_mean = ch.increment_mean();
        m.delta_var = ch.jitter_sd * ch.jitter_sd;
    }
    m.erasure_rate = std::min(ch.erasure, 0.999999);
    return m;
}

class Simulator {
public:
    explicit Simulator(SimConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        std::vector<PathModel> models;
        for (std::size_t i = 0; i < cfg_.channels.size(); ++i) {
            auto& ch = cfg_.channels[i];
            ch.path_id = static_cast<int>(i) + 1;
            models.push_back(model_from_channel(ch));
            channels_.emplace_back(ch, mix_seed(cfg_.seed, 0x1000 + i));
            estimators_.emplace_back(256);
        }
        sched_ = std::make_unique<ScheduleState>(models, 0.0);
        plan_.tau = cfg_.tau;
        plan_.pinned_layout = cfg_.pinned_layout;
        plan_.validate(static_cast<int>(cfg_.channels.size()));
        encoder_ = std::make_unique<Encoder>(cfg_.coding_window);
        decoder_.set_retain(cfg_.coding_window * 4);
        metrics_.per_path_sent.assign(cfg_.channels.size(), 0);
        rx_paths_.resize(cfg_.channels.size());
    }

    SimMetrics run() {
        push_wake(0.0);
        if (cfg_.adaptive) push(cfg_.refresh_period, EventKind::Refresh, {});
        int tail_rounds = 0;
        while (!queue_.empty()) {
            Event ev = queue_.top();
            queue_.pop();
            if (ev.t > cfg_.max_time) break;
            now_ = std::max(now_, ev.t);
            switch (ev.kind) {
                case EventKind::Wake: handle_wake(ev); break;
                case EventKind::Arrival: handle_arrival(ev); break;
                case EventKind::Ack: handle_ack(ev); break;
                case EventKind::Refresh: handle_refresh(); break;
            }
            if (queue_.empty() && cfg_.arq && tail_rounds < 1000) {
                if (queue_tail_retransmissions()) ++tail_rounds;
            }
        }
        finalize();
        return metrics_;
    }

private:
    enum class EventKind { Wake, Arrival, Ack, Refresh };

    struct LossReport {
        int path = 0;
        std::uint64_t slot = 0;
    };

    struct EventData {
        // Arrival
        bool coded = false;
        InfoPacket info;
        CodedPacket cp;
        int path = 0;
        std::uint64_t slot = 0;
        double send_time = 0.0;
        // Ack extras
        double arrival_time = 0.0;
        std::uint32_t frontier = 0;
        std::vector<LossReport> losses;
    };

    struct Event {
        double t = 0.0;
        std::uint64_t order = 0;
        EventKind kind = EventKind::Wake;
        EventData data;
        bool operator>(const Event& o) const {
            if (t != o.t) return t > o.t;
            return order > o.order;
        }
    };

    struct SentRecord {
        int path = 0;
        std::uint64_t slot = 0;
        double first_send = 0.0;
        bool arrived = false;
        bool delivered = false;
        double arrival_time = 0.0;
        bool retx_queued = false;
    };

    struct RxPath {
        std::uint64_t contig = 0;     // slots <= contig are arrived-or-reported
        std::set<std::uint64_t> seen;
        std::set<std::uint64_t> reported;
    };

    void push(double t, EventKind kind, EventData data) {
#ifdef SEDPF_COUNT_EVENTS
        SEDPF_COUNT_EVENTS(kind);
#endif
        queue_.push(Event{t, next_order_++, kind, std::move(data)});
    }

    // One live wake at a time: re-arming earlier supersedes the queued one,
    // which dies as stale when popped.
    void push_wake(double t) {
        if (wake_pending_ && t >= next_wake_ - 1e-15) return;
        wake_pending_ = true;
        next_wake_ = t;
        push(t, EventKind::Wake, {});
    }

    // ---- sender ----

    bool flow_has_info() const { return next_new_seq_ <= cfg_.total_packets; }

    void handle_wake(const Event& ev) {
        if (!wake_pending_ || std::abs(ev.t - next_wake_) > 1e-15) return;  // stale
        wake_pending_ = false;
        pump();
    }

    void pump() {
        int guard = 0;
        for (;;) {
            if (++guard > 1000000) throw std::runtime_error("netsim: pump did not converge");
            double min_slot = earliest_slot_time();
            if (min_slot > now_ + 1e-15) break;
            if (!try_emit()) break;
        }
        if (!retx_queue_.empty() || flow_has_info() || mid_frame_coded_pending())
            push_wake(earliest_slot_time());
    }

    bool mid_frame_coded_pending() const {
        return plan_.coding_on() && plan_.pos == plan_.n_info();
    }

    double earliest_slot_time() const {
        double t = std::numeric_limits<double>::infinity();
        for (int p = 1; p <= sched_->paths(); ++p)
            t = std::min(t, sched_->next_slot_time(p));
        return t;
    }

    bool try_emit() {
        if (!retx_queue_.empty()) return emit_retransmission();
        if (!flow_has_info() && !mid_frame_coded_pending()) return false;
        auto step = frame_step(*sched_, plan_, cfg_.selector, now_, flow_has_info());
        if (!step) return false;
        if (step->coded)
            emit_coded(step->assignment);
        else
            emit_info(step->assignment, next_new_seq_++, false);
        return true;
    }

    bool emit_retransmission() {
        std::uint32_t seq = retx_queue_.front();
        std::optional<Assignment> a;
        switch (cfg_.selector) {
            case Selector::Sedpf: a = sedpf_select(*sched_, now_); break;
            case Selector::Edpf:
            case Selector::Pinned: a = edpf_select(*sched_, now_); break;
            case Selector::LowRtt: a = lowrtt_select(*sched_, now_); break;
            case Selector::Rr: a = rr_select(*sched_, now_); break;
        }
        if (!a) return false;  // backpressure; retry at the next wake
        retx_queue_.pop_front();
        emit_info(*a, seq, true);
        return true;
    }

    void emit_info(const Assignment& a, std::uint32_t seq, bool retx) {
        if (!retx) {
            encoder_->push(Bytes{});
            auto& rec = records_[seq];
            rec.path = a.path_id;
            rec.slot = a.slot_index;
            rec.first_send = a.send_time;
            ++metrics_.sent_info;
            // Lemma-1 sanity: fresh info indices ascend per path.
            auto& last = last_fresh_seq_[a.path_id];
            if (seq <= last) metrics_.ascending_ok = false;
            last = seq;
        } else {
            records_[seq].retx_queued = false;
            ++metrics_.sent_retx;
        }
        ++metrics_.per_path_sent[static_cast<std::size_t>(a.path_id - 1)];
        slot_kind_[{a.path_id, a.slot_index}] = {false, seq};
        transmit(a, false, seq, {});
        trace(a.send_time, retx ? "retx" : "send", a.path_id, a.slot_index, seq, 'u');
    }

    void emit_coded(const Assignment& a) {
        if (!encoder_->has_window()) return;  // nothing in flight to protect
        std::uint64_t cseed = mix_seed(cfg_.seed ^ 0xC0DEDull, ++coded_counter_);
        CodedPacket cp = encoder_->make_coded(cseed);
        ++metrics_.sent_coded;
        ++metrics_.per_path_sent[static_cast<std::size_t>(a.path_id - 1)];
        slot_kind_[{a.path_id, a.slot_index}] = {true, cp.coded_index};
        transmit(a, true, 0, cp);
        trace(a.send_time, "send", a.path_id, a.slot_index, cp.coded_index, 'c');
    }

    void transmit(const Assignment& a, bool coded, std::uint32_t seq, CodedPacket cp) {
        slot_send_[{a.path_id, a.slot_index}] = a.send_time;
        auto arrival = channels_[static_cast<std::size_t>(a.path_id - 1)].transmit(a.send_time);
        if (!arrival) {
            ++metrics_.erased;
            trace(a.send_time, "erased", a.path_id, a.slot_index, coded ? cp.coded_index : seq,
                  coded ? 'c' : 'u');
            return;
        }
        // Packets cross the link in their wire form; the receiver sees only
        // the header fields (coded coefficients regrow from the seed).
        Bytes frame = coded ? wire::serialize(cp) : wire::serialize(InfoPacket{seq, {}});
        auto parsed = wire::parse(frame);
        EventData d;
        d.coded = parsed.coded;
        d.path = a.path_id;
        d.slot = a.slot_index;
        d.send_time = a.send_time;
        if (parsed.coded)
            d.cp = std::move(parsed.cp);
        else
            d.info = std::move(parsed.info);
        push(*arrival, EventKind::Arrival, std::move(d));
    }

    // ---- receiver ----

    void handle_arrival(Event& ev) {
        auto& d = ev.data;
        IngestResult res;
        if (d.coded) {
            res = decoder_.ingest(d.cp);
            if (res.stale) ++metrics_.stale_packets;
            if (!res.stale && res.rank_delta == 0) ++metrics_.dependent_coded;
        } else {
            auto& rec = records_[d.info.seq];
            if (!rec.arrived) {
                rec.arrived = true;
                rec.arrival_time = now_;
            }
            res = decoder_.ingest(d.info);
        }
        trace(now_, "arrival", d.path, d.slot, d.coded ? d.cp.coded_index : d.info.seq,
              d.coded ? 'c' : 'u');
        for (const auto& pkt : res.delivered) record_delivery(pkt.seq);

        // Gap detection on this path feeds ARQ and the loss estimator.
        auto reports = detect_gaps(d.path, d.slot);

        EventData ack;
        ack.path = d.path;
        ack.slot = d.slot;
        ack.send_time = d.send_time;
        ack.arrival_time = now_;
        ack.frontier = decoder_.frontier();
        ack.losses = std::move(reports);
        double fb = cfg_.channels[static_cast<std::size_t>(d.path - 1)].feedback_delay;
        push(now_ + fb, EventKind::Ack, std::move(ack));
    }

    std::vector<LossReport> detect_gaps(int path, std::uint64_t slot) {
        auto& rx = rx_paths_[static_cast<std::size_t>(path - 1)];
        rx.seen.insert(slot);
        std::vector<LossReport> out;
        for (std::uint64_t s = rx.contig + 1; s < slot; ++s) {
            if (rx.seen.count(s) || rx.reported.count(s)) continue;
            rx.reported.insert(s);
            out.push_back({path, s});
        }
        for (;;) {
            if (rx.seen.count(rx.contig + 1)) {
                rx.seen.erase(rx.contig + 1);
            } else if (rx.reported.count(rx.contig + 1)) {
                rx.reported.erase(rx.contig + 1);
            } else {
                break;
            }
            ++rx.contig;
        }
        return out;
    }

    void record_delivery(std::uint32_t seq) {
        auto& rec = records_[seq];
        if (rec.delivered) return;
        rec.delivered = true;
        ++metrics_.delivered;
        metrics_.in_order_delays.push_back(now_ - rec.first_send);
        // Recovered-by-decode packets materialise at delivery: zero wait.
        double buffering = rec.arrived ? now_ - rec.arrival_time : 0.0;
        metrics_.buffering_delays.push_back(buffering);
        trace(now_, "deliver", rec.path, rec.slot, seq, 'u');
    }

    // ---- feedback ----

    void handle_ack(Event& ev) {
        auto& d = ev.data;
        // Loss reports first: their send times predate the reporter's.
        for (const auto& loss : d.losses) {
            auto it = slot_kind_.find({loss.path, loss.slot});
            if (it == slot_kind_.end()) continue;
            auto [was_coded, id] = it->second;
            feed_loss(loss.path, loss.slot);
            if (cfg_.arq && !was_coded) queue_retransmission(static_cast<std::uint32_t>(id));
        }
        feed_arrival(d.path, d.slot, d.send_time, d.arrival_time);
        sched_->record_arrival(d.path, d.slot, d.arrival_time);
        encoder_->ack_prefix(d.frontier);
        // New retransmissions should not wait for the next slot-grid wake.
        if (!retx_queue_.empty()) push_wake(now_);
    }

    void queue_retransmission(std::uint32_t seq) {
        auto& rec = records_[seq];
        if (rec.delivered || rec.arrived || rec.retx_queued) return;
        rec.retx_queued = true;
        retx_queue_.push_back(seq);
    }

    // Estimator feeding with a monotone-send guard: reordered feedback from
    // the iid channel mode is dropped rather than faulting the estimator.
    void feed_arrival(int path, std::uint64_t slot, double send, double arrival) {
        auto& last = last_fed_send_[path];
        if (send < last) return;
        last = send;
        estimators_[static_cast<std::size_t>(path - 1)].observe(send, arrival);
    }
    void feed_loss(int path, std::uint64_t slot) {
        double send = slot_send_time(path, slot);
        auto& last = last_fed_send_[path];
        if (send < last) return;
        last = send;
        estimators_[static_cast<std::size_t>(path - 1)].observe_loss(send);
    }

    double slot_send_time(int path, std::uint64_t slot) const {
        auto it = slot_send_.find({path, slot});
        return it != slot_send_.end() ? it->second : now_;
    }

    void handle_refresh() {
        for (int p = 1; p <= sched_->paths(); ++p) {
            PathModel next = refresh(sched_->model(p), estimators_[static_cast<std::size_t>(p - 1)]);
            next.validate();
            sched_->set_model(p, next);
        }
        if (flow_has_info() || !retx_queue_.empty())
            push(now_ + cfg_.refresh_period, EventKind::Refresh, {});
    }

    // Ideal-ARQ tail recovery: transmissions whose losses can never be
    // inferred from later arrivals (end of flow) are retransmitted directly.
    bool queue_tail_retransmissions() {
        bool any = false;
        for (auto& [seq, rec] : records_) {
            if (!rec.delivered && !rec.arrived && !rec.retx_queued) {
                rec.retx_queued = true;
                retx_queue_.push_back(seq);
                any = true;
            }
        }
        if (any) push_wake(now_);
        return any;
    }

    void finalize() {
        metrics_.duration = now_;
        metrics_.undelivered = metrics_.sent_info - metrics_.delivered;
        metrics_.frame_counts = plan_.frame_counts;
        metrics_.frames_completed = plan_.frames_completed;
        std::stable_sort(metrics_.trace.begin(), metrics_.trace.end(),
                         [](const TraceRow& a, const TraceRow& b) { return a.t < b.t; });
    }

    void trace(double t, const char* event, int path, std::uint64_t slot, std::uint32_t seq,
               char kind) {
        if (!cfg_.record_trace) return;
        metrics_.trace.push_back({t, event, path, slot, seq, kind});
    }

    SimConfig cfg_;
    std::vector<Channel> channels_;
    std::vector<DelayEstimator> estimators_;
    std::unique_ptr<ScheduleState> sched_;
    FramePlan plan_;
    std::unique_ptr<Encoder> encoder_;
    Decoder decoder_;
    SimMetrics metrics_;

    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::uint64_t next_order_ = 0;
    double now_ = 0.0;
    bool wake_pending_ = false;
    double next_wake_ = 0.0;

    std::uint32_t next_new_seq_ = 1;
    std::uint64_t coded_counter_ = 0;
    std::map<std::uint32_t, SentRecord> records_;
    std::map<std::pair<int, std::uint64_t>, std::pair<bool, std::uint64_t>> slot_kind_;
    std::map<std::pair<int, std::uint64_t>, double> slot_send_;
    std::map<int, std::uint32_t> last_fresh_seq_;
    std::map<int, double> last_fed_send_;
    std::deque<std::uint32_t> retx_queue_;
    std::vector<RxPath> rx_paths_;
};

inline SimMetrics run_sim(const SimConfig& cfg) { return Simulator(cfg).run(); }

}  // namespace sedpf
