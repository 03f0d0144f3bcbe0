#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sedpf/rng.hpp"

namespace sedpf {

// One coding frame: tau slots split across paths as counts[p], one of the
// coded-path slots carrying the coded packet, the rest information packets.
struct SProcessSpec {
    int tau = 2;                  // coding interval, >= 2
    std::vector<int> counts;      // N_{tau,p}; sum == tau
    std::vector<double> eps;      // per-path erasure probability
    int coded_path = 1;           // p_c, 1-based

    void validate() const {
        if (tau < 2) throw std::invalid_argument("SProcessSpec: tau < 2");
        if (counts.size() != eps.size() || counts.empty())
            throw std::invalid_argument("SProcessSpec: counts/eps size mismatch");
        int sum = 0;
        for (int c : counts) {
            if (c < 0) throw std::invalid_argument("SProcessSpec: negative count");
            sum += c;
        }
        if (sum != tau) throw std::invalid_argument("SProcessSpec: counts must sum to tau");
        if (coded_path < 1 || coded_path > static_cast<int>(counts.size()))
            throw std::invalid_argument("SProcessSpec: coded path out of range");
        if (counts[coded_path - 1] < 1)
            throw std::invalid_argument("SProcessSpec: coded path has no slot");
        for (double e : eps)
            if (e < 0.0 || e >= 1.0)
                throw std::invalid_argument("SProcessSpec: erasure outside [0,1)");
    }

    int paths() const { return static_cast<int>(counts.size()); }
    int n_info() const { return tau - 1; }

    // Expected losses per frame, the capacity-side load.
    double loss_load() const {
        double s = 0.0;
        for (std::size_t p = 0; p < counts.size(); ++p) s += counts[p] * eps[p];
        return s;
    }

    // Frame-weighted average erasure over the info count (the printed
    // normalisation). Kept for reporting; see eps_slot() for computation.
    double eps_bar() const { return loss_load() / static_cast<double>(n_info()); }

    // Per-slot average erasure. This is the binomial-substitution parameter
    // that reproduces the exact homogeneous distribution and keeps the
    // moment formulas' pole at the capacity limit; the /N_tau normalisation
    // printed alongside the formulas disagrees with both (see tests).
    double eps_slot() const { return loss_load() / static_cast<double>(tau); }

    // Per-slot erasure layout of one frame: counts[p] entries of eps[p].
    std::vector<double> slot_eps() const {
        std::vector<double> out;
        out.reserve(tau);
        for (std::size_t p = 0; p < counts.size(); ++p)
            for (int i = 0; i < counts[p]; ++i) out.push_back(eps[p]);
        return out;
    }

    SProcessSpec with_coded_path(int p) const {
        SProcessSpec s = *this;
        s.coded_path = p;
        s.validate();
        return s;
    }
};

// Mean decode-period length is finite iff expected losses per frame < 1.
inline bool capacity_check(const SProcessSpec& spec) {
    spec.validate();
    return spec.loss_load() < 1.0;
}

// P(0..rmax successes) among independent Bernoulli trials, by the direct
// O(n*rmax) convolution.
inline std::vector<double> poisson_binomial_pmf_upto(const std::vector<double>& probs,
                                                     int rmax) {
    int n = static_cast<int>(probs.size());
    if (rmax < 0 || rmax > n)
        throw std::out_of_range("poisson_binomial_pmf: r out of range");
    std::vector<double> dp(static_cast<std::size_t>(rmax) + 1, 0.0);
    dp[0] = 1.0;
    for (int i = 0; i < n; ++i) {
        double p = probs[static_cast<std::size_t>(i)];
        int hi = std::min(rmax, i + 1);
        for (int j = hi; j >= 1; --j) dp[j] = dp[j] * (1.0 - p) + dp[j - 1] * p;
        dp[0] *= (1.0 - p);
    }
    return dp;
}

inline double poisson_binomial_pmf(const std::vector<double>& probs, int r) {
    return poisson_binomial_pmf_upto(probs, r)[static_cast<std::size_t>(r)];
}

inline double log_choose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Binomial-substitution tail: P(S=k) ~ (N_tau/k) q^k (1-q)^{k N_tau}
// C((k-1)tau, k-1). Exact when the per-slot losses are homogeneous(q).
inline double s_tail_formula(double q, int tau, int k) {
    if (k < 2) throw std::invalid_argument("s_tail_formula: k must be > 1");
    if (q <= 0.0) return 0.0;
    int n_info = tau - 1;
    double logp = std::log(static_cast<double>(n_info)) - std::log(static_cast<double>(k)) +
                  k * std::log(q) + static_cast<double>(k) * n_info * std::log1p(-q) +
                  log_choose(static_cast<double>(k - 1) * tau, static_cast<double>(k - 1));
    return std::exp(logp);
}

// Theorem-2 distribution of the decode-period length S: exact closed forms
// for k in {0,1}, binomial-substitution approximation beyond.
inline double p_s(const SProcessSpec& spec, int k) {
    spec.validate();
    if (k < 0) throw std::out_of_range("p_s: negative k");
    int pc = spec.coded_path - 1;
    if (k == 0) {
        double p = std::pow(1.0 - spec.eps[pc], spec.counts[pc] - 1);
        for (int i = 0; i < spec.paths(); ++i)
            if (i != pc) p *= std::pow(1.0 - spec.eps[i], spec.counts[i]);
        return p;
    }
    if (k == 1) {
        // One info loss on the coded path, everything else through.
        double first = (spec.counts[pc] - 1) * spec.eps[pc] *
                       std::pow(1.0 - spec.eps[pc], spec.counts[pc] - 1);
        for (int j = 0; j < spec.paths(); ++j)
            if (j != pc) first *= std::pow(1.0 - spec.eps[j], spec.counts[j]);
        // One info loss on some other path, everything else through.
        double second = 0.0;
        for (int i = 0; i < spec.paths(); ++i) {
            if (i == pc) continue;
            double term = spec.counts[i] * spec.eps[i] *
                          std::pow(1.0 - spec.eps[i], spec.counts[i] - 1);
            for (int j = 0; j < spec.paths(); ++j)
                if (j != i) term *= std::pow(1.0 - spec.eps[j], spec.counts[j]);
            second += term;
        }
        return first + second;
    }
    return s_tail_formula(spec.eps_slot(), spec.tau, k);
}

// Exact P(S=k), k >= 2, via the poisson-binomial decomposition: r >= 2
// losses in the opening frame, k-r spread over the next k-1 frames, with
// the first-passage weight (r-1)/(k-1).
inline double exact_p_s(const SProcessSpec& spec, int k) {
    spec.validate();
    if (k < 2) throw std::invalid_argument("exact_p_s: defined for k >= 2");
    if (static_cast<long long>(k) * spec.tau > 10000)
        throw std::invalid_argument("exact_p_s: k*tau exceeds the exact-convolution guard");
    auto frame = spec.slot_eps();
    std::vector<double> rest;
    rest.reserve(frame.size() * static_cast<std::size_t>(k - 1));
    for (int rep = 0; rep < k - 1; ++rep)
        rest.insert(rest.end(), frame.begin(), frame.end());
    int rmax = std::min(k, spec.tau);
    auto first_pmf = poisson_binomial_pmf_upto(frame, rmax);
    auto rest_pmf = poisson_binomial_pmf_upto(
        rest, std::min(k - 2, static_cast<int>(rest.size())));
    double total = 0.0;
    for (int r = 2; r <= rmax; ++r) {
        if (k - r > static_cast<int>(rest.size())) continue;
        double w = static_cast<double>(r - 1) / static_cast<double>(k - 1);
        total += first_pmf[static_cast<std::size_t>(r)] * w *
                 rest_pmf[static_cast<std::size_t>(k - r)];
    }
    return total;
}

struct SMoments {
    double mean = 0.0;   // E[S]
    double second = 0.0; // E[S^2]
};

// Theorem-2.3 closed-form moments; diverge at the capacity limit.
inline SMoments moments(const SProcessSpec& spec) {
    spec.validate();
    double load = spec.loss_load();  // == tau * eps_slot
    if (load >= 1.0)
        throw std::domain_error("moments: diverges at or above the capacity limit");
    double q = spec.eps_slot();
    double n_info = static_cast<double>(spec.n_info());
    double tau = static_cast<double>(spec.tau);
    double p1 = p_s(spec, 1);
    double core = tau * n_info * q * q * std::pow(1.0 - q, n_info);
    SMoments m;
    m.mean = p1 + core / (1.0 - load);
    m.second = p1 + (1.0 - q + (1.0 - load) * (1.0 - load)) * core /
                        ((1.0 - load) * (1.0 - load) * (1.0 - load));
    return m;
}

// Theorem-3 mean-buffering-delay bound. Two printed variants exist; the
// `statement` form is the one simulation validates (see tests), the
// `proof_expr` form multiplies the per-packet time in twice and goes
// negative for sub-second slot durations.
struct DelayBound {
    double statement = 0.0;
    double proof_expr = 0.0;
};

inline DelayBound delay_bound(const SProcessSpec& spec, const std::vector<double>& deltas) {
    spec.validate();
    if (deltas.size() != spec.counts.size())
        throw std::invalid_argument("delay_bound: one delta per path required");
    SMoments m = moments(spec);
    double p0 = p_s(spec, 0);
    double denom = 2.0 * spec.tau * (m.mean + p0);
    DelayBound b;
    for (std::size_t p = 0; p < deltas.size(); ++p) {
        double n = spec.counts[p];
        b.statement += std::max(n * (n - 1.0), 1.0) * deltas[p];
        b.proof_expr += deltas[p] * n * (deltas[p] * n - 1.0);
    }
    b.statement *= m.second / denom;
    b.proof_expr *= m.second / denom;
    return b;
}

// Theorem-4 comparison: P(S=0) with the coded packet on the lossiest path
// over P(S=0) with it on alt_path; equals (1-eps_alt)/(1-eps_max).
inline double coded_path_delay_ratio(const SProcessSpec& spec, int alt_path) {
    spec.validate();
    int lossiest = 1;
    for (int p = 2; p <= spec.paths(); ++p)
        if (spec.eps[p - 1] > spec.eps[lossiest - 1]) lossiest = p;
    double p0_best = p_s(spec.with_coded_path(lossiest), 0);
    double p0_alt = p_s(spec.with_coded_path(alt_path), 0);
    return p0_best / p0_alt;
}

enum class SMethod { ClosedForm, ExactOracle, MonteCarlo };

inline const char* to_string(SMethod m) {
    switch (m) {
        case SMethod::ClosedForm: return "closed-form";
        case SMethod::ExactOracle: return "exact-oracle";
        case SMethod::MonteCarlo: return "monte-carlo";
    }
    return "?";
}

struct SDistribution {
    std::map<int, double> pmf;   // k -> probability, k in [0, k_max]
    double tail_mass = 0.0;      // residual beyond k_max
    double mean = 0.0;
    double second = 0.0;
    SMethod method = SMethod::ClosedForm;
};

inline SDistribution s_distribution(const SProcessSpec& spec, int k_max = 200,
                                    SMethod method = SMethod::ClosedForm) {
    if (method == SMethod::MonteCarlo)
        throw std::invalid_argument("s_distribution: use monte_carlo_s for sampling");
    SDistribution d;
    d.method = method;
    double sum = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        double v;
        if (k <= 1)
            v = p_s(spec, k);
        else
            v = (method == SMethod::ExactOracle) ? exact_p_s(spec, k) : p_s(spec, k);
        d.pmf[k] = v;
        sum += v;
        d.mean += k * v;
        d.second += static_cast<double>(k) * k * v;
    }
    d.tail_mass = std::max(0.0, 1.0 - sum);
    return d;
}

// Seeded frame-level Monte Carlo of the decode-period process: Bernoulli
// slot erasures laid out per the frame counts, coded slot at the frame end,
// periods run until the received coded packets cover the losses.
struct McSResult {
    std::vector<double> freq;        // S frequencies, index 0..k_max
    double tail_freq = 0.0;
    double mean = 0.0;               // sample E[S]
    double second = 0.0;             // sample E[S^2]
    std::uint64_t periods = 0;
    // Filled when deltas are supplied:
    double buffering_per_transmitted = 0.0;  // total wait / all transmitted packets
    double buffering_per_info = 0.0;         // total wait / delivered info packets
};

inline McSResult monte_carlo_s(const SProcessSpec& spec, std::uint64_t periods,
                               std::uint64_t seed, int k_max = 64,
                               const std::vector<double>* deltas = nullptr) {
    spec.validate();
    Rng rng(seed);
    McSResult res;
    res.freq.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
    res.periods = periods;

    // Frame layout: each slot tagged (erasure prob, is_coded, time-in-frame).
    struct Slot {
        double eps;
        bool coded;
        double t;
    };
    std::vector<Slot> layout;
    double frame_span = 0.0;
    for (int p = 0; p < spec.paths(); ++p) {
        double dt = deltas ? (*deltas)[static_cast<std::size_t>(p)] : 1.0;
        for (int i = 0; i < spec.counts[p]; ++i) {
            bool coded = (p == spec.coded_path - 1) && (i == spec.counts[p] - 1);
            layout.push_back({spec.eps[p], coded, i * dt});
        }
        frame_span = std::max(frame_span, spec.counts[p] * dt);
    }
    std::stable_sort(layout.begin(), layout.end(), [](const Slot& a, const Slot& b) {
        if (a.t != b.t) return a.t < b.t;
        return !a.coded && b.coded;  // coded packet closes the frame
    });

    double total_wait = 0.0;
    std::uint64_t total_slots = 0;
    std::uint64_t total_info = 0;
    double sum_s = 0.0, sum_s2 = 0.0;

    std::vector<double> buffered;  // arrival times of packets held this period
    for (std::uint64_t n = 0; n < periods; ++n) {
        int deficit = 0, pool = 0;
        int frames = 0;
        buffered.clear();
        bool done = false;
        while (!done) {
            double base = frames * frame_span;
            ++frames;
            for (const Slot& s : layout) {
                bool lost = rng.uniform01() < s.eps;
                if (s.coded) {
                    if (!lost && deficit > 0) ++pool;
                } else {
                    ++total_info;
                    if (lost) {
                        ++deficit;
                    } else if (deficit > 0) {
                        buffered.push_back(base + s.t);
                    } else {
                        // in-order, delivered on arrival
                    }
                }
            }
            total_slots += static_cast<std::uint64_t>(layout.size());
            if (deficit == 0) {
                // Clean frame: S = 0 period.
                sum_s += 0.0;
                res.freq[0] += 1.0;
                done = true;
            } else if (pool >= deficit) {
                double t_dec = base + layout.back().t;
                for (double t : buffered) total_wait += t_dec - t;
                int s_val = frames;
                sum_s += s_val;
                sum_s2 += static_cast<double>(s_val) * s_val;
                if (s_val <= k_max)
                    res.freq[static_cast<std::size_t>(s_val)] += 1.0;
                else
                    res.tail_freq += 1.0;
                done = true;
            } else if (frames > 2000000) {
                throw std::runtime_error("monte_carlo_s: runaway period (at/above capacity?)");
            }
        }
    }
    double n = static_cast<double>(periods);
    for (auto& f : res.freq) f /= n;
    res.tail_freq /= n;
    res.mean = sum_s / n;
    res.second = sum_s2 / n;
    if (total_slots > 0) res.buffering_per_transmitted = total_wait / static_cast<double>(total_slots);
    if (total_info > 0) res.buffering_per_info = total_wait / static_cast<double>(total_info);
    return res;
}

}  // namespace sedpf
