#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sdq/branching.hpp"
#include "sdq/errors.hpp"
#include "sdq/model.hpp"
#include "sdq/rng.hpp"

namespace sdq {

enum class SimPolicy { FifoHeadOfLine, StaticPriorityPreemptiveResume, StaticPriorityNonPreemptive };

inline const char* to_string(SimPolicy p) {
    switch (p) {
        case SimPolicy::FifoHeadOfLine: return "fifo";
        case SimPolicy::StaticPriorityPreemptiveResume: return "priority-preemptive";
        case SimPolicy::StaticPriorityNonPreemptive: return "priority-nonpreemptive";
    }
    return "?";
}

struct SimConfig {
    ModelSpec spec;
    SimPolicy policy = SimPolicy::FifoHeadOfLine;
    std::vector<int> priority;        // class order for the priority policies
    double horizon = 0.0;             // stop time; 0 means run to busy_period_target
    long long busy_period_target = 0; // stop after this many busy periods (0 = none)
    std::uint64_t seed = 0;
    double warmup = 0.0;              // statistics start here
    long long max_events = (1ll << 62);
    double sample_every = 0.0;        // trace series interval, 0 = off
    std::string trace_path;           // event log file, empty = off
    std::vector<long long> initial_jobs; // queue seeded with these counts at t = 0
};

struct BusyPeriodSample {
    double length = 0.0;
    int initiator = 0;
    std::vector<long long> customers_served;
    double max_workload = 0.0;
};

struct TracePoint {
    double t = 0.0;
    std::vector<long long> q;
    double workload = 0.0;
    double idle = 0.0;
};

struct SimSummary {
    double t_end = 0.0;
    Vec t_alloc;
    double y = 0.0;
    std::vector<long long> arrivals, departures, q_final;
    double time_avg_workload = 0.0;
    Vec time_avg_q;
    double idle_fraction = 0.0;
    long long events = 0;
    bool partial = false; // event cap tripped before the stop condition
    std::vector<TracePoint> series;
};

struct SimResult {
    SimSummary summary;
    std::vector<BusyPeriodSample> busy_periods;
};

namespace detail {

struct SimJob {
    double remaining;
    double arrived;
    int cls;
};

// Event-driven core. Arrival clocks are exponential with the rate row of the
// class in service (idle row when empty) and are re-drawn whenever that row
// changes; for Poisson arrivals the re-draw is exact by memorylessness.
// Service requirements are drawn at arrival time so the workload path is
// defined under every policy.
class SimEngine {
public:
    SimEngine(const SimConfig& cfg, Rng rng)
        : cfg_(cfg), spec_(cfg_.spec), k_(cfg_.spec.k), rng_(rng), queues_(k_),
          next_arrival_(k_, inf()), rank_(k_) {
        if (cfg_.policy != SimPolicy::FifoHeadOfLine) {
            std::vector<int> order = cfg_.priority;
            if (order.empty())
                for (int i = 0; i < k_; ++i) order.push_back(i);
            if (static_cast<int>(order.size()) != k_)
                throw std::invalid_argument("sim: priority order must list every class");
            std::vector<bool> seen(k_, false);
            for (int pos = 0; pos < k_; ++pos) {
                int c = order[pos];
                if (c < 0 || c >= k_ || seen[c])
                    throw std::invalid_argument("sim: priority order must be a permutation");
                seen[c] = true;
                rank_[c] = pos;
            }
        }
        t_alloc_.assign(k_, 0.0);
        arrivals_.assign(k_, 0);
        departures_.assign(k_, 0);
        area_q_.assign(k_, 0.0);
        if (!cfg_.trace_path.empty()) {
            trace_.open(cfg_.trace_path, std::ios::trunc);
            if (!trace_) throw std::runtime_error("sim: cannot open trace file " + cfg_.trace_path);
        }
        redraw_all_clocks();
    }

    // Inject one customer and run until the system next empties; used for
    // forced-initiator busy-period sampling (exact for the B_i law and far
    // cheaper than waiting for an idle-state arrival). The replication gets
    // its own counter-based stream so results are schedule-independent.
    BusyPeriodSample run_one_busy_period(int initiator, Rng rng) {
        reset(rng);
        inject_arrival(initiator);
        while (serving_ >= 0) {
            if (!step(inf())) break;
        }
        return last_busy_;
    }

    // Seed the queue with jobs present at time zero (counted as arrivals at
    // t = 0, so the flow identities still balance).
    void seed_jobs(const std::vector<long long>& counts) {
        if (counts.empty()) return;
        if (counts.size() != static_cast<std::size_t>(k_))
            throw std::invalid_argument("sim: initial_jobs must have K entries");
        for (int cls = 0; cls < k_; ++cls)
            for (long long n = 0; n < counts[cls]; ++n) inject_arrival(cls);
    }

    void reset(Rng rng) {
        rng_ = rng;
        t_ = 0.0;
        serving_ = -1;
        remaining_ = 0.0;
        w_ = 0.0;
        y_ = 0.0;
        std::fill(t_alloc_.begin(), t_alloc_.end(), 0.0);
        std::fill(arrivals_.begin(), arrivals_.end(), 0);
        std::fill(departures_.begin(), departures_.end(), 0);
        std::fill(area_q_.begin(), area_q_.end(), 0.0);
        area_w_ = idle_time_ = 0.0;
        events_ = 0;
        partial_ = false;
        busy_initiator_ = -1;
        for (auto& q : queues_) q.clear();
        busy_samples_.clear();
        series_.clear();
        redraw_all_clocks();
    }

    SimSummary run_full() {
        const double stop = cfg_.horizon > 0.0 ? cfg_.horizon : inf();
        for (;;) {
            if (cfg_.busy_period_target > 0 &&
                static_cast<long long>(busy_samples_.size()) >= cfg_.busy_period_target)
                break;
            if (t_ >= stop) break;
            if (!step(stop)) break;
        }
        return summary();
    }

    SimSummary summary() {
        SimSummary s;
        s.t_end = t_;
        s.t_alloc = t_alloc_;
        s.y = y_;
        s.arrivals = arrivals_;
        s.departures = departures_;
        s.q_final.assign(k_, 0);
        for (int i = 0; i < k_; ++i) s.q_final[i] = static_cast<long long>(queues_[i].size());
        if (serving_ >= 0) ++s.q_final[serving_];
        double span = std::max(t_ - cfg_.warmup, 0.0);
        s.time_avg_workload = span > 0.0 ? area_w_ / span : 0.0;
        s.time_avg_q.assign(k_, 0.0);
        for (int i = 0; i < k_; ++i) s.time_avg_q[i] = span > 0.0 ? area_q_[i] / span : 0.0;
        s.idle_fraction = span > 0.0 ? idle_time_ / span : 0.0;
        s.events = events_;
        s.partial = partial_;
        s.series = std::move(series_);
        return s;
    }

    std::vector<BusyPeriodSample>& busy_samples() { return busy_samples_; }

private:
    static double inf() { return std::numeric_limits<double>::infinity(); }

    void redraw_all_clocks() {
        for (int j = 0; j < k_; ++j) {
            double rate = serving_ >= 0 ? spec_.lambda(serving_, j) : spec_.lambda0[j];
            next_arrival_[j] = t_ + rng_.exponential(rate);
        }
    }

    void log_event(char ev, int cls) {
        if (!trace_.is_open()) return;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", t_);
        trace_ << buf << '\t' << ev << '\t' << cls + 1 << '\t';
        for (int i = 0; i < k_; ++i) {
            long long q = static_cast<long long>(queues_[i].size()) + (serving_ == i ? 1 : 0);
            trace_ << (i ? "," : "") << q;
        }
        trace_ << '\n';
    }

    void advance_time(double to) {
        double dt = to - t_;
        if (dt <= 0.0) return;
        double a = std::max(t_, cfg_.warmup);
        double b = to;
        if (b > a) {
            double span = b - a;
            // workload declines at unit rate while the server is busy
            double w_at_a = w_ - (serving_ >= 0 ? (a - t_) : 0.0);
            area_w_ += w_at_a * span - (serving_ >= 0 ? 0.5 * span * span : 0.0);
            for (int i = 0; i < k_; ++i) {
                long long q = static_cast<long long>(queues_[i].size()) + (serving_ == i ? 1 : 0);
                area_q_[i] += static_cast<double>(q) * span;
            }
            if (serving_ < 0) idle_time_ += span;
        }
        if (serving_ >= 0) {
            w_ -= dt;
            if (w_ < 0.0) w_ = 0.0;
            t_alloc_[serving_] += dt;
            remaining_ -= dt;
        } else {
            y_ += dt;
        }
        t_ = to;
    }

    void inject_arrival(int cls) {
        double s = spec_.service[cls].sample(rng_);
        handle_arrival(cls, s);
    }

    void handle_arrival(int cls, double service) {
        ++arrivals_[cls];
        w_ += service;
        queues_[cls].push_back({service, t_, cls});
        log_event('A', cls);
        if (serving_ < 0) {
            busy_start_ = t_;
            busy_initiator_ = cls;
            busy_served_.assign(k_, 0);
            busy_max_w_ = w_;
            start_next(-1);
        } else {
            busy_max_w_ = std::max(busy_max_w_, w_);
            if (cfg_.policy == SimPolicy::StaticPriorityPreemptiveResume &&
                rank_[cls] < rank_[serving_]) {
                int prev = serving_;
                queues_[prev].push_front({remaining_, served_arrived_, prev});
                serving_ = -1;
                start_next(prev);
            }
        }
    }

    // prev_row is the rate row in force before this scheduling decision
    // (-1 when the server was idle); arrival clocks are re-drawn iff the
    // row changes.
    void start_next(int prev_row) {
        int pick = -1;
        if (cfg_.policy == SimPolicy::FifoHeadOfLine) {
            double best = inf();
            for (int i = 0; i < k_; ++i) {
                if (queues_[i].empty()) continue;
                if (queues_[i].front().arrived < best) {
                    best = queues_[i].front().arrived;
                    pick = i;
                }
            }
        } else {
            for (int i = 0; i < k_ && pick < 0; ++i) {
                // scan classes in priority order
                for (int c = 0; c < k_; ++c)
                    if (rank_[c] == i && !queues_[c].empty()) {
                        pick = c;
                        break;
                    }
            }
        }
        if (pick < 0) {
            serving_ = -1;
            if (busy_initiator_ >= 0) {
                last_busy_ = BusyPeriodSample{t_ - busy_start_, busy_initiator_, busy_served_,
                                              busy_max_w_};
                if (busy_start_ >= cfg_.warmup) busy_samples_.push_back(last_busy_);
                busy_initiator_ = -1;
            }
            log_event('I', -1);
            if (prev_row >= 0) redraw_all_clocks();
            return;
        }
        SimJob job = queues_[pick].front();
        queues_[pick].pop_front();
        serving_ = pick;
        remaining_ = job.remaining;
        served_arrived_ = job.arrived;
        log_event('S', pick);
        if (pick != prev_row) redraw_all_clocks();
    }

    // One event; returns false when the event cap trips or nothing can happen
    // before `stop`.
    bool step(double stop) {
        double completion = serving_ >= 0 ? t_ + remaining_ : inf();
        int arr_cls = -1;
        double arr_t = inf();
        for (int j = 0; j < k_; ++j)
            if (next_arrival_[j] < arr_t) {
                arr_t = next_arrival_[j];
                arr_cls = j;
            }
        double sample_t = cfg_.sample_every > 0.0
                              ? (std::floor(t_ / cfg_.sample_every) + 1.0) * cfg_.sample_every
                              : inf();
        double next = std::min({completion, arr_t, sample_t});
        if (next >= stop || !std::isfinite(next)) {
            if (std::isfinite(stop)) advance_time(stop);
            return false;
        }
        if (events_ >= cfg_.max_events) {
            partial_ = true;
            return false;
        }
        ++events_;
        advance_time(next);
        if (sample_t <= completion && sample_t <= arr_t) {
            TracePoint p;
            p.t = t_;
            p.q.assign(k_, 0);
            for (int i = 0; i < k_; ++i)
                p.q[i] = static_cast<long long>(queues_[i].size()) + (serving_ == i ? 1 : 0);
            p.workload = w_;
            p.idle = y_;
            series_.push_back(std::move(p));
            return true;
        }
        if (completion <= arr_t) {
            int done = serving_;
            ++departures_[done];
            if (busy_initiator_ >= 0) ++busy_served_[done];
            serving_ = -1;
            log_event('D', done);
            start_next(done);
        } else {
            double s = spec_.service[arr_cls].sample(rng_);
            // the class's own clock renews at its arrival; other clocks are untouched
            next_arrival_[arr_cls] = t_ + rng_.exponential(
                serving_ >= 0 ? spec_.lambda(serving_, arr_cls) : spec_.lambda0[arr_cls]);
            handle_arrival(arr_cls, s);
        }
        return true;
    }

    SimConfig cfg_;
    const ModelSpec& spec_;
    int k_;
    Rng rng_;
    std::vector<std::deque<SimJob>> queues_;
    Vec next_arrival_;
    std::vector<int> rank_;

    double t_ = 0.0;
    int serving_ = -1;
    double remaining_ = 0.0;
    double served_arrived_ = 0.0;
    double w_ = 0.0;
    double y_ = 0.0;
    Vec t_alloc_;
    std::vector<long long> arrivals_, departures_;
    Vec area_q_;
    double area_w_ = 0.0;
    double idle_time_ = 0.0;
    long long events_ = 0;
    bool partial_ = false;

    double busy_start_ = 0.0;
    int busy_initiator_ = -1;
    std::vector<long long> busy_served_;
    double busy_max_w_ = 0.0;
    BusyPeriodSample last_busy_;
    std::vector<BusyPeriodSample> busy_samples_;
    std::vector<TracePoint> series_;
    std::ofstream trace_;
};

} // namespace detail

// Full-system run driven by the idle-state arrival rates (and optionally a
// queue seeded at time zero).
inline SimResult run(const SimConfig& cfg) {
    require_structural(cfg.spec, "sim::run");
    if (cfg.horizon <= 0.0 && cfg.busy_period_target <= 0)
        throw std::invalid_argument("sim::run: need a horizon or a busy-period target");
    detail::SimEngine engine(cfg, Rng(cfg.seed, 0));
    engine.seed_jobs(cfg.initial_jobs);
    SimResult r;
    r.summary = engine.run_full();
    r.busy_periods = std::move(engine.busy_samples());
    return r;
}

// Independent busy periods started by a single class-`initiator` customer in
// an empty system; replication r uses stream r of the seed, so results do not
// depend on how replications are scheduled.
inline std::vector<BusyPeriodSample> sample_busy_periods(const ModelSpec& spec, int initiator,
                                                         long long count, std::uint64_t seed,
                                                         SimPolicy policy = SimPolicy::FifoHeadOfLine,
                                                         const std::vector<int>& priority = {}) {
    require_structural(spec, "sample_busy_periods");
    if (initiator < 0 || initiator >= spec.k)
        throw std::invalid_argument("sample_busy_periods: initiator class out of range");
    SimConfig cfg;
    cfg.spec = spec;
    cfg.policy = policy;
    cfg.priority = priority;
    std::vector<BusyPeriodSample> out;
    out.reserve(static_cast<std::size_t>(count));
    detail::SimEngine engine(cfg, Rng(seed, 0));
    for (long long r = 0; r < count; ++r)
        out.push_back(engine.run_one_busy_period(initiator, Rng(seed, static_cast<std::uint64_t>(r))));
    return out;
}

// Same sampling, lengths only; keeps memory flat for very large replication
// counts (tail probes).
inline Vec sample_busy_period_lengths(const ModelSpec& spec, int initiator, long long count,
                                      std::uint64_t seed,
                                      SimPolicy policy = SimPolicy::FifoHeadOfLine) {
    require_structural(spec, "sample_busy_period_lengths");
    if (initiator < 0 || initiator >= spec.k)
        throw std::invalid_argument("sample_busy_period_lengths: initiator class out of range");
    SimConfig cfg;
    cfg.spec = spec;
    cfg.policy = policy;
    Vec out;
    out.reserve(static_cast<std::size_t>(count));
    detail::SimEngine engine(cfg, Rng(seed, 0));
    for (long long r = 0; r < count; ++r)
        out.push_back(
            engine.run_one_busy_period(initiator, Rng(seed, static_cast<std::uint64_t>(r))).length);
    return out;
}

// Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(long long hits, long long n, double z = 1.959963984540054) {
    if (n <= 0) return {0.0, 1.0};
    double p = static_cast<double>(hits) / static_cast<double>(n);
    double nz = z * z / static_cast<double>(n);
    double denom = 1.0 + nz;
    double center = p + 0.5 * nz;
    double half = z * std::sqrt(p * (1.0 - p) / static_cast<double>(n) + 0.25 * nz / static_cast<double>(n));
    return {std::max((center - half) / denom, 0.0), std::min((center + half) / denom, 1.0)};
}

struct TailRatioPoint {
    double x = 0.0;
    long long exceedances = 0;
    double p_hat = 0.0;
    double p_lo = 0.0, p_hi = 0.0;   // Wilson 95%
    double ratio = 0.0;              // p_hat / Fbar(x)
    double ratio_lo = 0.0, ratio_hi = 0.0;
    bool contains_d = false;
    bool one_sided = false;          // too few exceedances for a two-sided band
};

struct TailRatioReport {
    int cls = 0;
    long long replications = 0;
    double alpha = 0.0;
    double d = 0.0;
    std::vector<TailRatioPoint> points;
};

// Ratio table for already-sampled class-`cls` busy-period lengths.
inline TailRatioReport tail_ratio_report(const ModelSpec& spec, int cls, const Vec& lengths,
                                         const Vec& xs) {
    TailReference ref = reference_tail(spec);
    TailConstants tc = tail_constants(spec, ref.alpha, ref.c_tilde);
    const long long n = static_cast<long long>(lengths.size());
    TailRatioReport rep;
    rep.cls = cls;
    rep.replications = n;
    rep.alpha = ref.alpha;
    rep.d = tc.d[cls];
    for (double x : xs) {
        TailRatioPoint pt;
        pt.x = x;
        for (double len : lengths)
            if (len > x) ++pt.exceedances;
        pt.p_hat = static_cast<double>(pt.exceedances) / static_cast<double>(n);
        auto band = wilson_interval(pt.exceedances, n);
        pt.p_lo = band.first;
        pt.p_hi = band.second;
        double fbar = ref.survival(x);
        pt.ratio = pt.p_hat / fbar;
        pt.ratio_lo = pt.p_lo / fbar;
        pt.ratio_hi = pt.p_hi / fbar;
        pt.one_sided = pt.exceedances < 5;
        pt.contains_d = pt.ratio_lo <= rep.d && rep.d <= pt.ratio_hi;
        rep.points.push_back(pt);
    }
    return rep;
}

// Probes P(B_i > x) / Fbar(x) against the predicted constant d_i on a grid of
// x values (busy periods from forced class-i initiators).
inline TailRatioReport empirical_tail_ratio(const ModelSpec& spec, int cls, const Vec& xs,
                                            long long replications, std::uint64_t seed,
                                            SimPolicy policy = SimPolicy::FifoHeadOfLine) {
    require_structural(spec, "empirical_tail_ratio");
    Vec lengths = sample_busy_period_lengths(spec, cls, replications, seed, policy);
    return tail_ratio_report(spec, cls, lengths, xs);
}

struct StabilityProbeRow {
    double kappa = 0.0;
    double rho = 0.0;
    double time_avg_workload = 0.0;
    double idle_fraction = 0.0;
};

// Sweeps a scale factor kappa on the arrival matrix across the stability
// boundary: below kappa* = 1/rho(M) the workload settles and the server keeps
// idling; above it the time-average workload grows with the horizon.
inline std::vector<StabilityProbeRow> stability_probe(const ModelSpec& spec, const Vec& kappas,
                                                      double horizon, std::uint64_t seed) {
    require_structural(spec, "stability_probe");
    double base_rho = offspring_matrix(spec).rho;
    std::vector<StabilityProbeRow> rows;
    for (std::size_t i = 0; i < kappas.size(); ++i) {
        ModelSpec scaled = spec;
        scaled.lambda = spec.lambda.scaled(kappas[i]);
        SimConfig cfg;
        cfg.spec = scaled;
        cfg.horizon = horizon;
        cfg.seed = seed + i;
        SimResult res = run(cfg);
        rows.push_back({kappas[i], kappas[i] * base_rho, res.summary.time_avg_workload,
                        res.summary.idle_fraction});
    }
    return rows;
}

} // namespace sdq
