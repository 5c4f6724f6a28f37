#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "sdq/errors.hpp"
#include "sdq/model.hpp"

namespace sdq {

enum class FluidPolicyKind { StaticPriority, ServeInTurn };

// Single-class-at-a-time server allocation. The served class is re-chosen
// whenever it empties: StaticPriority picks the highest-priority nonempty
// class, ServeInTurn the next nonempty class in cyclic order (exhaustive
// round-robin). Simultaneous empties break ties by class index.
struct FluidPolicy {
    FluidPolicyKind kind = FluidPolicyKind::StaticPriority;
    std::vector<int> priority; // class indices, highest priority first

    static FluidPolicy static_priority(std::vector<int> order) {
        return FluidPolicy{FluidPolicyKind::StaticPriority, std::move(order)};
    }
    static FluidPolicy serve_in_turn() { return FluidPolicy{FluidPolicyKind::ServeInTurn, {}}; }

    std::string name() const {
        if (kind == FluidPolicyKind::ServeInTurn) return "serve-in-turn";
        std::string s = "static-priority(";
        for (std::size_t i = 0; i < priority.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(priority[i] + 1);
        }
        return s + ")";
    }
};

struct FluidState {
    Vec q;       // fluid level per class
    Vec t_alloc; // cumulative service time per class
    double y = 0.0;
    double t = 0.0;
};

struct FluidTrajectory {
    std::vector<FluidState> breakpoints;
    std::optional<double> drain_time; // first time q == 0
    std::string policy_name;
};

inline double lyapunov_drain_time(const ModelSpec& spec, const Vec& q0) {
    require_structural(spec, "lyapunov_drain_time");
    OffspringMatrix om = offspring_matrix(spec);
    if (!(om.rho < 1.0))
        throw StabilityViolation("lyapunov_drain_time: requires rho(M) < 1, got rho = " +
                                 std::to_string(om.rho));
    Vec c = drain_coefficients(spec);
    double f = 0.0;
    for (int j = 0; j < spec.k; ++j) f += c[j] * q0[j];
    return f;
}

struct WitnessReport {
    int component = -1;    // class whose fluid work provably grows from empty
    double value = 0.0;    // growth per unit time: ((H^T - I) e)_component
    Vec left_perron;       // w with w M = rho(M) w, normalized to sum 1
    double rho = 0.0;
};

// Weak-instability certificate: under the uniform probe allocation T = e t,
// W(t) >= (H^T - I) e t from an empty start, and with rho > 1 some component
// of (H^T - I) e is strictly positive (a column sum of H exceeds one).
inline WitnessReport instability_witness(const ModelSpec& spec) {
    require_structural(spec, "instability_witness");
    OffspringMatrix om = offspring_matrix(spec);
    if (!(om.rho > 1.0))
        throw HypothesisNotSatisfied(
            "instability_witness: requires rho(M) > 1, got rho = " + std::to_string(om.rho));
    for (int i = 0; i < spec.k; ++i) {
        bool any = false;
        for (int j = 0; j < spec.k; ++j) any = any || om.m(i, j) > 0.0;
        if (!any)
            throw HypothesisNotSatisfied("instability_witness: row " + std::to_string(i + 1) +
                                         " of the offspring matrix has no positive element");
    }
    Mat h = h_matrix(spec);
    WitnessReport rep;
    rep.rho = om.rho;
    for (int i = 0; i < spec.k; ++i) {
        double colsum = 0.0;
        for (int r = 0; r < spec.k; ++r) colsum += h(r, i);
        double v = colsum - 1.0;
        if (v > rep.value) {
            rep.value = v;
            rep.component = i;
        }
    }
    rep.left_perron = perron_vector(om.m.transposed());
    return rep;
}

namespace detail {

// Server allocation that holds the empty state invariant under the exact
// matrix dynamics Q(t) = Q(0) + (M^T - I) D(t) + Y(t) lambda0:
//  rho < 1:  G dT = (I-M^T)^{-1} lambda0 dY, idle fraction from the time budget;
//  rho = 1:  serve along the Perron direction of M^T, no idling;
//  rho > 1:  same direction, but the state grows: q(t) = (rho-1) w t / c.
struct ZeroRegime {
    Vec t_rate;   // dT/dt
    double y_rate = 0.0;
    Vec q_rate;   // dQ/dt (zero unless rho > 1)
};

inline ZeroRegime zero_state_regime(const ModelSpec& spec, const OffspringMatrix& om,
                                    double epsilon) {
    const int k = spec.k;
    ZeroRegime z;
    z.t_rate.assign(k, 0.0);
    z.q_rate.assign(k, 0.0);
    if (om.rho < 1.0 - epsilon) {
        Vec u = solve_linear(Mat::identity(k) - om.m.transposed(), spec.lambda0);
        double busy = 0.0;
        for (int i = 0; i < k; ++i) busy += spec.service[i].mean() * u[i];
        z.y_rate = 1.0 / (1.0 + busy);
        for (int i = 0; i < k; ++i) z.t_rate[i] = spec.service[i].mean() * u[i] * z.y_rate;
        return z;
    }
    Vec w = perron_vector(om.m.transposed());
    double c = 0.0;
    for (int i = 0; i < k; ++i) c += w[i] * spec.service[i].mean();
    for (int i = 0; i < k; ++i) z.t_rate[i] = w[i] * spec.service[i].mean() / c;
    z.y_rate = 0.0;
    if (om.rho > 1.0 + epsilon)
        for (int i = 0; i < k; ++i) z.q_rate[i] = (om.rho - 1.0) * w[i] / c;
    return z;
}

inline int pick_class(const FluidPolicy& policy, const Vec& q, int last_served) {
    const int k = static_cast<int>(q.size());
    if (policy.kind == FluidPolicyKind::StaticPriority) {
        for (int c : policy.priority)
            if (q[c] > 0.0) return c;
        return -1;
    }
    for (int step = 1; step <= k; ++step) {
        int c = (last_served + step) % k;
        if (q[c] > 0.0) return c;
    }
    return -1;
}

} // namespace detail

// Exact event-driven piecewise-linear fluid integration. While class c is
// served, dQ_j/dt = lambda_cj - mu_j [j == c]; the next breakpoint is where the
// served class empties (closed form, no ODE stepping). Once the state reaches
// zero it is handed to the zero-state regime above. Levels below 1e-12 of the
// initial scale are snapped to zero: exhaustive policies approach the drain
// point through geometrically shrinking service cycles, and the snap converts
// that Zeno tail into a single breakpoint.
inline FluidTrajectory integrate(const ModelSpec& spec, const Vec& q0, const FluidPolicy& policy,
                                 double horizon) {
    require_structural(spec, "fluid::integrate");
    if (!(horizon > 0.0)) throw std::invalid_argument("fluid::integrate: horizon must be > 0");
    if (q0.size() != static_cast<std::size_t>(spec.k))
        throw std::invalid_argument("fluid::integrate: q0 must have K entries");
    for (double v : q0)
        if (!(v >= 0.0)) throw std::invalid_argument("fluid::integrate: q0 must be >= 0");
    if (policy.kind == FluidPolicyKind::StaticPriority) {
        std::vector<int> sorted = policy.priority;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < spec.k; ++i)
            if (i >= static_cast<int>(sorted.size()) || sorted[i] != i)
                throw std::invalid_argument(
                    "fluid::integrate: priority order must be a permutation of all classes");
    }

    const int k = spec.k;
    const OffspringMatrix om = offspring_matrix(spec);
    const double epsilon = 1e-9;
    // Snapped mass shortens the measured drain time by its Lyapunov weight;
    // 1e-14 keeps the accumulated shortfall below 1e-9 even for priority
    // cascades with thousands of snap events.
    const double snap = 1e-14 * std::max(1.0, inf_norm(q0));
    const long long breakpoint_cap = 1000000;

    FluidTrajectory traj;
    traj.policy_name = policy.name();
    FluidState s;
    s.q = q0;
    s.t_alloc.assign(k, 0.0);
    traj.breakpoints.push_back(s);

    auto all_zero = [&](const Vec& q) {
        for (double v : q)
            if (v > 0.0) return false;
        return true;
    };

    int last_served = k - 1; // so ServeInTurn starts its scan at class 0
    while (s.t < horizon) {
        if (all_zero(s.q)) {
            if (!traj.drain_time) traj.drain_time = s.t;
            detail::ZeroRegime z = detail::zero_state_regime(spec, om, epsilon);
            double dt = horizon - s.t;
            for (int i = 0; i < k; ++i) {
                s.t_alloc[i] += z.t_rate[i] * dt;
                s.q[i] += z.q_rate[i] * dt;
            }
            s.y += z.y_rate * dt;
            s.t = horizon;
            traj.breakpoints.push_back(s);
            break;
        }
        int c = detail::pick_class(policy, s.q, last_served);
        last_served = c;
        const double net = spec.lambda(c, c) - spec.service[c].rate();
        double dt = horizon - s.t;
        bool empties = false;
        bool to_horizon = true;
        if (net < 0.0) {
            double to_empty = s.q[c] / (-net);
            if (to_empty <= dt) {
                dt = to_empty;
                empties = true;
                to_horizon = false;
            }
        }
        for (int j = 0; j < k; ++j)
            s.q[j] += dt * (spec.lambda(c, j) - (j == c ? spec.service[c].rate() : 0.0));
        if (empties) s.q[c] = 0.0;
        // Per-class snap. Exhaustive priority service drains nested class
        // subsets through geometrically shrinking service cycles (every
        // principal offspring submatrix is subcritical when rho < 1), so
        // levels caught mid-cascade fall below the threshold and the Zeno
        // accumulation collapses to finitely many breakpoints.
        for (int j = 0; j < k; ++j) {
            s.q[j] = std::max(s.q[j], 0.0);
            if (s.q[j] <= snap) s.q[j] = 0.0;
        }
        s.t_alloc[c] += dt;
        // clock defined as allocated-plus-idle time, so the budget identity
        // sum(T_i) + Y = t holds exactly at every breakpoint; a horizon-capped
        // leg pins the clock to the horizon (within one rounding step of the
        // identity) so the loop terminates
        s.t = s.y;
        for (int j = 0; j < k; ++j) s.t += s.t_alloc[j];
        if (to_horizon) s.t = horizon;
        traj.breakpoints.push_back(s);
        if (static_cast<long long>(traj.breakpoints.size()) > breakpoint_cap)
            throw PolicyLivelock("fluid::integrate: breakpoint cap exceeded");
    }
    return traj;
}

} // namespace sdq
