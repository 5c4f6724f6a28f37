#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sdq/errors.hpp"
#include "sdq/model.hpp"
#include "sdq/rng.hpp"

namespace sdq {

// One multitype Galton-Watson tree rooted at a single ancestor. An individual
// of class i lives for a service time S ~ F_i and bears Poisson(lambda_ij * S)
// class-j children (counts conditionally independent given S). The sum of all
// lifetimes is a busy-period sample for the queue.
struct GwTreeSample {
    int ancestor = 0;
    std::vector<std::vector<long long>> generations; // Z_0, Z_1, ... as K-vectors
    double total_lifetime = 0.0;
    bool extinct = false;  // false means a cap was hit (censored), never truncated silently
    int depth = 0;         // max n with Z_n != 0; meaningful when extinct
    long long total_individuals = 0;
};

struct TreeCaps {
    long long max_generations = 10000;
    long long max_individuals = 10000000;
};

inline GwTreeSample sample_tree(const ModelSpec& spec, int ancestor, const TreeCaps& caps,
                                Rng& rng) {
    const int k = spec.k;
    GwTreeSample out;
    out.ancestor = ancestor;
    std::vector<long long> gen(k, 0);
    gen[ancestor] = 1;
    out.generations.push_back(gen);
    out.total_individuals = 1;
    long long n = 0;
    for (;;) {
        std::vector<long long> next(k, 0);
        for (int i = 0; i < k; ++i) {
            for (long long ind = 0; ind < gen[i]; ++ind) {
                double service = spec.service[i].sample(rng);
                out.total_lifetime += service;
                for (int j = 0; j < k; ++j) {
                    double rate = spec.lambda(i, j);
                    if (rate > 0.0) next[j] += rng.poisson(rate * service);
                }
            }
        }
        ++n;
        long long alive = 0;
        for (long long v : next) alive += v;
        if (alive == 0) {
            out.extinct = true;
            out.depth = static_cast<int>(n - 1);
            return out;
        }
        out.generations.push_back(next);
        out.total_individuals += alive;
        gen = std::move(next);
        if (n >= caps.max_generations || out.total_individuals > caps.max_individuals) {
            out.extinct = false; // censored
            out.depth = static_cast<int>(n);
            return out;
        }
    }
}

// Monte Carlo extinction statistics per ancestor class. Censored trees count
// against the extinct fraction and are excluded from the extinct-conditional
// depth/lifetime means.
struct ExtinctionStats {
    long long replications = 0;
    double rho = 0.0;
    Vec extinct_fraction;     // per ancestor class
    Vec extinct_fraction_se;
    Vec mean_depth;           // over extinct trees
    Vec mean_total_lifetime;  // over extinct trees
    Vec total_lifetime_se;
    std::vector<long long> censored;
    bool consistent_with_rho = false; // matches the rho <= 1 <=> extinction dichotomy
};

// only_class = -1 samples every ancestor class; otherwise just that one.
inline ExtinctionStats extinction_stats(const ModelSpec& spec, long long replications,
                                        const TreeCaps& caps, std::uint64_t seed,
                                        int only_class = -1) {
    require_structural(spec, "extinction_stats");
    const int k = spec.k;
    ExtinctionStats st;
    st.replications = replications;
    st.rho = offspring_matrix(spec).rho;
    st.extinct_fraction.assign(k, 0.0);
    st.extinct_fraction_se.assign(k, 0.0);
    st.mean_depth.assign(k, 0.0);
    st.mean_total_lifetime.assign(k, 0.0);
    st.total_lifetime_se.assign(k, 0.0);
    st.censored.assign(k, 0);
    for (int cls = 0; cls < k; ++cls) {
        if (only_class >= 0 && cls != only_class) continue;
        long long extinct = 0;
        double sum_depth = 0.0, sum_life = 0.0, sum_life2 = 0.0;
        for (long long r = 0; r < replications; ++r) {
            Rng rng(seed, (static_cast<std::uint64_t>(cls) << 40) + static_cast<std::uint64_t>(r));
            GwTreeSample tree = sample_tree(spec, cls, caps, rng);
            if (tree.extinct) {
                ++extinct;
                sum_depth += tree.depth;
                sum_life += tree.total_lifetime;
                sum_life2 += tree.total_lifetime * tree.total_lifetime;
            } else {
                ++st.censored[cls];
            }
        }
        double n = static_cast<double>(replications);
        double p = static_cast<double>(extinct) / n;
        st.extinct_fraction[cls] = p;
        st.extinct_fraction_se[cls] = std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
        if (extinct > 0) {
            double ne = static_cast<double>(extinct);
            st.mean_depth[cls] = sum_depth / ne;
            st.mean_total_lifetime[cls] = sum_life / ne;
            double var = std::max(sum_life2 / ne - (sum_life / ne) * (sum_life / ne), 0.0);
            st.total_lifetime_se[cls] = std::sqrt(var / ne);
        }
    }
    bool all_extinct = true, some_survive = false;
    for (int cls = 0; cls < k; ++cls) {
        if (only_class >= 0 && cls != only_class) continue;
        all_extinct = all_extinct && st.extinct_fraction[cls] >= 1.0;
        some_survive = some_survive || st.extinct_fraction[cls] < 1.0;
    }
    st.consistent_with_rho = st.rho <= 1.0 ? all_extinct : some_survive;
    return st;
}

// Closed-form busy-period expectations (all require rho < 1):
//   tau(i,j)     expected time serving class j within a class-i busy period,
//                (I-M)^{-1} G^{-1};
//   mean_busy[i] E B_i, the row sum of tau;
//   beta[i]      sum_j lambda_ij E B_j, the rate at which a class-i service
//                accrues future busy-period work.
struct ExpectationTable {
    Mat tau;
    Vec mean_busy;
    Vec beta;
};

inline ExpectationTable expectations(const ModelSpec& spec) {
    require_structural(spec, "expectations");
    OffspringMatrix om = offspring_matrix(spec);
    if (!(om.rho < 1.0))
        throw StabilityViolation("expectations: requires rho(M) < 1, got rho = " +
                                 std::to_string(om.rho));
    const int k = spec.k;
    ExpectationTable t;
    t.tau = Mat(k, k);
    Mat i_minus_m = Mat::identity(k) - om.m;
    // column j of tau solves (I-M) x = e_j / mu_j
    for (int j = 0; j < k; ++j) {
        Vec rhs(k, 0.0);
        rhs[j] = spec.service[j].mean();
        Vec col = solve_linear(i_minus_m, rhs);
        for (int i = 0; i < k; ++i) t.tau(i, j) = col[i];
    }
    t.mean_busy.assign(k, 0.0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) t.mean_busy[i] += t.tau(i, j);
    // beta two ways: the matrix route Lambda (I-M)^{-1} G^{-1} e (single solve
    // with the mean vector) and the sum over tau row sums; they must agree
    Vec means(k, 0.0);
    for (int j = 0; j < k; ++j) means[j] = spec.service[j].mean();
    Vec beta_matrix = spec.lambda * solve_linear(i_minus_m, means);
    t.beta = spec.lambda * t.mean_busy;
    for (int i = 0; i < k; ++i)
        if (std::fabs(beta_matrix[i] - t.beta[i]) > 1e-10 * (1.0 + std::fabs(t.beta[i])))
            throw IllConditioned("expectations: beta routes disagree");
    return t;
}

// Busy period started by a class-i customer with a fixed service requirement z:
// B_{i;z} = z plus the busy periods of every customer arriving during that
// service. As z grows, B_{i;z}/z concentrates at 1 + beta_i.
struct ScaledBusyPeriodEstimate {
    double z = 0.0;
    long long replications = 0;
    double mean_ratio = 0.0;
    double stderr_ratio = 0.0;
};

inline ScaledBusyPeriodEstimate scaled_busy_period(const ModelSpec& spec, int cls, double z,
                                                   long long replications, std::uint64_t seed,
                                                   const TreeCaps& caps = {}) {
    require_structural(spec, "scaled_busy_period");
    if (!(z > 0.0)) throw std::invalid_argument("scaled_busy_period: z must be > 0");
    OffspringMatrix om = offspring_matrix(spec);
    if (!(om.rho < 1.0))
        throw StabilityViolation("scaled_busy_period: requires rho(M) < 1");
    double sum = 0.0, sum2 = 0.0;
    for (long long r = 0; r < replications; ++r) {
        Rng rng(seed, static_cast<std::uint64_t>(r));
        double b = z;
        for (int j = 0; j < spec.k; ++j) {
            double rate = spec.lambda(cls, j);
            if (rate <= 0.0) continue;
            long long arrivals = rng.poisson(rate * z);
            for (long long a = 0; a < arrivals; ++a)
                b += sample_tree(spec, j, caps, rng).total_lifetime;
        }
        double ratio = b / z;
        sum += ratio;
        sum2 += ratio * ratio;
    }
    ScaledBusyPeriodEstimate est;
    est.z = z;
    est.replications = replications;
    double n = static_cast<double>(replications);
    est.mean_ratio = sum / n;
    double var = std::max(sum2 / n - est.mean_ratio * est.mean_ratio, 0.0);
    est.stderr_ratio = std::sqrt(var / n);
    return est;
}

// Heavy-tail busy-period constants relative to a regularly varying reference
// tail Fbar with index alpha: service tails Fbar_i(x) ~ cTilde_i Fbar(x) give
// c_i = cTilde_i (1+beta_i)^alpha and d solving d = c + M d, so that
// P(B_i > x) ~ d_i Fbar(x).
struct TailConstants {
    double alpha = 0.0;
    Vec c_tilde;
    Vec c;
    Vec d;
};

inline TailConstants tail_constants(const ModelSpec& spec, double alpha, const Vec& c_tilde) {
    require_structural(spec, "tail_constants");
    if (!(alpha > 1.0)) throw std::invalid_argument("tail_constants: alpha must be > 1");
    if (c_tilde.size() != static_cast<std::size_t>(spec.k))
        throw std::invalid_argument("tail_constants: cTilde must have K entries");
    bool any = false;
    for (double v : c_tilde) {
        if (!(v >= 0.0)) throw std::invalid_argument("tail_constants: cTilde must be >= 0");
        any = any || v > 0.0;
    }
    if (!any)
        throw HypothesisNotSatisfied("tail_constants: cTilde must have some positive entry");
    ExpectationTable exp = expectations(spec); // enforces rho < 1
    TailConstants tc;
    tc.alpha = alpha;
    tc.c_tilde = c_tilde;
    tc.c.assign(spec.k, 0.0);
    for (int i = 0; i < spec.k; ++i)
        tc.c[i] = c_tilde[i] * std::pow(1.0 + exp.beta[i], alpha);
    Mat i_minus_m = Mat::identity(spec.k) - offspring_matrix(spec).m;
    tc.d = solve_linear(i_minus_m, tc.c);
    return tc;
}

// Reference tail built from the model's Pareto classes: the heaviest index
// alpha* wins, the widest scale among the alpha* classes normalizes, and every
// lighter class gets cTilde = 0.
struct TailReference {
    double alpha = 0.0;
    double scale = 0.0;
    Vec c_tilde;

    double survival(double x) const { return x <= scale ? 1.0 : std::pow(scale / x, alpha); }
};

inline TailReference reference_tail(const ModelSpec& spec) {
    require_structural(spec, "reference_tail");
    TailReference ref;
    ref.c_tilde.assign(spec.k, 0.0);
    bool found = false;
    for (int i = 0; i < spec.k; ++i) {
        if (spec.service[i].kind() != ServiceKind::Pareto) continue;
        double a = spec.service[i].param1();
        if (!found || a < ref.alpha) {
            ref.alpha = a;
            found = true;
        }
    }
    if (!found)
        throw HypothesisNotSatisfied("reference_tail: model has no Pareto service class");
    for (int i = 0; i < spec.k; ++i) {
        if (spec.service[i].kind() != ServiceKind::Pareto) continue;
        if (spec.service[i].param1() <= ref.alpha * (1.0 + 1e-12))
            ref.scale = std::max(ref.scale, spec.service[i].param2());
    }
    for (int i = 0; i < spec.k; ++i) {
        if (spec.service[i].kind() != ServiceKind::Pareto) continue;
        double a = spec.service[i].param1();
        if (a <= ref.alpha * (1.0 + 1e-12))
            ref.c_tilde[i] = std::pow(spec.service[i].param2() / ref.scale, a);
    }
    return ref;
}

} // namespace sdq
