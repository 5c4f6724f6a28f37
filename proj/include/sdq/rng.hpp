#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace sdq {

// Counter-based generator: output n is a hash of (key, n), so streams derived
// from (seed, stream) are independent and a replication is reproducible no
// matter how work is distributed across threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed + 0x9e3779b97f4a7c15ull) ^ mix(stream + 0x6a09e667f3bcc909ull)),
          ctr_(0) {}

    std::uint64_t next_u64() {
        ctr_ += 0x9e3779b97f4a7c15ull;
        return mix(key_ ^ ctr_);
    }

    // uniform in [0, 1)
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // exponential with given rate; rate <= 0 yields +inf (a clock that never fires)
    double exponential(double rate) {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log1p(-u01()) / rate;
    }

    // standard normal, Box-Muller (fixed two-uniform consumption)
    double normal() {
        double u1 = u01();
        double u2 = u01();
        while (u1 <= 0.0) u1 = u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // Poisson count; inversion for small means, Hormann's PTRD rejection otherwise
    long long poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        if (mean < 30.0) return poisson_inversion(mean);
        return poisson_ptrd(mean);
    }

    // Erlang/gamma with integer shape
    double erlang(long long shape, double rate) {
        if (shape <= 16) {
            double s = 0.0;
            for (long long i = 0; i < shape; ++i) s += exponential(rate);
            return s;
        }
        return gamma_marsaglia_tsang(static_cast<double>(shape)) / rate;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    long long poisson_inversion(double mean) {
        const double limit = std::exp(-mean);
        long long k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= u01();
        } while (p > limit);
        return k - 1;
    }

    long long poisson_ptrd(double mean) {
        const double smu = std::sqrt(mean);
        const double b = 0.931 + 2.53 * smu;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            double u = u01() - 0.5;
            double v = u01();
            double us = 0.5 - std::fabs(u);
            double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<long long>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
            double rhs = kf * std::log(mean) - mean - std::lgamma(kf + 1.0);
            if (lhs <= rhs) return static_cast<long long>(kf);
        }
    }

    double gamma_marsaglia_tsang(double shape) {
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            double u = u01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    std::uint64_t key_;
    std::uint64_t ctr_;
};

} // namespace sdq
