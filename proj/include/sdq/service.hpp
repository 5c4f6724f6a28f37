#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sdq/quadrature.hpp"
#include "sdq/rng.hpp"

namespace sdq {

enum class ServiceKind { Exponential, Deterministic, Erlang, Pareto, Lognormal, Weibull };

inline const char* to_string(ServiceKind k) {
    switch (k) {
        case ServiceKind::Exponential: return "exponential";
        case ServiceKind::Deterministic: return "deterministic";
        case ServiceKind::Erlang: return "erlang";
        case ServiceKind::Pareto: return "pareto";
        case ServiceKind::Lognormal: return "lognormal";
        case ServiceKind::Weibull: return "weibull";
    }
    return "?";
}

// One service-time law. Parameter meaning depends on kind:
//   Exponential(rate), Deterministic(mean), Erlang(shape, rate),
//   Pareto(shape, scale), Lognormal(location, scale), Weibull(shape, scale).
class ServiceDistribution {
public:
    ServiceDistribution() : kind_(ServiceKind::Exponential), p1_(1.0), p2_(0.0) {}

    static ServiceDistribution exponential(double rate) {
        return ServiceDistribution(ServiceKind::Exponential, rate, 0.0);
    }
    static ServiceDistribution deterministic(double mean) {
        return ServiceDistribution(ServiceKind::Deterministic, mean, 0.0);
    }
    static ServiceDistribution erlang(long long shape, double rate) {
        return ServiceDistribution(ServiceKind::Erlang, static_cast<double>(shape), rate);
    }
    static ServiceDistribution pareto(double shape, double scale) {
        return ServiceDistribution(ServiceKind::Pareto, shape, scale);
    }
    static ServiceDistribution lognormal(double location, double scale) {
        return ServiceDistribution(ServiceKind::Lognormal, location, scale);
    }
    static ServiceDistribution weibull(double shape, double scale) {
        return ServiceDistribution(ServiceKind::Weibull, shape, scale);
    }

    ServiceKind kind() const { return kind_; }
    double param1() const { return p1_; }
    double param2() const { return p2_; }

    // Parameter-domain violation message, empty when well-formed. An
    // infinite-mean Pareto (shape <= 1) is rejected here: every busy-period
    // quantity downstream needs finite service means.
    std::string invalid_reason() const {
        switch (kind_) {
            case ServiceKind::Exponential:
                if (!(p1_ > 0.0) || !std::isfinite(p1_)) return "exponential rate must be > 0";
                break;
            case ServiceKind::Deterministic:
                if (!(p1_ > 0.0) || !std::isfinite(p1_)) return "deterministic mean must be > 0";
                break;
            case ServiceKind::Erlang:
                if (!(p1_ >= 1.0) || p1_ != std::floor(p1_)) return "erlang shape must be an integer >= 1";
                if (!(p2_ > 0.0) || !std::isfinite(p2_)) return "erlang rate must be > 0";
                break;
            case ServiceKind::Pareto:
                if (!(p1_ > 0.0) || !std::isfinite(p1_)) return "pareto shape must be > 0";
                if (!(p2_ > 0.0) || !std::isfinite(p2_)) return "pareto scale must be > 0";
                if (p1_ <= 1.0) return "infinite mean service time (pareto shape <= 1)";
                break;
            case ServiceKind::Lognormal:
                if (!std::isfinite(p1_)) return "lognormal location must be finite";
                if (!(p2_ > 0.0) || !std::isfinite(p2_)) return "lognormal scale must be > 0";
                break;
            case ServiceKind::Weibull:
                if (!(p1_ > 0.0) || !std::isfinite(p1_)) return "weibull shape must be > 0";
                if (!(p2_ > 0.0) || !std::isfinite(p2_)) return "weibull scale must be > 0";
                break;
        }
        return {};
    }

    double mean() const {
        switch (kind_) {
            case ServiceKind::Exponential: return 1.0 / p1_;
            case ServiceKind::Deterministic: return p1_;
            case ServiceKind::Erlang: return p1_ / p2_;
            case ServiceKind::Pareto:
                if (p1_ <= 1.0) return std::numeric_limits<double>::infinity();
                return p1_ * p2_ / (p1_ - 1.0);
            case ServiceKind::Lognormal: return std::exp(p1_ + 0.5 * p2_ * p2_);
            case ServiceKind::Weibull: return p2_ * std::tgamma(1.0 + 1.0 / p1_);
        }
        return 0.0;
    }

    // Service completion rate mu = 1/mean.
    double rate() const { return 1.0 / mean(); }

    // P(S > t)
    double survival(double t) const {
        if (t <= 0.0) return 1.0;
        switch (kind_) {
            case ServiceKind::Exponential: return std::exp(-p1_ * t);
            case ServiceKind::Deterministic: return t < p1_ ? 1.0 : 0.0;
            case ServiceKind::Erlang: {
                // sum_{n<k} (vt)^n e^{-vt} / n!
                double x = p2_ * t;
                double term = std::exp(-x);
                double s = term;
                long long k = static_cast<long long>(p1_);
                for (long long n = 1; n < k; ++n) {
                    term *= x / static_cast<double>(n);
                    s += term;
                }
                return s;
            }
            case ServiceKind::Pareto: return t < p2_ ? 1.0 : std::pow(p2_ / t, p1_);
            case ServiceKind::Lognormal:
                return 0.5 * std::erfc((std::log(t) - p1_) / (p2_ * 1.4142135623730951));
            case ServiceKind::Weibull: return std::exp(-std::pow(t / p2_, p1_));
        }
        return 0.0;
    }

    // Laplace-Stieltjes transform E[e^{-sS}] for s >= 0. Closed form where one
    // exists; otherwise adaptive quadrature of the density against e^{-st} on a
    // substituted axis that keeps the domain compact and the integrand smooth.
    double lst(double s) const {
        if (s < 0.0) throw std::domain_error("lst: argument must be >= 0");
        if (s == 0.0) return 1.0;
        switch (kind_) {
            case ServiceKind::Exponential: return p1_ / (p1_ + s);
            case ServiceKind::Deterministic: return std::exp(-s * p1_);
            case ServiceKind::Erlang: return std::pow(p2_ / (p2_ + s), p1_);
            default: break;
        }
        return lst_by_quadrature(s);
    }

    double sample(Rng& rng) const {
        switch (kind_) {
            case ServiceKind::Exponential: return rng.exponential(p1_);
            case ServiceKind::Deterministic: return p1_;
            case ServiceKind::Erlang: return rng.erlang(static_cast<long long>(p1_), p2_);
            case ServiceKind::Pareto: return p2_ * std::pow(1.0 - rng.u01(), -1.0 / p1_);
            case ServiceKind::Lognormal: return std::exp(p1_ + p2_ * rng.normal());
            case ServiceKind::Weibull: return p2_ * std::pow(-std::log1p(-rng.u01()), 1.0 / p1_);
        }
        return 0.0;
    }

private:
    ServiceDistribution(ServiceKind k, double p1, double p2) : kind_(k), p1_(p1), p2_(p2) {}

    double lst_by_quadrature(double s) const {
        const double tol = 1e-11;
        double v = 1.0;
        switch (kind_) {
            case ServiceKind::Pareto: {
                // t = x_m e^y: integral of alpha e^{-alpha y} e^{-s x_m e^y} over y >= 0;
                // the e^{-alpha y} factor caps the domain at 45/alpha
                const double alpha = p1_, xm = p2_;
                auto f = [&](double y) {
                    double grow = std::exp(y);
                    return alpha * std::exp(-alpha * y - s * xm * grow);
                };
                v = integrate(f, 0.0, 45.0 / alpha, tol);
                break;
            }
            case ServiceKind::Lognormal: {
                // t = e^{mu + sigma z} against the standard normal density
                const double mu = p1_, sigma = p2_;
                auto f = [&](double z) {
                    return 0.3989422804014326779 *
                           std::exp(-0.5 * z * z - s * std::exp(mu + sigma * z));
                };
                v = integrate(f, -9.0, 9.0, tol);
                break;
            }
            case ServiceKind::Weibull: {
                // u = (t/scale)^shape: integral of e^{-u - s scale u^{1/shape}} du
                const double inv_shape = 1.0 / p1_, scale = p2_;
                auto f = [&](double u) {
                    return std::exp(-u - s * scale * std::pow(u, inv_shape));
                };
                v = integrate(f, 0.0, 45.0, tol);
                break;
            }
            default:
                break;
        }
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        return v;
    }

    ServiceKind kind_;
    double p1_, p2_;
};

} // namespace sdq
