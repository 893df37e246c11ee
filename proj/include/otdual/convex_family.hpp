#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "otdual/extended_real.hpp"
#include "otdual/model.hpp"

namespace otdual {

/**
 * The closed enumeration of scalar convex integrands h(u, s) used by the
 * transport problems:
 *
 *   Linear            h(u) = a u
 *   IndicatorHalfline h(u) = 0 if u <= c, +inf otherwise     (mass transport)
 *   CapacityHinge     h(u) = phi (u - c)^+                   (capacity constraints)
 *   ScaledExp         h(u) = (e^u - 1) / phi                 (entropic / Schrodinger)
 *   LogSumExp         H(u) = ln sum_s mu(s) e^{u(s)}         (not pointwise; whole-vector only)
 *
 * Parameter vectors of length 1 broadcast to every point.
 */
enum class FamilyTag { Linear, IndicatorHalfline, CapacityHinge, ScaledExp, LogSumExp };

inline std::string to_string(FamilyTag tag) {
    switch (tag) {
        case FamilyTag::Linear: return "linear";
        case FamilyTag::IndicatorHalfline: return "indicator_halfline";
        case FamilyTag::CapacityHinge: return "capacity_hinge";
        case FamilyTag::ScaledExp: return "scaled_exp";
        case FamilyTag::LogSumExp: return "log_sum_exp";
    }
    return "unknown";
}

/// Closed interval [lo, hi] with possibly infinite ends; may be empty.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty = false;

    static Interval point(double v) { return {v, v, false}; }
    static Interval none() { return {kInf, -kInf, true}; }
    static Interval real_line() { return {-kInf, kInf, false}; }

    [[nodiscard]] bool contains(double v, double tol = 1e-9) const {
        return !empty && v >= lo - tol && v <= hi + tol;
    }
    [[nodiscard]] double distance(double v) const {
        if (empty) return kInf;
        if (v < lo) return lo - v;
        if (v > hi) return v - hi;
        return 0.0;
    }
    [[nodiscard]] double project(double v) const {
        if (empty) throw std::domain_error("Interval::project: empty interval");
        return std::clamp(v, lo, hi);
    }
};

enum class Direction { Negative = -1, Positive = 1 };

class ConvexFamily {
public:
    static ConvexFamily linear(std::vector<double> slope) {
        return ConvexFamily(FamilyTag::Linear, std::move(slope), {});
    }
    static ConvexFamily indicator_halfline(std::vector<double> bound) {
        return ConvexFamily(FamilyTag::IndicatorHalfline, std::move(bound), {});
    }
    static ConvexFamily capacity_hinge(std::vector<double> bound, std::vector<double> phi) {
        return ConvexFamily(FamilyTag::CapacityHinge, std::move(bound), std::move(phi));
    }
    static ConvexFamily scaled_exp(std::vector<double> phi) {
        return ConvexFamily(FamilyTag::ScaledExp, {}, std::move(phi));
    }
    static ConvexFamily log_sum_exp() { return ConvexFamily(FamilyTag::LogSumExp, {}, {}); }

    [[nodiscard]] FamilyTag tag() const { return tag_; }

    /// Slope a (Linear) or bound c (IndicatorHalfline, CapacityHinge) at point s.
    [[nodiscard]] double level(std::size_t s) const { return pick(level_, s, "level"); }
    /// Capacity density phi (CapacityHinge) or weight phi (ScaledExp) at point s.
    [[nodiscard]] double phi(std::size_t s) const { return pick(phi_, s, "phi"); }

    /// Number of points the parameters were given for (1 when broadcasting).
    [[nodiscard]] std::size_t size() const { return std::max(level_.size(), phi_.size()); }

private:
    ConvexFamily(FamilyTag tag, std::vector<double> level, std::vector<double> phi)
        : tag_(tag), level_(std::move(level)), phi_(std::move(phi)) {
        for (double v : level_) {
            if (!std::isfinite(v)) throw std::invalid_argument("ConvexFamily: parameters must be finite");
        }
        for (double v : phi_) {
            if (!std::isfinite(v) || v <= 0.0) throw std::invalid_argument("ConvexFamily: phi must be finite and > 0");
        }
        const bool needs_level = tag_ == FamilyTag::Linear || tag_ == FamilyTag::IndicatorHalfline ||
                                 tag_ == FamilyTag::CapacityHinge;
        const bool needs_phi = tag_ == FamilyTag::CapacityHinge || tag_ == FamilyTag::ScaledExp;
        if (needs_level && level_.empty()) throw std::invalid_argument("ConvexFamily: missing level parameters");
        if (needs_phi && phi_.empty()) throw std::invalid_argument("ConvexFamily: missing phi parameters");
        if (needs_level && needs_phi && level_.size() != phi_.size() && level_.size() != 1 && phi_.size() != 1) {
            throw std::invalid_argument("ConvexFamily: parameter vectors have mismatched lengths");
        }
    }

    static double pick(const std::vector<double>& v, std::size_t s, const char* what) {
        if (v.empty()) throw std::logic_error(std::string("ConvexFamily: family has no ") + what + " parameter");
        if (v.size() == 1) return v.front();
        return v.at(s);
    }

    FamilyTag tag_;
    std::vector<double> level_;
    std::vector<double> phi_;
};

namespace detail {
inline void require_pointwise(const ConvexFamily& f) {
    if (f.tag() == FamilyTag::LogSumExp) {
        throw std::logic_error("LogSumExp is only defined on whole vectors (use eval_integral)");
    }
}
}  // namespace detail

/// h(u, s).
inline ExtReal eval_family(const ConvexFamily& f, std::size_t s, double u) {
    detail::require_pointwise(f);
    switch (f.tag()) {
        case FamilyTag::Linear: return f.level(s) * u;
        case FamilyTag::IndicatorHalfline: return u <= f.level(s) ? ExtReal(0.0) : ExtReal::infinity();
        case FamilyTag::CapacityHinge: return f.phi(s) * std::max(u - f.level(s), 0.0);
        case FamilyTag::ScaledExp: return std::expm1(u) / f.phi(s);
        case FamilyTag::LogSumExp: break;
    }
    throw std::logic_error("eval_family: unhandled family");
}

/// h*(v, s) = sup_u { u v - h(u, s) }.
inline ExtReal eval_conjugate(const ConvexFamily& f, std::size_t s, double v) {
    detail::require_pointwise(f);
    switch (f.tag()) {
        case FamilyTag::Linear: return v == f.level(s) ? ExtReal(0.0) : ExtReal::infinity();
        case FamilyTag::IndicatorHalfline: return v >= 0.0 ? ExtReal(f.level(s) * v) : ExtReal::infinity();
        case FamilyTag::CapacityHinge:
            return (v >= 0.0 && v <= f.phi(s)) ? ExtReal(f.level(s) * v) : ExtReal::infinity();
        case FamilyTag::ScaledExp: {
            const double phi = f.phi(s);
            if (v < 0.0 || std::isinf(v)) return ExtReal::infinity();
            // The v -> 0+ limit; sup_u (1 - e^u)/phi = 1/phi.
            if (v == 0.0) return 1.0 / phi;
            return v * std::log(phi * v) - v + 1.0 / phi;
        }
        case FamilyTag::LogSumExp: break;
    }
    throw std::logic_error("eval_conjugate: unhandled family");
}

/// cl dom h(., s).
inline Interval domain(const ConvexFamily& f, std::size_t s) {
    detail::require_pointwise(f);
    if (f.tag() == FamilyTag::IndicatorHalfline) return {-kInf, f.level(s), false};
    return Interval::real_line();
}

/// cl dom h*(., s).
inline Interval conjugate_domain(const ConvexFamily& f, std::size_t s) {
    detail::require_pointwise(f);
    switch (f.tag()) {
        case FamilyTag::Linear: return Interval::point(f.level(s));
        case FamilyTag::IndicatorHalfline: return {0.0, kInf, false};
        case FamilyTag::CapacityHinge: return {0.0, f.phi(s), false};
        case FamilyTag::ScaledExp: return {0.0, kInf, false};
        case FamilyTag::LogSumExp: break;
    }
    throw std::logic_error("conjugate_domain: unhandled family");
}

/// dh(u, s) as a closed interval (empty outside dom h).
inline Interval subdifferential(const ConvexFamily& f, std::size_t s, double u) {
    detail::require_pointwise(f);
    switch (f.tag()) {
        case FamilyTag::Linear: return Interval::point(f.level(s));
        case FamilyTag::IndicatorHalfline: {
            const double c = f.level(s);
            if (u < c) return Interval::point(0.0);
            if (u == c) return {0.0, kInf, false};
            return Interval::none();
        }
        case FamilyTag::CapacityHinge: {
            const double c = f.level(s);
            if (u < c) return Interval::point(0.0);
            if (u == c) return {0.0, f.phi(s), false};
            return Interval::point(f.phi(s));
        }
        case FamilyTag::ScaledExp: return Interval::point(std::exp(u) / f.phi(s));
        case FamilyTag::LogSumExp: break;
    }
    throw std::logic_error("subdifferential: unhandled family");
}

/// h^inf(d, s) = sup_{alpha>0} (h(u + alpha d) - h(u)) / alpha.
inline ExtReal recession(const ConvexFamily& f, std::size_t s, Direction d) {
    detail::require_pointwise(f);
    const bool up = d == Direction::Positive;
    switch (f.tag()) {
        case FamilyTag::Linear: return up ? f.level(s) : -f.level(s);
        case FamilyTag::IndicatorHalfline: return up ? ExtReal::infinity() : ExtReal(0.0);
        case FamilyTag::CapacityHinge: return up ? ExtReal(f.phi(s)) : ExtReal(0.0);
        case FamilyTag::ScaledExp: return up ? ExtReal::infinity() : ExtReal(0.0);
        case FamilyTag::LogSumExp: break;
    }
    throw std::logic_error("recession: unhandled family");
}

/// (h*)^inf(d, s); equals the support function of dom h in direction d.
inline ExtReal conjugate_recession(const ConvexFamily& f, std::size_t s, Direction d) {
    detail::require_pointwise(f);
    const Interval dom = domain(f, s);
    const double v = d == Direction::Positive ? dom.hi : -dom.lo;
    return ExtReal(v);
}

/// Fenchel residual of the pair (u, v): h(u) + h*(v) - u v, evaluated after
/// projecting u onto dom h and v onto dom h*. `violation` is the larger of
/// the two projection distances.
struct FenchelResidual {
    double gap = 0.0;
    double violation = 0.0;
};

inline FenchelResidual fenchel_residual(const ConvexFamily& f, std::size_t s, double u, double v) {
    const Interval du = domain(f, s);
    const Interval dv = conjugate_domain(f, s);
    const double up = du.project(u);
    const double vp = dv.project(v);
    FenchelResidual r;
    r.violation = std::max(std::abs(u - up), std::abs(v - vp));
    r.gap = (eval_family(f, s, up) + eval_conjugate(f, s, vp)).value() - up * vp;
    return r;
}

/**
 * H*(lambda) for H(u) = sum_s mu(s) h(u(s), s):
 *
 *   sum_{mu(s)>0} mu(s) h*(lambda(s)/mu(s), s) + sum_{mu(s)=0} (h*)^inf(sign lambda(s), s) |lambda(s)|.
 *
 * Cells with mu(s) = 0 carry the singular part of lambda. With `tol` > 0,
 * densities within `tol` of dom h* are projected onto it first (absorbs
 * round-off from solvers).
 */
inline ExtReal eval_integral_conjugate(const ConvexFamily& h, std::span<const double> mu,
                                       std::span<const double> lambda, double tol = 0.0) {
    if (mu.size() != lambda.size()) throw std::invalid_argument("eval_integral_conjugate: size mismatch");
    ExtReal total = 0.0;
    for (std::size_t s = 0; s < mu.size(); ++s) {
        if (mu[s] > 0.0 && h.tag() == FamilyTag::ScaledExp && lambda[s] >= 0.0) {
            // mu h*(lambda/mu) expanded so that tiny mu does not overflow the density.
            const double phi = h.phi(s);
            const double l = lambda[s];
            total += (l > 0.0 ? l * (std::log(phi * l) - std::log(mu[s])) - l : 0.0) + mu[s] / phi;
        } else if (mu[s] > 0.0) {
            double rho = lambda[s] / mu[s];
            const Interval dom = conjugate_domain(h, s);
            if (tol > 0.0 && dom.distance(rho) <= tol) rho = dom.project(rho);
            total += eval_conjugate(h, s, rho).weighted(mu[s]);
        } else if (lambda[s] != 0.0) {
            const Direction d = lambda[s] > 0.0 ? Direction::Positive : Direction::Negative;
            total += conjugate_recession(h, s, d).weighted(std::abs(lambda[s]));
        }
    }
    return total;
}

inline ExtReal eval_integral_conjugate(const ConvexFamily& h, const DiscreteMeasure& mu, const Coupling& lambda,
                                       double tol = 0.0) {
    return eval_integral_conjugate(h, mu.mass(), lambda.mass(), tol);
}

/**
 * H(u) = sum_s mu(s) h(u(s), s), or ln sum_s mu(s) e^{u(s)} for LogSumExp.
 * With `tol` > 0, u(s) within `tol` of dom h is projected onto it.
 */
inline ExtReal eval_integral(const ConvexFamily& h, std::span<const double> mu, std::span<const double> u,
                             double tol = 0.0) {
    if (mu.size() != u.size()) throw std::invalid_argument("eval_integral: size mismatch");
    if (h.tag() == FamilyTag::LogSumExp) {
        double peak = -kInf;
        for (std::size_t s = 0; s < mu.size(); ++s) {
            if (mu[s] > 0.0) peak = std::max(peak, u[s]);
        }
        if (peak == -kInf) return ExtReal::neg_infinity();
        if (peak == kInf) return ExtReal::infinity();
        double acc = 0.0;
        for (std::size_t s = 0; s < mu.size(); ++s) {
            if (mu[s] > 0.0) acc += mu[s] * std::exp(u[s] - peak);
        }
        return peak + std::log(acc);
    }
    ExtReal total = 0.0;
    for (std::size_t s = 0; s < mu.size(); ++s) {
        if (mu[s] == 0.0) continue;
        double us = u[s];
        const Interval dom = domain(h, s);
        if (tol > 0.0 && dom.distance(us) <= tol) us = dom.project(us);
        total += eval_family(h, s, us).weighted(mu[s]);
    }
    return total;
}

}  // namespace otdual
