#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "otdual/convex_family.hpp"
#include "otdual/extended_real.hpp"
#include "otdual/lp.hpp"
#include "otdual/model.hpp"

namespace otdual {

/// Problem data is inconsistent with the requested operation.
class UnsupportedProblem : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The fixed marginals cannot be matched by any coupling on the allowed support.
class InfeasibleSupport : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ProblemKind { MongeKantorovich, Capacity, Schrodinger, Superhedge, Strassen, GenericDual };

inline std::string to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::MongeKantorovich: return "mk";
        case ProblemKind::Capacity: return "capacity";
        case ProblemKind::Schrodinger: return "schrodinger";
        case ProblemKind::Superhedge: return "superhedge";
        case ProblemKind::Strassen: return "strassen";
        case ProblemKind::GenericDual: return "generic";
    }
    return "unknown";
}

/// G_t^* = indicator of {mu_t}: the marginal is pinned.
struct FixedMarginal {
    DiscreteMeasure measure;
    friend bool operator==(const FixedMarginal&, const FixedMarginal&) = default;
};

/// G_t = support function of Lambda_t = {m >= 0 : constraints}.
struct PolytopeMarginal {
    std::vector<lp::Constraint> constraints;
    friend bool operator==(const PolytopeMarginal&, const PolytopeMarginal&) = default;
};

using MarginalSpec = std::variant<FixedMarginal, PolytopeMarginal>;

/// Trading strategy z_t(s_0..s_t) in R^n for t < T, stored densely per history.
struct Strategy {
    std::size_t dim = 0;
    std::vector<std::vector<double>> z;  // z[t][history * dim + k]

    static Strategy zeros(const GridShape& shape, std::size_t dim) {
        Strategy s;
        s.dim = dim;
        for (std::size_t t = 0; t + 1 < shape.num_axes(); ++t) s.z.emplace_back(shape.prefix_count(t) * dim, 0.0);
        return s;
    }

    friend bool operator==(const Strategy&, const Strategy&) = default;
};

struct ProblemInstance {
    ProductGrid grid;
    ProblemKind kind = ProblemKind::MongeKantorovich;
    std::vector<MarginalSpec> marginals;

    // Kernel data, one entry per grid cell; empty when unused by the kind.
    std::vector<double> cost;
    std::vector<double> capacity;
    std::vector<double> reference;
    std::vector<double> payoff;

    std::optional<DiscreteMeasure> base;                 // explicit mu; default depends on kind
    std::vector<lp::Constraint> coupling_constraints;    // Lambda for Strassen
    FamilyTag family = FamilyTag::IndicatorHalfline;     // h for GenericDual

    double tol = 1e-10;          // IPF L1 marginal tolerance
    std::size_t max_iter = 10000;  // IPF cycles

    [[nodiscard]] const GridShape& shape() const { return grid.shape(); }
    [[nodiscard]] std::size_t num_axes() const { return grid.num_axes(); }

    [[nodiscard]] bool is_fixed(std::size_t t) const { return std::holds_alternative<FixedMarginal>(marginals.at(t)); }

    [[nodiscard]] bool all_fixed() const {
        for (std::size_t t = 0; t < marginals.size(); ++t) {
            if (!is_fixed(t)) return false;
        }
        return true;
    }

    [[nodiscard]] const DiscreteMeasure& fixed_marginal(std::size_t t) const {
        const auto* f = std::get_if<FixedMarginal>(&marginals.at(t));
        if (!f) throw UnsupportedProblem("axis " + std::to_string(t) + " does not have a fixed marginal");
        return f->measure;
    }

    [[nodiscard]] const PolytopeMarginal& polytope_marginal(std::size_t t) const {
        const auto* p = std::get_if<PolytopeMarginal>(&marginals.at(t));
        if (!p) throw UnsupportedProblem("axis " + std::to_string(t) + " does not have a polytope marginal");
        return *p;
    }

    [[nodiscard]] std::vector<DiscreteMeasure> fixed_marginals() const {
        std::vector<DiscreteMeasure> out;
        for (std::size_t t = 0; t < num_axes(); ++t) out.push_back(fixed_marginal(t));
        return out;
    }

    /// The integrand family h that this kind uses; GenericDual reads `family`.
    [[nodiscard]] FamilyTag coupling_tag() const {
        switch (kind) {
            case ProblemKind::MongeKantorovich: return FamilyTag::IndicatorHalfline;
            case ProblemKind::Capacity: return FamilyTag::CapacityHinge;
            case ProblemKind::Schrodinger: return FamilyTag::ScaledExp;
            case ProblemKind::GenericDual: return family;
            case ProblemKind::Superhedge:
            case ProblemKind::Strassen: break;
        }
        throw UnsupportedProblem(to_string(kind) + " has no pointwise coupling integrand");
    }

    [[nodiscard]] ConvexFamily coupling_family() const {
        switch (coupling_tag()) {
            case FamilyTag::IndicatorHalfline: return ConvexFamily::indicator_halfline(cost);
            case FamilyTag::CapacityHinge: return ConvexFamily::capacity_hinge(cost, capacity);
            case FamilyTag::ScaledExp: return ConvexFamily::scaled_exp({1.0});
            default: break;
        }
        throw UnsupportedProblem("unsupported coupling family " + to_string(coupling_tag()));
    }

    /// Reference measure R scaled to total mass 1.
    [[nodiscard]] std::vector<double> normalized_reference() const {
        double total = 0.0;
        for (double r : reference) total += r;
        if (!(total > 0.0)) throw std::invalid_argument("reference measure must have positive mass");
        std::vector<double> out(reference);
        for (double& r : out) r /= total;
        return out;
    }

    /**
     * Base measure mu of the integral functional H.
     *
     * Explicit `base` wins. Schrodinger uses the normalized reference R,
     * zeroed on cells whose projection hits a point of zero marginal mass.
     * Other kinds with fixed marginals use the product of the marginals;
     * with polytope marginals mu is uniform (only its support matters for
     * the indicator family).
     */
    [[nodiscard]] std::vector<double> base_measure() const {
        if (base) return base->mass();
        const GridShape& sh = shape();
        if (coupling_tag() == FamilyTag::ScaledExp) {
            std::vector<double> r = normalized_reference();
            for (std::size_t f = 0; f < sh.size(); ++f) {
                for (std::size_t t = 0; t < num_axes(); ++t) {
                    if (fixed_marginal(t)[sh.coordinate(f, t)] == 0.0) {
                        r[f] = 0.0;
                        break;
                    }
                }
            }
            return r;
        }
        if (all_fixed()) {
            const auto ms = fixed_marginals();
            return product_mass(sh, ms);
        }
        return std::vector<double>(sh.size(), 1.0 / static_cast<double>(sh.size()));
    }

    void validate() const {
        const std::size_t cells = grid.size();
        if (cells == 0) throw std::invalid_argument("instance: empty grid");
        if (marginals.size() != num_axes()) throw std::invalid_argument("instance: one marginal per axis required");
        for (std::size_t t = 0; t < num_axes(); ++t) {
            const std::size_t n = grid.axis(t).size();
            if (const auto* f = std::get_if<FixedMarginal>(&marginals[t])) {
                if (f->measure.size() != n) {
                    throw std::invalid_argument("instance: marginal " + std::to_string(t) + " has the wrong length");
                }
                if (!f->measure.is_probability()) {
                    throw std::invalid_argument("instance: marginal " + std::to_string(t) + " is not a probability");
                }
            } else {
                for (const auto& c : std::get<PolytopeMarginal>(marginals[t]).constraints) {
                    if (c.coeffs.size() != n) {
                        throw std::invalid_argument("instance: polytope constraint on axis " + std::to_string(t) +
                                                    " has the wrong length");
                    }
                }
            }
        }
        auto need = [&](const std::vector<double>& v, const char* name) {
            if (v.size() != cells) {
                throw std::invalid_argument(std::string("instance: ") + name + " must have one entry per cell");
            }
            for (double x : v) {
                if (!std::isfinite(x)) throw std::invalid_argument(std::string("instance: ") + name + " must be finite");
            }
        };
        auto need_fixed = [&] {
            if (!all_fixed()) throw UnsupportedProblem("instance: " + to_string(kind) + " requires fixed marginals");
        };
        if (base) {
            if (base->size() != cells) throw std::invalid_argument("instance: base measure has the wrong length");
            if (kind == ProblemKind::Schrodinger || (kind == ProblemKind::GenericDual && family == FamilyTag::ScaledExp)) {
                throw std::invalid_argument("instance: the entropic problem takes its base measure from the reference");
            }
        }
        FamilyTag tag = family;
        switch (kind) {
            case ProblemKind::MongeKantorovich: tag = FamilyTag::IndicatorHalfline; need_fixed(); break;
            case ProblemKind::Capacity: tag = FamilyTag::CapacityHinge; need_fixed(); break;
            case ProblemKind::Schrodinger: tag = FamilyTag::ScaledExp; need_fixed(); break;
            case ProblemKind::GenericDual: break;
            case ProblemKind::Superhedge: {
                need_fixed();
                need(payoff, "payoff");
                const std::size_t dim = grid.axis(0).coord_dim();
                for (std::size_t t = 0; t < num_axes(); ++t) {
                    if (!grid.axis(t).has_coords() || grid.axis(t).coord_dim() != dim) {
                        throw std::invalid_argument("instance: superhedge needs coords of one dimension on every axis");
                    }
                }
                return;
            }
            case ProblemKind::Strassen:
                for (const auto& c : coupling_constraints) {
                    if (c.coeffs.size() != cells) {
                        throw std::invalid_argument("instance: coupling constraint has the wrong length");
                    }
                }
                return;
        }
        switch (tag) {
            case FamilyTag::IndicatorHalfline: need(cost, "cost"); break;
            case FamilyTag::CapacityHinge:
                need(cost, "cost");
                need(capacity, "capacity");
                for (double p : capacity) {
                    if (!(p > 0.0)) throw std::invalid_argument("instance: capacity must be > 0");
                }
                break;
            case FamilyTag::ScaledExp:
                need(reference, "reference");
                for (double r : reference) {
                    if (r < 0.0) throw std::invalid_argument("instance: reference must be nonnegative");
                }
                need_fixed();
                break;
            default: throw UnsupportedProblem("instance: unsupported coupling family " + to_string(tag));
        }
        if (tag != FamilyTag::IndicatorHalfline) need_fixed();
    }

    friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;
};

// ---------------------------------------------------------------------------
// Construction helpers

inline std::vector<MarginalSpec> fixed_specs(std::vector<DiscreteMeasure> ms) {
    std::vector<MarginalSpec> out;
    for (auto& m : ms) out.emplace_back(FixedMarginal{std::move(m)});
    return out;
}

inline ProblemInstance make_mk(ProductGrid grid, std::vector<DiscreteMeasure> marginals, std::vector<double> cost) {
    ProblemInstance p;
    p.grid = std::move(grid);
    p.kind = ProblemKind::MongeKantorovich;
    p.marginals = fixed_specs(std::move(marginals));
    p.cost = std::move(cost);
    p.validate();
    return p;
}

inline ProblemInstance make_capacity(ProductGrid grid, std::vector<DiscreteMeasure> marginals,
                                     std::vector<double> cost, std::vector<double> capacity) {
    ProblemInstance p;
    p.grid = std::move(grid);
    p.kind = ProblemKind::Capacity;
    p.marginals = fixed_specs(std::move(marginals));
    p.cost = std::move(cost);
    p.capacity = std::move(capacity);
    p.validate();
    return p;
}

inline ProblemInstance make_schrodinger(ProductGrid grid, std::vector<DiscreteMeasure> marginals,
                                        std::vector<double> reference) {
    ProblemInstance p;
    p.grid = std::move(grid);
    p.kind = ProblemKind::Schrodinger;
    p.marginals = fixed_specs(std::move(marginals));
    p.reference = std::move(reference);
    p.validate();
    return p;
}

inline ProblemInstance make_superhedge(ProductGrid grid, std::vector<DiscreteMeasure> marginals,
                                       std::vector<double> payoff) {
    ProblemInstance p;
    p.grid = std::move(grid);
    p.kind = ProblemKind::Superhedge;
    p.marginals = fixed_specs(std::move(marginals));
    p.payoff = std::move(payoff);
    p.validate();
    return p;
}

// ---------------------------------------------------------------------------
// Objectives

/// sup { x.m : m >= 0, constraints } by LP; +inf when unbounded, -inf when empty.
inline ExtReal support_function(const std::vector<lp::Constraint>& constraints, std::span<const double> x) {
    lp::Instance p;
    p.objective.assign(x.begin(), x.end());
    for (double& c : p.objective) c = -c;
    p.rows = constraints;
    const lp::Solution s = lp::solve_lp(p);
    if (s.status == lp::Status::Infeasible) return ExtReal::neg_infinity();
    if (s.status == lp::Status::Unbounded) return ExtReal::infinity();
    return -s.objective;
}

/// Largest violation of m >= 0 and the constraints.
inline double constraint_violation(const std::vector<lp::Constraint>& constraints, std::span<const double> m) {
    double worst = 0.0;
    for (double v : m) worst = std::max(worst, -v);
    for (const auto& c : constraints) {
        double ax = 0.0;
        for (std::size_t j = 0; j < m.size(); ++j) ax += c.coeffs[j] * m[j];
        const double r = c.rhs - ax;
        switch (c.sense) {
            case lp::Sense::LessEqual: worst = std::max(worst, -r); break;
            case lp::Sense::GreaterEqual: worst = std::max(worst, r); break;
            case lp::Sense::Equal: worst = std::max(worst, std::abs(r)); break;
        }
    }
    return worst;
}

/// sum_{t<T} z_t(s^t) . (s_{t+1} - s_t) at a cell.
inline double hedge_gains(const ProblemInstance& inst, const Strategy& z, std::size_t flat) {
    const GridShape& sh = inst.shape();
    double g = 0.0;
    for (std::size_t t = 0; t + 1 < sh.num_axes(); ++t) {
        const auto& now = inst.grid.axis(t).coords[sh.coordinate(flat, t)];
        const auto& next = inst.grid.axis(t + 1).coords[sh.coordinate(flat, t + 1)];
        const std::size_t h = sh.prefix(flat, t);
        for (std::size_t k = 0; k < z.dim; ++k) g += z.z[t][h * z.dim + k] * (next[k] - now[k]);
    }
    return g;
}

/// |sum over continuations of lambda(s) (s_{t+1} - s_t)| per (t, history, component).
inline std::vector<double> martingale_residuals(const ProblemInstance& inst, std::span<const double> lambda) {
    const GridShape& sh = inst.shape();
    const std::size_t dim = inst.grid.axis(0).coord_dim();
    std::vector<double> out;
    for (std::size_t t = 0; t + 1 < sh.num_axes(); ++t) {
        std::vector<double> acc(sh.prefix_count(t) * dim, 0.0);
        for (std::size_t f = 0; f < sh.size(); ++f) {
            if (lambda[f] == 0.0) continue;
            const auto& now = inst.grid.axis(t).coords[sh.coordinate(f, t)];
            const auto& next = inst.grid.axis(t + 1).coords[sh.coordinate(f, t + 1)];
            const std::size_t h = sh.prefix(f, t);
            for (std::size_t k = 0; k < dim; ++k) acc[h * dim + k] += lambda[f] * (next[k] - now[k]);
        }
        for (double v : acc) out.push_back(std::abs(v));
    }
    return out;
}

inline std::vector<double> cell_sums(const ProblemInstance& inst, const Potentials& x) {
    const GridShape& sh = inst.shape();
    std::vector<double> out(sh.size());
    for (std::size_t f = 0; f < sh.size(); ++f) out[f] = x.sum_at(sh, f);
    return out;
}

namespace detail {
inline ExtReal marginal_primal(const ProblemInstance& inst, const Potentials& x) {
    ExtReal total = 0.0;
    for (std::size_t t = 0; t < inst.num_axes(); ++t) {
        if (inst.is_fixed(t)) {
            const auto& mu = inst.fixed_marginal(t);
            double acc = 0.0;
            for (std::size_t i = 0; i < mu.size(); ++i) {
                if (mu[i] != 0.0) acc += x[t][i] * mu[i];
            }
            total += acc;
        } else {
            total += support_function(inst.polytope_marginal(t).constraints, x[t]);
        }
    }
    return total;
}

inline ExtReal marginal_dual(const ProblemInstance& inst, const Coupling& lambda, double tol) {
    for (std::size_t t = 0; t < inst.num_axes(); ++t) {
        const DiscreteMeasure lt = marginal(lambda, t);
        if (inst.is_fixed(t)) {
            const auto& mu = inst.fixed_marginal(t);
            double l1 = 0.0;
            for (std::size_t i = 0; i < mu.size(); ++i) l1 += std::abs(lt[i] - mu[i]);
            if (l1 > tol) return ExtReal::infinity();
        } else if (constraint_violation(inst.polytope_marginal(t).constraints, lt.mass()) > tol) {
            return ExtReal::infinity();
        }
    }
    return 0.0;
}
}  // namespace detail

/**
 * Relaxed primal objective: sum_t G_t(x_t) + H(-sum_t x_t).
 *
 * For the pointwise kinds H(u) = sum_s mu(s) h(u(s), s) with mu from
 * base_measure(). Superhedge is sum_t x_t.mu_t when (x, z) superhedges the
 * payoff (within `tol`) and +inf otherwise. Strassen uses support
 * functions: sum_t sigma_{Lambda_t}(x_t) + sigma_Lambda(-sum_t x_t).
 */
inline ExtReal primal_objective(const ProblemInstance& inst, const Potentials& x, const Strategy* z = nullptr,
                                double tol = 0.0) {
    x.validate(inst.shape());
    const std::vector<double> sums = cell_sums(inst, x);
    switch (inst.kind) {
        case ProblemKind::Superhedge: {
            if (!z) throw std::invalid_argument("primal_objective: superhedge needs a strategy");
            for (std::size_t f = 0; f < sums.size(); ++f) {
                if (sums[f] + hedge_gains(inst, *z, f) < inst.payoff[f] - tol) return ExtReal::infinity();
            }
            return detail::marginal_primal(inst, x);
        }
        case ProblemKind::Strassen: {
            std::vector<double> neg(sums);
            for (double& v : neg) v = -v;
            return detail::marginal_primal(inst, x) + support_function(inst.coupling_constraints, neg);
        }
        default: break;
    }
    std::vector<double> u(sums);
    for (double& v : u) v = -v;
    const std::vector<double> mu = inst.base_measure();
    return detail::marginal_primal(inst, x) + eval_integral(inst.coupling_family(), mu, u, tol);
}

/**
 * Dual objective: sum_t G_t^*(lambda_t) + H^*(lambda).
 *
 * Marginal pins and martingale/polytope memberships are tested with `tol`
 * (L1 for fixed marginals, max violation otherwise).
 */
inline ExtReal dual_objective(const ProblemInstance& inst, const Coupling& lambda, double tol = 1e-9) {
    if (lambda.shape() != inst.shape()) throw std::invalid_argument("dual_objective: coupling shape mismatch");
    const ExtReal g = detail::marginal_dual(inst, lambda, tol);
    if (g.is_pos_inf()) return g;
    switch (inst.kind) {
        case ProblemKind::Superhedge: {
            for (double r : martingale_residuals(inst, lambda.mass())) {
                if (r > tol) return ExtReal::infinity();
            }
            double acc = 0.0;
            for (std::size_t f = 0; f < lambda.mass().size(); ++f) acc -= inst.payoff[f] * lambda[f];
            return acc;
        }
        case ProblemKind::Strassen:
            return constraint_violation(inst.coupling_constraints, lambda.mass()) > tol ? ExtReal::infinity()
                                                                                      : ExtReal(0.0);
        default: break;
    }
    const std::vector<double> mu = inst.base_measure();
    return eval_integral_conjugate(inst.coupling_family(), mu, lambda.mass(), tol);
}

/**
 * Schrodinger dual objective sum_t x_t.mu_t + ln sum_s R(s) exp(-sum_t x_t(s_t))
 * with R normalized. Points of zero marginal mass are excluded from the
 * log-sum-exp (the limit x_t -> +inf there).
 */
inline double eval_schrodinger_dual(const Potentials& x, const ProblemInstance& inst) {
    x.validate(inst.shape());
    const std::vector<double> r = inst.base_measure();
    const std::vector<double> sums = cell_sums(inst, x);
    std::vector<double> u(sums);
    for (double& v : u) v = -v;
    return (detail::marginal_primal(inst, x) + eval_integral(ConvexFamily::log_sum_exp(), r, u)).value();
}

/// Relative entropy sum_s lambda(s) ln(lambda(s)/R(s)) against the normalized reference.
inline ExtReal relative_entropy(const ProblemInstance& inst, std::span<const double> lambda) {
    const std::vector<double> r = inst.normalized_reference();
    ExtReal acc = 0.0;
    for (std::size_t f = 0; f < r.size(); ++f) {
        if (lambda[f] == 0.0) continue;
        if (r[f] == 0.0) return ExtReal::infinity();
        acc += lambda[f] * (std::log(lambda[f]) - std::log(r[f]));
    }
    return acc;
}

}  // namespace otdual
