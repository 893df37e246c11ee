#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "otdual/convex_family.hpp"
#include "otdual/model.hpp"
#include "otdual/problem.hpp"

namespace otdual {

enum class SlackCase { Below, Boundary, AtCap };

inline std::string to_string(SlackCase c) {
    switch (c) {
        case SlackCase::Below: return "below";
        case SlackCase::Boundary: return "boundary";
        case SlackCase::AtCap: return "at_cap";
    }
    return "unknown";
}

/// Outcome of the multivariate c-monotonicity enumeration. `consistent`
/// means no improving permutation was found; it is never a proof of optimality.
struct CMonotoneVerdict {
    bool consistent = true;
    std::size_t n = 0;                               // tuple size of the violation
    std::vector<MultiIndex> tuple;                   // support cells
    std::vector<MultiIndex> permuted;                // cheaper rearrangement
    double lhs = 0.0;
    double rhs = 0.0;
};

/**
 * Raw residuals of an optimality check. Every vector holds nonnegative
 * numbers; `passes(t)` thresholds all of them at t.
 */
struct ResidualReport {
    double tol = 1e-7;
    std::vector<double> marginal;     // per axis
    std::vector<double> fenchel;      // per cell, mu-weighted Fenchel gap (lambda-weighted slack for superhedge)
    std::vector<double> domain;       // per cell, distance of (u, density) from the domains
    std::vector<double> martingale;   // per (t, history, component)
    std::vector<SlackCase> labels;    // capacity only
    std::vector<double> slackness;    // capacity only
    std::optional<CMonotoneVerdict> c_monotone;
    bool pass = false;

    [[nodiscard]] double max_residual() const {
        double worst = 0.0;
        for (const auto* v : {&marginal, &fenchel, &domain, &martingale, &slackness}) {
            for (double r : *v) worst = std::max(worst, std::isnan(r) ? kInf : r);
        }
        return worst;
    }

    [[nodiscard]] bool passes(double t) const { return max_residual() <= t; }

    /// Cell with the largest Fenchel, domain or slackness residual.
    [[nodiscard]] std::optional<std::size_t> worst_cell() const {
        std::optional<std::size_t> best;
        double worst = 0.0;
        for (const auto* v : {&fenchel, &domain, &slackness}) {
            for (std::size_t s = 0; s < v->size(); ++s) {
                if ((*v)[s] > worst) {
                    worst = (*v)[s];
                    best = s;
                }
            }
        }
        return best;
    }

    void finalize() { pass = passes(tol); }
};

namespace detail {

inline void marginal_residuals(const ProblemInstance& inst, const Potentials& x, const Coupling& lambda,
                               ResidualReport& r) {
    for (std::size_t t = 0; t < inst.num_axes(); ++t) {
        const DiscreteMeasure lt = marginal(lambda, t);
        if (inst.is_fixed(t)) {
            const auto& mu = inst.fixed_marginal(t);
            double l1 = 0.0;
            for (std::size_t i = 0; i < mu.size(); ++i) l1 += std::abs(lt[i] - mu[i]);
            r.marginal.push_back(l1);
        } else {
            const auto& cons = inst.polytope_marginal(t).constraints;
            const ExtReal sigma = support_function(cons, x[t]);
            double pairing = 0.0;
            for (std::size_t i = 0; i < lt.size(); ++i) pairing += x[t][i] * lt[i];
            const double comp = sigma.is_finite() ? std::abs(sigma.value() - pairing) : kInf;
            r.marginal.push_back(constraint_violation(cons, lt.mass()) + comp);
        }
    }
}

/**
 * mu h(u) + mu h*(lambda/mu) - u lambda for h = ScaledExp(phi), written as
 * e^b (e^d - 1 - d) with a = ln(mu e^u / phi), b = ln lambda, d = a - b so
 * that tiny base cells do not overflow the density.
 */
inline double weighted_entropy_gap(double phi, double mu, double u, double lambda) {
    const double a = std::log(mu) + u - std::log(phi);
    if (lambda == 0.0) return std::exp(a);
    const double b = std::log(lambda);
    const double d = a - b;
    return lambda * (std::expm1(d) - d);
}

}  // namespace detail

/**
 * Pointwise optimality of (x, lambda): density lambda/mu in dh(-sum x) on
 * supp mu, singular mass only in normal directions, and lambda_t matched
 * to G_t. Superhedge needs the strategy `z`.
 */
inline ResidualReport verify_pointwise_optimality(const ProblemInstance& inst, const Potentials& x,
                                                  const Coupling& lambda, double tol = 1e-7,
                                                  const Strategy* z = nullptr) {
    x.validate(inst.shape());
    if (lambda.shape() != inst.shape()) throw std::invalid_argument("verify: coupling shape mismatch");
    const GridShape& sh = inst.shape();
    ResidualReport r;
    r.tol = tol;
    detail::marginal_residuals(inst, x, lambda, r);
    const std::vector<double> sums = cell_sums(inst, x);

    if (inst.kind == ProblemKind::Superhedge) {
        if (!z) throw std::invalid_argument("verify: superhedge needs a strategy");
        r.fenchel.resize(sh.size());
        r.domain.resize(sh.size());
        for (std::size_t f = 0; f < sh.size(); ++f) {
            const double slack = sums[f] + hedge_gains(inst, *z, f) - inst.payoff[f];
            r.domain[f] = std::max(0.0, -slack);
            r.fenchel[f] = lambda[f] * std::max(0.0, slack);
        }
        r.martingale = martingale_residuals(inst, lambda.mass());
        r.finalize();
        return r;
    }

    if (inst.kind == ProblemKind::Strassen) {
        std::vector<double> neg(sums);
        for (double& v : neg) v = -v;
        const ExtReal sigma = support_function(inst.coupling_constraints, neg);
        double pairing = 0.0;
        for (std::size_t f = 0; f < sh.size(); ++f) pairing += neg[f] * lambda[f];
        r.fenchel.push_back(sigma.is_finite() ? std::abs(sigma.value() - pairing) : kInf);
        r.domain.push_back(constraint_violation(inst.coupling_constraints, lambda.mass()));
        r.finalize();
        return r;
    }

    const ConvexFamily h = inst.coupling_family();
    const std::vector<double> mu = inst.base_measure();
    r.fenchel.resize(sh.size());
    r.domain.resize(sh.size());
    for (std::size_t f = 0; f < sh.size(); ++f) {
        const double u = -sums[f];
        if (mu[f] > 0.0 && h.tag() == FamilyTag::ScaledExp) {
            r.fenchel[f] = detail::weighted_entropy_gap(h.phi(f), mu[f], u, lambda[f]);
        } else if (mu[f] > 0.0) {
            const FenchelResidual fr = fenchel_residual(h, f, u, lambda[f] / mu[f]);
            r.fenchel[f] = mu[f] * std::max(0.0, fr.gap);
            r.domain[f] = fr.violation;
        } else if (lambda[f] > 0.0) {
            const ExtReal rec = conjugate_recession(h, f, Direction::Positive);
            if (!rec.is_finite()) {
                r.fenchel[f] = kInf;
            } else {
                r.fenchel[f] = lambda[f] * std::max(0.0, rec.value() - u);
                r.domain[f] = std::max(0.0, u - rec.value());
            }
        }
    }
    r.finalize();
    return r;
}

/**
 * Capacity complementary slackness. With u = -sum x and the band
 * |u - c| <= band: density must be 0 below the cost, in [0, phi] on the
 * boundary and phi above it.
 */
inline ResidualReport verify_capacity_slackness(const ProblemInstance& inst, const Potentials& x,
                                                const Coupling& lambda, double tol = 1e-7, double band = 1e-7) {
    if (inst.coupling_tag() != FamilyTag::CapacityHinge) {
        throw UnsupportedProblem("verify_capacity_slackness: not a capacity instance");
    }
    x.validate(inst.shape());
    if (lambda.shape() != inst.shape()) throw std::invalid_argument("verify: coupling shape mismatch");
    const GridShape& sh = inst.shape();
    ResidualReport r;
    r.tol = tol;
    detail::marginal_residuals(inst, x, lambda, r);
    const std::vector<double> mu = inst.base_measure();
    r.labels.resize(sh.size());
    r.slackness.resize(sh.size());
    for (std::size_t f = 0; f < sh.size(); ++f) {
        const double u = -x.sum_at(sh, f);
        const double c = inst.cost[f];
        const double phi = inst.capacity[f];
        Interval mandated;
        if (std::abs(u - c) <= band) {
            r.labels[f] = SlackCase::Boundary;
            mandated = {0.0, phi, false};
        } else if (u < c) {
            r.labels[f] = SlackCase::Below;
            mandated = Interval::point(0.0);
        } else {
            r.labels[f] = SlackCase::AtCap;
            mandated = Interval::point(phi);
        }
        if (mu[f] > 0.0) {
            r.slackness[f] = mandated.distance(lambda[f] / mu[f]);
        } else {
            r.slackness[f] = lambda[f] > 0.0 ? kInf : 0.0;
        }
    }
    r.finalize();
    return r;
}

/**
 * Enumerate n-tuples of support cells (lambda > 1e-12), n = 2..n_max, and
 * every independent permutation of the coordinates on axes 1..T. Reports
 * the first rearrangement that lowers the total cost by more than 1e-9.
 */
inline CMonotoneVerdict check_c_monotone(const Coupling& lambda, std::span<const double> cost, std::size_t n_max = 3) {
    if (n_max > 4) throw std::invalid_argument("check_c_monotone: n_max must be at most 4");
    const GridShape& sh = lambda.shape();
    if (cost.size() != sh.size()) throw std::invalid_argument("check_c_monotone: cost shape mismatch");
    std::vector<std::size_t> support;
    for (std::size_t f = 0; f < sh.size(); ++f) {
        if (lambda[f] > 1e-12) support.push_back(f);
    }
    if (support.size() > 64) {
        throw std::length_error("check_c_monotone: support has " + std::to_string(support.size()) +
                                " cells, limit is 64");
    }
    const std::size_t axes = sh.num_axes();
    CMonotoneVerdict verdict;
    for (std::size_t n = 2; n <= n_max && n <= support.size(); ++n) {
        std::vector<std::size_t> pick(n);
        std::iota(pick.begin(), pick.end(), 0);
        std::vector<std::size_t> base_perm(n);
        std::iota(base_perm.begin(), base_perm.end(), 0);
        while (true) {
            std::vector<MultiIndex> tuple;
            double lhs = 0.0;
            for (std::size_t k : pick) {
                tuple.push_back(sh.multi(support[k]));
                lhs += cost[support[k]];
            }
            // perms[t] permutes axis t; axis 0 stays fixed.
            std::vector<std::vector<std::size_t>> perms(axes, base_perm);
            while (true) {
                double rhs = 0.0;
                std::vector<MultiIndex> moved(n, MultiIndex(axes));
                for (std::size_t k = 0; k < n; ++k) {
                    for (std::size_t t = 0; t < axes; ++t) moved[k][t] = tuple[perms[t][k]][t];
                    rhs += cost[sh.flat(moved[k])];
                }
                if (lhs > rhs + 1e-9) {
                    verdict.consistent = false;
                    verdict.n = n;
                    verdict.tuple = tuple;
                    verdict.permuted = moved;
                    verdict.lhs = lhs;
                    verdict.rhs = rhs;
                    return verdict;
                }
                std::size_t t = 1;
                while (t < axes && !std::next_permutation(perms[t].begin(), perms[t].end())) ++t;
                if (t >= axes) break;
            }
            std::size_t i = n;
            while (i > 0 && pick[i - 1] == support.size() - n + i - 1) --i;
            if (i == 0) break;
            ++pick[i - 1];
            for (std::size_t j = i; j < n; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    return verdict;
}

/**
 * Convex order of consecutive one-dimensional marginals: equal means and
 * E(X_t - k)^+ <= E(X_{t+1} - k)^+ at every support knot k (tolerance 1e-9).
 */
inline bool check_convex_order(const std::vector<MarginalSpace>& axes, const std::vector<DiscreteMeasure>& mus,
                               double tol = 1e-9) {
    if (axes.size() != mus.size()) throw std::invalid_argument("check_convex_order: one measure per axis required");
    for (std::size_t t = 0; t < axes.size(); ++t) {
        if (!axes[t].has_coords() || axes[t].coord_dim() != 1) {
            throw std::invalid_argument("check_convex_order: axis " + std::to_string(t) + " needs 1-d coords");
        }
        if (mus[t].size() != axes[t].size()) throw std::invalid_argument("check_convex_order: size mismatch");
    }
    auto state = [&](std::size_t t, std::size_t i) { return axes[t].coords[i][0]; };
    auto call = [&](std::size_t t, double k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < mus[t].size(); ++i) acc += mus[t][i] * std::max(0.0, state(t, i) - k);
        return acc;
    };
    for (std::size_t t = 0; t + 1 < axes.size(); ++t) {
        double m0 = 0.0, m1 = 0.0;
        for (std::size_t i = 0; i < mus[t].size(); ++i) m0 += mus[t][i] * state(t, i);
        for (std::size_t i = 0; i < mus[t + 1].size(); ++i) m1 += mus[t + 1][i] * state(t + 1, i);
        if (std::abs(m0 - m1) > tol) return false;
        std::vector<double> knots;
        for (std::size_t s : {t, t + 1}) {
            for (std::size_t i = 0; i < mus[s].size(); ++i) {
                if (mus[s][i] > 0.0) knots.push_back(state(s, i));
            }
        }
        for (double k : knots) {
            if (call(t, k) > call(t + 1, k) + tol) return false;
        }
    }
    return true;
}

inline bool check_convex_order(const ProblemInstance& inst, double tol = 1e-9) {
    return check_convex_order(inst.grid.axes(), inst.fixed_marginals(), tol);
}

/**
 * Recession condition {x : f^inf(x) <= 0} = {sum x_t = 0} for the fixed-marginal
 * kinds. With sigma = sum x_t this is 1 + h^inf(-1) > 0 and h^inf(+1) - 1 > 0
 * on every cell of positive base mass.
 */
inline bool check_recession(const ProblemInstance& inst) {
    switch (inst.kind) {
        case ProblemKind::MongeKantorovich:
        case ProblemKind::Capacity:
        case ProblemKind::Schrodinger:
        case ProblemKind::GenericDual: break;
        default: throw UnsupportedProblem("check_recession: no closed-form recession for " + to_string(inst.kind));
    }
    if (!inst.all_fixed()) throw UnsupportedProblem("check_recession: needs fixed marginals");
    const ConvexFamily h = inst.coupling_family();
    const std::vector<double> mu = inst.base_measure();
    for (std::size_t f = 0; f < mu.size(); ++f) {
        if (mu[f] <= 0.0) continue;
        const ExtReal down = recession(h, f, Direction::Negative);
        const ExtReal up = recession(h, f, Direction::Positive);
        if (!(down + 1.0 > ExtReal(0.0))) return false;
        if (!(up - 1.0 > ExtReal(0.0))) return false;
    }
    return true;
}

/**
 * Constraint qualification: some x_t in dom G_t with sum x_t >= eps psi and
 * H(-sum x_t) finite. Fixed marginals put no restriction on x_t, so the test
 * reduces to H(-K psi) < inf for large K; polytope marginals need each
 * Lambda_t nonempty with sigma(eps psi_t) finite.
 */
inline bool check_slater(const ProblemInstance& inst, double eps = 1e-6) {
    const GridShape& sh = inst.shape();
    for (std::size_t t = 0; t < inst.num_axes(); ++t) {
        if (inst.is_fixed(t)) continue;
        const MarginalSpace& ax = inst.grid.axis(t);
        std::vector<double> dir(ax.size());
        for (std::size_t i = 0; i < ax.size(); ++i) dir[i] = eps * ax.psi_at(i);
        if (!support_function(inst.polytope_marginal(t).constraints, dir).is_finite()) return false;
    }
    switch (inst.kind) {
        case ProblemKind::Superhedge:
            return std::all_of(inst.payoff.begin(), inst.payoff.end(), [](double v) { return std::isfinite(v); });
        case ProblemKind::Strassen: {
            std::vector<double> dir(sh.size());
            for (std::size_t f = 0; f < sh.size(); ++f) dir[f] = -eps * inst.grid.psi(f);
            return support_function(inst.coupling_constraints, dir).is_finite();
        }
        default: break;
    }
    const ConvexFamily h = inst.coupling_family();
    const std::vector<double> mu = inst.base_measure();
    double k = 1.0;
    for (std::size_t f = 0; f < sh.size(); ++f) {
        const Interval dom = domain(h, f);
        if (dom.empty) return false;
        if (std::isfinite(dom.hi)) k = std::max(k, 1.0 + std::abs(dom.hi) / inst.grid.psi(f));
    }
    std::vector<double> u(sh.size());
    for (std::size_t f = 0; f < sh.size(); ++f) u[f] = -k * inst.grid.psi(f);
    return eval_integral(h, mu, u).is_finite();
}

/// Shift x_t by -mean(x_t) for t < T and put the total shift on x_T.
inline Potentials gauge_normalize(const Potentials& x) {
    Potentials out = x;
    if (out.num_axes() < 2) return out;
    const std::size_t last = out.num_axes() - 1;
    double moved = 0.0;
    for (std::size_t t = 0; t < last; ++t) {
        if (out[t].empty()) continue;
        const double m = std::accumulate(out[t].begin(), out[t].end(), 0.0) / static_cast<double>(out[t].size());
        for (double& v : out[t]) v -= m;
        moved += m;
    }
    for (double& v : out[last]) v += moved;
    return out;
}

struct AdditiveDecomposition {
    Potentials x;
    double max_residual = 0.0;
    std::size_t worst_cell = 0;
    bool additive = true;
};

/**
 * Write u(s) = sum_t x_t(s_t) using the reference cell (0,...,0):
 * x_0(i) = u(i,0,...,0), x_t(i) = u(0,..,i,..,0) - u(0,...,0) for t >= 1.
 * `additive` is false when the reconstruction misses u by more than `tol`.
 */
inline AdditiveDecomposition decompose_additive(const GridShape& shape, std::span<const double> u, double tol = 1e-9) {
    if (u.size() != shape.size()) throw std::invalid_argument("decompose_additive: size mismatch");
    AdditiveDecomposition out;
    out.x = Potentials::zeros(shape);
    const double ref = u[0];
    for (std::size_t t = 0; t < shape.num_axes(); ++t) {
        for (std::size_t i = 0; i < shape.axis_size(t); ++i) {
            const double v = u[i * shape.strides()[t]];
            out.x[t][i] = t == 0 ? v : v - ref;
        }
    }
    for (std::size_t f = 0; f < shape.size(); ++f) {
        const double r = std::abs(out.x.sum_at(shape, f) - u[f]);
        if (r > out.max_residual) {
            out.max_residual = r;
            out.worst_cell = f;
        }
    }
    out.additive = out.max_residual <= tol;
    return out;
}

}  // namespace otdual
