#pragma once

#include <cstddef>
#include <vector>

#include "otdual/certificate.hpp"
#include "otdual/extended_real.hpp"
#include "otdual/lp.hpp"
#include "otdual/problem.hpp"
#include "otdual/solvers/transport.hpp"

namespace otdual {

namespace detail {

/// Variables: lambda per cell, then m_t per point of each axis.
struct PolytopeLp {
    lp::Instance lp;
    std::vector<std::size_t> link_first;  // rows marginal(lambda, t) - m_t = 0
    std::vector<std::size_t> m_offset;    // first column of m_t
};

inline PolytopeLp polytope_lp(const ProblemInstance& inst, std::vector<double> cell_cost, bool with_coupling) {
    const GridShape& sh = inst.shape();
    PolytopeLp out;
    std::size_t nvars = sh.size();
    for (std::size_t t = 0; t < sh.num_axes(); ++t) {
        out.m_offset.push_back(nvars);
        nvars += sh.axis_size(t);
    }
    out.lp.objective.assign(nvars, 0.0);
    std::copy(cell_cost.begin(), cell_cost.end(), out.lp.objective.begin());
    out.link_first = add_marginal_rows(out.lp, sh, nvars, {});
    for (std::size_t t = 0; t < sh.num_axes(); ++t) {
        for (std::size_t i = 0; i < sh.axis_size(t); ++i) out.lp.rows[out.link_first[t] + i].coeffs[out.m_offset[t] + i] = -1.0;
    }
    if (with_coupling) {
        for (const auto& c : inst.coupling_constraints) {
            lp::Constraint row{std::vector<double>(nvars, 0.0), c.sense, c.rhs};
            std::copy(c.coeffs.begin(), c.coeffs.end(), row.coeffs.begin());
            out.lp.rows.push_back(std::move(row));
        }
    }
    for (std::size_t t = 0; t < sh.num_axes(); ++t) {
        if (inst.is_fixed(t)) {
            const auto& mu = inst.fixed_marginal(t);
            for (std::size_t i = 0; i < mu.size(); ++i) {
                lp::Constraint row{std::vector<double>(nvars, 0.0), lp::Sense::Equal, mu[i]};
                row.coeffs[out.m_offset[t] + i] = 1.0;
                out.lp.rows.push_back(std::move(row));
            }
        } else {
            for (const auto& c : inst.polytope_marginal(t).constraints) {
                lp::Constraint row{std::vector<double>(nvars, 0.0), c.sense, c.rhs};
                std::copy(c.coeffs.begin(), c.coeffs.end(), row.coeffs.begin() + static_cast<std::ptrdiff_t>(out.m_offset[t]));
                out.lp.rows.push_back(std::move(row));
            }
        }
    }
    return out;
}

}  // namespace detail

/// sigma_{Lambda_t}(x_t); a fixed marginal is the singleton {mu_t}.
inline ExtReal marginal_support(const ProblemInstance& inst, std::size_t t, std::span<const double> xt) {
    if (inst.is_fixed(t)) {
        const auto& mu = inst.fixed_marginal(t);
        double acc = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) acc += xt[i] * mu[i];
        return acc;
    }
    return support_function(inst.polytope_marginal(t).constraints, xt);
}

/// sum_t sigma_{Lambda_t}(x_t) + sigma_Lambda(-sum_t x_t); negative values separate.
inline ExtReal strassen_separation(const ProblemInstance& inst, const Potentials& x) {
    ExtReal total = 0.0;
    for (std::size_t t = 0; t < inst.num_axes(); ++t) total += marginal_support(inst, t, x[t]);
    std::vector<double> neg = cell_sums(inst, x);
    for (double& v : neg) v = -v;
    return total + support_function(inst.coupling_constraints, neg);
}

struct StrassenResult {
    bool feasible = false;
    Coupling lambda;
    std::vector<std::vector<double>> marginals;  // m_t = lambda_t
    Potentials witness;
    ExtReal separation = 0.0;
    std::vector<double> ray;
    double ray_value = 0.0;
    std::size_t iterations = 0;
};

/**
 * Is there lambda in Lambda with lambda_t in Lambda_t for every t? On
 * failure the link-row part of the Farkas ray gives x with
 * sum_t sigma_{Lambda_t}(x_t) + sigma_Lambda(-sum_t x_t) < 0.
 */
inline StrassenResult check_strassen(const ProblemInstance& inst) {
    inst.validate();
    const GridShape& sh = inst.shape();
    const detail::PolytopeLp p = detail::polytope_lp(inst, {}, true);
    const lp::Solution s = lp::solve_lp(p.lp);
    StrassenResult r;
    r.iterations = s.iterations;
    if (s.status == lp::Status::Optimal) {
        r.feasible = true;
        r.lambda = detail::coupling_from(sh, s.primal);
        for (std::size_t t = 0; t < sh.num_axes(); ++t) {
            const auto b = s.primal.begin() + static_cast<std::ptrdiff_t>(p.m_offset[t]);
            r.marginals.emplace_back(b, b + static_cast<std::ptrdiff_t>(sh.axis_size(t)));
        }
        r.witness = Potentials::zeros(sh);
        return r;
    }
    r.lambda = Coupling(sh, std::vector<double>(sh.size(), 0.0));
    r.ray = s.farkas->multipliers;
    r.ray_value = s.farkas->value;
    r.witness = detail::potentials_from_rows(sh, p.link_first, r.ray, 1.0);
    r.separation = strassen_separation(inst, r.witness);
    return r;
}

/// Certificate view: x = 0 with both values 0 when feasible.
inline Certificate solve_strassen(const ProblemInstance& inst) {
    const StrassenResult r = check_strassen(inst);
    Certificate cert;
    cert.kind = inst.kind;
    cert.iterations = r.iterations;
    cert.lambda = r.lambda;
    cert.x = Potentials::zeros(inst.shape());
    if (r.feasible) {
        cert.status = SolveStatus::Optimal;
        cert.set_values(primal_objective(inst, cert.x), dual_objective(inst, cert.lambda, 1e-9));
        cert.report = verify_pointwise_optimality(inst, cert.x, cert.lambda);
        return cert;
    }
    cert.status = SolveStatus::Infeasible;
    InfeasibilityWitness w;
    w.ray = r.ray;
    w.ray_value = r.ray_value;
    w.x = r.witness;
    w.value = r.separation;
    w.message = "no coupling in Lambda with marginals in Lambda_t";
    cert.witness = std::move(w);
    cert.set_values(ExtReal::neg_infinity(), ExtReal::infinity());
    return cert;
}

}  // namespace otdual
