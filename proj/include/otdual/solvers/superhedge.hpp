#pragma once

#include <cstddef>
#include <vector>

#include "otdual/certificate.hpp"
#include "otdual/certify.hpp"
#include "otdual/lp.hpp"
#include "otdual/problem.hpp"
#include "otdual/solvers/transport.hpp"

namespace otdual {

namespace detail {

struct MartingaleLp {
    lp::Instance lp;
    std::vector<std::size_t> marginal_first;
    std::vector<std::size_t> martingale_first;  // per t < T
    std::size_t dim = 0;
};

/// Couplings with the fixed marginals whose increments have zero conditional mean.
inline MartingaleLp martingale_lp(const ProblemInstance& inst, std::vector<double> objective) {
    const GridShape& sh = inst.shape();
    MartingaleLp m;
    m.dim = inst.grid.axis(0).coord_dim();
    m.lp.objective = std::move(objective);
    m.marginal_first = add_marginal_rows(m.lp, sh, sh.size(), marginal_rhs(inst));
    for (std::size_t t = 0; t + 1 < sh.num_axes(); ++t) {
        m.martingale_first.push_back(m.lp.rows.size());
        for (std::size_t r = 0; r < sh.prefix_count(t) * m.dim; ++r) {
            m.lp.rows.push_back({std::vector<double>(sh.size(), 0.0), lp::Sense::Equal, 0.0});
        }
        for (std::size_t f = 0; f < sh.size(); ++f) {
            const auto& now = inst.grid.axis(t).coords[sh.coordinate(f, t)];
            const auto& next = inst.grid.axis(t + 1).coords[sh.coordinate(f, t + 1)];
            const std::size_t h = sh.prefix(f, t);
            for (std::size_t k = 0; k < m.dim; ++k) {
                m.lp.rows[m.martingale_first[t] + h * m.dim + k].coeffs[f] = next[k] - now[k];
            }
        }
    }
    return m;
}

inline Strategy strategy_from_rows(const GridShape& sh, const MartingaleLp& m, const std::vector<double>& y,
                                   double sign) {
    Strategy z = Strategy::zeros(sh, m.dim);
    for (std::size_t t = 0; t < z.z.size(); ++t) {
        for (std::size_t r = 0; r < z.z[t].size(); ++r) z.z[t][r] = sign * y[m.martingale_first[t] + r] + 0.0;
    }
    return z;
}

}  // namespace detail

/**
 * Superhedging price of the payoff: max payoff.lambda over martingale
 * couplings with the fixed marginals. Hedge (x, z) comes from the row duals.
 * Without a martingale coupling the certificate is Infeasible and the
 * witness (x, z) is a model-free arbitrage: sum x + gains >= 0 at negative cost.
 */
inline Certificate solve_superhedge(const ProblemInstance& inst) {
    inst.validate();
    if (inst.kind != ProblemKind::Superhedge) throw UnsupportedProblem("solve_superhedge: not a superhedge instance");
    const GridShape& sh = inst.shape();
    std::vector<double> obj(inst.payoff);
    for (double& v : obj) v = -v;
    const detail::MartingaleLp m = detail::martingale_lp(inst, std::move(obj));
    const lp::Solution s = lp::solve_lp(m.lp);
    if (s.status == lp::Status::Infeasible) {
        Certificate cert = detail::infeasible_certificate(inst, s, m.marginal_first,
                                                          "no martingale coupling: marginals not in convex order");
        cert.witness->z = detail::strategy_from_rows(sh, m, cert.witness->ray, 1.0);
        double cost = 0.0;
        for (std::size_t t = 0; t < inst.num_axes(); ++t) {
            const auto& mu = inst.fixed_marginal(t);
            for (std::size_t i = 0; i < mu.size(); ++i) cost += cert.witness->x[t][i] * mu[i];
        }
        cert.witness->value = cost;
        cert.z = Strategy::zeros(sh, m.dim);
        return cert;
    }
    Certificate cert;
    cert.kind = inst.kind;
    cert.status = SolveStatus::Optimal;
    cert.iterations = s.iterations;
    cert.x = detail::potentials_from_rows(sh, m.marginal_first, s.duals, -1.0);
    cert.z = detail::strategy_from_rows(sh, m, s.duals, -1.0);
    cert.lambda = detail::coupling_from(sh, s.primal);
    cert.set_values(primal_objective(inst, cert.x, &*cert.z, 1e-9), dual_objective(inst, cert.lambda, 1e-9));
    cert.report = verify_pointwise_optimality(inst, cert.x, cert.lambda, 1e-7, &*cert.z);
    return cert;
}

/// Martingale-coupling feasibility for the fixed marginals of `inst`.
inline bool martingale_feasible(const ProblemInstance& inst) {
    const detail::MartingaleLp m = detail::martingale_lp(inst, std::vector<double>(inst.shape().size(), 0.0));
    return lp::solve_lp(m.lp).status == lp::Status::Optimal;
}

}  // namespace otdual
