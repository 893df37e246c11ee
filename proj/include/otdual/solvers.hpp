#pragma once

#include "otdual/certificate.hpp"
#include "otdual/problem.hpp"
#include "otdual/solvers/schrodinger.hpp"
#include "otdual/solvers/strassen.hpp"
#include "otdual/solvers/superhedge.hpp"
#include "otdual/solvers/transport.hpp"

namespace otdual {

namespace detail {

/// min c.lambda over lambda >= 0 with lambda_t in Lambda_t (indicator family, polytope marginals).
inline Certificate solve_polytope_indicator(const ProblemInstance& inst) {
    const GridShape& sh = inst.shape();
    const PolytopeLp p = polytope_lp(inst, inst.cost, false);
    const lp::Solution s = lp::solve_lp(p.lp);
    Certificate cert;
    cert.kind = inst.kind;
    cert.iterations = s.iterations;
    cert.x = Potentials::zeros(sh);
    cert.lambda = Coupling(sh, std::vector<double>(sh.size(), 0.0));
    if (s.status == lp::Status::Infeasible) {
        cert.status = SolveStatus::Infeasible;
        InfeasibilityWitness w;
        w.ray = s.farkas->multipliers;
        w.ray_value = s.farkas->value;
        w.x = potentials_from_rows(sh, p.link_first, w.ray, 1.0);
        ExtReal sep = 0.0;
        for (std::size_t t = 0; t < inst.num_axes(); ++t) sep += marginal_support(inst, t, w.x[t]);
        std::vector<double> neg = cell_sums(inst, w.x);
        for (double& v : neg) v = -v;
        w.value = sep + support_function({}, neg);
        w.message = "no nonnegative coupling with marginals in Lambda_t";
        cert.witness = std::move(w);
        cert.set_values(ExtReal::neg_infinity(), ExtReal::infinity());
        return cert;
    }
    if (s.status == lp::Status::Unbounded) {
        cert.status = SolveStatus::Unbounded;
        cert.set_values(ExtReal::infinity(), ExtReal::neg_infinity());
        return cert;
    }
    cert.status = SolveStatus::Optimal;
    cert.x = potentials_from_rows(sh, p.link_first, s.duals, -1.0);
    cert.lambda = coupling_from(sh, s.primal);
    cert.set_values(primal_objective(inst, cert.x, nullptr, 1e-9), dual_objective(inst, cert.lambda, 1e-9));
    cert.report = verify_pointwise_optimality(inst, cert.x, cert.lambda);
    return cert;
}

}  // namespace detail

/**
 * min sum_t G_t*(lambda_t) + H*(lambda) for a (family, marginal) pair.
 * Fixed marginals route to the MK, capacity or proportional-fitting
 * solvers; polytope marginals are handled for the indicator family only.
 */
inline Certificate solve_generic_dual(const ProblemInstance& inst) {
    inst.validate();
    const FamilyTag tag = inst.coupling_tag();
    if (!inst.all_fixed()) {
        if (tag != FamilyTag::IndicatorHalfline) {
            throw UnsupportedProblem("solve_generic_dual: polytope marginals are supported only with the indicator family");
        }
        return detail::solve_polytope_indicator(inst);
    }
    switch (tag) {
        case FamilyTag::IndicatorHalfline: return solve_mk(inst);
        case FamilyTag::CapacityHinge: return solve_capacity(inst);
        case FamilyTag::ScaledExp: return solve_schrodinger_ipf(inst);
        default: break;
    }
    throw UnsupportedProblem("solve_generic_dual: unsupported family " + to_string(tag));
}

/// Solve any instance with the solver of its kind.
inline Certificate solve(const ProblemInstance& inst) {
    switch (inst.kind) {
        case ProblemKind::MongeKantorovich: return solve_mk(inst);
        case ProblemKind::Capacity: return solve_capacity(inst);
        case ProblemKind::Schrodinger: return solve_schrodinger_ipf(inst);
        case ProblemKind::Superhedge: return solve_superhedge(inst);
        case ProblemKind::Strassen: return solve_strassen(inst);
        case ProblemKind::GenericDual: return solve_generic_dual(inst);
    }
    throw UnsupportedProblem("solve: unknown problem kind");
}

}  // namespace otdual
