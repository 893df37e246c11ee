#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "otdual/certificate.hpp"
#include "otdual/certify.hpp"
#include "otdual/lp.hpp"
#include "otdual/problem.hpp"

namespace otdual {

namespace detail {

/// Rows sum_{s: s_t = i} lambda(s) = rhs[t][i] over the first `cells` variables
/// of an `nvars`-column LP; returns the index of the first row of each axis.
inline std::vector<std::size_t> add_marginal_rows(lp::Instance& p, const GridShape& sh, std::size_t nvars,
                                                  const std::vector<std::vector<double>>& rhs) {
    std::vector<std::size_t> first;
    for (std::size_t t = 0; t < sh.num_axes(); ++t) {
        first.push_back(p.rows.size());
        for (std::size_t i = 0; i < sh.axis_size(t); ++i) {
            lp::Constraint c;
            c.coeffs.assign(nvars, 0.0);
            c.sense = lp::Sense::Equal;
            c.rhs = rhs.empty() ? 0.0 : rhs[t][i];
            p.rows.push_back(std::move(c));
        }
    }
    for (std::size_t f = 0; f < sh.size(); ++f) {
        for (std::size_t t = 0; t < sh.num_axes(); ++t) p.rows[first[t] + sh.coordinate(f, t)].coeffs[f] = 1.0;
    }
    return first;
}

inline std::vector<std::vector<double>> marginal_rhs(const ProblemInstance& inst) {
    std::vector<std::vector<double>> out;
    for (std::size_t t = 0; t < inst.num_axes(); ++t) out.push_back(inst.fixed_marginal(t).mass());
    return out;
}

/// x_t(i) = sign * y(first[t] + i).
inline Potentials potentials_from_rows(const GridShape& sh, const std::vector<std::size_t>& first,
                                       const std::vector<double>& y, double sign) {
    Potentials x = Potentials::zeros(sh);
    for (std::size_t t = 0; t < sh.num_axes(); ++t) {
        for (std::size_t i = 0; i < sh.axis_size(t); ++i) x[t][i] = sign * y[first[t] + i] + 0.0;
    }
    return x;
}

inline Coupling coupling_from(const GridShape& sh, const std::vector<double>& primal) {
    std::vector<double> m(primal.begin(), primal.begin() + static_cast<std::ptrdiff_t>(sh.size()));
    for (double& v : m) v = std::max(0.0, v);
    return Coupling(sh, std::move(m));
}

inline Certificate infeasible_certificate(const ProblemInstance& inst, const lp::Solution& s,
                                          const std::vector<std::size_t>& first, std::string message) {
    Certificate cert;
    cert.kind = inst.kind;
    cert.status = SolveStatus::Infeasible;
    cert.x = Potentials::zeros(inst.shape());
    cert.lambda = Coupling(inst.shape(), std::vector<double>(inst.shape().size(), 0.0));
    cert.iterations = s.iterations;
    InfeasibilityWitness w;
    w.ray = s.farkas->multipliers;
    w.ray_value = s.farkas->value;
    w.x = potentials_from_rows(inst.shape(), first, w.ray, 1.0);
    w.value = w.ray_value;
    w.message = std::move(message);
    cert.witness = std::move(w);
    cert.set_values(ExtReal::neg_infinity(), ExtReal::infinity());
    return cert;
}

/**
 * min c.lambda over couplings with the fixed marginals, optionally with
 * lambda <= phi mu. Potentials are the negated marginal-row duals.
 */
inline Certificate solve_transport_lp(const ProblemInstance& inst, bool capped) {
    inst.validate();
    const GridShape& sh = inst.shape();
    lp::Instance p;
    p.objective = inst.cost;
    const std::vector<std::size_t> first = add_marginal_rows(p, sh, sh.size(), marginal_rhs(inst));
    const std::vector<double> mu = inst.base_measure();
    if (capped) {
        p.upper.resize(sh.size());
        for (std::size_t f = 0; f < sh.size(); ++f) p.upper[f] = inst.capacity[f] * mu[f];
    }
    const lp::Solution s = lp::solve_lp(p);
    if (s.status == lp::Status::Infeasible) {
        return infeasible_certificate(inst, s, first,
                                      capped ? "capacity too tight for the marginals" : "marginals cannot be coupled");
    }
    Certificate cert;
    cert.kind = inst.kind;
    cert.status = SolveStatus::Optimal;
    cert.iterations = s.iterations;
    cert.x = potentials_from_rows(sh, first, s.duals, -1.0);
    cert.lambda = coupling_from(sh, s.primal);
    cert.set_values(primal_objective(inst, cert.x, nullptr, 1e-9), dual_objective(inst, cert.lambda, 1e-9));
    cert.report = verify_pointwise_optimality(inst, cert.x, cert.lambda);
    if (capped) {
        const ResidualReport slack = verify_capacity_slackness(inst, cert.x, cert.lambda);
        cert.report.labels = slack.labels;
        cert.report.slackness = slack.slackness;
        cert.report.finalize();
    }
    return cert;
}

}  // namespace detail

/// Multi-marginal Monge-Kantorovich problem with fixed marginals.
inline Certificate solve_mk(const ProblemInstance& inst) {
    if (inst.coupling_tag() != FamilyTag::IndicatorHalfline) throw UnsupportedProblem("solve_mk: not an MK instance");
    return detail::solve_transport_lp(inst, false);
}

/**
 * Transport with density bound lambda <= phi mu, mu the product of the
 * marginals. Any phi > 0 is accepted; when phi <= 1 somewhere the recession
 * condition fails and a note is attached, and when the caps cannot carry
 * the marginals the certificate is Infeasible with a Farkas witness.
 */
inline Certificate solve_capacity(const ProblemInstance& inst) {
    if (inst.coupling_tag() != FamilyTag::CapacityHinge) {
        throw UnsupportedProblem("solve_capacity: not a capacity instance");
    }
    Certificate cert = detail::solve_transport_lp(inst, true);
    if (cert.optimal() && !check_recession(inst)) cert.notes.push_back("capacity density not > 1: recession condition fails");
    return cert;
}

}  // namespace otdual
