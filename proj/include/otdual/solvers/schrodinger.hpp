#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "otdual/certificate.hpp"
#include "otdual/certify.hpp"
#include "otdual/lp.hpp"
#include "otdual/problem.hpp"
#include "otdual/solvers/transport.hpp"

namespace otdual {

/**
 * Iterative proportional fitting on potentials. The coupling is never
 * stored: lambda(s) = R(s) exp(-sum_t x_t(s_t)) with R the normalized
 * reference restricted to cells whose points all carry marginal mass.
 * Updating axis t sets x_t(i) += ln(lambda_t(i) / mu_t(i)), which makes the
 * t-th marginal exact. Points of zero marginal mass keep x = 0.
 */
class IpfState {
public:
    static constexpr double kUnderflow = 1e-300;

    explicit IpfState(const ProblemInstance& inst)
        : inst_(&inst), shape_(inst.shape()), ref_(inst.base_measure()), x_(Potentials::zeros(inst.shape())) {
        log_ref_.resize(ref_.size());
        for (std::size_t f = 0; f < ref_.size(); ++f) {
            log_ref_[f] = ref_[f] > 0.0 ? std::log(ref_[f]) : -std::numeric_limits<double>::infinity();
            if (ref_[f] > 0.0 && ref_[f] < kUnderflow) log_domain_ = true;
        }
    }

    [[nodiscard]] const Potentials& potentials() const { return x_; }
    [[nodiscard]] bool log_domain() const { return log_domain_; }
    [[nodiscard]] const std::vector<double>& reference() const { return ref_; }

    [[nodiscard]] std::vector<double> coupling() const {
        std::vector<double> lam(ref_.size(), 0.0);
        for (std::size_t f = 0; f < ref_.size(); ++f) {
            if (ref_[f] == 0.0) continue;
            if (log_domain_) {
                lam[f] = std::exp(log_ref_[f] - x_.sum_at(shape_, f));
            } else {
                double v = ref_[f];
                for (std::size_t t = 0; t < shape_.num_axes(); ++t) v *= std::exp(-x_[t][shape_.coordinate(f, t)]);
                lam[f] = v;
            }
        }
        return lam;
    }

    void update_axis(std::size_t t) {
        const DiscreteMeasure& mu = inst_->fixed_marginal(t);
        const std::size_t n = shape_.axis_size(t);
        if (log_domain_) {
            std::vector<double> peak(n, -std::numeric_limits<double>::infinity());
            std::vector<double> e(ref_.size());
            for (std::size_t f = 0; f < ref_.size(); ++f) {
                if (ref_[f] == 0.0) continue;
                e[f] = log_ref_[f] - x_.sum_at(shape_, f);
                const std::size_t i = shape_.coordinate(f, t);
                peak[i] = std::max(peak[i], e[f]);
            }
            std::vector<double> acc(n, 0.0);
            for (std::size_t f = 0; f < ref_.size(); ++f) {
                if (ref_[f] == 0.0) continue;
                const std::size_t i = shape_.coordinate(f, t);
                acc[i] += std::exp(e[f] - peak[i]);
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (mu[i] > 0.0) x_[t][i] += peak[i] + std::log(acc[i]) - std::log(mu[i]);
            }
            return;
        }
        const std::vector<double> lam = coupling();
        std::vector<double> lt(n, 0.0);
        for (std::size_t f = 0; f < lam.size(); ++f) lt[shape_.coordinate(f, t)] += lam[f];
        for (std::size_t i = 0; i < n; ++i) {
            if (mu[i] > 0.0) x_[t][i] += std::log(lt[i] / mu[i]);
        }
        for (std::size_t f = 0; f < lam.size(); ++f) {
            if (ref_[f] == 0.0) continue;
            const double v = lam[f] * mu[shape_.coordinate(f, t)] / lt[shape_.coordinate(f, t)];
            if (v < kUnderflow) log_domain_ = true;
        }
    }

    void cycle() {
        for (std::size_t t = 0; t < shape_.num_axes(); ++t) update_axis(t);
    }

    /// max_t || lambda_t - mu_t ||_1
    [[nodiscard]] double marginal_error() const {
        const std::vector<double> lam = coupling();
        double worst = 0.0;
        for (std::size_t t = 0; t < shape_.num_axes(); ++t) {
            const DiscreteMeasure& mu = inst_->fixed_marginal(t);
            std::vector<double> lt(shape_.axis_size(t), 0.0);
            for (std::size_t f = 0; f < lam.size(); ++f) lt[shape_.coordinate(f, t)] += lam[f];
            double l1 = 0.0;
            for (std::size_t i = 0; i < lt.size(); ++i) l1 += std::abs(lt[i] - mu[i]);
            worst = std::max(worst, l1);
        }
        return worst;
    }

private:
    const ProblemInstance* inst_;
    GridShape shape_;
    std::vector<double> ref_;
    std::vector<double> log_ref_;
    Potentials x_;
    bool log_domain_ = false;
};

/// True when every cell charged by the product of the marginals is charged by R.
inline bool product_absolutely_continuous(const ProblemInstance& inst) {
    const auto ms = inst.fixed_marginals();
    const std::vector<double> prod = product_mass(inst.shape(), ms);
    for (std::size_t f = 0; f < prod.size(); ++f) {
        if (prod[f] > 0.0 && inst.reference[f] <= 0.0) return false;
    }
    return true;
}

/// Some coupling with the fixed marginals lives on supp R.
inline bool schrodinger_support_feasible(const ProblemInstance& inst) {
    if (product_absolutely_continuous(inst)) return true;
    const GridShape& sh = inst.shape();
    lp::Instance p;
    p.objective.assign(sh.size(), 0.0);
    p.upper.resize(sh.size());
    for (std::size_t f = 0; f < sh.size(); ++f) p.upper[f] = inst.reference[f] > 0.0 ? lp::detail::kInf : 0.0;
    detail::add_marginal_rows(p, sh, sh.size(), detail::marginal_rhs(inst));
    return lp::solve_lp(p).status == lp::Status::Optimal;
}

/**
 * Entropic projection of R onto the couplings of the fixed marginals by
 * cyclic proportional fitting (axes in ascending order). Stops after the
 * first full cycle with max_t ||lambda_t - mu_t||_1 <= tol.
 */
inline Certificate solve_schrodinger_ipf(const ProblemInstance& inst, double tol, std::size_t max_iter) {
    inst.validate();
    if (inst.coupling_tag() != FamilyTag::ScaledExp) {
        throw UnsupportedProblem("solve_schrodinger_ipf: not an entropic instance");
    }
    if (!schrodinger_support_feasible(inst)) {
        throw InfeasibleSupport("solve_schrodinger_ipf: no coupling of the marginals is absolutely continuous w.r.t. R");
    }
    Certificate cert;
    cert.kind = inst.kind;
    if (!product_absolutely_continuous(inst)) {
        cert.notes.push_back("product of marginals not absolutely continuous w.r.t. R");
    }
    IpfState state(inst);
    cert.status = SolveStatus::NotConverged;
    for (std::size_t k = 1; k <= max_iter; ++k) {
        state.cycle();
        cert.iterations = k;
        if (state.marginal_error() <= tol) {
            cert.status = SolveStatus::Optimal;
            break;
        }
    }
    if (state.log_domain()) cert.notes.push_back("log-domain updates");
    cert.x = state.potentials();
    cert.lambda = Coupling(inst.shape(), state.coupling());
    cert.set_values(eval_schrodinger_dual(cert.x, inst), relative_entropy(inst, cert.lambda.mass()));
    cert.report = verify_pointwise_optimality(inst, cert.x, cert.lambda);
    return cert;
}

inline Certificate solve_schrodinger_ipf(const ProblemInstance& inst) {
    return solve_schrodinger_ipf(inst, inst.tol, inst.max_iter);
}

}  // namespace otdual
