#pragma once

#include <optional>
#include <string>
#include <vector>

#include "otdual/certify.hpp"
#include "otdual/extended_real.hpp"
#include "otdual/model.hpp"
#include "otdual/problem.hpp"

namespace otdual {

enum class SolveStatus { Optimal, Infeasible, Unbounded, NotConverged };

inline std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::NotConverged: return "not_converged";
    }
    return "unknown";
}

/**
 * Proof that the dual constraint set is empty. `ray` is the LP Farkas ray;
 * `x` (and `z` for superhedging) is the primal direction read off it, and
 * `value` is the objective of that direction (negative).
 */
struct InfeasibilityWitness {
    std::vector<double> ray;
    double ray_value = 0.0;
    Potentials x;
    std::optional<Strategy> z;
    ExtReal value = 0.0;
    std::string message;
};

struct Certificate {
    ProblemKind kind = ProblemKind::MongeKantorovich;
    SolveStatus status = SolveStatus::Optimal;
    Potentials x;
    std::optional<Strategy> z;
    Coupling lambda;
    ExtReal primal_value = 0.0;
    ExtReal dual_value = 0.0;
    ExtReal gap = 0.0;
    ResidualReport report;
    std::size_t iterations = 0;
    std::optional<InfeasibilityWitness> witness;
    std::vector<std::string> notes;

    [[nodiscard]] bool optimal() const { return status == SolveStatus::Optimal; }

    void set_values(ExtReal primal, ExtReal dual) {
        primal_value = primal;
        dual_value = dual;
        if ((primal.is_pos_inf() && dual.is_neg_inf()) || (primal.is_neg_inf() && dual.is_pos_inf())) {
            gap = ExtReal::infinity();
        } else {
            gap = primal + dual;
        }
    }
};

}  // namespace otdual
