#pragma once

// Instance builders shared by the test binaries.

#include <random>
#include <vector>

#include "oracles.hpp"
#include "otdual/otdual.hpp"

namespace fixture {

using namespace otdual;

inline ProductGrid grid(const std::vector<std::size_t>& sizes) {
    std::vector<MarginalSpace> axes;
    for (std::size_t n : sizes) axes.push_back(MarginalSpace::sized(n));
    return build_product_grid(std::move(axes));
}

inline ProductGrid state_grid(const std::vector<std::vector<double>>& states) {
    std::vector<MarginalSpace> axes;
    for (const auto& s : states) axes.push_back(MarginalSpace::with_states(s));
    return build_product_grid(std::move(axes));
}

inline std::vector<DiscreteMeasure> probs(const std::vector<std::vector<double>>& ms) {
    std::vector<DiscreteMeasure> out;
    for (const auto& m : ms) out.push_back(DiscreteMeasure::probability(m));
    return out;
}

inline const std::vector<double> kSwapCost{0.0, 1.0, 1.0, 0.0};

inline ProblemInstance mk2x2(std::vector<double> a, std::vector<double> b, std::vector<double> cost = kSwapCost) {
    return make_mk(grid({2, 2}), probs({a, b}), std::move(cost));
}

inline ProblemInstance capacity2x2(double phi) {
    return make_capacity(grid({2, 2}), probs({{0.5, 0.5}, {0.5, 0.5}}), kSwapCost, std::vector<double>(4, phi));
}

inline ProblemInstance schrodinger2x2(std::vector<double> a, std::vector<double> b, std::vector<double> ref) {
    return make_schrodinger(grid({2, 2}), probs({a, b}), std::move(ref));
}

/// S_0 = {1} with mass 1, S_1 = {0, 2} with the given masses.
inline ProblemInstance straddle(std::vector<double> mu1, std::vector<double> payoff) {
    return make_superhedge(state_grid({{1.0}, {0.0, 2.0}}), probs({{1.0}, mu1}), std::move(payoff));
}

inline lp::Constraint row(std::vector<double> coeffs, lp::Sense sense, double rhs) {
    return lp::Constraint{std::move(coeffs), sense, rhs};
}

inline PolytopeMarginal singleton(const std::vector<double>& m) {
    PolytopeMarginal p;
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::vector<double> e(m.size(), 0.0);
        e[i] = 1.0;
        p.constraints.push_back(row(e, lp::Sense::Equal, m[i]));
    }
    return p;
}

inline ProblemInstance strassen(std::vector<MarginalSpec> marginals, std::vector<lp::Constraint> coupling,
                                std::vector<std::size_t> sizes = {2, 2}) {
    ProblemInstance p;
    p.grid = grid(sizes);
    p.kind = ProblemKind::Strassen;
    p.marginals = std::move(marginals);
    p.coupling_constraints = std::move(coupling);
    p.validate();
    return p;
}

/// Random MK or capacity instance: 2 or 3 axes of 2-4 points, integer costs 0-9,
/// rational marginals, capacity densities drawn from {1.2, 1.5, 2, 3}.
inline ProblemInstance random_transport(std::mt19937& rng, bool capacity) {
    std::uniform_int_distribution<int> axes(2, 3), points(2, 4), cost(0, 9), cap(0, 3);
    const std::size_t n_axes = static_cast<std::size_t>(axes(rng));
    std::vector<std::size_t> sizes;
    std::vector<DiscreteMeasure> ms;
    for (std::size_t t = 0; t < n_axes; ++t) {
        sizes.push_back(static_cast<std::size_t>(points(rng)));
        ms.push_back(DiscreteMeasure::probability(oracle::rational_probability(rng, sizes.back())));
    }
    ProductGrid g = grid(sizes);
    std::vector<double> c(g.size());
    for (double& v : c) v = cost(rng);
    if (!capacity) return make_mk(std::move(g), std::move(ms), std::move(c));
    const double levels[] = {1.2, 1.5, 2.0, 3.0};
    std::vector<double> phi(g.size());
    for (double& v : phi) v = levels[cap(rng)];
    return make_capacity(std::move(g), std::move(ms), std::move(c), std::move(phi));
}

struct Perturbed {
    Potentials x;
    Coupling lambda;
    std::string what;
};

/**
 * Move an optimal (x, lambda) off optimality by delta in [2e-3, 1e-1] at a cell
 * carrying at least 1e-3 mass. Even `index`: add delta to lambda there (breaks
 * the marginals). Odd `index`: shift a potential so that the cell leaves the
 * optimality set (MK: -sum x exceeds c; capacity: a boundary cell with
 * interior density drops below c).
 */
inline Perturbed perturb(const ProblemInstance& inst, const Certificate& c, std::mt19937& rng, int index) {
    std::uniform_real_distribution<double> mag(2e-3, 1e-1);
    const double delta = mag(rng);
    const GridShape& sh = inst.shape();
    std::vector<std::size_t> heavy;
    for (std::size_t f = 0; f < sh.size(); ++f) {
        if (c.lambda[f] >= 1e-3) heavy.push_back(f);
    }
    std::uniform_int_distribution<std::size_t> pick_cell(0, heavy.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_axis(0, sh.num_axes() - 1);
    Perturbed out{c.x, c.lambda, ""};
    if (index % 2 == 1 && inst.kind == ProblemKind::MongeKantorovich) {
        const std::size_t f = heavy[pick_cell(rng)];
        const std::size_t t = pick_axis(rng);
        out.x[t][sh.coordinate(f, t)] -= delta;
        out.what = "x shift";
        return out;
    }
    if (index % 2 == 1 && inst.kind == ProblemKind::Capacity) {
        const auto mu = inst.base_measure();
        const ResidualReport r = verify_capacity_slackness(inst, c.x, c.lambda);
        std::vector<std::size_t> interior;
        for (std::size_t f : heavy) {
            const double rho = c.lambda[f] / mu[f];
            if (r.labels[f] == SlackCase::Boundary && rho > 0.0 && rho < inst.capacity[f]) interior.push_back(f);
        }
        if (!interior.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, interior.size() - 1);
            const std::size_t f = interior[pick(rng)];
            const std::size_t t = pick_axis(rng);
            out.x[t][sh.coordinate(f, t)] += delta;
            out.what = "x shift";
            return out;
        }
    }
    std::vector<double> m = c.lambda.mass();
    m[heavy[pick_cell(rng)]] += delta;
    out.lambda = Coupling(sh, std::move(m));
    out.what = "lambda shift";
    return out;
}

}  // namespace fixture
