#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "otdual/lp.hpp"

using namespace otdual::lp;

namespace {

Instance transport(std::size_t m, std::size_t n, const std::vector<double>& cost, const std::vector<double>& a,
                   const std::vector<double>& b) {
    Instance p;
    p.objective = cost;
    for (std::size_t i = 0; i < m; ++i) {
        Constraint c{std::vector<double>(m * n, 0.0), Sense::Equal, a[i]};
        for (std::size_t j = 0; j < n; ++j) c.coeffs[i * n + j] = 1.0;
        p.rows.push_back(c);
    }
    for (std::size_t j = 0; j < n; ++j) {
        Constraint c{std::vector<double>(m * n, 0.0), Sense::Equal, b[j]};
        for (std::size_t i = 0; i < m; ++i) c.coeffs[i * n + j] = 1.0;
        p.rows.push_back(c);
    }
    return p;
}

void expect_certified(const Instance& p, const Solution& s) {
    ASSERT_EQ(s.status, Status::Optimal);
    double bnorm = 0.0;
    for (const auto& r : p.rows) bnorm = std::max(bnorm, std::abs(r.rhs));
    const Residuals r = residuals(p, s);
    EXPECT_LE(r.primal, 1e-8 * (1.0 + bnorm));
    EXPECT_LE(r.dual, 1e-8);
    EXPECT_LE(r.complementary, 1e-8);
    EXPECT_NEAR(dual_objective(p, s), s.objective, 1e-7 * (1.0 + std::abs(s.objective)));
}

}  // namespace

TEST(Lp, SingleLowerBoundRow) {
    Instance p{{1.0}, {{{1.0}, Sense::GreaterEqual, 3.0}}, {}, {}};
    const Solution s = solve_lp(p);
    expect_certified(p, s);
    EXPECT_NEAR(s.primal[0], 3.0, 1e-12);
    EXPECT_NEAR(s.objective, 3.0, 1e-12);
    EXPECT_NEAR(s.duals[0], 1.0, 1e-12);
}

TEST(Lp, ContradictoryEqualitiesGiveFarkasRay) {
    Instance p{{0.0}, {{{1.0}, Sense::Equal, 1.0}, {{1.0}, Sense::Equal, 2.0}}, {}, {}};
    const Solution s = solve_lp(p);
    ASSERT_EQ(s.status, Status::Infeasible);
    const FarkasRay r = farkas_certificate(p);
    ASSERT_EQ(r.multipliers.size(), 2u);
    EXPECT_NEAR(r.multipliers[0], 1.0, 1e-12);
    EXPECT_NEAR(r.multipliers[1], -1.0, 1e-12);
    EXPECT_NEAR(r.value, -1.0, 1e-12);
}

TEST(Lp, TransportDiagonalOptimum) {
    const Instance p = transport(2, 2, {0, 1, 1, 0}, {0.5, 0.5}, {0.5, 0.5});
    const Solution s = solve_lp(p);
    expect_certified(p, s);
    EXPECT_NEAR(s.objective, 0.0, 1e-12);
    EXPECT_NEAR(s.primal[0], 0.5, 1e-12);
    EXPECT_NEAR(s.primal[3], 0.5, 1e-12);
}

TEST(Lp, UnequalTotalsSeparatedByRay) {
    const Instance p = transport(2, 2, {0, 1, 1, 0}, {0.5, 0.5}, {1.0, 1.0});
    ASSERT_EQ(solve_lp(p).status, Status::Infeasible);
    const FarkasRay r = farkas_certificate(p);
    EXPECT_LT(r.value, -1e-9);
    // Aggregate oracle: y.b < 0 while A^T y >= 0 on the nonnegative orthant.
    double yb = 0.0;
    for (std::size_t i = 0; i < p.rows.size(); ++i) yb += r.multipliers[i] * p.rows[i].rhs;
    EXPECT_LT(yb, -1e-9);
    for (std::size_t j = 0; j < p.num_vars(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < p.rows.size(); ++i) col += r.multipliers[i] * p.rows[i].coeffs[j];
        EXPECT_GE(col, -1e-9);
    }
}

TEST(Lp, EmptyBoundRows) {
    Instance p{{1.0}, {{{1.0}, Sense::LessEqual, 0.0}, {{1.0}, Sense::GreaterEqual, 1.0}}, {}, {}};
    ASSERT_EQ(solve_lp(p).status, Status::Infeasible);
    const FarkasRay r = farkas_certificate(p);
    EXPECT_GE(r.multipliers[0], 0.0);
    EXPECT_LE(r.multipliers[1], 0.0);
    EXPECT_LT(r.value, -1e-9);
}

TEST(Lp, UnboundedDetected) {
    Instance p{{-1.0}, {{{1.0}, Sense::GreaterEqual, 1.0}}, {}, {}};
    EXPECT_EQ(solve_lp(p).status, Status::Unbounded);
}

TEST(Lp, BoundedVariablesAndFreeVariables) {
    // min -x - y, x + y <= 3, 0 <= x <= 1, y free but y <= 5 via row.
    Instance p;
    p.objective = {-1.0, -1.0};
    p.rows = {{{1.0, 1.0}, Sense::LessEqual, 3.0}, {{0.0, 1.0}, Sense::LessEqual, 5.0}};
    p.lower = {0.0, -std::numeric_limits<double>::infinity()};
    p.upper = {1.0, std::numeric_limits<double>::infinity()};
    const Solution s = solve_lp(p);
    expect_certified(p, s);
    EXPECT_NEAR(s.objective, -3.0, 1e-12);
}

TEST(Lp, FarkasOnFeasibleThrows) {
    Instance p{{1.0}, {{{1.0}, Sense::GreaterEqual, 3.0}}, {}, {}};
    EXPECT_THROW(farkas_certificate(p), std::logic_error);
}

TEST(Lp, MalformedInstancesRejected) {
    Instance bad_len{{1.0, 2.0}, {{{1.0}, Sense::Equal, 1.0}}, {}, {}};
    EXPECT_THROW(solve_lp(bad_len), std::invalid_argument);
    Instance nan_cost{{std::nan("")}, {}, {}, {}};
    EXPECT_THROW(solve_lp(nan_cost), std::invalid_argument);
    Instance inf_matrix{{1.0}, {{{std::numeric_limits<double>::infinity()}, Sense::Equal, 1.0}}, {}, {}};
    EXPECT_THROW(solve_lp(inf_matrix), std::invalid_argument);
    Instance crossed{{1.0}, {}, {2.0}, {1.0}};
    EXPECT_THROW(solve_lp(crossed), std::invalid_argument);
}

TEST(Lp, Deterministic) {
    const Instance p = transport(3, 3, {3, 1, 4, 1, 5, 9, 2, 6, 5}, {0.25, 0.5, 0.25}, {0.375, 0.375, 0.25});
    const Solution a = solve_lp(p);
    const Solution b = solve_lp(p);
    EXPECT_EQ(a.primal, b.primal);
    EXPECT_EQ(a.duals, b.duals);
    EXPECT_EQ(a.basis, b.basis);
}

TEST(Lp, RandomTransportMatchesVertexEnumeration) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> cost(0, 9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> c(9);
        for (double& v : c) v = cost(rng);
        std::uniform_int_distribution<int> den(1, 8);
        const int d = den(rng);
        auto rational = [&](int denom) {
            // Compositions of denom into 3 nonnegative parts.
            std::uniform_int_distribution<int> k(0, denom);
            int a = k(rng), b = k(rng);
            if (a > b) std::swap(a, b);
            return std::vector<double>{a / double(denom), (b - a) / double(denom), (denom - b) / double(denom)};
        };
        const auto a = rational(d);
        const auto b = rational(d);
        const Instance p = transport(3, 3, c, a, b);
        const Solution s = solve_lp(p);
        expect_certified(p, s);
        EXPECT_NEAR(s.objective, oracle::transport_vertex_min(3, 3, c, a, b), 1e-9) << "trial " << trial;
    }
}

TEST(Lp, StrongDualityAndIdempotenceOnRandomInstances) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int optimal = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Instance p;
        const std::size_t n = 4 + trial % 3;
        p.objective.resize(n);
        for (double& c : p.objective) c = u(rng);
        for (std::size_t i = 0; i < 3; ++i) {
            Constraint c{std::vector<double>(n), static_cast<Sense>(i % 3), 0.0};
            for (double& a : c.coeffs) a = u(rng);
            c.rhs = u(rng);
            p.rows.push_back(c);
        }
        p.upper.assign(n, 2.0);
        const Solution s = solve_lp(p);
        if (s.status != Status::Optimal) continue;
        ++optimal;
        expect_certified(p, s);
        const Solution again = solve_from_basis(p, s.basis);
        EXPECT_NEAR(again.objective, s.objective, 1e-12);
    }
    EXPECT_GT(optimal, 50);
}
