#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace otdual;
using namespace fixture;

namespace {

void expect_coupling(const Coupling& lam, const std::vector<double>& expected, double tol) {
    ASSERT_EQ(lam.mass().size(), expected.size());
    for (std::size_t f = 0; f < expected.size(); ++f) EXPECT_NEAR(lam[f], expected[f], tol) << "cell " << f;
}

double value_of(const Certificate& c) { return c.dual_value.value(); }

}  // namespace

TEST(Mk, UniformSwapCost) {
    const Certificate c = solve_mk(mk2x2({0.5, 0.5}, {0.5, 0.5}));
    ASSERT_TRUE(c.optimal());
    EXPECT_NEAR(value_of(c), 0.0, 1e-12);
    EXPECT_LE(std::abs(c.gap.value()), 1e-9);
    expect_coupling(c.lambda, {0.5, 0.0, 0.0, 0.5}, 1e-12);
}

TEST(Mk, SkewedMarginalsMatchVertexEnumeration) {
    const Certificate c = solve_mk(mk2x2({0.7, 0.3}, {0.4, 0.6}));
    ASSERT_TRUE(c.optimal());
    const double oracle = oracle::transport_vertex_min(2, 2, kSwapCost, {0.7, 0.3}, {0.4, 0.6});
    EXPECT_NEAR(oracle, 0.3, 1e-12);
    EXPECT_NEAR(value_of(c), oracle, 1e-9);
    EXPECT_LE(std::abs(c.gap.value()), 1e-7);
    double slack = 0.0;
    for (std::size_t f = 0; f < 4; ++f) slack += c.lambda[f] * (kSwapCost[f] + c.x.sum_at(c.lambda.shape(), f));
    EXPECT_LE(std::abs(slack), 1e-7);
}

TEST(Mk, ThreeAxesConstantCost) {
    const auto inst = make_mk(grid({2, 2, 2}), probs({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}), std::vector<double>(8, 1.0));
    const Certificate c = solve_mk(inst);
    ASSERT_TRUE(c.optimal());
    EXPECT_NEAR(value_of(c), 1.0, 1e-12);
    EXPECT_NEAR(c.primal_value.value(), -1.0, 1e-12);
    EXPECT_TRUE(c.report.pass);
}

TEST(Mk, RejectsWrongKindAndShapes) {
    auto inst = mk2x2({0.5, 0.5}, {0.5, 0.5});
    inst.cost.pop_back();
    EXPECT_THROW(solve_mk(inst), std::invalid_argument);
    EXPECT_THROW(solve_mk(capacity2x2(2.0)), UnsupportedProblem);
}

TEST(Capacity, SlackCapMatchesMk) {
    const Certificate c = solve_capacity(capacity2x2(2.0));
    ASSERT_TRUE(c.optimal());
    EXPECT_NEAR(value_of(c), 0.0, 1e-12);
    EXPECT_TRUE(c.report.pass);
}

TEST(Capacity, BindingCap) {
    const Certificate c = solve_capacity(capacity2x2(1.2));
    ASSERT_TRUE(c.optimal());
    EXPECT_NEAR(value_of(c), 0.4, 1e-9);
    EXPECT_LE(std::abs(c.gap.value()), 1e-9);
    expect_coupling(c.lambda, {0.3, 0.2, 0.2, 0.3}, 1e-12);
    EXPECT_TRUE(c.report.pass);
    EXPECT_TRUE(c.notes.empty());
}

TEST(Capacity, UnitDensityForcesProduct) {
    const Certificate c = solve_capacity(capacity2x2(1.0));
    ASSERT_TRUE(c.optimal());
    EXPECT_NEAR(value_of(c), 0.5, 1e-9);
    expect_coupling(c.lambda, {0.25, 0.25, 0.25, 0.25}, 1e-12);
    EXPECT_FALSE(c.notes.empty());
}

TEST(Capacity, TightCapIsInfeasibleWithWitness) {
    const Certificate c = solve_capacity(capacity2x2(0.5));
    ASSERT_EQ(c.status, SolveStatus::Infeasible);
    ASSERT_TRUE(c.witness.has_value());
    EXPECT_LT(c.witness->ray_value, -1e-9);
}

TEST(Schrodinger, UniformReferenceIsFixedPoint) {
    const Certificate c = solve_schrodinger_ipf(schrodinger2x2({0.5, 0.5}, {0.5, 0.5}, {0.25, 0.25, 0.25, 0.25}));
    ASSERT_TRUE(c.optimal());
    EXPECT_EQ(c.iterations, 1u);
    expect_coupling(c.lambda, {0.25, 0.25, 0.25, 0.25}, 1e-15);
}

TEST(Schrodinger, UniformReferenceGivesProduct) {
    const auto inst = schrodinger2x2({0.7, 0.3}, {0.4, 0.6}, {0.25, 0.25, 0.25, 0.25});
    const Certificate c = solve_schrodinger_ipf(inst);
    ASSERT_TRUE(c.optimal());
    expect_coupling(c.lambda, {0.28, 0.42, 0.12, 0.18}, 1e-12);
    const auto brute = oracle::kl_projection_2xn({0.7, 0.3}, {0.4, 0.6}, {1, 1, 1, 1});
    expect_coupling(c.lambda, brute, 1e-4);
}

TEST(Schrodinger, FeasibleReferenceIsOptimal) {
    const Certificate c = solve_schrodinger_ipf(schrodinger2x2({0.5, 0.5}, {0.5, 0.5}, {0.4, 0.1, 0.1, 0.4}));
    ASSERT_TRUE(c.optimal());
    expect_coupling(c.lambda, {0.4, 0.1, 0.1, 0.4}, 1e-15);
    EXPECT_NEAR(c.dual_value.value(), 0.0, 1e-15);
}

TEST(Schrodinger, DualObjectiveExamples) {
    const auto inst = schrodinger2x2({0.5, 0.5}, {0.5, 0.5}, {0.25, 0.25, 0.25, 0.25});
    EXPECT_NEAR(eval_schrodinger_dual(Potentials::zeros(inst.shape()), inst), 0.0, 1e-15);
    Potentials x = Potentials::zeros(inst.shape());
    x[0][0] = std::log(2.0);
    // Independent arithmetic: sum_t x_t.mu_t + ln sum_s R(s) exp(-sum_t x_t(s_t)).
    const double direct = 0.5 * std::log(2.0) + std::log(0.25 * (0.5 + 0.5 + 1.0 + 1.0));
    EXPECT_NEAR(eval_schrodinger_dual(x, inst), direct, 1e-15);
    EXPECT_NEAR(direct, 0.5 * std::log(2.0) + std::log(0.75), 1e-15);
}

TEST(Schrodinger, DualAtOptimumIsNegativeEntropy) {
    const auto inst = schrodinger2x2({0.7, 0.3}, {0.4, 0.6}, {0.4, 0.1, 0.1, 0.4});
    const Certificate c = solve_schrodinger_ipf(inst);
    ASSERT_TRUE(c.optimal());
    const double kl = oracle::kl(c.lambda.mass(), {0.4, 0.1, 0.1, 0.4});
    EXPECT_NEAR(eval_schrodinger_dual(c.x, inst), -kl, 1e-6);
    EXPECT_LE(std::abs(c.gap.value()), 1e-9);
}

TEST(Schrodinger, DualObjectiveDecreasesAcrossCycles) {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + trial % 3;
        const auto inst = make_schrodinger(grid({3, n}), probs({oracle::rational_probability(rng, 3),
                                                                oracle::rational_probability(rng, n)}),
                                           oracle::rational_probability(rng, 3 * n));
        IpfState state(inst);
        double prev = eval_schrodinger_dual(state.potentials(), inst);
        for (int k = 0; k < 30; ++k) {
            for (std::size_t t = 0; t < 2; ++t) {
                state.update_axis(t);
                const auto lam = state.coupling();
                const auto& mu = inst.fixed_marginal(t);
                std::vector<double> lt(mu.size(), 0.0);
                for (std::size_t f = 0; f < lam.size(); ++f) lt[inst.shape().coordinate(f, t)] += lam[f];
                for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_NEAR(lt[i], mu[i], 1e-15);
            }
            const double now = eval_schrodinger_dual(state.potentials(), inst);
            EXPECT_LE(now, prev + 1e-14);
            prev = now;
        }
    }
}

TEST(Schrodinger, MatchesBruteForceProjection) {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + trial % 2;
        const auto a = oracle::rational_probability(rng, 2, 3);
        const auto b = oracle::rational_probability(rng, n, 3);
        const auto ref = oracle::rational_probability(rng, 2 * n, 4);
        const Certificate c = solve_schrodinger_ipf(make_schrodinger(grid({2, n}), probs({a, b}), ref));
        ASSERT_TRUE(c.optimal());
        expect_coupling(c.lambda, oracle::kl_projection_2xn(a, b, ref), 1e-4);
    }
}

TEST(Schrodinger, ReconstructsFromPotentials) {
    const std::vector<double> ref{0.1, 0.2, 0.3, 0.15, 0.15, 0.1};
    const auto inst = make_schrodinger(grid({2, 3}), probs({{0.25, 0.75}, {0.5, 0.25, 0.25}}), ref);
    const Certificate c = solve_schrodinger_ipf(inst);
    ASSERT_TRUE(c.optimal());
    for (std::size_t f = 0; f < ref.size(); ++f) {
        const double rebuilt = ref[f] * std::exp(-c.x.sum_at(inst.shape(), f));
        EXPECT_NEAR(c.lambda[f], rebuilt, 1e-9 * rebuilt);
    }
}

TEST(Schrodinger, LogDomainForTinyReferenceCells) {
    // A whole row of R below the underflow threshold: exp(-x_0) alone would overflow.
    const double eps = 1e-310;
    const auto inst = make_schrodinger(grid({2, 3}), probs({{0.5, 0.5}, {0.25, 0.25, 0.5}}),
                                       {eps, eps, 2.0 * eps, 1.0, 3.0, 1.0});
    const Certificate c = solve_schrodinger_ipf(inst);
    ASSERT_TRUE(c.optimal());
    EXPECT_NE(std::find(c.notes.begin(), c.notes.end(), "log-domain updates"), c.notes.end());
    // Row 0 of R is proportional to (1, 1, 2), so the cross ratios of the projection fix it up to scale.
    const auto brute = oracle::kl_projection_2xn({0.5, 0.5}, {0.25, 0.25, 0.5}, {1.0, 1.0, 2.0, 1.0, 3.0, 1.0});
    expect_coupling(c.lambda, brute, 1e-4);
    EXPECT_LE(c.report.max_residual(), 1e-7);
    EXPECT_NEAR(dual_objective(inst, c.lambda).value(), c.dual_value.value(), 1e-9);
    EXPECT_LE(std::abs(c.gap.value()), 1e-9 * (1.0 + std::abs(c.dual_value.value())));
}

TEST(Schrodinger, UnreachableSupportThrows) {
    const auto inst = schrodinger2x2({0.7, 0.3}, {0.4, 0.6}, {0.5, 0.0, 0.0, 0.5});
    EXPECT_THROW(solve_schrodinger_ipf(inst), InfeasibleSupport);
}

TEST(Schrodinger, PartialSupportStillSolves) {
    // R misses a cell, but a coupling on supp R exists.
    const auto inst = schrodinger2x2({0.5, 0.5}, {0.5, 0.5}, {0.5, 0.0, 0.0, 0.5});
    const Certificate c = solve_schrodinger_ipf(inst);
    ASSERT_TRUE(c.optimal());
    expect_coupling(c.lambda, {0.5, 0.0, 0.0, 0.5}, 1e-12);
    EXPECT_FALSE(c.notes.empty());
}

TEST(Schrodinger, IterationCapGivesNotConverged) {
    const auto inst = schrodinger2x2({0.7, 0.3}, {0.4, 0.6}, {0.4, 0.1, 0.1, 0.4});
    const Certificate c = solve_schrodinger_ipf(inst, 1e-10, 2);
    EXPECT_EQ(c.status, SolveStatus::NotConverged);
    EXPECT_EQ(c.iterations, 2u);
}

TEST(Superhedge, StraddlePrice) {
    const Certificate c = solve_superhedge(straddle({0.5, 0.5}, {1.0, 1.0}));
    ASSERT_TRUE(c.optimal());
    EXPECT_NEAR(c.primal_value.value(), 1.0, 1e-9);
    EXPECT_NEAR(c.gap.value(), 0.0, 1e-9);
    expect_coupling(c.lambda, {0.5, 0.5}, 1e-12);
    for (double r : martingale_residuals(straddle({0.5, 0.5}, {1.0, 1.0}), c.lambda.mass())) EXPECT_LE(r, 1e-10);
    EXPECT_TRUE(c.report.pass);
}

TEST(Superhedge, ZeroPayoff) {
    const Certificate c = solve_superhedge(straddle({0.5, 0.5}, {0.0, 0.0}));
    ASSERT_TRUE(c.optimal());
    EXPECT_NEAR(c.primal_value.value(), 0.0, 1e-12);
    for (const auto& xt : c.x.values) {
        for (double v : xt) EXPECT_EQ(v, 0.0);
    }
    for (const auto& zt : c.z->z) {
        for (double v : zt) EXPECT_EQ(v, 0.0);
    }
}

TEST(Superhedge, MeansDifferIsInfeasible) {
    const auto inst = straddle({1.0, 0.0}, {1.0, 1.0});
    const Certificate c = solve_superhedge(inst);
    ASSERT_EQ(c.status, SolveStatus::Infeasible);
    ASSERT_TRUE(c.witness.has_value() && c.witness->z.has_value());
    EXPECT_LT(c.witness->value.value(), -1e-9);
    // The witness is an arbitrage: nonnegative payout on every cell at negative cost.
    for (std::size_t f = 0; f < 2; ++f) {
        EXPECT_GE(c.witness->x.sum_at(inst.shape(), f) + hedge_gains(inst, *c.witness->z, f), -1e-9);
    }
}

TEST(Superhedge, TwoPeriodMartingaleResiduals) {
    const auto g = state_grid({{2.0}, {1.0, 3.0}, {0.0, 2.0, 4.0}});
    std::vector<double> payoff(g.size());
    for (std::size_t f = 0; f < g.size(); ++f) {
        const double s2 = g.axis(2).coords[g.shape().coordinate(f, 2)][0];
        payoff[f] = std::max(s2 - 2.0, 0.0);
    }
    const auto inst = make_superhedge(g, probs({{1.0}, {0.5, 0.5}, {0.25, 0.5, 0.25}}), payoff);
    const Certificate c = solve_superhedge(inst);
    ASSERT_TRUE(c.optimal());
    EXPECT_NEAR(c.primal_value.value(), 0.5, 1e-9);
    EXPECT_LE(std::abs(c.gap.value()), 1e-9);
    for (double r : martingale_residuals(inst, c.lambda.mass())) EXPECT_LE(r, 1e-8);
    EXPECT_TRUE(c.report.pass);
}

TEST(Strassen, ProductFeasible) {
    const auto inst = strassen({singleton({0.5, 0.5}), singleton({0.5, 0.5})}, {});
    const StrassenResult r = check_strassen(inst);
    ASSERT_TRUE(r.feasible);
    for (std::size_t t = 0; t < 2; ++t) {
        EXPECT_LE(constraint_violation(inst.polytope_marginal(t).constraints, marginal(r.lambda, t).mass()), 1e-9);
    }
}

TEST(Strassen, DiagonalSupportSeparated) {
    const auto inst = strassen({singleton({1.0, 0.0}), singleton({0.0, 1.0})},
                               {row({0, 1, 0, 0}, lp::Sense::Equal, 0.0), row({0, 0, 1, 0}, lp::Sense::Equal, 0.0)});
    const StrassenResult r = check_strassen(inst);
    ASSERT_FALSE(r.feasible);
    EXPECT_LE(r.separation.value(), -1e-6);
    EXPECT_NEAR(strassen_separation(inst, r.witness).value(), r.separation.value(), 1e-12);
}

TEST(Strassen, UnequalTotalsInfeasible) {
    const auto inst = strassen({singleton({0.5, 0.5}), singleton({1.0, 1.0})}, {});
    const StrassenResult r = check_strassen(inst);
    ASSERT_FALSE(r.feasible);
    EXPECT_LT(r.separation.value(), -1e-6);
    EXPECT_EQ(solve_strassen(inst).status, SolveStatus::Infeasible);
}

TEST(Generic, DispatchMatchesSpecializedSolvers) {
    auto mk = mk2x2({0.7, 0.3}, {0.4, 0.6});
    mk.kind = ProblemKind::GenericDual;
    mk.family = FamilyTag::IndicatorHalfline;
    EXPECT_NEAR(value_of(solve_generic_dual(mk)), value_of(solve_mk(mk2x2({0.7, 0.3}, {0.4, 0.6}))), 1e-12);

    auto cap = capacity2x2(1.2);
    cap.kind = ProblemKind::GenericDual;
    cap.family = FamilyTag::CapacityHinge;
    EXPECT_NEAR(value_of(solve_generic_dual(cap)), 0.4, 1e-9);

    auto ent = schrodinger2x2({0.7, 0.3}, {0.4, 0.6}, {0.25, 0.25, 0.25, 0.25});
    const Certificate direct = solve_schrodinger_ipf(ent);
    ent.kind = ProblemKind::GenericDual;
    ent.family = FamilyTag::ScaledExp;
    const Certificate routed = solve_generic_dual(ent);
    for (std::size_t f = 0; f < 4; ++f) EXPECT_NEAR(routed.lambda[f], direct.lambda[f], 1e-10);
    EXPECT_EQ(solve(ent).lambda, routed.lambda);
}

TEST(Generic, PolytopeMarginalWithIndicator) {
    ProblemInstance p;
    p.grid = grid({2, 2});
    p.kind = ProblemKind::GenericDual;
    p.family = FamilyTag::IndicatorHalfline;
    p.marginals = {FixedMarginal{DiscreteMeasure::probability({0.5, 0.5})},
                   PolytopeMarginal{{row({1, 1}, lp::Sense::Equal, 1.0), row({1, 0}, lp::Sense::GreaterEqual, 0.2)}}};
    p.cost = {0, 1, 2, 1};
    const Certificate c = solve_generic_dual(p);
    ASSERT_TRUE(c.optimal());
    EXPECT_NEAR(value_of(c), 0.5, 1e-9);
    EXPECT_LE(std::abs(c.gap.value()), 1e-9);
}

TEST(Generic, EntropyWithPolytopeUnsupported) {
    ProblemInstance p;
    p.grid = grid({2, 2});
    p.kind = ProblemKind::GenericDual;
    p.family = FamilyTag::ScaledExp;
    p.marginals = {FixedMarginal{DiscreteMeasure::probability({0.5, 0.5})},
                   PolytopeMarginal{{row({1, 1}, lp::Sense::Equal, 1.0)}}};
    p.reference = {0.25, 0.25, 0.25, 0.25};
    EXPECT_THROW(solve_generic_dual(p), UnsupportedProblem);
}

TEST(Duality, WeakDualityOnRandomCandidates) {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int kind = trial % 3;
        ProblemInstance inst;
        if (kind == 2) {
            inst = make_schrodinger(grid({2, 3}), probs({oracle::rational_probability(rng, 2),
                                                         oracle::rational_probability(rng, 3)}),
                                    oracle::rational_probability(rng, 6));
        } else {
            inst = random_transport(rng, kind == 1);
        }
        const GridShape& sh = inst.shape();
        Potentials x = Potentials::zeros(sh);
        for (auto& xt : x.values) {
            for (double& v : xt) v = u(rng);
        }
        if (kind == 0) {
            // Shift the last axis so that -sum_t x_t <= c everywhere.
            double need = -kInf;
            for (std::size_t f = 0; f < sh.size(); ++f) need = std::max(need, -inst.cost[f] - x.sum_at(sh, f));
            for (double& v : x.values.back()) v += need;
        }
        const auto ms = inst.fixed_marginals();
        const Coupling lam(sh, product_mass(sh, ms));
        const ExtReal p = primal_objective(inst, x, nullptr, 1e-12);
        const ExtReal d = dual_objective(inst, lam);
        ASSERT_TRUE(p.is_finite() && d.is_finite()) << trial;
        EXPECT_GE(p.value() + d.value(), -1e-9) << "trial " << trial;
    }
}

TEST(Duality, GaugeInvarianceOfPrimalObjective) {
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const auto shift = [&](Potentials x) {
        double total = 0.0;
        for (std::size_t t = 0; t + 1 < x.num_axes(); ++t) {
            const double c = u(rng);
            total += c;
            for (double& v : x[t]) v += c;
        }
        for (double& v : x.values.back()) v -= total;
        return x;
    };
    for (int trial = 0; trial < 60; ++trial) {
        const ProblemInstance inst = random_transport(rng, trial % 2 == 1);
        const Certificate c = solve(inst);
        ASSERT_TRUE(c.optimal());
        const double before = primal_objective(inst, c.x, nullptr, 1e-9).value();
        EXPECT_NEAR(primal_objective(inst, shift(c.x), nullptr, 1e-9).value(), before, 1e-10);
    }
    const auto ent = schrodinger2x2({0.7, 0.3}, {0.4, 0.6}, {0.4, 0.1, 0.1, 0.4});
    const Certificate e = solve(ent);
    EXPECT_NEAR(primal_objective(ent, shift(e.x)).value(), primal_objective(ent, e.x).value(), 1e-10);
    EXPECT_NEAR(eval_schrodinger_dual(shift(e.x), ent), eval_schrodinger_dual(e.x, ent), 1e-10);
    const auto sh = straddle({0.5, 0.5}, {1.0, 1.0});
    const Certificate s = solve(sh);
    EXPECT_NEAR(primal_objective(sh, shift(s.x), &*s.z, 1e-9).value(), s.primal_value.value(), 1e-10);
}
