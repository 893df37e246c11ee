#include <gtest/gtest.h>

#include <random>

#include "otdual/extended_real.hpp"
#include "otdual/model.hpp"

using namespace otdual;

namespace {

GridShape shape_of(std::vector<std::size_t> sizes) {
    std::vector<MarginalSpace> axes;
    for (std::size_t n : sizes) axes.push_back(MarginalSpace::sized(n));
    return build_product_grid(std::move(axes)).shape();
}

Coupling coupling2x2(std::vector<double> mass) { return Coupling(GridShape({2, 2}), std::move(mass)); }

}  // namespace

TEST(Grid, RowMajorStrides) {
    const GridShape g = shape_of({2, 3});
    EXPECT_EQ(g.size(), 6u);
    EXPECT_EQ(g.strides(), (std::vector<std::size_t>{3, 1}));
}

TEST(Grid, SingletonAxis) { EXPECT_EQ(shape_of({1}).size(), 1u); }

TEST(Grid, MultiFlatRoundTrip) {
    const GridShape g = shape_of({2, 2, 2});
    EXPECT_EQ(g.size(), 8u);
    const std::vector<std::size_t> idx{1, 0, 1};
    EXPECT_EQ(g.flat(idx), 5u);
    EXPECT_EQ(g.multi(5), idx);
    const GridShape h = shape_of({3, 4, 2});
    for (std::size_t f = 0; f < h.size(); ++f) EXPECT_EQ(h.flat(h.multi(f)), f);
}

TEST(Grid, RejectsDegenerateAxes) {
    EXPECT_THROW(build_product_grid({}), std::invalid_argument);
    MarginalSpace empty;
    EXPECT_THROW(build_product_grid({MarginalSpace::sized(2), empty}), std::invalid_argument);
    EXPECT_THROW(GridShape({2, 0}), std::invalid_argument);
}

TEST(Grid, AxisInvariants) {
    MarginalSpace m = MarginalSpace::sized(2);
    m.coords = {{1.0}, {2.0, 3.0}};
    EXPECT_THROW(build_product_grid({m}), std::invalid_argument);
    MarginalSpace p = MarginalSpace::sized(2);
    p.psi = {1.0, 0.5};
    EXPECT_THROW(build_product_grid({p}), std::invalid_argument);
    p.psi = {1.0, 2.0};
    const ProductGrid g = build_product_grid({p, MarginalSpace::sized(2)});
    EXPECT_DOUBLE_EQ(g.psi(g.flat(std::vector<std::size_t>{1, 0})), 3.0);
}

TEST(Measure, ProbabilityFlag) {
    EXPECT_NO_THROW(DiscreteMeasure::probability({0.25, 0.75}));
    EXPECT_THROW(DiscreteMeasure::probability({0.25, 0.7}), std::invalid_argument);
    EXPECT_THROW(DiscreteMeasure({-0.1, 1.1}), std::invalid_argument);
    EXPECT_THROW(Coupling(GridShape({2}), {0.5}), std::invalid_argument);
}

TEST(Marginal, UniformCoupling) {
    const auto m = marginal(coupling2x2({0.25, 0.25, 0.25, 0.25}), 0);
    EXPECT_EQ(m.mass(), (std::vector<double>{0.5, 0.5}));
}

TEST(Marginal, DiagonalCoupling) {
    const auto m = marginal(coupling2x2({0.5, 0.0, 0.0, 0.5}), 1);
    EXPECT_EQ(m.mass(), (std::vector<double>{0.5, 0.5}));
}

TEST(Marginal, ColumnSums) {
    const auto m = marginal(coupling2x2({0.4, 0.3, 0.0, 0.3}), 1);
    EXPECT_NEAR(m[0], 0.4, 1e-15);
    EXPECT_NEAR(m[1], 0.6, 1e-15);
    EXPECT_THROW(marginal(coupling2x2({0.4, 0.3, 0.0, 0.3}), 2), std::out_of_range);
}

TEST(Marginal, TotalPreservedAndCommutesWithScaling) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const GridShape g({3, 2, 4});
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> mass(g.size());
        for (double& v : mass) v = u(rng);
        const Coupling lam(g, mass);
        const double alpha = 0.5 + u(rng);
        for (std::size_t t = 0; t < 3; ++t) {
            const auto m = marginal(lam, t);
            EXPECT_NEAR(m.total(), lam.total(), 1e-12);
            const auto scaled = marginal(lam.scaled(alpha), t);
            for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(scaled[i], alpha * m[i], 2e-15 * scaled[i]);
        }
    }
}

TEST(Marginal, ScalingByPowerOfTwoIsExact) {
    const Coupling lam(GridShape({2, 3}), {0.1, 0.2, 0.05, 0.15, 0.3, 0.2});
    for (std::size_t t = 0; t < 2; ++t) {
        const auto m = marginal(lam, t);
        const auto s = marginal(lam.scaled(0.25), t);
        for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(s[i], 0.25 * m[i]);
    }
}

TEST(Potentials, ShapeValidation) {
    const GridShape g({2, 3});
    Potentials x = Potentials::zeros(g);
    EXPECT_NO_THROW(x.validate(g));
    x[1].push_back(0.0);
    EXPECT_THROW(x.validate(g), std::invalid_argument);
    Potentials y = Potentials::zeros(g);
    y[0][0] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(y.validate(g), std::invalid_argument);
    Potentials z{{{1.0, 2.0}, {10.0, 20.0, 30.0}}};
    EXPECT_DOUBLE_EQ(z.sum_at(g, 5), 32.0);
}

TEST(ExtendedReal, SaturatingArithmetic) {
    const ExtReal inf = ExtReal::infinity();
    EXPECT_TRUE((inf + 3.0).is_pos_inf());
    EXPECT_TRUE((ExtReal::neg_infinity() + -1.0).is_neg_inf());
    EXPECT_THROW(inf + ExtReal::neg_infinity(), UndefinedArithmetic);
    EXPECT_THROW(inf - inf, UndefinedArithmetic);
    EXPECT_THROW(ExtReal(std::nan("")), UndefinedArithmetic);
    EXPECT_EQ(inf.weighted(0.0), ExtReal(0.0));
    EXPECT_THROW((void)inf.weighted(-1.0), UndefinedArithmetic);
    EXPECT_LT(ExtReal(1e300), inf);
}
