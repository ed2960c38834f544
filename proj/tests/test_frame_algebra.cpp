#include "engel/frame_algebra.hpp"
#include "engel/geometry_models.hpp"
#include "engel/sampling.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace engel;

namespace {

Section darboux_X()
{
    return Section(4, [](Vec const& p) { return oracle::darboux_X(p); });
}

//! Random polynomial field of degree 2 on R^n with a fixed seed.
Section random_field(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> N(0, 1);
    Mat lin(n, n), quad(n, n);
    Vec c(n);
    for (int i = 0; i < n; ++i)
    {
        c[i] = N(rng);
        for (int j = 0; j < n; ++j)
        {
            lin(i, j) = N(rng);
            quad(i, j) = 0.3 * N(rng);
        }
    }
    return Section(n, [c, lin, quad](Vec const& p) -> Vec {
        Vec sq = p.array().square().matrix();
        return c + lin * p + quad * sq;
    });
}

}  // namespace

TEST(BracketChart, WithDarbouxFrameGivesDz)
{
    Vec p = Vec::Zero(4);
    Vec b = bracket_chart(Section::coordinate(4, 3), darboux_X(), p);
    EXPECT_LT((b - oracle::darboux_dw_X()).norm(), 1e-9);
}

TEST(BracketChart, SelfBracketVanishes)
{
    Vec p(4);
    p << 0.3, -0.2, 0.7, 1.1;
    EXPECT_LT(bracket_chart(darboux_X(), darboux_X(), p).norm(), 1e-12);
}

TEST(BracketChart, XWithDyVanishesAtRandomPoints)
{
    auto pts = sample_domain(Domain::cube(4, 1.0), 50, 7);
    for (auto const& p : pts)
        EXPECT_LT(bracket_chart(darboux_X(), Section::coordinate(4, 1), p).norm(), 1e-8);
}

TEST(BracketChart, DomainViolationOutsideChart)
{
    Domain d = Domain::cube(4, 1.0);
    Vec p = Vec::Constant(4, 5.0);
    EXPECT_THROW(bracket_chart(darboux_X(), Section::coordinate(4, 3), p, 1e-5, &d),
                 DomainViolation);
}

TEST(BracketChart, NonFiniteFieldThrows)
{
    Section bad(2, [](Vec const& p) {
        Vec v(2);
        v << 1 / p[0], 0;
        return v;
    });
    EXPECT_THROW(bracket_chart(bad, Section::coordinate(2, 0), Vec::Zero(2)),
                 NonFiniteEvaluation);
}

TEST(BracketLie, MagneticRelations)
{
    for (double k : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0})
    {
        auto ext = magnetic_extension(constant_curvature_ut(k));
        auto const& m = ext.model.lie_model();
        Vec Xt = m.unit("Xt"), Yt = m.unit("Yt"), Zt = m.unit("Zt"), Th = m.unit("Theta");
        EXPECT_LT((bracket_lie(m, Xt, Yt) - k * Zt).norm(), 1e-14);
        EXPECT_LT(bracket_lie(m, Th, Zt).norm(), 1e-14);
        Vec W = Xt + Zt - (1 + k) * Th;
        EXPECT_LT((bracket_lie(m, W, Th) + Yt).norm(), 1e-14);
    }
}

TEST(BracketLie, BadStructureConstantsRejected)
{
    LieModel m({"a", "b", "c"});
    Vec v(3);
    v << 1, 0, 0;
    m.set(0, 1, v);  // [a,b] = a
    v << 0, 1, 0;
    m.set(0, 2, v);  // [a,c] = b; then [c,[a,b]] = -b and Jacobi fails
    EXPECT_GT(m.jacobi_defect(), 1e-3);
    EXPECT_THROW(FrameModel::lie(m, Domain::cube(3, 1.0), "bad"), InvalidStructureConstants);
}

TEST(Rank, StandardExamples)
{
    Vec p = Vec::Zero(4);
    Vec X = oracle::darboux_X(p);
    Vec dw = Vec::Unit(4, 3), dz = Vec::Unit(4, 2), dy = Vec::Unit(4, 1);
    EXPECT_EQ(distribution_rank({X, dw}, 1e-8), 2);
    EXPECT_EQ(distribution_rank({X, dw, dz}, 1e-8), 3);
    EXPECT_EQ(distribution_rank({X, dw, dz, dy}, 1e-8), 4);
    EXPECT_THROW(distribution_rank({}, 1e-8), EmptyInput);
    EXPECT_THROW(distribution_rank({X, Vec::Zero(3)}, 1e-8), DimensionMismatch);
}

TEST(Rank, MarginalFlagNearTolerance)
{
    Vec a = Vec::Unit(3, 0), b = 1e-8 * Vec::Unit(3, 1);
    auto r = rank_info({a, b}, 1e-8);
    EXPECT_TRUE(r.marginal);
}

TEST(Rank, GLInvariance)
{
    std::mt19937_64 rng(20240501);
    std::normal_distribution<double> N(0, 1);
    for (int trial = 0; trial < 200; ++trial)
    {
        int k = 1 + trial % 4;
        int r = 1 + trial % k;
        std::vector<Vec> vs;
        Mat basis(4, r);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < r; ++j)
                basis(i, j) = N(rng);
        for (int j = 0; j < k; ++j)
        {
            Vec c(r);
            for (int i = 0; i < r; ++i)
                c[i] = N(rng);
            vs.push_back(basis * c);
        }
        Mat G(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                G(i, j) = N(rng);
        if (std::abs(G.determinant()) < 0.1)
            continue;
        std::vector<Vec> gv;
        for (auto const& v : vs)
            gv.push_back(G * v);
        int base = distribution_rank(vs, 1e-8);
        EXPECT_EQ(base, distribution_rank(gv, 1e-8));
        EXPECT_EQ(base, r);
    }
}

TEST(DerivedDistribution, Examples)
{
    auto fm = FrameModel::chart(Domain::cube(4, 2.0), "R4");
    DistributionSpec d{&fm, {darboux_X(), Section::coordinate(4, 3)}};
    Vec p(4);
    p << 0.1, 0.2, -0.3, 0.4;
    auto dd = derived_distribution(d, p, 1e-8);
    ASSERT_EQ(dd.size(), 3u);
    Mat B(4, 3);
    for (int i = 0; i < 3; ++i)
        B.col(i) = dd[static_cast<std::size_t>(i)];
    EXPECT_LT(angle_to_span(Vec::Unit(4, 2), B), 1e-8);

    DistributionSpec flat{&fm, {Section::coordinate(4, 0), Section::coordinate(4, 1)}};
    EXPECT_EQ(derived_distribution(flat, p, 1e-8).size(), 2u);

    DistributionSpec E{&fm, {darboux_X(), Section::coordinate(4, 3), Section::coordinate(4, 2)}};
    EXPECT_EQ(derived_distribution(E, p, 1e-8).size(), 4u);
}

TEST(Property, BracketAntisymmetryAndJacobi)
{
    std::mt19937_64 rng(20240501);
    auto pts = sample_domain(Domain::cube(3, 1.0), 20, 3);
    for (int trial = 0; trial < 10; ++trial)
    {
        auto a = random_field(3, rng), b = random_field(3, rng), c = random_field(3, rng);
        auto br = [](Section const& u, Section const& v) {
            return Section(3, [u, v](Vec const& q) { return bracket_chart(u, v, q, 1e-4); });
        };
        for (auto const& p : pts)
        {
            EXPECT_LT((bracket_chart(a, b, p) + bracket_chart(b, a, p)).norm(), 1e-9);
            Vec jac = bracket_chart(a, br(b, c), p, 1e-3) + bracket_chart(b, br(c, a), p, 1e-3)
                      + bracket_chart(c, br(a, b), p, 1e-3);
            EXPECT_LT(jac.norm(), 1e-4);
        }
    }
}

TEST(Property, LieModelsSatisfyJacobi)
{
    for (double k : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0})
    {
        auto ut = constant_curvature_ut(k);
        EXPECT_LT(ut.model.jacobi_defect(), 1e-14);
        EXPECT_LT(ut.model.antisymmetry_defect(), 1e-14);
        auto mag = magnetic_extension(ut);
        EXPECT_LT(mag.model.lie_model().jacobi_defect(), 1e-14);
    }
}

TEST(Domain, WrapAndDisplacement)
{
    Domain d = Domain::cube(2, 1.0);
    d.set_period(1, 2.0);
    Vec p(2);
    p << 0.5, 2.5;
    Vec w = d.wrap(p);
    EXPECT_NEAR(w[1], 0.5, 1e-15);
    Vec a(2), b(2);
    a << 0, 0.95;
    b << 0, -0.95;
    EXPECT_NEAR(d.displacement(a, b)[1], -0.1, 1e-12);
}
