#include "engel/engel_verify.hpp"
#include "engel/prolongations.hpp"
#include "engel/sampling.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace engel;

namespace {

void expect_engel(EngelStructure const& s, std::size_t n = 300)
{
    auto r = verify_engel(s, n);
    EXPECT_TRUE(r.pass) << s.provenance;
    EXPECT_TRUE(r.cauchy_pass) << s.provenance;
    for (auto const& p : r.points)
    {
        EXPECT_EQ(p.rank_D, 2);
        EXPECT_EQ(p.rank_E, 3);
        EXPECT_EQ(p.rank_EE, 4);
        if (!p.pass)
            break;
    }
}

}  // namespace

TEST(Verify, DarbouxPresets)
{
    expect_engel(darboux_standard());
    expect_engel(darboux_long());
}

TEST(Verify, IntegrableCounterexampleFails)
{
    auto r = verify_engel(integrable_counterexample(), 50);
    EXPECT_FALSE(r.pass);
    ASSERT_FALSE(r.points.empty());
    EXPECT_EQ(r.points.front().rank_E, 2);
}

TEST(Verify, EmptySampleCountRejected)
{
    EXPECT_THROW(verify_engel(darboux_standard(), 0), EmptyInput);
}

TEST(Verify, ParallelMatchesSerial)
{
    for (auto const& s : {darboux_long(), cartan_prolongation(contact_r3())})
    {
        auto a = verify_engel(s, 200);
        auto b = verify_engel_serial(s, 200);
        ASSERT_EQ(a.points.size(), b.points.size());
        EXPECT_EQ(a.n_pass, b.n_pass);
        EXPECT_EQ(a.max_cauchy_angle_error, b.max_cauchy_angle_error);
        for (std::size_t i = 0; i < a.points.size(); ++i)
        {
            EXPECT_EQ(a.points[i].point, b.points[i].point);
            EXPECT_EQ(a.points[i].cauchy_angle_error, b.points[i].cauchy_angle_error);
        }
    }
}

TEST(Verify, DeterministicUnderThreadCount)
{
    set_worker_count(1);
    auto a = verify_engel(darboux_long(), 100);
    set_worker_count(3);
    auto b = verify_engel(darboux_long(), 100);
    set_worker_count(0);
    EXPECT_EQ(a.max_cauchy_angle_error, b.max_cauchy_angle_error);
    EXPECT_EQ(a.n_pass, b.n_pass);
}

TEST(Cauchy, DarbouxIsDw)
{
    auto s = darboux_standard();
    for (auto const& p : sample_domain(s.model.domain(), 200, 11))
        EXPECT_LT(oracle::line_angle(cauchy_characteristic(s, p), Vec::Unit(4, 3)), 1e-6);
}

TEST(Cauchy, InvariantUnderRecombiningE)
{
    // E spanned by (dw + X, X - dz, dz) has the same kernel line.
    auto s = darboux_standard();
    std::vector<Section> E = {s.E[0] + s.E[1], s.E[1] - s.E[2], s.E[2].scaled(3.0)};
    for (auto const& p : sample_domain(s.model.domain(), 50, 5))
        EXPECT_LT(oracle::line_angle(cauchy_characteristic(s, E, p), Vec::Unit(4, 3)), 1e-6);
}

TEST(Cauchy, DegenerateKernelForNonEngel)
{
    // Integrable hyperplane <dx, dy, dz>: the skew pairing on E vanishes.
    auto s = integrable_counterexample();
    s.E = {Section::coordinate(4, 0), Section::coordinate(4, 1), Section::coordinate(4, 2)};
    s.transverse = Section::coordinate(4, 3);
    Vec p = Vec::Zero(s.dim());
    EXPECT_THROW(cauchy_characteristic(s, p), DegenerateKernel);
}
