#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lorentz/coefficients.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/geodesics.hpp"
#include "lorentz/models.hpp"
#include "oracles.hpp"

using namespace lorentz;

namespace {

IndexSet in_box(const FiniteCausalSpace& s, std::vector<double> lo, std::vector<double> hi)
{
    IndexSet out;
    for (int i = 0; i < s.size(); ++i) {
        bool in = true;
        for (int k = 0; k < s.dim(); ++k) in = in && s.point(i)[k] >= lo[k] - 1e-12 && s.point(i)[k] <= hi[k] + 1e-12;
        if (in) out.push_back(i);
    }
    return out;
}

FiniteCausalSpace flat_box(std::vector<double> lo, std::vector<double> hi, double h)
{
    return discretize(ModelSpacetime::minkowski(int(lo.size()), Region::box(lo, hi)), SamplerConfig::lattice(h));
}

}  // namespace

TEST(Interpolation, DiracPathAndEndpoints)
{
    const auto s = flat_box({0, -1}, {2, 1}, 0.1);
    const double a[2] = {0, 0}, b[2] = {2, 1};
    const int x = s.snap(a), y = s.snap(b);
    Coupling plan;
    plan.mu = dirac(x);
    plan.nu = dirac(y);
    plan.pairs = {{x, y, 1.0}};
    const auto path = displacement_interpolation(s, plan, {0.0, 0.5, 1.0});
    EXPECT_EQ(path.measures[0].support, plan.mu.support);
    EXPECT_EQ(path.measures[0].mass, plan.mu.mass);
    EXPECT_EQ(path.measures[2].support, plan.nu.support);
    ASSERT_EQ(path.measures[1].support.size(), 1u);
    const double mid[2] = {1.0, 0.5};
    EXPECT_EQ(path.measures[1].support[0], s.snap(mid));
    EXPECT_THROW(displacement_interpolation(s, plan, {0.0, 0.6, 0.5, 1.0}), DomainError);
}

TEST(Interpolation, GeodesyDefectOnDiamond)
{
    const auto s = discretize(ModelSpacetime::minkowski(2, Region::diamond(1.0)), SamplerConfig::lattice(0.02));
    std::mt19937_64 rng(4);
    IndexSet low, high;
    for (int i = 0; i < s.size(); ++i) {
        const double t = s.point(i)[0], x = s.point(i)[1];
        if (t > 0.15 && t < 0.45 && std::abs(x) < 0.1) low.push_back(i);
        if (t > 0.95 && t < 1.25 && std::abs(x) < 0.1) high.push_back(i);
    }
    std::shuffle(low.begin(), low.end(), rng);
    std::shuffle(high.begin(), high.end(), rng);
    low.resize(20);
    high.resize(20);
    std::sort(low.begin(), low.end());
    std::sort(high.begin(), high.end());
    const auto mu0 = restricted_measure(s, low), mu1 = restricted_measure(s, high);
    const Solution sol = solve_lp(s, mu0, mu1, 0.5);
    ASSERT_TRUE(sol.ell_p.is_finite());
    const auto path = displacement_interpolation(s, sol.coupling, uniform_grid(5));
    EXPECT_LE(geodesy_defect(s, path, 0.5), 3 * 0.02);
}

TEST(Entropy, UniformMeasures)
{
    const auto s = oracle::minkowski_points({{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 0}}, {1, 1, 1, 1, 2});
    const auto mu = make_measure({0, 1, 2, 3}, {1, 1, 1, 1});
    EXPECT_NEAR(entropy(mu, s).value(), std::log(0.25), 1e-15);
    const auto r = restricted_measure(s, {1, 4});
    EXPECT_NEAR(entropy(r, s).value(), -std::log(3.0), 1e-15);
    EXPECT_NEAR(entropy_exp(entropy(r, s), 2.0), std::sqrt(3.0), 1e-15);
}

TEST(Tcd, FlatBoxesPassAtZeroAndFailAtPositiveCurvature)
{
    const double h = 0.02;
    const auto s = flat_box({0, -0.2}, {1.8, 0.2}, h);
    const auto mu0 = restricted_measure(s, in_box(s, {0, -0.1}, {0.2, 0.1}));
    const auto mu1 = restricted_measure(s, in_box(s, {1.5, -0.1}, {1.7, 0.1}));
    const Solution sol = solve_lp(s, mu0, mu1, 0.5);
    const auto path = displacement_interpolation(s, sol.coupling, uniform_grid(11));
    const auto pass = tcd_certify(path, sol.coupling, 0.0, 2.0, s);
    EXPECT_EQ(pass.verdict, Verdict::Pass) << pass.worst_residual;
    EXPECT_NEAR(pass.tolerance, 5 * h, 1e-15);
    const auto fail = tcd_certify(path, sol.coupling, 2.0, 2.0, s);
    EXPECT_EQ(fail.verdict, Verdict::Fail);
    EXPECT_LT(fail.worst_residual, -0.2);
}

TEST(Tmcp, ContractionTowardDirac)
{
    const double h = 0.02;
    const auto s = flat_box({0, -0.3}, {1.5, 0.3}, h);
    const auto mu0 = restricted_measure(s, in_box(s, {0, -0.1}, {0.2, 0.1}));
    const double top[2] = {1.4, 0};
    const int x1 = s.snap(top);
    const auto rep = tmcp_certify(s, *s.geometry(), mu0, x1, 0.0, 2.0, 0.5, uniform_grid(21));
    EXPECT_EQ(rep.verdict, Verdict::Pass);
    ASSERT_EQ(rep.tmcp_residuals.size(), 21u);
    // U_t/U_0 tracks the exact contraction (1-t) of the support area, up to snapping
    for (std::size_t k = 0; k + 1 < rep.times.size(); ++k)
        EXPECT_NEAR(rep.u[k] / rep.u[0], 1 - rep.times[k], 0.1) << rep.times[k];
}

TEST(Tmcp, VacuousBeyondBonnetMyers)
{
    const auto s = flat_box({0, -0.3}, {2.0, 0.3}, 0.05);
    const auto mu0 = restricted_measure(s, in_box(s, {0, -0.1}, {0.1, 0.1}));
    const double top[2] = {2.0, 0};
    const auto rep = tmcp_certify(s, *s.geometry(), mu0, s.snap(top), 20.0, 2.0, 0.5, uniform_grid(5));
    EXPECT_EQ(rep.verdict, Verdict::Vacuous);
    EXPECT_THROW(tmcp_certify(s, *s.geometry(), dirac(0), s.snap(top), 0.0, 2.0, 0.5, uniform_grid(5)), DomainError);
}

TEST(Scaling, MeasureScaleLeavesResidualsUnchanged)
{
    const auto s = flat_box({0, -0.3}, {1.5, 0.3}, 0.05);
    const auto mu0 = restricted_measure(s, in_box(s, {0, -0.1}, {0.2, 0.1}));
    const double top[2] = {1.4, 0};
    const int x1 = s.snap(top);
    const auto a = tmcp_certify(s, *s.geometry(), mu0, x1, 0.5, 2.0, 0.5, uniform_grid(11));
    const auto s2 = scaling_transform(s, 1.0, 2.0, 1.0);
    const auto b = tmcp_certify(s2, *s2.geometry(), mu0, x1, 0.5, 2.0, 0.5, uniform_grid(11));
    for (std::size_t k = 0; k < a.tmcp_residuals.size(); ++k)
        EXPECT_NEAR(a.tmcp_residuals[k], b.tmcp_residuals[k], 1e-12);
    EXPECT_NEAR(b.entropy[3] - a.entropy[3], -std::log(2.0), 1e-12);
}

TEST(Scaling, CurvatureScalesWithTau)
{
    const auto s = flat_box({0, -0.3}, {1.5, 0.3}, 0.05);
    const auto mu0 = restricted_measure(s, in_box(s, {0, -0.1}, {0.2, 0.1}));
    const double top[2] = {1.4, 0};
    const int x1 = s.snap(top);
    const auto src = tmcp_certify(s, *s.geometry(), mu0, x1, 4.0, 2.0, 0.5, uniform_grid(11));
    const auto img_space = scaling_transform(s, 2.0, 1.0, 2.0);
    const auto img = tmcp_certify(img_space, *img_space.geometry(), mu0, x1, 1.0, 2.0, 0.5, uniform_grid(11));
    EXPECT_EQ(src.verdict, img.verdict);
    for (std::size_t k = 0; k < src.tmcp_residuals.size(); ++k)
        EXPECT_NEAR(src.tmcp_residuals[k], img.tmcp_residuals[k], 1e-12);
}

TEST(Scaling, ConsistencyInKAndN)
{
    const auto s = flat_box({0, -0.4}, {2.0, 0.4}, 0.05);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0, 1);
    int pass_count = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const double t0 = 0.3 * u(rng), x0 = 0.2 * (u(rng) - 0.5), w = 0.1 + 0.1 * u(rng);
        const auto mu0 = restricted_measure(s, in_box(s, {t0, x0 - w}, {t0 + w, x0 + w}));
        const double top[2] = {1.2 + 0.7 * u(rng), 0.2 * (u(rng) - 0.5)};
        const int x1 = s.snap(top);
        const double K = 3 * (u(rng) - 0.3), N = 1 + 3 * u(rng);
        const auto rep = tmcp_certify(s, *s.geometry(), mu0, x1, K, N, 0.5, uniform_grid(11));
        if (rep.verdict != Verdict::Pass) continue;
        ++pass_count;
        const double K2 = K - 2 * u(rng), N2 = N + 2 * u(rng);
        const auto weaker = tmcp_certify(s, *s.geometry(), mu0, x1, K2, N2, 0.5, uniform_grid(11));
        EXPECT_EQ(weaker.verdict, Verdict::Pass) << K << " " << N << " -> " << K2 << " " << N2;
    }
    EXPECT_GT(pass_count, 5);
}
