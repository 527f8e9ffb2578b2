#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lorentz/comparison.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/geodesics.hpp"
#include "lorentz/models.hpp"

using namespace lorentz;

namespace {

IndexSet all_points(const FiniteCausalSpace& s)
{
    IndexSet out;
    for (int i = 0; i < s.size(); ++i) out.push_back(i);
    return out;
}

IndexSet in_box(const FiniteCausalSpace& s, std::vector<double> lo, std::vector<double> hi)
{
    IndexSet out;
    for (int i = 0; i < s.size(); ++i) {
        bool in = true;
        for (int k = 0; k < s.dim(); ++k) in = in && s.point(i)[k] >= lo[k] - 1e-9 && s.point(i)[k] <= hi[k] + 1e-9;
        if (in) out.push_back(i);
    }
    return out;
}

AchronalSet slice_t0(const FiniteCausalSpace& s)
{
    AchronalSet V;
    for (int i = 0; i < s.size(); ++i)
        if (std::abs(s.point(i)[0]) < 1e-12) V.members.push_back(i);
    return V;
}

}  // namespace

TEST(BishopGromov, RadialConeIsTheEqualityCase)
{
    for (int n : {2, 3}) {
        const auto m = ModelSpacetime::minkowski(n, Region::cone(std::vector<double>(n, 0.0), 1.0, 0.8));
        const auto s = discretize(m, SamplerConfig::lattice(0.05));
        const auto r = bishop_gromov_profile(*s.geometry(), s, 0, all_points(s), {}, 0.0, n, true);
        EXPECT_TRUE(r.pass);
        EXPECT_TRUE(r.sharp_not_weaker);
        const double R = r.profile.radii.back();
        for (std::size_t k = 0; k < r.v_ratio.size(); ++k) {
            const double rad = r.profile.radii[k];
            EXPECT_NEAR(r.v_ratio[k], std::pow(rad / R, n), 1e-12) << n << " " << rad;
            EXPECT_NEAR(r.v_bound[k], std::pow(rad / R, n), 1e-12);
            // sphere contents on a shell lattice: exact in 1+1, angular cells in 2+1
            const double sr = r.profile.s_radii[k] / r.profile.s_radii.back();
            EXPECT_NEAR(r.s_ratio[k], std::pow(sr, n - 1), n == 2 ? 1e-12 : 0.02 * std::pow(sr, n - 1) + 5e-4);
            if (k > 0) EXPECT_GE(r.profile.v[k], r.profile.v[k - 1]);
        }
    }
}

TEST(BishopGromov, NonSharpExponentIsWeaker)
{
    const auto m = ModelSpacetime::minkowski(2, Region::cone({0, 0}, 1.0, 0.8));
    const auto s = discretize(m, SamplerConfig::lattice(0.05));
    const auto r = bishop_gromov_profile(*s.geometry(), s, 0, all_points(s), {}, 0.0, 2.0, false);
    EXPECT_TRUE(r.pass);
    const double R = r.profile.radii.back();
    for (std::size_t k = 0; k + 1 < r.v_ratio.size(); ++k) {
        EXPECT_NEAR(r.v_bound[k], std::pow(r.profile.radii[k] / R, 3), 1e-12);
        EXPECT_GT(r.v_residual[k], 0.0);
    }
}

TEST(BishopGromov, Errors)
{
    const auto m = ModelSpacetime::minkowski(2, Region::cone({0, 0}, 1.0, 0.8));
    const auto s = discretize(m, SamplerConfig::lattice(0.1));
    // the apex cell alone has no future
    EXPECT_THROW(bishop_gromov_profile(*s.geometry(), s, 0, {0}, {}, 0, 2, false), DomainError);
    // dropping the middle shell breaks star-shapedness
    IndexSet holey;
    for (int i = 0; i < s.size(); ++i) {
        const double* x = s.point(i);
        const double rho = std::sqrt(std::max(0.0, x[0] * x[0] - x[1] * x[1]));
        if (std::abs(rho - 0.5) > 0.04) holey.push_back(i);
    }
    EXPECT_THROW(bishop_gromov_profile(*s.geometry(), s, 0, holey, {}, 0, 2, false), DomainError);
    EXPECT_THROW(bishop_gromov_profile(*s.geometry(), s, 0, all_points(s), {0.5, 0.2}, 0, 2, false), DomainError);
    // R beyond π√(N/K)
    EXPECT_THROW(bishop_gromov_profile(*s.geometry(), s, 0, all_points(s), {0.5, 0.9}, 40, 2, false), DomainError);
}

TEST(BrunnMinkowski, TranslatedBoxesMeetTheFlatBoundWithEquality)
{
    const auto s = discretize(ModelSpacetime::minkowski(2, Region::box({0, -1}, {2, 1})), SamplerConfig::lattice(0.05));
    const IndexSet A0 = in_box(s, {0, -0.2}, {0.2, 0.2});
    const IndexSet A1 = in_box(s, {1.5, -0.2}, {1.7, 0.2});
    const auto r = brunn_minkowski_check(*s.geometry(), s, A0, A1, uniform_grid(5), 0.0, 2.0);
    EXPECT_TRUE(r.pass);
    ASSERT_TRUE(r.dualisability);
    EXPECT_TRUE(r.dualisability->strongly);
    EXPECT_NEAR(r.theta, std::sqrt(1.3 * 1.3 - 0.4 * 0.4), 1e-12);
    for (const auto& e : r.entries) {
        EXPECT_EQ(e.cells, int(A0.size()));
        EXPECT_NEAR(e.residual, 0.0, 1e-12) << e.t;
    }
    BrunnMinkowskiOptions half;
    half.half = true;
    const auto h = brunn_minkowski_check(*s.geometry(), s, A0, A1, uniform_grid(5), 0.0, 2.0, half);
    EXPECT_TRUE(h.pass);
    EXPECT_NEAR(h.entries[2].residual, 0.5, 1e-12);
    // positive curvature asks for more mass than the flat interpolants carry
    const auto k = brunn_minkowski_check(*s.geometry(), s, A0, A1, uniform_grid(5), 2.0, 2.0);
    EXPECT_LT(k.worst, -0.2);
}

TEST(BrunnMinkowski, ResidualInvariantUnderScaling)
{
    const auto s = discretize(ModelSpacetime::minkowski(2, Region::box({0, -1}, {2, 1})), SamplerConfig::lattice(0.05));
    const IndexSet A0 = in_box(s, {0, -0.2}, {0.2, 0.1});
    const IndexSet A1 = in_box(s, {1.4, -0.1}, {1.7, 0.3});
    const auto a = brunn_minkowski_check(*s.geometry(), s, A0, A1, uniform_grid(5), 1.0, 3.0);
    const auto img = scaling_transform(s, 2.0, 3.0, 2.0);
    const auto b = brunn_minkowski_check(*img.geometry(), img, A0, A1, uniform_grid(5), 0.25, 3.0);
    ASSERT_EQ(a.entries.size(), b.entries.size());
    for (std::size_t k = 0; k < a.entries.size(); ++k) EXPECT_NEAR(a.entries[k].residual, b.entries[k].residual, 1e-12);
}

TEST(BonnetMyers, FlatAndCurvedDiamonds)
{
    const auto flat = discretize(ModelSpacetime::minkowski(2, Region::diamond(1.0)), SamplerConfig::lattice(0.05));
    const auto ok = bonnet_myers_check(flat, 2.0, 2.0, false);
    EXPECT_NEAR(ok.max_tau, std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(ok.bound, std::numbers::pi, 1e-15);
    EXPECT_TRUE(ok.pass);
    const auto bad = bonnet_myers_check(flat, 20.0, 2.0, false);
    EXPECT_FALSE(bad.pass);
    EXPECT_NEAR(flat.tau(bad.witness.first, bad.witness.second), bad.max_tau, 0);
    EXPECT_NEAR(bonnet_myers_check(flat, 3.0, 3.0, true).bound, std::numbers::pi * std::sqrt(2.0 / 3.0), 1e-15);
    EXPECT_THROW(bonnet_myers_check(flat, 0.0, 2.0, false), DomainError);

    // timelike geodesics of unit anti-de Sitter refocus at τ = π
    const auto ads = discretize(ModelSpacetime::constant_curvature(1.0, 2, Region::diamond(2.2)), SamplerConfig::lattice(0.05));
    const auto near = bonnet_myers_check(ads, 1.0, 2.0, true);
    EXPECT_TRUE(near.pass);
    EXPECT_NEAR(near.max_tau, std::numbers::pi, 0.02 * std::numbers::pi);
}

TEST(Poincare, ConstantsAndFlatSlab)
{
    const auto pw = poincare_constant(0.0, 2.0, 2.0);
    EXPECT_TRUE(pw.certified);
    EXPECT_NEAR(pw.value, 4 / (std::numbers::pi * std::numbers::pi), 1e-15);
    // constant density on [0,D]: λ₁ = π²/D²
    EXPECT_NEAR(weighted_neumann_eigenvalue([](double) { return 1.0; }, 2.0, 200), std::numbers::pi * std::numbers::pi / 4,
                1e-3);
    const auto neg = poincare_constant(-1.0, 2.0, 1.0);
    EXPECT_FALSE(neg.certified);
    EXPECT_GE(neg.value, 1 / (std::numbers::pi * std::numbers::pi));

    const auto s = discretize(ModelSpacetime::minkowski(2, Region::box({0, -0.5}, {1, 0.5})), SamplerConfig::lattice(0.05));
    const AchronalSet V = slice_t0(s);
    const auto rays = extract_rays(s, transport_relation(s, V));
    ASSERT_EQ(rays.rays.size(), V.members.size());
    std::vector<double> u(s.size(), 0.0), c(s.size(), 0.0);
    for (const Ray& r : rays.rays)
        for (std::size_t k = 0; k < r.points.size(); ++k)
            if (r.t_values[k] > 0) {
                u[r.points[k]] = std::cos(std::numbers::pi * r.t_values[k]);
                c[r.points[k]] = 2.0;
            }
    const auto zero = poincare_check(s, V, c, 0.0, 2.0, rays);
    EXPECT_EQ(zero.lhs, 0.0);
    EXPECT_TRUE(zero.pass);
    // cos(πt) is the first Neumann mode of a unit ray: near equality
    const auto p = poincare_check(s, V, u, 0.0, 2.0, rays);
    EXPECT_TRUE(p.pass);
    EXPECT_NEAR(p.lhs / p.rhs, 1.0, 0.01);
    double lhs = 0;
    for (const auto& [a, l, g] : p.per_ray) lhs += l;
    EXPECT_NEAR(lhs, p.lhs, 1e-12);
    std::vector<double> outside = u;
    outside[V.members[0]] = 1.0;
    EXPECT_THROW(poincare_check(s, V, outside, 0.0, 2.0, rays), DomainError);
}
