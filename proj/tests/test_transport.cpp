#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lorentz/errors.hpp"
#include "lorentz/transport.hpp"
#include "oracles.hpp"

using namespace lorentz;

namespace {

// a=(0,0), b=(0,1), c=(3,0), d=(3,1)
FiniteCausalSpace four_points() { return oracle::minkowski_points({{0, 0}, {0, 1}, {3, 0}, {3, 1}}); }

WeightedMeasure half(int i, int j) { return make_measure({i, j}, {0.5, 0.5}); }

Coupling coupling_of(const FiniteCausalSpace& s, std::vector<PlanPair> pairs, WeightedMeasure mu, WeightedMeasure nu,
                     double p)
{
    Coupling c;
    c.pairs = std::move(pairs);
    c.mu = std::move(mu);
    c.nu = std::move(nu);
    c.p = p;
    c.value = coupling_value(s, c.pairs, p);
    return c;
}

std::vector<std::pair<int, int>> support_of(const Coupling& c)
{
    std::vector<std::pair<int, int>> g;
    for (const PlanPair& e : c.pairs)
        if (e.mass > 0) g.push_back({e.i, e.j});
    return g;
}

}  // namespace

TEST(Feasibility, Cases)
{
    const auto s = oracle::minkowski_points({{0, 0}, {2, 1}, {0, 5}});
    const auto ok = causal_feasible(s, dirac(0), dirac(1));
    ASSERT_TRUE(ok.feasible);
    ASSERT_EQ(ok.coupling->pairs.size(), 1u);
    EXPECT_EQ(ok.coupling->pairs[0].j, 1);
    EXPECT_NEAR(ok.coupling->pairs[0].mass, 1.0, 1e-15);
    EXPECT_FALSE(causal_feasible(s, dirac(0), dirac(2)).feasible);
    EXPECT_TRUE(solve_lp(s, dirac(0), dirac(2), 0.5).ell_p.is_minus_infinity());
}

TEST(Feasibility, ForcedAssignment)
{
    // a≤c and b≤d only
    const auto s = oracle::minkowski_points({{0, 0}, {0, 10}, {2, 0.5}, {2, 10.5}});
    ASSERT_FALSE(s.leq(0, 3));
    ASSERT_FALSE(s.leq(1, 2));
    const auto f = causal_feasible(s, half(0, 1), half(2, 3));
    ASSERT_TRUE(f.feasible);
    const Solution sol = solve_lp(s, half(0, 1), half(2, 3), 1.0);
    EXPECT_NEAR(sol.ell_p.value(), 0.5 * s.tau(0, 2) + 0.5 * s.tau(1, 3), 1e-14);
}

TEST(Solve, DiracToDiracIsTau)
{
    const auto s = oracle::minkowski_points({{0, 0}, {2, 1}});
    for (double p : {0.1, 0.5, 1.0}) EXPECT_NEAR(solve_lp(s, dirac(0), dirac(1), p).ell_p.value(), std::sqrt(3.0), 1e-14);
}

TEST(Solve, FourPointInstancePrefersIdentity)
{
    const auto s = four_points();
    const Solution sol = solve_lp(s, half(0, 1), half(2, 3), 0.5);
    EXPECT_NEAR(sol.ell_p.value(), 3.0, 1e-14);
    for (const PlanPair& e : sol.coupling.pairs)
        if (e.mass > 0) EXPECT_EQ(e.j, e.i + 2);
    EXPECT_EQ(sol.backend, "exact");
}

TEST(Solve, MatchesVertexEnumeration)
{
    std::mt19937_64 rng(2024);
    int infeasible = 0;
    for (int k = 0; k < 60; ++k) {
        const auto inst = oracle::random_instance(rng);
        const auto expect = oracle::ell_p_by_vertices(inst);
        const Solution sol = solve_lp(inst.space, inst.mu, inst.nu, inst.p);
        if (!expect) {
            ++infeasible;
            EXPECT_TRUE(sol.ell_p.is_minus_infinity()) << "instance " << k;
            continue;
        }
        ASSERT_TRUE(sol.ell_p.is_finite()) << "instance " << k;
        EXPECT_NEAR(sol.ell_p.value(), *expect, 1e-10) << "instance " << k;
    }
    EXPECT_GT(infeasible, 0);
}

TEST(Solve, ExactAndDoubleBackendsAgree)
{
    std::mt19937_64 rng(99);
    for (int k = 0; k < 40; ++k) {
        const auto inst = oracle::random_instance(rng);
        SolveOptions ex, db;
        ex.backend = Backend::Exact;
        db.backend = Backend::Double;
        const Solution a = solve_lp(inst.space, inst.mu, inst.nu, inst.p, ex);
        const Solution b = solve_lp(inst.space, inst.mu, inst.nu, inst.p, db);
        ASSERT_EQ(a.ell_p.kind(), b.ell_p.kind());
        if (a.ell_p.is_finite()) EXPECT_NEAR(a.ell_p.value(), b.ell_p.value(), 1e-8);
    }
}

TEST(Solve, MarginalsOfReturnedCoupling)
{
    std::mt19937_64 rng(5);
    for (int k = 0; k < 30; ++k) {
        const auto inst = oracle::random_instance(rng);
        const Solution sol = solve_lp(inst.space, inst.mu, inst.nu, inst.p);
        if (!sol.ell_p.is_finite()) continue;
        std::vector<double> a(inst.space.size()), b(inst.space.size());
        for (const PlanPair& e : sol.coupling.pairs) {
            EXPECT_TRUE(inst.space.leq(e.i, e.j));
            a[e.i] += e.mass;
            b[e.j] += e.mass;
        }
        for (std::size_t q = 0; q < inst.mu.support.size(); ++q) EXPECT_NEAR(a[inst.mu.support[q]], inst.mu.mass[q], 1e-12);
        for (std::size_t q = 0; q < inst.nu.support.size(); ++q) EXPECT_NEAR(b[inst.nu.support[q]], inst.nu.mass[q], 1e-12);
    }
}

TEST(Dualisability, Cases)
{
    const auto s = oracle::minkowski_points({{0, 0}, {2, 1}, {1, 1}});
    auto d = strong_dualisability_certificate(s, dirac(0), dirac(1), 0.5);
    EXPECT_TRUE(d.timelike_dualisable);
    EXPECT_TRUE(d.strongly);
    d = strong_dualisability_certificate(s, dirac(0), dirac(2), 0.5);  // null pair
    EXPECT_FALSE(d.timelike_dualisable);
    EXPECT_FALSE(d.strongly);
    const auto f = four_points();
    d = strong_dualisability_certificate(f, half(0, 1), half(2, 3), 0.5);
    EXPECT_TRUE(d.timelike_dualisable);
    EXPECT_TRUE(d.strongly);
}

TEST(Audit, FourPointCycles)
{
    const auto s = four_points();
    AuditOptions opt;
    opt.variant = CostVariant::TauP;
    const auto single = audit_cyclical_monotonicity(s, {{0, 2, 1.0}}, 0.5, opt);
    EXPECT_EQ(single.defect, 0.0);
    const auto id = audit_cyclical_monotonicity(s, {{0, 2, 0.5}, {1, 3, 0.5}}, 0.5, opt);
    EXPECT_LE(id.defect, 0.0);
    const auto sw = audit_cyclical_monotonicity(s, {{0, 3, 0.5}, {1, 2, 0.5}}, 0.5, opt);
    EXPECT_NEAR(sw.defect, 2 * std::sqrt(3.0) - 2 * std::pow(8.0, 0.25), 1e-12);
    EXPECT_NEAR(sw.defect, 0.1005, 1e-4);
    EXPECT_EQ(sw.witness.size(), 2u);
    EXPECT_TRUE(sw.exhaustive);
}

TEST(Potentials, SingletonAndFourPoint)
{
    const auto s = four_points();
    const auto one = build_potentials(s, {{0, 2}}, 0.5, {0, 2});
    EXPECT_EQ(one.phi_at(0), 0.0);
    EXPECT_NEAR(one.psi_at(2), std::sqrt(3.0), 1e-15);

    const auto pot = build_potentials(s, {{0, 2}, {1, 3}}, 0.5, {0, 2});
    EXPECT_EQ(pot.phi_at(0), 0.0);
    // the cross pairs (a,d) and (b,c) pin φ(b) to [8^¼ - √3, √3 - 8^¼]
    const double gap = std::sqrt(3.0) - std::pow(8.0, 0.25);
    EXPECT_GE(pot.phi_at(1), -gap - 1e-14);
    EXPECT_LE(pot.phi_at(1), gap + 1e-14);
    for (auto [x, y] : std::vector<std::pair<int, int>>{{0, 2}, {1, 3}})
        EXPECT_NEAR(pot.psi_at(y) - pot.phi_at(x), std::pow(s.tau(x, y), 0.5), 1e-14);
    EXPECT_FALSE(potentials_infeasible_exact(s, pot, 0.5));
    EXPECT_LE(std::abs(duality_gap(s, half(0, 1), half(2, 3), 0.5, pot)), 1e-12);

    PotentialPair shifted = pot;
    for (double& v : shifted.phi) v -= 7.25;
    for (double& v : shifted.psi) v -= 7.25;
    EXPECT_NEAR(duality_gap(s, half(0, 1), half(2, 3), 0.5, shifted), duality_gap(s, half(0, 1), half(2, 3), 0.5, pot),
                1e-12);
}

TEST(Potentials, DiracGapIsZero)
{
    const auto s = oracle::minkowski_points({{0, 0}, {2, 1}});
    const auto pot = build_potentials(s, {{0, 1}}, 0.3, {0, 1});
    EXPECT_NEAR(duality_gap(s, dirac(0), dirac(1), 0.3, pot), 0.0, 1e-15);
}

TEST(Potentials, DualityOnRandomTimelikeOptima)
{
    std::mt19937_64 rng(77);
    int used = 0;
    for (int k = 0; k < 300; ++k) {
        const auto inst = oracle::random_instance(rng);
        const Solution sol = solve_lp(inst.space, inst.mu, inst.nu, inst.p);
        if (!sol.ell_p.is_finite()) continue;
        bool timelike = true;
        for (const PlanPair& e : sol.coupling.pairs) timelike = timelike && inst.space.tau(e.i, e.j) > 0;
        if (!timelike) continue;
        const auto g = support_of(sol.coupling);
        const auto pot = build_potentials(inst.space, g, inst.p, g.front());
        EXPECT_LE(duality_gap(inst.space, inst.mu, inst.nu, inst.p, pot), 1e-9) << k;
        EXPECT_FALSE(potentials_infeasible_exact(inst.space, pot, inst.p)) << k;
        ++used;
    }
    EXPECT_GT(used, 20);
}

TEST(Glue, DiracChain)
{
    const auto s = oracle::minkowski_points({{0, 0}, {1, 0}, {3, 0.5}});
    const auto c12 = coupling_of(s, {{0, 1, 1.0}}, dirac(0), dirac(1), 0.5);
    const auto c23 = coupling_of(s, {{1, 2, 1.0}}, dirac(1), dirac(2), 0.5);
    const GlueResult g = glue(s, c12, c23);
    ASSERT_EQ(g.projected.pairs.size(), 1u);
    EXPECT_EQ(g.projected.pairs[0].i, 0);
    EXPECT_EQ(g.projected.pairs[0].j, 2);
    EXPECT_TRUE(g.projected.value.is_finite());
}

TEST(Glue, MarginalsAndReverseTriangle)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    int checked = 0;
    for (int k = 0; k < 30; ++k) {
        std::vector<std::vector<double>> pts;
        for (int layer = 0; layer < 3; ++layer)
            for (int q = 0; q < 3; ++q) pts.push_back({2.0 * layer + u(rng), 0.6 * (u(rng) - 0.5)});
        const auto s = oracle::minkowski_points(pts);
        const auto m0 = make_measure({0, 1, 2}, {u(rng) + .1, u(rng) + .1, u(rng) + .1});
        const auto m1 = make_measure({3, 4, 5}, {u(rng) + .1, u(rng) + .1, u(rng) + .1});
        const auto m2 = make_measure({6, 7, 8}, {u(rng) + .1, u(rng) + .1, u(rng) + .1});
        const double p = 0.1 + 0.9 * u(rng);
        const Solution a = solve_lp(s, m0, m1, p), b = solve_lp(s, m1, m2, p), c = solve_lp(s, m0, m2, p);
        if (!a.ell_p.is_finite() || !b.ell_p.is_finite()) continue;
        const GlueResult g = glue(s, a.coupling, b.coupling);
        std::vector<double> s12(s.size()), s23(s.size());
        for (const Triple& t : g.plan) {
            s12[t.j] += t.mass;
            s23[t.j] += t.mass;
        }
        for (std::size_t q = 0; q < m1.support.size(); ++q) EXPECT_NEAR(s12[m1.support[q]], m1.mass[q], 1e-12);
        ASSERT_TRUE(g.projected.value.is_finite());
        EXPECT_LE(g.projected.value.value(), std::pow(c.ell_p.value(), p) + 1e-12);
        EXPECT_LE(a.ell_p.value() + b.ell_p.value(), c.ell_p.value() + 1e-9);
        ++checked;
    }
    EXPECT_GT(checked, 10);
}
