#pragma once

#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "lorentz/causal_space.hpp"
#include "lorentz/disintegration.hpp"
#include "lorentz/transport.hpp"

namespace lorentz {

struct BrunnMinkowskiEntry {
    double t;
    double mass;      // m(A_t)
    double bound;     // σ^{(1-t)}(Θ)m(A0)^{1/N} + σ^{(t)}(Θ)m(A1)^{1/N}
    double residual;  // (m(A_t)^{1/N} - bound) / max(m(A0), m(A1))^{1/N}
    int cells;        // |A_t|
};

struct BrunnMinkowskiOptions {
    double p = 0.5;
    double tol = -1;  // negative: default_tolerance(space)
    // Drop the A1 term (timelike half-Brunn–Minkowski for near-Dirac A1).
    bool half = false;
    bool check_dualisability = true;
};

struct BrunnMinkowskiReport {
    double theta = 0;
    double m0 = 0, m1 = 0;
    std::vector<BrunnMinkowskiEntry> entries;
    std::optional<DualisabilityVerdict> dualisability;
    double worst = 0;
    double tol = 0;
    bool pass = true;
};

BrunnMinkowskiReport brunn_minkowski_check(const Geometry& model, const FiniteCausalSpace& space, const IndexSet& A0,
                                           const IndexSet& A1, const std::vector<double>& t_grid, double K, double N,
                                           const BrunnMinkowskiOptions& opt = {});

struct VolumeProfile {
    std::vector<double> radii;
    std::vector<double> v;
    // Forward difference (v(r+δ) - v(r))/δ, attributed to s_radii = r + δ/2.
    std::vector<double> s;
    std::vector<double> s_radii;
};

struct BishopGromovReport {
    VolumeProfile profile;
    bool sharp = false;
    std::vector<double> v_ratio, v_bound, v_residual;
    std::vector<double> s_ratio, s_bound, s_residual;
    // The (N-1)-exponent bounds dominate the N-exponent bounds at every radius.
    bool sharp_not_weaker = true;
    double worst = 0;
    double tol = 0;
    bool pass = true;
};

struct BishopGromovOptions {
    double tol = -1;  // negative: default_tolerance(space)
    bool check_star_shaped = true;
};

// Empty radii: (k+½)·spacing up to the largest such radius below max τ(x0, E).
BishopGromovReport bishop_gromov_profile(const Geometry& model, const FiniteCausalSpace& space, int x0,
                                         const IndexSet& E, std::vector<double> radii, double K, double N, bool sharp,
                                         const BishopGromovOptions& opt = {});

struct BonnetMyersReport {
    double max_tau = 0;
    double bound = 0;
    std::pair<int, int> witness{-1, -1};
    bool pass = true;
};

BonnetMyersReport bonnet_myers_check(const FiniteCausalSpace& space, double K, double N, bool sharp,
                                     double tol = 1e-9);

struct PoincareConstant {
    double value = 0;  // C in ∫|u-ū|²h ≤ C∫|u'|²h on [0,D]
    bool certified = false;
    std::string source;
};

// One-dimensional MCP(K,N) Poincaré constant on intervals of length D.
PoincareConstant poincare_constant(double K, double N, double D);

// Smallest positive Neumann eigenvalue of -(h u')' = λ h u on [0,D], P1 elements.
double weighted_neumann_eigenvalue(const std::function<double(double)>& h, double D, int elements = 64);

struct PoincareReport {
    double lhs = 0, rhs = 0;
    double lambda_used = 0;
    double D = 0;
    bool certified = false;
    std::string lambda_source;
    // (α, lhs_α, Σ squared difference quotients on α)
    std::vector<std::tuple<int, double, double>> per_ray;
    bool pass = true;
};

PoincareReport poincare_check(const FiniteCausalSpace& space, const AchronalSet& V, const std::vector<double>& u,
                              double K, double N, const RayDecomposition& rays, double tol = 1e-9);

}  // namespace lorentz
