#pragma once

#include <string>
#include <vector>

#include "lorentz/causal_space.hpp"
#include "lorentz/extended.hpp"
#include "lorentz/transport.hpp"

namespace lorentz {

struct MeasurePath {
    std::vector<double> times;
    std::vector<WeightedMeasure> measures;
    Coupling origin_plan;
    // snap_cell[k][e]: space point receiving pair e's mass at times[k]
    std::vector<std::vector<int>> snap_cell;
    // largest distance between a displaced point and its snapped point, per time
    std::vector<double> snap_displacement;
};

// Uniform grid of count points on [0,1].
std::vector<double> uniform_grid(int count);

MeasurePath displacement_interpolation(const Geometry& model, const FiniteCausalSpace& space, const Coupling& plan,
                                       const std::vector<double>& times);
MeasurePath displacement_interpolation(const FiniteCausalSpace& space, const Coupling& plan,
                                       const std::vector<double>& times);

// max_t |ℓ_p(μ_0, μ_t) - t·ℓ_p(μ_0, μ_1)| by re-solving at each grid time.
double geodesy_defect(const FiniteCausalSpace& space, const MeasurePath& path, double p);

ExtReal entropy(const WeightedMeasure& mu, const FiniteCausalSpace& space);

enum class Verdict { Pass, Fail, Vacuous };
std::string to_string(Verdict v);

struct TripleResidual {
    double s, r, t;
    double residual;
};

struct ConvexityReport {
    std::vector<double> times;
    std::vector<double> u;  // U_N(μ_t)
    std::vector<double> entropy;
    double norm_tau = 0;  // ‖τ‖_{L²(π)}
    double K = 0, N = 0;
    double tolerance = 0;
    // TMCP: U_N(μ_t)/U_N(μ_0) - σ^{(1-t)} per grid time.
    std::vector<double> tmcp_residuals;
    // TCD: (u(r) - σ^{(1-λ)} u(s) - σ^{(λ)} u(t)) / max(u(s), u(t)) over grid triples.
    std::vector<TripleResidual> triple_residuals;
    // TCD: Δt²·(e'' - e'²/N - K‖τ‖²) at interior grid times.
    std::vector<double> second_difference_residuals;
    double worst_residual = 0;
    Verdict verdict = Verdict::Pass;
    std::string message;
};

struct CertifyOptions {
    // Negative: max(5·spacing, 1e-6) from the space's sampling metadata.
    double tol = -1;
};

double default_tolerance(const FiniteCausalSpace& space);

ConvexityReport tcd_certify(const MeasurePath& path, const Coupling& plan, double K, double N,
                            const FiniteCausalSpace& space, const CertifyOptions& opt = {});

ConvexityReport tmcp_certify(const FiniteCausalSpace& space, const Geometry& model, const WeightedMeasure& mu0,
                             int x1, double K, double N, double p, const std::vector<double>& t_grid,
                             const CertifyOptions& opt = {});

// (X, a·d, b·m, ≪, ≤, r·τ).
FiniteCausalSpace scaling_transform(const FiniteCausalSpace& space, double a, double b, double r);

}  // namespace lorentz
