#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lorentz/causal_space.hpp"
#include "lorentz/extended.hpp"

namespace lorentz {

// Γ_V restricted to pairs sharing a foot on V (see transport_relation).
struct TransportRelation {
    AchronalSet V;
    std::vector<ExtReal> tau_V;
    std::vector<int> foot;
    // Points of I⁺(V) ∪ V.
    IndexSet domain;
    // Off-diagonal pairs (x, z) with τ_V(z) - τ_V(x) = τ(x,z) > 0 up to eps.
    std::vector<std::pair<int, int>> gamma;
    double eps = 0;
    // Pairs meeting the equality across different feet; a discretization
    // artifact on nonbranching models. -1 when not counted.
    long cross_foot_pairs = -1;
};

// Negative eps: 2·spacing·(1 + max τ_V).
TransportRelation transport_relation(const FiniteCausalSpace& space, const AchronalSet& V, double eps = -1,
                                     bool count_cross_foot = false);

struct DensityBin {
    double lo, hi;
    double mass;
    double h;  // conditional density h(α,·) on the bin
};

struct Ray {
    int alpha = 0;
    IndexSet points;             // ordered by τ_V
    std::vector<double> t_values;
    std::vector<double> weights;
    std::vector<double> cell_lo, cell_hi;  // τ_V extent attributed to each point
    double mass = 0;
    double q_weight = 0;
    int foot = -1;  // member of V the ray starts from, -1 if split off
    std::vector<DensityBin> h_samples;

    // h(α,t) on the cell of point k: m(x)/(𝔮(α)|cell|).
    double cell_density(int k, double total_mass) const;
    double length() const { return cell_hi.back() - cell_lo.front(); }
};

struct RayDecomposition {
    AchronalSet V;
    std::vector<Ray> rays;
    IndexSet endpoints_a, endpoints_b;
    IndexSet unassigned;
    double total_mass = 0;  // m(𝒯_V)
    double spacing = 0;
    int splits = 0;
    std::vector<std::string> log;
};

// Negative tol: the relation's eps.
RayDecomposition extract_rays(const FiniteCausalSpace& space, const TransportRelation& relation, double tol = -1);

// Recomputes the density bins of every ray (width max(2·spacing, length/32)).
void bin_densities(RayDecomposition& rays);

struct McpWitness {
    int alpha = -1;
    int bin0 = -1, bin1 = -1;
    std::string side;  // "lower" or "upper" or "spread" or "length"
    double residual = 0;
};

struct McpReport {
    // Most negative relative residual per tested ray (0 when both bounds hold with room).
    std::vector<std::pair<int, double>> ray_residuals;
    double worst = 0;
    std::optional<McpWitness> witness;
    int tested = 0;
    int skipped = 0;
    double skipped_mass = 0;
    bool pass = true;
};

McpReport mcp_density_test(const RayDecomposition& rays, double K, double N, double tol = 1e-9);

// Ray subset (α ids; empty means all) times a closed τ_V window.
struct LevelTestSet {
    std::vector<int> rays;
    double t_lo = 0, t_hi = 0;
};

struct CoareaCheck {
    LevelTestSet set;
    double mass = 0;      // m(A)
    double integral = 0;  // ∫ H_t(A) dt
    double residual = 0;  // |m(A) - ∫H_t(A)dt| / m(A)
};

struct LevelMeasures {
    std::vector<double> t_grid;
    std::vector<double> H;  // total H_t per grid time
    std::vector<CoareaCheck> checks;
    double worst_residual = 0;
    // |Σ_α 𝔮(α)∫h(α,t)dt - m(𝒯_V)| / m(𝒯_V)
    double mass_residual = 0;
};

// Empty tests: the full slab plus four deterministic sub-rectangles.
LevelMeasures level_measures(const RayDecomposition& rays, const std::vector<double>& t_grid,
                             std::vector<LevelTestSet> tests = {});

struct MeanCurvatureEstimate {
    std::vector<double> phi;  // aligned with V.members
    double H0_sample = 0;
    std::pair<double, double> fit_window{0, 0};
    double residual = 0;  // RMS deviation of the quotient from the linear fit
    std::vector<double> t_grid;
    std::vector<double> quotient;
    double phi_H0 = 0;   // ∫φ dH_0
    double phi2_H0 = 0;  // ∫φ² dH_0
};

MeanCurvatureEstimate mean_curvature_estimate(const FiniteCausalSpace& space, const RayDecomposition& rays,
                                              const std::vector<double>& phi, double t_max);

struct HawkingReport {
    double sup_tau_V = 0;
    double D = 0;  // +inf in the N = 1 mode
    bool pass = false;
    std::string regime;
    int witness = -1;  // point attaining the sup
    double future_mass = 0;
};

HawkingReport hawking_certify(const FiniteCausalSpace& space, const RayDecomposition& rays, double H0, double K,
                              double N, double tol = 1e-12);

}  // namespace lorentz
