#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lorentz/causal_space.hpp"
#include "lorentz/extended.hpp"

namespace lorentz {

struct PlanPair {
    int i;
    int j;
    double mass;
};

struct Coupling {
    std::vector<PlanPair> pairs;
    WeightedMeasure mu, nu;
    double p = 1.0;
    // Σ mass·τ(i,j)^p, or -∞ when no causal coupling exists.
    ExtReal value = ExtReal::minus_infinity();
};

// Σ mass·τ^p over the pairs; -∞ if some pair is not causal.
ExtReal coupling_value(const FiniteCausalSpace& space, const std::vector<PlanPair>& pairs, double p);
// value^{1/p} with -∞ propagated.
ExtReal ell_from_value(const ExtReal& value, double p);

struct FeasibilityResult {
    bool feasible = false;
    std::optional<Coupling> coupling;
};

FeasibilityResult causal_feasible(const FiniteCausalSpace& space, const WeightedMeasure& mu,
                                  const WeightedMeasure& nu);

enum class Backend { Auto, Exact, Double };

struct SolveOptions {
    Backend backend = Backend::Auto;
    // Auto uses exact rationals when both supports are at most this large.
    int exact_limit = 64;
};

struct Solution {
    ExtReal ell_p = ExtReal::minus_infinity();
    Coupling coupling;
    std::string backend;
    // Some non-basic arc has zero reduced cost, so a second optimal vertex may exist.
    bool alternative_optima = false;
};

Solution solve_lp(const FiniteCausalSpace& space, const WeightedMeasure& mu, const WeightedMeasure& nu,
                  double p, const SolveOptions& opt = {});

struct DualisabilityVerdict {
    bool timelike_dualisable = false;
    bool strongly = false;
    std::string reason;
    // Optimal coupling with the largest mass on null arcs (leq with τ = 0).
    std::optional<Coupling> witness;
    double min_null_mass = 0.0;
    double max_null_mass = 0.0;
};

DualisabilityVerdict strong_dualisability_certificate(const FiniteCausalSpace& space, const WeightedMeasure& mu,
                                                      const WeightedMeasure& nu, double p,
                                                      const SolveOptions& opt = {});

enum class CostVariant { TauP, EllP };

struct AuditResult {
    double defect = 0.0;
    // Indices into the coupling's pairs, in cycle order.
    std::vector<int> witness;
    long cycles_checked = 0;
    bool exhaustive = false;
};

struct AuditOptions {
    int max_cycle_len = 6;
    long n_random = 10000;
    std::uint64_t seed = 1;
    CostVariant variant = CostVariant::EllP;
    // Exhaustive enumeration up to this many support pairs.
    int exhaustive_limit = 12;
};

AuditResult audit_cyclical_monotonicity(const FiniteCausalSpace& space, const std::vector<PlanPair>& pairs,
                                        double p, const AuditOptions& opt = {});

struct PotentialPair {
    IndexSet x;  // P1(Γ)
    std::vector<double> phi;
    IndexSet y;  // P2(Γ)
    std::vector<double> psi;
    double phi_at(int i) const;
    double psi_at(int j) const;
};

PotentialPair build_potentials(const FiniteCausalSpace& space, const std::vector<std::pair<int, int>>& gamma,
                               double p, std::pair<int, int> root);

// Exactness check of ψ(y) - φ(x) ≥ τ(x,y)^p on causal pairs of the potential
// supports, in rational arithmetic on the stored doubles. Returns the worst
// violating pair if any.
std::optional<std::pair<int, int>> potentials_infeasible_exact(const FiniteCausalSpace& space,
                                                               const PotentialPair& pot, double p);

double duality_gap(const FiniteCausalSpace& space, const WeightedMeasure& mu, const WeightedMeasure& nu,
                   double p, const PotentialPair& potentials);

struct Triple {
    int i, j, k;
    double mass;
};

struct GlueResult {
    std::vector<Triple> plan;
    Coupling projected;
};

GlueResult glue(const FiniteCausalSpace& space, const Coupling& pi12, const Coupling& pi23);

}  // namespace lorentz
