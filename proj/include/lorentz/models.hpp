#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "lorentz/causal_space.hpp"

namespace lorentz {

// Region of a model in chart coordinates (t, x_1, ..., x_{n-1}).
struct Region {
    enum class Type {
        Box,      // lo/hi per coordinate
        Diamond,  // Alexandrov interval from the origin to (√2·size, 0); for flat n=2 a null square of side size
        Cone,     // {apex + ρ(cosh η, sinh η ω) : ρ ≤ radius, |η| ≤ rapidity}
        Wedge     // {-ρ(cosh η, sinh η ω) : rho_min ≤ ρ ≤ 1, |η| ≤ rapidity}, the Milne wedge
    };
    Type type = Type::Box;
    std::vector<double> lo, hi;
    double size = 1.0;
    std::vector<double> apex;
    double radius = 1.0;
    double rapidity = 1.0;
    double rho_min = 0.0;

    static Region box(std::vector<double> lo, std::vector<double> hi);
    static Region diamond(double size);
    static Region cone(std::vector<double> apex, double radius, double rapidity);
    static Region wedge(double rapidity, double rho_min = 0.0);
};

// Parses "box:t0,t1,x0,x1,...", "diamond:L", "cone:R,eta[,apex]", "wedge:eta[,rho_min]".
Region parse_region(const std::string& text, int dim);
std::string format_region(const Region& r);

enum class ModelKind { Minkowski, ConstantCurvature, MilneWedge };

class ModelSpacetime : public Geometry {
public:
    static std::shared_ptr<const ModelSpacetime> minkowski(int dim, Region region);
    // Sectional parameter κ of 𝔰_κ: κ < 0 de Sitter, κ > 0 anti-de Sitter.
    static std::shared_ptr<const ModelSpacetime> constant_curvature(double kappa, int dim, Region region);
    static std::shared_ptr<const ModelSpacetime> milne_wedge(int dim, Region region);

    ModelKind kind() const { return kind_; }
    double kappa() const { return kappa_; }
    int dim() const override { return dim_; }
    const Region& region() const { return region_; }
    bool nonbranching() const { return true; }
    // Constant-curvature formulas agree with geodesic shooting (see shoot_geodesic).
    bool trusted() const { return trusted_; }
    std::string name() const;

    bool contains(const double* x, double tol = 1e-9) const;

    bool leq(const double* x, const double* y) const override;
    double tau(const double* x, const double* y) const override;
    Point interpolate(const double* x, const double* y, double t) const override;

    // Chart metric g_ab at x.
    Eigen::MatrixXd metric(const double* x) const;
    double volume_density(const double* x) const;

    // Chart bounding box of the region.
    void bounding_box(std::vector<double>& lo, std::vector<double>& hi) const;
    double region_volume() const;

    ModelSpacetime(ModelKind kind, double kappa, int dim, Region region);

private:
    void validate_region() const;
    double curved_volume() const;
    void run_trust_gate();
    Eigen::VectorXd embed(const double* x) const;
    Point chart(const Eigen::VectorXd& X) const;
    double inner(const Eigen::VectorXd& X, const Eigen::VectorXd& Y) const;

    ModelKind kind_;
    double kappa_;
    double ell_ = 0.0;
    int dim_;
    Region region_;
    bool trusted_ = true;
};

double model_tau(const ModelSpacetime& model, const Point& x, const Point& y);
double model_radial_density(const ModelSpacetime& model, double r);
Point geodesic_interpolate(const ModelSpacetime& model, const Point& x, const Point& y, double t);

// RK4 integration of the geodesic equation of the chart metric from x with
// initial velocity v for parameter length s.
Point shoot_geodesic(const ModelSpacetime& model, const Point& x, const Point& v, double s, int steps = 1000);

// Named, seedable, splittable random stream.
class RngStream {
public:
    RngStream(std::uint64_t seed, const std::string& name);
    RngStream split(const std::string& name) const;
    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t key_;
    std::mt19937_64 engine_;
};

struct SamplerConfig {
    enum class Mode { Lattice, Sprinkle };
    enum class WeightRule { CellVolume, InverseDensity };
    Mode mode = Mode::Lattice;
    double spacing = 0.1;
    double density = 100.0;
    std::uint64_t seed = 0;
    WeightRule weight_rule = WeightRule::CellVolume;
    // Extra chart points appended to a sprinkle (e.g. interval endpoints).
    std::vector<std::vector<double>> anchors;

    static SamplerConfig lattice(double spacing);
    static SamplerConfig sprinkle(double density, std::uint64_t seed);
};

FiniteCausalSpace discretize(const std::shared_ptr<const ModelSpacetime>& model, const SamplerConfig& config);

// Points of a Milne-wedge lattice on the unit hyperboloid ρ = 1.
AchronalSet wedge_hyperboloid(const FiniteCausalSpace& space, double tol = 1e-9);

// Longest-chain estimate of τ(i,j) on a sprinkled 1+1 space: L/√(2ρ).
double chain_length_tau(const FiniteCausalSpace& space, int i, int j);

}  // namespace lorentz
