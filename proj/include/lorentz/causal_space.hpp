#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lorentz/extended.hpp"

namespace lorentz {

using Coords = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Point = Eigen::VectorXd;
using CausalMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using IndexSet = std::vector<int>;

// Continuum structure behind a sampled space: causal order, time separation
// and timelike geodesics in chart coordinates.
class Geometry {
public:
    virtual ~Geometry() = default;
    virtual int dim() const = 0;
    virtual bool leq(const double* x, const double* y) const = 0;
    virtual double tau(const double* x, const double* y) const = 0;
    virtual Point interpolate(const double* x, const double* y, double t) const = 0;
};

// The rescaled structure (a·coords, r·τ) of an inner geometry.
class ScaledGeometry : public Geometry {
public:
    ScaledGeometry(std::shared_ptr<const Geometry> inner, double a, double r);
    int dim() const override { return inner_->dim(); }
    bool leq(const double* x, const double* y) const override;
    double tau(const double* x, const double* y) const override;
    Point interpolate(const double* x, const double* y, double t) const override;

    const std::shared_ptr<const Geometry>& inner() const { return inner_; }
    double coord_scale() const { return a_; }
    double tau_scale() const { return r_; }

private:
    std::shared_ptr<const Geometry> inner_;
    double a_, r_;
};

// Nearest-point lookup accelerated by the sampling structure.
class Locator {
public:
    virtual ~Locator() = default;
    // Index of the nearest space point, or -1 when the structure cannot
    // answer (caller falls back to brute force).
    virtual int nearest(const double* x) const = 0;
};

struct SampleInfo {
    std::string mode;  // "lattice", "sprinkle" or empty for hand-built spaces
    double spacing = 0.0;
    double density = 0.0;
    std::uint64_t seed = 0;
};

class FiniteCausalSpace {
public:
    FiniteCausalSpace() = default;

    // Explicit matrices.
    FiniteCausalSpace(Coords coords, Eigen::VectorXd weight, CausalMatrix leq, Eigen::MatrixXd tau,
                      std::vector<std::string> labels = {});

    // Matrices evaluated on demand from a continuum geometry.
    FiniteCausalSpace(Coords coords, Eigen::VectorXd weight, std::shared_ptr<const Geometry> geometry,
                      std::vector<std::string> labels = {});

    int size() const { return int(coords_.rows()); }
    int dim() const { return int(coords_.cols()); }
    const Coords& coords() const { return coords_; }
    const double* point(int i) const { return coords_.data() + std::size_t(i) * coords_.cols(); }
    const Eigen::VectorXd& weight() const { return weight_; }
    const std::vector<std::string>& labels() const { return labels_; }

    bool leq(int i, int j) const
    {
        if (i == j) return true;
        return dense_ ? leq_(i, j) : geometry_->leq(point(i), point(j));
    }
    double tau(int i, int j) const
    {
        if (i == j) return 0.0;
        return dense_ ? tau_(i, j) : geometry_->tau(point(i), point(j));
    }

    bool is_dense() const { return dense_; }
    const CausalMatrix& leq_matrix() const { return leq_; }
    const Eigen::MatrixXd& tau_matrix() const { return tau_; }
    CausalMatrix materialize_leq() const;
    Eigen::MatrixXd materialize_tau() const;

    const std::shared_ptr<const Geometry>& geometry() const { return geometry_; }
    const std::shared_ptr<const Locator>& locator() const { return locator_; }
    void set_locator(std::shared_ptr<const Locator> l) { locator_ = std::move(l); }
    const SampleInfo& sample_info() const { return info_; }
    void set_sample_info(SampleInfo info) { info_ = std::move(info); }

    // Nearest point in coords (Euclidean), lowest index on ties.
    int snap(const double* x) const;
    int snap(const Point& x) const { return snap(x.data()); }

private:
    Coords coords_;
    Eigen::VectorXd weight_;
    bool dense_ = true;
    CausalMatrix leq_;
    Eigen::MatrixXd tau_;
    std::shared_ptr<const Geometry> geometry_;
    std::shared_ptr<const Locator> locator_;
    SampleInfo info_;
    std::vector<std::string> labels_;
};

struct WeightedMeasure {
    IndexSet support;
    std::vector<double> mass;
};

// Normalized weights on the given indices; throws DomainError on
// negative/zero total or repeated indices.
WeightedMeasure make_measure(IndexSet support, std::vector<double> mass);
// Normalized reference measure restricted to A.
WeightedMeasure restricted_measure(const FiniteCausalSpace& space, const IndexSet& A);
WeightedMeasure dirac(int i);
// Throws DomainError unless μ is a normalized measure on the space.
void check_measure(const WeightedMeasure& mu, int n, const char* what);

struct Violation {
    std::string kind;  // "reflexive", "transitive", "chronology", "causality", "reverse-triangle", "weight"
    int i = -1, j = -1, k = -1;
    double defect = 0.0;
    std::string message;
};

struct ValidateOptions {
    // Exhaustive triple checks up to this size, sampled triples above.
    int exhaustive_limit = 400;
    long sampled_triples = 5'000'000;
    std::uint64_t seed = 1;
};

std::vector<Violation> validate_axioms(const FiniteCausalSpace& space, double eps_rt,
                                       const ValidateOptions& opt = {});

// Default reverse-triangle tolerance: 2·spacing for sampled spaces, 1e-9·max τ otherwise.
double default_eps_rt(const FiniteCausalSpace& space);

enum class Direction { Future, Past };

IndexSet cone_sets(const FiniteCausalSpace& space, const IndexSet& A, Direction dir, bool strict);

struct AchronalSet {
    IndexSet members;
    std::string label;
};

struct AchronalCheck {
    bool achronal = true;
    std::optional<std::pair<int, int>> witness;
};

AchronalCheck check_achronal(const FiniteCausalSpace& space, const IndexSet& members);

struct TimeSeparation {
    std::vector<ExtReal> value;
    // Maximizing member of V for points in I⁺(V) ∪ I⁻(V), the point itself on V, -1 otherwise.
    std::vector<int> foot;
};

TimeSeparation signed_time_separation_with_foot(const FiniteCausalSpace& space, const AchronalSet& V);
std::vector<ExtReal> signed_time_separation(const FiniteCausalSpace& space, const AchronalSet& V);

// Same points and weights with the causal order reversed.
FiniteCausalSpace causally_reversed(const FiniteCausalSpace& space);

}  // namespace lorentz
