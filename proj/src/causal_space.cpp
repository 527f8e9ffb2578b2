#include "lorentz/causal_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "lorentz/errors.hpp"

namespace lorentz {

ScaledGeometry::ScaledGeometry(std::shared_ptr<const Geometry> inner, double a, double r)
    : inner_(std::move(inner)), a_(a), r_(r)
{
    if (!(a > 0 && r > 0)) throw DomainError("ScaledGeometry: scales must be positive");
}

namespace {

struct Unscaled {
    Eigen::VectorXd x, y;
    Unscaled(const double* px, const double* py, int d, double a) : x(d), y(d)
    {
        for (int k = 0; k < d; ++k) {
            x[k] = px[k] / a;
            y[k] = py[k] / a;
        }
    }
};

class ReversedGeometry : public Geometry {
public:
    explicit ReversedGeometry(std::shared_ptr<const Geometry> inner) : inner_(std::move(inner)) {}
    int dim() const override { return inner_->dim(); }
    bool leq(const double* x, const double* y) const override { return inner_->leq(y, x); }
    double tau(const double* x, const double* y) const override { return inner_->tau(y, x); }
    Point interpolate(const double* x, const double* y, double t) const override
    {
        return inner_->interpolate(y, x, 1.0 - t);
    }

private:
    std::shared_ptr<const Geometry> inner_;
};

}  // namespace

bool ScaledGeometry::leq(const double* x, const double* y) const
{
    Unscaled u(x, y, dim(), a_);
    return inner_->leq(u.x.data(), u.y.data());
}

double ScaledGeometry::tau(const double* x, const double* y) const
{
    Unscaled u(x, y, dim(), a_);
    return r_ * inner_->tau(u.x.data(), u.y.data());
}

Point ScaledGeometry::interpolate(const double* x, const double* y, double t) const
{
    Unscaled u(x, y, dim(), a_);
    return a_ * inner_->interpolate(u.x.data(), u.y.data(), t);
}

FiniteCausalSpace::FiniteCausalSpace(Coords coords, Eigen::VectorXd weight, CausalMatrix leq,
                                     Eigen::MatrixXd tau, std::vector<std::string> labels)
    : coords_(std::move(coords)), weight_(std::move(weight)), dense_(true), leq_(std::move(leq)),
      tau_(std::move(tau)), labels_(std::move(labels))
{
    const auto n = coords_.rows();
    if (weight_.size() != n || leq_.rows() != n || leq_.cols() != n || tau_.rows() != n ||
        tau_.cols() != n)
        throw DomainError("FiniteCausalSpace: inconsistent matrix sizes");
    if (!labels_.empty() && Eigen::Index(labels_.size()) != n)
        throw DomainError("FiniteCausalSpace: label count differs from point count");
}

FiniteCausalSpace::FiniteCausalSpace(Coords coords, Eigen::VectorXd weight,
                                     std::shared_ptr<const Geometry> geometry,
                                     std::vector<std::string> labels)
    : coords_(std::move(coords)), weight_(std::move(weight)), dense_(false),
      geometry_(std::move(geometry)), labels_(std::move(labels))
{
    if (!geometry_) throw DomainError("FiniteCausalSpace: null geometry");
    if (weight_.size() != coords_.rows()) throw DomainError("FiniteCausalSpace: weight size mismatch");
    if (geometry_->dim() != coords_.cols())
        throw DomainError("FiniteCausalSpace: coordinate dimension differs from geometry");
    if (!labels_.empty() && Eigen::Index(labels_.size()) != coords_.rows())
        throw DomainError("FiniteCausalSpace: label count differs from point count");
}

CausalMatrix FiniteCausalSpace::materialize_leq() const
{
    if (dense_) return leq_;
    const int n = size();
    CausalMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = leq(i, j);
    return m;
}

Eigen::MatrixXd FiniteCausalSpace::materialize_tau() const
{
    if (dense_) return tau_;
    const int n = size();
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = tau(i, j);
    return m;
}

int FiniteCausalSpace::snap(const double* x) const
{
    if (locator_) {
        int k = locator_->nearest(x);
        if (k >= 0) return k;
    }
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    const int d = dim();
    for (int i = 0; i < size(); ++i) {
        const double* p = point(i);
        double s = 0;
        for (int k = 0; k < d; ++k) s += (p[k] - x[k]) * (p[k] - x[k]);
        if (s < bd) {
            bd = s;
            best = i;
        }
    }
    return best;
}

WeightedMeasure make_measure(IndexSet support, std::vector<double> mass)
{
    if (support.size() != mass.size()) throw DomainError("measure: support and mass sizes differ");
    if (support.empty()) throw DomainError("measure: empty support");
    double total = 0;
    for (double m : mass) {
        if (!(m >= 0) || !std::isfinite(m)) throw DomainError("measure: masses must be finite and nonnegative");
        total += m;
    }
    if (!(total > 0)) throw DomainError("measure: zero total mass");
    std::set<int> seen(support.begin(), support.end());
    if (seen.size() != support.size()) throw DomainError("measure: repeated support index");
    WeightedMeasure mu;
    for (std::size_t k = 0; k < support.size(); ++k) {
        if (mass[k] == 0) continue;
        mu.support.push_back(support[k]);
        mu.mass.push_back(mass[k] / total);
    }
    return mu;
}

WeightedMeasure restricted_measure(const FiniteCausalSpace& space, const IndexSet& A)
{
    std::vector<double> m;
    m.reserve(A.size());
    for (int i : A) {
        if (i < 0 || i >= space.size()) throw DomainError("measure: index out of range");
        m.push_back(space.weight()[i]);
    }
    return make_measure(A, std::move(m));
}

WeightedMeasure dirac(int i) { return WeightedMeasure{{i}, {1.0}}; }

void check_measure(const WeightedMeasure& mu, int n, const char* what)
{
    if (mu.support.size() != mu.mass.size() || mu.support.empty())
        throw DomainError(std::string(what) + ": malformed measure");
    double total = 0;
    std::set<int> seen;
    for (std::size_t k = 0; k < mu.support.size(); ++k) {
        if (mu.support[k] < 0 || mu.support[k] >= n)
            throw DomainError(std::string(what) + ": support index out of range");
        if (!seen.insert(mu.support[k]).second) throw DomainError(std::string(what) + ": repeated index");
        if (!(mu.mass[k] >= 0)) throw DomainError(std::string(what) + ": negative mass");
        total += mu.mass[k];
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << what << ": total mass " << total << " is not 1";
        throw DomainError(os.str());
    }
}

namespace {

void check_triple(const FiniteCausalSpace& s, int i, int j, int k, double eps,
                  std::vector<Violation>& out)
{
    if (!s.leq(i, j) || !s.leq(j, k)) return;
    if (!s.leq(i, k)) {
        out.push_back({"transitive", i, j, k, 1.0, "i<=j<=k but not i<=k"});
        return;
    }
    const double d = s.tau(i, j) + s.tau(j, k) - s.tau(i, k);
    if (d > eps) out.push_back({"reverse-triangle", i, j, k, d, "tau(i,j)+tau(j,k) exceeds tau(i,k)"});
}

}  // namespace

std::vector<Violation> validate_axioms(const FiniteCausalSpace& space, double eps_rt,
                                       const ValidateOptions& opt)
{
    std::vector<Violation> out;
    const int n = space.size();
    for (int i = 0; i < n; ++i) {
        if (!(space.weight()[i] > 0)) out.push_back({"weight", i, -1, -1, space.weight()[i], "weight not positive"});
        if (space.is_dense() && !space.leq_matrix()(i, i))
            out.push_back({"reflexive", i, i, -1, 1.0, "leq not reflexive"});
        if (space.is_dense() && space.tau_matrix()(i, i) != 0)
            out.push_back({"chronology", i, i, -1, space.tau_matrix()(i, i), "tau(i,i) nonzero"});
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double t = space.tau(i, j);
            const bool c = space.leq(i, j);
            if (t < 0) out.push_back({"chronology", i, j, -1, -t, "negative tau"});
            if (t > 0 && !c) out.push_back({"causality", i, j, -1, t, "tau>0 without leq"});
            if (c && i < j && space.leq(j, i))
                out.push_back({"causality", i, j, -1, 1.0, "i<=j<=i for distinct points"});
        }
    if (n <= opt.exhaustive_limit) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (j == i || !space.leq(i, j)) continue;
                for (int k = 0; k < n; ++k)
                    if (k != j) check_triple(space, i, j, k, eps_rt, out);
            }
    } else {
        std::mt19937_64 rng(opt.seed);
        std::uniform_int_distribution<int> pick(0, n - 1);
        for (long s = 0; s < opt.sampled_triples; ++s) {
            int i = pick(rng), j = pick(rng), k = pick(rng);
            if (i != j && j != k) check_triple(space, i, j, k, eps_rt, out);
        }
    }
    return out;
}

double default_eps_rt(const FiniteCausalSpace& space)
{
    if (space.sample_info().mode == "lattice" || space.sample_info().mode == "sprinkle") {
        double h = space.sample_info().spacing;
        if (h <= 0 && space.sample_info().density > 0)
            h = std::pow(space.sample_info().density, -1.0 / space.dim());
        return 2.0 * h;
    }
    double mx = 0;
    for (int i = 0; i < space.size(); ++i)
        for (int j = 0; j < space.size(); ++j) mx = std::max(mx, space.tau(i, j));
    return 1e-9 * std::max(mx, 1.0);
}

IndexSet cone_sets(const FiniteCausalSpace& space, const IndexSet& A, Direction dir, bool strict)
{
    IndexSet out;
    for (int y = 0; y < space.size(); ++y) {
        for (int x : A) {
            const int a = dir == Direction::Future ? x : y;
            const int b = dir == Direction::Future ? y : x;
            if (strict ? space.tau(a, b) > 0 : space.leq(a, b)) {
                out.push_back(y);
                break;
            }
        }
    }
    return out;
}

AchronalCheck check_achronal(const FiniteCausalSpace& space, const IndexSet& members)
{
    for (int a : members)
        for (int b : members)
            if (a != b && space.tau(a, b) > 0) return {false, std::make_pair(a, b)};
    return {true, std::nullopt};
}

TimeSeparation signed_time_separation_with_foot(const FiniteCausalSpace& space, const AchronalSet& V)
{
    const AchronalCheck ac = check_achronal(space, V.members);
    if (!ac.achronal)
        throw DomainError("signed_time_separation: V is not achronal, tau(" +
                          std::to_string(ac.witness->first) + "," + std::to_string(ac.witness->second) +
                          ") > 0");
    const int n = space.size();
    TimeSeparation ts;
    ts.value.assign(n, ExtReal::finite(0.0));
    ts.foot.assign(n, -1);
    std::vector<char> inV(n, 0);
    for (int v : V.members) inV[v] = 1;
    for (int x = 0; x < n; ++x) {
        if (inV[x]) {
            ts.foot[x] = x;
            continue;
        }
        double fut = 0, past = 0;
        int ffoot = -1, pfoot = -1;
        for (int y : V.members) {
            const double a = space.tau(y, x);
            if (a > fut) {
                fut = a;
                ffoot = y;
            }
            const double b = space.tau(x, y);
            if (b > past) {
                past = b;
                pfoot = y;
            }
        }
        if (fut > 0) {
            ts.value[x] = ExtReal::finite(fut);
            ts.foot[x] = ffoot;
        } else if (past > 0) {
            ts.value[x] = ExtReal::finite(-past);
            ts.foot[x] = pfoot;
        }
    }
    return ts;
}

std::vector<ExtReal> signed_time_separation(const FiniteCausalSpace& space, const AchronalSet& V)
{
    return signed_time_separation_with_foot(space, V).value;
}

FiniteCausalSpace causally_reversed(const FiniteCausalSpace& space)
{
    if (space.is_dense()) {
        CausalMatrix l = space.leq_matrix().transpose();
        Eigen::MatrixXd t = space.tau_matrix().transpose();
        FiniteCausalSpace r(space.coords(), space.weight(), std::move(l), std::move(t), space.labels());
        r.set_locator(space.locator());
        r.set_sample_info(space.sample_info());
        return r;
    }
    FiniteCausalSpace r(space.coords(), space.weight(),
                        std::make_shared<ReversedGeometry>(space.geometry()), space.labels());
    r.set_locator(space.locator());
    r.set_sample_info(space.sample_info());
    return r;
}

}  // namespace lorentz
