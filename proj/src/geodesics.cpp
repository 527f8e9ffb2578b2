#include "lorentz/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "lorentz/coefficients.hpp"
#include "lorentz/errors.hpp"

namespace lorentz {

std::vector<double> uniform_grid(int count)
{
    if (count < 2) throw DomainError("uniform_grid: need at least two points");
    std::vector<double> g(count);
    for (int k = 0; k < count; ++k) g[k] = double(k) / (count - 1);
    g.back() = 1.0;
    return g;
}

MeasurePath displacement_interpolation(const Geometry& model, const FiniteCausalSpace& space, const Coupling& plan,
                                       const std::vector<double>& times)
{
    if (times.size() < 2 || times.front() != 0.0 || times.back() != 1.0)
        throw DomainError("displacement_interpolation: times must start at 0 and end at 1");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw DomainError("displacement_interpolation: times must increase");
    for (const PlanPair& e : plan.pairs)
        if (!(space.tau(e.i, e.j) > 0))
            throw DomainError("displacement_interpolation: plan charges the non-timelike pair (" +
                              std::to_string(e.i) + "," + std::to_string(e.j) + ")");
    MeasurePath path;
    path.times = times;
    path.origin_plan = plan;
    const int d = space.dim();
    // lattice interpolants often land on exact half-cell ties; a fixed nudge
    // resolves them the same way for every pair instead of by rounding noise
    const double nudge = space.sample_info().mode == "lattice" ? 1e-7 * space.sample_info().spacing : 0.0;
    for (double t : times) {
        std::map<int, double> acc;
        std::vector<int> cells;
        double worst = 0;
        for (const PlanPair& e : plan.pairs) {
            int c;
            if (t == 0.0) c = e.i;
            else if (t == 1.0) c = e.j;
            else {
                Point z = model.interpolate(space.point(e.i), space.point(e.j), t);
                z.array() += nudge;
                c = space.snap(z);
                double dist = 0;
                for (int k = 0; k < d; ++k) dist += (z[k] - space.point(c)[k]) * (z[k] - space.point(c)[k]);
                worst = std::max(worst, std::sqrt(dist));
            }
            cells.push_back(c);
            acc[c] += e.mass;
        }
        WeightedMeasure mu;
        if (t == 0.0) mu = plan.mu;
        else if (t == 1.0) mu = plan.nu;
        else {
            double total = 0;
            for (auto& [c, m] : acc) total += m;
            for (auto& [c, m] : acc) {
                mu.support.push_back(c);
                mu.mass.push_back(m / total);
            }
        }
        path.measures.push_back(std::move(mu));
        path.snap_cell.push_back(std::move(cells));
        path.snap_displacement.push_back(worst);
    }
    return path;
}

MeasurePath displacement_interpolation(const FiniteCausalSpace& space, const Coupling& plan,
                                       const std::vector<double>& times)
{
    if (!space.geometry()) throw DomainError("displacement_interpolation: space has no continuum model");
    return displacement_interpolation(*space.geometry(), space, plan, times);
}

double geodesy_defect(const FiniteCausalSpace& space, const MeasurePath& path, double p)
{
    const Solution full = solve_lp(space, path.measures.front(), path.measures.back(), p);
    if (!full.ell_p.is_finite()) throw DomainError("geodesy_defect: endpoints not causally related");
    double worst = 0;
    for (std::size_t k = 1; k < path.times.size(); ++k) {
        const Solution s = solve_lp(space, path.measures.front(), path.measures[k], p);
        const double v = s.ell_p.is_finite() ? s.ell_p.value() : -std::numeric_limits<double>::infinity();
        worst = std::max(worst, std::abs(v - path.times[k] * full.ell_p.value()));
    }
    return worst;
}

ExtReal entropy(const WeightedMeasure& mu, const FiniteCausalSpace& space)
{
    double e = 0;
    for (std::size_t k = 0; k < mu.support.size(); ++k) {
        const double m = mu.mass[k];
        if (m == 0) continue;
        const double w = space.weight()[mu.support[k]];
        if (!(w > 0)) return ExtReal::plus_infinity();
        e += m * std::log(m / w);
    }
    return ExtReal::finite(e);
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    default: return "VACUOUS";
    }
}

double default_tolerance(const FiniteCausalSpace& space)
{
    double h = space.sample_info().spacing;
    if (h <= 0 && space.sample_info().density > 0) h = std::pow(space.sample_info().density, -1.0 / space.dim());
    return std::max(5.0 * h, 1e-6);
}

namespace {

double plan_norm_tau(const FiniteCausalSpace& space, const Coupling& plan)
{
    double s = 0;
    for (const PlanPair& e : plan.pairs) s += e.mass * space.tau(e.i, e.j) * space.tau(e.i, e.j);
    return std::sqrt(s);
}

void fill_entropy(ConvexityReport& rep, const MeasurePath& path, const FiniteCausalSpace& space, double N)
{
    rep.times = path.times;
    for (const WeightedMeasure& mu : path.measures) {
        const ExtReal e = entropy(mu, space);
        rep.entropy.push_back(e.value());
        rep.u.push_back(entropy_exp(e, N));
    }
}

}  // namespace

ConvexityReport tcd_certify(const MeasurePath& path, const Coupling& plan, double K, double N,
                            const FiniteCausalSpace& space, const CertifyOptions& opt)
{
    if (!(N >= 1)) throw DomainError("tcd_certify: N must be at least 1");
    ConvexityReport rep;
    rep.K = K;
    rep.N = N;
    rep.tolerance = opt.tol >= 0 ? opt.tol : default_tolerance(space);
    rep.norm_tau = plan_norm_tau(space, plan);
    fill_entropy(rep, path, space, N);
    const std::vector<double>& T = path.times;
    const std::size_t n = T.size();

    rep.worst_residual = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t c = a + 2; c < n; ++c) {
            const double theta = (T[c] - T[a]) * rep.norm_tau;
            for (std::size_t b = a + 1; b < c; ++b) {
                const double lam = (T[b] - T[a]) / (T[c] - T[a]);
                const ExtReal s0 = sigma(K / N, 1.0 - lam, theta), s1 = sigma(K / N, lam, theta);
                if (!s0.is_finite() || !s1.is_finite()) {
                    rep.verdict = Verdict::Vacuous;
                    rep.message = "sigma is infinite: K*|tau|^2/N reaches pi^2 (Bonnet-Myers regime)";
                    rep.triple_residuals.clear();
                    rep.second_difference_residuals.clear();
                    rep.worst_residual = -std::numeric_limits<double>::infinity();
                    return rep;
                }
                const double scale = std::max(rep.u[a], rep.u[c]);
                const double res = (rep.u[b] - s0.value() * rep.u[a] - s1.value() * rep.u[c]) / scale;
                rep.triple_residuals.push_back({T[a], T[b], T[c], res});
                rep.worst_residual = std::min(rep.worst_residual, res);
            }
        }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double h0 = T[k] - T[k - 1], h1 = T[k + 1] - T[k];
        const double h = 0.5 * (h0 + h1);
        const double e0 = rep.entropy[k - 1], e1 = rep.entropy[k], e2 = rep.entropy[k + 1];
        const double d2 = 2.0 * (h0 * (e2 - e1) - h1 * (e1 - e0)) / (h0 * h1 * (h0 + h1));
        const double d1 = (e2 - e0) / (h0 + h1);
        const double res = h * h * (d2 - d1 * d1 / N - K * rep.norm_tau * rep.norm_tau);
        rep.second_difference_residuals.push_back(res);
        rep.worst_residual = std::min(rep.worst_residual, res);
    }
    rep.verdict = rep.worst_residual >= -rep.tolerance ? Verdict::Pass : Verdict::Fail;
    return rep;
}

ConvexityReport tmcp_certify(const FiniteCausalSpace& space, const Geometry& model, const WeightedMeasure& mu0,
                             int x1, double K, double N, double p, const std::vector<double>& t_grid,
                             const CertifyOptions& opt)
{
    if (!(N >= 1)) throw DomainError("tmcp_certify: N must be at least 1");
    if (!(p > 0 && p <= 1)) throw DomainError("tmcp_certify: p must lie in (0,1]");
    check_measure(mu0, space.size(), "tmcp_certify mu0");
    if (mu0.support.size() < 2) throw DomainError("tmcp_certify: mu0 needs at least two support points");
    std::ostringstream bad;
    int nbad = 0;
    for (int x : mu0.support)
        if (!(space.tau(x, x1) > 0)) {
            if (nbad++ < 10) bad << " " << x;
        }
    if (nbad) throw DomainError("tmcp_certify: support points not in the chronological past of x1:" + bad.str());

    Coupling plan;
    plan.mu = mu0;
    plan.nu = dirac(x1);
    plan.p = p;
    for (std::size_t k = 0; k < mu0.support.size(); ++k) plan.pairs.push_back({mu0.support[k], x1, mu0.mass[k]});
    plan.value = coupling_value(space, plan.pairs, p);
    const MeasurePath path = displacement_interpolation(model, space, plan, t_grid);

    ConvexityReport rep;
    rep.K = K;
    rep.N = N;
    rep.tolerance = opt.tol >= 0 ? opt.tol : default_tolerance(space);
    rep.norm_tau = plan_norm_tau(space, plan);
    fill_entropy(rep, path, space, N);
    rep.worst_residual = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const ExtReal s = sigma(K / N, 1.0 - t_grid[k], rep.norm_tau);
        if (!s.is_finite()) {
            rep.verdict = Verdict::Vacuous;
            rep.message = "sigma is infinite: |tau(.,x1)| >= pi*sqrt(N/K)";
            rep.tmcp_residuals.clear();
            rep.worst_residual = -std::numeric_limits<double>::infinity();
            return rep;
        }
        const double res = rep.u[k] / rep.u[0] - s.value();
        rep.tmcp_residuals.push_back(res);
        rep.worst_residual = std::min(rep.worst_residual, res);
    }
    rep.verdict = rep.worst_residual >= -rep.tolerance ? Verdict::Pass : Verdict::Fail;
    return rep;
}

namespace {

class ScaledLocator : public Locator {
public:
    ScaledLocator(std::shared_ptr<const Locator> inner, double a, int dim) : inner_(std::move(inner)), a_(a), d_(dim) {}
    int nearest(const double* x) const override
    {
        std::vector<double> y(x, x + d_);
        for (double& v : y) v /= a_;
        return inner_->nearest(y.data());
    }

private:
    std::shared_ptr<const Locator> inner_;
    double a_;
    int d_;
};

}  // namespace

FiniteCausalSpace scaling_transform(const FiniteCausalSpace& space, double a, double b, double r)
{
    if (!(a > 0 && b > 0 && r > 0)) throw DomainError("scaling_transform: a, b, r must be positive");
    Coords coords = a * space.coords();
    Eigen::VectorXd w = b * space.weight();
    FiniteCausalSpace out = space.is_dense()
                                ? FiniteCausalSpace(std::move(coords), std::move(w), space.leq_matrix(),
                                                    r * space.tau_matrix(), space.labels())
                                : FiniteCausalSpace(std::move(coords), std::move(w),
                                                    std::make_shared<ScaledGeometry>(space.geometry(), a, r),
                                                    space.labels());
    if (space.locator()) out.set_locator(std::make_shared<ScaledLocator>(space.locator(), a, space.dim()));
    // spacing stays in source units so that default tolerances are scale free
    out.set_sample_info(space.sample_info());
    return out;
}

}  // namespace lorentz
