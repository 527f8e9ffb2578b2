#include "lorentz/comparison.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lorentz/coefficients.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/geodesics.hpp"

namespace lorentz {

namespace {

double sigma_value(double kappa, double t, double theta)
{
    const ExtReal s = sigma(kappa, t, theta);
    if (!s.is_finite()) throw DomainError("brunn_minkowski_check: Theta reaches the conjugate radius");
    return s.value();
}

double mass_of(const FiniteCausalSpace& space, const IndexSet& A)
{
    double m = 0;
    for (int i : A) m += space.weight()[i];
    return m;
}

void check_indices(const FiniteCausalSpace& space, const IndexSet& A, const char* what)
{
    if (A.empty()) throw DomainError(std::string(what) + " is empty");
    for (int i : A)
        if (i < 0 || i >= space.size()) throw DomainError(std::string(what) + " has an out-of-range index");
}

}  // namespace

BrunnMinkowskiReport brunn_minkowski_check(const Geometry& model, const FiniteCausalSpace& space, const IndexSet& A0,
                                           const IndexSet& A1, const std::vector<double>& t_grid, double K, double N,
                                           const BrunnMinkowskiOptions& opt)
{
    check_indices(space, A0, "brunn_minkowski_check: A0");
    check_indices(space, A1, "brunn_minkowski_check: A1");
    if (!(N > 0)) throw DomainError("brunn_minkowski_check: N must be positive");
    BrunnMinkowskiReport rep;
    rep.tol = opt.tol >= 0 ? opt.tol : default_tolerance(space);

    if (opt.check_dualisability) {
        DualisabilityVerdict v = strong_dualisability_certificate(space, restricted_measure(space, A0),
                                                                  restricted_measure(space, A1), opt.p);
        if (!v.strongly) throw DomainError("brunn_minkowski_check: precondition fails, " + v.reason);
        rep.dualisability = std::move(v);
    }

    // Θ over the discrete sets: sup τ for K < 0, inf τ otherwise.
    double theta = K < 0 ? 0.0 : std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, int>> timelike;
    for (int x : A0)
        for (int y : A1) {
            const double d = space.tau(x, y);
            theta = K < 0 ? std::max(theta, d) : std::min(theta, d);
            if (d > 0) timelike.emplace_back(x, y);
        }
    rep.theta = theta;
    rep.m0 = mass_of(space, A0);
    rep.m1 = mass_of(space, A1);
    const double scale = std::pow(std::max(rep.m0, rep.m1), 1.0 / N);

    for (double t : t_grid) {
        if (!(t >= 0 && t <= 1)) throw DomainError("brunn_minkowski_check: t must lie in [0,1]");
        std::set<int> cells;
        if (t == 0) cells.insert(A0.begin(), A0.end());
        else if (t == 1) cells.insert(A1.begin(), A1.end());
        else
            for (const auto& [x, y] : timelike) cells.insert(space.snap(model.interpolate(space.point(x), space.point(y), t)));
        double m = 0;
        for (int c : cells) m += space.weight()[c];
        BrunnMinkowskiEntry e;
        e.t = t;
        e.mass = m;
        e.cells = int(cells.size());
        e.bound = sigma_value(K / N, 1 - t, theta) * std::pow(rep.m0, 1.0 / N);
        if (!opt.half) e.bound += sigma_value(K / N, t, theta) * std::pow(rep.m1, 1.0 / N);
        e.residual = (std::pow(m, 1.0 / N) - e.bound) / scale;
        rep.worst = std::min(rep.worst, e.residual);
        rep.entries.push_back(e);
    }
    rep.pass = rep.worst >= -rep.tol;
    return rep;
}

BishopGromovReport bishop_gromov_profile(const Geometry& model, const FiniteCausalSpace& space, int x0,
                                         const IndexSet& E, std::vector<double> radii, double K, double N, bool sharp,
                                         const BishopGromovOptions& opt)
{
    check_indices(space, E, "bishop_gromov_profile: E");
    if (x0 < 0 || x0 >= space.size()) throw DomainError("bishop_gromov_profile: x0 out of range");
    if (sharp ? !(N > 1) : !(N > 0)) throw DomainError("bishop_gromov_profile: N out of range");

    std::vector<char> inE(space.size(), 0);
    for (int i : E) inE[i] = 1;
    std::vector<std::pair<double, double>> shells;  // (τ(x0,x), m(x)) for x ∈ E ∩ I⁺(x0)
    double apex_mass = inE[x0] ? space.weight()[x0] : 0.0;
    double max_tau = 0;
    for (int x : E) {
        if (x == x0) continue;
        const double d = space.tau(x0, x);
        if (!(d > 0)) continue;
        shells.emplace_back(d, space.weight()[x]);
        max_tau = std::max(max_tau, d);
    }
    if (shells.empty()) throw DomainError("bishop_gromov_profile: E has no point in the future of x0");

    if (opt.check_star_shaped) {
        for (int x : E) {
            if (x == x0 || !(space.tau(x0, x) > 0)) continue;
            for (double t : {0.25, 0.5, 0.75}) {
                const int c = space.snap(model.interpolate(space.point(x0), space.point(x), t));
                if (!inE[c]) {
                    std::ostringstream os;
                    os << "bishop_gromov_profile: E is not star-shaped, the " << t << "-intermediate point of (" << x0
                       << "," << x << ") snaps to " << c << " outside E";
                    throw DomainError(os.str());
                }
            }
        }
    }

    std::sort(shells.begin(), shells.end());
    std::vector<double> cum(shells.size() + 1, 0.0);
    for (std::size_t k = 0; k < shells.size(); ++k) cum[k + 1] = cum[k] + shells[k].second;
    auto ball = [&](double r) {
        const auto it = std::upper_bound(shells.begin(), shells.end(), std::make_pair(r, std::numeric_limits<double>::infinity()));
        return apex_mass + cum[std::size_t(it - shells.begin())];
    };

    if (radii.empty()) {
        double h = space.sample_info().spacing;
        if (!(h > 0)) h = max_tau / 32;
        const int count = int(std::floor(max_tau / h + 1e-9));
        for (int k = 0; k < count; ++k) radii.push_back((k + 0.5) * h);
        if (radii.size() < 2) throw DomainError("bishop_gromov_profile: spacing too coarse for a radius grid");
    }
    for (std::size_t k = 0; k < radii.size(); ++k)
        if (!(radii[k] > 0) || (k > 0 && !(radii[k] > radii[k - 1])))
            throw DomainError("bishop_gromov_profile: radii must be positive and increasing");
    const double e = sharp ? N - 1 : N;
    const double kappa = K / e;
    const double R = radii.back();
    if (kappa > 0 && R > std::numbers::pi / std::sqrt(kappa))
        throw DomainError("bishop_gromov_profile: R exceeds the diameter bound");

    BishopGromovReport rep;
    rep.sharp = sharp;
    rep.tol = opt.tol >= 0 ? opt.tol : default_tolerance(space);
    VolumeProfile& P = rep.profile;
    P.radii = radii;
    const std::size_t m = radii.size();
    for (std::size_t k = 0; k < m; ++k) {
        const double delta = k + 1 < m ? radii[k + 1] - radii[k] : radii[k] - radii[k - 1];
        const double v = ball(radii[k]);
        P.v.push_back(v);
        P.s.push_back((ball(radii[k] + delta) - v) / delta);
        P.s_radii.push_back(radii[k] + delta / 2);
    }

    using boost::math::quadrature::gauss_kronrod;
    auto integral = [](double kap, double ex, double r) {
        return gauss_kronrod<double, 61>::integrate(
            [&](double x) { return std::pow(s_c_coeff(kap, x).first, ex); }, 0.0, r, 10, 1e-13);
    };
    auto sk = [](double kap, double ex, double r) { return std::pow(s_c_coeff(kap, r).first, ex); };
    const double kap_n = K / N, kap_s = N > 1 ? K / (N - 1) : 0.0;
    const double IR = integral(kappa, e, R);
    const double sR = sk(kappa, e, P.s_radii.back());
    const double IR_n = integral(kap_n, N, R), sR_n = sk(kap_n, N, P.s_radii.back());
    const double IR_s = N > 1 ? integral(kap_s, N - 1, R) : 0.0;
    const double sR_s = N > 1 ? sk(kap_s, N - 1, P.s_radii.back()) : 0.0;
    const bool can_compare = N > 1 && !(kap_s > 0 && P.s_radii.back() > std::numbers::pi / std::sqrt(kap_s));

    for (std::size_t k = 0; k < m; ++k) {
        const double vr = P.v[k] / P.v.back();
        const double vb = integral(kappa, e, radii[k]) / IR;
        const double sr = P.s[k] / P.s.back();
        const double sb = sk(kappa, e, P.s_radii[k]) / sR;
        rep.v_ratio.push_back(vr);
        rep.v_bound.push_back(vb);
        rep.v_residual.push_back(vr - vb);
        rep.s_ratio.push_back(sr);
        rep.s_bound.push_back(sb);
        rep.s_residual.push_back(sr - sb);
        rep.worst = std::min({rep.worst, vr - vb, sr - sb});
        if (can_compare) {
            const double vn = integral(kap_n, N, radii[k]) / IR_n, vs = integral(kap_s, N - 1, radii[k]) / IR_s;
            const double sn = sk(kap_n, N, P.s_radii[k]) / sR_n, ss = sk(kap_s, N - 1, P.s_radii[k]) / sR_s;
            if (vs < vn - 1e-12 || ss < sn - 1e-12) rep.sharp_not_weaker = false;
        }
    }
    rep.pass = rep.worst >= -rep.tol;
    return rep;
}

BonnetMyersReport bonnet_myers_check(const FiniteCausalSpace& space, double K, double N, bool sharp, double tol)
{
    if (!(K > 0)) throw DomainError("bonnet_myers_check: requires K > 0");
    if (sharp ? !(N > 1) : !(N > 0)) throw DomainError("bonnet_myers_check: N out of range");
    BonnetMyersReport rep;
    rep.bound = std::numbers::pi * std::sqrt((sharp ? N - 1 : N) / K);
    const int n = space.size();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = space.tau(i, j);
            if (d > rep.max_tau) {
                rep.max_tau = d;
                rep.witness = {i, j};
            }
        }
    rep.pass = rep.max_tau <= rep.bound + tol;
    return rep;
}

double weighted_neumann_eigenvalue(const std::function<double(double)>& h, double D, int elements)
{
    if (!(D > 0) || elements < 2) throw DomainError("weighted_neumann_eigenvalue: bad interval");
    const int n = elements + 1;
    const double dx = D / elements;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n), M = Eigen::MatrixXd::Zero(n, n);
    // three-point Gauss rule per element
    const double gp[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    const double gw[3] = {5.0 / 9, 8.0 / 9, 5.0 / 9};
    for (int e = 0; e < elements; ++e) {
        const double a = e * dx;
        for (int q = 0; q < 3; ++q) {
            const double xi = 0.5 * (gp[q] + 1);
            const double w = 0.5 * gw[q] * dx * h(a + xi * dx);
            const double phi[2] = {1 - xi, xi};
            const double dphi[2] = {-1 / dx, 1 / dx};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    S(e + i, e + j) += w * dphi[i] * dphi[j];
                    M(e + i, e + j) += w * phi[i] * phi[j];
                }
        }
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, M, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw DomainError("weighted_neumann_eigenvalue: eigensolver failed");
    return es.eigenvalues()[1];
}

namespace {

std::mutex cache_mutex;
std::map<std::string, double> memory_cache;

std::string cache_key(double K, double N, double D)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", K, N, D);
    return buf;
}

std::string cache_file()
{
    const char* dir = std::getenv("LORENZ_OT_CACHE");
    if (!dir || !*dir) return {};
    return std::string(dir) + "/poincare_mcp.txt";
}

bool disk_lookup(const std::string& key, double& value)
{
    const std::string path = cache_file();
    if (path.empty()) return false;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        const auto cut = line.rfind(' ');
        if (cut == std::string::npos) continue;
        if (line.substr(0, cut) == key) {
            value = std::strtod(line.c_str() + cut + 1, nullptr);
            return true;
        }
    }
    return false;
}

void disk_store(const std::string& key, double value)
{
    const std::string path = cache_file();
    if (path.empty()) return;
    std::ofstream out(path, std::ios::app);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out << key << ' ' << buf << '\n';
}

// Largest 1/λ₁ over the boundary of the MCP(K,N) density cone for K < 0:
// h^{1/(N-1)} among sinh-, cosh- and exp-profiles of rate √(-K/(N-1)).
double extremal_search(double K, double N, double D)
{
    const double c = std::sqrt(-K / (N - 1));
    const double e = N - 1;
    double worst = 0;
    auto consider = [&](const std::function<double(double)>& f) {
        const double lam = weighted_neumann_eigenvalue([&](double t) { return std::pow(f(t), e); }, D);
        worst = std::max(worst, 1 / lam);
    };
    const int shifts = 24;
    for (int k = 0; k <= shifts; ++k) {
        const double off = 4 * D * k / shifts;
        consider([&](double t) { return std::sinh(c * (t + off)); });
        consider([&](double t) { return std::sinh(c * (D - t + off)); });
    }
    for (int k = 0; k <= shifts; ++k) {
        const double mid = -2 * D + 5 * D * k / shifts;
        consider([&](double t) { return std::cosh(c * (t - mid)); });
    }
    consider([&](double t) { return std::exp(c * t); });
    consider([&](double t) { return std::exp(-c * t); });
    return worst;
}

}  // namespace

PoincareConstant poincare_constant(double K, double N, double D)
{
    if (!(D > 0)) throw DomainError("poincare_constant: D must be positive");
    if (!(N >= 1)) throw DomainError("poincare_constant: N must be at least 1");
    PoincareConstant pc;
    if (K >= 0 || N == 1) {
        // log-concave densities: Payne–Weinberger, sharp for the constant density
        pc.value = D * D / (std::numbers::pi * std::numbers::pi);
        pc.certified = true;
        pc.source = "Payne-Weinberger D^2/pi^2";
        return pc;
    }
    const std::string key = cache_key(K, N, D);
    std::lock_guard<std::mutex> lock(cache_mutex);
    double value;
    if (auto it = memory_cache.find(key); it != memory_cache.end()) {
        value = it->second;
        pc.source = "extremal density search (memory cache)";
    } else if (disk_lookup(key, value)) {
        memory_cache[key] = value;
        pc.source = "extremal density search (disk cache)";
    } else {
        value = 1.02 * std::max(extremal_search(K, N, D), D * D / (std::numbers::pi * std::numbers::pi));
        memory_cache[key] = value;
        disk_store(key, value);
        pc.source = "extremal density search";
    }
    pc.value = value;
    pc.certified = false;
    return pc;
}

PoincareReport poincare_check(const FiniteCausalSpace& space, const AchronalSet& V, const std::vector<double>& u,
                              double K, double N, const RayDecomposition& rays, double tol)
{
    if (int(u.size()) != space.size()) throw DomainError("poincare_check: u must have one value per point");
    if (rays.V.members != V.members) throw DomainError("poincare_check: rays were computed for a different V");
    std::vector<char> on_ray(space.size(), 0);
    for (const Ray& r : rays.rays)
        for (std::size_t k = 0; k < r.points.size(); ++k)
            if (r.t_values[k] > 0) on_ray[r.points[k]] = 1;
    for (int x = 0; x < space.size(); ++x)
        if (u[x] != 0 && !on_ray[x])
            throw DomainError("poincare_check: u is nonzero at point " + std::to_string(x) + " outside I+(V)");

    PoincareReport rep;
    double grad_total = 0;
    for (const Ray& r : rays.rays) {
        int lo = -1, hi = -1;
        for (std::size_t k = 0; k < r.points.size(); ++k)
            if (u[r.points[k]] != 0) {
                if (lo < 0) lo = int(k);
                hi = int(k);
            }
        if (lo < 0) continue;
        double mass = 0, mean = 0;
        for (int k = lo; k <= hi; ++k) {
            mass += r.weights[k];
            mean += r.weights[k] * u[r.points[k]];
        }
        mean /= mass;
        double lhs = 0, grad = 0;
        for (int k = lo; k <= hi; ++k) lhs += r.weights[k] * std::pow(u[r.points[k]] - mean, 2);
        for (int k = lo; k < hi; ++k) {
            const double q = (u[r.points[k + 1]] - u[r.points[k]]) / (r.t_values[k + 1] - r.t_values[k]);
            grad += q * q * 0.5 * (r.weights[k] + r.weights[k + 1]);
        }
        rep.D = std::max(rep.D, r.cell_hi[hi] - r.cell_lo[lo]);
        rep.lhs += lhs;
        grad_total += grad;
        rep.per_ray.emplace_back(r.alpha, lhs, grad);
    }
    if (rep.per_ray.empty()) return rep;
    const PoincareConstant pc = poincare_constant(K, N, rep.D);
    rep.lambda_used = pc.value;
    rep.certified = pc.certified;
    rep.lambda_source = pc.source;
    rep.rhs = pc.value * grad_total;
    rep.pass = rep.lhs <= rep.rhs * (1 + tol) + 1e-300;
    return rep;
}

}  // namespace lorentz
