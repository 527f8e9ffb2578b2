#include "lorentz/disintegration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "lorentz/coefficients.hpp"
#include "lorentz/errors.hpp"

namespace lorentz {

namespace {

double median(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x)
    {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

TransportRelation transport_relation(const FiniteCausalSpace& space, const AchronalSet& V, double eps,
                                     bool count_cross_foot)
{
    TransportRelation rel;
    rel.V = V;
    TimeSeparation ts = signed_time_separation_with_foot(space, V);
    rel.tau_V = ts.value;
    rel.foot = ts.foot;
    const int n = space.size();
    std::vector<char> inV(n, 0);
    for (int v : V.members) inV[v] = 1;
    double max_tv = 0;
    for (int x = 0; x < n; ++x) {
        const double t = rel.tau_V[x].value();
        if (inV[x] || t > 0) {
            rel.domain.push_back(x);
            max_tv = std::max(max_tv, t);
        }
    }
    if (eps < 0) {
        const double h = space.sample_info().spacing;
        eps = h > 0 ? 2 * h * (1 + max_tv) : 1e-9 * (1 + max_tv);
    }
    rel.eps = eps;

    std::map<int, IndexSet> groups;
    for (int x : rel.domain) groups[rel.foot[x]].push_back(x);
    for (auto& [f, g] : groups) {
        std::sort(g.begin(), g.end(), [&](int a, int b) { return rel.tau_V[a].value() < rel.tau_V[b].value(); });
        for (std::size_t a = 0; a < g.size(); ++a)
            for (std::size_t b = a + 1; b < g.size(); ++b) {
                const int x = g[a], z = g[b];
                const double d = space.tau(x, z);
                if (!(d > 0) || !space.leq(x, z)) continue;
                if (std::abs(rel.tau_V[z].value() - rel.tau_V[x].value() - d) <= eps) rel.gamma.emplace_back(x, z);
            }
    }
    if (count_cross_foot) {
        long count = 0;
        for (int x : rel.domain)
            for (int z : rel.domain) {
                if (rel.foot[x] == rel.foot[z]) continue;
                const double d = space.tau(x, z);
                if (d > 0 && std::abs(rel.tau_V[z].value() - rel.tau_V[x].value() - d) <= eps) ++count;
            }
        rel.cross_foot_pairs = count;
    }
    return rel;
}

double Ray::cell_density(int k, double total_mass) const
{
    return weights[k] * total_mass / (mass * (cell_hi[k] - cell_lo[k]));
}

RayDecomposition extract_rays(const FiniteCausalSpace& space, const TransportRelation& rel, double tol)
{
    if (tol < 0) tol = rel.eps;
    const int n = space.size();
    RayDecomposition out;
    out.V = rel.V;
    std::vector<char> inV(n, 0);
    for (int v : rel.V.members) inV[v] = 1;

    UnionFind uf(n);
    std::vector<char> touched(n, 0);
    for (const auto& [x, z] : rel.gamma) {
        uf.unite(x, z);
        touched[x] = touched[z] = 1;
    }
    std::map<int, IndexSet> comps;
    for (int x : rel.domain) {
        if (!touched[x]) {
            out.unassigned.push_back(x);
            continue;
        }
        comps[uf.find(x)].push_back(x);
    }

    auto tv = [&](int x) { return rel.tau_V[x].value(); };
    std::vector<IndexSet> segments;
    for (auto& [root, c] : comps) {
        std::sort(c.begin(), c.end(), [&](int a, int b) { return tv(a) < tv(b) || (tv(a) == tv(b) && a < b); });
        IndexSet seg{c[0]};
        for (std::size_t k = 1; k < c.size(); ++k) {
            const int prev = seg.back(), cur = c[k];
            bool ok = tv(cur) > tv(prev) && std::abs(space.tau(prev, cur) - (tv(cur) - tv(prev))) <= tol;
            if (ok && seg.size() >= 2) {
                const int pp = seg[seg.size() - 2];
                ok = std::abs(space.tau(pp, cur) - (tv(cur) - tv(pp))) <= tol;
            }
            if (!ok) {
                std::ostringstream os;
                os << "split between points " << prev << " and " << cur << " (tau_V " << tv(prev) << ", "
                   << tv(cur) << ")";
                out.log.push_back(os.str());
                ++out.splits;
                segments.push_back(std::move(seg));
                seg = {cur};
            } else {
                seg.push_back(cur);
            }
        }
        segments.push_back(std::move(seg));
    }

    std::vector<double> gaps;
    for (const IndexSet& s : segments)
        for (std::size_t k = 1; k < s.size(); ++k) gaps.push_back(tv(s[k]) - tv(s[k - 1]));
    double h = space.sample_info().spacing;
    if (!(h > 0)) h = median(gaps);
    if (!(h > 0)) h = 1.0;
    out.spacing = h;

    for (const IndexSet& s : segments) {
        Ray r;
        r.alpha = int(out.rays.size());
        r.points = s;
        const std::size_t m = s.size();
        for (int x : s) {
            r.t_values.push_back(tv(x));
            r.weights.push_back(space.weight()[x]);
            r.mass += space.weight()[x];
        }
        r.cell_lo.resize(m);
        r.cell_hi.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double below = k > 0 ? r.t_values[k] - r.t_values[k - 1] : (m > 1 ? r.t_values[1] - r.t_values[0] : h);
            const double above =
                k + 1 < m ? r.t_values[k + 1] - r.t_values[k] : (m > 1 ? r.t_values[k] - r.t_values[k - 1] : h);
            r.cell_lo[k] = r.t_values[k] - below / 2;
            r.cell_hi[k] = r.t_values[k] + above / 2;
        }
        if (inV[s[0]]) r.foot = s[0];
        out.total_mass += r.mass;
        out.endpoints_a.push_back(s.front());
        out.endpoints_b.push_back(s.back());
        out.rays.push_back(std::move(r));
    }
    for (Ray& r : out.rays) r.q_weight = out.total_mass > 0 ? r.mass / out.total_mass : 0.0;
    bin_densities(out);
    return out;
}

void bin_densities(RayDecomposition& rd)
{
    for (Ray& r : rd.rays) {
        r.h_samples.clear();
        if (r.points.empty() || !(r.mass > 0)) continue;
        const double w = std::max(2 * rd.spacing, r.length() / 32);
        const double origin = r.cell_lo.front();
        std::map<long, DensityBin> bins;
        for (std::size_t k = 0; k < r.points.size(); ++k) {
            const long b = long(std::floor((r.t_values[k] - origin) / w));
            auto it = bins.find(b);
            if (it == bins.end()) bins[b] = {r.cell_lo[k], r.cell_hi[k], r.weights[k], 0};
            else {
                it->second.lo = std::min(it->second.lo, r.cell_lo[k]);
                it->second.hi = std::max(it->second.hi, r.cell_hi[k]);
                it->second.mass += r.weights[k];
            }
        }
        for (auto& [b, bin] : bins) {
            bin.h = bin.mass * rd.total_mass / (r.mass * (bin.hi - bin.lo));
            r.h_samples.push_back(bin);
        }
    }
}

McpReport mcp_density_test(const RayDecomposition& rd, double K, double N, double tol)
{
    if (!(N >= 1)) throw DomainError("mcp_density_test: N must be at least 1");
    McpReport rep;
    auto record = [&](int alpha, int b0, int b1, const std::string& side, double res) {
        if (!rep.witness || res < rep.witness->residual) rep.witness = McpWitness{alpha, b0, b1, side, res};
    };
    for (const Ray& r : rd.rays) {
        const auto& bins = r.h_samples;
        if (bins.size() < 3) {
            ++rep.skipped;
            rep.skipped_mass += r.mass;
            continue;
        }
        ++rep.tested;
        double ray_worst = 0;
        if (N == 1) {
            double lo = std::numeric_limits<double>::infinity(), hi = 0, mean = 0;
            for (const DensityBin& b : bins) {
                lo = std::min(lo, b.h);
                hi = std::max(hi, b.h);
                mean += b.h / bins.size();
            }
            ray_worst = -(hi - lo) / mean;
            if (-ray_worst > tol) record(r.alpha, -1, -1, "spread", -(hi - lo) / mean);
            rep.ray_residuals.emplace_back(r.alpha, ray_worst);
            rep.worst = std::min(rep.worst, ray_worst);
            continue;
        }
        const double kappa = K / (N - 1);
        const double a = bins.front().lo, b = bins.back().hi;
        if (kappa > 0 && b - a > std::numbers::pi / std::sqrt(kappa)) {
            const double res = std::numbers::pi / std::sqrt(kappa) - (b - a);
            record(r.alpha, -1, -1, "length", res);
            rep.ray_residuals.emplace_back(r.alpha, res);
            rep.worst = std::min(rep.worst, res);
            continue;
        }
        auto sk = [&](double x) { return std::pow(s_c_coeff(kappa, x).first, N - 1); };
        for (std::size_t i = 0; i < bins.size(); ++i)
            for (std::size_t j = i + 1; j < bins.size(); ++j) {
                const double t0 = 0.5 * (bins[i].lo + bins[i].hi), t1 = 0.5 * (bins[j].lo + bins[j].hi);
                const double ratio = bins[j].h / bins[i].h;
                const double lower = sk(b - t1) / sk(b - t0);
                const double upper = sk(t1 - a) / sk(t0 - a);
                const double rl = ratio / lower - 1, ru = upper / ratio - 1;
                ray_worst = std::min({ray_worst, rl, ru});
                if (rl < -tol) record(r.alpha, int(i), int(j), "lower", rl);
                if (ru < -tol) record(r.alpha, int(i), int(j), "upper", ru);
            }
        rep.ray_residuals.emplace_back(r.alpha, ray_worst);
        rep.worst = std::min(rep.worst, ray_worst);
    }
    rep.pass = !rep.witness.has_value();
    return rep;
}

LevelMeasures level_measures(const RayDecomposition& rd, const std::vector<double>& t_grid,
                             std::vector<LevelTestSet> tests)
{
    LevelMeasures out;
    out.t_grid = t_grid;
    double t_min = std::numeric_limits<double>::infinity(), t_max = -t_min;
    for (const Ray& r : rd.rays) {
        t_min = std::min(t_min, r.t_values.front());
        t_max = std::max(t_max, r.t_values.back());
    }
    if (rd.rays.empty()) return out;
    for (double t : t_grid) {
        double H = 0;
        for (const Ray& r : rd.rays)
            for (std::size_t k = 0; k < r.points.size(); ++k)
                if (r.cell_lo[k] <= t && t < r.cell_hi[k]) H += r.q_weight * r.cell_density(int(k), rd.total_mass);
        out.H.push_back(H);
    }

    if (tests.empty()) {
        const double T = t_max - t_min;
        std::vector<int> even, odd, first_half;
        for (const Ray& r : rd.rays) {
            (r.alpha % 2 ? odd : even).push_back(r.alpha);
            if (2 * r.alpha < int(rd.rays.size())) first_half.push_back(r.alpha);
        }
        tests.push_back({{}, t_min, t_max});
        tests.push_back({even, t_min, t_min + T / 2});
        tests.push_back({odd, t_min + T / 4, t_min + 3 * T / 4});
        tests.push_back({first_half, t_min + T / 3, t_max});
        tests.push_back({{}, t_min + T / 2, t_max});
    }

    // ∫H_t(A)dt over the piecewise constant density: each cell of a point of A
    // contributes 𝔮(α)·h·|cell|.
    for (const LevelTestSet& A : tests) {
        std::vector<char> sel(rd.rays.size(), A.rays.empty() ? 1 : 0);
        for (int a : A.rays)
            if (a >= 0 && a < int(sel.size())) sel[a] = 1;
        CoareaCheck c;
        c.set = A;
        for (const Ray& r : rd.rays) {
            if (!sel[r.alpha]) continue;
            for (std::size_t k = 0; k < r.points.size(); ++k) {
                if (r.t_values[k] < A.t_lo || r.t_values[k] > A.t_hi) continue;
                c.mass += r.weights[k];
                c.integral += r.q_weight * r.cell_density(int(k), rd.total_mass) * (r.cell_hi[k] - r.cell_lo[k]);
            }
        }
        c.residual = c.mass > 0 ? std::abs(c.mass - c.integral) / c.mass : 0.0;
        out.worst_residual = std::max(out.worst_residual, c.residual);
        out.checks.push_back(c);
    }
    double total = 0;
    for (const Ray& r : rd.rays)
        for (std::size_t k = 0; k < r.points.size(); ++k)
            total += r.q_weight * r.cell_density(int(k), rd.total_mass) * (r.cell_hi[k] - r.cell_lo[k]);
    out.mass_residual = rd.total_mass > 0 ? std::abs(total - rd.total_mass) / rd.total_mass : 0.0;
    return out;
}

MeanCurvatureEstimate mean_curvature_estimate(const FiniteCausalSpace& space, const RayDecomposition& rd,
                                              const std::vector<double>& phi, double t_max)
{
    const auto& members = rd.V.members;
    if (phi.size() != members.size())
        throw DomainError("mean_curvature_estimate: phi must have one value per member of V");
    std::map<int, double> phi_of;
    for (std::size_t k = 0; k < members.size(); ++k) {
        if (!(phi[k] >= 0) || !std::isfinite(phi[k]))
            throw DomainError("mean_curvature_estimate: phi must be finite and nonnegative");
        phi_of[members[k]] = phi[k];
    }
    if (!(t_max > 0)) throw DomainError("mean_curvature_estimate: t_max must be positive");

    struct Active {
        const Ray* ray;
        double phi;
    };
    std::vector<Active> act;
    double phi_max = 0, min_len = std::numeric_limits<double>::infinity();
    MeanCurvatureEstimate est;
    est.phi = phi;
    for (const Ray& r : rd.rays) {
        if (r.foot < 0) continue;
        const double f = phi_of.count(r.foot) ? phi_of[r.foot] : 0.0;
        if (f == 0) continue;
        // density of the cell containing τ_V = 0
        int k0 = -1;
        for (std::size_t k = 0; k < r.points.size(); ++k)
            if (r.cell_lo[k] <= 0 && 0 < r.cell_hi[k]) k0 = int(k);
        const double h0 = k0 >= 0 ? r.weights[k0] / (r.cell_hi[k0] - r.cell_lo[k0]) : 0.0;
        if (!(h0 > 1e-14 * r.mass / std::max(r.length(), 1e-300))) {
            std::ostringstream os;
            os << "mean_curvature_estimate: codimension condition fails, h(alpha,0) vanishes on the ray from V point "
               << r.foot;
            throw DomainError(os.str());
        }
        est.phi_H0 += f * h0;
        est.phi2_H0 += f * f * h0;
        phi_max = std::max(phi_max, f);
        min_len = std::min(min_len, r.cell_hi.back());
        act.push_back({&r, f});
    }
    if (act.empty()) throw DomainError("mean_curvature_estimate: phi vanishes on every ray");
    t_max = std::min(t_max, min_len / phi_max);

    double h = rd.spacing > 0 ? rd.spacing : space.sample_info().spacing;
    const double t_lo = std::min(std::max(t_max / 4, 4 * h), t_max / 2);
    const int count = 16;
    est.fit_window = {t_lo, t_max};
    for (int i = 0; i < count; ++i) {
        const double t = t_lo + (t_max - t_lo) * i / (count - 1);
        double m = 0;
        for (const Active& a : act) {
            const Ray& r = *a.ray;
            const double top = t * a.phi;
            for (std::size_t k = 0; k < r.points.size(); ++k) {
                const double lo = std::max(0.0, r.cell_lo[k]), hi = std::min(top, r.cell_hi[k]);
                if (hi > lo) m += r.weights[k] * (hi - lo) / (r.cell_hi[k] - r.cell_lo[k]);
            }
        }
        est.t_grid.push_back(t);
        est.quotient.push_back((m - t * est.phi_H0) / (t * t / 2));
    }
    // Least-squares line through (t, Q(t)); the intercept is the t → 0 limit.
    double st = 0, sq = 0, stt = 0, stq = 0;
    for (int i = 0; i < count; ++i) {
        st += est.t_grid[i];
        sq += est.quotient[i];
        stt += est.t_grid[i] * est.t_grid[i];
        stq += est.t_grid[i] * est.quotient[i];
    }
    const double den = count * stt - st * st;
    const double slope = (count * stq - st * sq) / den;
    const double intercept = (sq - slope * st) / count;
    double rss = 0;
    for (int i = 0; i < count; ++i) {
        const double e = est.quotient[i] - intercept - slope * est.t_grid[i];
        rss += e * e;
    }
    est.residual = std::sqrt(rss / count);
    est.H0_sample = intercept / est.phi2_H0;
    return est;
}

HawkingReport hawking_certify(const FiniteCausalSpace& /*space*/, const RayDecomposition& rd, double H0, double K,
                              double N, double tol)
{
    HawkingReport rep;
    for (const Ray& r : rd.rays)
        for (std::size_t k = 0; k < r.points.size(); ++k) {
            if (!(r.t_values[k] > 0)) continue;
            rep.future_mass += r.weights[k];
            if (r.t_values[k] > rep.sup_tau_V) {
                rep.sup_tau_V = r.t_values[k];
                rep.witness = r.points[k];
            }
        }
    if (N == 1) {
        if (!(H0 < 0)) throw RegimeError("hawking_certify: N = 1 requires H0 < 0");
        rep.regime = "N=1";
        rep.D = std::numeric_limits<double>::infinity();
        rep.pass = rep.future_mass == 0;
        return rep;
    }
    rep.D = hawking_threshold(HawkingParams<double>{H0, K, N});
    rep.regime = K > 0 ? "K>0" : (K == 0 ? "K=0" : "K<0");
    rep.pass = rep.sup_tau_V <= rep.D + tol;
    return rep;
}

}  // namespace lorentz
