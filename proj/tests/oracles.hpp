#pragma once

// Independent reference computations used by the unit, property and
// acceptance tests. Nothing here calls into the library's solvers.

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "lorentz/causal_space.hpp"

namespace oracle {

using Dec = boost::multiprecision::cpp_dec_float_50;

inline Dec pi50() { return boost::math::constants::pi<Dec>(); }

// 𝔰_κ, 𝔠_κ at 50 digits.
inline std::pair<Dec, Dec> s_c(Dec kappa, Dec theta)
{
    using boost::multiprecision::cos;
    using boost::multiprecision::cosh;
    using boost::multiprecision::sin;
    using boost::multiprecision::sinh;
    using boost::multiprecision::sqrt;
    if (kappa > 0) {
        const Dec k = sqrt(kappa);
        return {sin(k * theta) / k, cos(k * theta)};
    }
    if (kappa < 0) {
        const Dec k = sqrt(-kappa);
        return {sinh(k * theta) / k, cosh(k * theta)};
    }
    return {theta, Dec(1)};
}

// σ_κ^{(t)}(θ); nullopt stands for +∞.
inline std::optional<Dec> sigma(Dec kappa, Dec t, Dec theta)
{
    const Dec u = kappa * theta * theta;
    if (u >= pi50() * pi50()) return std::nullopt;
    if (u == 0) return t;
    return s_c(kappa, t * theta).first / s_c(kappa, theta).first;
}

inline std::optional<Dec> tau_coeff(Dec K, Dec N, Dec t, Dec theta)
{
    const auto s = sigma(K / (N - 1), t, theta);
    if (!s) return std::nullopt;
    using boost::multiprecision::pow;
    return pow(t, 1 / N) * pow(*s, (N - 1) / N);
}

inline double minkowski_tau(const std::vector<double>& x, const std::vector<double>& y)
{
    const double dt = y[0] - x[0];
    double r2 = 0;
    for (std::size_t k = 1; k < x.size(); ++k) r2 += (y[k] - x[k]) * (y[k] - x[k]);
    if (dt < 0) return 0;
    const double q = dt * dt - r2;
    return q > 0 ? std::sqrt(q) : 0;
}

inline bool minkowski_leq(const std::vector<double>& x, const std::vector<double>& y)
{
    const double dt = y[0] - x[0];
    double r2 = 0;
    for (std::size_t k = 1; k < x.size(); ++k) r2 += (y[k] - x[k]) * (y[k] - x[k]);
    return dt >= 0 && dt * dt >= r2;
}

// Dense space from explicit Minkowski points with unit weights.
inline lorentz::FiniteCausalSpace minkowski_points(const std::vector<std::vector<double>>& pts,
                                                   std::vector<double> weight = {})
{
    const int n = int(pts.size()), d = int(pts.front().size());
    lorentz::Coords c(n, d);
    lorentz::CausalMatrix leq(n, n);
    Eigen::MatrixXd tau(n, n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) c(i, k) = pts[i][k];
        for (int j = 0; j < n; ++j) {
            leq(i, j) = i == j || minkowski_leq(pts[i], pts[j]);
            tau(i, j) = i == j ? 0.0 : minkowski_tau(pts[i], pts[j]);
        }
    }
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    if (!weight.empty()) w = Eigen::Map<Eigen::VectorXd>(weight.data(), n);
    return lorentz::FiniteCausalSpace(c, w, leq, tau);
}

// Maximum of Σ π_ij c_ij over the vertices of the transport polytope
// restricted to the allowed arcs, by enumerating maximal forests of the arc
// graph. Every vertex is supported on a forest, hence on a maximal one, and
// the flow on a maximal forest is unique when it exists. nullopt: no feasible
// coupling.
inline std::optional<double> transport_vertex_max(const std::vector<double>& a, const std::vector<double>& b,
                                                  const std::vector<std::vector<bool>>& allowed,
                                                  const std::vector<std::vector<double>>& cost)
{
    const int m = int(a.size()), n = int(b.size()), V = m + n;
    std::vector<std::pair<int, int>> arcs;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            if (allowed[i][j]) arcs.push_back({i, j});
    // components of the arc graph fix the size of a maximal forest
    std::vector<int> root(V);
    std::function<int(int)> find = [&](int x) { return root[x] == x ? x : root[x] = find(root[x]); };
    for (int v = 0; v < V; ++v) root[v] = v;
    int comps = V;
    for (auto [i, j] : arcs) {
        const int ri = find(i), rj = find(m + j);
        if (ri != rj) {
            root[ri] = rj;
            --comps;
        }
    }
    const int need = V - comps;

    // union-find with undo for the enumeration
    std::vector<int> par(V), sz(V, 1);
    for (int v = 0; v < V; ++v) par[v] = v;
    auto top = [&](int x) {
        while (par[x] != x) x = par[x];
        return x;
    };
    std::vector<int> chosen;
    std::optional<double> best;

    auto evaluate = [&]() {
        std::vector<double> bal(V);
        for (int i = 0; i < m; ++i) bal[i] = a[i];
        for (int j = 0; j < n; ++j) bal[m + j] = -b[j];
        std::vector<std::vector<std::pair<int, int>>> adj(V);  // (neighbour, arc id)
        for (int e : chosen) {
            adj[arcs[e].first].push_back({m + arcs[e].second, e});
            adj[m + arcs[e].second].push_back({arcs[e].first, e});
        }
        std::vector<int> deg(V);
        for (int v = 0; v < V; ++v) deg[v] = int(adj[v].size());
        std::vector<char> used(arcs.size(), 0);
        std::vector<double> flow(arcs.size(), 0);
        std::vector<int> stack;
        for (int v = 0; v < V; ++v)
            if (deg[v] == 1) stack.push_back(v);
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            if (deg[v] != 1) continue;
            for (auto [w, e] : adj[v]) {
                if (used[e]) continue;
                used[e] = 1;
                // supply node pushes bal[v] to w; demand node pulls -bal[v]
                const double f = v < m ? bal[v] : -bal[v];
                flow[e] = f;
                if (v < m) bal[w] += f;
                else bal[w] -= f;
                bal[v] = 0;
                --deg[v];
                if (--deg[w] == 1) stack.push_back(w);
                break;
            }
        }
        for (int v = 0; v < V; ++v)
            if (std::abs(bal[v]) > 1e-12) return;
        double val = 0;
        for (int e : chosen) {
            if (flow[e] < -1e-12) return;
            val += flow[e] * cost[arcs[e].first][arcs[e].second];
        }
        if (!best || val > *best) best = val;
    };

    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (int(chosen.size()) == need) {
            evaluate();
            return;
        }
        if (int(chosen.size() + (arcs.size() - k)) < need) return;
        const int u = top(arcs[k].first), w = top(m + arcs[k].second);
        if (u != w) {
            const int big = sz[u] >= sz[w] ? u : w, small = big == u ? w : u;
            par[small] = big;
            sz[big] += sz[small];
            chosen.push_back(int(k));
            rec(k + 1);
            chosen.pop_back();
            sz[big] -= sz[small];
            par[small] = small;
        }
        rec(k + 1);
    };
    rec(0);
    return best;
}

struct TransportInstance {
    lorentz::FiniteCausalSpace space;
    lorentz::WeightedMeasure mu, nu;
    double p = 0.5;
};

// Random Minkowski 1+1 instance with |supp μ|, |supp ν| ≤ max_support. Every
// fourth instance lives on an integer grid so that null pairs occur.
inline TransportInstance random_instance(std::mt19937_64& rng, int max_support = 5)
{
    std::uniform_int_distribution<int> size(1, max_support);
    std::uniform_real_distribution<double> u(0, 1);
    const int m = size(rng), n = size(rng);
    const bool grid = std::uniform_int_distribution<int>(0, 3)(rng) == 0;
    std::vector<std::vector<double>> pts;
    auto draw = [&](double t0, double t1, double xw) {
        for (;;) {
            std::vector<double> x{t0 + (t1 - t0) * u(rng), xw * (2 * u(rng) - 1)};
            if (grid) x = {std::round(x[0] * 2), std::round(x[1] * 2)};
            bool fresh = true;
            for (const auto& q : pts) fresh = fresh && (q[0] != x[0] || q[1] != x[1]);
            if (fresh) return x;
        }
    };
    for (int i = 0; i < m; ++i) pts.push_back(draw(0, 1, 1));
    for (int j = 0; j < n; ++j) pts.push_back(draw(0.5, 2.5, 1.5));
    TransportInstance inst{minkowski_points(pts), {}, {}, 0.1 + 0.9 * u(rng)};
    std::vector<double> a(m), b(n);
    for (double& v : a) v = 0.1 + u(rng);
    for (double& v : b) v = 0.1 + u(rng);
    double sa = 0, sb = 0;
    for (double v : a) sa += v;
    for (double v : b) sb += v;
    for (int i = 0; i < m; ++i) {
        inst.mu.support.push_back(i);
        inst.mu.mass.push_back(a[i] / sa);
    }
    for (int j = 0; j < n; ++j) {
        inst.nu.support.push_back(m + j);
        inst.nu.mass.push_back(b[j] / sb);
    }
    return inst;
}

// Oracle ℓ_p value: nullopt for -∞.
inline std::optional<double> ell_p_by_vertices(const TransportInstance& inst)
{
    const auto& s = inst.space;
    std::vector<std::vector<bool>> allowed;
    std::vector<std::vector<double>> cost;
    for (int i : inst.mu.support) {
        allowed.emplace_back();
        cost.emplace_back();
        for (int j : inst.nu.support) {
            allowed.back().push_back(s.leq(i, j));
            cost.back().push_back(std::pow(s.tau(i, j), inst.p));
        }
    }
    const auto v = transport_vertex_max(inst.mu.mass, inst.nu.mass, allowed, cost);
    if (!v) return std::nullopt;
    return std::pow(std::max(*v, 0.0), 1.0 / inst.p);
}

}  // namespace oracle
