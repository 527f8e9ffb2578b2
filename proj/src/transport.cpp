#include "lorentz/transport.hpp"

#include <algorithm>
#include <boost/multiprecision/gmp.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "lorentz/errors.hpp"
#include "lorentz/network_simplex.hpp"

namespace lorentz {

using Rational = boost::multiprecision::mpq_rational;

ExtReal coupling_value(const FiniteCausalSpace& space, const std::vector<PlanPair>& pairs, double p)
{
    double v = 0;
    for (const PlanPair& e : pairs) {
        if (!space.leq(e.i, e.j)) return ExtReal::minus_infinity();
        v += e.mass * std::pow(space.tau(e.i, e.j), p);
    }
    return ExtReal::finite(v);
}

ExtReal ell_from_value(const ExtReal& value, double p)
{
    if (!value.is_finite()) return value;
    return ExtReal::finite(std::pow(std::max(value.value(), 0.0), 1.0 / p));
}

namespace {

template <typename S>
S to_scalar(double x)
{
    return S(x);
}

template <typename S>
double to_double(const S& x)
{
    if constexpr (std::is_same_v<S, double>) return x;
    else return x.template convert_to<double>();
}

struct Problem {
    std::vector<int> arc_i, arc_j;  // positions in mu / nu supports
};

// Arcs of the causal bipartite graph in lexicographic (i,j) order of the
// support positions.
Problem causal_arcs(const FiniteCausalSpace& space, const WeightedMeasure& mu, const WeightedMeasure& nu,
                    const std::vector<char>* keep = nullptr)
{
    Problem pr;
    int e = 0;
    for (std::size_t a = 0; a < mu.support.size(); ++a)
        for (std::size_t b = 0; b < nu.support.size(); ++b) {
            if (!space.leq(mu.support[a], nu.support[b])) continue;
            if (!keep || (*keep)[e]) {
                pr.arc_i.push_back(int(a));
                pr.arc_j.push_back(int(b));
            }
            ++e;
        }
    return pr;
}

template <typename S>
std::vector<S> normalized(const std::vector<double>& mass)
{
    std::vector<S> out;
    S total(0);
    for (double m : mass) {
        out.push_back(to_scalar<S>(m));
        total += out.back();
    }
    for (S& x : out) x /= total;
    return out;
}

template <typename S>
struct LpResult {
    bool feasible = false;
    std::vector<S> flow;  // per arc
    std::vector<typename NetworkSimplex<S>::Lex> reduced;
    std::vector<char> basic;
};

// Minimizes Σ cost·f over causal couplings restricted to the given arcs.
template <typename S>
LpResult<S> run_lp(const WeightedMeasure& mu, const WeightedMeasure& nu, const Problem& pr,
                   const std::vector<S>& cost, S eps)
{
    using NS = NetworkSimplex<S>;
    std::vector<typename NS::Arc> arcs;
    for (std::size_t e = 0; e < pr.arc_i.size(); ++e) arcs.push_back({pr.arc_i[e], pr.arc_j[e], cost[e]});
    NS ns(normalized<S>(mu.mass), normalized<S>(nu.mass), std::move(arcs), eps);
    ns.solve();
    LpResult<S> r;
    const S art = ns.artificial_flow();
    if constexpr (std::is_same_v<S, double>) r.feasible = art <= 1e-12;
    else r.feasible = art == 0;
    for (int e = 0; e < ns.arc_count(); ++e) {
        r.flow.push_back(ns.flow(e));
        r.reduced.push_back(ns.reduced(e));
        r.basic.push_back(ns.basic(e));
    }
    return r;
}

bool use_exact(const WeightedMeasure& mu, const WeightedMeasure& nu, const SolveOptions& opt)
{
    if (opt.backend == Backend::Exact) return true;
    if (opt.backend == Backend::Double) return false;
    return int(mu.support.size()) <= opt.exact_limit && int(nu.support.size()) <= opt.exact_limit;
}

template <typename S>
Coupling make_coupling(const FiniteCausalSpace& space, const WeightedMeasure& mu, const WeightedMeasure& nu,
                       double p, const Problem& pr, const std::vector<S>& flow)
{
    Coupling c;
    c.mu = mu;
    c.nu = nu;
    c.p = p;
    for (std::size_t e = 0; e < flow.size(); ++e) {
        double f = to_double(flow[e]);
        if constexpr (std::is_same_v<S, double>)
            if (f < 1e-15) f = 0;
        if (f > 0) c.pairs.push_back({mu.support[pr.arc_i[e]], nu.support[pr.arc_j[e]], f});
    }
    c.value = coupling_value(space, c.pairs, p);
    return c;
}

template <typename S>
std::vector<S> tau_p_costs(const FiniteCausalSpace& space, const WeightedMeasure& mu, const WeightedMeasure& nu,
                           const Problem& pr, double p, double sign)
{
    std::vector<S> c;
    for (std::size_t e = 0; e < pr.arc_i.size(); ++e)
        c.push_back(to_scalar<S>(sign * std::pow(space.tau(mu.support[pr.arc_i[e]], nu.support[pr.arc_j[e]]), p)));
    return c;
}

template <typename S>
Solution solve_impl(const FiniteCausalSpace& space, const WeightedMeasure& mu, const WeightedMeasure& nu,
                    double p, const char* name)
{
    const Problem pr = causal_arcs(space, mu, nu);
    Solution sol;
    sol.backend = name;
    sol.coupling.mu = mu;
    sol.coupling.nu = nu;
    sol.coupling.p = p;
    if (pr.arc_i.empty()) return sol;
    const std::vector<S> cost = tau_p_costs<S>(space, mu, nu, pr, p, -1.0);
    double cmax = 0;
    for (const S& c : cost) cmax = std::max(cmax, std::abs(to_double(c)));
    const S eps = std::is_same_v<S, double> ? S(1e-12 * std::max(cmax, 1.0)) : S(0);
    const LpResult<S> r = run_lp<S>(mu, nu, pr, cost, eps);
    if (!r.feasible) return sol;
    sol.coupling = make_coupling<S>(space, mu, nu, p, pr, r.flow);
    sol.ell_p = ell_from_value(sol.coupling.value, p);
    for (std::size_t e = 0; e < r.flow.size(); ++e) {
        if (r.basic[e]) continue;
        if constexpr (std::is_same_v<S, double>) {
            if (r.reduced[e].a == 0 && std::abs(r.reduced[e].b) <= 1e-12 * std::max(cmax, 1.0))
                sol.alternative_optima = true;
        } else if (r.reduced[e].a == 0 && r.reduced[e].b == 0) {
            sol.alternative_optima = true;
        }
    }
    return sol;
}

}  // namespace

FeasibilityResult causal_feasible(const FiniteCausalSpace& space, const WeightedMeasure& mu,
                                  const WeightedMeasure& nu)
{
    check_measure(mu, space.size(), "causal_feasible mu");
    check_measure(nu, space.size(), "causal_feasible nu");
    const Problem pr = causal_arcs(space, mu, nu);
    FeasibilityResult fr;
    if (pr.arc_i.empty()) return fr;
    if (use_exact(mu, nu, {})) {
        const LpResult<Rational> r = run_lp<Rational>(mu, nu, pr, std::vector<Rational>(pr.arc_i.size()), Rational(0));
        fr.feasible = r.feasible;
        if (r.feasible) fr.coupling = make_coupling<Rational>(space, mu, nu, 1.0, pr, r.flow);
    } else {
        const LpResult<double> r = run_lp<double>(mu, nu, pr, std::vector<double>(pr.arc_i.size()), 0.0);
        fr.feasible = r.feasible;
        if (r.feasible) fr.coupling = make_coupling<double>(space, mu, nu, 1.0, pr, r.flow);
    }
    return fr;
}

Solution solve_lp(const FiniteCausalSpace& space, const WeightedMeasure& mu, const WeightedMeasure& nu,
                  double p, const SolveOptions& opt)
{
    if (!(p > 0 && p <= 1)) throw DomainError("solve_lp: p must lie in (0,1]");
    check_measure(mu, space.size(), "solve_lp mu");
    check_measure(nu, space.size(), "solve_lp nu");
    if (use_exact(mu, nu, opt)) return solve_impl<Rational>(space, mu, nu, p, "exact");
    return solve_impl<double>(space, mu, nu, p, "double");
}

namespace {

template <typename S>
DualisabilityVerdict dualisability_impl(const FiniteCausalSpace& space, const WeightedMeasure& mu,
                                        const WeightedMeasure& nu, double p)
{
    DualisabilityVerdict v;
    const Problem pr = causal_arcs(space, mu, nu);
    if (pr.arc_i.empty()) {
        v.reason = "no causal coupling";
        return v;
    }
    const std::vector<S> cost = tau_p_costs<S>(space, mu, nu, pr, p, -1.0);
    double cmax = 0;
    for (const S& c : cost) cmax = std::max(cmax, std::abs(to_double(c)));
    const bool exact = !std::is_same_v<S, double>;
    const S eps = exact ? S(0) : S(1e-12 * std::max(cmax, 1.0));
    const LpResult<S> r = run_lp<S>(mu, nu, pr, cost, eps);
    if (!r.feasible) {
        v.reason = "no causal coupling";
        return v;
    }
    const Coupling opt = make_coupling<S>(space, mu, nu, p, pr, r.flow);
    if (!(opt.value.value() > 0)) {
        v.reason = "l_p is zero, not in (0,inf)";
        return v;
    }

    bool all_timelike = true;
    for (int x : mu.support)
        for (int y : nu.support) all_timelike = all_timelike && space.tau(x, y) > 0;
    if (all_timelike) {
        v.timelike_dualisable = v.strongly = true;
        v.reason = "supp mu x supp nu is chronological";
        return v;
    }

    // optimal face: arcs whose reduced cost vanishes under the optimal duals
    const double face_tol = 1e-9 * std::abs(opt.value.value());
    std::vector<char> tight(pr.arc_i.size(), 0);
    for (std::size_t e = 0; e < pr.arc_i.size(); ++e) {
        if (exact) tight[e] = r.reduced[e].a == 0 && r.reduced[e].b == 0;
        else tight[e] = r.reduced[e].a == 0 && std::abs(to_double(r.reduced[e].b)) <= face_tol;
    }
    Problem face;
    std::vector<char> null_arc;
    for (std::size_t e = 0; e < pr.arc_i.size(); ++e) {
        if (!tight[e]) continue;
        face.arc_i.push_back(pr.arc_i[e]);
        face.arc_j.push_back(pr.arc_j[e]);
        null_arc.push_back(space.tau(mu.support[pr.arc_i[e]], nu.support[pr.arc_j[e]]) == 0);
    }
    auto null_mass = [&](double sign, std::vector<S>& flow) {
        std::vector<S> c;
        for (char z : null_arc) c.push_back(z ? S(sign) : S(0));
        const LpResult<S> q = run_lp<S>(mu, nu, face, c, exact ? S(0) : S(1e-12));
        if (!q.feasible) throw Error("strong_dualisability_certificate: optimal face lost feasibility");
        flow = q.flow;
        S m(0);
        for (std::size_t e = 0; e < null_arc.size(); ++e)
            if (null_arc[e]) m += q.flow[e];
        return to_double(m);
    };
    std::vector<S> fmin, fmax;
    v.min_null_mass = null_mass(1.0, fmin);
    v.max_null_mass = null_mass(-1.0, fmax);
    const double zero_tol = exact ? 0.0 : 1e-9;
    v.timelike_dualisable = v.min_null_mass <= zero_tol;
    v.strongly = v.timelike_dualisable && v.max_null_mass <= zero_tol;
    if (v.max_null_mass > zero_tol) v.witness = make_coupling<S>(space, mu, nu, p, face, fmax);
    if (!v.timelike_dualisable) v.reason = "every optimal coupling charges null pairs";
    else if (!v.strongly) v.reason = "some optimal coupling charges null pairs";
    else v.reason = "all optimal couplings live on chronological pairs";
    return v;
}

}  // namespace

DualisabilityVerdict strong_dualisability_certificate(const FiniteCausalSpace& space, const WeightedMeasure& mu,
                                                      const WeightedMeasure& nu, double p, const SolveOptions& opt)
{
    if (!(p > 0 && p <= 1)) throw DomainError("strong_dualisability_certificate: p must lie in (0,1]");
    check_measure(mu, space.size(), "dualisability mu");
    check_measure(nu, space.size(), "dualisability nu");
    if (use_exact(mu, nu, opt)) return dualisability_impl<Rational>(space, mu, nu, p);
    return dualisability_impl<double>(space, mu, nu, p);
}

AuditResult audit_cyclical_monotonicity(const FiniteCausalSpace& space, const std::vector<PlanPair>& pairs,
                                        double p, const AuditOptions& opt)
{
    AuditResult res;
    const int k = int(pairs.size());
    if (k == 0) return res;
    for (const PlanPair& e : pairs)
        if (!space.leq(e.i, e.j)) throw DomainError("audit_cyclical_monotonicity: coupling is not causal");
    const bool ell = opt.variant == CostVariant::EllP;
    // c(a,b) = cost of x_a against y_b; NaN marks -∞ for the ℓ^p variant
    std::vector<double> c(std::size_t(k) * k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
            const int x = pairs[a].i, y = pairs[b].j;
            const bool causal = space.leq(x, y);
            c[std::size_t(a) * k + b] = causal ? std::pow(space.tau(x, y), p)
                                               : (ell ? std::numeric_limits<double>::quiet_NaN() : 0.0);
        }
    auto cost = [&](int a, int b) { return c[std::size_t(a) * k + b]; };
    const int L = std::min(opt.max_cycle_len, k);

    auto consider = [&](const std::vector<int>& cyc) {
        ++res.cycles_checked;
        double gain = 0;
        for (std::size_t s = 0; s < cyc.size(); ++s) {
            const double w = cost(cyc[(s + 1) % cyc.size()], cyc[s]);
            if (std::isnan(w)) return;  // -∞ summand: cycle passes
            gain += w - cost(cyc[s], cyc[s]);
        }
        if (gain > res.defect) {
            res.defect = gain;
            res.witness = cyc;
        }
    };

    if (k <= opt.exhaustive_limit) {
        res.exhaustive = true;
        std::vector<int> cyc;
        std::vector<char> used(k, 0);
        // cycles start at their smallest index to skip rotations
        std::function<void()> rec = [&]() {
            if (cyc.size() >= 2) consider(cyc);
            if (int(cyc.size()) == L) return;
            for (int b = cyc[0] + 1; b < k; ++b) {
                if (used[b]) continue;
                if (ell && std::isnan(cost(b, cyc.back()))) continue;
                used[b] = 1;
                cyc.push_back(b);
                rec();
                cyc.pop_back();
                used[b] = 0;
            }
        };
        for (int s = 0; s < k; ++s) {
            cyc = {s};
            used[s] = 1;
            rec();
            used[s] = 0;
        }
    } else {
        std::mt19937_64 rng(opt.seed);
        std::uniform_int_distribution<int> len(2, std::max(2, L));
        std::vector<int> idx(k);
        std::iota(idx.begin(), idx.end(), 0);
        for (long r = 0; r < opt.n_random; ++r) {
            const int l = len(rng);
            for (int s = 0; s < l; ++s) std::swap(idx[s], idx[s + rng() % (k - s)]);
            consider(std::vector<int>(idx.begin(), idx.begin() + l));
        }
    }
    return res;
}

double PotentialPair::phi_at(int i) const
{
    for (std::size_t a = 0; a < x.size(); ++a)
        if (x[a] == i) return phi[a];
    throw DomainError("potentials: point " + std::to_string(i) + " outside the phi support");
}

double PotentialPair::psi_at(int j) const
{
    for (std::size_t b = 0; b < y.size(); ++b)
        if (y[b] == j) return psi[b];
    throw DomainError("potentials: point " + std::to_string(j) + " outside the psi support");
}

namespace {

template <typename S>
struct Edge {
    int from, to;
    S w;
};

// Bellman–Ford from a source set; returns false with a cycle on a negative cycle.
template <typename S>
bool bellman_ford(int n, const std::vector<Edge<S>>& edges, std::vector<S>& dist, std::vector<char>& reach,
                  S tol, std::vector<int>& cycle)
{
    std::vector<int> pred(n, -1);
    int last = -1;
    for (int round = 0; round < n; ++round) {
        last = -1;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const Edge<S>& E = edges[e];
            if (!reach[E.from]) continue;
            const S cand = dist[E.from] + E.w;
            if (!reach[E.to] || cand < dist[E.to] - tol) {
                dist[E.to] = cand;
                reach[E.to] = 1;
                pred[E.to] = int(e);
                last = E.to;
            }
        }
        if (last < 0) return true;
    }
    // still relaxing after n rounds: walk back to a node on the cycle
    int v = last;
    for (int s = 0; s < n && pred[v] >= 0; ++s) v = edges[pred[v]].from;
    cycle.clear();
    int u = v;
    do {
        cycle.push_back(u);
        u = edges[pred[u]].from;
    } while (u != v && pred[u] >= 0 && int(cycle.size()) <= n);
    std::reverse(cycle.begin(), cycle.end());
    return false;
}

template <typename S>
std::vector<double> chain_potential(const FiniteCausalSpace& space, const IndexSet& X,
                                    const std::vector<std::pair<int, int>>& gamma, double p, int root_pos)
{
    const int n = int(X.size());
    std::map<int, int> pos;
    for (int a = 0; a < n; ++a) pos[X[a]] = a;
    // edge x -> x' of weight min over y with (x,y) in Γ and x' ≤ y of c(x,y) - c(x',y)
    std::map<std::pair<int, int>, S> best;
    for (const auto& [x, y] : gamma) {
        const S cxy = S(std::pow(space.tau(x, y), p));
        for (int b = 0; b < n; ++b) {
            const int xp = X[b];
            if (xp == x || !space.leq(xp, y)) continue;
            const S w = cxy - S(std::pow(space.tau(xp, y), p));
            auto key = std::make_pair(pos[x], b);
            auto it = best.find(key);
            if (it == best.end() || w < it->second) best[key] = w;
        }
    }
    std::vector<Edge<S>> edges;
    for (const auto& [key, w] : best) edges.push_back({key.first, key.second, w});
    const S tol = std::is_same_v<S, double> ? S(1e-13) : S(0);

    std::vector<S> dist(n, S(0));
    std::vector<char> reach(n, 0);
    reach[root_pos] = 1;
    std::vector<int> cycle;
    auto fail = [&]() {
        std::ostringstream os;
        os << "build_potentials: input not cyclically monotone, negative chain cycle through x =";
        for (int a : cycle) os << " " << X[a];
        throw MonotonicityError(os.str());
    };
    if (!bellman_ford<S>(n, edges, dist, reach, tol, cycle)) fail();

    // nodes without a chain from the root: solve on their own subgraph and
    // shift up until every constraint into the reachable part holds
    std::vector<char> rest(n, 0);
    bool any = false;
    for (int a = 0; a < n; ++a)
        if (!reach[a]) rest[a] = any = 1;
    if (any) {
        std::vector<Edge<S>> sub;
        for (const Edge<S>& e : edges)
            if (rest[e.from] && rest[e.to]) sub.push_back(e);
        std::vector<S> d2(n, S(0));
        std::vector<char> r2 = rest;  // every unreached node is a source at 0
        if (!bellman_ford<S>(n, sub, d2, r2, tol, cycle)) fail();
        S shift(0);
        bool have = false;
        for (const Edge<S>& e : edges)
            if (rest[e.from] && reach[e.to]) {
                const S need = dist[e.to] - e.w - d2[e.from];
                if (!have || need > shift) {
                    shift = need;
                    have = true;
                }
            }
        for (int a = 0; a < n; ++a)
            if (rest[a]) dist[a] = d2[a] + shift;
    }
    std::vector<double> out(n);
    for (int a = 0; a < n; ++a) out[a] = to_double(dist[a]) - to_double(dist[root_pos]);
    return out;
}

}  // namespace

PotentialPair build_potentials(const FiniteCausalSpace& space, const std::vector<std::pair<int, int>>& gamma,
                               double p, std::pair<int, int> root)
{
    if (gamma.empty()) throw DomainError("build_potentials: empty support");
    if (std::find(gamma.begin(), gamma.end(), root) == gamma.end())
        throw DomainError("build_potentials: root is not a support pair");
    PotentialPair pot;
    std::set<int> xs, ys;
    for (const auto& [x, y] : gamma) {
        if (!space.leq(x, y)) throw DomainError("build_potentials: support pair not causal");
        xs.insert(x);
        ys.insert(y);
    }
    pot.x.assign(xs.begin(), xs.end());
    pot.y.assign(ys.begin(), ys.end());
    const int root_pos = int(std::find(pot.x.begin(), pot.x.end(), root.first) - pot.x.begin());
    const bool exact = pot.x.size() <= 64;
    pot.phi = exact ? chain_potential<Rational>(space, pot.x, gamma, p, root_pos)
                    : chain_potential<double>(space, pot.x, gamma, p, root_pos);
    // ℓ^p-transform, nudged upward so the stored doubles satisfy it exactly
    for (int y : pot.y) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < pot.x.size(); ++a)
            if (space.leq(pot.x[a], y)) best = std::max(best, pot.phi[a] + std::pow(space.tau(pot.x[a], y), p));
        if (exact) {
            for (std::size_t a = 0; a < pot.x.size(); ++a) {
                if (!space.leq(pot.x[a], y)) continue;
                const Rational need = Rational(pot.phi[a]) + Rational(std::pow(space.tau(pot.x[a], y), p));
                while (Rational(best) < need) best = std::nextafter(best, std::numeric_limits<double>::infinity());
            }
        }
        pot.psi.push_back(best);
    }
    return pot;
}

std::optional<std::pair<int, int>> potentials_infeasible_exact(const FiniteCausalSpace& space,
                                                               const PotentialPair& pot, double p)
{
    for (std::size_t a = 0; a < pot.x.size(); ++a)
        for (std::size_t b = 0; b < pot.y.size(); ++b) {
            if (!space.leq(pot.x[a], pot.y[b])) continue;
            const Rational lhs = Rational(pot.psi[b]) - Rational(pot.phi[a]);
            if (lhs < Rational(std::pow(space.tau(pot.x[a], pot.y[b]), p))) return std::make_pair(pot.x[a], pot.y[b]);
        }
    return std::nullopt;
}

double duality_gap(const FiniteCausalSpace& space, const WeightedMeasure& mu, const WeightedMeasure& nu,
                   double p, const PotentialPair& pot)
{
    const Solution sol = solve_lp(space, mu, nu, p);
    if (!sol.ell_p.is_finite()) throw DomainError("duality_gap: marginals admit no causal coupling");
    for (int x : mu.support)
        for (int y : nu.support) {
            if (!space.leq(x, y)) continue;
            const double c = std::pow(space.tau(x, y), p);
            const double slack = pot.psi_at(y) - pot.phi_at(x) - c;
            if (slack < -1e-12 * std::max(1.0, std::abs(c)))
                throw DomainError("duality_gap: potentials infeasible at pair (" + std::to_string(x) + "," +
                                  std::to_string(y) + ")");
        }
    double dual = 0;
    for (std::size_t b = 0; b < nu.support.size(); ++b) dual += nu.mass[b] * pot.psi_at(nu.support[b]);
    for (std::size_t a = 0; a < mu.support.size(); ++a) dual -= mu.mass[a] * pot.phi_at(mu.support[a]);
    return dual - sol.coupling.value.value();
}

GlueResult glue(const FiniteCausalSpace& space, const Coupling& pi12, const Coupling& pi23)
{
    std::map<int, double> second, first;
    for (const PlanPair& e : pi12.pairs) second[e.j] += e.mass;
    for (const PlanPair& e : pi23.pairs) first[e.i] += e.mass;
    std::set<int> keys;
    for (auto& [k, v] : second) keys.insert(k);
    for (auto& [k, v] : first) keys.insert(k);
    for (int k : keys)
        if (std::abs(second[k] - first[k]) > 1e-12)
            throw DomainError("glue: middle marginals differ at point " + std::to_string(k));
    GlueResult g;
    std::map<std::pair<int, int>, double> proj;
    for (const PlanPair& a : pi12.pairs)
        for (const PlanPair& b : pi23.pairs) {
            if (a.j != b.i) continue;
            // π₁₂₃ = π₁₂(x,y) π₂₃(y,z) / μ₂(y)
            const double m = a.mass * b.mass / first[a.j];
            g.plan.push_back({a.i, a.j, b.j, m});
            proj[{a.i, b.j}] += m;
        }
    g.projected.mu = pi12.mu;
    g.projected.nu = pi23.nu;
    g.projected.p = pi12.p;
    for (const auto& [key, m] : proj) g.projected.pairs.push_back({key.first, key.second, m});
    g.projected.value = coupling_value(space, g.projected.pairs, g.projected.p);
    return g;
}

}  // namespace lorentz
