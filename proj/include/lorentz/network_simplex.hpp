#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lorentz {

// Transportation problem min Σ c_e f_e subject to supply/demand balance and
// f ≥ 0 on the listed arcs only. Primal network simplex with an artificial
// root; the artificial arcs carry a lexicographically dominant cost (the
// two-phase method without a numeric big-M) and the tree is kept strongly
// feasible, which rules out cycling. Scalar may be an exact rational type.
template <typename Scalar>
class NetworkSimplex {
public:
    struct Arc {
        int from;  // supply node
        int to;    // demand node
        Scalar cost;
    };

    struct Lex {
        Scalar a{0}, b{0};
        Lex operator+(const Lex& o) const { return {a + o.a, b + o.b}; }
        Lex operator-(const Lex& o) const { return {a - o.a, b - o.b}; }
    };

    NetworkSimplex(std::vector<Scalar> supply, std::vector<Scalar> demand, std::vector<Arc> arcs,
                   Scalar cost_tolerance = Scalar(0))
        : m_(int(supply.size())), n_(int(demand.size())), eps_(cost_tolerance), arcs_(std::move(arcs))
    {
        const int N = m_ + n_ + 1;
        root_ = m_ + n_;
        const int E = int(arcs_.size());
        src_.resize(E + m_ + n_);
        dst_.resize(E + m_ + n_);
        cost_.resize(E + m_ + n_);
        flow_.assign(E + m_ + n_, Scalar(0));
        for (int e = 0; e < E; ++e) {
            src_[e] = arcs_[e].from;
            dst_[e] = m_ + arcs_[e].to;
            cost_[e] = Lex{Scalar(0), arcs_[e].cost};
        }
        parent_.assign(N, -1);
        pred_.assign(N, -1);
        up_.assign(N, 0);
        depth_.assign(N, 0);
        pi_.assign(N, Lex{});
        in_tree_.assign(E + m_ + n_, 0);
        for (int i = 0; i < m_; ++i) {
            const int e = E + i;
            src_[e] = i;
            dst_[e] = root_;
            cost_[e] = Lex{Scalar(1), Scalar(0)};
            flow_[e] = supply[i];
            in_tree_[e] = 1;
        }
        for (int j = 0; j < n_; ++j) {
            const int e = E + m_ + j;
            src_[e] = root_;
            dst_[e] = m_ + j;
            cost_[e] = Lex{Scalar(1), Scalar(0)};
            flow_[e] = demand[j];
            in_tree_[e] = 1;
        }
        rebuild();
    }

    // Runs to optimality; returns the pivot count.
    long solve(long max_pivots = -1)
    {
        const long E = long(src_.size());
        if (max_pivots < 0) max_pivots = 1000 + 50 * E * 8;
        const long block = std::max<long>(10, long(std::sqrt(double(E))));
        long pos = 0, pivots = 0;
        for (;;) {
            // block search: best candidate within the first block containing one
            int enter = -1;
            Lex best{};
            long scanned = 0;
            while (scanned < E) {
                const long stop = std::min(E, scanned + block);
                for (; scanned < stop; ++scanned) {
                    const int e = int((pos + scanned) % E);
                    if (in_tree_[e] || e >= int(arcs_.size())) continue;
                    const Lex rc = reduced(e);
                    if (negative(rc) && (enter < 0 || less(rc, best))) {
                        enter = e;
                        best = rc;
                    }
                }
                if (enter >= 0) break;
            }
            if (enter < 0) break;
            pos = (enter + 1) % E;
            pivot(enter);
            if (++pivots > max_pivots) throw std::runtime_error("network simplex: pivot limit exceeded");
        }
        return pivots;
    }

    int arc_count() const { return int(arcs_.size()); }
    const Scalar& flow(int e) const { return flow_[e]; }
    // Σ flow on artificial arcs: positive iff the transport problem is infeasible.
    Scalar artificial_flow() const
    {
        Scalar s(0);
        for (std::size_t e = arcs_.size(); e < flow_.size(); ++e) s += flow_[e];
        return s;
    }
    // Reduced cost (phase component, cost component) of a real arc.
    Lex reduced(int e) const { return cost_[e] + pi_[src_[e]] - pi_[dst_[e]]; }
    bool basic(int e) const { return in_tree_[e] != 0; }

private:
    bool negative(const Lex& r) const { return r.a < 0 || (r.a == 0 && r.b < -eps_); }
    static bool less(const Lex& x, const Lex& y) { return x.a < y.a || (x.a == y.a && x.b < y.b); }

    void pivot(int e)
    {
        const int first = src_[e], second = dst_[e];
        int u = first, v = second;
        while (depth_[u] > depth_[v]) u = parent_[u];
        while (depth_[v] > depth_[u]) v = parent_[v];
        while (u != v) {
            u = parent_[u];
            v = parent_[v];
        }
        const int join = u;

        bool have = false;
        Scalar delta(0);
        int out_node = -1;
        for (int w = first; w != join; w = parent_[w]) {
            if (!up_[w]) continue;  // flow increases on this arc
            const Scalar& d = flow_[pred_[w]];
            if (!have || d < delta) {
                delta = d;
                out_node = w;
                have = true;
            }
        }
        for (int w = second; w != join; w = parent_[w]) {
            if (up_[w]) continue;
            const Scalar& d = flow_[pred_[w]];
            if (!have || d <= delta) {
                delta = d;
                out_node = w;
                have = true;
            }
        }
        if (!have) throw std::runtime_error("network simplex: unbounded cycle");

        if (delta != 0) {
            flow_[e] += delta;
            for (int w = first; w != join; w = parent_[w]) {
                if (up_[w]) flow_[pred_[w]] -= delta;
                else flow_[pred_[w]] += delta;
            }
            for (int w = second; w != join; w = parent_[w]) {
                if (up_[w]) flow_[pred_[w]] += delta;
                else flow_[pred_[w]] -= delta;
            }
        }
        in_tree_[pred_[out_node]] = 0;
        in_tree_[e] = 1;
        rebuild();
    }

    // Parent pointers, depths and potentials from the current tree arcs.
    void rebuild()
    {
        const int N = m_ + n_ + 1;
        std::vector<std::vector<int>> adj(N);
        for (std::size_t e = 0; e < in_tree_.size(); ++e)
            if (in_tree_[e]) {
                adj[src_[e]].push_back(int(e));
                adj[dst_[e]].push_back(int(e));
            }
        std::vector<char> seen(N, 0);
        std::deque<int> q{root_};
        seen[root_] = 1;
        parent_[root_] = -1;
        pred_[root_] = -1;
        depth_[root_] = 0;
        pi_[root_] = Lex{};
        while (!q.empty()) {
            const int x = q.front();
            q.pop_front();
            for (int e : adj[x]) {
                const int y = src_[e] == x ? dst_[e] : src_[e];
                if (seen[y]) continue;
                seen[y] = 1;
                parent_[y] = x;
                pred_[y] = e;
                up_[y] = src_[e] == y;
                depth_[y] = depth_[x] + 1;
                // reduced cost c + π(src) - π(dst) vanishes on tree arcs
                pi_[y] = up_[y] ? pi_[x] - cost_[e] : pi_[x] + cost_[e];
                q.push_back(y);
            }
        }
    }

    int m_, n_, root_;
    Scalar eps_;
    std::vector<Arc> arcs_;
    std::vector<int> src_, dst_;
    std::vector<Lex> cost_;
    std::vector<Scalar> flow_;
    std::vector<int> parent_, pred_, depth_;
    std::vector<char> up_, in_tree_;
    std::vector<Lex> pi_;
};

}  // namespace lorentz
