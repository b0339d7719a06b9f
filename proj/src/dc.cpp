#include "emtk/dc.hpp"

#include <cmath>
#include <numeric>
#include <queue>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace emtk {

namespace {

struct DisjointSet {
    std::vector<std::size_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x)
    {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

std::vector<double> voltages_from_densities(const InterconnectGraph& g, const MaterialParams& p,
                                            const std::vector<double>& j)
{
    // j_ab = (V_b - V_a) / (rho l)  =>  V_b = V_a + rho j l
    const SpanningTree t = spanning_tree(g);
    std::vector<double> v(g.node_count(), 0.0);
    for (std::size_t n : t.order) {
        if (t.parent_segment[n] < 0) continue;
        const auto s = static_cast<std::size_t>(t.parent_segment[n]);
        const double drop = p.rho_el * j[s] * g.segments()[s].length;
        if (g.index_b(s) == n) v[n] = v[g.index_a(s)] + drop;
        else v[n] = v[g.index_b(s)] - drop;
    }
    return v;
}

}  // namespace

SpanningTree spanning_tree(const InterconnectGraph& g, const std::vector<std::size_t>& priority)
{
    const std::size_t n_nodes = g.node_count();
    const std::size_t n_segs = g.segment_count();
    DisjointSet ds(n_nodes);
    std::vector<bool> in_tree(n_segs, false);
    for (std::size_t s : priority) {
        if (s >= n_segs) throw InputError("spanning tree priority references an unknown segment");
        if (ds.unite(g.index_a(s), g.index_b(s))) in_tree[s] = true;
    }

    SpanningTree t;
    for (std::size_t s = 0; s < n_segs; ++s) (in_tree[s] ? t.tree : t.chords).push_back(s);
    if (t.tree.size() + 1 != n_nodes) throw InputError("spanning tree requires a connected graph");

    t.parent_segment.assign(n_nodes, -1);
    std::vector<bool> seen(n_nodes, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
        const std::size_t n = q.front();
        q.pop();
        t.order.push_back(n);
        for (std::size_t s : g.incident(n)) {
            if (!in_tree[s]) continue;
            const std::size_t m = g.index_a(s) == n ? g.index_b(s) : g.index_a(s);
            if (seen[m]) continue;
            seen[m] = true;
            t.parent_segment[m] = static_cast<std::ptrdiff_t>(s);
            q.push(m);
        }
    }
    return t;
}

SpanningTree spanning_tree(const InterconnectGraph& g)
{
    std::vector<std::size_t> order(g.segment_count());
    std::iota(order.begin(), order.end(), 0);
    return spanning_tree(g, order);
}

DcSolution solve_dc(const InterconnectGraph& g, const MaterialParams& p)
{
    const auto& segs = g.segments();
    DcSolution dc;

    const bool any = g.has_prescribed_densities();
    if (any) {
        for (const auto& s : segs)
            if (!s.prescribed_j)
                throw InputError("segment " + std::to_string(s.id) +
                                 " has no prescribed density; prescribe all segments or none");
        dc.prescribed = true;
        for (const auto& s : segs) {
            dc.segment_densities.push_back(*s.prescribed_j);
            dc.segment_currents.push_back(*s.prescribed_j * s.area());
        }
        dc.node_voltages = voltages_from_densities(g, p, dc.segment_densities);
        return dc;
    }

    // Laplacian L V = -I_inj with the datum (index 0) eliminated.
    const std::size_t n = g.node_count();
    dc.node_voltages.assign(n, 0.0);
    if (n > 1) {
        using Triplet = Eigen::Triplet<double>;
        std::vector<Triplet> trips;
        trips.reserve(4 * segs.size());
        for (std::size_t s = 0; s < segs.size(); ++s) {
            const double cond = segs[s].area() / (p.rho_el * segs[s].length);
            const auto a = static_cast<std::ptrdiff_t>(g.index_a(s)) - 1;
            const auto b = static_cast<std::ptrdiff_t>(g.index_b(s)) - 1;
            if (a >= 0) trips.emplace_back(a, a, cond);
            if (b >= 0) trips.emplace_back(b, b, cond);
            if (a >= 0 && b >= 0) {
                trips.emplace_back(a, b, -cond);
                trips.emplace_back(b, a, -cond);
            }
        }
        const auto dim = static_cast<Eigen::Index>(n - 1);
        Eigen::SparseMatrix<double> lap(dim, dim);
        lap.setFromTriplets(trips.begin(), trips.end());
        Eigen::VectorXd rhs(dim);
        for (std::size_t i = 1; i < n; ++i) rhs(static_cast<Eigen::Index>(i - 1)) = -g.nodes()[i].injected_current;

        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
        if (solver.info() != Eigen::Success) throw AnalysisError("DC analysis: singular conductance matrix");
        const Eigen::VectorXd v = solver.solve(rhs);
        if (solver.info() != Eigen::Success || !v.allFinite())
            throw AnalysisError("DC analysis: solve failed");
        for (std::size_t i = 1; i < n; ++i) dc.node_voltages[i] = v(static_cast<Eigen::Index>(i - 1));
    }

    for (std::size_t s = 0; s < segs.size(); ++s) {
        const double dv = dc.node_voltages[g.index_b(s)] - dc.node_voltages[g.index_a(s)];
        const double j = dv / (p.rho_el * segs[s].length);
        dc.segment_densities.push_back(j);
        dc.segment_currents.push_back(j * segs[s].area());
    }
    return dc;
}

std::vector<double> kcl_residuals(const InterconnectGraph& g, const DcSolution& dc)
{
    std::vector<double> r(g.node_count(), 0.0);
    for (std::size_t i = 0; i < g.node_count(); ++i) r[i] = g.nodes()[i].injected_current;
    for (std::size_t s = 0; s < g.segment_count(); ++s) {
        r[g.index_a(s)] -= dc.segment_currents[s];
        r[g.index_b(s)] += dc.segment_currents[s];
    }
    return r;
}

}  // namespace emtk
