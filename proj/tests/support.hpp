// Generators and small helpers shared by the unit tests and the acceptance
// binary.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "emtk/dc.hpp"
#include "emtk/model.hpp"
#include "emtk/transient.hpp"

namespace emtk::testing {

inline Segment make_segment(SegmentId id, NodeId a, NodeId b, double length, double width = 1e-7,
                            double thickness = 2e-7)
{
    Segment s;
    s.id = id;
    s.node_a = a;
    s.node_b = b;
    s.length = length;
    s.width = width;
    s.thickness = thickness;
    s.layer = "M1";
    return s;
}

/// One segment 0 -> 1 carrying electron density j.
inline InterconnectGraph single_segment(double L, double j, double width = 1e-7, double thickness = 2e-7)
{
    const double I = j * width * thickness;
    std::vector<Node> nodes{{0, true, I}, {1, true, -I}};
    return InterconnectGraph(std::move(nodes), {make_segment(0, 0, 1, L, width, thickness)});
}

/// Path 0 - 1 - ... - n with electron densities j[i] on segment i.
inline InterconnectGraph line(const std::vector<double>& lengths, const std::vector<double>& j,
                              double width = 1e-7, double thickness = 2e-7)
{
    const std::size_t n = lengths.size();
    std::vector<Node> nodes(n + 1);
    std::vector<Segment> segs;
    for (std::size_t i = 0; i <= n; ++i) nodes[i].id = i;
    for (std::size_t i = 0; i < n; ++i) {
        segs.push_back(make_segment(i, i, i + 1, lengths[i], width, thickness));
        const double I = j[i] * width * thickness;
        nodes[i].injected_current += I;
        nodes[i + 1].injected_current -= I;
    }
    for (auto& nd : nodes) nd.is_terminal = nd.injected_current != 0.0;
    return InterconnectGraph(std::move(nodes), std::move(segs));
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

struct GraphGenOptions {
    std::size_t min_segments = 1;
    std::size_t max_segments = 30;
    std::size_t extra_chords = 0;  // > 0 makes a mesh
    double min_length = 2e-6;
    double max_length = 100e-6;
    double current = 2e-4;  // A, injection scale
};

/// Random connected net: a random recursive tree plus optional chords,
/// random widths and balanced random terminal injections. Node ids are
/// shuffled and sparse so nothing relies on dense numbering.
inline InterconnectGraph random_graph(std::mt19937_64& rng, const GraphGenOptions& o)
{
    std::uniform_int_distribution<std::size_t> nseg(o.min_segments, o.max_segments);
    const std::size_t tree_segs = nseg(rng);
    const std::size_t n_nodes = tree_segs + 1;

    std::vector<NodeId> ids(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) ids[i] = 3 * i + 7;
    std::shuffle(ids.begin(), ids.end(), rng);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Segment> segs;
    SegmentId next_id = 100;
    auto add = [&](std::size_t a, std::size_t b) {
        const double w = 1e-7 * (1.0 + 3.0 * unit(rng));
        segs.push_back(make_segment(next_id, ids[a], ids[b], log_uniform(rng, o.min_length, o.max_length), w, 2e-7));
        next_id += 1 + static_cast<SegmentId>(unit(rng) * 3.0);
    };
    for (std::size_t v = 1; v < n_nodes; ++v) {
        const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
        if (unit(rng) < 0.5) add(parent, v);
        else add(v, parent);
    }
    for (std::size_t c = 0; c < o.extra_chords && n_nodes > 2; ++c) {
        std::uniform_int_distribution<std::size_t> pick(0, n_nodes - 1);
        std::size_t a = pick(rng), b = pick(rng);
        while (b == a) b = pick(rng);
        add(a, b);
    }

    std::vector<Node> nodes(n_nodes);
    double total = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        nodes[i].id = ids[i];
        if (unit(rng) < 0.6 || i + 1 == n_nodes) {
            nodes[i].is_terminal = true;
            if (i + 1 < n_nodes) nodes[i].injected_current = o.current * (2.0 * unit(rng) - 1.0);
        }
        total += nodes[i].injected_current;
    }
    nodes.back().injected_current = -total;
    if (total == 0.0) {
        nodes.front().is_terminal = true;
        nodes.front().injected_current = o.current;
        nodes.back().injected_current = -o.current;
    }
    return InterconnectGraph(std::move(nodes), std::move(segs));
}

/// Random priority order for spanning_tree(g, priority).
inline std::vector<std::size_t> random_priority(std::mt19937_64& rng, std::size_t segments)
{
    std::vector<std::size_t> order(segments);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

/// Longest shortest-path distance along segments between any two nodes.
inline double net_diameter(const InterconnectGraph& g)
{
    const std::size_t n = g.node_count();
    double diameter = 0.0;
    for (std::size_t src = 0; src < n; ++src) {
        std::vector<double> dist(n, std::numeric_limits<double>::infinity());
        std::vector<bool> done(n, false);
        dist[src] = 0.0;
        for (std::size_t round = 0; round < n; ++round) {
            std::size_t u = n;
            for (std::size_t v = 0; v < n; ++v)
                if (!done[v] && (u == n || dist[v] < dist[u])) u = v;
            done[u] = true;
            diameter = std::max(diameter, dist[u]);
            for (std::size_t s : g.incident(u)) {
                const std::size_t w = g.index_a(s) == u ? g.index_b(s) : g.index_a(s);
                dist[w] = std::min(dist[w], dist[u] + g.segments()[s].length);
            }
        }
    }
    return diameter;
}

inline double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace emtk::testing
