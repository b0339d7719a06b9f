#pragma once

#include <cstddef>
#include <vector>

#include "emtk/model.hpp"

namespace emtk {

struct DcSolution {
    std::vector<double> node_voltages;      // V, per node index; datum (index 0) = 0
    std::vector<double> segment_currents;   // A, electron current a -> b
    std::vector<double> segment_densities;  // A/m^2, electron current a -> b
    bool prescribed = false;                // densities came from the netlist
};

/// Nodal DC analysis. Segment resistance is rho_el * l / (w * h); the datum
/// row is eliminated and the SPD system factored directly. If the graph
/// carries prescribed densities (all segments must) they are returned as-is
/// and voltages are integrated along the spanning tree.
DcSolution solve_dc(const InterconnectGraph& g, const MaterialParams& p);

struct SpanningTree {
    std::vector<std::size_t> tree;    // segment indices, ascending
    std::vector<std::size_t> chords;  // segment indices, ascending
    // parent_segment[n] is the tree segment joining n to its parent; the
    // root (datum) has none. order lists nodes root-first.
    std::vector<std::ptrdiff_t> parent_segment;
    std::vector<std::size_t> order;
};

/// Deterministic BFS spanning tree rooted at the datum; neighbours are
/// explored by ascending segment index.
SpanningTree spanning_tree(const InterconnectGraph& g);

/// Spanning tree built by Kruskal over segments in the given priority order
/// (earlier = preferred). Lets callers pick alternative trees of a mesh.
SpanningTree spanning_tree(const InterconnectGraph& g, const std::vector<std::size_t>& priority);

/// Per-node KCL residual: injection minus the electron current leaving the
/// node through its segments. Zero when KCL holds.
std::vector<double> kcl_residuals(const InterconnectGraph& g, const DcSolution& dc);

}  // namespace emtk
