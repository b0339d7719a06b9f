// Steady-state stress of multisegment interconnects.
//
// At steady state each segment carries a linear profile with slope
// -beta * j, stress is continuous at shared nodes, and the cross-section
// weighted integral of stress equals sigma_T * total volume (atoms are only
// moved around, never created). Relative stresses come from a spanning tree;
// the datum offset comes from the volume constraint.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "emtk/dc.hpp"
#include "emtk/model.hpp"

namespace emtk {

struct NodeStress {
    NodeId node = 0;
    double value = 0.0;  // Pa
};

struct SteadyStressProfile {
    std::vector<double> node_stress;    // Pa, per node index
    std::vector<double> segment_slope;  // Pa/m, per segment index, = -beta * j
    NodeStress max_tensile;
    NodeStress min_compressive;

    /// Stress at fraction x in [0, 1] along segment s (0 = node_a).
    double stress_along(const InterconnectGraph& g, std::size_t s, double x) const;
};

SteadyStressProfile steady_state(const InterconnectGraph& g, const DcSolution& dc, const MaterialParams& p);

/// Same, with relative stresses integrated along an explicit spanning tree.
SteadyStressProfile steady_state(const InterconnectGraph& g, const DcSolution& dc, const MaterialParams& p,
                                 const SpanningTree& tree);

/// Cross-section weighted mean stress sum_i A_i int sigma dx / sum_i A_i L_i.
double volume_weighted_mean(const InterconnectGraph& g, const std::vector<double>& node_stress);

struct ImmortalityResult {
    bool immortal = true;
    NodeId worst_node = 0;
    double max_tensile = 0.0;
    double margin = 0.0;  // sigma_crit - max_tensile
    // Transient overshoot above the steady state is not covered here.
    bool steady_state_only = true;
};

/// Ties at sigma_crit (within a few ulps of the stress scale) are immortal.
ImmortalityResult immortality_check(const SteadyStressProfile& profile, const MaterialParams& p);

/// Classical (jL)_crit = 2 sigma_crit / beta, independent of sigma_T.
double critical_jl(const MaterialParams& p);

/// jL <= (jL)_crit, same tie rule as immortality_check.
bool blech_check(double jL, const MaterialParams& p);

/// Per-segment worst-case electron density over an operating period,
/// bounded to [lo, hi] (electron sign, node_a -> node_b).
struct DensityRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct WorstCaseBounds {
    std::vector<double> upper;           // Pa, per node index: bound on steady stress
    std::vector<double> relative_upper;  // Pa, bound on sigma_n - sigma_datum
    std::vector<double> relative_lower;  // Pa, bound on sigma_n - sigma_datum
    bool conservative = true;            // datum offset bounded, not solved
};

/// Bounds for currents that need not satisfy KVL (peaks taken at different
/// times). Relative bounds are longest/shortest non-backtracking walks of at
/// most |V|-1 segments in the difference-constraint graph; the datum offset
/// uses the relative lower bounds in the volume constraint.
WorstCaseBounds worst_case_bounds(const InterconnectGraph& g, const std::vector<DensityRange>& ranges,
                                  const MaterialParams& p);

/// Unknown direction: each segment's density is taken in [-jmax, jmax].
WorstCaseBounds worst_case_bounds(const InterconnectGraph& g, const std::vector<double>& jmax_magnitudes,
                                  const MaterialParams& p);

/// One linear inequality  sum_i coeff[i] * j_i <= rhs  (j in A/m^2,
/// electron sign) that keeps the steady stress at `node` below sigma_crit.
struct PdnConstraint {
    NodeId node = 0;
    std::vector<double> coeff;  // per segment index, Pa per (A/m^2)
    double rhs = 0.0;           // sigma_crit - sigma_T
};

std::vector<PdnConstraint> emit_pdn_constraints(const InterconnectGraph& g, const MaterialParams& p);

/// True when j satisfies every constraint (same tie rule as immortality_check).
bool satisfies(const std::vector<PdnConstraint>& cons, const std::vector<double>& j);

/// CPLEX-LP style text with one free variable j_<segment id> per segment.
std::string format_lp(const InterconnectGraph& g, const std::vector<PdnConstraint>& cons);

}  // namespace emtk
