// Transient stress via the stress-electrical RC equivalence.
//
// Each segment is cut into elements of length dx. Every element end becomes
// a network node with a grounded "stress capacitance" equal to the volume it
// represents (half elements at segment ends), adjacent nodes are joined by a
// "stress conductance" kappa * A / dx, and each segment end carries a flux
// source beta * kappa * A * j (positive at node_a, negative at node_b). The
// resulting system
//
//     C dsigma/dt = -G sigma + J
//
// has zero row sums in G and zero-sum J, so blocking terminals, continuity
// at junctions and conservation of atoms are all built into the network.
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "emtk/dc.hpp"
#include "emtk/model.hpp"

namespace emtk {

struct DiscretizedSystem {
    // Matrix indices [0, graph_nodes) are the graph nodes in graph order;
    // interior element nodes follow segment by segment.
    std::size_t graph_nodes = 0;
    std::vector<NodeId> node_ids;                        // graph node ids
    std::vector<SegmentId> segment_ids;
    std::vector<std::size_t> elements;                   // per segment
    std::vector<double> dx;                              // per segment, m
    std::vector<std::vector<std::size_t>> segment_nodes; // a .. b, per segment
    std::vector<double> boundary_area;                   // per graph node: sum of incident A
    std::vector<double> boundary_width;                  // per graph node: widest incident segment

    double beta = 0.0;
    double kappa = 0.0;
    Eigen::SparseMatrix<double> G_geom;  // kappa = 1 conductances, A/dx
    Eigen::VectorXd C;                   // diagonal capacitance, m^3
    Eigen::VectorXd J_unit;              // sum of +-A j per node (kappa, beta factored out)

    std::size_t size() const { return static_cast<std::size_t>(C.size()); }
    Eigen::SparseMatrix<double> G() const { return kappa * G_geom; }
    Eigen::VectorXd J() const { return beta * kappa * J_unit; }

    /// Copy with a different diffusivity (both G and J scale with kappa).
    DiscretizedSystem with_kappa(double k) const;

    /// "<node id>" for graph nodes, "s<segment id>:<k>" for interior nodes.
    std::string label(std::size_t i) const;
};

/// Default element length: shortest segment / 10, capped at 1 um.
double default_dx(const InterconnectGraph& g);

/// Each segment gets ceil(L / dx_target) equal elements. Throws InputError
/// when dx_target is not below the shortest segment length.
DiscretizedSystem discretize(const InterconnectGraph& g, const DcSolution& dc, const MaterialParams& p,
                             double dx_target);

/// Steady state of the assembled network: G sigma = J with the capacitance
/// weighted mean pinned to sigma_T.
Eigen::VectorXd network_steady_state(const DiscretizedSystem& sys, double sigma_T);

enum class VoidInterface { Delta, LineWidth };

struct TransientOptions {
    double t_end = 0.0;
    double dt = 0.0;
    // dt is multiplied by `ramp` every `ramp_every` steps, up to dt_max.
    double ramp = 1.0;
    std::size_t ramp_every = 1;
    double dt_max = std::numeric_limits<double>::infinity();
    std::size_t sample_stride = 1;
    // When non-empty, samples are taken exactly at these times (ascending);
    // t_end defaults to the last one.
    std::vector<double> sample_times;
    std::optional<Eigen::VectorXd> initial;  // default: sigma_T everywhere

    bool detect_nucleation = false;
    bool postvoid = false;  // switch nucleated nodes to the Robin condition
    VoidInterface interface = VoidInterface::Delta;
    bool check_interior = false;  // report interior crossings (never switched)
};

struct NucleationEvent {
    std::size_t index = 0;  // matrix index
    std::string node;       // label
    double time = 0.0;      // s, interpolated within the step
    double stress = 0.0;    // Pa
    bool interior = false;
};

struct StressTrace {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> stress;  // per sample, all matrix nodes
    std::vector<NucleationEvent> events;
    Eigen::VectorXd peak;                 // max over every step, per node
    Eigen::VectorXd peak_time;
    std::size_t steps = 0;

    /// Stress of matrix node i over the samples.
    std::vector<double> series(std::size_t i) const;
};

/// Backward-Euler integration of C dsigma/dt = -G sigma + J.
StressTrace step_transient(const DiscretizedSystem& sys, const MaterialParams& p, const TransientOptions& opt);

/// step_transient with nucleation detection and the post-void Robin switch
/// enabled (sigma_crit from p).
StressTrace nucleation_and_postvoid(const DiscretizedSystem& sys, const MaterialParams& p, TransientOptions opt);

/// 0.5 - 4 sum_m exp(-a_m^2 tau) / a_m^2 with a_m = (2m+1) pi. terms == 0
/// selects adaptive truncation (stop once the next term is below 1e-12) with
/// an Euler-Maclaurin estimate of the remaining tail.
double korhonen_bracket(double tau, std::size_t terms = 0);

/// Cathode stress of a single blocked segment, sigma_T added as a shift.
double korhonen_series(double j, double L, const MaterialParams& p, double t, std::size_t terms = 0);

/// Time at which korhonen_series reaches `target`; +inf if never.
double korhonen_crossing_time(double j, double L, const MaterialParams& p, double target);

/// Log-spaced sample grid convenient for transient runs.
std::vector<double> log_times(double t_first, double t_last, std::size_t count);

struct Caveat4Options {
    std::uint64_t seed = 1;
    std::size_t budget = 400;   // candidate trees tried
    double min_overshoot = 0.05;
};

struct Caveat4Result {
    bool found = false;
    std::size_t trials = 0;
    std::size_t budget = 0;
    double min_overshoot = 0.0;
    InterconnectGraph graph;
    MaterialParams material;
    double steady_max = 0.0;     // Pa
    double transient_max = 0.0;  // Pa
    double overshoot = 0.0;      // (transient_max - steady_max) / (steady_max - sigma_T)
    double sigma_crit_between = 0.0;  // midway between the two maxima
};

/// Reference copper-like material used by the search (sigma_T = 0).
MaterialParams reference_material();

/// Random search over 3-6 segment trees for an instance whose transient
/// tensile peak exceeds its steady-state maximum.
Caveat4Result caveat4_search(const Caveat4Options& opt);

/// Schedule that reaches steady state: t_end = 10 (sum of lengths)^2 / kappa,
/// dt starting at 0.01 dx^2 / kappa and growing 1.25x every 4 steps up to
/// t_end / 400.
TransientOptions default_transient_options(const InterconnectGraph& g, const DiscretizedSystem& sys);

/// Transient peak over time for one graph, run to 10 L_max^2 / kappa.
struct PeakComparison {
    double steady_max = 0.0;
    double transient_max = 0.0;
    std::size_t transient_node = 0;
};
PeakComparison compare_peaks(const InterconnectGraph& g, const MaterialParams& p, std::size_t elements_per_segment = 20);

}  // namespace emtk
