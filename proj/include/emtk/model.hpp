// Core domain types shared by every analysis engine.
//
// Sign ledger (applies everywhere in emtk):
//   * all currents are electron currents;
//   * a segment density j is positive when electrons flow node_a -> node_b;
//   * node injections are positive when electrons enter the metal there;
//   * tensile stress is positive, so the cathode (electron entry) goes tensile;
//   * beta is stored positive and every sign is carried by j.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "emtk/error.hpp"

namespace emtk {

namespace constants {
inline constexpr double boltzmann = 1.380649e-23;        // J/K
inline constexpr double electron_charge = -1.602176634e-19;  // C
inline constexpr double ev_to_joule = 1.602176634e-19;   // J/eV
}  // namespace constants

using NodeId = std::uint64_t;
using SegmentId = std::uint64_t;

struct MaterialParams {
    double Z_eff = 1.0;
    double e_charge = constants::electron_charge;
    double rho_el = 0.0;        // Ohm m
    double omega = 0.0;         // m^3
    double bulk_modulus = 0.0;  // Pa
    double D0 = 0.0;            // m^2/s
    double Ea = 0.0;            // eV
    double var_Ea = 0.0;        // eV^2
    double temperature = 0.0;   // K
    double sigma_crit = 0.0;    // Pa
    double sigma_T = 0.0;       // Pa
    double delta_void = 0.0;    // m, required for post-void analysis
    double recovery_r = 0.0;
    double black_A = 0.0;
    double black_n = 2.0;
    double sigma_ln = 0.0;

    /// Throws InputError when an invariant is violated.
    void validate() const;

    /// kT in joules.
    double kT() const { return constants::boltzmann * temperature; }
    /// Activation energy in joules.
    double Ea_joule() const { return Ea * constants::ev_to_joule; }
};

struct DerivedParams {
    double beta = 0.0;   // Pa per (A/m^2 * m)
    double kappa = 0.0;  // m^2/s
    double D_a = 0.0;    // m^2/s
};

DerivedParams derived_params(const MaterialParams& p);

/// Diffusivity-related kappa for an arbitrary activation energy (eV), all
/// other parameters taken from p. Used by the Monte Carlo sampler.
double kappa_for_activation(const MaterialParams& p, double Ea_ev);

struct Node {
    NodeId id = 0;
    bool is_terminal = false;
    double injected_current = 0.0;  // A, electron current into the metal
};

struct Segment {
    SegmentId id = 0;
    NodeId node_a = 0;
    NodeId node_b = 0;
    double length = 0.0;     // m
    double width = 0.0;      // m
    double thickness = 0.0;  // m
    std::string layer;
    std::optional<double> prescribed_j;  // A/m^2, electron sign, a -> b

    double area() const { return width * thickness; }
};

struct WaveInterval {
    double duration = 0.0;  // s
    double density = 0.0;   // A/m^2, signed
};

/// Periodic piecewise-constant current density waveform.
struct CurrentWaveform {
    double period = 0.0;
    std::vector<WaveInterval> intervals;

    void validate() const;
};

struct SegmentWaveform {
    SegmentId segment = 0;
    CurrentWaveform waveform;
};

/// Nodes and segments of one interconnect net. Nodes are kept sorted by id
/// so index 0 is always the lowest id (the datum).
class InterconnectGraph {
public:
    InterconnectGraph() = default;
    InterconnectGraph(std::vector<Node> nodes, std::vector<Segment> segments);

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Segment>& segments() const { return segments_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t segment_count() const { return segments_.size(); }

    std::size_t node_index(NodeId id) const;
    std::size_t segment_index(SegmentId id) const;
    std::size_t index_a(std::size_t seg) const { return seg_a_[seg]; }
    std::size_t index_b(std::size_t seg) const { return seg_b_[seg]; }

    /// Segment indices incident on node index n, in ascending segment order.
    const std::vector<std::size_t>& incident(std::size_t n) const { return incident_[n]; }

    bool has_prescribed_densities() const;
    double total_volume() const;
    double max_length() const;
    double min_length() const;

    /// Connectivity, geometry, KCL closure (1e-9 relative), id uniqueness.
    void validate() const;

    /// Same topology with per-segment densities prescribed (replaces any
    /// existing prescription; injections are kept as-is).
    InterconnectGraph with_densities(const std::vector<double>& j) const;

private:
    void build_index();

    std::vector<Node> nodes_;
    std::vector<Segment> segments_;
    std::unordered_map<NodeId, std::size_t> node_lookup_;
    std::unordered_map<SegmentId, std::size_t> segment_lookup_;
    std::vector<std::size_t> seg_a_, seg_b_;
    std::vector<std::vector<std::size_t>> incident_;
};

}  // namespace emtk
