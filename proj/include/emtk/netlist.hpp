// JSON netlist ingestion and emission.
//
// Top-level keys: "material", "nodes", "segments", optional "waveforms" and
// optional "units". Units declare the length, current and current-density
// scales used in the document; everything is converted to SI on load:
//
//   "units": {"length": "um", "current": "mA", "current_density": "MA/cm2"}
//
// Recognised length units: m, mm, um, nm. Current: A, mA, uA, nA.
// Current density: A/m2, A/cm2, MA/cm2. Ea is always eV, var_Ea eV^2.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "emtk/model.hpp"

namespace emtk {

struct Netlist {
    InterconnectGraph graph;
    MaterialParams material;
    std::vector<SegmentWaveform> waveforms;
};

/// Parses and validates a netlist document. Throws InputError on schema
/// violations, disconnected graphs, KCL imbalance or bad geometry.
Netlist parse_netlist(std::string_view text);

Netlist load_netlist(const std::string& path);

/// Emits the netlist in SI units (no "units" block).
std::string serialize_netlist(const Netlist& net);

/// Scale a value given in `unit` to SI. Powers of ten below one are applied
/// by division so that the conversion is correctly rounded.
double length_to_si(double value, std::string_view unit);
double current_to_si(double value, std::string_view unit);
double density_to_si(double value, std::string_view unit);

}  // namespace emtk
