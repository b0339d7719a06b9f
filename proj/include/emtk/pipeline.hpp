// Net filtering: Blech per segment, then the steady-state check, then a
// transient run for nets the steady state cannot clear on its own.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "emtk/netlist.hpp"
#include "emtk/steady.hpp"
#include "emtk/transient.hpp"

namespace emtk {

enum class Verdict { ImmortalSteady, MortalSteady, MortalTransient };

std::string verdict_text(Verdict v);

struct CheckOptions {
    double dx = 0.0;     // 0: default_dx
    double t_end = 0.0;  // 0: default_transient_options
    double dt = 0.0;     // 0: default_transient_options
    std::size_t samples = 50;  // t = 0 plus log-spaced times up to t_end
    bool transient = true;
};

struct CheckReport {
    Verdict verdict = Verdict::ImmortalSteady;
    std::vector<SegmentId> blech_violations;
    ImmortalityResult steady;
    bool transient_run = false;
    double transient_max = 0.0;  // Pa, over every node and step
    std::string transient_node;
    std::optional<NucleationEvent> first_nucleation;

    bool mortal() const { return verdict != Verdict::ImmortalSteady; }
};

/// Transient settings shared by `check` and `transient`: user overrides on
/// top of default_transient_options, nucleation detected at the graph nodes
/// (an element node cannot peak above both ends of its segment).
/// Both commands sample at the same times, so they take identical steps.
TransientOptions check_transient_options(const InterconnectGraph& g, const DiscretizedSystem& sys,
                                         const CheckOptions& opt);

CheckReport check_net(const Netlist& net, const CheckOptions& opt = {});

/// Runs check_net over several nets on up to `threads` workers; reports are
/// returned in input order. The first failure is rethrown.
std::vector<CheckReport> check_nets(const std::vector<Netlist>& nets, const CheckOptions& opt, std::size_t threads);

}  // namespace emtk
