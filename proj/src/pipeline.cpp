#include "emtk/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "emtk/dc.hpp"

namespace emtk {

std::string verdict_text(Verdict v)
{
    switch (v) {
    case Verdict::ImmortalSteady: return "immortal (steady-state)";
    case Verdict::MortalSteady: return "mortal (steady-state)";
    case Verdict::MortalTransient: return "mortal (transient overshoot)";
    }
    return "unknown";
}

TransientOptions check_transient_options(const InterconnectGraph& g, const DiscretizedSystem& sys,
                                         const CheckOptions& opt)
{
    TransientOptions t = default_transient_options(g, sys);
    if (opt.t_end > 0.0) {
        t.t_end = opt.t_end;
        t.dt_max = opt.t_end / 400.0;
    }
    if (opt.dt > 0.0) {
        t.dt = opt.dt;
        t.ramp = 1.0;
        t.dt_max = opt.dt;
    }
    if (opt.samples < 2) throw InputError("transient: at least two samples required");
    t.sample_times = log_times(t.dt, t.t_end, opt.samples - 1);
    t.sample_times.insert(t.sample_times.begin(), 0.0);
    t.detect_nucleation = true;
    return t;
}

CheckReport check_net(const Netlist& net, const CheckOptions& opt)
{
    const InterconnectGraph& g = net.graph;
    const MaterialParams& p = net.material;
    CheckReport rep;

    const DcSolution dc = solve_dc(g, p);
    for (std::size_t s = 0; s < g.segments().size(); ++s) {
        const double jL = std::abs(dc.segment_densities[s]) * g.segments()[s].length;
        if (!blech_check(jL, p)) rep.blech_violations.push_back(g.segments()[s].id);
    }

    const SteadyStressProfile prof = steady_state(g, dc, p);
    rep.steady = immortality_check(prof, p);
    rep.verdict = rep.steady.immortal ? Verdict::ImmortalSteady : Verdict::MortalSteady;

    // A single blocked segment rises monotonically to its steady profile, so
    // only multi-segment nets can overshoot.
    const bool need = !rep.steady.immortal || g.segments().size() > 1;
    if (!opt.transient || !need) return rep;

    const double dx = opt.dx > 0.0 ? opt.dx : default_dx(g);
    const DiscretizedSystem sys = discretize(g, dc, p, dx);
    const TransientOptions topt = check_transient_options(g, sys, opt);
    const StressTrace tr = step_transient(sys, p, topt);
    rep.transient_run = true;
    Eigen::Index where = 0;
    rep.transient_max = tr.peak.maxCoeff(&where);
    rep.transient_node = sys.label(static_cast<std::size_t>(where));
    if (!tr.events.empty()) {
        rep.first_nucleation = *std::min_element(tr.events.begin(), tr.events.end(),
                                                 [](const NucleationEvent& a, const NucleationEvent& b) {
                                                     return a.time < b.time;
                                                 });
        if (rep.steady.immortal) rep.verdict = Verdict::MortalTransient;
    }
    return rep;
}

std::vector<CheckReport> check_nets(const std::vector<Netlist>& nets, const CheckOptions& opt, std::size_t threads)
{
    std::vector<CheckReport> out(nets.size());
    std::vector<std::exception_ptr> errors(nets.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < nets.size(); i = next++) {
            try {
                out[i] = check_net(nets[i], opt);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(nets.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace emtk
