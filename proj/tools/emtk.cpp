// emtk: command-line front end.
//
// Exit codes: 0 success, 1 analysis finding (check --strict on a mortal
// net, calibration that does not converge), 2 input error.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "emtk/acem.hpp"
#include "emtk/dc.hpp"
#include "emtk/error.hpp"
#include "emtk/format.hpp"
#include "emtk/netlist.hpp"
#include "emtk/pipeline.hpp"
#include "emtk/reliability.hpp"
#include "emtk/steady.hpp"
#include "emtk/transient.hpp"
#include "emtk/variation.hpp"

namespace {

constexpr const char* kVersion = "emtk 0.1.0";

using emtk::fmt_double;

struct Global {
    std::vector<std::string> inputs;
    std::string out_dir;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::string format = "csv";
};

// Writes to <out_dir>/<name> when --out is given, else to stdout.
class Sink {
public:
    Sink(const Global& g, const std::string& name)
    {
        if (!g.out_dir.empty()) {
            std::filesystem::create_directories(g.out_dir);
            const auto path = std::filesystem::path(g.out_dir) / name;
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw emtk::InputError("cannot open output file " + path.string());
        }
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::ofstream open_file(const std::string& path)
{
    std::ofstream f(path);
    if (!f) throw emtk::InputError("cannot open output file " + path);
    return f;
}

emtk::Netlist single_input(const Global& g)
{
    if (g.inputs.size() != 1) throw emtk::InputError("exactly one --input netlist is required");
    return emtk::load_netlist(g.inputs.front());
}

std::string node_or_label(const emtk::DiscretizedSystem& sys, std::size_t i) { return sys.label(i); }

std::vector<double> parse_times(const std::string& csv)
{
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw emtk::InputError("bad time value '" + item + "'");
        }
        if (used != item.size() || !(v >= 0.0)) throw emtk::InputError("bad time value '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw emtk::InputError("--times needs at least one value");
    return out;
}

std::vector<emtk::JlPoint> read_jl_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw emtk::InputError("cannot open " + path);
    std::vector<emtk::JlPoint> pts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (lineno == 1 && line.rfind("jL", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw emtk::InputError(path + ":" + std::to_string(lineno) + ": expected jL,t_life_over_L2");
        try {
            pts.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        } catch (const std::exception&) {
            throw emtk::InputError(path + ":" + std::to_string(lineno) + ": not a number");
        }
    }
    return pts;
}

int run_dc(const Global& g)
{
    const auto net = single_input(g);
    const auto dc = emtk::solve_dc(net.graph, net.material);
    Sink nodes(g, "dc_nodes.csv");
    nodes.os() << "node_id,voltage\n";
    for (std::size_t i = 0; i < net.graph.nodes().size(); ++i)
        nodes.os() << net.graph.nodes()[i].id << ',' << fmt_double(dc.node_voltages[i]) << '\n';
    Sink segs(g, "dc_segments.csv");
    if (g.out_dir.empty()) segs.os() << '\n';
    segs.os() << "segment_id,current,density\n";
    for (std::size_t s = 0; s < net.graph.segments().size(); ++s)
        segs.os() << net.graph.segments()[s].id << ',' << fmt_double(dc.segment_currents[s]) << ','
                  << fmt_double(dc.segment_densities[s]) << '\n';
    return 0;
}

int run_steady(const Global& g, bool check)
{
    const auto net = single_input(g);
    const auto dc = emtk::solve_dc(net.graph, net.material);
    const auto prof = emtk::steady_state(net.graph, dc, net.material);
    Sink sink(g, "steady.csv");
    auto& os = sink.os();
    os << "node_id,stress_pa\n";
    for (std::size_t i = 0; i < net.graph.nodes().size(); ++i)
        os << net.graph.nodes()[i].id << ',' << fmt_double(prof.node_stress[i]) << '\n';
    if (check) {
        const auto r = emtk::immortality_check(prof, net.material);
        os << "# verdict=" << (r.immortal ? "immortal" : "mortal") << " margin_pa=" << fmt_double(r.margin)
           << " max_tensile_pa=" << fmt_double(r.max_tensile) << " worst_node=" << r.worst_node
           << " steady_state_only=1\n";
    }
    return 0;
}

int run_constraints(const Global& g)
{
    const auto net = single_input(g);
    const auto cons = emtk::emit_pdn_constraints(net.graph, net.material);
    Sink sink(g, "constraints.lp");
    sink.os() << emtk::format_lp(net.graph, cons);
    return 0;
}

struct TransientArgs {
    double t_end = 0.0;
    double dt = 0.0;
    double dx = 0.0;
    bool postvoid = false;
    std::string interface = "delta";
    std::string trace_out;
    std::size_t samples = 50;
    bool interior = false;
};

int run_transient(const Global& g, const TransientArgs& a)
{
    const auto net = single_input(g);
    const auto dc = emtk::solve_dc(net.graph, net.material);
    const double dx = a.dx > 0.0 ? a.dx : emtk::default_dx(net.graph);
    const auto sys = emtk::discretize(net.graph, dc, net.material, dx);

    emtk::CheckOptions co;
    co.t_end = a.t_end;
    co.dt = a.dt;
    co.samples = a.samples;
    emtk::TransientOptions opt = emtk::check_transient_options(net.graph, sys, co);
    opt.postvoid = a.postvoid;
    if (a.interface == "width") opt.interface = emtk::VoidInterface::LineWidth;
    else if (a.interface != "delta") throw emtk::InputError("--interface must be delta or width");
    const auto tr = emtk::step_transient(sys, net.material, opt);

    std::ofstream file;
    std::unique_ptr<Sink> sink;
    std::ostream* os = nullptr;
    if (!a.trace_out.empty()) {
        file = open_file(a.trace_out);
        os = &file;
    } else {
        sink = std::make_unique<Sink>(g, "transient.csv");
        os = &sink->os();
    }
    *os << "time_s,node_id,stress_pa\n";
    const std::size_t n = a.interior ? sys.size() : sys.graph_nodes;
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        for (std::size_t i = 0; i < n; ++i)
            *os << fmt_double(tr.times[k]) << ',' << node_or_label(sys, i) << ','
                << fmt_double(tr.stress[k](static_cast<Eigen::Index>(i))) << '\n';
    for (const auto& ev : tr.events)
        *os << "# EVENT nucleation node=" << ev.node << " t=" << fmt_double(ev.time)
            << " stress=" << fmt_double(ev.stress) << '\n';
    return 0;
}

struct VariationArgs {
    std::size_t order = 8;
    std::size_t mc_samples = 0;
    std::string times;
    double dx = 0.0;
};

int run_variation(const Global& g, const VariationArgs& a)
{
    const auto net = single_input(g);
    const auto& p = net.material;
    const auto dc = emtk::solve_dc(net.graph, p);
    const double dx = a.dx > 0.0 ? a.dx : emtk::default_dx(net.graph);
    const auto sys = emtk::discretize(net.graph, dc, p, dx);

    std::vector<double> times;
    if (a.times.empty()) {
        const double scale = emtk::default_time_scale(sys);
        times = emtk::log_times(1e-3 * scale, scale, 10);
    } else {
        times = parse_times(a.times);
    }
    if (!std::is_sorted(times.begin(), times.end())) throw emtk::InputError("--times must be ascending");

    const auto shift = emtk::mean_stress_shift(sys, p, times, a.order);
    for (const auto& w : shift.warnings) std::cerr << "warning: " << w << '\n';

    emtk::TransientOptions topt = emtk::check_transient_options(net.graph, sys, {});
    topt.detect_nucleation = false;
    topt.check_interior = false;
    topt.sample_times = times;
    topt.t_end = times.back();
    const auto nominal = emtk::step_transient(sys, p, topt);

    emtk::MonteCarloResult mc;
    if (a.mc_samples > 0) {
        emtk::MonteCarloOptions mo;
        mo.samples = a.mc_samples;
        mo.seed = g.seed;
        mo.threads = g.threads;
        mo.transient = topt;
        mc = emtk::monte_carlo_oracle(sys, p, times, mo);
    }

    Sink sink(g, "variation.csv");
    auto& os = sink.os();
    os << "time_s,node_id,mean_stress_pa,mc_mean_pa,mc_stderr_pa\n";
    for (std::size_t t = 0; t < times.size(); ++t) {
        for (std::size_t c = 0; c < shift.nodes.size(); ++c) {
            const auto idx = static_cast<Eigen::Index>(shift.nodes[c]);
            os << fmt_double(times[t]) << ',' << sys.label(shift.nodes[c]) << ','
               << fmt_double(nominal.stress[t](idx) + shift.shift[t][c]) << ',';
            if (a.mc_samples > 0) os << fmt_double(mc.mean[t][c]) << ',' << fmt_double(mc.stderr_[t][c]);
            else os << "nan,nan";
            os << '\n';
        }
    }
    return 0;
}

int run_acem(const Global& g, double recovery)
{
    const auto net = single_input(g);
    const double r = recovery >= 0.0 ? recovery : net.material.recovery_r;
    Sink sink(g, "acem.csv");
    auto& os = sink.os();
    os << "segment_id,j_eff_left,j_eff_right\n";
    for (const auto& w : net.waveforms) {
        const auto e = emtk::effective_densities(emtk::directional_averages(w.waveform), r);
        os << w.segment << ',' << fmt_double(e.left) << ',' << fmt_double(e.right) << '\n';
    }
    return 0;
}

struct LifetimeArgs {
    double ff = 0.5;
    double time = 0.0;
};

int run_lifetime(const Global& g, const LifetimeArgs& a)
{
    const auto net = single_input(g);
    const auto& p = net.material;
    const auto dc = emtk::solve_dc(net.graph, p);
    const double z = emtk::ff_to_z(a.ff);
    Sink sink(g, "lifetime.csv");
    auto& os = sink.os();
    os << "segment_id,density,t50_s,t_ff_s";
    if (a.time > 0.0) os << ",ff_at_time";
    os << '\n';
    std::vector<double> probs;
    for (std::size_t s = 0; s < net.graph.segments().size(); ++s) {
        const double j = std::abs(dc.segment_densities[s]);
        const double inf = std::numeric_limits<double>::infinity();
        const double t50 = j > 0.0 ? emtk::black_mttf(j, p) : inf;
        const double tf = std::isfinite(t50) ? emtk::z_to_tf(z, t50, p.sigma_ln) : inf;
        os << net.graph.segments()[s].id << ',' << fmt_double(dc.segment_densities[s]) << ',' << fmt_double(t50)
           << ',' << fmt_double(tf);
        if (a.time > 0.0) {
            const double f = std::isfinite(t50) ? emtk::tf_to_ff(a.time, t50, p.sigma_ln) : 0.0;
            probs.push_back(f);
            os << ',' << fmt_double(f);
        }
        os << '\n';
    }
    if (a.time > 0.0) os << "# F_net=" << fmt_double(emtk::weakest_link(probs)) << " t=" << fmt_double(a.time) << '\n';
    return 0;
}

int run_calibrate(const Global& g, const std::string& data)
{
    const std::string path = !data.empty() ? data : (g.inputs.size() == 1 ? g.inputs.front() : "");
    if (path.empty()) throw emtk::InputError("calibrate needs --data <csv>");
    const auto fit = emtk::fit_jl_curve(read_jl_csv(path));
    Sink sink(g, "calibrate.txt");
    auto& os = sink.os();
    os << "sigma_crit_over_beta=" << fmt_double(fit.sigma_crit_over_beta) << '\n'
       << "kappa=" << fmt_double(fit.kappa) << '\n'
       << "residual=" << fmt_double(fit.residual) << '\n'
       << "iterations=" << fit.iterations << '\n'
       << "jl_asymptote=" << fmt_double(2.0 * fit.sigma_crit_over_beta) << '\n';
    return 0;
}

struct CheckArgs {
    bool strict = false;
    double t_end = 0.0;
    double dt = 0.0;
    double dx = 0.0;
};

int run_check(const Global& g, const CheckArgs& a)
{
    if (g.inputs.empty()) throw emtk::InputError("check needs at least one --input netlist");
    std::vector<emtk::Netlist> nets;
    for (const auto& f : g.inputs) nets.push_back(emtk::load_netlist(f));
    emtk::CheckOptions co;
    co.t_end = a.t_end;
    co.dt = a.dt;
    co.dx = a.dx;
    const auto reps = emtk::check_nets(nets, co, g.threads);

    Sink sink(g, "check.csv");
    auto& os = sink.os();
    os << "net,verdict,max_tensile_pa,margin_pa,worst_node,blech_violations,transient_max_pa,nucleation_node,"
          "nucleation_time_s\n";
    bool mortal = false;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        const auto& r = reps[i];
        mortal = mortal || r.mortal();
        std::string blech;
        for (auto id : r.blech_violations) blech += (blech.empty() ? "" : " ") + std::to_string(id);
        os << g.inputs[i] << ',' << emtk::verdict_text(r.verdict) << ',' << fmt_double(r.steady.max_tensile) << ','
           << fmt_double(r.steady.margin) << ',' << r.steady.worst_node << ',' << blech << ','
           << (r.transient_run ? fmt_double(r.transient_max) : "") << ','
           << (r.first_nucleation ? r.first_nucleation->node : "") << ','
           << (r.first_nucleation ? fmt_double(r.first_nucleation->time) : "") << '\n';
    }
    return a.strict && mortal ? 1 : 0;
}

struct Caveat4Args {
    std::size_t budget = 400;
    double min_overshoot = 0.05;
    std::string netlist_out;
};

int run_caveat4(const Global& g, const Caveat4Args& a)
{
    emtk::Caveat4Options o;
    o.seed = g.seed;
    o.budget = a.budget;
    o.min_overshoot = a.min_overshoot;
    const auto r = emtk::caveat4_search(o);
    std::cout << "found=" << (r.found ? 1 : 0) << '\n' << "trials=" << r.trials << '\n';
    if (!r.found) return 1;
    std::cout << "steady_max_pa=" << fmt_double(r.steady_max) << '\n'
              << "transient_max_pa=" << fmt_double(r.transient_max) << '\n'
              << "overshoot=" << fmt_double(r.overshoot) << '\n'
              << "sigma_crit_pa=" << fmt_double(r.material.sigma_crit) << '\n';
    emtk::Netlist net;
    net.graph = r.graph;
    net.material = r.material;
    std::string path = a.netlist_out;
    if (path.empty() && !g.out_dir.empty()) {
        std::filesystem::create_directories(g.out_dir);
        path = (std::filesystem::path(g.out_dir) / "caveat4.json").string();
    }
    if (!path.empty()) {
        auto f = open_file(path);
        f << emtk::serialize_netlist(net);
        std::cout << "netlist=" << path << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Electromigration stress and lifetime analysis"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    Global g;
    app.add_option("--input", g.inputs, "Netlist JSON (repeatable for check)");
    app.add_option("--out", g.out_dir, "Write outputs into this directory instead of stdout");
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv"}));

    auto* dc = app.add_subcommand("dc", "Node voltages and segment currents");

    bool steady_check = false;
    auto* steady = app.add_subcommand("steady", "Steady-state nodal stress");
    steady->add_flag("--check", steady_check, "Print the immortality verdict and margin");

    auto* constraints = app.add_subcommand("constraints", "Linear jL stress constraints in LP format");

    TransientArgs ta;
    auto* transient = app.add_subcommand("transient", "Transient stress with nucleation detection");
    transient->add_option("--t-end", ta.t_end, "End time, s (default: long enough to settle)");
    transient->add_option("--dt", ta.dt, "Fixed step, s (default: ramped)");
    transient->add_option("--dx", ta.dx, "Element length, m");
    transient->add_flag("--postvoid", ta.postvoid, "Switch nucleated nodes to the void boundary condition");
    transient->add_option("--interface", ta.interface, "Void interface thickness: delta or width");
    transient->add_option("--trace-out", ta.trace_out, "Trace CSV path");
    transient->add_option("--samples", ta.samples, "Sampled times (log spaced, plus t = 0)");
    transient->add_flag("--interior", ta.interior, "Include element nodes in the trace");

    VariationArgs va;
    auto* variation = app.add_subcommand("variation", "Mean stress shift under activation-energy variation");
    variation->add_option("--order", va.order, "Moments per node");
    variation->add_option("--mc-samples", va.mc_samples, "Monte Carlo samples (0 skips the oracle)");
    variation->add_option("--times", va.times, "Comma separated times, s");
    variation->add_option("--dx", va.dx, "Element length, m");

    double recovery = -1.0;
    auto* acem = app.add_subcommand("acem", "Effective DC densities of bidirectional waveforms");
    acem->add_option("--recovery", recovery, "Recovery factor (default: material recovery_r)");

    LifetimeArgs la;
    auto* lifetime = app.add_subcommand("lifetime", "Black's equation lifetimes per segment");
    lifetime->add_option("--ff", la.ff, "Fail fraction for t_ff");
    lifetime->add_option("--time", la.time, "Also report fail fractions at this time, s");

    std::string data;
    auto* calibrate = app.add_subcommand("calibrate", "Fit sigma_crit/beta and kappa to jL lifetime data");
    calibrate->add_option("--data", data, "CSV with columns jL,t_life_over_L2");

    CheckArgs ca;
    auto* check = app.add_subcommand("check", "Blech, steady-state and transient filtering");
    check->add_flag("--strict", ca.strict, "Exit 1 when any net is mortal");
    check->add_option("--t-end", ca.t_end, "Transient end time, s");
    check->add_option("--dt", ca.dt, "Fixed transient step, s");
    check->add_option("--dx", ca.dx, "Element length, m");

    Caveat4Args c4;
    auto* caveat4 = app.add_subcommand("caveat4", "Search for a net whose transient peak exceeds its steady state");
    caveat4->add_option("--budget", c4.budget, "Candidate nets to try");
    caveat4->add_option("--min-overshoot", c4.min_overshoot, "Required relative overshoot");
    caveat4->add_option("--netlist-out", c4.netlist_out, "Where to write the instance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*dc) return run_dc(g);
        if (*steady) return run_steady(g, steady_check);
        if (*constraints) return run_constraints(g);
        if (*transient) return run_transient(g, ta);
        if (*variation) return run_variation(g, va);
        if (*acem) return run_acem(g, recovery);
        if (*lifetime) return run_lifetime(g, la);
        if (*calibrate) return run_calibrate(g, data);
        if (*check) return run_check(g, ca);
        if (*caveat4) return run_caveat4(g, c4);
    } catch (const emtk::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const emtk::AnalysisError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
