#include "emtk/transient.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/SparseCholesky>

#include "emtk/steady.hpp"

namespace emtk {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

constexpr double kPi = std::numbers::pi;

std::size_t element_count(double length, double dx_target)
{
    const double ratio = length / dx_target;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) <= 1e-9 * ratio) return std::max<std::size_t>(1, static_cast<std::size_t>(rounded));
    return static_cast<std::size_t>(std::ceil(ratio));
}

}  // namespace

DiscretizedSystem DiscretizedSystem::with_kappa(double k) const
{
    DiscretizedSystem out = *this;
    out.kappa = k;
    return out;
}

std::string DiscretizedSystem::label(std::size_t i) const
{
    if (i < graph_nodes) return std::to_string(node_ids[i]);
    for (std::size_t s = 0; s < segment_nodes.size(); ++s) {
        const auto& nodes = segment_nodes[s];
        for (std::size_t k = 1; k + 1 < nodes.size(); ++k)
            if (nodes[k] == i) return "s" + std::to_string(segment_ids[s]) + ":" + std::to_string(k);
    }
    return "?" + std::to_string(i);
}

double default_dx(const InterconnectGraph& g) { return std::min(g.min_length() / 10.0, 1e-6); }

DiscretizedSystem discretize(const InterconnectGraph& g, const DcSolution& dc, const MaterialParams& p,
                             double dx_target)
{
    if (!(dx_target > 0.0) || !std::isfinite(dx_target)) throw InputError("discretize: dx must be > 0");
    if (dx_target >= g.min_length())
        throw InputError("discretize: dx must be smaller than the shortest segment");

    const auto d = derived_params(p);
    DiscretizedSystem sys;
    sys.beta = d.beta;
    sys.kappa = d.kappa;
    sys.graph_nodes = g.node_count();
    for (const auto& n : g.nodes()) sys.node_ids.push_back(n.id);
    sys.boundary_area.assign(g.node_count(), 0.0);
    sys.boundary_width.assign(g.node_count(), 0.0);

    std::size_t next = g.node_count();
    for (std::size_t s = 0; s < g.segment_count(); ++s) {
        const auto& seg = g.segments()[s];
        const std::size_t ne = element_count(seg.length, dx_target);
        sys.segment_ids.push_back(seg.id);
        sys.elements.push_back(ne);
        sys.dx.push_back(seg.length / static_cast<double>(ne));
        std::vector<std::size_t> chain{g.index_a(s)};
        for (std::size_t k = 1; k < ne; ++k) chain.push_back(next++);
        chain.push_back(g.index_b(s));
        sys.segment_nodes.push_back(std::move(chain));
        for (std::size_t end : {g.index_a(s), g.index_b(s)}) {
            sys.boundary_area[end] += seg.area();
            sys.boundary_width[end] = std::max(sys.boundary_width[end], seg.width);
        }
    }

    const auto n = static_cast<Eigen::Index>(next);
    sys.C = Eigen::VectorXd::Zero(n);
    sys.J_unit = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t s = 0; s < g.segment_count(); ++s) {
        const auto& seg = g.segments()[s];
        const double A = seg.area();
        const double h = sys.dx[s];
        const double cond = A / h;
        const auto& chain = sys.segment_nodes[s];
        for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
            const auto i = static_cast<Eigen::Index>(chain[k]);
            const auto j = static_cast<Eigen::Index>(chain[k + 1]);
            trips.emplace_back(i, i, cond);
            trips.emplace_back(j, j, cond);
            trips.emplace_back(i, j, -cond);
            trips.emplace_back(j, i, -cond);
            sys.C(i) += 0.5 * A * h;
            sys.C(j) += 0.5 * A * h;
        }
        const double flux = A * dc.segment_densities[s];
        sys.J_unit(static_cast<Eigen::Index>(g.index_a(s))) += flux;
        sys.J_unit(static_cast<Eigen::Index>(g.index_b(s))) -= flux;
    }
    sys.G_geom.resize(n, n);
    sys.G_geom.setFromTriplets(trips.begin(), trips.end());
    sys.G_geom.makeCompressed();
    return sys;
}

Eigen::VectorXd network_steady_state(const DiscretizedSystem& sys, double sigma_T)
{
    const auto n = static_cast<Eigen::Index>(sys.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    if (n > 1) {
        // Ground index 0, solve the SPD remainder, then shift.
        const SpMat G = sys.G();
        const SpMat reduced = G.bottomRightCorner(n - 1, n - 1);
        Eigen::SimplicialLDLT<SpMat> solver(reduced);
        if (solver.info() != Eigen::Success) throw AnalysisError("network steady state: factorization failed");
        out.tail(n - 1) = solver.solve(sys.J().tail(n - 1));
    }
    const double mean = sys.C.dot(out) / sys.C.sum();
    out.array() += sigma_T - mean;
    return out;
}

std::vector<double> StressTrace::series(std::size_t i) const
{
    std::vector<double> out;
    out.reserve(stress.size());
    for (const auto& v : stress) out.push_back(v(static_cast<Eigen::Index>(i)));
    return out;
}

StressTrace step_transient(const DiscretizedSystem& sys, const MaterialParams& p, const TransientOptions& opt)
{
    if (!(opt.dt > 0.0)) throw InputError("transient: dt must be > 0");
    if (!(opt.ramp >= 1.0)) throw InputError("transient: ramp must be >= 1");
    if (opt.sample_stride == 0 || opt.ramp_every == 0) throw InputError("transient: strides must be >= 1");
    if (!std::is_sorted(opt.sample_times.begin(), opt.sample_times.end()))
        throw InputError("transient: sample times must be ascending");
    if (!opt.sample_times.empty() && opt.sample_times.front() < 0.0)
        throw InputError("transient: sample times must be >= 0");

    const double t_end = opt.sample_times.empty() ? opt.t_end : std::max(opt.t_end, opt.sample_times.back());
    if (!(t_end >= 0.0)) throw InputError("transient: t_end must be >= 0");

    const auto n = static_cast<Eigen::Index>(sys.size());
    Eigen::VectorXd sigma;
    if (opt.initial) {
        if (opt.initial->size() != n) throw InputError("transient: initial vector has the wrong size");
        sigma = *opt.initial;
    } else {
        sigma = Eigen::VectorXd::Constant(n, p.sigma_T);
    }

    double interface_scale = 0.0;
    if (opt.postvoid && opt.interface == VoidInterface::Delta) {
        if (!(p.delta_void > 0.0)) throw InputError("post-void analysis requires delta_void > 0");
        interface_scale = p.delta_void;
    }

    const SpMat G = sys.G();
    const Eigen::VectorXd J = sys.J();
    Eigen::VectorXd ground = Eigen::VectorXd::Zero(n);
    std::vector<bool> nucleated(static_cast<std::size_t>(n), false);
    const bool detect = (opt.detect_nucleation || opt.postvoid) && std::isfinite(p.sigma_crit);
    const auto candidates = static_cast<Eigen::Index>(opt.check_interior ? sys.size() : sys.graph_nodes);

    StressTrace tr;
    tr.peak = sigma;
    tr.peak_time = Eigen::VectorXd::Zero(n);
    auto record = [&](double t) {
        tr.times.push_back(t);
        tr.stress.push_back(sigma);
    };

    // Samples at t = 0 too.
    std::size_t next_sample = 0;
    if (!opt.sample_times.empty()) {
        while (next_sample < opt.sample_times.size() && opt.sample_times[next_sample] <= 0.0) {
            record(0.0);
            ++next_sample;
        }
    } else {
        record(0.0);
    }

    Eigen::SimplicialLDLT<SpMat> solver;
    double factored_dt = -1.0;
    bool dirty = true;
    double dt = opt.dt;
    double t = 0.0;
    while (t < t_end) {
        double h = std::min(dt, opt.dt_max);
        double target = t_end;
        if (next_sample < opt.sample_times.size()) target = opt.sample_times[next_sample];
        bool hit_target = false;
        if (t + h >= target * (1.0 - 1e-12)) {
            h = target - t;
            hit_target = true;
        }
        if (h <= 0.0) break;

        if (dirty || h != factored_dt) {
            SpMat M = h * G;
            M.diagonal() += sys.C + h * ground;
            solver.compute(M);
            if (solver.info() != Eigen::Success) throw AnalysisError("transient: factorization failed");
            factored_dt = h;
            dirty = false;
        }
        const Eigen::VectorXd rhs = sys.C.cwiseProduct(sigma) + h * J;
        Eigen::VectorXd next = solver.solve(rhs);
        if (!next.allFinite())
            throw AnalysisError("transient: non-finite stress at t = " + std::to_string(t + h) + " s");

        if (detect) {
            for (Eigen::Index i = 0; i < candidates; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                if (nucleated[ui]) continue;
                if (sigma(i) < p.sigma_crit && next(i) >= p.sigma_crit) {
                    NucleationEvent ev;
                    ev.index = ui;
                    ev.node = sys.label(ui);
                    ev.interior = ui >= sys.graph_nodes;
                    ev.time = t + h * (p.sigma_crit - sigma(i)) / (next(i) - sigma(i));
                    ev.stress = p.sigma_crit;
                    tr.events.push_back(ev);
                    nucleated[ui] = true;
                    if (opt.postvoid && !ev.interior) {
                        const double scale = opt.interface == VoidInterface::Delta ? interface_scale
                                                                                   : sys.boundary_width[ui];
                        ground(i) += sys.kappa * sys.boundary_area[ui] / scale;
                        dirty = true;
                    }
                }
            }
        }

        sigma = std::move(next);
        t = hit_target ? target : t + h;
        ++tr.steps;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (sigma(i) > tr.peak(i)) {
                tr.peak(i) = sigma(i);
                tr.peak_time(i) = t;
            }
        }
        if (tr.steps % opt.ramp_every == 0) dt *= opt.ramp;

        if (!opt.sample_times.empty()) {
            while (hit_target && next_sample < opt.sample_times.size() && opt.sample_times[next_sample] <= t) {
                record(opt.sample_times[next_sample]);
                ++next_sample;
            }
        } else if (tr.steps % opt.sample_stride == 0 || t >= t_end) {
            record(t);
        }
        if (hit_target && t >= t_end) break;
    }
    return tr;
}

StressTrace nucleation_and_postvoid(const DiscretizedSystem& sys, const MaterialParams& p, TransientOptions opt)
{
    opt.detect_nucleation = true;
    opt.postvoid = true;
    return step_transient(sys, p, opt);
}

double korhonen_bracket(double tau, std::size_t terms)
{
    if (!(tau >= 0.0)) throw InputError("korhonen_bracket: tau must be >= 0");
    auto term = [tau](std::size_t m) {
        const double a = (2.0 * static_cast<double>(m) + 1.0) * kPi;
        return 4.0 * std::exp(-a * a * tau) / (a * a);
    };
    double sum = 0.0;
    if (terms > 0) {
        for (std::size_t m = 0; m < terms; ++m) sum += term(m);
        return 0.5 - sum;
    }
    if (tau == 0.0) return 0.0;

    constexpr std::size_t max_terms = 10'000'000;
    std::size_t m = 0;
    for (; m < max_terms; ++m) {
        const double tm = term(m);
        if (tm < 1e-12) break;
        sum += tm;
    }
    // Euler-Maclaurin tail: integral from m to infinity plus half the first term.
    const double u0 = (2.0 * static_cast<double>(m) + 1.0) * kPi;
    const double st = std::sqrt(tau);
    const double integral = (2.0 / kPi) * (std::exp(-u0 * u0 * tau) / u0 - std::sqrt(kPi) * st * std::erfc(u0 * st));
    sum += std::max(0.0, integral) + 0.5 * term(m);
    return std::max(0.0, 0.5 - sum);
}

double korhonen_series(double j, double L, const MaterialParams& p, double t, std::size_t terms)
{
    if (!(L > 0.0)) throw InputError("korhonen_series: L must be > 0");
    if (!(t >= 0.0)) throw InputError("korhonen_series: t must be >= 0");
    const auto d = derived_params(p);
    return d.beta * j * L * korhonen_bracket(d.kappa * t / (L * L), terms) + p.sigma_T;
}

double korhonen_crossing_time(double j, double L, const MaterialParams& p, double target)
{
    const auto d = derived_params(p);
    const double scale = d.beta * j * L;
    if (scale <= 0.0) return target <= p.sigma_T ? 0.0 : std::numeric_limits<double>::infinity();
    const double r = (target - p.sigma_T) / scale;
    if (r <= 0.0) return 0.0;
    if (r >= 0.5) return std::numeric_limits<double>::infinity();

    double lo = 0.0;
    double hi = 1e-6;
    while (korhonen_bracket(hi) < r) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (korhonen_bracket(mid) < r) lo = mid;
        else hi = mid;
        if (hi - lo <= 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi) * L * L / d.kappa;
}

std::vector<double> log_times(double t_first, double t_last, std::size_t count)
{
    if (!(t_first > 0.0) || !(t_last >= t_first) || count == 0) throw InputError("log_times: bad range");
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = t_first;
        return out;
    }
    const double step = std::log(t_last / t_first) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = t_first * std::exp(step * static_cast<double>(i));
    out.back() = t_last;
    return out;
}

MaterialParams reference_material()
{
    MaterialParams p;
    p.Z_eff = 1.0;
    p.e_charge = constants::electron_charge;
    p.rho_el = 2.5e-8;
    p.omega = 1.18e-29;
    p.bulk_modulus = 2.8e10;
    p.D0 = 7.56e-5;
    p.Ea = 0.8;
    p.var_Ea = 0.0;
    p.temperature = 373.0;
    p.sigma_crit = 5.0e7;
    p.sigma_T = 0.0;
    p.delta_void = 1e-9;
    p.recovery_r = 0.7;
    p.black_A = 1.0;
    p.black_n = 2.0;
    p.sigma_ln = 0.3;
    return p;
}

TransientOptions default_transient_options(const InterconnectGraph& g, const DiscretizedSystem& sys)
{
    double total = 0.0;
    for (const auto& s : g.segments()) total += s.length;
    const double dx = *std::min_element(sys.dx.begin(), sys.dx.end());
    TransientOptions opt;
    opt.t_end = 10.0 * total * total / sys.kappa;
    opt.dt = 0.01 * dx * dx / sys.kappa;
    opt.ramp = 1.25;
    opt.ramp_every = 4;
    opt.dt_max = opt.t_end / 400.0;
    return opt;
}

PeakComparison compare_peaks(const InterconnectGraph& g, const MaterialParams& p, std::size_t elements_per_segment)
{
    const DcSolution dc = solve_dc(g, p);
    const SteadyStressProfile prof = steady_state(g, dc, p);
    const double dx = g.min_length() / static_cast<double>(elements_per_segment);
    const DiscretizedSystem sys = discretize(g, dc, p, dx);

    TransientOptions opt = default_transient_options(g, sys);
    opt.sample_stride = 1u << 30;
    const StressTrace tr = step_transient(sys, p, opt);

    PeakComparison out;
    out.steady_max = prof.max_tensile.value;
    Eigen::Index where = 0;
    out.transient_max = tr.peak.head(static_cast<Eigen::Index>(sys.graph_nodes)).maxCoeff(&where);
    out.transient_node = static_cast<std::size_t>(where);
    return out;
}

Caveat4Result caveat4_search(const Caveat4Options& opt)
{
    Caveat4Result res;
    res.budget = opt.budget;
    res.min_overshoot = opt.min_overshoot;
    res.material = reference_material();
    const MaterialParams& p = res.material;

    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<int> seg_count(3, 6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (std::size_t trial = 0; trial < opt.budget; ++trial) {
        res.trials = trial + 1;
        const int ns = seg_count(rng);
        std::vector<Node> nodes(static_cast<std::size_t>(ns) + 1);
        for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].id = i;
        std::vector<Segment> segs;
        std::vector<double> j;
        for (int s = 0; s < ns; ++s) {
            Segment seg;
            seg.id = static_cast<SegmentId>(s);
            seg.node_b = static_cast<NodeId>(s + 1);
            seg.node_a = static_cast<NodeId>(std::uniform_int_distribution<int>(0, s)(rng));
            seg.length = 5e-6 * std::pow(20.0, unit(rng));  // 5 .. 100 um
            seg.width = 1e-7;
            seg.thickness = 2e-7;
            seg.layer = "M1";
            const double mag = 1e9 * std::pow(50.0, unit(rng));  // 0.1 .. 5 MA/cm^2
            j.push_back(unit(rng) < 0.5 ? -mag : mag);
            segs.push_back(seg);
        }
        // Injections that make j the unique tree current distribution.
        for (int s = 0; s < ns; ++s) {
            const double I = j[static_cast<std::size_t>(s)] * segs[static_cast<std::size_t>(s)].area();
            nodes[segs[static_cast<std::size_t>(s)].node_a].injected_current += I;
            nodes[segs[static_cast<std::size_t>(s)].node_b].injected_current -= I;
        }
        for (auto& nd : nodes) {
            if (std::abs(nd.injected_current) < 1e-18) nd.injected_current = 0.0;
            nd.is_terminal = nd.injected_current != 0.0;
        }
        InterconnectGraph g(std::move(nodes), std::move(segs));
        try {
            g.validate();
        } catch (const InputError&) {
            continue;
        }

        const PeakComparison pk = compare_peaks(g, p);
        if (!(pk.steady_max > p.sigma_T)) continue;
        const double over = (pk.transient_max - pk.steady_max) / (pk.steady_max - p.sigma_T);
        if (over >= opt.min_overshoot) {
            res.found = true;
            res.graph = std::move(g);
            res.steady_max = pk.steady_max;
            res.transient_max = pk.transient_max;
            res.overshoot = over;
            res.sigma_crit_between = 0.5 * (pk.steady_max + pk.transient_max);
            res.material.sigma_crit = res.sigma_crit_between;
            return res;
        }
    }
    return res;
}

}  // namespace emtk
