#include "emtk/steady.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "emtk/format.hpp"

namespace emtk {

namespace {

constexpr double kTieUlps = 16.0;

bool within_limit(double value, double limit)
{
    const double scale = std::max({std::abs(value), std::abs(limit), std::numeric_limits<double>::min()});
    return value - limit <= kTieUlps * std::numeric_limits<double>::epsilon() * scale;
}

// sigma_n - sigma_datum along the tree, for per-segment densities j.
std::vector<double> relative_stress(const InterconnectGraph& g, const SpanningTree& t, double beta,
                                    const std::vector<double>& j)
{
    std::vector<double> rel(g.node_count(), 0.0);
    for (std::size_t n : t.order) {
        if (t.parent_segment[n] < 0) continue;
        const auto s = static_cast<std::size_t>(t.parent_segment[n]);
        const double drop = beta * j[s] * g.segments()[s].length;  // sigma_a - sigma_b
        if (g.index_b(s) == n) rel[n] = rel[g.index_a(s)] - drop;
        else rel[n] = rel[g.index_b(s)] + drop;
    }
    return rel;
}

// Offset c such that rel + c has volume-weighted mean sigma_T.
double datum_offset(const InterconnectGraph& g, const std::vector<double>& rel, double sigma_T)
{
    return sigma_T - volume_weighted_mean(g, rel);
}

}  // namespace

double SteadyStressProfile::stress_along(const InterconnectGraph& g, std::size_t s, double x) const
{
    return node_stress[g.index_a(s)] + segment_slope[s] * x * g.segments()[s].length;
}

double volume_weighted_mean(const InterconnectGraph& g, const std::vector<double>& node_stress)
{
    double num = 0.0;
    double vol = 0.0;
    for (std::size_t s = 0; s < g.segment_count(); ++s) {
        const auto& seg = g.segments()[s];
        const double v = seg.area() * seg.length;
        num += v * 0.5 * (node_stress[g.index_a(s)] + node_stress[g.index_b(s)]);
        vol += v;
    }
    return num / vol;
}

SteadyStressProfile steady_state(const InterconnectGraph& g, const DcSolution& dc, const MaterialParams& p)
{
    return steady_state(g, dc, p, spanning_tree(g));
}

SteadyStressProfile steady_state(const InterconnectGraph& g, const DcSolution& dc, const MaterialParams& p,
                                 const SpanningTree& tree)
{
    const double beta = derived_params(p).beta;
    SteadyStressProfile prof;
    prof.node_stress = relative_stress(g, tree, beta, dc.segment_densities);
    const double c = datum_offset(g, prof.node_stress, p.sigma_T);
    for (double& s : prof.node_stress) s += c;

    prof.segment_slope.resize(g.segment_count());
    for (std::size_t s = 0; s < g.segment_count(); ++s) prof.segment_slope[s] = -beta * dc.segment_densities[s];

    std::size_t imax = 0, imin = 0;
    for (std::size_t n = 1; n < g.node_count(); ++n) {
        if (prof.node_stress[n] > prof.node_stress[imax]) imax = n;
        if (prof.node_stress[n] < prof.node_stress[imin]) imin = n;
    }
    prof.max_tensile = {g.nodes()[imax].id, prof.node_stress[imax]};
    prof.min_compressive = {g.nodes()[imin].id, prof.node_stress[imin]};
    return prof;
}

ImmortalityResult immortality_check(const SteadyStressProfile& profile, const MaterialParams& p)
{
    ImmortalityResult r;
    r.worst_node = profile.max_tensile.node;
    r.max_tensile = profile.max_tensile.value;
    r.margin = p.sigma_crit - r.max_tensile;
    r.immortal = within_limit(r.max_tensile, p.sigma_crit);
    return r;
}

double critical_jl(const MaterialParams& p) { return 2.0 * p.sigma_crit / derived_params(p).beta; }

bool blech_check(double jL, const MaterialParams& p)
{
    if (!(jL >= 0.0)) throw InputError("blech_check: jL must be >= 0");
    return within_limit(jL, critical_jl(p));
}

WorstCaseBounds worst_case_bounds(const InterconnectGraph& g, const std::vector<DensityRange>& ranges,
                                  const MaterialParams& p)
{
    if (ranges.size() != g.segment_count()) throw InputError("worst_case_bounds: one range per segment required");
    for (const auto& r : ranges)
        if (!(r.lo <= r.hi)) throw InputError("worst_case_bounds: range with lo > hi");

    const double beta = derived_params(p).beta;
    const std::size_t n_nodes = g.node_count();
    const std::size_t n_segs = g.segment_count();
    constexpr double inf = std::numeric_limits<double>::infinity();

    // Arc 2s traverses segment s a -> b, arc 2s+1 traverses b -> a.
    // Over a -> b, sigma_b - sigma_a = -beta j L  with j in [lo, hi].
    auto head = [&](std::size_t arc) { return arc % 2 == 0 ? g.index_b(arc / 2) : g.index_a(arc / 2); };
    auto weight = [&](std::size_t arc, bool upper) {
        const std::size_t s = arc / 2;
        const double L = g.segments()[s].length;
        const auto& r = ranges[s];
        if (arc % 2 == 0) return upper ? -beta * r.lo * L : -beta * r.hi * L;
        return upper ? beta * r.hi * L : beta * r.lo * L;
    };

    auto walk_extreme = [&](bool upper) {
        const double sign = upper ? 1.0 : -1.0;  // maximise sign * path sum
        std::vector<double> best(2 * n_segs, -inf);
        for (std::size_t s : g.incident(0)) {
            const std::size_t arc = g.index_a(s) == 0 ? 2 * s : 2 * s + 1;
            best[arc] = sign * weight(arc, upper);
        }
        for (std::size_t round = 1; round + 1 < n_nodes; ++round) {
            bool changed = false;
            std::vector<double> next = best;
            for (std::size_t arc = 0; arc < 2 * n_segs; ++arc) {
                if (best[arc] == -inf) continue;
                const std::size_t v = head(arc);
                for (std::size_t s2 : g.incident(v)) {
                    if (s2 == arc / 2) continue;
                    const std::size_t arc2 = g.index_a(s2) == v ? 2 * s2 : 2 * s2 + 1;
                    const double cand = best[arc] + sign * weight(arc2, upper);
                    if (cand > next[arc2]) {
                        next[arc2] = cand;
                        changed = true;
                    }
                }
            }
            best.swap(next);
            if (!changed) break;
        }
        std::vector<double> node(n_nodes, -inf);
        node[0] = 0.0;
        for (std::size_t arc = 0; arc < 2 * n_segs; ++arc) {
            const std::size_t v = head(arc);
            if (v != 0) node[v] = std::max(node[v], best[arc]);
        }
        for (double& x : node) x *= sign;
        return node;
    };

    WorstCaseBounds out;
    out.relative_upper = walk_extreme(true);
    out.relative_lower = walk_extreme(false);
    const double offset_bound = p.sigma_T - volume_weighted_mean(g, out.relative_lower);
    out.upper.resize(n_nodes);
    for (std::size_t n = 0; n < n_nodes; ++n) out.upper[n] = out.relative_upper[n] + offset_bound;

    bool degenerate = true;
    for (const auto& r : ranges) degenerate = degenerate && r.lo == r.hi;
    out.conservative = !degenerate || n_segs + 1 != n_nodes;
    return out;
}

WorstCaseBounds worst_case_bounds(const InterconnectGraph& g, const std::vector<double>& jmax_magnitudes,
                                  const MaterialParams& p)
{
    std::vector<DensityRange> ranges;
    ranges.reserve(jmax_magnitudes.size());
    for (double m : jmax_magnitudes) ranges.push_back({-std::abs(m), std::abs(m)});
    return worst_case_bounds(g, ranges, p);
}

std::vector<PdnConstraint> emit_pdn_constraints(const InterconnectGraph& g, const MaterialParams& p)
{
    const double beta = derived_params(p).beta;
    const std::size_t n_nodes = g.node_count();
    const std::size_t n_segs = g.segment_count();
    const SpanningTree t = spanning_tree(g);

    // path[n][i]: d(sigma_n - sigma_datum)/d j_i along the tree.
    std::vector<std::vector<double>> path(n_nodes, std::vector<double>(n_segs, 0.0));
    for (std::size_t n : t.order) {
        if (t.parent_segment[n] < 0) continue;
        const auto s = static_cast<std::size_t>(t.parent_segment[n]);
        const double bl = beta * g.segments()[s].length;
        const bool child_is_b = g.index_b(s) == n;
        const std::size_t parent = child_is_b ? g.index_a(s) : g.index_b(s);
        path[n] = path[parent];
        path[n][s] += child_is_b ? -bl : bl;
    }

    std::vector<double> mean(n_segs, 0.0);
    const double vol = g.total_volume();
    for (std::size_t k = 0; k < n_segs; ++k) {
        const auto& seg = g.segments()[k];
        const double w = 0.5 * seg.area() * seg.length / vol;
        const auto& pa = path[g.index_a(k)];
        const auto& pb = path[g.index_b(k)];
        for (std::size_t i = 0; i < n_segs; ++i) mean[i] += w * (pa[i] + pb[i]);
    }

    std::vector<PdnConstraint> cons;
    cons.reserve(n_nodes);
    for (std::size_t n = 0; n < n_nodes; ++n) {
        PdnConstraint c;
        c.node = g.nodes()[n].id;
        c.coeff.resize(n_segs);
        for (std::size_t i = 0; i < n_segs; ++i) c.coeff[i] = path[n][i] - mean[i];
        c.rhs = p.sigma_crit - p.sigma_T;
        cons.push_back(std::move(c));
    }
    return cons;
}

bool satisfies(const std::vector<PdnConstraint>& cons, const std::vector<double>& j)
{
    for (const auto& c : cons) {
        if (c.coeff.size() != j.size()) throw InputError("satisfies: density vector size mismatch");
        double lhs = 0.0;
        for (std::size_t i = 0; i < j.size(); ++i) lhs += c.coeff[i] * j[i];
        if (!within_limit(lhs, c.rhs)) return false;
    }
    return true;
}

std::string format_lp(const InterconnectGraph& g, const std::vector<PdnConstraint>& cons)
{
    std::ostringstream os;
    os << "\\ steady-state EM stress constraints, variables j_<segment> in A/m^2 (electron current a->b)\n";
    os << "Minimize\n obj: 0 j_" << g.segments().front().id << "\n";
    os << "Subject To\n";
    for (const auto& c : cons) {
        os << " node_" << c.node << ":";
        bool any = false;
        for (std::size_t i = 0; i < c.coeff.size(); ++i) {
            if (c.coeff[i] == 0.0) continue;
            os << (c.coeff[i] < 0 ? " - " : " + ") << fmt_double(std::abs(c.coeff[i])) << " j_"
               << g.segments()[i].id;
            any = true;
        }
        if (!any) os << " 0 j_" << g.segments().front().id;
        os << " <= " << fmt_double(c.rhs) << "\n";
    }
    os << "Bounds\n";
    for (const auto& s : g.segments()) os << " j_" << s.id << " free\n";
    os << "End\n";
    return os.str();
}

}  // namespace emtk
