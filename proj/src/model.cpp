#include "emtk/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace emtk {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void MaterialParams::validate() const
{
    if (!positive_finite(temperature)) throw InputError("material: temperature must be > 0");
    if (!positive_finite(D0)) throw InputError("material: D0 must be > 0");
    if (!positive_finite(omega)) throw InputError("material: omega must be > 0");
    if (!positive_finite(rho_el)) throw InputError("material: rho_el must be > 0");
    if (!positive_finite(bulk_modulus)) throw InputError("material: bulk_modulus must be > 0");
    if (!positive_finite(std::abs(Z_eff))) throw InputError("material: Z_eff must be nonzero");
    if (!positive_finite(std::abs(e_charge))) throw InputError("material: e_charge must be nonzero");
    if (!(recovery_r >= 0.0 && recovery_r <= 1.0)) throw InputError("material: recovery_r must lie in [0, 1]");
    if (!(var_Ea >= 0.0)) throw InputError("material: var_Ea must be >= 0");
    if (!std::isfinite(Ea)) throw InputError("material: Ea must be finite");
    if (!(delta_void >= 0.0)) throw InputError("material: delta_void must be >= 0");
    if (!(sigma_ln >= 0.0)) throw InputError("material: sigma_ln must be >= 0");
}

DerivedParams derived_params(const MaterialParams& p)
{
    DerivedParams d;
    d.beta = std::abs(p.Z_eff * p.e_charge) * p.rho_el / p.omega;
    d.D_a = p.D0 * std::exp(-p.Ea_joule() / p.kT());
    d.kappa = d.D_a * p.bulk_modulus * p.omega / p.kT();
    return d;
}

double kappa_for_activation(const MaterialParams& p, double Ea_ev)
{
    const double kT = p.kT();
    const double D_a = p.D0 * std::exp(-Ea_ev * constants::ev_to_joule / kT);
    return D_a * p.bulk_modulus * p.omega / kT;
}

void CurrentWaveform::validate() const
{
    if (!positive_finite(period)) throw InputError("waveform: period must be > 0");
    if (intervals.empty()) throw InputError("waveform: no intervals");
    double total = 0.0;
    for (const auto& iv : intervals) {
        if (!positive_finite(iv.duration)) throw InputError("waveform: interval durations must be > 0");
        if (!std::isfinite(iv.density)) throw InputError("waveform: non-finite density");
        total += iv.duration;
    }
    if (std::abs(total - period) > 1e-9 * period)
        throw InputError("waveform: interval durations do not sum to the period");
}

InterconnectGraph::InterconnectGraph(std::vector<Node> nodes, std::vector<Segment> segments)
    : nodes_(std::move(nodes)), segments_(std::move(segments))
{
    std::sort(nodes_.begin(), nodes_.end(), [](const Node& l, const Node& r) { return l.id < r.id; });
    std::sort(segments_.begin(), segments_.end(),
              [](const Segment& l, const Segment& r) { return l.id < r.id; });
    build_index();
}

void InterconnectGraph::build_index()
{
    node_lookup_.clear();
    segment_lookup_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!node_lookup_.emplace(nodes_[i].id, i).second)
            throw InputError("duplicate node id " + std::to_string(nodes_[i].id));
    }
    seg_a_.assign(segments_.size(), 0);
    seg_b_.assign(segments_.size(), 0);
    incident_.assign(nodes_.size(), {});
    for (std::size_t s = 0; s < segments_.size(); ++s) {
        const auto& seg = segments_[s];
        if (!segment_lookup_.emplace(seg.id, s).second)
            throw InputError("duplicate segment id " + std::to_string(seg.id));
        auto ia = node_lookup_.find(seg.node_a);
        auto ib = node_lookup_.find(seg.node_b);
        if (ia == node_lookup_.end() || ib == node_lookup_.end())
            throw InputError("segment " + std::to_string(seg.id) + " references an unknown node");
        if (ia->second == ib->second)
            throw InputError("segment " + std::to_string(seg.id) + " is a self-loop");
        seg_a_[s] = ia->second;
        seg_b_[s] = ib->second;
        incident_[ia->second].push_back(s);
        incident_[ib->second].push_back(s);
    }
}

std::size_t InterconnectGraph::node_index(NodeId id) const
{
    auto it = node_lookup_.find(id);
    if (it == node_lookup_.end()) throw InputError("unknown node id " + std::to_string(id));
    return it->second;
}

std::size_t InterconnectGraph::segment_index(SegmentId id) const
{
    auto it = segment_lookup_.find(id);
    if (it == segment_lookup_.end()) throw InputError("unknown segment id " + std::to_string(id));
    return it->second;
}

bool InterconnectGraph::has_prescribed_densities() const
{
    return std::any_of(segments_.begin(), segments_.end(),
                       [](const Segment& s) { return s.prescribed_j.has_value(); });
}

double InterconnectGraph::total_volume() const
{
    return std::accumulate(segments_.begin(), segments_.end(), 0.0,
                           [](double acc, const Segment& s) { return acc + s.area() * s.length; });
}

double InterconnectGraph::max_length() const
{
    double m = 0.0;
    for (const auto& s : segments_) m = std::max(m, s.length);
    return m;
}

double InterconnectGraph::min_length() const
{
    double m = segments_.empty() ? 0.0 : segments_.front().length;
    for (const auto& s : segments_) m = std::min(m, s.length);
    return m;
}

void InterconnectGraph::validate() const
{
    if (nodes_.empty()) throw InputError("graph has no nodes");
    if (segments_.empty()) throw InputError("graph has no segments");
    for (const auto& s : segments_) {
        if (!positive_finite(s.length) || !positive_finite(s.width) || !positive_finite(s.thickness))
            throw InputError("segment " + std::to_string(s.id) + " has non-positive geometry");
        if (s.prescribed_j && !std::isfinite(*s.prescribed_j))
            throw InputError("segment " + std::to_string(s.id) + " has a non-finite density");
    }

    std::vector<bool> seen(nodes_.size(), false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const std::size_t n = stack.back();
        stack.pop_back();
        for (std::size_t s : incident_[n]) {
            const std::size_t m = seg_a_[s] == n ? seg_b_[s] : seg_a_[s];
            if (!seen[m]) {
                seen[m] = true;
                ++reached;
                stack.push_back(m);
            }
        }
    }
    if (reached != nodes_.size()) throw InputError("graph is disconnected");

    double sum = 0.0;
    double largest = 0.0;
    for (const auto& n : nodes_) {
        if (!std::isfinite(n.injected_current))
            throw InputError("node " + std::to_string(n.id) + " has a non-finite injection");
        sum += n.injected_current;
        largest = std::max(largest, std::abs(n.injected_current));
    }
    if (std::abs(sum) > 1e-9 * largest)
        throw InputError("KCL imbalance: terminal injections sum to " + std::to_string(sum) + " A");
}

InterconnectGraph InterconnectGraph::with_densities(const std::vector<double>& j) const
{
    if (j.size() != segments_.size()) throw InputError("density vector size does not match segment count");
    InterconnectGraph g = *this;
    for (std::size_t s = 0; s < segments_.size(); ++s) g.segments_[s].prescribed_j = j[s];
    return g;
}

}  // namespace emtk
