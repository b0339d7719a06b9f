#include "emtk/netlist.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace emtk {

using nlohmann::json;

namespace {

// exponent of ten; x * 10^p
double apply_pow10(double x, int p)
{
    if (p >= 0) return x * std::pow(10.0, p);
    return x / std::pow(10.0, -p);
}

double get_number(const json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end()) throw InputError(where + ": missing field \"" + key + "\"");
    if (!it->is_number()) throw InputError(where + ": field \"" + key + "\" must be a number");
    return it->get<double>();
}

double get_number_or(const json& obj, const char* key, double fallback, const std::string& where)
{
    if (!obj.contains(key)) return fallback;
    return get_number(obj, key, where);
}

std::uint64_t get_id(const json& obj, const char* key, const std::string& where)
{
    auto it = obj.find(key);
    if (it == obj.end()) throw InputError(where + ": missing field \"" + key + "\"");
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0))
        throw InputError(where + ": field \"" + key + "\" must be a non-negative integer");
    return it->get<std::uint64_t>();
}

struct Units {
    std::string length = "m";
    std::string current = "A";
    std::string density = "A/m2";
};

}  // namespace

double length_to_si(double value, std::string_view unit)
{
    if (unit == "m") return value;
    if (unit == "mm") return apply_pow10(value, -3);
    if (unit == "um") return apply_pow10(value, -6);
    if (unit == "nm") return apply_pow10(value, -9);
    throw InputError("unknown length unit \"" + std::string(unit) + "\"");
}

double current_to_si(double value, std::string_view unit)
{
    if (unit == "A") return value;
    if (unit == "mA") return apply_pow10(value, -3);
    if (unit == "uA") return apply_pow10(value, -6);
    if (unit == "nA") return apply_pow10(value, -9);
    throw InputError("unknown current unit \"" + std::string(unit) + "\"");
}

double density_to_si(double value, std::string_view unit)
{
    if (unit == "A/m2") return value;
    if (unit == "A/cm2") return apply_pow10(value, 4);
    if (unit == "MA/cm2") return apply_pow10(value, 10);
    throw InputError("unknown current density unit \"" + std::string(unit) + "\"");
}

Netlist parse_netlist(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("netlist is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InputError("netlist: top level must be an object");
    for (const auto& [key, _] : doc.items()) {
        if (key != "material" && key != "nodes" && key != "segments" && key != "waveforms" && key != "units")
            throw InputError("netlist: unknown top-level key \"" + key + "\"");
    }
    for (const char* key : {"material", "nodes", "segments"})
        if (!doc.contains(key)) throw InputError(std::string("netlist: missing \"") + key + "\"");

    Units units;
    if (doc.contains("units")) {
        const auto& u = doc["units"];
        if (!u.is_object()) throw InputError("units: must be an object");
        for (const auto& [key, val] : u.items()) {
            if (!val.is_string()) throw InputError("units: \"" + key + "\" must be a string");
            if (key == "length") units.length = val.get<std::string>();
            else if (key == "current") units.current = val.get<std::string>();
            else if (key == "current_density") units.density = val.get<std::string>();
            else throw InputError("units: unknown key \"" + key + "\"");
        }
    }

    Netlist net;
    const auto& m = doc["material"];
    if (!m.is_object()) throw InputError("material: must be an object");
    auto& p = net.material;
    const std::string mw = "material";
    p.Z_eff = get_number(m, "Z_eff", mw);
    p.e_charge = get_number_or(m, "e_charge", constants::electron_charge, mw);
    p.rho_el = get_number(m, "rho_el", mw);
    p.omega = get_number(m, "omega", mw);
    p.bulk_modulus = get_number(m, "bulk_modulus", mw);
    p.D0 = get_number(m, "D0", mw);
    p.Ea = get_number(m, "Ea", mw);
    p.var_Ea = get_number_or(m, "var_Ea", 0.0, mw);
    p.temperature = get_number(m, "temperature", mw);
    p.sigma_crit = get_number(m, "sigma_crit", mw);
    p.sigma_T = get_number_or(m, "sigma_T", 0.0, mw);
    p.delta_void = length_to_si(get_number_or(m, "delta_void", 0.0, mw), units.length);
    p.recovery_r = get_number_or(m, "recovery_r", 0.0, mw);
    p.black_A = get_number_or(m, "black_A", 0.0, mw);
    p.black_n = get_number_or(m, "black_n", 2.0, mw);
    p.sigma_ln = get_number_or(m, "sigma_ln", 0.0, mw);
    p.validate();

    if (!doc["nodes"].is_array()) throw InputError("nodes: must be an array");
    std::vector<Node> nodes;
    for (const auto& n : doc["nodes"]) {
        if (!n.is_object()) throw InputError("nodes: entries must be objects");
        Node node;
        node.id = get_id(n, "id", "node");
        const std::string where = "node " + std::to_string(node.id);
        if (n.contains("terminal")) {
            if (!n["terminal"].is_boolean()) throw InputError(where + ": \"terminal\" must be a boolean");
            node.is_terminal = n["terminal"].get<bool>();
        }
        node.injected_current = current_to_si(get_number_or(n, "current", 0.0, where), units.current);
        if (node.injected_current != 0.0 && !node.is_terminal)
            throw InputError(where + ": only terminals may inject current");
        nodes.push_back(node);
    }

    if (!doc["segments"].is_array()) throw InputError("segments: must be an array");
    std::vector<Segment> segments;
    for (const auto& s : doc["segments"]) {
        if (!s.is_object()) throw InputError("segments: entries must be objects");
        Segment seg;
        seg.id = get_id(s, "id", "segment");
        const std::string where = "segment " + std::to_string(seg.id);
        seg.node_a = get_id(s, "a", where);
        seg.node_b = get_id(s, "b", where);
        seg.length = length_to_si(get_number(s, "length", where), units.length);
        seg.width = length_to_si(get_number(s, "width", where), units.length);
        seg.thickness = length_to_si(get_number(s, "thickness", where), units.length);
        if (s.contains("layer")) {
            if (!s["layer"].is_string()) throw InputError(where + ": \"layer\" must be a string");
            seg.layer = s["layer"].get<std::string>();
        }
        if (s.contains("j")) seg.prescribed_j = density_to_si(get_number(s, "j", where), units.density);
        segments.push_back(seg);
    }

    net.graph = InterconnectGraph(std::move(nodes), std::move(segments));
    net.graph.validate();

    if (doc.contains("waveforms")) {
        if (!doc["waveforms"].is_array()) throw InputError("waveforms: must be an array");
        for (const auto& w : doc["waveforms"]) {
            SegmentWaveform sw;
            sw.segment = get_id(w, "segment", "waveform");
            const std::string where = "waveform for segment " + std::to_string(sw.segment);
            net.graph.segment_index(sw.segment);
            sw.waveform.period = get_number(w, "period", where);
            if (!w.contains("intervals") || !w["intervals"].is_array())
                throw InputError(where + ": \"intervals\" must be an array");
            for (const auto& iv : w["intervals"]) {
                WaveInterval wi;
                wi.duration = get_number(iv, "duration", where);
                wi.density = density_to_si(get_number(iv, "density", where), units.density);
                sw.waveform.intervals.push_back(wi);
            }
            sw.waveform.validate();
            net.waveforms.push_back(std::move(sw));
        }
    }
    return net;
}

Netlist load_netlist(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open netlist file \"" + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_netlist(ss.str());
}

std::string serialize_netlist(const Netlist& net)
{
    const auto& p = net.material;
    json doc;
    doc["material"] = {
        {"Z_eff", p.Z_eff},
        {"e_charge", p.e_charge},
        {"rho_el", p.rho_el},
        {"omega", p.omega},
        {"bulk_modulus", p.bulk_modulus},
        {"D0", p.D0},
        {"Ea", p.Ea},
        {"var_Ea", p.var_Ea},
        {"temperature", p.temperature},
        {"sigma_crit", p.sigma_crit},
        {"sigma_T", p.sigma_T},
        {"delta_void", p.delta_void},
        {"recovery_r", p.recovery_r},
        {"black_A", p.black_A},
        {"black_n", p.black_n},
        {"sigma_ln", p.sigma_ln},
    };
    json nodes = json::array();
    for (const auto& n : net.graph.nodes())
        nodes.push_back({{"id", n.id}, {"terminal", n.is_terminal}, {"current", n.injected_current}});
    doc["nodes"] = std::move(nodes);
    json segs = json::array();
    for (const auto& s : net.graph.segments()) {
        json js = {{"id", s.id},         {"a", s.node_a},         {"b", s.node_b},
                   {"length", s.length}, {"width", s.width},      {"thickness", s.thickness},
                   {"layer", s.layer}};
        if (s.prescribed_j) js["j"] = *s.prescribed_j;
        segs.push_back(std::move(js));
    }
    doc["segments"] = std::move(segs);
    if (!net.waveforms.empty()) {
        json ws = json::array();
        for (const auto& w : net.waveforms) {
            json iv = json::array();
            for (const auto& i : w.waveform.intervals) iv.push_back({{"duration", i.duration}, {"density", i.density}});
            ws.push_back({{"segment", w.segment}, {"period", w.waveform.period}, {"intervals", std::move(iv)}});
        }
        doc["waveforms"] = std::move(ws);
    }
    return doc.dump(2) + "\n";
}

}  // namespace emtk
