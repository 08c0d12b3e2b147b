// SPDX-License-Identifier: Apache-2.0
//
// qmimo: multicell massive MIMO with variable-resolution ADCs
// Copyright (C) 2026 The qmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "qmimo/experiment.hpp"

#include "qmimo/se_asymptotic.hpp"
#include "qmimo/se_montecarlo.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#ifndef QMIMO_GIT_DESCRIBE
#define QMIMO_GIT_DESCRIBE "unknown"
#endif

namespace qmimo {

using nlohmann::json;

// ---------------------------------------------------------------- bits

BitsSpec BitsSpec::uniform_bits(int b) {
    BitsSpec s;
    s.kind = Kind::uniform;
    s.value = b;
    return s;
}

std::string bits_to_string(int bits) { return bits == kInfiniteBits ? "inf" : std::to_string(bits); }

std::string BitsSpec::label() const {
    switch (kind) {
    case Kind::uniform: return bits_to_string(value);
    case Kind::per_bs: {
        std::string out;
        for (std::size_t j = 0; j < per_bs.size(); ++j) out += (j ? "|" : "") + bits_to_string(per_bs[j]);
        return out;
    }
    case Kind::matrix: return "matrix";
    }
    return "?";
}

bool BitsSpec::valid() const {
    auto ok = [](int b) { return b >= 1; };
    switch (kind) {
    case Kind::uniform: return ok(value);
    case Kind::per_bs: return !per_bs.empty() && std::all_of(per_bs.begin(), per_bs.end(), ok);
    case Kind::matrix:
        return !matrix.empty() &&
               std::all_of(matrix.begin(), matrix.end(), [&](const auto& row) {
                   return !row.empty() && std::all_of(row.begin(), row.end(), ok);
               });
    }
    return false;
}

BitAllocation BitsSpec::allocate(int cells, int antennas) const {
    if (!valid()) throw ConfigError("ADC bits must be >= 1 (got " + label() + ")");
    switch (kind) {
    case Kind::uniform: return BitAllocation::uniform(cells, antennas, value);
    case Kind::per_bs:
        if (static_cast<int>(per_bs.size()) != cells)
            throw ConfigError("per-BS bits list has " + std::to_string(per_bs.size()) + " entries for " +
                              std::to_string(cells) + " cells");
        return BitAllocation::per_bs(per_bs, antennas);
    case Kind::matrix: {
        if (static_cast<int>(matrix.size()) != cells) throw ConfigError("bits matrix needs one row per cell");
        Eigen::ArrayXXi b(cells, antennas);
        for (int j = 0; j < cells; ++j) {
            if (static_cast<int>(matrix[j].size()) != antennas)
                throw ConfigError("bits matrix row " + std::to_string(j) + " needs one entry per antenna");
            for (int m = 0; m < antennas; ++m) b(j, m) = matrix[j][m];
        }
        return BitAllocation(std::move(b));
    }
    }
    throw ConfigError("invalid bits specification");
}

// ---------------------------------------------------------------- enums

std::string to_string(Preset p) {
    switch (p) {
    case Preset::se_vs_power: return "se_vs_power";
    case Preset::nmse_vs_power: return "nmse_vs_power";
    case Preset::se_vs_asd: return "se_vs_asd";
    case Preset::nmse_vs_asd: return "nmse_vs_asd";
    case Preset::ee_vs_bits: return "ee_vs_bits";
    case Preset::custom: return "custom";
    }
    return "?";
}

Preset parse_preset(const std::string& name) {
    for (Preset p : {Preset::se_vs_power, Preset::nmse_vs_power, Preset::se_vs_asd, Preset::nmse_vs_asd,
                     Preset::ee_vs_bits, Preset::custom})
        if (to_string(p) == name) return p;
    throw ConfigError("unknown preset '" + name + "'");
}

namespace {

const char* to_cstr(EstimatorMode m) {
    switch (m) {
    case EstimatorMode::aware: return "aware";
    case EstimatorMode::unaware: return "unaware";
    case EstimatorMode::both: return "both";
    }
    return "?";
}

const char* to_cstr(Evaluators e) {
    switch (e) {
    case Evaluators::mc: return "mc";
    case Evaluators::asy: return "asy";
    case Evaluators::both: return "both";
    }
    return "?";
}

bool wants_mc(Evaluators e) { return e != Evaluators::asy; }
bool wants_asy(Evaluators e) { return e != Evaluators::mc; }

// ---------------------------------------------------------------- parsing

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

int parse_bit_value(const json& v) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "infinite" || s == "ideal") return kInfiniteBits;
        throw ConfigError("bits must be an integer or \"inf\", got \"" + s + "\"");
    }
    if (v.is_number_integer()) return v.get<int>();
    throw ConfigError("bits must be an integer or \"inf\"");
}

BitsSpec parse_bits(const json& v) {
    if (!v.is_array()) return BitsSpec::uniform_bits(parse_bit_value(v));
    BitsSpec s;
    if (!v.empty() && v.front().is_array()) {
        s.kind = BitsSpec::Kind::matrix;
        for (const json& row : v) {
            if (!row.is_array()) throw ConfigError("bits matrix rows must be arrays");
            std::vector<int> r;
            for (const json& x : row) r.push_back(parse_bit_value(x));
            s.matrix.push_back(std::move(r));
        }
    } else {
        s.kind = BitsSpec::Kind::per_bs;
        for (const json& x : v) s.per_bs.push_back(parse_bit_value(x));
    }
    return s;
}

json bits_to_json(const BitsSpec& b) {
    auto one = [](int x) { return x == kInfiniteBits ? json("inf") : json(x); };
    switch (b.kind) {
    case BitsSpec::Kind::uniform: return one(b.value);
    case BitsSpec::Kind::per_bs: {
        json a = json::array();
        for (int x : b.per_bs) a.push_back(one(x));
        return a;
    }
    case BitsSpec::Kind::matrix: {
        json a = json::array();
        for (const auto& row : b.matrix) {
            json r = json::array();
            for (int x : row) r.push_back(one(x));
            a.push_back(r);
        }
        return a;
    }
    }
    return json();
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

void apply_preset_defaults(ExperimentSpec& s) {
    using B = BitsSpec;
    const std::vector<BitsSpec> three{B::uniform_bits(1), B::uniform_bits(3), B::uniform_bits(kInfiniteBits)};
    switch (s.preset) {
    case Preset::se_vs_power:
        s.axis = "power_dbm";
        s.values = {-10, 0, 10, 20, 30};
        s.bits = three;
        s.schemes = {Scheme::mrc, Scheme::qa_m_mmse, Scheme::qa_s_mmse};
        s.evaluators = Evaluators::both;
        break;
    case Preset::se_vs_asd:
        s.axis = "asd_deg";
        s.values = {2, 5, 10, 20, 30};
        s.bits = three;
        s.schemes = {Scheme::qa_m_mmse, Scheme::qa_s_mmse, Scheme::u_m_mmse, Scheme::u_s_mmse};
        s.evaluators = Evaluators::both;
        break;
    case Preset::nmse_vs_power:
        s.axis = "power_dbm";
        s.values = {0, 10, 20, 30, 40};
        s.bits = {B::uniform_bits(1), B::uniform_bits(2), B::uniform_bits(3), B::uniform_bits(kInfiniteBits)};
        s.estimator = EstimatorMode::both;
        break;
    case Preset::nmse_vs_asd:
        s.axis = "asd_deg";
        s.values = {2, 5, 10, 20, 30};
        s.bits = three;
        s.estimator = EstimatorMode::both;
        break;
    case Preset::ee_vs_bits:
        s.axis = "bits";
        s.values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        s.schemes = {Scheme::mrc, Scheme::qa_m_mmse, Scheme::qa_s_mmse};
        s.evaluators = Evaluators::asy;
        break;
    case Preset::custom: break;
    }
}

}  // namespace

void refresh_canonical(ExperimentSpec& s) {
    const NetworkConfig& n = s.network;
    json net = {{"cells", n.cells},
                {"users", n.users},
                {"antennas", n.antennas},
                {"reuse", n.reuse},
                {"tau_c", n.tau_c},
                {"cell_side_km", n.cell_side_km},
                {"bandwidth_hz", n.bandwidth_hz},
                {"noise_power_dbm", n.noise_power_dbm},
                {"asd_deg", n.asd_deg},
                {"tx_power_dbm", n.tx_power_dbm},
                {"user_power_dbm", n.user_power_dbm},
                {"min_distance_km", n.min_distance_km},
                {"quadrature_order", n.quadrature_order}};
    json bits = json::array();
    for (const BitsSpec& b : s.bits) bits.push_back(bits_to_json(b));
    json schemes = json::array();
    for (Scheme x : s.schemes) schemes.push_back(to_string(x));
    const PowerModel& p = s.power;
    json c = {{"preset", to_string(s.preset)},
              {"seed", n.rng_seed},
              {"network", net},
              {"experiment",
               {{"sweep", {{"axis", s.axis}, {"values", s.values}}},
                {"bits", bits},
                {"schemes", schemes},
                {"estimator", to_cstr(s.estimator)},
                {"evaluators", to_cstr(s.evaluators)},
                {"trials", s.trials},
                {"drops", s.drops},
                {"pilot_noise", s.pilot_noise == PilotNoiseModel::exact ? "exact" : "averaged"}}},
              {"power_model",
               {{"p_mix", p.p_mix},
                {"p_filt", p.p_filt},
                {"p_filr", p.p_filr},
                {"p_lna", p.p_lna},
                {"p_ifa", p.p_ifa},
                {"p_syn", p.p_syn},
                {"p_agc", p.p_agc},
                {"v_dd", p.v_dd},
                {"l_min", p.l_min},
                {"f_cor", p.f_cor}}}};
    s.canonical = c.dump();
}

ExperimentSpec parse_spec(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(root, {"preset", "seed", "network", "quantization", "experiment", "power_model", "output"}, "config");

    ExperimentSpec s;
    std::string preset = "custom";
    read(root, "preset", preset);
    s.preset = parse_preset(preset);
    apply_preset_defaults(s);
    read(root, "seed", s.network.rng_seed);

    if (root.contains("network")) {
        const json& n = root["network"];
        reject_unknown(n,
                       {"cells", "users", "antennas", "reuse", "tau_c", "cell_side_km", "bandwidth_hz",
                        "noise_power_dbm", "asd_deg", "tx_power_dbm", "user_power_dbm", "min_distance_km",
                        "quadrature_order"},
                       "network");
        NetworkConfig& c = s.network;
        read(n, "cells", c.cells);
        read(n, "users", c.users);
        read(n, "antennas", c.antennas);
        read(n, "reuse", c.reuse);
        read(n, "tau_c", c.tau_c);
        read(n, "cell_side_km", c.cell_side_km);
        read(n, "bandwidth_hz", c.bandwidth_hz);
        read(n, "noise_power_dbm", c.noise_power_dbm);
        read(n, "asd_deg", c.asd_deg);
        read(n, "tx_power_dbm", c.tx_power_dbm);
        read(n, "user_power_dbm", c.user_power_dbm);
        read(n, "min_distance_km", c.min_distance_km);
        read(n, "quadrature_order", c.quadrature_order);
    }
    if (root.contains("quantization")) {
        const json& q = root["quantization"];
        reject_unknown(q, {"bits"}, "quantization");
        if (q.contains("bits")) s.bits = {parse_bits(q["bits"])};
    }
    if (root.contains("experiment")) {
        const json& e = root["experiment"];
        reject_unknown(e,
                       {"sweep", "bits", "schemes", "estimator", "evaluators", "trials", "drops", "threads",
                        "pilot_noise", "verbose"},
                       "experiment");
        if (e.contains("sweep")) {
            reject_unknown(e["sweep"], {"axis", "values"}, "experiment.sweep");
            read(e["sweep"], "axis", s.axis);
            read(e["sweep"], "values", s.values);
        }
        if (e.contains("bits")) {
            if (!e["bits"].is_array()) throw ConfigError("experiment.bits must be a list of bit settings");
            s.bits.clear();
            for (const json& b : e["bits"]) s.bits.push_back(parse_bits(b));
        }
        if (e.contains("schemes")) {
            std::vector<std::string> names;
            read(e, "schemes", names);
            s.schemes.clear();
            for (const std::string& n : names) s.schemes.push_back(parse_scheme(n));
        }
        if (e.contains("estimator")) {
            std::string m;
            read(e, "estimator", m);
            if (m == "aware") s.estimator = EstimatorMode::aware;
            else if (m == "unaware") s.estimator = EstimatorMode::unaware;
            else if (m == "both") s.estimator = EstimatorMode::both;
            else throw ConfigError("estimator must be aware, unaware or both");
        }
        if (e.contains("evaluators")) {
            std::string m;
            read(e, "evaluators", m);
            if (m == "mc") s.evaluators = Evaluators::mc;
            else if (m == "asy") s.evaluators = Evaluators::asy;
            else if (m == "both") s.evaluators = Evaluators::both;
            else throw ConfigError("evaluators must be mc, asy or both");
        }
        if (e.contains("pilot_noise")) {
            std::string m;
            read(e, "pilot_noise", m);
            if (m == "exact") s.pilot_noise = PilotNoiseModel::exact;
            else if (m == "averaged") s.pilot_noise = PilotNoiseModel::averaged;
            else throw ConfigError("pilot_noise must be exact or averaged");
        }
        read(e, "trials", s.trials);
        read(e, "drops", s.drops);
        read(e, "threads", s.threads);
        read(e, "verbose", s.verbose);
    }
    if (root.contains("power_model")) {
        const json& p = root["power_model"];
        reject_unknown(p, {"p_mix", "p_filt", "p_filr", "p_lna", "p_ifa", "p_syn", "p_agc", "v_dd", "l_min", "f_cor"},
                       "power_model");
        PowerModel& m = s.power;
        read(p, "p_mix", m.p_mix);
        read(p, "p_filt", m.p_filt);
        read(p, "p_filr", m.p_filr);
        read(p, "p_lna", m.p_lna);
        read(p, "p_ifa", m.p_ifa);
        read(p, "p_syn", m.p_syn);
        read(p, "p_agc", m.p_agc);
        read(p, "v_dd", m.v_dd);
        read(p, "l_min", m.l_min);
        read(p, "f_cor", m.f_cor);
    }
    if (root.contains("output")) {
        reject_unknown(root["output"], {"dir"}, "output");
        read(root["output"], "dir", s.out_dir);
    }
    s.power.bandwidth_hz = s.network.bandwidth_hz;
    refresh_canonical(s);
    return s;
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
}

void apply_paper_scale(ExperimentSpec& s) {
    s.network.cells = 9;
    s.network.users = 5;
    s.network.antennas = 30;
    s.trials = 100;
    s.drops = 100;
    refresh_canonical(s);
}

std::vector<std::string> validate(const ExperimentSpec& s) {
    std::vector<std::string> out = s.network.problems();
    const bool nmse = s.preset == Preset::nmse_vs_power || s.preset == Preset::nmse_vs_asd;
    static const std::set<std::string> axes{"power_dbm", "asd_deg", "bits", "antennas"};
    if (!axes.count(s.axis)) out.push_back("sweep axis must be one of power_dbm, asd_deg, bits, antennas");
    if (s.preset == Preset::ee_vs_bits && s.axis != "bits") out.push_back("ee_vs_bits sweeps the bits axis");
    if (nmse && (s.axis == "bits" || s.axis == "antennas"))
        out.push_back("NMSE presets sweep power_dbm or asd_deg");
    if (s.values.empty()) out.push_back("sweep values must not be empty");
    if (!std::is_sorted(s.values.begin(), s.values.end()) ||
        std::adjacent_find(s.values.begin(), s.values.end()) != s.values.end())
        out.push_back("sweep values must be strictly increasing");
    for (double v : s.values) {
        if (!std::isfinite(v)) out.push_back("sweep values must be finite");
        if ((s.axis == "bits" || s.axis == "antennas") && (v < 1.0 || v != std::floor(v)))
            out.push_back("sweep values on the " + s.axis + " axis must be integers >= 1");
        if (s.axis == "asd_deg" && v < 0.0) out.push_back("ASD must be nonnegative");
    }
    if (s.axis != "bits") {
        if (s.bits.empty()) out.push_back("at least one bits setting is required");
        for (const BitsSpec& b : s.bits) {
            if (!b.valid()) {
                out.push_back("ADC bits must be >= 1 (got " + b.label() + ")");
                continue;
            }
            if (s.axis == "antennas" && b.kind == BitsSpec::Kind::matrix) {
                out.push_back("a bits matrix cannot be combined with an antennas sweep");
                continue;
            }
            try {
                if (s.network.problems().empty()) (void)b.allocate(s.network.cells, s.network.antennas);
            } catch (const ConfigError& e) {
                out.push_back(e.what());
            }
        }
    }
    if (!nmse) {
        if (s.schemes.empty()) out.push_back("at least one combining scheme is required");
        if (wants_mc(s.evaluators) && s.trials < 2) out.push_back("Monte Carlo needs trials >= 2");
    }
    if (s.trials < 1) out.push_back("trials must be >= 1");
    if (s.drops < 1) out.push_back("drops must be >= 1");
    if (s.threads < 0) out.push_back("threads must be >= 0");
    try {
        s.power.validate();
    } catch (const ConfigError& e) {
        out.push_back(e.what());
    }
    return out;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string git_describe() { return QMIMO_GIT_DESCRIBE; }

std::string csv_preamble(const ExperimentSpec& s) {
    std::ostringstream o;
    o << "# qmimo git=" << git_describe() << " seed=" << s.seed() << " config_hash=" << std::hex << std::setw(16)
      << std::setfill('0') << fnv1a(s.canonical) << std::dec << " preset=" << to_string(s.preset);
    return o.str();
}

std::string describe(const ExperimentSpec& s) {
    std::ostringstream o;
    const NetworkConfig& n = s.network;
    o << "preset        " << to_string(s.preset) << '\n';
    o << "network       L=" << n.cells << " K=" << n.users << " M=" << n.antennas << " f=" << n.reuse << '\n';
    o << "coherence     tau_c=" << n.tau_c << " tau_p=" << n.tau_p() << " tau_u=" << n.tau_u() << '\n';
    o << "noise         " << n.noise_power_dbm << " dBm (" << n.noise_power_w() << " W) over " << n.bandwidth_hz
      << " Hz\n";
    o << "sweep         " << s.axis << " =";
    for (double v : s.values) o << ' ' << v;
    o << '\n';
    if (s.axis != "bits") {
        o << "bits series  ";
        for (const BitsSpec& b : s.bits) o << ' ' << b.label();
        o << '\n';
    }
    o << "schemes      ";
    for (Scheme x : s.schemes) o << ' ' << to_string(x);
    o << "\nestimator     " << to_cstr(s.estimator) << "\nevaluators    " << to_cstr(s.evaluators) << '\n';
    o << "trials/drops  " << s.trials << " x " << s.drops << '\n';

    if (n.problems().empty()) {
        const Grid g = build_grid(n);
        o << "grid          " << g.side << " x " << g.side << ", side " << g.cell_side_km << " km\n";
        o << "pilot groups ";
        for (int j = 0; j < g.cells(); ++j) o << ' ' << g.pilot_group[j];
        o << "\npilots        " << build_pilot_book(n, g).num_pilots() << '\n';
    }
    o << "alpha        ";
    for (int b = 1; b <= 10; ++b) {
        o << ' ' << b << ':' << std::setprecision(6) << distortion_factor(b);
    }
    o << '\n';
    o << "output dir    " << s.out_dir << '\n';
    o << "config hash   " << std::hex << fnv1a(s.canonical) << std::dec << '\n';
    const std::vector<std::string> problems = validate(s);
    if (problems.empty()) {
        o << "status        ok\n";
    } else {
        o << "status        " << problems.size() << " problem(s)\n";
        for (const std::string& p : problems) o << "  - " << p << '\n';
    }
    return o.str();
}

// ---------------------------------------------------------------- running

namespace {

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

class CsvFile {
public:
    CsvFile(const ExperimentSpec& spec, const std::string& name, const std::string& header,
            const std::string& extra = "")
        : path_((std::filesystem::path(spec.out_dir) / name).string()), out_(path_) {
        if (!out_) throw ConfigError("cannot write '" + path_ + "'");
        out_ << csv_preamble(spec);
        if (!extra.empty()) out_ << ' ' << extra;
        out_ << '\n' << header << '\n';
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
};

NetworkConfig at_point(const ExperimentSpec& s, double value) {
    NetworkConfig c = s.network;
    if (s.axis == "power_dbm") {
        c.tx_power_dbm = value;
        c.user_power_dbm.clear();
    } else if (s.axis == "asd_deg") {
        c.asd_deg = value;
    } else if (s.axis == "antennas") {
        c.antennas = static_cast<int>(value);
    }
    return c;
}

std::vector<BitsSpec> series_at(const ExperimentSpec& s, double value) {
    if (s.axis == "bits") return {BitsSpec::uniform_bits(static_cast<int>(value))};
    return s.bits;
}

SolveOptions solve_options(const ExperimentSpec& s, std::ostream& log) {
    SolveOptions o;
    if (s.verbose) o.log = &log;
    return o;
}

/// Per drop, per scheme, per user.
struct DropSe {
    std::vector<std::vector<McTerms>> mc;    // empty when MC is off
    std::vector<std::vector<SeTerms>> asy;   // empty entry for schemes without a closed form
};

DropSe evaluate_drop(const ExperimentSpec& s, const LinkModel& model, std::uint64_t drop, bool mc, bool asy,
                     std::ostream& log) {
    DropSe out;
    if (mc) {
        McOptions o;
        o.schemes = s.schemes;
        o.trials = s.trials;
        o.threads = 1;
        o.seed = s.seed();
        o.pilot_noise = s.pilot_noise;
        out.mc = run_drop_mc(model, o, drop).users;
    }
    if (asy) {
        const EstimatorStatistics stats(model, EstimatorKind::aware);
        for (Scheme x : s.schemes)
            out.asy.push_back(has_asymptotic(x) ? asymptotic_terms(x, model, stats, solve_options(s, log))
                                                : std::vector<SeTerms>());
    }
    return out;
}

std::vector<DropSe> evaluate_drops(const ExperimentSpec& s, const NetworkConfig& cfg, const BitAllocation& alloc,
                                   bool mc, bool asy, std::ostream& log) {
    std::vector<DropSe> drops(s.drops);
    parallel_for(s.drops, s.threads, [&](int d) {
        const LinkModel model = sample_drop(cfg, alloc, s.seed(), static_cast<std::uint64_t>(d));
        drops[d] = evaluate_drop(s, model, static_cast<std::uint64_t>(d), mc, asy, log);
    });
    return drops;
}

struct Aggregate {
    double se_mc = std::numeric_limits<double>::quiet_NaN();
    double se_stderr = std::numeric_limits<double>::quiet_NaN();
    double se_asy = std::numeric_limits<double>::quiet_NaN();
};

Aggregate aggregate(const std::vector<DropSe>& drops, std::size_t scheme) {
    Aggregate a;
    const double n = static_cast<double>(drops.size());
    if (!drops.front().mc.empty()) {
        double sum = 0.0, sq = 0.0, within = 0.0;
        for (const DropSe& d : drops) {
            double x = 0.0;
            for (const McTerms& t : d.mc[scheme]) {
                x += t.value.se;
                within += t.stderr_.se * t.stderr_.se;
            }
            sum += x;
            sq += x * x;
        }
        a.se_mc = sum / n;
        a.se_stderr = drops.size() >= 2 ? std::sqrt(std::max(0.0, (sq - n * a.se_mc * a.se_mc) / (n - 1)) / n)
                                        : std::sqrt(within);
    }
    if (!drops.front().asy.empty() && !drops.front().asy[scheme].empty()) {
        double sum = 0.0;
        for (const DropSe& d : drops)
            for (const SeTerms& t : d.asy[scheme]) sum += t.se;
        a.se_asy = sum / n;
    }
    return a;
}

void run_se_sweep(const ExperimentSpec& s, std::ostream& console, RunSummary& summary) {
    const bool mc = wants_mc(s.evaluators);
    const bool asy = wants_asy(s.evaluators);
    const std::string name = to_string(s.preset);
    CsvFile table(s, name + ".csv", s.axis + ",scheme,bits,se_mc,se_stderr,se_asy");
    std::unique_ptr<CsvFile> mc_users, asy_users, joined;
    const std::string user_cols = "drop_id,scheme,bits,power_dbm,asd_deg,";
    if (mc) mc_users = std::make_unique<CsvFile>(s, "se_mc_users.csv", user_cols + "user,se_mc,se_stderr");
    if (asy) asy_users = std::make_unique<CsvFile>(s, "se_asy_users.csv", user_cols + "user,se_asy");
    if (mc && asy) joined = std::make_unique<CsvFile>(s, "se_joined.csv", user_cols + "user,se_mc,se_asy,rel_gap");

    console << std::left << std::setw(12) << s.axis << std::setw(12) << "scheme" << std::setw(8) << "bits"
            << std::setw(14) << "se_mc" << std::setw(14) << "se_stderr" << "se_asy\n";
    for (double value : s.values) {
        const NetworkConfig cfg = at_point(s, value);
        for (const BitsSpec& b : series_at(s, value)) {
            const BitAllocation alloc = b.allocate(cfg.cells, cfg.antennas);
            const std::vector<DropSe> drops = evaluate_drops(s, cfg, alloc, mc, asy, console);
            for (std::size_t x = 0; x < s.schemes.size(); ++x) {
                const std::string scheme = to_string(s.schemes[x]);
                const Aggregate a = aggregate(drops, x);
                table.row({num(value), scheme, b.label(), num(a.se_mc), num(a.se_stderr), num(a.se_asy)});
                console << std::left << std::setw(12) << num(value) << std::setw(12) << scheme << std::setw(8)
                        << b.label() << std::setw(14) << num(a.se_mc) << std::setw(14) << num(a.se_stderr)
                        << num(a.se_asy) << '\n';
                for (std::size_t d = 0; d < drops.size(); ++d) {
                    const std::vector<std::string> prefix{std::to_string(d), scheme, b.label(), num(cfg.tx_power_dbm),
                                                          num(cfg.asd_deg)};
                    const bool has_asy = asy && !drops[d].asy[x].empty();
                    for (int u = 0; u < cfg.total_users(); ++u) {
                        std::vector<std::string> row = prefix;
                        row.push_back(std::to_string(u));
                        if (mc) {
                            const McTerms& t = drops[d].mc[x][u];
                            std::vector<std::string> r = row;
                            r.push_back(num(t.value.se));
                            r.push_back(num(t.stderr_.se));
                            mc_users->row(r);
                        }
                        if (has_asy) {
                            std::vector<std::string> r = row;
                            r.push_back(num(drops[d].asy[x][u].se));
                            asy_users->row(r);
                        }
                        if (mc && has_asy) {
                            const double m = drops[d].mc[x][u].value.se;
                            const double y = drops[d].asy[x][u].se;
                            std::vector<std::string> r = row;
                            r.push_back(num(m));
                            r.push_back(num(y));
                            r.push_back(num(m != 0.0 ? std::abs(y - m) / m : std::numeric_limits<double>::quiet_NaN()));
                            joined->row(r);
                        }
                    }
                }
            }
        }
    }
    summary.files.push_back(table.path());
    for (const auto* f : {mc_users.get(), asy_users.get(), joined.get()})
        if (f) summary.files.push_back(f->path());
}

void run_nmse_sweep(const ExperimentSpec& s, std::ostream& console, RunSummary& summary) {
    CsvFile table(s, to_string(s.preset) + ".csv", "power_dbm,bits,asd_deg,estimator,nmse_mean");
    std::vector<EstimatorKind> kinds;
    if (s.estimator != EstimatorMode::unaware) kinds.push_back(EstimatorKind::aware);
    if (s.estimator != EstimatorMode::aware) kinds.push_back(EstimatorKind::unaware);

    console << std::left << std::setw(12) << "power_dbm" << std::setw(8) << "bits" << std::setw(10) << "asd_deg"
            << std::setw(10) << "estimator" << "nmse_mean\n";
    for (double value : s.values) {
        const NetworkConfig cfg = at_point(s, value);
        for (const BitsSpec& b : series_at(s, value)) {
            const BitAllocation alloc = b.allocate(cfg.cells, cfg.antennas);
            std::vector<std::vector<double>> per_drop(s.drops, std::vector<double>(kinds.size()));
            parallel_for(s.drops, s.threads, [&](int d) {
                const LinkModel model = sample_drop(cfg, alloc, s.seed(), static_cast<std::uint64_t>(d));
                for (std::size_t i = 0; i < kinds.size(); ++i)
                    per_drop[d][i] = mean_nmse(EstimatorStatistics(model, kinds[i]), model);
            });
            for (std::size_t i = 0; i < kinds.size(); ++i) {
                double mean = 0.0;
                for (const auto& d : per_drop) mean += d[i];
                mean /= s.drops;
                const char* est = kinds[i] == EstimatorKind::aware ? "aware" : "unaware";
                table.row({num(cfg.tx_power_dbm), b.label(), num(cfg.asd_deg), est, num(mean)});
                console << std::left << std::setw(12) << num(cfg.tx_power_dbm) << std::setw(8) << b.label()
                        << std::setw(10) << num(cfg.asd_deg) << std::setw(10) << est << num(mean) << '\n';
            }
        }
    }
    summary.files.push_back(table.path());
}

void run_ee_sweep(const ExperimentSpec& s, std::ostream& console, RunSummary& summary) {
    // Sum SE from the asymptotic route where it exists and was requested,
    // otherwise from Monte Carlo. The source is recorded in each header.
    std::vector<bool> use_asy;
    bool need_mc = false;
    for (Scheme x : s.schemes) {
        const bool a = wants_asy(s.evaluators) && has_asymptotic(x);
        use_asy.push_back(a);
        need_mc = need_mc || !a;
    }
    std::vector<std::unique_ptr<CsvFile>> files;
    for (std::size_t x = 0; x < s.schemes.size(); ++x)
        files.push_back(std::make_unique<CsvFile>(s, "ee_vs_bits_" + to_string(s.schemes[x]) + ".csv",
                                                  "bits,sum_se,p_total_w,ee_bits_per_joule",
                                                  std::string("se_source=") + (use_asy[x] ? "asy" : "mc")));

    console << std::left << std::setw(6) << "bits" << std::setw(12) << "scheme" << std::setw(14) << "sum_se"
            << std::setw(14) << "p_total_w" << "ee_bits_per_joule\n";
    const NetworkConfig& cfg = s.network;
    for (double value : s.values) {
        const int b = static_cast<int>(value);
        const BitAllocation alloc = BitAllocation::uniform(cfg.cells, cfg.antennas, b);
        const bool any_asy = std::find(use_asy.begin(), use_asy.end(), true) != use_asy.end();
        const std::vector<DropSe> drops = evaluate_drops(s, cfg, alloc, need_mc, any_asy, console);
        const double pt = p_total(alloc, s.power);
        for (std::size_t x = 0; x < s.schemes.size(); ++x) {
            const Aggregate a = aggregate(drops, x);
            const double sum_se = use_asy[x] ? a.se_asy : a.se_mc;
            const double ee = energy_efficiency(sum_se, alloc, s.power);
            files[x]->row({std::to_string(b), num(sum_se), num(pt), num(ee)});
            console << std::left << std::setw(6) << b << std::setw(12) << to_string(s.schemes[x]) << std::setw(14)
                    << num(sum_se) << std::setw(14) << num(pt) << num(ee) << '\n';
        }
    }
    for (const auto& f : files) summary.files.push_back(f->path());
}

}  // namespace

RunSummary run(const ExperimentSpec& s, std::ostream& console) {
    const std::vector<std::string> problems = validate(s);
    if (!problems.empty()) {
        std::string msg = "invalid experiment:";
        for (const std::string& p : problems) msg += "\n  - " + p;
        throw ConfigError(msg);
    }
    std::error_code ec;
    std::filesystem::create_directories(s.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + s.out_dir + "': " + ec.message());

    RunSummary summary;
    switch (s.preset) {
    case Preset::nmse_vs_power:
    case Preset::nmse_vs_asd: run_nmse_sweep(s, console, summary); break;
    case Preset::ee_vs_bits: run_ee_sweep(s, console, summary); break;
    case Preset::se_vs_power:
    case Preset::se_vs_asd:
    case Preset::custom: run_se_sweep(s, console, summary); break;
    }
    return summary;
}

}  // namespace qmimo
