#pragma once

// Batch front end: flat "key = value" run configs, dispatch to the
// evaluators, JSON / CSV reports.
//
// Config keys (one per line, '#' starts a comment):
//   command         verify | sweep | cp-probe | adjudicate-log-factor
//   seed            integer, default 0
//   tolerance       rel_residual bound, default 1e-6
//   output.path     report file (stdout when empty)
//   output.format   json | csv
//   setting         cylindrical | stratified-h1 | homogeneous
//   space.n space.k cylindrical dimensions
//   group           euclidean | anisotropic | heisenberg
//   group.n         euclidean group dimension
//   group.weights   dilation weights, e.g. "1,2" or "1/2,1"
//   group.norm      euclidean | anisotropic | koranyi (defaults by group)
//   identity        hardy | log-hardy | ckn | hpw
//   p q r alpha beta b c delta R
//   mode            identity | inequality (log-hardy sign condition)
//   cp_factor       one | p
//   function        annular-bump | quasi-annular-bump | box-bump | random | zero
//   function.r0 function.r1 function.tail_width function.scale function.seed
//   function.box    "lo:hi,lo:hi,..."
//   quadrature.radial_nodes .angular_nodes .box_nodes .panels .scheme
//   quadrature.radial_map .target_rel_err .max_refinements .truncation
//   sweep.family sweep.eps sweep.angular_order sweep.taper sweep.divergence
//   cp.ps cp.samples
//   case.<i>.<key>    per-case overrides for verify batches
//   triple.<i>.<key>  per-triple overrides for adjudicate-log-factor

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hardylab/ckn.hpp"
#include "hardylab/identities.hpp"
#include "hardylab/sharpness.hpp"
#include "hardylab/testfns.hpp"

#ifndef HARDYLAB_VERSION
#define HARDYLAB_VERSION "0.0.0"
#endif

namespace hlab::cli {

using json = nlohmann::json;
using KeyValues = std::map<std::string, std::string>;

inline constexpr const char* tool_version = HARDYLAB_VERSION;

enum ExitCode : int { exit_pass = 0, exit_tolerance = 1, exit_invalid = 2, exit_nonconvergence = 3 };

// ---------------------------------------------------------------- text

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline KeyValues parse_config_text(std::string_view text) {
    KeyValues kv;
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("config line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string val = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw InvalidInput("config line " + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, val).second)
            throw InvalidInput("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    return kv;
}

inline std::string to_config_text(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Lossless, locale-free double text.
inline std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
        throw InvalidInput("config key '" + key + "': expected a finite number, got '" + s + "'");
    return v;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InvalidInput("config key '" + key + "': expected a nonnegative integer, got '" + s + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw InvalidInput("config key '" + key + "': expected true or false, got '" + s + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    for (const auto& t : split(s, ',')) out.push_back(parse_double(key, t));
    if (out.empty()) throw InvalidInput("config key '" + key + "': empty list");
    return out;
}

inline std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_double(v[i]);
    return s;
}

inline std::string choose(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (v == a) return v;
    std::string msg = "config key '" + key + "': '" + v + "' is not one of";
    for (const char* a : allowed) msg += std::string(" ") + a;
    throw InvalidInput(msg);
}

// -------------------------------------------------------------- config

struct CaseConfig {
    std::string setting = "cylindrical";
    std::size_t space_n = 2, space_k = 2;
    std::string group = "euclidean";
    std::size_t group_n = 2;
    std::string group_weights;  // anisotropic only
    std::string group_norm;     // empty: default for the group
    std::string identity = "hardy";
    WeightParams params;
    std::string mode = "identity";
    std::string cp_factor = "one";
    std::string function = "annular-bump";
    double r0 = 1.0, r1 = 2.0, tail_width = 1.0, scale = 1.0;
    std::optional<std::uint64_t> function_seed;
    std::string box;
    QuadratureSpec quadrature;
};

struct RunConfig {
    std::string command = "verify";
    std::uint64_t seed = 0;
    double tolerance = 1e-6;
    std::string output_path;
    std::string format = "json";
    CaseConfig base;
    std::vector<CaseConfig> cases;  // case.<i> or triple.<i>
    std::string sweep_family = "h1";
    std::vector<double> sweep_eps{0.2, 0.1, 0.05, 0.025};
    int sweep_angular_order = 0;
    std::string sweep_taper = "log-scale";
    bool sweep_divergence = true;
    std::vector<double> cp_ps{2.0, 2.5, 3.0, 4.0};
    std::uint64_t cp_samples = 100000;
};

inline const std::set<std::string>& case_keys() {
    static const std::set<std::string> keys{
        "setting", "space.n", "space.k", "group", "group.n", "group.weights", "group.norm", "identity",
        "p", "q", "r", "alpha", "beta", "b", "c", "delta", "R", "mode", "cp_factor", "function",
        "function.r0", "function.r1", "function.tail_width", "function.scale", "function.seed", "function.box",
        "quadrature.radial_nodes", "quadrature.angular_nodes", "quadrature.box_nodes", "quadrature.panels",
        "quadrature.scheme", "quadrature.radial_map", "quadrature.target_rel_err", "quadrature.max_refinements",
        "quadrature.truncation"};
    return keys;
}

inline const std::set<std::string>& run_keys() {
    static const std::set<std::string> keys{
        "command", "seed", "tolerance", "output.path", "output.format", "sweep.family", "sweep.eps",
        "sweep.angular_order", "sweep.taper", "sweep.divergence", "cp.ps", "cp.samples"};
    return keys;
}

namespace detail {

inline void apply_case_key(CaseConfig& c, const std::string& key, const std::string& v) {
    auto& w = c.params;
    auto& q = c.quadrature;
    if (key == "setting") c.setting = choose(key, v, {"cylindrical", "stratified-h1", "homogeneous"});
    else if (key == "space.n") c.space_n = parse_uint(key, v);
    else if (key == "space.k") c.space_k = parse_uint(key, v);
    else if (key == "group") c.group = choose(key, v, {"euclidean", "anisotropic", "heisenberg"});
    else if (key == "group.n") c.group_n = parse_uint(key, v);
    else if (key == "group.weights") c.group_weights = v;
    else if (key == "group.norm") c.group_norm = choose(key, v, {"euclidean", "anisotropic", "koranyi"});
    else if (key == "identity") c.identity = choose(key, v, {"hardy", "log-hardy", "ckn", "hpw"});
    else if (key == "p") w.p = parse_double(key, v);
    else if (key == "q") w.q = parse_double(key, v);
    else if (key == "r") w.r = parse_double(key, v);
    else if (key == "alpha") w.alpha = parse_double(key, v);
    else if (key == "beta") w.beta = parse_double(key, v);
    else if (key == "b") w.b = parse_double(key, v);
    else if (key == "c") w.c = parse_double(key, v);
    else if (key == "delta") {
        w.delta = parse_double(key, v);
        if (!(w.delta >= 0.0 && w.delta <= 1.0))
            throw InvalidInput("config key 'delta': delta (δ) must lie in [0, 1], got " + v);
    } else if (key == "R") w.R = parse_double(key, v);
    else if (key == "mode") c.mode = choose(key, v, {"identity", "inequality"});
    else if (key == "cp_factor") c.cp_factor = choose(key, v, {"one", "p"});
    else if (key == "function")
        c.function = choose(key, v, {"annular-bump", "quasi-annular-bump", "box-bump", "random", "zero"});
    else if (key == "function.r0") c.r0 = parse_double(key, v);
    else if (key == "function.r1") c.r1 = parse_double(key, v);
    else if (key == "function.tail_width") c.tail_width = parse_double(key, v);
    else if (key == "function.scale") c.scale = parse_double(key, v);
    else if (key == "function.seed") c.function_seed = parse_uint(key, v);
    else if (key == "function.box") c.box = v;
    else if (key == "quadrature.radial_nodes") q.radial_nodes = parse_uint(key, v);
    else if (key == "quadrature.angular_nodes") q.angular_nodes = parse_uint(key, v);
    else if (key == "quadrature.box_nodes") q.box_nodes = parse_uint(key, v);
    else if (key == "quadrature.panels") q.panels = parse_uint(key, v);
    else if (key == "quadrature.scheme")
        q.scheme = choose(key, v, {"gauss-legendre", "tanh-sinh"}) == "tanh-sinh" ? Scheme::tanh_sinh
                                                                                 : Scheme::gauss_legendre;
    else if (key == "quadrature.radial_map") {
        const auto m = choose(key, v, {"linear", "logarithmic", "log-log"});
        q.radial_map = m == "linear" ? RadialMap::linear : m == "logarithmic" ? RadialMap::logarithmic : RadialMap::log_log;
    } else if (key == "quadrature.target_rel_err") q.target_rel_err = parse_double(key, v);
    else if (key == "quadrature.max_refinements") q.max_refinements = static_cast<int>(parse_uint(key, v));
    else if (key == "quadrature.truncation") q.truncation = parse_double(key, v);
    else throw InvalidInput("unknown config key '" + key + "'");
}

inline void apply_run_key(RunConfig& r, const std::string& key, const std::string& v) {
    if (key == "command")
        r.command = choose(key, v, {"verify", "sweep", "cp-probe", "adjudicate-log-factor"});
    else if (key == "seed") r.seed = parse_uint(key, v);
    else if (key == "tolerance") {
        r.tolerance = parse_double(key, v);
        if (!(r.tolerance > 0.0)) throw InvalidInput("config key 'tolerance' must be positive");
    } else if (key == "output.path") r.output_path = v;
    else if (key == "output.format") r.format = choose(key, v, {"json", "csv"});
    else if (key == "sweep.family") r.sweep_family = choose(key, v, {"h1", "h2"});
    else if (key == "sweep.eps") r.sweep_eps = parse_list(key, v);
    else if (key == "sweep.angular_order") r.sweep_angular_order = static_cast<int>(parse_uint(key, v));
    else if (key == "sweep.taper") r.sweep_taper = choose(key, v, {"log-scale", "fixed-ratio"});
    else if (key == "sweep.divergence") r.sweep_divergence = parse_bool(key, v);
    else if (key == "cp.ps") r.cp_ps = parse_list(key, v);
    else if (key == "cp.samples") r.cp_samples = parse_uint(key, v);
    else throw InvalidInput("unknown config key '" + key + "'");
}

inline bool split_indexed(const std::string& key, std::string& prefix, std::size_t& idx, std::string& rest) {
    for (const char* pre : {"case.", "triple."}) {
        const std::string p = pre;
        if (key.rfind(p, 0) != 0) continue;
        const auto dot = key.find('.', p.size());
        if (dot == std::string::npos) throw InvalidInput("config key '" + key + "': expected " + p + "<i>.<key>");
        prefix = p.substr(0, p.size() - 1);
        idx = parse_uint(key, key.substr(p.size(), dot - p.size()));
        rest = key.substr(dot + 1);
        return true;
    }
    return false;
}

}  // namespace detail

inline RunConfig parse_run_config(const KeyValues& kv) {
    RunConfig r;
    std::map<std::size_t, KeyValues> indexed;
    std::string indexed_prefix;
    for (const auto& [key, v] : kv) {
        std::string prefix, rest;
        std::size_t idx = 0;
        if (detail::split_indexed(key, prefix, idx, rest)) {
            if (!indexed_prefix.empty() && indexed_prefix != prefix)
                throw InvalidInput("config mixes case.<i> and triple.<i> keys");
            indexed_prefix = prefix;
            if (!case_keys().contains(rest)) throw InvalidInput("unknown config key '" + key + "'");
            indexed[idx][rest] = v;
        } else if (case_keys().contains(key)) {
            detail::apply_case_key(r.base, key, v);
        } else {
            detail::apply_run_key(r, key, v);
        }
    }
    std::size_t expect = 0;
    for (const auto& [idx, sub] : indexed) {
        if (idx != expect++)
            throw InvalidInput(indexed_prefix + " indices must be 0, 1, 2, ... without gaps");
        CaseConfig c = r.base;
        for (const auto& [key, v] : sub) detail::apply_case_key(c, key, v);
        r.cases.push_back(std::move(c));
    }
    if (indexed_prefix == "triple" && r.command != "adjudicate-log-factor")
        throw InvalidInput("triple.<i> keys belong to command adjudicate-log-factor");
    if (indexed_prefix == "case" && r.command == "adjudicate-log-factor")
        throw InvalidInput("adjudicate-log-factor takes triple.<i> keys");
    return r;
}

inline void emit_case(KeyValues& kv, const std::string& pre, const CaseConfig& c) {
    const auto& w = c.params;
    const auto& q = c.quadrature;
    kv[pre + "setting"] = c.setting;
    kv[pre + "space.n"] = std::to_string(c.space_n);
    kv[pre + "space.k"] = std::to_string(c.space_k);
    kv[pre + "group"] = c.group;
    kv[pre + "group.n"] = std::to_string(c.group_n);
    if (!c.group_weights.empty()) kv[pre + "group.weights"] = c.group_weights;
    if (!c.group_norm.empty()) kv[pre + "group.norm"] = c.group_norm;
    kv[pre + "identity"] = c.identity;
    kv[pre + "p"] = fmt_double(w.p);
    kv[pre + "q"] = fmt_double(w.q);
    kv[pre + "r"] = fmt_double(w.r);
    kv[pre + "alpha"] = fmt_double(w.alpha);
    kv[pre + "beta"] = fmt_double(w.beta);
    kv[pre + "b"] = fmt_double(w.b);
    kv[pre + "c"] = fmt_double(w.c);
    kv[pre + "delta"] = fmt_double(w.delta);
    kv[pre + "R"] = fmt_double(w.R);
    kv[pre + "mode"] = c.mode;
    kv[pre + "cp_factor"] = c.cp_factor;
    kv[pre + "function"] = c.function;
    kv[pre + "function.r0"] = fmt_double(c.r0);
    kv[pre + "function.r1"] = fmt_double(c.r1);
    kv[pre + "function.tail_width"] = fmt_double(c.tail_width);
    kv[pre + "function.scale"] = fmt_double(c.scale);
    if (c.function_seed) kv[pre + "function.seed"] = std::to_string(*c.function_seed);
    if (!c.box.empty()) kv[pre + "function.box"] = c.box;
    kv[pre + "quadrature.radial_nodes"] = std::to_string(q.radial_nodes);
    kv[pre + "quadrature.angular_nodes"] = std::to_string(q.angular_nodes);
    kv[pre + "quadrature.box_nodes"] = std::to_string(q.box_nodes);
    kv[pre + "quadrature.panels"] = std::to_string(q.panels);
    kv[pre + "quadrature.scheme"] = to_string(q.scheme);
    kv[pre + "quadrature.radial_map"] = to_string(q.radial_map);
    kv[pre + "quadrature.target_rel_err"] = fmt_double(q.target_rel_err);
    kv[pre + "quadrature.max_refinements"] = std::to_string(q.max_refinements);
    kv[pre + "quadrature.truncation"] = fmt_double(q.truncation);
}

/// Fully expanded config; parse_run_config(to_key_values(c)) reproduces c.
/// output.path is left out so the hash does not depend on where the report goes.
inline KeyValues to_key_values(const RunConfig& r) {
    KeyValues kv;
    kv["command"] = r.command;
    kv["seed"] = std::to_string(r.seed);
    kv["tolerance"] = fmt_double(r.tolerance);
    kv["output.format"] = r.format;
    emit_case(kv, "", r.base);
    const std::string pre = r.command == "adjudicate-log-factor" ? "triple." : "case.";
    for (std::size_t i = 0; i < r.cases.size(); ++i) emit_case(kv, pre + std::to_string(i) + ".", r.cases[i]);
    if (r.command == "sweep") {
        kv["sweep.family"] = r.sweep_family;
        kv["sweep.eps"] = join(r.sweep_eps);
        kv["sweep.angular_order"] = std::to_string(r.sweep_angular_order);
        kv["sweep.taper"] = r.sweep_taper;
        kv["sweep.divergence"] = r.sweep_divergence ? "true" : "false";
    }
    if (r.command == "cp-probe") {
        kv["cp.ps"] = join(r.cp_ps);
        kv["cp.samples"] = std::to_string(r.cp_samples);
    }
    return kv;
}

inline std::string config_hash(const RunConfig& r) { return hex64(fnv1a64(to_config_text(to_key_values(r)))); }

/// --nodes override: every node count of every case.
inline void override_nodes(RunConfig& r, std::size_t nodes) {
    auto set = [&](CaseConfig& c) {
        c.quadrature.radial_nodes = c.quadrature.angular_nodes = c.quadrature.box_nodes = nodes;
    };
    set(r.base);
    for (auto& c : r.cases) set(c);
}

// ------------------------------------------------------------ builders

inline std::vector<Rational> parse_weights(const std::string& s) {
    std::vector<Rational> out;
    for (const auto& t : split(s, ',')) {
        const auto slash = t.find('/');
        const auto num = parse_uint("group.weights", t.substr(0, slash));
        const auto den = slash == std::string::npos ? 1 : parse_uint("group.weights", t.substr(slash + 1));
        out.push_back({static_cast<long>(num), static_cast<long>(den)});
    }
    if (out.empty()) throw InvalidInput("config key 'group.weights': empty list");
    return out;
}

inline NormKind parse_norm(const std::string& s) {
    if (s == "euclidean") return NormKind::euclidean;
    if (s == "anisotropic") return NormKind::anisotropic;
    return NormKind::koranyi;
}

inline GroupStructure build_group(const CaseConfig& c) {
    if (c.group == "heisenberg") return GroupStructure::heisenberg(c.group_norm.empty() ? NormKind::koranyi : parse_norm(c.group_norm));
    if (c.group == "anisotropic") {
        if (c.group_weights.empty()) throw InvalidInput("config key 'group.weights' is required for group = anisotropic");
        return GroupStructure(parse_weights(c.group_weights),
                              c.group_norm.empty() ? NormKind::anisotropic : parse_norm(c.group_norm), std::nullopt);
    }
    return GroupStructure::euclidean(c.group_n, c.group_norm.empty() ? NormKind::euclidean : parse_norm(c.group_norm));
}

inline Geometry build_geometry(const CaseConfig& c) {
    if (c.setting == "cylindrical") return Geometry::cylindrical(CylindricalSpace(c.space_n, c.space_k));
    if (c.setting == "stratified-h1") {
        if (c.group != "heisenberg") throw InvalidInput("setting stratified-h1 needs group = heisenberg");
        return Geometry::stratified(build_group(c));
    }
    return Geometry::homogeneous(build_group(c));
}

inline std::vector<Interval> parse_box(const std::string& s, std::size_t n) {
    std::vector<Interval> box;
    for (const auto& t : split(s, ',')) {
        const auto colon = t.find(':');
        if (colon == std::string::npos) throw InvalidInput("config key 'function.box': expected lo:hi entries");
        box.push_back({parse_double("function.box", t.substr(0, colon)), parse_double("function.box", t.substr(colon + 1))});
        if (!(box.back().lo < box.back().hi)) throw InvalidInput("config key 'function.box': need lo < hi");
    }
    if (box.size() != n)
        throw InvalidInput("config key 'function.box': " + std::to_string(box.size()) + " intervals for dimension " +
                           std::to_string(n));
    return box;
}

inline TestFunction build_function(const CaseConfig& c, const Geometry& geo, std::uint64_t fallback_seed) {
    const bool cyl = geo.kind() == SettingKind::cylindrical;
    const std::uint64_t seed = c.function_seed.value_or(fallback_seed);
    TestFunction f;
    if (c.function == "annular-bump") {
        if (!cyl) throw InvalidInput("function annular-bump needs setting = cylindrical (use quasi-annular-bump)");
        f = make_annular_bump(geo.space(), c.r0, c.r1, c.tail_width);
    } else if (c.function == "quasi-annular-bump") {
        if (cyl) throw InvalidInput("function quasi-annular-bump needs a group setting");
        f = make_quasi_annular_bump(geo.group(), c.r0, c.r1);
    } else if (c.function == "box-bump") {
        if (cyl) throw InvalidInput("function box-bump needs a group setting");
        if (c.box.empty()) throw InvalidInput("config key 'function.box' is required for function = box-bump");
        f = make_box_bump(parse_box(c.box, geo.n()));
    } else if (c.function == "random") {
        f = cyl ? random_cylindrical(geo.space(), seed, {c.r0, c.r1}) : random_group(geo.group(), seed, c.scale);
    } else {
        f = cyl ? make_annular_bump(geo.space(), c.r0, c.r1, c.tail_width) : random_group(geo.group(), seed, c.scale);
        f = scaled(f, 0.0);
    }
    return f;
}

// -------------------------------------------------------- serialization

inline json to_json(const WeightParams& w) {
    return json{{"p", w.p}, {"q", w.q}, {"r", w.r}, {"alpha", w.alpha}, {"beta", w.beta},
                {"b", w.b}, {"c", w.c}, {"delta", w.delta}, {"R", w.R}};
}

inline json to_json(const IdentityReport& r) {
    return json{{"identity", r.identity}, {"setting", r.setting}, {"function", r.function},
                {"params", to_json(r.params)}, {"dimension", r.dimension}, {"lhs", r.lhs},
                {"gradient_term", r.gradient_term}, {"middle_term", r.middle_term}, {"cp_term", r.cp_term},
                {"residual", r.residual}, {"rel_residual", r.rel_residual}, {"quadrature_err", r.quadrature_err},
                {"weighted_norm", r.weighted_norm}, {"cp_factor", r.cp_factor},
                {"sign_condition_holds", r.sign_condition_holds}, {"converged", r.converged}, {"nodes", r.nodes}};
}

inline json to_json(const CknReport& r) {
    return json{{"identity", r.identity}, {"setting", r.setting}, {"function", r.function},
                {"params", to_json(r.params)}, {"dimension", r.dimension}, {"lhs", r.lhs}, {"rhs", r.rhs},
                {"slack", r.slack}, {"bracket", r.bracket}, {"bracket_nonneg", r.bracket_nonneg},
                {"gradient_term", r.gradient_term}, {"cp_term", r.cp_term}, {"norm_lhs", r.norm_lhs},
                {"norm_rhs", r.norm_rhs}, {"quadrature_err", r.quadrature_err}, {"converged", r.converged},
                {"nodes", r.nodes}, {"rhs_with_remainder", r.rhs_with_remainder}};
}

inline json to_json(const SharpnessSweep& s) {
    return json{{"family", s.family}, {"setting", s.setting}, {"params", to_json(s.params)},
                {"angular_order", s.angular_order}, {"taper", s.taper}, {"target_constant", s.target_constant},
                {"eps_sequence", s.eps_sequence}, {"quotients", s.quotients}, {"gaps", s.gaps},
                {"rel_gaps", s.rel_gaps}, {"weighted_norms", s.weighted_norms}, {"quotient_errs", s.quotient_errs},
                {"nodes", s.nodes}, {"trend", s.trend}, {"monotone", s.monotone},
                {"lower_bound_ok", s.lower_bound_ok}, {"within_tolerance", s.within_tolerance},
                {"converged", s.converged}, {"passed", s.passed}};
}

inline json to_json(const DivergenceReport& d) {
    return json{{"family", d.family}, {"setting", d.setting}, {"params", to_json(d.params)},
                {"eps_sequence", d.eps_sequence}, {"norms", d.norms}, {"inner_norms", d.inner_norms},
                {"outer_norms", d.outer_norms}, {"quotients", d.quotients}, {"slope", d.slope},
                {"increasing", d.increasing}, {"inner_diverges", d.inner_diverges},
                {"outer_diverges", d.outer_diverges}, {"quotient_settles", d.quotient_settles},
                {"diverges", d.diverges}, {"passed", d.passed}};
}

// ------------------------------------------------------------ commands

struct RunResult {
    int exit_code = exit_pass;
    json body;
    double wall_time_s = 0.0;
};

/// Passing rule for identity records: residual within tolerance or within
/// ten quadrature errors, and the C_p integral not negative beyond its error.
inline bool identity_passes(const IdentityReport& r, double tol) {
    const double scale = std::max({std::abs(r.lhs), std::abs(r.gradient_term), tiny_floor});
    const bool resid = r.rel_residual <= std::max(tol, 10.0 * r.quadrature_err / scale);
    const bool cp_ok = r.cp_term >= -(r.quadrature_err + 1e-14 * scale);
    return resid && cp_ok;
}

inline bool ckn_passes(const CknReport& r) { return r.slack >= -10.0 * r.quadrature_err; }

inline CpFactorMode parse_cp_factor(const std::string& s) { return s == "p" ? CpFactorMode::p : CpFactorMode::one; }

inline IdentityReport run_log_hardy(const Geometry& geo, const CaseConfig& c, const TestFunction& f, CpFactorMode mode) {
    if (c.mode == "inequality") validate_log_params(c.params, geo.dimension(), true);
    return evaluate_log_hardy(geo, std::span<const WeightParams>(&c.params, 1), f, c.quadrature, mode).front();
}

namespace detail {

struct Tally {
    bool all_passed = true;
    bool all_converged = true;
    void add(bool passed, bool converged) {
        all_passed = all_passed && passed;
        all_converged = all_converged && converged;
    }
    [[nodiscard]] int exit_code() const {
        if (!all_passed) return exit_tolerance;
        if (!all_converged) return exit_nonconvergence;
        return exit_pass;
    }
    [[nodiscard]] std::string status() const {
        if (!all_passed) return "tolerance-failure";
        if (!all_converged) return "non-convergence";
        return "pass";
    }
};

inline json verify_case(const CaseConfig& c, std::uint64_t seed, double tol, Tally& tally) {
    c.quadrature.validate();
    const Geometry geo = build_geometry(c);
    const TestFunction f = build_function(c, geo, seed);
    json rec;
    bool passed = false, converged = true;
    if (c.identity == "hardy") {
        const auto r = evaluate_hardy(geo, std::span<const WeightParams>(&c.params, 1), f, c.quadrature).front();
        rec = to_json(r);
        passed = identity_passes(r, tol);
        converged = r.converged;
    } else if (c.identity == "log-hardy") {
        const auto r = run_log_hardy(geo, c, f, parse_cp_factor(c.cp_factor));
        rec = to_json(r);
        rec["mode"] = c.mode;
        passed = identity_passes(r, tol);
        converged = r.converged;
    } else if (c.identity == "ckn") {
        const auto v = validate_ckn_params(c.params, geo.dimension());
        if (!v.admissible) throw InvalidInput("ckn parameters: " + v.violated + ": " + v.detail);
        const auto r = evaluate_ckn(geo, std::span<const WeightParams>(&c.params, 1), f, c.quadrature).front();
        rec = to_json(r);
        passed = ckn_passes(r);
        converged = r.converged;
    } else {
        if (geo.kind() != SettingKind::cylindrical) throw InvalidInput("identity hpw needs setting = cylindrical");
        const auto r = evaluate_hpw(geo.space(), c.params.p, f, c.quadrature);
        rec = to_json(r);
        passed = ckn_passes(r);
        converged = r.converged;
    }
    rec["passed"] = passed;
    tally.add(passed, converged);
    return rec;
}

inline json cp_probe(double p, std::uint64_t samples, std::uint64_t seed) {
    check_p(p);
    if (samples == 0) throw InvalidInput("config key 'cp.samples' must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double min_scaled = 1e300, inf_ratio = 1e300, max_c2_dev = 0.0;
    std::uint64_t negatives = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const complex xi(u(rng), u(rng)), eta(u(rng), u(rng));
        const double v = cp(p, {xi, eta});
        const double scale = std::max({1.0, std::pow(std::abs(xi), p), std::pow(std::abs(eta), p)});
        min_scaled = std::min(min_scaled, v / scale);
        if (v / scale < -1e-12) ++negatives;
        if (std::abs(eta) > 0.0) inf_ratio = std::min(inf_ratio, v / std::pow(std::abs(eta), p));
        if (p == 2.0) max_c2_dev = std::max(max_c2_dev, std::abs(v - std::norm(eta)));
    }
    json rec{{"p", p}, {"samples", samples}, {"min_scaled_cp", min_scaled}, {"negatives_below_1e-12", negatives},
             {"empirical_cp_lower_constant", inf_ratio}};
    bool ok = negatives == 0;
    if (p == 2.0) {
        rec["max_abs_c2_minus_eta_sq"] = max_c2_dev;
        ok = ok && max_c2_dev <= 1e-12;
    }
    rec["passed"] = ok;
    return rec;
}

}  // namespace detail

inline json adjudicate_log_factor(const RunConfig& cfg, int& exit_code) {
    if (cfg.cases.size() < 3)
        throw InvalidInput("adjudicate-log-factor needs at least 3 triples (triple.<i>.*), got " +
                           std::to_string(cfg.cases.size()));
    json records = json::array();
    bool all_one = true, all_p = true, separated = true, converged = true;
    for (std::size_t i = 0; i < cfg.cases.size(); ++i) {
        CaseConfig c = cfg.cases[i];
        c.identity = "log-hardy";
        c.quadrature.validate();
        const Geometry geo = build_geometry(c);
        const TestFunction f = build_function(c, geo, cfg.seed + i);
        if (f.is_zero()) throw InvalidInput("triple " + std::to_string(i) + ": the zero function is uninformative");
        const auto one = run_log_hardy(geo, c, f, CpFactorMode::one);
        const auto pm = with_cp_factor(one, CpFactorMode::p);
        const bool ok_one = identity_passes(one, cfg.tolerance), ok_p = identity_passes(pm, cfg.tolerance);
        all_one = all_one && ok_one;
        all_p = all_p && ok_p;
        converged = converged && one.converged;
        const double losing = ok_one ? pm.rel_residual : one.rel_residual;
        separated = separated && ok_one != ok_p && losing > 1e-3;
        records.push_back(json{{"triple", i}, {"setting", one.setting}, {"function", one.function},
                               {"params", to_json(one.params)}, {"lhs", one.lhs}, {"gradient_term", one.gradient_term},
                               {"middle_term", one.middle_term}, {"cp_term", one.cp_term},
                               {"quadrature_err", one.quadrature_err}, {"residual_one", one.residual},
                               {"rel_residual_one", one.rel_residual}, {"residual_p", pm.residual},
                               {"rel_residual_p", pm.rel_residual}, {"passes_one", ok_one}, {"passes_p", ok_p},
                               {"converged", one.converged}});
    }
    std::string verdict;
    if (all_one && !all_p) verdict = "one";
    else if (all_p && !all_one) verdict = "p";
    else if (all_one && all_p) verdict = "inconclusive";
    else {
        bool any = false;
        for (const auto& r : records) any = any || r["passes_one"].get<bool>() || r["passes_p"].get<bool>();
        verdict = any ? "inconclusive" : "all-fail";
    }
    const bool unanimous = verdict == "one" || verdict == "p";
    exit_code = unanimous ? (converged ? exit_pass : exit_nonconvergence) : exit_tolerance;
    json out{{"records", records}, {"verdict", verdict}, {"unanimous", unanimous}, {"clear_separation", unanimous && separated},
             {"passed", unanimous}};
    if (verdict == "all-fail") out["advice"] = "no mode meets the tolerance; raise quadrature node counts";
    return out;
}

/// Runs a parsed config. Invalid input and non-convergence are reported in
/// the body under "error" with the matching exit code.
inline RunResult run(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult res;
    json body{{"tool", "hardylab"}, {"version", tool_version}, {"command", cfg.command},
              {"config_hash", config_hash(cfg)}, {"config", to_key_values(cfg)}};
    try {
        if (cfg.command == "verify") {
            detail::Tally tally;
            json records = json::array();
            if (cfg.cases.empty()) records.push_back(detail::verify_case(cfg.base, cfg.seed, cfg.tolerance, tally));
            for (std::size_t i = 0; i < cfg.cases.size(); ++i)
                records.push_back(detail::verify_case(cfg.cases[i], cfg.seed + i, cfg.tolerance, tally));
            body["records"] = records;
            body["status"] = tally.status();
            body["passed"] = tally.all_passed;
            res.exit_code = tally.exit_code();
        } else if (cfg.command == "sweep") {
            const CaseConfig& c = cfg.base;
            c.quadrature.validate();
            if (c.setting != "cylindrical") throw InvalidInput("sweep needs setting = cylindrical");
            const CylindricalSpace s(c.space_n, c.space_k);
            ExtremizerOptions o;
            o.angular_order = cfg.sweep_angular_order;
            o.taper = cfg.sweep_taper == "fixed-ratio" ? Taper::fixed_ratio : Taper::log_scale;
            const bool h2 = cfg.sweep_family == "h2";
            const auto sw = h2 ? sweep_log_constant(s, c.params, cfg.sweep_eps, c.quadrature, o)
                               : sweep_hardy_constant(s, c.params, cfg.sweep_eps, c.quadrature, o);
            json records = json::array({to_json(sw)});
            detail::Tally tally;
            tally.add(sw.passed, sw.converged);
            if (cfg.sweep_divergence) {
                const auto d = divergence_probe(s, h2 ? ExtremizerKind::h2 : ExtremizerKind::h1, c.params,
                                                cfg.sweep_eps, c.quadrature, o);
                records.push_back(to_json(d));
                tally.add(d.passed, true);
            }
            body["records"] = records;
            body["status"] = tally.status();
            body["passed"] = tally.all_passed;
            res.exit_code = tally.exit_code();
        } else if (cfg.command == "cp-probe") {
            json records = json::array();
            bool ok = true;
            for (std::size_t i = 0; i < cfg.cp_ps.size(); ++i) {
                records.push_back(detail::cp_probe(cfg.cp_ps[i], cfg.cp_samples, cfg.seed + i));
                ok = ok && records.back()["passed"].get<bool>();
            }
            body["records"] = records;
            body["status"] = ok ? "pass" : "tolerance-failure";
            body["passed"] = ok;
            res.exit_code = ok ? exit_pass : exit_tolerance;
        } else {
            int code = exit_pass;
            json a = adjudicate_log_factor(cfg, code);
            for (auto& [k, v] : a.items()) body[k] = v;
            body["status"] = code == exit_pass ? "pass" : code == exit_nonconvergence ? "non-convergence" : "tolerance-failure";
            res.exit_code = code;
        }
    } catch (const InvalidInput& e) {
        body["error"] = std::string("invalid input: ") + e.what();
        body["status"] = "invalid-input";
        body["passed"] = false;
        res.exit_code = exit_invalid;
    } catch (const NonConvergence& e) {
        body["error"] = std::string("non-convergence: ") + e.what();
        body["status"] = "non-convergence";
        body["passed"] = false;
        res.exit_code = exit_nonconvergence;
    }
    res.body = std::move(body);
    res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// -------------------------------------------------------------- output

inline std::string render_json(const RunResult& r) {
    const json doc{{"version", tool_version}, {"config_hash", r.body.value("config_hash", "")},
                   {"wall_time_s", r.wall_time_s}, {"body", r.body}};
    return doc.dump(2) + "\n";
}

namespace detail {

inline void flatten(const json& j, const std::string& pre, std::map<std::string, std::string>& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, pre.empty() ? k : pre + "." + k, out);
    } else if (j.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < j.size(); ++i) s += (i ? ";" : "") + (j[i].is_string() ? j[i].get<std::string>() : j[i].dump());
        out[pre] = s;
    } else {
        out[pre] = j.is_string() ? j.get<std::string>() : j.dump();
    }
}

inline std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

}  // namespace detail

/// One row per record; the first line is a comment carrying provenance.
inline std::string render_csv(const RunResult& r) {
    const json& b = r.body;
    std::vector<std::map<std::string, std::string>> rows;
    if (b.contains("records")) {
        for (const auto& rec : b["records"]) {
            rows.emplace_back();
            detail::flatten(rec, "", rows.back());
        }
    }
    if (rows.empty()) {
        rows.emplace_back();
        rows.back()["status"] = b.value("status", "");
        if (b.contains("error")) rows.back()["error"] = b["error"].get<std::string>();
    }
    std::set<std::string> cols;
    for (const auto& row : rows)
        for (const auto& [k, v] : row) cols.insert(k);
    std::ostringstream out;
    out << "# hardylab " << tool_version << " command=" << b.value("command", "") << " config_hash="
        << b.value("config_hash", "") << " status=" << b.value("status", "") << " wall_time_s=" << r.wall_time_s << "\n";
    bool first = true;
    for (const auto& c : cols) out << (first ? "" : ",") << detail::csv_cell(c), first = false;
    out << "\n";
    for (const auto& row : rows) {
        first = true;
        for (const auto& c : cols) {
            const auto it = row.find(c);
            out << (first ? "" : ",") << (it == row.end() ? "" : detail::csv_cell(it->second));
            first = false;
        }
        out << "\n";
    }
    return out.str();
}

inline std::string render(const RunResult& r, const std::string& format) {
    return format == "csv" ? render_csv(r) : render_json(r);
}

inline KeyValues read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace hlab::cli
