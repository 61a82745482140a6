#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#ifndef NIBM_VERSION
#define NIBM_VERSION "0.0.0"
#endif

namespace nibm::cli {

Setup load_setup(const std::string& path) {
    Setup s;
    s.cfg = Config::load(path);
    s.measure = build_measure(s.cfg);
    s.config_hash = s.cfg.hash();
    return s;
}

CriticalFrame frame_for(const Setup& s, const std::string& regime_override) {
    CriticalFrame f;
    if (const auto* d = std::get_if<DensitySpec>(&s.measure)) {
        f = classify(*d);
    } else {
        const auto hint = critical_hint(s.cfg);
        if (!hint.x_star || !hint.kappa)
            throw ConfigError("atom measures need x_star and kappa in [measure] or [frame]");
        f = classify(s.measure, *hint.x_star, *hint.kappa);
    }
    f.eps = s.cfg.get_double_or("frame", "eps", f.eps);
    if (!regime_override.empty()) {
        const bool want_airy = regime_override == "airy";
        if (!want_airy && regime_override != "pearcey")
            throw DomainError("unknown regime '" + regime_override + "' (airy, pearcey)");
        if (want_airy != f.airy())
            throw DomainError("regime override '" + regime_override + "' disagrees with the classification (" +
                              regime_name(f.regime) + ")");
    }
    return f;
}

EmpiricalMeasure initial_for(const Setup& s, std::size_t n) {
    if (const auto* d = std::get_if<DensitySpec>(&s.measure)) {
        if (n == 0) throw DomainError("--n is required for a density measure");
        return quantile_init(*d, n, DisplacementRule{s.cfg.get_double_or("measure", "displacement", 1.0)});
    }
    const auto& mn = std::get<EmpiricalMeasure>(s.measure);
    if (n != 0 && n != mn.size())
        throw DomainError("--n " + std::to_string(n) + " does not match the " + std::to_string(mn.size()) +
                          " configured atoms");
    return mn;
}

Precision precision_for(const Common& c, const Setup* s) {
    if (!c.precision.empty()) return parse_precision(c.precision);
    if (s) return parse_precision(s->cfg.get_or("kernel", "precision", "auto"));
    return Precision::Auto;
}

std::vector<double> parse_grid(const std::string& spec) {
    if (spec.find(':') == std::string::npos) return parse_values(spec, "grid");
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw DomainError("grid spec must be lo:hi:count, got '" + spec + "'");
    const double lo = parse_values(parts[0], "grid start").at(0);
    const double hi = parse_values(parts[1], "grid end").at(0);
    const double cnt = parse_values(parts[2], "grid count").at(0);
    if (!(cnt >= 1) || cnt != std::floor(cnt)) throw DomainError("grid count must be a positive integer");
    const auto m = static_cast<std::size_t>(cnt);
    if (m > 1 && !(hi > lo)) throw DomainError("grid needs hi > lo");
    std::vector<double> out;
    for (std::size_t i = 0; i < m; ++i) out.push_back(m == 1 ? lo : lo + (hi - lo) * i / (m - 1));
    return out;
}

std::vector<double> parse_values(const std::string& text, const char* what) {
    try {
        auto v = parse_list(text);
        if (v.empty()) throw DomainError(std::string("empty ") + what);
        return v;
    } catch (const ConfigError& e) {
        throw DomainError(std::string("bad ") + what + ": " + e.what());
    }
}

std::vector<std::size_t> parse_counts(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parse_values(text, "n list")) {
        if (!(v >= 1) || v != std::floor(v)) throw DomainError("n must be a positive integer");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

Output::Output(const std::string& path, bool binary) : path_(path) {
    if (path_.empty()) return;
    auto f = std::make_unique<std::ofstream>(path_, binary ? std::ios::binary : std::ios::out);
    if (!*f) throw IoError("cannot write " + path_);
    file_ = std::move(f);
}

Output::~Output() = default;

std::ostream& Output::stream() { return file_ ? *file_ : std::cout; }

void Output::finish(const json& meta) {
    stream().flush();
    if (!stream()) throw IoError("failed writing " + (path_.empty() ? std::string("stdout") : path_));
    if (!file_) return;
    file_.reset();
    json m = meta;
    m["output"] = path_;
    write_json_file(path_ + ".meta.json", m);
}

json base_meta(const std::string& command, const Common& c, const Setup* s) {
    json m;
    m["tool"] = "nibm";
    m["version"] = NIBM_VERSION;
    m["command"] = command;
    if (s) {
        std::ostringstream h;
        h << std::hex << std::setw(16) << std::setfill('0') << s->config_hash;
        m["config_hash"] = h.str();
        m["config"] = c.measure;
    } else {
        m["config_hash"] = nullptr;
    }
    m["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    m["precision"] = precision_name(precision_for(c, s));
    m["workers"] = c.workers;
    return m;
}

json frame_json(const CriticalFrame& f) {
    return {{"regime", regime_name(f.regime)},
            {"x_star", f.x_star},
            {"t_cr", f.t_cr},
            {"G0", f.G0},
            {"G1", f.G1},
            {"G2", f.G2},
            {"G3", f.G3},
            {"scale", f.scale},
            {"space_power", f.space_power()},
            {"kappa", f.kappa},
            {"eps", f.eps}};
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    f << j.dump(2) << '\n';
    if (!f) throw IoError("failed writing " + path);
}

void emit_json(const std::string& out, const json& body, const json& meta) {
    Output o(out);
    o.stream() << body.dump(2) << '\n';
    o.finish(meta);
}

void add_measure(CLI::App& app, Common& c, bool required) {
    auto* opt = app.add_option("--measure", c.measure, "measure config file");
    if (required) opt->required();
}

void add_common(CLI::App& app, Common& c) {
    app.add_option("--out", c.out, "output file (default stdout)");
    app.add_option("--workers", c.workers, "worker threads (0 = all cores)");
}

} // namespace nibm::cli
