#include "cli.hpp"

#include "nibm/converge.hpp"
#include "nibm/fredholm.hpp"
#include "nibm/kernels_limit.hpp"
#include "nibm/sim.hpp"
#include "nibm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

namespace nibm::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::pair<double, double> tau_pair(const std::string& text) {
    if (text.empty()) return {0.0, 0.0};
    const auto v = parse_values(text, "tau list");
    if (v.size() != 2) throw DomainError("--tau takes tau1,tau2");
    return {v[0], v[1]};
}

void write_matrix_csv(std::ostream& os, const std::vector<double>& us, const std::vector<double>& vs,
                      const Eigen::MatrixXd& m) {
    os.precision(17);
    os << "u,v,value\n";
    for (std::size_t i = 0; i < us.size(); ++i)
        for (std::size_t k = 0; k < vs.size(); ++k) os << us[i] << ',' << vs[k] << ',' << m(i, k) << '\n';
}

std::size_t single_n(const Common& c) {
    if (c.n.empty()) return 0;
    const auto ns = parse_counts(c.n);
    if (ns.size() != 1) throw DomainError("this subcommand takes a single --n");
    return ns[0];
}

json proportion_json(const stats::Proportion& p) {
    return {{"value", p.value}, {"lo", p.lo}, {"hi", p.hi}, {"hits", p.hits}, {"total", p.total}};
}

PathEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open ensemble " + path);
    return read_ensemble(in);
}

} // namespace

int run_density(const Common& c, double t) {
    const auto s = load_setup(c.measure);
    if (!(t > 0.0)) throw DomainError("--t must be positive");
    const auto [a, b] = support_hull(s.measure);
    const double pad = 2.0 * std::sqrt(t) + 0.1;
    const auto xs = c.grid.empty() ? parse_grid(std::to_string(a - pad) + ":" + std::to_string(b + pad) + ":401")
                                   : parse_grid(c.grid);
    const BianeState st(s.measure, t, std::min(a, xs.front()) - pad - 1.0, std::max(b, xs.back()) + pad + 1.0, 256);
    Output out(c.out);
    auto& os = out.stream();
    os.precision(17);
    os << "x,psi_t\n";
    for (double x : xs) os << x << ',' << (x <= st.phi_min() || x >= st.phi_max() ? 0.0 : st.density(x)) << '\n';
    auto meta = base_meta("density", c, &s);
    meta["t"] = t;
    out.finish(meta);
    return kOk;
}

int run_critical(const Common& c) {
    const auto s = load_setup(c.measure);
    const auto f = frame_for(s, c.regime);
    auto body = frame_json(f);
    body["c2_or_c3"] = f.scale;
    body["x_star_at_t_cr"] = critical_path(f, f.t_cr).x;
    emit_json(c.out, body, base_meta("critical", c, &s));
    return kOk;
}

int run_kernel(const Common& c) {
    const auto s = load_setup(c.measure);
    const auto f = frame_for(s, c.regime);
    const auto prec = precision_for(c, &s);
    const RescaledKernel k(initial_for(s, single_n(c)), f, prec);
    const auto [t1, t2] = tau_pair(c.tau);
    const auto us = parse_grid(c.grid.empty() ? "-2:2:9" : c.grid);
    KernelDiagnostics diag;
    const auto m = k.grid(t1, t2, us, us, &diag);
    Output out(c.out);
    write_matrix_csv(out.stream(), us, us, m);
    auto meta = base_meta("kernel", c, &s);
    meta["n"] = static_cast<std::size_t>(k.n());
    meta["tau"] = {t1, t2};
    meta["frame"] = frame_json(f);
    meta["max_cancellation_digits"] = diag.cancellation_digits;
    meta["precision_used"] = precision_name(diag.used);
    meta["bits"] = diag.bits;
    out.finish(meta);
    return kOk;
}

int run_limit_kernel(const Common& c) {
    if (c.regime != "airy" && c.regime != "pearcey") throw DomainError("--regime must be airy or pearcey");
    const auto [t1, t2] = tau_pair(c.tau);
    const auto us = parse_grid(c.grid.empty() ? "-2:2:9" : c.grid);
    const auto m = c.regime == "airy" ? airy_kernel_grid(t1, t2, us, us) : pearcey_kernel_grid(t1, t2, us, us);
    Output out(c.out);
    write_matrix_csv(out.stream(), us, us, m);
    auto meta = base_meta("limit-kernel", c, nullptr);
    meta["regime"] = c.regime;
    meta["tau"] = {t1, t2};
    out.finish(meta);
    return kOk;
}

int run_converge(const Common& c) {
    const auto s = load_setup(c.measure);
    const auto f = frame_for(s, c.regime);
    const auto ns = parse_counts(c.n.empty() ? "50,100,200" : c.n);
    const auto tv = parse_values(c.tau.empty() ? "0,0" : c.tau, "tau list");
    if (tv.size() % 2) throw DomainError("--tau is read as tau1,tau2 pairs");
    std::vector<std::pair<double, double>> taus;
    for (std::size_t i = 0; i < tv.size(); i += 2) taus.emplace_back(tv[i], tv[i + 1]);
    const auto grid = parse_grid(c.grid.empty() ? "-2:2:9" : c.grid);
    const auto rep = converge_sweep([&](std::size_t n) { return initial_for(s, n); }, f, ns, taus, grid,
                                    precision_for(c, &s));

    json rows = json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"n", r.n},
                        {"max_abs_error", r.max_abs_error},
                        {"at", {{"tau1", r.tau1}, {"tau2", r.tau2}, {"u", r.u}, {"v", r.v}}},
                        {"cancellation_digits", r.cancellation_digits}});
    json verdict = {{"decreasing", rep.decreasing ? json(*rep.decreasing) : json(nullptr)},
                    {"fitted_rate", rep.fitted_rate ? json(*rep.fitted_rate) : json(nullptr)},
                    {"regime", regime_name(f.regime)},
                    {"rows", rows}};
    auto meta = base_meta("converge", c, &s);
    meta["frame"] = frame_json(f);
    if (c.out.empty()) {
        emit_json("", verdict, meta);
        return kOk;
    }
    Output out(c.out);
    auto& os = out.stream();
    os.precision(17);
    os << "n,max_abs_error\n";
    for (const auto& r : rep.rows) os << r.n << ',' << r.max_abs_error << '\n';
    out.finish(meta);
    write_json_file(c.out + ".verdict.json", verdict);
    return kOk;
}

int run_fredholm(const Common& c, const std::string& problem, std::size_t q) {
    json spec;
    {
        std::ifstream in(problem);
        if (!in) throw IoError("cannot open problem " + problem);
        try {
            spec = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(problem + ": " + e.what());
        }
    }
    FredholmProblem p;
    std::optional<Setup> s;
    try {
        p.taus = spec.at("taus").get<std::vector<double>>();
        p.lower = spec.at("lower").get<std::vector<double>>();
        if (spec.contains("upper"))
            for (const auto& u : spec["upper"]) p.upper.push_back(u.is_null() ? kInf : u.get<double>());
        if (q == 0) q = spec.value("q", std::size_t{64});
        const std::string source = spec.value("source", std::string("airy"));
        if (source == "finite") {
            if (c.measure.empty()) throw DomainError("a finite source needs --measure");
            s = load_setup(c.measure);
            const std::size_t n = spec.contains("n") ? spec["n"].get<std::size_t>() : single_n(c);
            const auto f = frame_for(*s, c.regime);
            if (!f.airy()) throw DomainError("finite Fredholm windows need an Airy frame");
            auto k = std::make_shared<RescaledKernel>(initial_for(*s, n), f, precision_for(c, &*s));
            if (p.upper.empty()) p.upper.assign(p.taus.size(), f.scale * std::pow(k->n(), f.eps));
            p.source = KernelSource::finite(std::move(k));
        } else if (source != "airy") {
            throw ConfigError("unknown source '" + source + "' (airy, finite)");
        }
    } catch (const json::exception& e) {
        throw ConfigError(problem + ": " + e.what());
    }
    if (p.upper.empty()) p.upper.assign(p.taus.size(), kInf);
    p.q = q;
    const double value = fredholm_det(p);
    p.q = 2 * q;
    const double doubled = fredholm_det(p);
    const double delta = std::abs(doubled - value);
    json body = {{"value", value}, {"q", q}, {"value_2q", doubled}, {"self_convergence_delta", delta}};
    emit_json(c.out, body, base_meta("fredholm", c, s ? &*s : nullptr));
    if (delta >= 1e-7)
        throw CheckFailed("Nystrom self-convergence delta " + std::to_string(delta) + " is not below 1e-7");
    return kOk;
}

int run_tw2(const Common& c, std::size_t q) {
    const auto as = parse_grid(c.grid.empty() ? "-5:2:71" : c.grid);
    Output out(c.out);
    auto& os = out.stream();
    os.precision(17);
    os << "a,F2\n";
    double prev = -kInf;
    bool monotone = true;
    for (double a : as) {
        const double f = tw2_cdf(a, q);
        if (f < prev - 1e-12) monotone = false;
        prev = f;
        os << a << ',' << f << '\n';
    }
    auto meta = base_meta("tw2", c, nullptr);
    meta["q"] = q;
    out.finish(meta);
    if (!std::is_sorted(as.begin(), as.end())) return kOk;
    if (!monotone) throw CheckFailed("F2 column is not monotone");
    return kOk;
}

int run_simulate(const Common& c, const SimulateArgs& a) {
    const auto s = load_setup(c.measure);
    if (c.out.empty()) throw DomainError("simulate needs --out");
    const auto init = initial_for(s, single_n(c));
    std::vector<double> times;
    json taus = nullptr;
    if (!a.times.empty() && !c.tau.empty()) throw DomainError("give either --times or --tau, not both");
    if (!a.times.empty()) {
        times = parse_values(a.times, "time list");
    } else {
        if (c.tau.empty()) throw DomainError("simulate needs --times or --tau");
        const auto tv = parse_values(c.tau, "tau list");
        times = frame_times(frame_for(s, c.regime), init.size(), tv);
        taus = tv;
    }
    Common cc = c;
    if (!cc.seed) cc.seed = static_cast<std::uint64_t>(s.cfg.get_int_or("sim", "seed", 1));
    PathEnsemble e;
    if (a.sampler == "matrix") {
        e = sample_matrix(init, times, a.replicas, *cc.seed);
    } else if (a.sampler == "euler") {
        double dt = a.dt;
        if (dt <= 0.0) {
            double gap = kInf;
            for (std::size_t i = 1; i < init.size(); ++i) gap = std::min(gap, init[i] - init[i - 1]);
            dt = std::isfinite(gap) ? 1e-4 * gap * gap : 1e-3;
        }
        e = euler_sde(init, times, dt, a.replicas, *cc.seed);
    } else {
        throw DomainError("unknown sampler '" + a.sampler + "' (matrix, euler)");
    }
    const std::string fmt =
        !a.format.empty() ? a.format
                          : (c.out.size() > 4 && c.out.compare(c.out.size() - 4, 4, ".csv") == 0 ? "csv" : "binary");
    if (fmt != "csv" && fmt != "binary") throw DomainError("--format must be csv or binary");
    Output out(c.out, fmt == "binary");
    if (fmt == "csv") write_ensemble_csv(out.stream(), e);
    else write_ensemble(out.stream(), e);
    auto meta = base_meta("simulate", cc, &s);
    meta["sampler"] = sampler_name(e.sampler);
    meta["format"] = fmt;
    meta["n"] = e.n;
    meta["replicas"] = e.replicas;
    meta["times"] = e.times;
    meta["tau"] = taus;
    if (e.sampler == Sampler::Euler) {
        meta["steps"] = e.steps;
        meta["collisions"] = e.collisions;
    }
    out.finish(meta);
    return kOk;
}

int run_gap(const Common& c, const GapArgs& a) {
    const auto s = load_setup(c.measure);
    const auto f = frame_for(s, c.regime);
    const auto e = load_ensemble(a.ensemble);
    const auto taus = parse_values(c.tau.empty() ? "0" : c.tau, "tau list");
    const double eps = a.eps >= 0.0 ? a.eps : f.eps;
    const auto p = meso_gap_frequency(e, f, eps, a.eps_prime, taus);
    json body = proportion_json(p);
    body["eps"] = eps;
    body["eps_prime"] = a.eps_prime;
    body["tau"] = taus;
    body["n"] = e.n;
    body["regime"] = regime_name(f.regime);
    body["diagnostic_only"] = !f.airy();
    Common cc = c;
    cc.seed = e.seed;
    auto meta = base_meta("gap", cc, &s);
    meta["ensemble"] = a.ensemble;
    emit_json(c.out, body, meta);
    return kOk;
}

int run_xi(const Common& c, const GapArgs& a) {
    const auto s = load_setup(c.measure);
    const auto f = frame_for(s, c.regime);
    const auto e = load_ensemble(a.ensemble);
    const auto taus = parse_values(c.tau.empty() ? "0" : c.tau, "tau list");
    if (taus.size() > 2) throw DomainError("xi takes one or two tau values");
    const double eps = a.eps >= 0.0 ? a.eps : f.eps;
    const auto at = parse_values(a.at, "threshold list");

    std::vector<XiSample> xs;
    for (double tau : taus) xs.push_back(xi_statistic(e, f, eps, tau));
    // Replicas with a value at every tau.
    std::map<std::size_t, std::vector<double>> by_replica;
    for (std::size_t j = 0; j < xs.size(); ++j)
        for (std::size_t i = 0; i < xs[j].values.size(); ++i) by_replica[xs[j].replicas[i]].push_back(xs[j].values[i]);
    std::vector<std::vector<double>> complete;
    for (auto& [r, v] : by_replica)
        if (v.size() == taus.size()) complete.push_back(v);
    if (complete.empty()) throw DomainError("no replica has a particle below the cut at every tau");

    json rows = json::array();
    double worst = 0.0;
    for (double thr : at) {
        std::size_t hits = 0;
        for (const auto& v : complete)
            hits += std::all_of(v.begin(), v.end(), [thr](double x) { return x <= thr; });
        const auto p = stats::wilson(hits, complete.size());
        // The process seen along the critical path is the stationary Airy2
        // process with thresholds shifted by tau^2.
        std::vector<double> shifted;
        for (double tau : taus) shifted.push_back(thr + tau * tau);
        const double limit = airy2_fdd(taus, shifted);
        worst = std::max(worst, std::abs(p.value - limit));
        json row = proportion_json(p);
        row["a"] = thr;
        row["limit"] = limit;
        row["deviation"] = std::abs(p.value - limit);
        rows.push_back(row);
    }
    std::size_t missing = 0;
    for (const auto& x : xs) missing += x.missing;
    json body = {{"tau", taus},     {"eps", eps},           {"n", e.n},
                 {"replicas", complete.size()}, {"missing", missing}, {"thresholds", rows},
                 {"max_deviation", worst}};
    Common cc = c;
    cc.seed = e.seed;
    auto meta = base_meta("xi", cc, &s);
    meta["ensemble"] = a.ensemble;
    emit_json(c.out, body, meta);
    if (!a.values_out.empty()) {
        Output vo(a.values_out);
        auto& os = vo.stream();
        os.precision(17);
        os << "replica,tau,xi\n";
        for (std::size_t j = 0; j < xs.size(); ++j)
            for (std::size_t i = 0; i < xs[j].values.size(); ++i)
                os << xs[j].replicas[i] << ',' << taus[j] << ',' << xs[j].values[i] << '\n';
        vo.finish(meta);
    }
    return kOk;
}

} // namespace nibm::cli
