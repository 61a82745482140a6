#include "cli.hpp"

#include "nibm/workers.hpp"

#include <iostream>

using namespace nibm;
using namespace nibm::cli;

namespace {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const CheckFailed*>(&e)) return kCheck;
    if (dynamic_cast<const ConfigError*>(&e)) return kConfig;
    if (dynamic_cast<const IoError*>(&e)) return kIo;
    if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const RangeError*>(&e) ||
        dynamic_cast<const PoleError*>(&e))
        return kDomain;
    if (dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const PrecisionError*>(&e)) return kNumerical;
    return kInternal;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for non-intersecting Brownian motions"};
    app.require_subcommand(1);
    app.set_version_flag("--version", NIBM_VERSION);

    Common c;
    double t = 0;
    std::string problem;
    std::size_t fq = 0, tq = 64;
    SimulateArgs sim;
    GapArgs gap;

    auto seed_opt = [&](CLI::App* s) {
        s->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { c.seed = v; }, "RNG seed");
    };
    auto precision_opt = [&](CLI::App* s) {
        s->add_option("--precision", c.precision, "double, compensated, extended or auto");
    };

    auto* density = app.add_subcommand("density", "evolved density on a grid, CSV x,psi_t");
    add_measure(*density, c);
    density->add_option("--t", t, "time")->required();
    density->add_option("--grid", c.grid, "x grid, lo:hi:count or a comma list");
    add_common(*density, c);

    auto* critical = app.add_subcommand("critical", "critical point and frame constants, JSON");
    add_measure(*critical, c);
    critical->add_option("--regime", c.regime, "expected regime (airy, pearcey)");
    add_common(*critical, c);

    auto* kernel = app.add_subcommand("kernel", "rescaled finite-n kernel, CSV u,v,value");
    add_measure(*kernel, c);
    kernel->add_option("--n", c.n, "particle count");
    kernel->add_option("--tau", c.tau, "tau1,tau2 (default 0,0)");
    kernel->add_option("--grid", c.grid, "u and v grid (default -2:2:9)");
    kernel->add_option("--regime", c.regime, "expected regime (airy, pearcey)");
    precision_opt(kernel);
    add_common(*kernel, c);

    auto* limit = app.add_subcommand("limit-kernel", "extended Airy or Pearcey kernel, CSV u,v,value");
    limit->add_option("--regime", c.regime, "airy or pearcey")->required();
    limit->add_option("--tau", c.tau, "tau1,tau2 (default 0,0)");
    limit->add_option("--grid", c.grid, "u and v grid (default -2:2:9)");
    add_common(*limit, c);

    auto* converge = app.add_subcommand("converge", "finite-n kernel against its limit over a list of n");
    add_measure(*converge, c);
    converge->add_option("--n", c.n, "strictly increasing n list (default 50,100,200)");
    converge->add_option("--tau", c.tau, "tau1,tau2 pairs, flattened (default 0,0)");
    converge->add_option("--grid", c.grid, "u and v grid (default -2:2:9)");
    converge->add_option("--regime", c.regime, "expected regime (airy, pearcey)");
    precision_opt(converge);
    add_common(*converge, c);

    auto* fredholm = app.add_subcommand("fredholm", "Fredholm determinant of a JSON problem");
    fredholm->add_option("--problem", problem, "problem JSON")->required()->check(CLI::ExistingFile);
    add_measure(*fredholm, c, false);
    fredholm->add_option("--n", c.n, "particle count for a finite source");
    fredholm->add_option("--q", fq, "nodes per interval (overrides the problem)");
    precision_opt(fredholm);
    add_common(*fredholm, c);

    auto* tw2 = app.add_subcommand("tw2", "GUE Tracy-Widom table, CSV a,F2");
    tw2->add_option("--grid", c.grid, "a grid (default -5:2:71)");
    tw2->add_option("--q", tq, "Nystrom nodes");
    add_common(*tw2, c);

    auto* simulate = app.add_subcommand("simulate", "sample path ensembles");
    add_measure(*simulate, c);
    simulate->add_option("--n", c.n, "particle count");
    simulate->add_option("--times", sim.times, "observation times");
    simulate->add_option("--tau", c.tau, "frame times tau (instead of --times)");
    simulate->add_option("--replicas", sim.replicas, "replicas");
    simulate->add_option("--sampler", sim.sampler, "matrix or euler");
    simulate->add_option("--dt", sim.dt, "Euler step (default 1e-4 times the smallest gap squared)");
    simulate->add_option("--format", sim.format, "binary or csv (default from the extension)");
    simulate->add_option("--regime", c.regime, "expected regime (airy, pearcey)");
    seed_opt(simulate);
    add_common(*simulate, c);

    auto* gapc = app.add_subcommand("gap", "mesoscopic gap frequency of an ensemble, JSON");
    auto* xi = app.add_subcommand("xi", "rescaled top-particle statistic against Airy2, JSON");
    for (auto* s : {gapc, xi}) {
        add_measure(*s, c);
        s->add_option("--ensemble", gap.ensemble, "binary ensemble dump")->required();
        s->add_option("--tau", c.tau, "tau list (default 0)");
        s->add_option("--eps", gap.eps, "mesoscopic exponent (default from the frame)");
        s->add_option("--regime", c.regime, "expected regime (airy, pearcey)");
        add_common(*s, c);
    }
    gapc->add_option("--eps-prime", gap.eps_prime, "window exponent");
    xi->add_option("--at", gap.at, "thresholds");
    xi->add_option("--values-out", gap.values_out, "CSV replica,tau,xi");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        set_workers(c.workers);
        if (*density) return run_density(c, t);
        if (*critical) return run_critical(c);
        if (*kernel) return run_kernel(c);
        if (*limit) return run_limit_kernel(c);
        if (*converge) return run_converge(c);
        if (*fredholm) return run_fredholm(c, problem, fq);
        if (*tw2) return run_tw2(c, tq);
        if (*simulate) return run_simulate(c, sim);
        if (*gapc) return run_gap(c, gap);
        if (*xi) return run_xi(c, gap);
    } catch (const std::exception& e) {
        std::cerr << "nibm: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kUsage;
}
