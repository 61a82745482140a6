#pragma once

#include "nibm/config.hpp"
#include "nibm/error.hpp"
#include "nibm/free_conv.hpp"
#include "nibm/kernels_finite.hpp"

#include <json.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace nibm::cli {

using json = nlohmann::json;

// Stable process exit codes.
enum Exit : int {
    kOk = 0,
    kUsage = 1,      // bad flags, unknown subcommand
    kConfig = 2,     // malformed config or problem file
    kIo = 3,         // unreadable input, unwritable output
    kDomain = 4,     // arguments outside an operation's domain
    kNumerical = 5,  // quadrature, root finder or precision failure
    kCheck = 6,      // outputs written but a consistency check failed
    kInternal = 7,   // anything else
};

// Raised after all outputs are written when a self-check did not pass.
class CheckFailed : public Error {
public:
    using Error::Error;
};

// Flags shared by the subcommands; each subcommand registers the ones it uses.
struct Common {
    std::string measure;   // config path
    std::string n;         // comma list
    std::string tau;       // comma list
    std::string grid;      // "lo:hi:count" or comma list
    std::optional<std::uint64_t> seed;
    std::string precision; // empty: config [kernel] precision, else auto
    unsigned workers = 0;
    std::string out;       // empty: stdout
    std::string regime;    // airy | pearcey, optional override
};

struct Setup {
    Config cfg;
    Measure measure;
    std::uint64_t config_hash = 0;
};

Setup load_setup(const std::string& path);
CriticalFrame frame_for(const Setup& s, const std::string& regime_override);
// Starting atoms for n particles: quantiles of a density, or the configured
// atoms themselves (n must then match, or be 0).
EmpiricalMeasure initial_for(const Setup& s, std::size_t n);
Precision precision_for(const Common& c, const Setup* s);

std::vector<double> parse_grid(const std::string& spec);
std::vector<std::size_t> parse_counts(const std::string& text);
std::vector<double> parse_values(const std::string& text, const char* what);

// Output file (or stdout) plus the metadata sidecar `<out>.meta.json`.
class Output {
public:
    explicit Output(const std::string& path, bool binary = false);
    ~Output();
    std::ostream& stream();
    // Flushes, checks the stream and writes the sidecar.
    void finish(const json& meta);
    bool to_file() const { return !path_.empty(); }

private:
    std::string path_;
    std::unique_ptr<std::ostream> file_;
};

json base_meta(const std::string& command, const Common& c, const Setup* s);
json frame_json(const CriticalFrame& f);
void write_json_file(const std::string& path, const json& j);
void emit_json(const std::string& out, const json& body, const json& meta);

void add_measure(CLI::App& app, Common& c, bool required = true);
void add_common(CLI::App& app, Common& c);

int run_density(const Common& c, double t);
int run_critical(const Common& c);
int run_kernel(const Common& c);
int run_limit_kernel(const Common& c);
int run_converge(const Common& c);
int run_fredholm(const Common& c, const std::string& problem, std::size_t q);
int run_tw2(const Common& c, std::size_t q);

struct SimulateArgs {
    std::string times;
    std::size_t replicas = 100;
    std::string sampler = "matrix";
    double dt = 0;
    std::string format;
};
int run_simulate(const Common& c, const SimulateArgs& a);

struct GapArgs {
    std::string ensemble;
    double eps = -1, eps_prime = 0.02;
    std::string at = "-3,-2,-1,0,1";
    std::string values_out;
};
int run_gap(const Common& c, const GapArgs& a);
int run_xi(const Common& c, const GapArgs& a);

} // namespace nibm::cli
