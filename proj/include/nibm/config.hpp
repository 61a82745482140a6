#pragma once

#include "nibm/measures.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nibm {

// Sectioned key = value text. Lines starting with '#' or ';' are comments.
// Keys outside any section land in section "".
//
//   [measure]
//   kind = shifted_power      # power | shifted_power | uniform | two_atoms | atoms | custom_table
//   support = -1, 1
//   x_star = 0.2
//   kappa = 4
//
// custom_table reads `table = file.csv` (header x,psi); atoms takes either
// `atoms = 0.1, 0.5, ...` or `atoms_file = file.csv` (header index,position);
// two_atoms takes `a = 0.5` for atoms at -a and +a.
class Config {
public:
    static Config parse(const std::string& text, std::filesystem::path base_dir = {});
    static Config load(const std::filesystem::path& file);

    // Canonical text: sections and keys sorted, one space around '='.
    std::string serialize() const;
    // FNV-1a over the canonical text.
    std::uint64_t hash() const;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key, const std::string& def) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key, double def) const;
    long get_int_or(const std::string& section, const std::string& key, long def) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value);

    const std::filesystem::path& base_dir() const { return base_; }

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
    std::filesystem::path base_;
};

std::vector<double> parse_list(const std::string& text);

// Measure described by the [measure] section.
Measure build_measure(const Config& cfg);

// kappa and x* of a measure section (needed for empirical kinds, where they
// are not part of the measure itself).
struct CriticalHint {
    std::optional<double> x_star;
    std::optional<double> kappa;
};
CriticalHint critical_hint(const Config& cfg);

std::uint64_t fnv1a(const std::string& bytes);

} // namespace nibm
