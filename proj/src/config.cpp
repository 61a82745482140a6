#include "nibm/config.hpp"

#include "nibm/error.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace nibm {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double to_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError(what + ": expected a number, got '" + s + "'");
    }
    if (trim(s.substr(used)).size() != 0) throw ConfigError(what + ": trailing text in '" + s + "'");
    return v;
}

std::vector<std::pair<double, double>> read_table_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open density table " + file.string());
    std::string line;
    std::getline(in, line);
    if (trim(line) != "x,psi") throw ConfigError("density table " + file.string() + " must start with header x,psi");
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("density table row without comma: " + line);
        rows.emplace_back(to_double(line.substr(0, comma), "table x"), to_double(line.substr(comma + 1), "table psi"));
    }
    return rows;
}

} // namespace

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(to_double(item, "list entry"));
    }
    return out;
}

Config Config::parse(const std::string& text, std::filesystem::path base_dir) {
    Config c;
    c.base_ = std::move(base_dir);
    std::string section;
    std::stringstream ss(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            c.data_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        c.data_[section][key] = trim(line.substr(eq + 1));
    }
    return c;
}

Config Config::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open config " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), file.parent_path());
}

std::string Config::serialize() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [sec, kv] : data_) {
        if (!first) os << '\n';
        first = false;
        if (!sec.empty()) os << '[' << sec << "]\n";
        for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
    }
    return os.str();
}

std::uint64_t Config::hash() const { return fnv1a(serialize()); }

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = data_.find(section);
    return it != data_.end() && it->second.count(key);
}

std::string Config::get(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw ConfigError("missing key '" + key + "' in section [" + section + "]");
    return data_.at(section).at(key);
}

std::string Config::get_or(const std::string& section, const std::string& key, const std::string& def) const {
    return has(section, key) ? get(section, key) : def;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    return to_double(get(section, key), "[" + section + "] " + key);
}

double Config::get_double_or(const std::string& section, const std::string& key, double def) const {
    return has(section, key) ? get_double(section, key) : def;
}

long Config::get_int_or(const std::string& section, const std::string& key, long def) const {
    if (!has(section, key)) return def;
    const double v = get_double(section, key);
    if (v != static_cast<double>(static_cast<long>(v)))
        throw ConfigError("[" + section + "] " + key + " must be an integer");
    return static_cast<long>(v);
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key) const {
    return parse_list(get(section, key));
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    data_[section][key] = value;
}

Measure build_measure(const Config& cfg) {
    const std::string kind = cfg.get("measure", "kind");
    auto support = [&] {
        const auto s = cfg.get_list("measure", "support");
        if (s.size() != 2) throw ConfigError("[measure] support needs two numbers");
        return std::pair{s[0], s[1]};
    };
    try {
        if (kind == "power" || kind == "shifted_power") {
            const auto [a, b] = support();
            const double xs = cfg.get_double_or("measure", "x_star", kind == "power" ? 0.5 * (a + b) : 0.0);
            if (kind == "shifted_power" && !cfg.has("measure", "x_star"))
                throw ConfigError("[measure] shifted_power needs x_star");
            return DensitySpec::power(a, b, xs, cfg.get_double("measure", "kappa"));
        }
        if (kind == "uniform") {
            const auto [a, b] = support();
            return DensitySpec::uniform(a, b);
        }
        if (kind == "two_atoms") {
            const double a = cfg.get_double("measure", "a");
            return EmpiricalMeasure({-a, a});
        }
        if (kind == "atoms") {
            if (cfg.has("measure", "atoms_file")) {
                const auto file = cfg.base_dir() / cfg.get("measure", "atoms_file");
                std::ifstream in(file);
                if (!in) throw IoError("cannot open atoms file " + file.string());
                return read_atoms_csv(in);
            }
            return EmpiricalMeasure(cfg.get_list("measure", "atoms"));
        }
        if (kind == "custom_table") {
            const auto rows = read_table_csv(cfg.base_dir() / cfg.get("measure", "table"));
            std::vector<double> xs, ps;
            for (const auto& [x, p] : rows) {
                xs.push_back(x);
                ps.push_back(p);
            }
            return DensitySpec::table(std::move(xs), std::move(ps), cfg.get_double("measure", "x_star"),
                                      cfg.get_double("measure", "kappa"));
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("[measure] ") + e.what());
    }
    throw ConfigError("[measure] unknown kind '" + kind + "'");
}

CriticalHint critical_hint(const Config& cfg) {
    CriticalHint h;
    if (cfg.has("measure", "x_star")) h.x_star = cfg.get_double("measure", "x_star");
    if (cfg.has("measure", "kappa")) h.kappa = cfg.get_double("measure", "kappa");
    if (cfg.has("frame", "x_star")) h.x_star = cfg.get_double("frame", "x_star");
    if (cfg.has("frame", "kappa")) h.kappa = cfg.get_double("frame", "kappa");
    return h;
}

} // namespace nibm
