#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spinlab/protocol.hpp"

namespace spinlab {

/// Config-file problem; the message carries file:line context.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Experiment {
    sensitivity_vs_chit,
    sensitivity_vs_sigma,
    maxcfi_vs_sigma,
    histograms,
    fixed_T,
    verify_theorem,
};

inline const char* experiment_name(Experiment e) {
    switch (e) {
        case Experiment::sensitivity_vs_chit: return "sensitivity-vs-chit";
        case Experiment::sensitivity_vs_sigma: return "sensitivity-vs-sigma";
        case Experiment::maxcfi_vs_sigma: return "maxcfi-vs-sigma";
        case Experiment::histograms: return "histograms";
        case Experiment::fixed_T: return "fixed-T";
        case Experiment::verify_theorem: return "verify-theorem";
    }
    return "?";
}

inline std::optional<Experiment> parse_experiment(const std::string& s) {
    for (Experiment e :
         {Experiment::sensitivity_vs_chit, Experiment::sensitivity_vs_sigma,
          Experiment::maxcfi_vs_sigma, Experiment::histograms, Experiment::fixed_T,
          Experiment::verify_theorem})
        if (s == experiment_name(e)) return e;
    return std::nullopt;
}

/// Declarative scan description, parsed from flat `key = value` text with
/// dotted keys. Grids accept `start:step:stop` ranges or comma lists.
struct ScanConfig {
    Experiment experiment = Experiment::maxcfi_vs_sigma;
    int n = 100;
    std::vector<ProtocolKind> protocols = {ProtocolKind::trivial, ProtocolKind::echo,
                                           ProtocolKind::pseudo_echo};
    double chi_t = 0.1;
    double chi_t2 = 0.3;   // asymmetric readout strength
    double sigma = 0.0;    // fixed sigma for chi_t scans / histograms
    std::vector<double> sigma_grid = {0.0};
    std::vector<double> chit_grid;
    std::vector<double> T_list;
    Axis signal = Axis::z;
    int t1_points = 101;
    int phi_points = 721;
    std::uint64_t seed = 1;
    int cases = 200;
    bool emit_curve = false;
    std::string out;
    std::string format = "csv";

    // raw keys as parsed, for the metadata echo / round trip
    std::vector<std::pair<std::string, std::string>> raw;
    std::vector<std::string> defaulted;  // documented defaults in metadata
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& s, const std::string& ctx) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v)) throw std::invalid_argument("not finite");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(ctx + ": expected a finite number, got '" + s + "'");
    }
}

/// `start:step:stop` (inclusive stop, within 1e-9*step) or a comma list.
inline std::vector<double> parse_grid(const std::string& s, const std::string& ctx) {
    std::vector<double> out;
    const auto colon1 = s.find(':');
    if (colon1 != std::string::npos) {
        const auto colon2 = s.find(':', colon1 + 1);
        if (colon2 == std::string::npos)
            throw ConfigError(ctx + ": range must be start:step:stop");
        const double start = parse_double(trim(s.substr(0, colon1)), ctx);
        const double step = parse_double(trim(s.substr(colon1 + 1, colon2 - colon1 - 1)), ctx);
        const double stop = parse_double(trim(s.substr(colon2 + 1)), ctx);
        if (step <= 0) throw ConfigError(ctx + ": range step must be positive");
        if (stop < start - 1e-12) throw ConfigError(ctx + ": range stop before start");
        for (double v = start; v <= stop + 1e-9 * step; v += step) out.push_back(v);
        return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(item, ctx));
    }
    if (out.empty()) throw ConfigError(ctx + ": empty grid");
    return out;
}

inline Axis parse_signal(const std::string& s, const std::string& ctx) {
    if (s == "Jx" || s == "jx" || s == "x") return Axis::x;
    if (s == "Jy" || s == "jy" || s == "y") return Axis::y;
    if (s == "Jz" || s == "jz" || s == "z") return Axis::z;
    throw ConfigError(ctx + ": signal must be Jx, Jy or Jz");
}

} // namespace detail

inline void apply_config_key(ScanConfig& cfg, const std::string& key, const std::string& value,
                             const std::string& ctx) {
    using detail::parse_double;
    using detail::parse_grid;
    cfg.raw.emplace_back(key, value);
    if (key == "experiment") {
        auto e = parse_experiment(value);
        if (!e) throw ConfigError(ctx + ": unknown experiment '" + value + "'");
        cfg.experiment = *e;
    } else if (key == "n") {
        cfg.n = static_cast<int>(parse_double(value, ctx));
        if (cfg.n < 2) throw ConfigError(ctx + ": n must be >= 2");
    } else if (key == "protocols") {
        cfg.protocols.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (item.empty()) continue;
            auto k = parse_protocol_kind(item);
            if (!k) throw ConfigError(ctx + ": unknown protocol kind '" + item + "'");
            cfg.protocols.push_back(*k);
        }
        if (cfg.protocols.empty()) throw ConfigError(ctx + ": empty protocol list");
    } else if (key == "chi_t") {
        cfg.chi_t = parse_double(value, ctx);
        if (cfg.chi_t < 0) throw ConfigError(ctx + ": chi_t must be >= 0");
    } else if (key == "chi_t2") {
        cfg.chi_t2 = parse_double(value, ctx);
        if (cfg.chi_t2 < 0) throw ConfigError(ctx + ": chi_t2 must be >= 0");
    } else if (key == "sigma") {
        cfg.sigma = parse_double(value, ctx);
        if (cfg.sigma < 0) throw ConfigError(ctx + ": sigma must be >= 0");
    } else if (key == "scan.sigma") {
        cfg.sigma_grid = parse_grid(value, ctx);
        for (double s : cfg.sigma_grid)
            if (s < 0) throw ConfigError(ctx + ": sigma grid must be >= 0");
    } else if (key == "scan.chi_t") {
        cfg.chit_grid = parse_grid(value, ctx);
        for (double s : cfg.chit_grid)
            if (s < 0) throw ConfigError(ctx + ": chi_t grid must be >= 0");
    } else if (key == "scan.T") {
        cfg.T_list = parse_grid(value, ctx);
        for (double s : cfg.T_list)
            if (s <= 0) throw ConfigError(ctx + ": T values must be positive");
    } else if (key == "signal") {
        cfg.signal = detail::parse_signal(value, ctx);
    } else if (key == "t1.points") {
        cfg.t1_points = static_cast<int>(parse_double(value, ctx));
        if (cfg.t1_points < 2) throw ConfigError(ctx + ": t1.points must be >= 2");
    } else if (key == "phi.points") {
        cfg.phi_points = static_cast<int>(parse_double(value, ctx));
        if (cfg.phi_points < 3) throw ConfigError(ctx + ": phi.points must be >= 3");
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_double(value, ctx));
    } else if (key == "cases") {
        cfg.cases = static_cast<int>(parse_double(value, ctx));
        if (cfg.cases < 1) throw ConfigError(ctx + ": cases must be >= 1");
    } else if (key == "emit.curve") {
        if (value == "true" || value == "1")
            cfg.emit_curve = true;
        else if (value == "false" || value == "0")
            cfg.emit_curve = false;
        else
            throw ConfigError(ctx + ": emit.curve must be true or false");
    } else if (key == "out") {
        cfg.out = value;
    } else if (key == "format") {
        if (value != "csv" && value != "json")
            throw ConfigError(ctx + ": format must be csv or json");
        cfg.format = value;
    } else {
        throw ConfigError(ctx + ": unknown key '" + key + "'");
    }
}

inline ScanConfig parse_config_text(const std::string& text, const std::string& filename) {
    ScanConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    bool saw_experiment = false, saw_n = false;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string ctx = filename + ":" + std::to_string(lineno);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(ctx + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(ctx + ": empty key");
        if (value.empty()) throw ConfigError(ctx + ": empty value for '" + key + "'");
        if (key == "experiment") saw_experiment = true;
        if (key == "n") saw_n = true;
        apply_config_key(cfg, key, value, ctx);
    }
    if (!saw_experiment) cfg.defaulted.push_back("experiment");
    if (!saw_n) cfg.defaulted.push_back("n");
    return cfg;
}

inline ScanConfig parse_config_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str(), path);
}

/// Per-experiment grid requirements; call after CLI overrides are applied.
inline void validate_config(const ScanConfig& cfg) {
    switch (cfg.experiment) {
        case Experiment::sensitivity_vs_chit:
            if (cfg.chit_grid.empty())
                throw ConfigError("sensitivity-vs-chit requires scan.chi_t");
            break;
        case Experiment::sensitivity_vs_sigma:
        case Experiment::maxcfi_vs_sigma:
            if (cfg.sigma_grid.empty()) throw ConfigError("experiment requires scan.sigma");
            break;
        case Experiment::histograms:
            for (ProtocolKind k : cfg.protocols)
                if (k != ProtocolKind::trivial && k != ProtocolKind::echo)
                    throw ConfigError("histograms supports only trivial and echo protocols");
            break;
        case Experiment::fixed_T:
            if (cfg.T_list.empty()) throw ConfigError("fixed-T requires scan.T");
            if (cfg.sigma_grid.empty()) throw ConfigError("fixed-T requires scan.sigma");
            break;
        case Experiment::verify_theorem:
            break;
    }
}

} // namespace spinlab
