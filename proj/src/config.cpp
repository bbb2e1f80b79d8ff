#include "ovd/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace ovd {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
    }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        size_t hash = val.find('#');
        if (hash != std::string::npos) val = trim(val.substr(0, hash));
        std::string full = section.empty() ? key : section + "." + key;

        if (full == "problem.nonlinearity")
            cfg.nonlinearity = val;
        else if (full == "problem.param")
            cfg.param = to_double(full, val);
        else if (full == "problem.table_f")
            cfg.table_f = val;
        else if (full == "problem.table_fp")
            cfg.table_fp = val;
        else if (full == "problem.dimension")
            cfg.dimension = to_int(full, val);
        else if (full == "shooting.a_lo")
            cfg.a_lo = to_double(full, val);
        else if (full == "shooting.a_hi")
            cfg.a_hi = to_double(full, val);
        else if (full == "shooting.scan_points")
            cfg.scan_points = to_int(full, val);
        else if (full == "shooting.bracket_index")
            cfg.bracket_index = to_int(full, val);
        else if (full == "grids.radial_nodes")
            cfg.radial_nodes = to_int(full, val);
        else if (full == "grids.spectra_nodes")
            cfg.spectra_nodes = to_int(full, val);
        else if (full == "grids.mode_cells")
            cfg.mode_cells = to_int(full, val);
        else if (full == "grids.field_radial_cells")
            cfg.field_radial_cells = to_int(full, val);
        else if (full == "grids.t_modes")
            cfg.t_modes = to_int(full, val);
        else if (full == "tolerances.assumption_tol")
            cfg.assumption_tol = to_double(full, val);
        else if (full == "tolerances.newton_tol")
            cfg.newton_tol = to_double(full, val);
        else if (full == "sigma.T_min")
            cfg.T_min = to_double(full, val);
        else if (full == "sigma.T_max")
            cfg.T_max = to_double(full, val);
        else if (full == "sigma.T_samples")
            cfg.T_samples = to_int(full, val);
        else if (full == "sigma.k_max")
            cfg.k_max = to_int(full, val);
        else if (full == "branch.s_max")
            cfg.s_max = to_double(full, val);
        else if (full == "branch.s_steps")
            cfg.s_steps = to_int(full, val);
        else if (full == "branch.modes")
            cfg.branch_modes = to_int(full, val);
        else if (full == "branch.dump_fields")
            cfg.dump_fields = (val == "true" || val == "1" || val == "yes");
        else if (full == "output.directory")
            cfg.out_dir = val;
        else if (full == "output.threads")
            cfg.threads = to_int(full, val);
        else
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                              full + "'");
    }
    validate_config(cfg);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void validate_config(const RunConfig& cfg) {
    if (cfg.dimension < 1) throw ConfigError("config: dimension must be >= 1");
    if (cfg.assumption_tol <= 0 || cfg.newton_tol <= 0)
        throw ConfigError("config: tolerances must be positive");
    if (cfg.radial_nodes < 9) throw ConfigError("config: radial_nodes too small");
    if (cfg.spectra_nodes < 9) throw ConfigError("config: spectra_nodes too small");
    if (cfg.mode_cells < 8) throw ConfigError("config: mode_cells too small");
    if (cfg.field_radial_cells < 8) throw ConfigError("config: field_radial_cells too small");
    if (cfg.t_modes < 2) throw ConfigError("config: t_modes too small");
    if (cfg.branch_modes < 1 || cfg.branch_modes > cfg.t_modes)
        throw ConfigError("config: branch modes must lie in [1, t_modes]");
    if (!(cfg.a_lo < cfg.a_hi)) throw ConfigError("config: need a_lo < a_hi");
    if (cfg.scan_points < 2) throw ConfigError("config: scan_points must be >= 2");
    if (cfg.T_samples < 0) throw ConfigError("config: T_samples must be >= 0");
    if (cfg.k_max < 1) throw ConfigError("config: k_max must be >= 1");
    if (cfg.s_max <= 0) throw ConfigError("config: s_max must be positive");
    if (cfg.s_steps < 1) throw ConfigError("config: s_steps must be >= 1");
    if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");
    const std::string& k = cfg.nonlinearity;
    if (k != "constant" && k != "power_minus_linear" && k != "gelfand" && k != "linear" &&
        k != "tabulated")
        throw ConfigError("config: unknown nonlinearity kind '" + k + "'");
    if (k == "tabulated" && (cfg.table_f.empty() || cfg.table_fp.empty()))
        throw ConfigError("config: tabulated kind needs table_f and table_fp paths");
}

NonlinearitySpec build_nonlinearity(const RunConfig& cfg) {
    const std::string& k = cfg.nonlinearity;
    if (k == "constant") return NonlinearitySpec::constant(cfg.param);
    if (k == "power_minus_linear") return NonlinearitySpec::power_minus_linear(cfg.param);
    if (k == "gelfand") return NonlinearitySpec::gelfand(cfg.param);
    if (k == "linear") return NonlinearitySpec::linear(cfg.param);
    return NonlinearitySpec::tabulated_from_csv(cfg.table_f, cfg.table_fp);
}

}  // namespace ovd
