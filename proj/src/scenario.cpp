#include "gmfg/scenario.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "gmfg/errors.hpp"
#include "gmfg/report.hpp"

namespace gmfg {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct RawConfig {
    // section.key -> (value, line)
    std::map<std::string, std::pair<std::string, int>> entries;
    std::string path;

    bool has(const std::string& key) const { return entries.count(key) > 0; }

    std::string take(const std::string& key, const std::string& fallback) {
        auto it = entries.find(key);
        if (it == entries.end()) return fallback;
        std::string v = it->second.first;
        entries.erase(it);
        return v;
    }
};

RawConfig parse_raw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("config: cannot open '" + path + "'");
    RawConfig raw;
    raw.path = path;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw InvalidInput(path + ":" + std::to_string(line_no) +
                                   ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw InvalidInput(path + ":" + std::to_string(line_no) + ": empty section name");
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidInput(path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw InvalidInput(path + ":" + std::to_string(line_no) + ": empty key");
        }
        if (section.empty()) {
            throw InvalidInput(path + ":" + std::to_string(line_no) +
                               ": key outside of any [section]");
        }
        const std::string full = section + "." + key;
        if (raw.entries.count(full)) {
            throw InvalidInput(path + ":" + std::to_string(line_no) + ": duplicate key '" + full +
                               "'");
        }
        raw.entries[full] = {value, line_no};
    }
    return raw;
}

double parse_double(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw InvalidInput("config: key '" + key + "' is not a number: '" + value + "'");
    }
}

int parse_int(const std::string& value, const std::string& key) {
    const double v = parse_double(value, key);
    if (v != std::floor(v)) {
        throw InvalidInput("config: key '" + key + "' must be an integer");
    }
    return static_cast<int>(v);
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw InvalidInput("config: key '" + key + "' must be a boolean");
}

std::string resolve_path(const std::string& file, const std::string& config_path) {
    if (file.empty()) return file;
    std::filesystem::path p(file);
    if (p.is_absolute()) return file;
    return (std::filesystem::path(config_path).parent_path() / p).string();
}

} // namespace

DenseMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("matrix file: cannot open '" + path + "'");
    DenseMatrix m;
    if (!(in >> m.rows >> m.cols) || m.rows < 1 || m.cols < 1) {
        throw InvalidInput("matrix file '" + path + "': first line must be 'rows cols'");
    }
    m.values.resize(static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols));
    for (double& v : m.values) {
        if (!(in >> v)) {
            throw InvalidInput("matrix file '" + path + "': too few values");
        }
    }
    double extra;
    if (in >> extra) {
        throw InvalidInput("matrix file '" + path + "': too many values");
    }
    return m;
}

ScenarioConfig load_scenario(const std::string& path) {
    RawConfig raw = parse_raw(path);
    ScenarioConfig cfg;
    cfg.source_path = path;

    cfg.n = parse_int(raw.take("grid.n", "64"), "grid.n");
    cfg.T = parse_double(raw.take("time.T", "0.5"), "time.T");
    cfg.n_t = parse_int(raw.take("time.n_t", "200"), "time.n_t");
    cfg.M = parse_int(raw.take("clusters.M", "16"), "clusters.M");

    cfg.graphon_kind = raw.take("graphon.kind", "constant");
    cfg.graphon_p = parse_double(raw.take("graphon.p", "0.5"), "graphon.p");
    cfg.graphon_file = resolve_path(raw.take("graphon.file", ""), path);
    cfg.graphon_expr = raw.take("graphon.expr", "");
    cfg.graphon_bound = parse_double(raw.take("graphon.bound", "10"), "graphon.bound");

    cfg.ell2_expr = raw.take("cost.ell2", "cos(2*pi*(x - y))");
    cfg.ell2_file = resolve_path(raw.take("cost.ell2_file", ""), path);
    cfg.smoothness_bound =
        parse_double(raw.take("cost.smoothness_bound", "1e5"), "cost.smoothness_bound");

    cfg.drift_b = raw.take("drift.b", "0");

    cfg.m0_density = raw.take("m0.density", "1");
    cfg.m0_file = resolve_path(raw.take("m0.file", ""), path);

    cfg.lambda = parse_double(raw.take("picard.lambda", "0.5"), "picard.lambda");
    cfg.eps_rho = parse_double(raw.take("picard.eps_rho", "1e-6"), "picard.eps_rho");
    cfg.max_iter = parse_int(raw.take("picard.max_iter", "100"), "picard.max_iter");
    cfg.seed = raw.take("picard.seed", "from_m0");
    cfg.seed_file = resolve_path(raw.take("picard.seed_file", ""), path);

    cfg.mc_n_paths = parse_int(raw.take("mc.n_paths", "20000"), "mc.n_paths");
    cfg.mc_dt = parse_double(raw.take("mc.dt_mc", "0"), "mc.dt_mc");
    const std::string seed_text = raw.take("mc.rng_seed", "12345");
    try {
        cfg.mc_seed = std::stoull(seed_text);
    } catch (const std::exception&) {
        throw InvalidInput("config: key 'mc.rng_seed' must be a nonnegative integer");
    }
    cfg.mc_antithetic = parse_bool(raw.take("mc.antithetic", "true"), "mc.antithetic");

    cfg.output_dir = raw.take("output.dir", "out");

    if (!raw.entries.empty()) {
        const auto& [key, value] = *raw.entries.begin();
        throw InvalidInput(path + ":" + std::to_string(value.second) + ": unknown key '" + key +
                           "'");
    }

    // Validation, naming the offending key.
    if (cfg.n < 4) throw InvalidInput("config: grid.n must be at least 4");
    if (!(cfg.T > 0.0)) throw InvalidInput("config: time.T must be positive");
    if (cfg.n_t < 1) throw InvalidInput("config: time.n_t must be at least 1");
    if (cfg.M < 1) throw InvalidInput("config: clusters.M must be at least 1");
    if (cfg.graphon_kind != "constant" && cfg.graphon_kind != "uniform_attachment" &&
        cfg.graphon_kind != "piecewise_constant" && cfg.graphon_kind != "expression") {
        throw InvalidInput("config: graphon.kind '" + cfg.graphon_kind + "' is not recognized");
    }
    if (cfg.graphon_kind == "piecewise_constant" && cfg.graphon_file.empty()) {
        throw InvalidInput("config: graphon.kind = piecewise_constant requires graphon.file");
    }
    if (cfg.graphon_kind == "expression" && cfg.graphon_expr.empty()) {
        throw InvalidInput("config: graphon.kind = expression requires graphon.expr");
    }
    if (!(cfg.graphon_bound > 0.0)) {
        throw InvalidInput("config: graphon.bound must be positive");
    }
    if (!(cfg.smoothness_bound > 0.0)) {
        throw InvalidInput("config: cost.smoothness_bound must be positive");
    }
    if (!(cfg.lambda > 0.0) || cfg.lambda > 1.0) {
        throw InvalidInput("config: picard.lambda must lie in (0, 1]");
    }
    if (!(cfg.eps_rho > 0.0)) throw InvalidInput("config: picard.eps_rho must be positive");
    if (cfg.max_iter < 1) throw InvalidInput("config: picard.max_iter must be at least 1");
    if (cfg.seed != "from_m0" && cfg.seed != "uniform" && cfg.seed != "file") {
        throw InvalidInput("config: picard.seed must be from_m0, uniform or file");
    }
    if (cfg.seed == "file" && cfg.seed_file.empty()) {
        throw InvalidInput("config: picard.seed = file requires picard.seed_file");
    }
    if (cfg.mc_n_paths < 100) throw InvalidInput("config: mc.n_paths must be at least 100");
    if (cfg.mc_dt < 0.0) throw InvalidInput("config: mc.dt_mc must be nonnegative");
    if (cfg.output_dir.empty()) throw InvalidInput("config: output.dir must not be empty");
    return cfg;
}

namespace {

AlphaSpaceField density_from_file(const std::string& path, int M, int n) {
    // Accepts either the dense matrix format or an emitted mu.csv, in which
    // case the final time slice becomes the histogram.
    std::ifstream probe(path);
    if (!probe) throw InvalidInput("m0: cannot open '" + path + "'");
    std::string first;
    std::getline(probe, first);
    if (first.rfind("t,alpha,x,value", 0) == 0) {
        return read_csv_final_slice(path, M, n);
    }
    const DenseMatrix m = load_matrix(path);
    if (m.rows != M || m.cols != n) {
        throw InvalidInput("m0 file '" + path + "': expected " + std::to_string(M) + " x " +
                           std::to_string(n) + " values");
    }
    AlphaSpaceField f(M, n);
    f.data = m.values;
    return f;
}

} // namespace

Scenario build_scenario(const ScenarioConfig& cfg) {
    TorusGrid grid(cfg.n);
    AlphaGrid alpha(cfg.M);
    TimeGrid tgrid(cfg.T, cfg.n_t);

    Graphon graphon = Graphon::constant(cfg.graphon_p);
    if (cfg.graphon_kind == "uniform_attachment") {
        graphon = Graphon::uniform_attachment();
    } else if (cfg.graphon_kind == "piecewise_constant") {
        const DenseMatrix m = load_matrix(cfg.graphon_file);
        if (m.rows != m.cols) {
            throw InvalidInput("graphon.file: piecewise table must be square");
        }
        graphon = Graphon::piecewise_constant(m.values, m.rows);
    } else if (cfg.graphon_kind == "expression") {
        graphon = Graphon::expression(cfg.graphon_expr);
    }

    std::vector<double> ell2;
    if (!cfg.ell2_file.empty()) {
        const DenseMatrix m = load_matrix(cfg.ell2_file);
        if (m.rows != cfg.n || m.cols != cfg.n) {
            throw InvalidInput("cost.ell2_file: expected an n x n matrix");
        }
        ell2 = m.values;
        // Smoothness proxy for tabulated kernels: second difference quotients
        // stay below the configured bound.
        const double h = grid.h;
        double worst = 0.0;
        for (int i = 0; i < cfg.n; ++i) {
            for (int j = 0; j < cfg.n; ++j) {
                const auto at = [&](int a, int b) {
                    return ell2[static_cast<std::size_t>(((a % cfg.n) + cfg.n) % cfg.n) * cfg.n +
                                static_cast<std::size_t>(((b % cfg.n) + cfg.n) % cfg.n)];
                };
                const double dxx = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (h * h);
                const double dyy = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (h * h);
                worst = std::max({worst, std::abs(dxx), std::abs(dyy)});
            }
        }
        if (worst > cfg.smoothness_bound) {
            throw InvalidInput("cost.ell2_file: second differences exceed cost.smoothness_bound");
        }
    } else {
        ell2 = ell2_matrix_from_expression(cfg.ell2_expr, grid);
    }

    DriftPotential b(cfg.drift_b);

    AlphaSpaceField m0_raw(cfg.M, cfg.n);
    if (!cfg.m0_file.empty()) {
        m0_raw = density_from_file(cfg.m0_file, cfg.M, cfg.n);
    } else {
        const Expression expr = Expression::parse(cfg.m0_density, {Var::Alpha, Var::X});
        for (int j = 0; j < cfg.M; ++j) {
            for (int i = 0; i < cfg.n; ++i) {
                VarValues v;
                v.alpha = alpha.nodes[static_cast<std::size_t>(j)];
                v.x = grid.nodes[static_cast<std::size_t>(i)];
                m0_raw(j, i) = expr.eval(v);
            }
        }
    }
    InitialDensity m0 = InitialDensity::from_density(std::move(m0_raw), grid);

    CostModel cost(grid, alpha, std::move(ell2), graphon, cfg.graphon_bound);

    return Scenario{std::move(grid), std::move(alpha), std::move(tgrid), std::move(b),
                    std::move(cost), std::move(m0)};
}

PicardConfig build_picard_config(const ScenarioConfig& cfg) {
    PicardConfig pc;
    pc.lambda = cfg.lambda;
    pc.eps_rho = cfg.eps_rho;
    pc.max_iter = cfg.max_iter;
    pc.seed = cfg.seed == "uniform" ? SeedKind::Uniform
                                    : (cfg.seed == "file" ? SeedKind::Custom : SeedKind::FromM0);
    return pc;
}

McConfig build_mc_config(const ScenarioConfig& cfg) {
    McConfig mc;
    mc.n_paths = cfg.mc_n_paths;
    mc.dt_mc = cfg.mc_dt > 0.0 ? cfg.mc_dt : cfg.T / cfg.n_t;
    mc.rng_seed = cfg.mc_seed;
    mc.antithetic = cfg.mc_antithetic;
    return mc;
}

Field3 build_seed(const ScenarioConfig& cfg, const Scenario& scenario) {
    if (cfg.seed == "uniform") {
        return seed_uniform(scenario.time.n_levels(), scenario.alpha.M, scenario.grid.n);
    }
    if (cfg.seed == "file") {
        AlphaSpaceField raw = density_from_file(cfg.seed_file, cfg.M, cfg.n);
        InitialDensity seed0 = InitialDensity::from_density(std::move(raw), scenario.grid);
        return seed_from_m0(seed0, scenario.time);
    }
    return seed_from_m0(scenario.m0, scenario.time);
}

} // namespace gmfg
