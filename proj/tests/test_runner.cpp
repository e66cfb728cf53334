#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <unistd.h>

#include "gmfg/report.hpp"
#include "gmfg/runner.hpp"
#include "gmfg/scenario.hpp"

using namespace gmfg;
using nlohmann::json;

namespace {

struct TempDir {
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("gmfg_runner_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name, const std::string& contents) const {
        const std::string full = (path / name).string();
        std::ofstream out(full);
        out << contents;
        return full;
    }
    std::filesystem::path path;
    static inline int counter = 0;
};

json load_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return json::parse(in);
}

void collect_keys(const json& j, const std::string& prefix, std::set<std::string>& keys) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string full = prefix.empty() ? it.key() : prefix + "." + it.key();
        keys.insert(full);
        if (it->is_object()) collect_keys(*it, full, keys);
    }
}

const char* kSmallSolveCfg =
    "[grid]\nn = 32\n[time]\nT = 0.25\nn_t = 50\n[clusters]\nM = 2\n"
    "[graphon]\nkind = uniform_attachment\n[cost]\nell2 = cos(2*pi*(x - y))\n"
    "[drift]\nb = 0.05*sin(2*pi*x)\n[m0]\ndensity = 1 + 0.3*cos(2*pi*x)\n"
    "[picard]\nlambda = 0.5\neps_rho = 1e-6\nmax_iter = 100\n"
    "[mc]\nn_paths = 4000\n";

} // namespace

TEST_CASE("run_solve emits fields, a report and exit 0 on a good scenario") {
    TempDir tmp;
    const std::string cfg_path = tmp.file("s.cfg", kSmallSolveCfg);
    ScenarioConfig cfg = load_scenario(cfg_path);
    RunOptions opts;
    opts.quiet = true;
    opts.threads = 1;
    opts.output_override = (tmp.path / "out").string();

    CHECK(run_solve(cfg, opts) == kExitOk);
    CHECK(std::filesystem::exists(tmp.path / "out" / "mu.csv"));
    CHECK(std::filesystem::exists(tmp.path / "out" / "v.csv"));
    CHECK(std::filesystem::exists(tmp.path / "out" / "grad_v.csv"));

    const json report = load_json(tmp.path / "out" / "report.json");
    CHECK(report["status"] == "converged");
    CHECK(report["exit_code"] == 0);
    CHECK(report["converged"] == true);
    CHECK(report["bound_checks"]["mass"]["passed"] == true);

    // Round trip: the emitted density CSV reloaded as an m0 histogram
    // reproduces the final slice.
    const Scenario sc = build_scenario(cfg);
    const Field3 mu =
        read_csv_field3((tmp.path / "out" / "mu.csv").string(), sc.time.n_levels(), 2, 32);
    AlphaSpaceField final_slice = read_csv_final_slice((tmp.path / "out" / "mu.csv").string(), 2, 32);
    InitialDensity reloaded = InitialDensity::from_density(final_slice, sc.grid);
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 32; ++i) {
            CHECK(std::abs(reloaded.density(j, i) - mu(sc.time.n_t, j, i)) <= 1e-12);
        }
    }

    // norms runs off the saved artifacts
    CHECK(run_norms(cfg, opts) == kExitOk);
    const json norms = load_json(tmp.path / "out" / "norms.json");
    CHECK(norms["norms"]["moment_part"].is_number());
    CHECK(norms["norms"]["holder_part"].is_number());
}

TEST_CASE("non-convergence exits 2 and still writes the report") {
    TempDir tmp;
    const std::string cfg_path = tmp.file(
        "s.cfg",
        "[grid]\nn = 32\n[time]\nT = 0.25\nn_t = 50\n[clusters]\nM = 2\n"
        "[graphon]\nkind = uniform_attachment\n[cost]\nell2 = cos(2*pi*(x - y))\n"
        "[drift]\nb = 0.05*sin(2*pi*x)\n[m0]\ndensity = 1 + 0.3*cos(2*pi*x)\n"
        "[picard]\nlambda = 0.5\neps_rho = 1e-12\nmax_iter = 1\n");
    ScenarioConfig cfg = load_scenario(cfg_path);
    RunOptions opts;
    opts.quiet = true;
    opts.threads = 1;
    opts.output_override = (tmp.path / "out").string();
    CHECK(run_solve(cfg, opts) == kExitNotConverged);
    const json report = load_json(tmp.path / "out" / "report.json");
    CHECK(report["status"] == "max_iter");
    CHECK(report["converged"] == false);
}

TEST_CASE("an advection step too large for the drift exits 3 with the required dt") {
    TempDir tmp;
    // 10 steps on T = 0.5 gives dt = 0.05 with h = 1/32: any drift above
    // 0.625 trips the guard, and this drift potential produces more.
    const std::string cfg_path = tmp.file(
        "s.cfg",
        "[grid]\nn = 32\n[time]\nT = 0.5\nn_t = 10\n[clusters]\nM = 2\n"
        "[graphon]\nkind = constant\np = 0\n[cost]\nell2 = cos(2*pi*(x - y))\n"
        "[drift]\nb = 0.5*sin(2*pi*x)\n[m0]\ndensity = 1\n");
    ScenarioConfig cfg = load_scenario(cfg_path);
    RunOptions opts;
    opts.quiet = true;
    opts.threads = 1;
    opts.output_override = (tmp.path / "out").string();
    CHECK(run_solve(cfg, opts) == kExitBoundViolation);
    const json report = load_json(tmp.path / "out" / "report.json");
    CHECK(report["status"] == "bound_violation");
    CHECK(report["cfl"]["violated"] == true);
    CHECK(report["cfl"]["required_dt"].is_number());
    CHECK(report["cfl"]["required_dt"].get<double>() > 0.0);
}

TEST_CASE("report.json keys are identical across outcomes") {
    TempDir tmp;
    RunOptions opts;
    opts.quiet = true;
    opts.threads = 1;

    const std::string good = tmp.file("good.cfg", kSmallSolveCfg);
    opts.output_override = (tmp.path / "good").string();
    ScenarioConfig cfg_good = load_scenario(good);
    run_solve(cfg_good, opts);

    const std::string cfl = tmp.file(
        "cfl.cfg", "[grid]\nn = 32\n[time]\nT = 0.5\nn_t = 10\n[clusters]\nM = 2\n"
                   "[graphon]\nkind = constant\np = 0\n[drift]\nb = 0.5*sin(2*pi*x)\n");
    opts.output_override = (tmp.path / "cfl").string();
    ScenarioConfig cfg_cfl = load_scenario(cfl);
    run_solve(cfg_cfl, opts);

    std::set<std::string> keys_good, keys_cfl;
    collect_keys(load_json(tmp.path / "good" / "report.json"), "", keys_good);
    collect_keys(load_json(tmp.path / "cfl" / "report.json"), "", keys_cfl);
    CHECK(keys_good == keys_cfl);
}

TEST_CASE("run_probe writes its verdict") {
    TempDir tmp;
    const std::string cfg_path = tmp.file(
        "s.cfg",
        "[grid]\nn = 32\n[time]\nT = 0.25\nn_t = 50\n[clusters]\nM = 2\n"
        "[graphon]\nkind = uniform_attachment\n[cost]\nell2 = cos(2*pi*(x - y))\n"
        "[drift]\nb = 0.05*sin(2*pi*x)\n[m0]\ndensity = 1 + 0.3*cos(2*pi*x)\n"
        "[picard]\nlambda = 0.5\neps_rho = 1e-6\nmax_iter = 200\n");
    ScenarioConfig cfg = load_scenario(cfg_path);
    RunOptions opts;
    opts.quiet = true;
    opts.threads = 2;
    opts.output_override = (tmp.path / "out").string();
    CHECK(run_probe(cfg, 3, opts) == kExitOk);
    const json report = load_json(tmp.path / "out" / "probe_report.json");
    CHECK(report["pass"] == true);
    CHECK(report["conclusive"] == true);
    CHECK(report["pairwise_rho"].size() == 3);
}

TEST_CASE("run_validate cross-checks the oracles on a small scenario") {
    TempDir tmp;
    const std::string cfg_path = tmp.file("s.cfg", kSmallSolveCfg);
    ScenarioConfig cfg = load_scenario(cfg_path);
    RunOptions opts;
    opts.quiet = true;
    opts.threads = 2;
    opts.output_override = (tmp.path / "out").string();
    CHECK(run_validate(cfg, opts) == kExitOk);
    const json report = load_json(tmp.path / "out" / "validate_report.json");
    CHECK(report["all_passed"] == true);
    CHECK(report["checks"].size() > 0);
    // one of each family must be present
    std::set<std::string> kinds;
    for (const auto& c : report["checks"]) kinds.insert(c["check"].get<std::string>());
    CHECK(kinds.count("particle_vs_fpk") == 1);
    CHECK(kinds.count("feynman_kac_value") == 1);
    CHECK(kinds.count("nash_spot") == 1);
}
