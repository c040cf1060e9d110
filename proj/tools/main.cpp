// fbsde - splitting-scheme solver for the time-zero decoupling field of
// singular forward-backward systems. Subcommands: run, compare, rate,
// validate. All outputs are plain CSV written atomically.

#include "fbsde/config.hpp"
#include "fbsde/csv.hpp"
#include "fbsde/errors.hpp"
#include "fbsde/parallel.hpp"
#include "fbsde/splitting.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace fbsde;

namespace {

// Exit codes (0 = success). Each failure class gets its own code.
constexpr int kExitConfig = 2;
constexpr int kExitCfl = 3;
constexpr int kExitMemory = 4;
constexpr int kExitGridMismatch = 5;
constexpr int kExitRateFailure = 6;
constexpr int kExitValidation = 7;

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::string> label;
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required = true) {
    auto* opt = cmd->add_option("--config", flags.config_path,
                                "path to a key = value config file");
    if (config_required) opt->required();
    cmd->add_option("--out", flags.out_dir, "output directory (overrides out_dir)");
    cmd->add_option("--label", flags.label, "output label (overrides label)");
    cmd->add_option("--seed", flags.seed, "seed (overrides seed)");
    cmd->add_option("--threads", flags.threads, "worker cap, 0 = hardware");
}

RunConfig load_config(const CommonFlags& flags) {
    RunConfig cfg = parse_config_file(flags.config_path);
    if (flags.out_dir) cfg.out_dir = *flags.out_dir;
    if (flags.label) cfg.label = *flags.label;
    if (flags.seed) cfg.seed = *flags.seed;
    validate_config(cfg);
    set_max_threads(flags.threads);
    return cfg;
}

SchemeResult execute_scheme(const RunConfig& cfg) {
    const ModelSpec model = build_model(cfg);
    const EGrid grid = build_egrid(cfg, model);
    if (cfg.scheme == "alt") {
        return run_alt_scheme(model, AltConfig{cfg.N, cfg.M, cfg.memory_budget_mb}, grid);
    }
    if (cfg.scheme == "proxy") {
        return run_proxy(model, grid, cfg.proxy_N, cfg.proxy_M, cfg.memory_budget_mb);
    }
    return run_nn_scheme(model, grid, build_nn_config(cfg, model));
}

std::string solution_csv(const SchemeResult& result) {
    std::string out = "e,value\n";
    for (int j = 0; j < result.grid.count; ++j) {
        out += fmt_g17(result.grid.node(j));
        out += ",";
        out += fmt_g17(result.values[j]);
        out += "\n";
    }
    return out;
}

// Meta rows are a pure function of the resolved config, so reruns are
// byte-identical; wall-clock timing goes to stderr instead.
std::string meta_csv(const RunConfig& cfg, const SchemeResult& result) {
    std::string out = "key,value\n";
    for (const auto& [k, v] : config_rows(cfg)) out += k + "," + v + "\n";
    out += "result_scheme," + result.scheme + "\n";
    out += "result_provenance," + result.provenance + "\n";
    out += "monotonicity_defect," + fmt_g17(result.monotonicity_defect) + "\n";
    return out;
}

int cmd_run(const CommonFlags& flags) {
    const RunConfig cfg = load_config(flags);
    const SchemeResult result = execute_scheme(cfg);
    const fs::path dir(cfg.out_dir);
    write_text_atomic(dir / (cfg.label + "_solution.csv"), solution_csv(result));
    write_text_atomic(dir / (cfg.label + "_meta.csv"), meta_csv(cfg, result));
    std::fprintf(stderr, "%s: %s finished in %.3f s, wrote %s_solution.csv\n", cfg.label.c_str(),
                 result.provenance.c_str(), result.runtime_seconds, cfg.label.c_str());
    return 0;
}

// A compare input is either a solution CSV (by extension) or a config to run.
SchemeResult load_side(const std::string& path, const CommonFlags& flags) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open solution file: " + path);
        std::string line;
        if (!std::getline(in, line) || line != "e,value") {
            throw ConfigError("solution file must start with the 'e,value' header: " + path);
        }
        Vec e, v;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) throw ConfigError("malformed solution row: " + line);
            e.push_back(std::stod(line.substr(0, comma)));
            v.push_back(std::stod(line.substr(comma + 1)));
        }
        if (e.size() < 3) throw ConfigError("solution file needs at least 3 rows: " + path);
        const EGrid grid(static_cast<int>(e.size()), e.front(), e.back());
        for (std::size_t j = 0; j < e.size(); ++j) {
            if (std::abs(grid.node(static_cast<int>(j)) - e[j]) > 1e-9 * (1.0 + std::abs(e[j]))) {
                throw ConfigError("solution file grid is not uniform: " + path);
            }
        }
        return SchemeResult{grid, v, "file", path, 0, 0, 0.0, 0.0};
    }
    CommonFlags side = flags;
    side.config_path = path;
    side.out_dir.reset();
    side.label.reset();
    return execute_scheme(load_config(side));
}

int cmd_compare(const CommonFlags& flags, const std::string& a_path, const std::string& b_path) {
    RunConfig out_cfg; // carries out_dir / label for the comparison tables
    if (!flags.config_path.empty()) {
        out_cfg = load_config(flags);
    } else {
        if (flags.out_dir) out_cfg.out_dir = *flags.out_dir;
        if (flags.label) out_cfg.label = *flags.label;
        set_max_threads(flags.threads);
    }
    const SchemeResult a = load_side(a_path, flags);
    const SchemeResult b = load_side(b_path, flags);
    if (!(a.grid == b.grid)) {
        std::fprintf(stderr, "compare: grids differ (%d vs %d nodes)\n", a.grid.count,
                     b.grid.count);
        return kExitGridMismatch;
    }
    std::string table = "e,value_a,value_b,abs_diff\n";
    for (int j = 0; j < a.grid.count; ++j) {
        table += fmt_g17(a.grid.node(j)) + "," + fmt_g17(a.values[j]) + "," +
                 fmt_g17(b.values[j]) + "," + fmt_g17(std::abs(a.values[j] - b.values[j])) + "\n";
    }
    std::string summary = "l1,linf,runtime_a_s,runtime_b_s\n";
    summary += fmt_g17(l1_error(a, b)) + "," + fmt_g17(linf_error(a, b)) + "," +
               fmt_g17(a.runtime_seconds) + "," + fmt_g17(b.runtime_seconds) + "\n";
    const fs::path dir(out_cfg.out_dir);
    write_text_atomic(dir / (out_cfg.label + "_compare.csv"), table);
    write_text_atomic(dir / (out_cfg.label + "_summary.csv"), summary);
    std::fprintf(stderr, "compare: l1 %.6g linf %.6g\n", l1_error(a, b), linf_error(a, b));
    return 0;
}

int cmd_rate(const CommonFlags& flags) {
    const RunConfig cfg = load_config(flags);
    const ModelSpec model = build_model(cfg);
    const EGrid grid = build_egrid(cfg, model);
    const int reference_steps = std::max(256, 4 * cfg.rate_Ns.back());
    try {
        const SchemeResult reference = run_alt_scheme(
            model, AltConfig{reference_steps, cfg.M, cfg.memory_budget_mb}, grid);
        const RateReport report = rate_experiment(cfg.rate_Ns, reference, [&](int n) {
            return run_alt_scheme(model, AltConfig{n, cfg.M, cfg.memory_budget_mb}, grid);
        });
        std::string out = "N,l1\n";
        for (const auto& pt : report.points) {
            out += std::to_string(pt.time_steps) + "," + fmt_g17(pt.l1) + "\n";
        }
        out += "slope," + fmt_g17(report.slope) + "\n";
        write_text_atomic(fs::path(cfg.out_dir) / (cfg.label + "_rate.csv"), out);
        std::fprintf(stderr, "rate: fitted slope %.4f (reference N=%d)\n", report.slope,
                     reference_steps);
        return 0;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "rate run failed: %s\n", e.what());
        return kExitRateFailure;
    }
}

int cmd_validate(const CommonFlags& flags) {
    const RunConfig cfg = load_config(flags);
    const ModelSpec model = build_model(cfg);
    const EGrid grid = build_egrid(cfg, model);
    const PBox box = build_pbox(cfg, model);
    const SubGrid sub(cfg.K, model.horizon / cfg.N);

    const ValidationReport report =
        validate_class(model, box_bounds(box, model.dim), 4096, cfg.seed);
    const double certificate = cfl_certificate(model, box, grid, sub);
    std::printf("%s\n", report.summary().c_str());
    std::printf("CFL certificate: %.6g (sub-step %.6g, spacing %.6g)\n", certificate, sub.step(),
                grid.spacing());
    if (!report.passed()) {
        std::printf("structural check: FAIL\n");
        return kExitValidation;
    }
    if (!(certificate < 1.0)) {
        std::printf("CFL check: FAIL (certificate >= 1)\n");
        return kExitCfl;
    }
    std::printf("all checks: PASS\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"splitting-scheme solver for singular FBSDE decoupling fields"};
    app.require_subcommand(1);

    CommonFlags run_flags, compare_flags, rate_flags, validate_flags;
    std::string compare_a, compare_b;

    CLI::App* run = app.add_subcommand("run", "solve and write the solution table");
    add_common(run, run_flags);

    CLI::App* compare = app.add_subcommand("compare", "compare two runs or solution files");
    compare->add_option("--a", compare_a, "config or solution csv")->required();
    compare->add_option("--b", compare_b, "config or solution csv")->required();
    add_common(compare, compare_flags, /*config_required=*/false);

    CLI::App* rate = app.add_subcommand("rate", "empirical convergence rate over rate_Ns");
    add_common(rate, rate_flags);

    CLI::App* validate = app.add_subcommand("validate", "structural and CFL checks");
    add_common(validate, validate_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(run_flags);
        if (compare->parsed()) return cmd_compare(compare_flags, compare_a, compare_b);
        if (rate->parsed()) return cmd_rate(rate_flags);
        if (validate->parsed()) return cmd_validate(validate_flags);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const CflError& e) {
        std::fprintf(stderr, "CFL refusal: %s\n", e.what());
        return kExitCfl;
    } catch (const MemoryBudgetError& e) {
        std::fprintf(stderr, "memory guard: %s\n", e.what());
        return kExitMemory;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
