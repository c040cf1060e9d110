#include <doctest.h>

#include "fbsde/config.hpp"
#include "fbsde/csv.hpp"
#include "fbsde/errors.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace fbsde;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p);
    out << content;
    return p;
}

} // namespace

TEST_CASE("config parsing") {
    SUBCASE("sections and comments are accepted") {
        const fs::path p = write_temp("cfg_ok.ini",
                                      "# example\n"
                                      "[model]\n"
                                      "model = bm_positive\n"
                                      "dim = 3\n"
                                      "sigma = 0.3   ; inline comment\n"
                                      "\n"
                                      "[grids]\n"
                                      "J = 101\n"
                                      "N = 16\n"
                                      "rate_Ns = 4, 8, 16\n");
        const RunConfig cfg = parse_config_file(p);
        CHECK(cfg.model == "bm_positive");
        CHECK(cfg.dim == 3);
        CHECK(cfg.sigma == doctest::Approx(0.3));
        CHECK(cfg.J == 101);
        CHECK(cfg.rate_Ns == std::vector<int>{4, 8, 16});
        CHECK(cfg.K == 20); // untouched default
    }
    SUBCASE("unknown keys are named in the error") {
        const fs::path p = write_temp("cfg_typo.ini", "trnsport = lf\n");
        try {
            parse_config_file(p);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("trnsport") != std::string::npos);
        }
    }
    SUBCASE("missing separator is rejected") {
        const fs::path p = write_temp("cfg_nosep.ini", "model linear\n");
        CHECK_THROWS_AS(parse_config_file(p), ConfigError);
    }
    SUBCASE("value types are enforced") {
        CHECK_THROWS_AS(parse_config_file(write_temp("cfg_badint.ini", "J = few\n")),
                        ConfigError);
        CHECK_THROWS_AS(parse_config_file(write_temp("cfg_badnum.ini", "sigma = big\n")),
                        ConfigError);
    }
    SUBCASE("semantic validation") {
        CHECK_THROWS_AS(parse_config_file(write_temp("cfg_j.ini", "J = 2\n")), ConfigError);
        CHECK_THROWS_AS(parse_config_file(write_temp("cfg_model.ini", "model = cubic\n")),
                        ConfigError);
        CHECK_THROWS_AS(
            parse_config_file(write_temp("cfg_rate.ini", "rate_Ns = 4, 8\n")), ConfigError);
        CHECK_THROWS_AS(
            parse_config_file(write_temp("cfg_sigma.ini", "sigma = -1\n")), ConfigError);
        CHECK_THROWS_AS(
            parse_config_file(write_temp("cfg_range.ini", "e_min = 2\ne_max = 1\n")),
            ConfigError);
        CHECK_THROWS_AS(
            parse_config_file(write_temp("cfg_transport.ini", "transport = weno\n")),
            ConfigError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(parse_config_file("/nonexistent/nowhere.ini"), ConfigError);
    }
}

TEST_CASE("model and grid builders") {
    RunConfig cfg;
    cfg.model = "multiplicative";
    cfg.dim = 2;
    cfg.sigma = 0.4;
    cfg.theta = 1.5;
    const ModelSpec model = build_model(cfg);
    CHECK(model.kind == ModelKind::Multiplicative);
    CHECK(model.dim == 2);

    const EGrid grid = build_egrid(cfg, model);
    CHECK(grid.e_min == -1.0); // multiplicative default range
    CHECK(grid.e_max == 3.0);

    cfg.e_min = -0.5;
    cfg.e_max = 2.5;
    const EGrid custom = build_egrid(cfg, model);
    CHECK(custom.e_min == -0.5);

    const PBox box = build_pbox(cfg, model);
    CHECK(box.positive);
    cfg.B = 7.0;
    CHECK(build_pbox(cfg, model).bound == 7.0);

    const NnConfig nn = build_nn_config(cfg, model);
    CHECK(nn.time_steps == cfg.N);
    CHECK(nn.train.val_size == cfg.val_size);
}

TEST_CASE("config rows are deterministic and complete") {
    RunConfig cfg;
    const auto rows_a = config_rows(cfg);
    const auto rows_b = config_rows(cfg);
    CHECK(rows_a == rows_b);
    bool saw_seed = false;
    for (const auto& [k, v] : rows_a) {
        if (k == "seed") saw_seed = true;
    }
    CHECK(saw_seed);
}

TEST_CASE("17-digit rendering round-trips doubles") {
    const double values[] = {0.0,  1.0,        -1.5,      0.1,   1.0 / 3.0,
                             1e-9, 12345.6789, 2.5e300, -7e-12, 0.69314718055994531};
    for (double v : values) {
        const std::string s = fmt_g17(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("atomic writes leave no temporaries") {
    const fs::path target = fs::temp_directory_path() / "fbsde_atomic_test.csv";
    fs::remove(target);
    write_text_atomic(target, "a,b\n1,2\n");
    std::ifstream in(target);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(all == "a,b\n1,2\n");
    CHECK_FALSE(fs::exists(target.string() + ".tmp"));
    fs::remove(target);
}
