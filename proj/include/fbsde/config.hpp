#pragma once

#include "fbsde/grids.hpp"
#include "fbsde/models.hpp"
#include "fbsde/neuralreg.hpp"
#include "fbsde/splitting.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace fbsde {

// Flat key = value run description. Unknown keys are rejected; everything is
// validated before any compute starts.
struct RunConfig {
    // model
    std::string model = "linear";
    int dim = 1;
    double sigma = 1.0;
    double cap = 0.0;
    double theta = 1.0;
    double gbm_drift = 0.0;
    double horizon = 1.0;
    // grids
    int J = 201;
    int K = 20;
    int N = 32;
    std::optional<double> e_min, e_max; // default: model-dependent range
    std::optional<double> B;            // default: 3-sigma box
    // diffusion / particles
    int M = 1000;
    int paths = 5500;
    std::uint64_t seed = 1;
    // scheme selection
    std::string transport = "lf";
    std::string scheme = "alt";
    int proxy_N = 64;
    int proxy_M = 3500;
    std::vector<int> rate_Ns = {4, 8, 16, 32, 64};
    double memory_budget_mb = 4096.0;
    // training
    double lr = 1e-3;
    int batch_size = 50;
    int batches_per_epoch = 100;
    int val_size = 500;
    int val_every = 30;
    int patience = 5;
    int max_iters = 3000;
    std::uint64_t nn_seed = 2718;
    // output
    std::string out_dir = ".";
    std::string label = "run";
};

RunConfig parse_config_file(const std::filesystem::path& path);
void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value);
void validate_config(const RunConfig& cfg);

// Resolved key/value rows in declaration order (for the meta table).
std::vector<std::pair<std::string, std::string>> config_rows(const RunConfig& cfg);

ModelSpec build_model(const RunConfig& cfg);
EGrid build_egrid(const RunConfig& cfg, const ModelSpec& model);
PBox build_pbox(const RunConfig& cfg, const ModelSpec& model);
TrainConfig build_train_config(const RunConfig& cfg);
NnConfig build_nn_config(const RunConfig& cfg, const ModelSpec& model);

} // namespace fbsde
