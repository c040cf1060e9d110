#include "fbsde/config.hpp"

#include "fbsde/csv.hpp"
#include "fbsde/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace fbsde {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

int to_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
}

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" +
                          value + "'");
    }
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(to_int(key, item));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

std::string int_list_to_string(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

} // namespace

void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "model") cfg.model = value;
    else if (key == "dim") cfg.dim = to_int(key, value);
    else if (key == "sigma") cfg.sigma = to_double(key, value);
    else if (key == "cap") cfg.cap = to_double(key, value);
    else if (key == "theta") cfg.theta = to_double(key, value);
    else if (key == "gbm_drift") cfg.gbm_drift = to_double(key, value);
    else if (key == "horizon") cfg.horizon = to_double(key, value);
    else if (key == "J") cfg.J = to_int(key, value);
    else if (key == "K") cfg.K = to_int(key, value);
    else if (key == "N") cfg.N = to_int(key, value);
    else if (key == "e_min") cfg.e_min = to_double(key, value);
    else if (key == "e_max") cfg.e_max = to_double(key, value);
    else if (key == "B") cfg.B = to_double(key, value);
    else if (key == "M") cfg.M = to_int(key, value);
    else if (key == "paths") cfg.paths = to_int(key, value);
    else if (key == "seed") cfg.seed = to_u64(key, value);
    else if (key == "transport") cfg.transport = value;
    else if (key == "scheme") cfg.scheme = value;
    else if (key == "proxy_N") cfg.proxy_N = to_int(key, value);
    else if (key == "proxy_M") cfg.proxy_M = to_int(key, value);
    else if (key == "rate_Ns") cfg.rate_Ns = to_int_list(key, value);
    else if (key == "memory_budget_mb") cfg.memory_budget_mb = to_double(key, value);
    else if (key == "lr") cfg.lr = to_double(key, value);
    else if (key == "batch_size") cfg.batch_size = to_int(key, value);
    else if (key == "batches_per_epoch") cfg.batches_per_epoch = to_int(key, value);
    else if (key == "val_size") cfg.val_size = to_int(key, value);
    else if (key == "val_every") cfg.val_every = to_int(key, value);
    else if (key == "patience") cfg.patience = to_int(key, value);
    else if (key == "max_iters") cfg.max_iters = to_int(key, value);
    else if (key == "nn_seed") cfg.nn_seed = to_u64(key, value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "label") cfg.label = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') continue; // section headers are cosmetic
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        }
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    validate_config(cfg);
    return cfg;
}

void validate_config(const RunConfig& cfg) {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (cfg.model != "linear" && cfg.model != "bm_positive" && cfg.model != "multiplicative") {
        fail("model must be linear, bm_positive or multiplicative (got '" + cfg.model + "')");
    }
    if (cfg.dim < 1) fail("dim must be >= 1");
    if (!(cfg.sigma > 0.0)) fail("sigma must be positive");
    if (!(cfg.theta > 0.0)) fail("theta must be positive");
    if (!(cfg.horizon > 0.0)) fail("horizon must be positive");
    if (cfg.J < 3) fail("J must be >= 3");
    if (cfg.K < 1) fail("K must be >= 1");
    if (cfg.N < 1) fail("N must be >= 1");
    if (cfg.e_min && cfg.e_max && !(*cfg.e_min < *cfg.e_max)) fail("e_min must be < e_max");
    if (cfg.B && !(*cfg.B > 0.0)) fail("B must be positive");
    if (cfg.M < 1) fail("M must be >= 1");
    if (cfg.paths < 2) fail("paths must be >= 2");
    if (cfg.scheme != "alt" && cfg.scheme != "nn" && cfg.scheme != "proxy") {
        fail("scheme must be alt, nn or proxy (got '" + cfg.scheme + "')");
    }
    transport_from_name(cfg.transport); // throws on unknown names
    if (cfg.proxy_N < 1 || cfg.proxy_M < 1) fail("proxy_N and proxy_M must be >= 1");
    if (cfg.rate_Ns.size() < 3) fail("rate_Ns needs at least 3 entries");
    if (!std::is_sorted(cfg.rate_Ns.begin(), cfg.rate_Ns.end())) fail("rate_Ns must be sorted");
    for (int n : cfg.rate_Ns) {
        if (n < 1) fail("rate_Ns entries must be >= 1");
    }
    if (!(cfg.memory_budget_mb > 0.0)) fail("memory_budget_mb must be positive");
    if (!(cfg.lr > 0.0)) fail("lr must be positive");
    if (cfg.batch_size < 1 || cfg.batches_per_epoch < 1 || cfg.val_size < 1 ||
        cfg.val_every < 1 || cfg.patience < 1 || cfg.max_iters < 1) {
        fail("training counts must be positive");
    }
    if (cfg.scheme == "nn" && cfg.paths <= cfg.val_size + cfg.batch_size) {
        fail("paths must exceed val_size + batch_size for the nn scheme");
    }
    if (cfg.label.empty()) fail("label must not be empty");
}

std::vector<std::pair<std::string, std::string>> config_rows(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> rows;
    rows.emplace_back("model", cfg.model);
    rows.emplace_back("dim", std::to_string(cfg.dim));
    rows.emplace_back("sigma", fmt_g17(cfg.sigma));
    rows.emplace_back("cap", fmt_g17(cfg.cap));
    rows.emplace_back("theta", fmt_g17(cfg.theta));
    rows.emplace_back("gbm_drift", fmt_g17(cfg.gbm_drift));
    rows.emplace_back("horizon", fmt_g17(cfg.horizon));
    rows.emplace_back("J", std::to_string(cfg.J));
    rows.emplace_back("K", std::to_string(cfg.K));
    rows.emplace_back("N", std::to_string(cfg.N));
    if (cfg.e_min) rows.emplace_back("e_min", fmt_g17(*cfg.e_min));
    if (cfg.e_max) rows.emplace_back("e_max", fmt_g17(*cfg.e_max));
    if (cfg.B) rows.emplace_back("B", fmt_g17(*cfg.B));
    rows.emplace_back("M", std::to_string(cfg.M));
    rows.emplace_back("paths", std::to_string(cfg.paths));
    rows.emplace_back("seed", std::to_string(cfg.seed));
    rows.emplace_back("transport", cfg.transport);
    rows.emplace_back("scheme", cfg.scheme);
    rows.emplace_back("proxy_N", std::to_string(cfg.proxy_N));
    rows.emplace_back("proxy_M", std::to_string(cfg.proxy_M));
    rows.emplace_back("rate_Ns", int_list_to_string(cfg.rate_Ns));
    rows.emplace_back("memory_budget_mb", fmt_g17(cfg.memory_budget_mb));
    rows.emplace_back("lr", fmt_g17(cfg.lr));
    rows.emplace_back("batch_size", std::to_string(cfg.batch_size));
    rows.emplace_back("batches_per_epoch", std::to_string(cfg.batches_per_epoch));
    rows.emplace_back("val_size", std::to_string(cfg.val_size));
    rows.emplace_back("val_every", std::to_string(cfg.val_every));
    rows.emplace_back("patience", std::to_string(cfg.patience));
    rows.emplace_back("max_iters", std::to_string(cfg.max_iters));
    rows.emplace_back("nn_seed", std::to_string(cfg.nn_seed));
    rows.emplace_back("out_dir", cfg.out_dir);
    rows.emplace_back("label", cfg.label);
    return rows;
}

ModelSpec build_model(const RunConfig& cfg) {
    if (cfg.model == "linear") {
        return make_linear_model(cfg.dim, cfg.sigma, cfg.cap, cfg.horizon);
    }
    if (cfg.model == "bm_positive") {
        return make_bm_positive_model(cfg.dim, cfg.sigma, cfg.horizon);
    }
    return make_multiplicative_model(cfg.dim, cfg.gbm_drift, cfg.sigma, cfg.theta, cfg.horizon);
}

EGrid build_egrid(const RunConfig& cfg, const ModelSpec& model) {
    if (cfg.e_min && cfg.e_max) return EGrid(cfg.J, *cfg.e_min, *cfg.e_max);
    const EGrid fallback = default_egrid(model, cfg.J);
    return EGrid(cfg.J, cfg.e_min.value_or(fallback.e_min), cfg.e_max.value_or(fallback.e_max));
}

PBox build_pbox(const RunConfig& cfg, const ModelSpec& model) {
    PBox box = default_pbox(model);
    if (cfg.B) box.bound = *cfg.B;
    return box;
}

TrainConfig build_train_config(const RunConfig& cfg) {
    TrainConfig tc;
    tc.batches_per_epoch = cfg.batches_per_epoch;
    tc.batch_size = cfg.batch_size;
    tc.val_size = cfg.val_size;
    tc.val_every = cfg.val_every;
    tc.patience = cfg.patience;
    tc.max_iters = cfg.max_iters;
    tc.lr = cfg.lr;
    tc.seed = cfg.nn_seed;
    return tc;
}

NnConfig build_nn_config(const RunConfig& cfg, const ModelSpec& model) {
    NnConfig nn;
    nn.time_steps = cfg.N;
    nn.sub_steps = cfg.K;
    nn.transport = transport_from_name(cfg.transport);
    nn.paths = cfg.paths;
    nn.train = build_train_config(cfg);
    nn.seed = cfg.seed;
    nn.box = build_pbox(cfg, model);
    return nn;
}

} // namespace fbsde
