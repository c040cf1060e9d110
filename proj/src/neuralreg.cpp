#include "fbsde/neuralreg.hpp"

#include "fbsde/parallel.hpp"
#include "fbsde/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fbsde {

RegressionNet::RegressionNet(int input_dim_, int grid_count_)
    : RegressionNet(input_dim_, grid_count_, 20 * input_dim_ + 10, 20 * input_dim_ + 10) {}

RegressionNet::RegressionNet(int input_dim_, int grid_count_, int h1, int h2)
    : input_dim(input_dim_), hidden1(h1), hidden2(h2), grid_count(grid_count_) {
    if (input_dim < 1 || grid_count < 1 || h1 < 1 || h2 < 1) {
        throw std::invalid_argument("net dimensions must be positive");
    }
    const int out = output_count();
    theta.assign(static_cast<std::size_t>(ob3()) + out, 0.0);
    input_mean.assign(input_dim, 0.0);
    input_scale.assign(input_dim, 1.0);
}

void net_forward(const RegressionNet& net, std::span<const double> p, NetScratch& ws) {
    const int d = net.input_dim, h1 = net.hidden1, h2 = net.hidden2;
    const int out = net.output_count();
    ws.x.resize(d);
    ws.a1.resize(h1);
    ws.a2.resize(h2);
    ws.out.resize(out);

    for (int i = 0; i < d; ++i) ws.x[i] = (p[i] - net.input_mean[i]) / net.input_scale[i];

    const double* w1 = net.theta.data() + net.ow1();
    const double* b1 = net.theta.data() + net.ob1();
    for (int h = 0; h < h1; ++h) {
        const double* row = w1 + static_cast<std::size_t>(h) * d;
        double acc = b1[h];
        for (int i = 0; i < d; ++i) acc += row[i] * ws.x[i];
        ws.a1[h] = std::tanh(acc);
    }
    const double* w2 = net.theta.data() + net.ow2();
    const double* b2 = net.theta.data() + net.ob2();
    for (int h = 0; h < h2; ++h) {
        const double* row = w2 + static_cast<std::size_t>(h) * h1;
        double acc = b2[h];
        for (int i = 0; i < h1; ++i) acc += row[i] * ws.a1[i];
        ws.a2[h] = std::tanh(acc);
    }
    const double* w3 = net.theta.data() + net.ow3();
    const double* b3 = net.theta.data() + net.ob3();
    for (int o = 0; o < out; ++o) {
        const double* row = w3 + static_cast<std::size_t>(o) * h2;
        double acc = b3[o];
        for (int i = 0; i < h2; ++i) acc += row[i] * ws.a2[i];
        ws.out[o] = acc;
    }
}

void xavier_init(RegressionNet& net, std::uint64_t seed) {
    Rng rng(seed);
    auto fill = [&](int offset, int count, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (int i = 0; i < count; ++i) net.theta[offset + i] = rng.uniform(-bound, bound);
    };
    fill(net.ow1(), net.hidden1 * net.input_dim, net.input_dim);
    fill(net.ow2(), net.hidden2 * net.hidden1, net.hidden1);
    fill(net.ow3(), net.output_count() * net.hidden2, net.hidden2);
    std::fill_n(net.theta.begin() + net.ob1(), net.hidden1, 0.0);
    std::fill_n(net.theta.begin() + net.ob2(), net.hidden2, 0.0);
    std::fill_n(net.theta.begin() + net.ob3(), net.output_count(), 0.0);
}

void set_standardization(RegressionNet& net, std::span<const double> inputs, int count) {
    const int d = net.input_dim;
    if (count < 1 || inputs.size() < static_cast<std::size_t>(count) * d) {
        throw std::invalid_argument("standardization needs at least one input row");
    }
    for (int k = 0; k < d; ++k) {
        double mean = 0.0;
        for (int i = 0; i < count; ++i) mean += inputs[static_cast<std::size_t>(i) * d + k];
        mean /= count;
        double var = 0.0;
        for (int i = 0; i < count; ++i) {
            const double dx = inputs[static_cast<std::size_t>(i) * d + k] - mean;
            var += dx * dx;
        }
        var /= count;
        net.input_mean[k] = mean;
        net.input_scale[k] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
}

void adam_step(Vec& theta, const Vec& grad, AdamState& state, double lr) {
    if (grad.size() != theta.size()) throw std::invalid_argument("gradient shape mismatch");
    if (state.m.empty()) {
        state.m.assign(theta.size(), 0.0);
        state.v.assign(theta.size(), 0.0);
    }
    if (state.m.size() != theta.size()) throw std::invalid_argument("optimizer state mismatch");
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        theta[i] -= lr * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + state.epsilon);
    }
}

namespace {

void check_batch(const RegressionNet& net, const RegressionBatch& batch) {
    if (batch.dim != net.input_dim || batch.grid_count != net.grid_count) {
        throw std::invalid_argument("batch shape does not match the net");
    }
    const std::size_t n = static_cast<std::size_t>(batch.count);
    if (batch.inputs.size() < n * batch.dim || batch.noise.size() < n * batch.dim ||
        batch.targets.size() < n * batch.grid_count) {
        throw std::invalid_argument("batch arrays shorter than count");
    }
}

// Loss (and optionally the parameter gradient) of one sample.
double sample_loss(const RegressionNet& net, std::span<const double> p,
                   std::span<const double> dw, std::span<const double> target, bool fit_z,
                   NetScratch& ws, double* grad) {
    const int d = net.input_dim, h1 = net.hidden1, h2 = net.hidden2;
    const int J = net.grid_count, out = net.output_count();
    net_forward(net, p, ws);

    // residuals r_j = target_j - y_j - (z dw)_j reused through ws.dout as the
    // output-layer sensitivity
    ws.dout.assign(out, 0.0);
    double loss = 0.0;
    for (int j = 0; j < J; ++j) {
        double fit = ws.out[j];
        if (fit_z) {
            const double* zrow = ws.out.data() + J + static_cast<std::size_t>(j) * d;
            for (int k = 0; k < d; ++k) fit += zrow[k] * dw[k];
        }
        const double r = target[j] - fit;
        loss += r * r;
        if (grad != nullptr) {
            ws.dout[j] = -2.0 * r;
            if (fit_z) {
                double* zslot = ws.dout.data() + J + static_cast<std::size_t>(j) * d;
                for (int k = 0; k < d; ++k) zslot[k] = -2.0 * r * dw[k];
            }
        }
    }
    if (grad == nullptr) return loss;

    // backward: linear head -> tanh -> tanh
    ws.d2.assign(h2, 0.0);
    const double* w3 = net.theta.data() + net.ow3();
    double* gw3 = grad + net.ow3();
    double* gb3 = grad + net.ob3();
    for (int o = 0; o < out; ++o) {
        const double g = ws.dout[o];
        if (g == 0.0) continue;
        const double* row = w3 + static_cast<std::size_t>(o) * h2;
        double* grow = gw3 + static_cast<std::size_t>(o) * h2;
        for (int i = 0; i < h2; ++i) {
            grow[i] += g * ws.a2[i];
            ws.d2[i] += g * row[i];
        }
        gb3[o] += g;
    }
    for (int i = 0; i < h2; ++i) ws.d2[i] *= 1.0 - ws.a2[i] * ws.a2[i];

    ws.d1.assign(h1, 0.0);
    const double* w2 = net.theta.data() + net.ow2();
    double* gw2 = grad + net.ow2();
    double* gb2 = grad + net.ob2();
    for (int h = 0; h < h2; ++h) {
        const double g = ws.d2[h];
        const double* row = w2 + static_cast<std::size_t>(h) * h1;
        double* grow = gw2 + static_cast<std::size_t>(h) * h1;
        for (int i = 0; i < h1; ++i) {
            grow[i] += g * ws.a1[i];
            ws.d1[i] += g * row[i];
        }
        gb2[h] += g;
    }
    for (int i = 0; i < h1; ++i) ws.d1[i] *= 1.0 - ws.a1[i] * ws.a1[i];

    double* gw1 = grad + net.ow1();
    double* gb1 = grad + net.ob1();
    for (int h = 0; h < h1; ++h) {
        const double g = ws.d1[h];
        double* grow = gw1 + static_cast<std::size_t>(h) * d;
        for (int i = 0; i < d; ++i) grow[i] += g * ws.x[i];
        gb1[h] += g;
    }
    return loss;
}

constexpr int kReductionChunks = 8;

} // namespace

double loss_batch(const RegressionNet& net, const RegressionBatch& batch, bool fit_z) {
    check_batch(net, batch);
    const int n = batch.count;
    const int chunks = std::min(kReductionChunks, n);
    std::vector<double> partial(chunks, 0.0);
    parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
        const int begin = static_cast<int>(c) * n / chunks;
        const int end = static_cast<int>(c + 1) * n / chunks;
        NetScratch ws;
        double acc = 0.0;
        for (int i = begin; i < end; ++i) {
            acc += sample_loss(net,
                               batch.inputs.subspan(static_cast<std::size_t>(i) * batch.dim,
                                                    batch.dim),
                               batch.noise.subspan(static_cast<std::size_t>(i) * batch.dim,
                                                   batch.dim),
                               batch.targets.subspan(
                                   static_cast<std::size_t>(i) * batch.grid_count,
                                   batch.grid_count),
                               fit_z, ws, nullptr);
        }
        partial[c] = acc;
    });
    const double total = std::accumulate(partial.begin(), partial.end(), 0.0);
    return total / n;
}

double loss_and_gradient(const RegressionNet& net, const RegressionBatch& batch, Vec& grad,
                         bool fit_z) {
    check_batch(net, batch);
    const int n = batch.count;
    const int chunks = std::min(kReductionChunks, n);
    std::vector<double> partial_loss(chunks, 0.0);
    std::vector<Vec> partial_grad(chunks);
    parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
        const int begin = static_cast<int>(c) * n / chunks;
        const int end = static_cast<int>(c + 1) * n / chunks;
        partial_grad[c].assign(net.theta.size(), 0.0);
        NetScratch ws;
        double acc = 0.0;
        for (int i = begin; i < end; ++i) {
            acc += sample_loss(net,
                               batch.inputs.subspan(static_cast<std::size_t>(i) * batch.dim,
                                                    batch.dim),
                               batch.noise.subspan(static_cast<std::size_t>(i) * batch.dim,
                                                   batch.dim),
                               batch.targets.subspan(
                                   static_cast<std::size_t>(i) * batch.grid_count,
                                   batch.grid_count),
                               fit_z, ws, partial_grad[c].data());
        }
        partial_loss[c] = acc;
    });
    grad.assign(net.theta.size(), 0.0);
    for (int c = 0; c < chunks; ++c) {
        const Vec& g = partial_grad[c];
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
    }
    const double inv = 1.0 / n;
    for (double& g : grad) g *= inv;
    return std::accumulate(partial_loss.begin(), partial_loss.end(), 0.0) * inv;
}

TrainOutcome train_time_step(RegressionNet& net, const RegressionBatch& train,
                             const RegressionBatch& validation, const TrainConfig& cfg) {
    check_batch(net, train);
    check_batch(net, validation);
    if (cfg.batch_size < 1 || cfg.batches_per_epoch < 1 || cfg.val_every < 1 ||
        cfg.patience < 1 || cfg.max_iters < 1 || !(cfg.lr > 0.0)) {
        throw std::invalid_argument("training configuration values must be positive");
    }

    AdamState adam;
    double lr = cfg.lr;
    Vec grad(net.theta.size());
    Rng shuffle_rng(stream_seed(cfg.seed, 0x5075ULL));
    std::vector<int> perm(train.count);
    std::iota(perm.begin(), perm.end(), 0);

    const int d = train.dim, J = train.grid_count;
    Vec mb_in(static_cast<std::size_t>(cfg.batch_size) * d);
    Vec mb_dw(static_cast<std::size_t>(cfg.batch_size) * d);
    Vec mb_tg(static_cast<std::size_t>(cfg.batch_size) * J);
    RegressionBatch mini{mb_in, mb_dw, mb_tg, cfg.batch_size, d, J};

    auto fail = [&](const char* what, int iter, double value) {
        std::ostringstream os;
        os << "training aborted: " << what << " at iteration " << iter << " (value " << value
           << ", lr " << lr << ")";
        throw std::runtime_error(os.str());
    };

    double best = loss_batch(net, validation, cfg.fit_z);
    if (!std::isfinite(best)) fail("non-finite validation loss", 0, best);
    Vec best_theta = net.theta;
    int flat_checks = 0;
    int iter = 0;
    int batch_in_epoch = 0;

    while (iter < cfg.max_iters) {
        if (batch_in_epoch == 0 || batch_in_epoch == cfg.batches_per_epoch) {
            shuffle_rng.shuffle(perm);
            batch_in_epoch = 0;
        }
        for (int b = 0; b < cfg.batch_size; ++b) {
            const int src =
                perm[(static_cast<std::size_t>(batch_in_epoch) * cfg.batch_size + b) %
                     perm.size()];
            std::copy_n(train.inputs.begin() + static_cast<std::size_t>(src) * d, d,
                        mb_in.begin() + static_cast<std::size_t>(b) * d);
            std::copy_n(train.noise.begin() + static_cast<std::size_t>(src) * d, d,
                        mb_dw.begin() + static_cast<std::size_t>(b) * d);
            std::copy_n(train.targets.begin() + static_cast<std::size_t>(src) * J, J,
                        mb_tg.begin() + static_cast<std::size_t>(b) * J);
        }
        const double loss = loss_and_gradient(net, mini, grad, cfg.fit_z);
        if (!std::isfinite(loss)) fail("non-finite minibatch loss", iter, loss);
        adam_step(net.theta, grad, adam, lr);
        ++iter;
        ++batch_in_epoch;

        if (iter % cfg.val_every == 0) {
            const double vl = loss_batch(net, validation, cfg.fit_z);
            if (!std::isfinite(vl)) fail("non-finite validation loss", iter, vl);
            if (vl < best) {
                best = vl;
                best_theta = net.theta;
                flat_checks = 0;
            } else {
                ++flat_checks;
                // anneal inside a plateau stretch, but no faster than every
                // second flat check so noisy checks cannot collapse the rate
                if (flat_checks % 2 == 0) lr = std::max(0.5 * lr, 1e-7);
                if (flat_checks >= cfg.patience) break;
            }
        }
    }
    net.theta = std::move(best_theta);
    return TrainOutcome{best, iter};
}

} // namespace fbsde
