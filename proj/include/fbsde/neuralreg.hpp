#pragma once

#include "fbsde/models.hpp"

#include <span>

namespace fbsde {

// Feedforward net p -> (y in R^J, z in R^{J x d}) with two tanh hidden layers
// of width 20 d + 10 and linear heads. Inputs pass through a fixed affine
// standardization (set per time step from the sampled states). The flat
// parameter vector is ordered w1, b1, w2, b2, w3, b3 with row-major weights.
struct RegressionNet {
    int input_dim = 0;
    int hidden1 = 0;
    int hidden2 = 0;
    int grid_count = 0; // J
    Vec theta;
    Vec input_mean, input_scale;

    RegressionNet() = default;
    RegressionNet(int input_dim, int grid_count);
    RegressionNet(int input_dim, int grid_count, int h1, int h2);

    int output_count() const { return grid_count * (1 + input_dim); }
    int param_count() const { return static_cast<int>(theta.size()); }

    // offsets into theta
    int ow1() const { return 0; }
    int ob1() const { return hidden1 * input_dim; }
    int ow2() const { return ob1() + hidden1; }
    int ob2() const { return ow2() + hidden2 * hidden1; }
    int ow3() const { return ob2() + hidden2; }
    int ob3() const { return ow3() + output_count() * hidden2; }
};

struct NetScratch {
    Vec x, a1, a2, out;
    Vec d1, d2, dout;
};

// Deterministic forward pass; ws.out holds y (first J entries) followed by z
// row-major (z[j, k] = out[J + j * d + k]).
void net_forward(const RegressionNet& net, std::span<const double> p, NetScratch& ws);

// Layer-wise uniform init scaled by 1/sqrt(fan_in); biases zero.
void xavier_init(RegressionNet& net, std::uint64_t seed);

// mean / deviation of `count` d-dimensional rows; degenerate coordinates get
// unit scale.
void set_standardization(RegressionNet& net, std::span<const double> inputs, int count);

struct AdamState {
    Vec m, v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Standard bias-corrected update; increments the step counter.
void adam_step(Vec& theta, const Vec& grad, AdamState& state, double lr);

// Row-major views over pooled sample arrays.
struct RegressionBatch {
    std::span<const double> inputs;  // count x d   (states at t_n)
    std::span<const double> noise;   // count x d   (Brownian increments over [t_n, t_n+1])
    std::span<const double> targets; // count x J
    int count = 0;
    int dim = 0;
    int grid_count = 0;
};

// Mean over the batch of sum_j (target_j - y_j - (z dw)_j)^2. With fit_z
// false the z head is ignored (plain regression, no control variate).
double loss_batch(const RegressionNet& net, const RegressionBatch& batch, bool fit_z = true);

// Loss plus gradient with respect to every parameter. The reduction runs over
// a fixed number of chunks, so results do not depend on the worker count.
double loss_and_gradient(const RegressionNet& net, const RegressionBatch& batch, Vec& grad,
                         bool fit_z = true);

struct TrainConfig {
    int batches_per_epoch = 100;
    int batch_size = 50;
    int val_size = 500;
    int val_every = 30;
    int patience = 5;
    int max_iters = 3000;
    double lr = 1e-3;
    bool fit_z = true;
    std::uint64_t seed = 2718;
};

struct TrainOutcome {
    double best_validation = 0.0;
    int iterations = 0;
};

// Minibatch Adam on the regression loss. Tracks the validation loss every
// `val_every` iterations, halves the learning rate on checks without
// improvement, stops after `patience` consecutive flat checks or `max_iters`
// iterations, and restores the best-validation parameters. Deterministic
// given (net, data, config).
TrainOutcome train_time_step(RegressionNet& net, const RegressionBatch& train,
                             const RegressionBatch& validation, const TrainConfig& cfg);

} // namespace fbsde
