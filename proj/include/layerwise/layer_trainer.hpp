#pragma once

#include "layerwise/activation.hpp"
#include "layerwise/dataset.hpp"
#include "layerwise/matrix.hpp"
#include "layerwise/output_head.hpp"

#include <cstdint>
#include <vector>

namespace layerwise {

/// One nonlinear layer: weights W (p outputs x n inputs) and frozen activation.
struct LayerState {
    Matrix weights;
    ActivationParams params;

    std::size_t input_width() const noexcept { return weights.cols(); }
    std::size_t output_width() const noexcept { return weights.rows(); }
};

struct TrainConfig {
    std::size_t max_cycles = 200;
    std::size_t patience = 20;
    double step_scale = 0.15;
    double init_range = 1.0;
    std::uint64_t seed = 0;
    ActivationKind activation = ActivationKind::RectAmp;
    SlopeNorm slope_norm = SlopeNorm::Sum;

    void validate() const;
};

struct CycleReport {
    std::size_t cycle = 0;
    double train_cost = 0.0;  ///< 1/2 sum of squared residuals, training split
    double test_cost = 0.0;   ///< same, test split, with training-fitted params and head
    double delta = 0.0;       ///< step size used; 0 when the gradient vanished and no step was taken
    bool is_best = false;
};

/// Everything needed to replay a cycle's costs.
struct LayerSnapshot {
    LayerState layer;
    OutputHead head;
};

struct CycleResult {
    Matrix next_weights;
    CycleReport report;
    LayerSnapshot snapshot;
    bool converged = false;  ///< gradient vanished; next_weights == current weights
};

struct TrainedLayer {
    LayerState layer;
    OutputHead head;
    std::vector<CycleReport> history;
    double best_test_cost = 0.0;
};

/// p x n matrix, entries rng.symmetric(range) in row-major order with
/// rng = SplitMix64(seed).
Matrix init_weights(std::size_t p, std::size_t n, std::uint64_t seed, double range);

/// Error signal through the virtual linear head: E = D .* (V^T (V Z - T)).
Matrix layer_error(const OutputHead& v, const Matrix& z, const Matrix& t, const Matrix& d);

/// step_scale / ||G||_F. Throws ZeroGradient when ||G||_F < 1e-300.
double step_size(const Matrix& gradient, double step_scale);

/// step_size of G = E X^T.
double step_size(const Matrix& e, const Matrix& x, double step_scale);

/// One pass of the weight-adjustment loop: refit activation params, solve
/// the head, measure both costs, then W <- W - delta * E X^T.
CycleResult train_cycle(const Matrix& weights, const Dataset& train, const Dataset& test,
                        const TrainConfig& cfg);

/// Runs train_cycle until max_cycles, `patience` cycles without a strict
/// test-cost improvement, or a vanishing gradient. Returns the best snapshot.
TrainedLayer train_layer(const Dataset& train, const Dataset& test, std::size_t width,
                         const TrainConfig& cfg);

/// Z = f(W X - mu) with the layer's frozen params.
Matrix layer_forward(const LayerState& layer, const Matrix& x);

} // namespace layerwise
