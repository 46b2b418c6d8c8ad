#include "layerwise/layer_trainer.hpp"

#include "layerwise/errors.hpp"
#include "layerwise/rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace layerwise {

void TrainConfig::validate() const {
    if (max_cycles == 0) throw InvalidArgument("max_cycles must be positive");
    if (patience == 0 || patience > max_cycles) {
        throw InvalidArgument(fmt::format("patience {} must be in [1, max_cycles={}]", patience,
                                          max_cycles));
    }
    if (!(step_scale > 0.0) || !std::isfinite(step_scale)) {
        throw InvalidArgument("step_scale must be positive");
    }
    if (!(init_range >= 0.0) || !std::isfinite(init_range)) {
        throw InvalidArgument("init_range must be non-negative");
    }
}

Matrix init_weights(std::size_t p, std::size_t n, std::uint64_t seed, double range) {
    if (p == 0 || n == 0) throw InvalidArgument("init_weights: empty shape");
    SplitMix64 rng(seed);
    Matrix w(p, n);
    for (double& x : w.values()) x = rng.symmetric(range);
    return w;
}

Matrix layer_error(const OutputHead& v, const Matrix& z, const Matrix& t, const Matrix& d) {
    if (d.rows() != z.rows() || d.cols() != z.cols()) {
        throw DimensionMismatch(fmt::format("layer_error: mask {}x{} vs features {}x{}", d.rows(),
                                            d.cols(), z.rows(), z.cols()));
    }
    const Matrix residual = v.predict(z) - t;
    return hadamard(d, transposed_matmul(v.weights, residual));
}

double step_size(const Matrix& gradient, double step_scale) {
    const double norm = frobenius_norm(gradient);
    if (norm < 1e-300) throw ZeroGradient("gradient vanished");
    return step_scale / norm;
}

double step_size(const Matrix& e, const Matrix& x, double step_scale) {
    return step_size(matmul_transposed(e, x), step_scale);
}

CycleResult train_cycle(const Matrix& weights, const Dataset& train, const Dataset& test,
                        const TrainConfig& cfg) {
    if (weights.cols() != train.input_width() || weights.cols() != test.input_width()) {
        throw DimensionMismatch(fmt::format("train_cycle: weights take {} inputs, data has {}/{}",
                                            weights.cols(), train.input_width(),
                                            test.input_width()));
    }

    const Matrix y = matmul(weights, train.inputs);
    const ActivationParams params = fit_params(y, cfg.activation, cfg.slope_norm);
    const Matrix z = apply(params, y);
    const OutputHead head = solve_head(z, train.targets);

    CycleResult out;
    out.snapshot = LayerSnapshot{LayerState{weights, params}, head};
    out.report.train_cost = quadratic_cost(head, z, train.targets);
    out.report.test_cost =
        quadratic_cost(head, layer_forward(out.snapshot.layer, test.inputs), test.targets);

    const Matrix e = layer_error(head, z, train.targets, derivative_mask(params, y));
    const Matrix gradient = matmul_transposed(e, train.inputs);
    try {
        const double delta = step_size(gradient, cfg.step_scale);
        out.report.delta = delta;
        out.next_weights = weights - delta * gradient;
    } catch (const ZeroGradient&) {
        out.converged = true;
        out.next_weights = weights;
    }
    return out;
}

TrainedLayer train_layer(const Dataset& train, const Dataset& test, std::size_t width,
                         const TrainConfig& cfg) {
    cfg.validate();
    if (width == 0) throw InvalidArgument("train_layer: width must be positive");
    if (train.samples() == 0 || test.samples() == 0) {
        throw TooFewSamples("train_layer: train and test splits must be nonempty");
    }

    Matrix weights = init_weights(width, train.input_width(), cfg.seed, cfg.init_range);

    TrainedLayer best;
    best.best_test_cost = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    for (std::size_t cycle = 0; cycle < cfg.max_cycles; ++cycle) {
        CycleResult step = train_cycle(weights, train, test, cfg);
        step.report.cycle = cycle;
        if (step.report.test_cost < best.best_test_cost) {
            step.report.is_best = true;
            best.best_test_cost = step.report.test_cost;
            best.layer = std::move(step.snapshot.layer);
            best.head = std::move(step.snapshot.head);
            stale = 0;
        } else {
            ++stale;
        }
        best.history.push_back(step.report);
        if (step.converged || stale >= cfg.patience) break;
        weights = std::move(step.next_weights);
    }
    return best;
}

Matrix layer_forward(const LayerState& layer, const Matrix& x) {
    if (x.rows() != layer.input_width()) {
        throw DimensionMismatch(fmt::format("layer_forward: layer takes {} inputs, got {}",
                                            layer.input_width(), x.rows()));
    }
    return apply(layer.params, matmul(layer.weights, x));
}

} // namespace layerwise
