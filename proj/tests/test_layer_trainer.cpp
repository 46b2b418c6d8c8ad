#include "oracles.hpp"

#include "layerwise/errors.hpp"
#include "layerwise/layer_trainer.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace layerwise;

namespace {

Dataset random_dataset(std::size_t n, std::size_t m, std::size_t samples, std::mt19937_64& gen) {
    return Dataset{oracle::random_matrix(n, samples, gen), oracle::random_matrix(m, samples, gen)};
}

// Cost of W with activation params and head held fixed, computed with loops.
double frozen_cost(const Matrix& w, const ActivationParams& p, const Matrix& v, const Dataset& d) {
    const Matrix z = apply(p, oracle::naive_matmul(w, d.inputs));
    return oracle::loop_cost(v, z, d.targets);
}

} // namespace

TEST_CASE("init_weights: deterministic, bounded, centered") {
    CHECK(init_weights(5, 7, 99, 1.0) == init_weights(5, 7, 99, 1.0));
    CHECK_FALSE(init_weights(5, 7, 99, 1.0) == init_weights(5, 7, 100, 1.0));

    const Matrix w = init_weights(100, 100, 3, 1.0);
    double sum = 0.0;
    for (double x : w.values()) {
        CHECK(x >= -1.0);
        CHECK(x <= 1.0);
        sum += x;
    }
    // Standard error of the mean is 1/sqrt(3e4) ~ 0.0058; 0.05 is > 8 sigma.
    CHECK(std::abs(sum / 1e4) < 0.05);

    CHECK(init_weights(3, 2, 1, 0.0) == Matrix(3, 2));
}

TEST_CASE("layer_error: vanishing cases") {
    const OutputHead v{Matrix{{1.0, 2.0}}};
    const Matrix z{{1, 0}, {0, 1}};
    const Matrix t = matmul(v.weights, z);
    CHECK(layer_error(v, z, t, Matrix(2, 2, 1.0)) == Matrix(2, 2));
    CHECK(layer_error(v, z, Matrix{{5, -5}}, Matrix(2, 2)) == Matrix(2, 2));
    CHECK_THROWS_AS(layer_error(v, z, t, Matrix(2, 3)), DimensionMismatch);
}

TEST_CASE("layer_error: E X^T matches finite differences with V frozen") {
    std::mt19937_64 gen(67);
    const Dataset d = random_dataset(3, 2, 20, gen);
    const Matrix w = oracle::random_matrix(4, 3, gen);
    const Matrix y = matmul(w, d.inputs);
    const ActivationParams p = fit_params(y, ActivationKind::Sigmoid);
    const OutputHead v = solve_head(apply(p, y), d.targets);

    const Matrix e = layer_error(v, apply(p, y), d.targets, derivative_mask(p, y));
    const Matrix grad = matmul_transposed(e, d.inputs);

    const double h = 1e-6;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            Matrix wp = w, wm = w;
            wp(i, j) += h;
            wm(i, j) -= h;
            const double fd = (frozen_cost(wp, p, v.weights, d) - frozen_cost(wm, p, v.weights, d)) / (2 * h);
            CHECK(std::abs(grad(i, j) - fd) <= 1e-4 * std::max(std::abs(fd), 1e-6));
        }
}

TEST_CASE("step_size") {
    CHECK(step_size(Matrix{{0.15}}, 0.15) == 1.0);
    CHECK(step_size(Matrix{{3, 4}}, 0.15) == doctest::Approx(0.03).epsilon(1e-15));
    CHECK(step_size(Matrix{{3}}, Matrix{{1}}, 0.15) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK_THROWS_AS(step_size(Matrix(2, 3), Matrix(4, 3), 0.15), ZeroGradient);
}

TEST_CASE("train_cycle: update norm equals step scale") {
    std::mt19937_64 gen(71);
    const Dataset train = random_dataset(3, 1, 30, gen);
    const Dataset test = random_dataset(3, 1, 10, gen);
    TrainConfig cfg;
    Matrix w = init_weights(2, 3, 5, 1.0);
    for (int c = 0; c < 10; ++c) {
        const CycleResult r = train_cycle(w, train, test, cfg);
        CHECK_FALSE(r.converged);
        CHECK(r.report.delta > 0);
        const double norm = frobenius_norm(r.next_weights - w);
        CHECK(std::abs(norm - cfg.step_scale) <= 1e-12 * cfg.step_scale);
        w = r.next_weights;
    }
}

TEST_CASE("train_cycle: test cost replays with training-fitted params") {
    std::mt19937_64 gen(73);
    const Dataset train = random_dataset(4, 2, 50, gen);
    const Dataset test = random_dataset(4, 2, 15, gen);
    TrainConfig cfg;
    const Matrix w = init_weights(3, 4, 9, 1.0);
    const CycleResult r = train_cycle(w, train, test, cfg);

    // Independent replay: refit on training pre-activations, apply to test.
    const Matrix y_tr = oracle::naive_matmul(w, train.inputs);
    const ActivationParams p = fit_params(y_tr, cfg.activation);
    CHECK(p == r.snapshot.layer.params);
    const Matrix z_te = apply(p, oracle::naive_matmul(w, test.inputs));
    CHECK(r.report.test_cost == doctest::Approx(oracle::loop_cost(r.snapshot.head.weights, z_te, test.targets)).epsilon(1e-12));
    CHECK(r.snapshot.layer.weights == w);
}

TEST_CASE("train_cycle: zero residual is a fixed point") {
    // Targets are the layer's own features; with z = +-0.5 the Gram matrix is
    // exactly 1, so the solved head is exactly 1 and the residual exactly 0.
    const Matrix x{{1, -1, 1, -1}};
    const Matrix w{{1.0}};
    const ActivationParams p = fit_params(matmul(w, x), ActivationKind::RectAmp);
    const Dataset train{x, apply(p, matmul(w, x))};
    TrainConfig cfg;
    const CycleResult r = train_cycle(w, train, train, cfg);
    CHECK(r.converged);
    CHECK(r.next_weights == w);
    CHECK(r.report.train_cost == 0.0);
    CHECK(r.report.test_cost == 0.0);
    CHECK(r.report.delta == 0.0);
}

TEST_CASE("train_layer: best snapshot, history, determinism") {
    std::mt19937_64 gen(79);
    const Dataset train = random_dataset(4, 1, 120, gen);
    Dataset test = random_dataset(4, 1, 40, gen);
    // Targets from a smooth function so training has something to learn.
    auto target = [](const Matrix& x, std::size_t s) { return std::sin(2 * x(0, s)) + x(1, s) * x(2, s); };
    Dataset tr = train;
    for (std::size_t s = 0; s < tr.samples(); ++s) tr.targets(0, s) = target(tr.inputs, s);
    for (std::size_t s = 0; s < test.samples(); ++s) test.targets(0, s) = target(test.inputs, s);

    TrainConfig cfg;
    cfg.seed = 1234;
    cfg.max_cycles = 60;
    cfg.patience = 15;
    const TrainedLayer a = train_layer(tr, test, 5, cfg);
    const TrainedLayer b = train_layer(tr, test, 5, cfg);

    REQUIRE_FALSE(a.history.empty());
    CHECK(a.history.size() <= 60);
    double prefix_min = INFINITY;
    double min_cost = INFINITY;
    for (const auto& r : a.history) {
        const double next = std::min(prefix_min, r.test_cost);
        CHECK(next <= prefix_min);
        CHECK(r.is_best == (r.test_cost < prefix_min));
        prefix_min = next;
        min_cost = std::min(min_cost, r.test_cost);
        CHECK(r.train_cost >= 0);
        CHECK(r.delta > 0);
    }
    CHECK(a.best_test_cost == min_cost);
    CHECK(a.best_test_cost < a.history.front().test_cost);

    const double replay = quadratic_cost(a.head, layer_forward(a.layer, test.inputs), test.targets);
    CHECK(std::abs(replay - a.best_test_cost) <= 1e-10 * a.best_test_cost);

    CHECK(a.layer.weights == b.layer.weights);
    CHECK(a.head.weights == b.head.weights);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].test_cost == b.history[i].test_cost);
        CHECK(a.history[i].delta == b.history[i].delta);
    }
}

TEST_CASE("train_layer: linear targets in the sigmoid small-signal regime improve") {
    std::mt19937_64 gen(83);
    Dataset train{oracle::random_matrix(3, 200, gen), Matrix()};
    Dataset test{oracle::random_matrix(3, 60, gen), Matrix()};
    const Matrix m{{0.5, -1.0, 0.25}};
    train.targets = oracle::naive_matmul(m, train.inputs);
    test.targets = oracle::naive_matmul(m, test.inputs);
    TrainConfig cfg;
    cfg.activation = ActivationKind::Sigmoid;
    cfg.seed = 77;
    const TrainedLayer t = train_layer(train, test, 2, cfg);
    CHECK(t.best_test_cost < t.history.front().test_cost);
}

TEST_CASE("train_layer: single cycle and argument checks") {
    std::mt19937_64 gen(89);
    const Dataset d = random_dataset(2, 1, 20, gen);
    TrainConfig cfg;
    cfg.max_cycles = 1;
    cfg.patience = 1;
    const TrainedLayer t = train_layer(d, d, 3, cfg);
    REQUIRE(t.history.size() == 1);
    CHECK(t.history[0].is_best);
    CHECK(t.best_test_cost == t.history[0].test_cost);

    CHECK_THROWS_AS(train_layer(d, d, 0, cfg), InvalidArgument);
    cfg.patience = 2;
    CHECK_THROWS_AS(train_layer(d, d, 3, cfg), InvalidArgument);
}

TEST_CASE("layer_forward: frozen replay and bounds") {
    std::mt19937_64 gen(97);
    const Matrix x = oracle::random_matrix(3, 25, gen);
    const Matrix w = oracle::random_matrix(4, 3, gen);
    const ActivationParams p = fit_params(matmul(w, x), ActivationKind::RectAmp);
    const LayerState layer{w, p};
    CHECK(layer_forward(layer, x) == apply(p, matmul(w, x)));

    const LayerState centered{w, ActivationParams{ActivationKind::RectAmp, 0.5, 1.0, 0.0}};
    CHECK(layer_forward(centered, Matrix(3, 4)) == Matrix(4, 4));

    const Matrix big = oracle::random_matrix(3, 200, gen, -100, 100);
    CHECK(max_abs(layer_forward(layer, big)) <= p.a * p.b);

    CHECK_THROWS_AS(layer_forward(layer, Matrix(2, 5)), DimensionMismatch);
}
