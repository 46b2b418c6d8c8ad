#include "layerwise/configurator.hpp"

#include "layerwise/errors.hpp"
#include "layerwise/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace layerwise {

std::string_view to_string(ProbeMode mode) noexcept {
    return mode == ProbeMode::Trained ? "trained" : "untrained";
}

std::optional<ProbeMode> parse_probe_mode(std::string_view name) noexcept {
    if (name == "trained") return ProbeMode::Trained;
    if (name == "untrained") return ProbeMode::Untrained;
    return std::nullopt;
}

double ScalingModel::sigma2(double k) const {
    return alpha * std::pow(k, -lambda) + beta * k / static_cast<double>(samples);
}

void GrowthConfig::validate() const {
    train.validate();
    if (probe_widths.size() < 2) throw InvalidArgument("need at least two probe widths");
    for (std::size_t i = 0; i < probe_widths.size(); ++i) {
        if (probe_widths[i] == 0) throw InvalidArgument("probe widths must be positive");
        if (i > 0 && probe_widths[i] <= probe_widths[i - 1]) {
            throw InvalidArgument("probe widths must be strictly increasing");
        }
    }
    if (beta_probe_width <= probe_widths.back()) {
        throw InvalidArgument(fmt::format("beta probe width {} must exceed the largest probe width {}",
                                          beta_probe_width, probe_widths.back()));
    }
    if (max_layers == 0) throw InvalidArgument("max_layers must be positive");
    if (probe_max_cycles == 0) throw InvalidArgument("probe_max_cycles must be positive");
    if (max_width == 0) throw InvalidArgument("max_width must be positive");
    if (!(improvement_margin >= 0.0 && improvement_margin < 1.0)) {
        throw InvalidArgument("improvement_margin must be in [0, 1)");
    }
    if (jobs == 0) throw InvalidArgument("jobs must be positive");
}

std::size_t weight_count(std::size_t width, std::size_t n, std::size_t m, ProbeMode mode) {
    return mode == ProbeMode::Trained ? (n + m) * width : m * width;
}

std::uint64_t probe_seed(std::uint64_t seed, std::size_t width, std::size_t layer) noexcept {
    return seed ^ static_cast<std::uint64_t>(width) ^ (static_cast<std::uint64_t>(layer) << 32);
}

ProbeResult run_probe(const Dataset& train, const Dataset& test, std::size_t width, ProbeMode mode,
                      const TrainConfig& cfg) {
    if (width == 0) throw InvalidArgument("run_probe: width must be positive");
    ProbeResult r;
    r.width = width;
    r.mode = mode;
    r.weights = weight_count(width, train.input_width(), train.target_width(), mode);

    LayerState layer;
    OutputHead head;
    if (mode == ProbeMode::Trained) {
        TrainedLayer trained = train_layer(train, test, width, cfg);
        layer = std::move(trained.layer);
        head = std::move(trained.head);
    } else {
        layer.weights = init_weights(width, train.input_width(), cfg.seed, cfg.init_range);
        const Matrix y = matmul(layer.weights, train.inputs);
        layer.params = fit_params(y, cfg.activation, cfg.slope_norm);
        head = solve_head(apply(layer.params, y), train.targets);
    }
    r.sigma2 = mean_sq_error(head, layer_forward(layer, test.inputs), test.targets);
    r.train_sigma2 = mean_sq_error(head, layer_forward(layer, train.inputs), train.targets);
    return r;
}

PowerLaw fit_alpha_lambda(std::span<const ProbeResult> probes) {
    if (probes.size() < 2) throw InsufficientProbes("need at least two probes");
    double sx = 0.0, sy = 0.0;
    for (const auto& p : probes) {
        if (!(p.sigma2 > 0.0)) {
            throw NonPositiveSigma(fmt::format("probe p={} has sigma2={}", p.width, p.sigma2));
        }
        if (p.weights == 0) throw InsufficientProbes("probe with zero weights");
        sx += std::log(static_cast<double>(p.weights));
        sy += std::log(p.sigma2);
    }
    const double count = static_cast<double>(probes.size());
    const double mx = sx / count;
    const double my = sy / count;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : probes) {
        const double dx = std::log(static_cast<double>(p.weights)) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(p.sigma2) - my);
    }
    if (!(sxx > 0.0)) throw InsufficientProbes("probes need at least two distinct weight counts");
    const double slope = sxy / sxx;
    return PowerLaw{std::exp(my - slope * mx), -slope};
}

double fit_beta(const ProbeResult& probe, double alpha, double lambda, std::size_t samples) {
    if (probe.weights == 0 || samples == 0) throw InvalidArgument("fit_beta: k and N must be positive");
    const double k = static_cast<double>(probe.weights);
    const double beta = (probe.sigma2 - alpha * std::pow(k, -lambda)) * static_cast<double>(samples) / k;
    if (!(beta > 0.0)) {
        throw NegativeBeta(fmt::format("sigma2({})={} is at or below the approximation term {}", k,
                                       probe.sigma2, alpha * std::pow(k, -lambda)));
    }
    return beta;
}

OptimalK optimal_k(double alpha, double lambda, double beta, std::size_t samples) {
    if (!(alpha > 0.0 && lambda > 0.0 && beta > 0.0 && samples > 0)) {
        throw InvalidArgument("optimal_k: alpha, lambda, beta, N must be positive");
    }
    const ScalingModel model{alpha, lambda, beta, samples};
    OptimalK out;
    out.k_real = std::pow(alpha * lambda * static_cast<double>(samples) / beta, 1.0 / (lambda + 1.0));

    // sigma2 is convex in k, so the integer minimizer is next to k_real.
    constexpr double cap = 1e15;
    const double lo = std::max(1.0, std::floor(std::min(out.k_real, cap)));
    const double hi = std::max(1.0, std::ceil(std::min(out.k_real, cap)));
    const double best = model.sigma2(hi) < model.sigma2(lo) ? hi : lo;
    out.k_o = static_cast<std::size_t>(best);
    return out;
}

double quoted_k(double alpha, double lambda, double beta, std::size_t samples) {
    return (alpha * lambda / beta) * std::pow(static_cast<double>(samples), 1.0 / (lambda + 1.0));
}

std::size_t width_from_k(std::size_t k_o, std::size_t n, std::size_t m, ProbeMode mode) {
    const std::size_t divisor = mode == ProbeMode::Trained ? n + m : m;
    if (divisor == 0) throw InvalidArgument("width_from_k: zero divisor");
    return std::max<std::size_t>(1, (2 * k_o + divisor) / (2 * divisor));
}

namespace {

TrainConfig probe_config(const GrowthConfig& cfg, std::size_t width, std::size_t layer) {
    TrainConfig t = cfg.train;
    t.max_cycles = cfg.probe_max_cycles;
    t.patience = std::min(t.patience, t.max_cycles);
    t.seed = probe_seed(cfg.train.seed, width, layer);
    return t;
}

std::vector<ProbeResult> run_probes(const Dataset& train, const Dataset& test,
                                    std::span<const std::size_t> widths, std::size_t layer,
                                    const GrowthConfig& cfg) {
    std::vector<ProbeResult> results(widths.size());
    std::vector<std::exception_ptr> errors(widths.size());
    auto work = [&](std::size_t i) {
        try {
            results[i] = run_probe(train, test, widths[i], cfg.probe_mode,
                                   probe_config(cfg, widths[i], layer));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    const std::size_t threads = std::min(cfg.jobs, widths.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < widths.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < widths.size();) work(i);
            });
        }
    }
    // Report the first failure in width order, independent of scheduling.
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

} // namespace

WidthPlan plan_width(const Dataset& train, const Dataset& test, std::size_t layer,
                     const std::optional<PowerLaw>& power_law, const GrowthConfig& cfg) {
    const std::size_t n = train.input_width();
    const std::size_t m = train.target_width();
    const std::size_t samples = train.samples();
    const std::size_t cap = std::min(cfg.max_width, samples);

    WidthPlan plan;
    plan.width = std::min(cfg.beta_probe_width, cap);
    try {
        if (power_law) {
            plan.power_law = power_law;
        } else {
            plan.probes = run_probes(train, test, cfg.probe_widths, layer, cfg);
            plan.power_law = fit_alpha_lambda(plan.probes);
        }
        const PowerLaw law = *plan.power_law;
        if (!(law.lambda > 0.0) || !std::isfinite(law.lambda) || !std::isfinite(law.alpha)) {
            plan.fallback_reason = fmt::format("fitted lambda={} is not a positive decay rate", law.lambda);
            return plan;
        }

        const std::size_t beta_width[] = {cfg.beta_probe_width};
        plan.beta_probe = run_probes(train, test, beta_width, layer, cfg).front();
        const double beta = fit_beta(*plan.beta_probe, law.alpha, law.lambda, samples);
        plan.model = ScalingModel{law.alpha, law.lambda, beta, samples};
        plan.k = optimal_k(law.alpha, law.lambda, beta, samples);
        plan.width = std::min(width_from_k(plan.k->k_o, n, m, cfg.probe_mode), cap);
    } catch (const InsufficientProbes& e) {
        plan.fallback_reason = e.what();
    } catch (const NonPositiveSigma& e) {
        plan.fallback_reason = e.what();
    } catch (const NegativeBeta& e) {
        plan.fallback_reason = e.what();
    }
    return plan;
}

GrowthResult grow_network(const Split& data, const GrowthConfig& cfg) {
    cfg.validate();
    data.train.validate();
    data.test.validate();
    if (data.train.input_width() != data.test.input_width() ||
        data.train.target_width() != data.test.target_width()) {
        throw DimensionMismatch("train and test splits have different widths");
    }

    Dataset train = data.train;
    Dataset test = data.test;
    std::optional<PowerLaw> law;
    std::vector<LayerAttempt> attempts;
    std::vector<LayerState> layers;
    OutputHead head;
    double incumbent = std::numeric_limits<double>::infinity();

    for (std::size_t layer = 0; layer < cfg.max_layers; ++layer) {
        LayerAttempt attempt;
        attempt.plan = plan_width(train, test, layer, law, cfg);
        if (!law && attempt.plan.power_law && attempt.plan.power_law->lambda > 0.0) {
            law = attempt.plan.power_law;
        }

        TrainConfig tcfg = cfg.train;
        tcfg.seed = derive_seed(cfg.train.seed, layer + 1);
        attempt.trained = train_layer(train, test, attempt.plan.width, tcfg);
        attempt.accepted =
            layer == 0 || attempt.trained.best_test_cost < incumbent * (1.0 - cfg.improvement_margin);
        attempts.push_back(attempt);
        if (!attempt.accepted) break;

        incumbent = attempt.trained.best_test_cost;
        layers.push_back(attempt.trained.layer);
        head = attempt.trained.head;
        train.inputs = layer_forward(layers.back(), train.inputs);
        test.inputs = layer_forward(layers.back(), test.inputs);
    }

    nlohmann::json meta;
    meta["seed"] = cfg.train.seed;
    meta["growth"] = {
        {"probe_widths", cfg.probe_widths},
        {"beta_probe_width", cfg.beta_probe_width},
        {"max_layers", cfg.max_layers},
        {"probe_mode", std::string(to_string(cfg.probe_mode))},
        {"probe_max_cycles", cfg.probe_max_cycles},
        {"max_width", cfg.max_width},
        {"improvement_margin", cfg.improvement_margin},
        {"max_cycles", cfg.train.max_cycles},
        {"patience", cfg.train.patience},
        {"step_scale", cfg.train.step_scale},
        {"init_range", cfg.train.init_range},
        {"activation", std::string(to_string(cfg.train.activation))},
        {"slope_norm", std::string(to_string(cfg.train.slope_norm))},
    };
    nlohmann::json costs = nlohmann::json::array();
    nlohmann::json widths = nlohmann::json::array();
    for (const auto& a : attempts) {
        if (!a.accepted) continue;
        costs.push_back(a.trained.best_test_cost);
        widths.push_back(a.plan.width);
    }
    meta["layer_best_test_cost"] = std::move(costs);
    meta["layer_widths"] = std::move(widths);
    if (law) meta["alpha"] = law->alpha, meta["lambda"] = law->lambda;

    Network net(std::move(layers), std::move(head), std::move(meta));
    net.meta()["train_mse"] = evaluate(net, data.train.inputs, data.train.targets).mse;
    net.meta()["test_mse"] = evaluate(net, data.test.inputs, data.test.targets).mse;
    return GrowthResult{std::move(net), std::move(attempts)};
}

} // namespace layerwise
