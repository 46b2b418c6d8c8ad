#pragma once

#include "layerwise/dataset.hpp"
#include "layerwise/layer_trainer.hpp"
#include "layerwise/network.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace layerwise {

/// Trained probes adjust both W and V, so k = (n + m) p. Untrained probes
/// keep a random W and only solve V, so k = m p.
enum class ProbeMode { Trained, Untrained };

std::string_view to_string(ProbeMode mode) noexcept;
std::optional<ProbeMode> parse_probe_mode(std::string_view name) noexcept;

struct ProbeResult {
    std::size_t width = 0;      ///< p
    std::size_t weights = 0;    ///< k
    double sigma2 = 0.0;        ///< test mean squared error
    double train_sigma2 = 0.0;  ///< same on the training split, for diagnostics
    ProbeMode mode = ProbeMode::Trained;
};

/// Expected squared error as a function of weight count:
///   sigma2(k) = alpha k^-lambda + beta k / N
/// The first term is approximation error, the second estimation error.
struct ScalingModel {
    double alpha = 0.0;
    double lambda = 0.0;
    double beta = 0.0;
    std::size_t samples = 0;  ///< N, the training sample count

    double sigma2(double k) const;
};

struct PowerLaw {
    double alpha = 0.0;
    double lambda = 0.0;
};

struct OptimalK {
    double k_real = 0.0;     ///< stationary point (alpha lambda N / beta)^(1 / (lambda + 1))
    std::size_t k_o = 1;     ///< better of floor / ceil under sigma2, at least 1
};

struct GrowthConfig {
    std::vector<std::size_t> probe_widths{1, 2, 3, 4};
    std::size_t beta_probe_width = 8;
    std::size_t max_layers = 8;
    TrainConfig train;
    /// Probes reuse `train` with this cycle cap (patience clamped to it).
    std::size_t probe_max_cycles = 50;
    ProbeMode probe_mode = ProbeMode::Trained;
    /// Upper bound on any chosen layer width; widths are also capped at the
    /// training sample count.
    std::size_t max_width = 256;
    /// A candidate layer is kept only if it lowers the best test cost by this
    /// relative margin.
    double improvement_margin = 1e-6;
    /// Concurrent probe trainings. Results do not depend on this.
    std::size_t jobs = 1;

    void validate() const;
};

std::size_t weight_count(std::size_t width, std::size_t n, std::size_t m, ProbeMode mode);

/// Seed for a probe of width p on layer `layer` (0-based): seed ^ p ^ (layer << 32).
std::uint64_t probe_seed(std::uint64_t seed, std::size_t width, std::size_t layer) noexcept;

ProbeResult run_probe(const Dataset& train, const Dataset& test, std::size_t width, ProbeMode mode,
                      const TrainConfig& cfg);

/// Ordinary least squares of ln sigma2 on ln k: ln sigma2 = ln alpha - lambda ln k.
/// Throws InsufficientProbes with fewer than two distinct k, NonPositiveSigma
/// when any sigma2 <= 0.
PowerLaw fit_alpha_lambda(std::span<const ProbeResult> probes);

/// beta = (sigma2(k) - alpha k^-lambda) N / k. Throws NegativeBeta when <= 0.
double fit_beta(const ProbeResult& probe, double alpha, double lambda, std::size_t samples);

OptimalK optimal_k(double alpha, double lambda, double beta, std::size_t samples);

/// The closed form as sometimes quoted, (alpha lambda / beta) N^(1 / (lambda + 1)).
/// It is not the minimizer of sigma2(k); reported alongside for comparison only.
double quoted_k(double alpha, double lambda, double beta, std::size_t samples);

/// p = max(1, round_half_up(k_o / divisor)), divisor n + m (Trained) or m (Untrained).
std::size_t width_from_k(std::size_t k_o, std::size_t n, std::size_t m, ProbeMode mode);

/// How the width of one layer was chosen.
struct WidthPlan {
    std::vector<ProbeResult> probes;  ///< small probes (first layer only)
    std::optional<ProbeResult> beta_probe;
    std::optional<PowerLaw> power_law;
    std::optional<ScalingModel> model;
    std::optional<OptimalK> k;
    std::size_t width = 0;
    std::string fallback_reason;  ///< nonempty when the model could not be used
};

/// Probes a layer's input and picks its width. Pass `power_law` to reuse
/// (alpha, lambda) from an earlier layer; only beta is refit then.
WidthPlan plan_width(const Dataset& train, const Dataset& test, std::size_t layer,
                     const std::optional<PowerLaw>& power_law, const GrowthConfig& cfg);

struct LayerAttempt {
    WidthPlan plan;
    TrainedLayer trained;
    bool accepted = false;
};

struct GrowthResult {
    Network network;
    std::vector<LayerAttempt> attempts;  ///< every layer trained, including a rejected candidate
};

/// Grows the network one layer at a time. The first layer is always kept;
/// each further candidate is kept iff its best test cost beats the incumbent
/// by `improvement_margin` (relative). Stops at the first rejection or at
/// max_layers.
GrowthResult grow_network(const Split& data, const GrowthConfig& cfg);

} // namespace layerwise
