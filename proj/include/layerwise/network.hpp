#pragma once

#include "layerwise/layer_trainer.hpp"
#include "layerwise/matrix.hpp"
#include "layerwise/output_head.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace layerwise {

inline constexpr int kModelFormatVersion = 1;

/// Frozen stack of nonlinear layers followed by a linear head.
///
/// The constructor enforces the chain: layer i's output width is layer i+1's
/// input width, and the head reads the last layer's width. At least one layer
/// is required.
class Network {
public:
    Network(std::vector<LayerState> layers, OutputHead head,
            nlohmann::json meta = nlohmann::json::object());

    const std::vector<LayerState>& layers() const noexcept { return layers_; }
    const OutputHead& head() const noexcept { return head_; }
    const nlohmann::json& meta() const noexcept { return meta_; }
    nlohmann::json& meta() noexcept { return meta_; }

    std::size_t input_width() const noexcept { return layers_.front().input_width(); }
    std::size_t output_width() const noexcept { return head_.weights.rows(); }

private:
    std::vector<LayerState> layers_;
    OutputHead head_;
    nlohmann::json meta_;
};

/// Output of the last nonlinear layer (the features the head reads).
Matrix features(const Network& net, const Matrix& x);

/// m x N predictions.
Matrix forward(const Network& net, const Matrix& x);

struct Evaluation {
    double cost = 0.0;  ///< 1/2 sum of squared residuals
    double mse = 0.0;   ///< mean over samples of the squared residual norm
};

Evaluation evaluate(const Network& net, const Matrix& x, const Matrix& t);

nlohmann::json to_json(const Network& net);

/// Throws FormatError on any schema violation, naming the offending field.
Network network_from_json(const nlohmann::json& doc);

/// Writes to a sibling temporary file and renames it into place, so a failed
/// save never leaves a partial model at `path`.
void save(const Network& net, const std::filesystem::path& path);

Network load(const std::filesystem::path& path);

std::string summary(const Network& net);

} // namespace layerwise
