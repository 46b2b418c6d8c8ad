#include "layerwise/activation.hpp"

#include "layerwise/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace layerwise {

std::string_view to_string(ActivationKind kind) noexcept {
    return kind == ActivationKind::RectAmp ? "rect_amp" : "sigmoid";
}

std::optional<ActivationKind> parse_activation(std::string_view name) noexcept {
    if (name == "rect_amp") return ActivationKind::RectAmp;
    if (name == "sigmoid") return ActivationKind::Sigmoid;
    return std::nullopt;
}

std::string_view to_string(SlopeNorm norm) noexcept {
    return norm == SlopeNorm::Sum ? "sum" : "rms";
}

std::optional<SlopeNorm> parse_slope_norm(std::string_view name) noexcept {
    if (name == "sum") return SlopeNorm::Sum;
    if (name == "rms") return SlopeNorm::Rms;
    return std::nullopt;
}

void ActivationParams::validate() const {
    if (!(a > 0.0) || !std::isfinite(a) || !(b > 0.0) || !std::isfinite(b) || !std::isfinite(mu)) {
        throw InvalidArgument(fmt::format("invalid activation params a={} b={} mu={}", a, b, mu));
    }
}

double center_mean(const Matrix& y) {
    if (y.empty()) throw DimensionMismatch("center_mean: empty matrix");
    double s = 0.0;
    for (double v : y.values()) s += v;
    return s / static_cast<double>(y.size());
}

ActivationParams fit_params(const Matrix& y, ActivationKind kind, SlopeNorm norm) {
    if (y.size() < 2) throw DegenerateInput("fit_params: need at least two entries");

    ActivationParams p;
    p.kind = kind;
    p.mu = center_mean(y);

    std::vector<double> dev;
    dev.reserve(y.size());
    double ss = 0.0;
    for (double v : y.values()) {
        const double c = v - p.mu;
        ss += c * c;
        dev.push_back(std::abs(c));
    }
    if (!(ss > 0.0)) throw DegenerateInput("fit_params: all centered entries are zero");
    if (norm == SlopeNorm::Rms) ss /= static_cast<double>(y.size());
    p.a = 1.0 / std::sqrt(ss);

    // At most `allowed` entries may lie strictly above b.
    const std::size_t n = dev.size();
    const std::size_t allowed = (3 * n) / 10;
    const auto rank = dev.begin() + static_cast<std::ptrdiff_t>(n - 1 - allowed);
    std::nth_element(dev.begin(), rank, dev.end());
    p.b = *rank;
    if (!(p.b > 0.0)) {
        throw DegenerateInput("fit_params: saturation threshold is zero (too many entries at the mean)");
    }
    return p;
}

double activate(const ActivationParams& p, double y) noexcept {
    const double u = y - p.mu;
    if (p.kind == ActivationKind::RectAmp) return p.a * std::clamp(u, -p.b, p.b);
    // b * tanh(alpha u / 2) is the same curve as b (1 - e^{-alpha u}) / (1 + e^{-alpha u})
    // without overflow for large |u|.
    const double alpha = 2.0 * p.a / p.b;
    return p.b * std::tanh(0.5 * alpha * u);
}

double activate_derivative(const ActivationParams& p, double y) noexcept {
    const double u = y - p.mu;
    if (p.kind == ActivationKind::RectAmp) return std::abs(u) < p.b ? p.a : 0.0;
    const double r = activate(p, y) / p.b;
    return p.a * (1.0 - r * r);
}

Matrix apply(const ActivationParams& p, const Matrix& y) {
    Matrix z(y.rows(), y.cols());
    auto out = z.values();
    auto in = y.values();
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = activate(p, in[i]);
    return z;
}

Matrix derivative_mask(const ActivationParams& p, const Matrix& y) {
    Matrix d(y.rows(), y.cols());
    auto out = d.values();
    auto in = y.values();
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = activate_derivative(p, in[i]);
    return d;
}

} // namespace layerwise
