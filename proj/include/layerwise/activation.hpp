#pragma once

#include "layerwise/matrix.hpp"

#include <optional>
#include <string_view>

namespace layerwise {

enum class ActivationKind { RectAmp, Sigmoid };

/// How the small-signal slope a is normalized when fitted to a layer's
/// pre-activations. `Sum` is a = (sum (y - mu)^2)^-1/2 over every entry;
/// `Rms` divides the sum by the entry count first.
enum class SlopeNorm { Sum, Rms };

std::string_view to_string(ActivationKind kind) noexcept;
std::optional<ActivationKind> parse_activation(std::string_view name) noexcept;
std::string_view to_string(SlopeNorm norm) noexcept;
std::optional<SlopeNorm> parse_slope_norm(std::string_view name) noexcept;

/// Largest fraction of centered pre-activations allowed beyond the saturation
/// threshold b.
inline constexpr double kSaturationFraction = 0.3;

/// Frozen parameters of one layer's activation z = f(y - mu).
///
/// RectAmp:  f(u) = a * clamp(u, -b, b)
/// Sigmoid:  f(u) = b * (1 - e^{-alpha u}) / (1 + e^{-alpha u}),  alpha = 2a/b
struct ActivationParams {
    ActivationKind kind = ActivationKind::RectAmp;
    double a = 1.0;
    double b = 1.0;
    double mu = 0.0;

    /// Throws InvalidArgument unless a, b are positive and finite and mu finite.
    void validate() const;

    friend bool operator==(const ActivationParams&, const ActivationParams&) = default;
};

double center_mean(const Matrix& y);

/// Fits (a, b, mu) to the pre-activations of a layer.
///
/// mu is the mean of all entries. b is the smallest q with
/// Fraction(|y - mu| > q) <= 0.3, computed exactly on the sorted sample as
/// the entry at rank N - 1 - floor(3N/10). Throws DegenerateInput when every
/// centered entry is zero, or when b would be zero.
ActivationParams fit_params(const Matrix& y, ActivationKind kind,
                            SlopeNorm norm = SlopeNorm::Sum);

double activate(const ActivationParams& p, double y) noexcept;
double activate_derivative(const ActivationParams& p, double y) noexcept;

/// Elementwise f(y - mu).
Matrix apply(const ActivationParams& p, const Matrix& y);

/// Elementwise f'(y - mu). For RectAmp the derivative at |y - mu| == b is 0.
Matrix derivative_mask(const ActivationParams& p, const Matrix& y);

} // namespace layerwise
