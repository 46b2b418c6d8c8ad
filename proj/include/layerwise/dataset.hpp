#pragma once

#include "layerwise/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <optional>

namespace layerwise {

/// Paired samples: inputs (n x N) and targets (m x N), one column per sample.
struct Dataset {
    Matrix inputs;
    Matrix targets;

    std::size_t input_width() const noexcept { return inputs.rows(); }
    std::size_t target_width() const noexcept { return targets.rows(); }
    std::size_t samples() const noexcept { return inputs.cols(); }

    /// Throws ShapeError on sample-count mismatch or an empty set, FormatError
    /// on non-finite values.
    void validate() const;
};

struct Split {
    Dataset train;
    Dataset test;
};

/// Reads comma-separated rows; the first `n_inputs` fields of each row are
/// inputs, the next `m_targets` are targets. A first row that does not parse
/// as numbers is treated as a header. `m_targets` may be 0 for input-only
/// files.
Dataset load_csv(const std::filesystem::path& path, std::size_t n_inputs, std::size_t m_targets);

/// Writes the inverse layout of load_csv, without a header, with every value
/// printed in shortest round-trip form.
void save_csv(const Dataset& ds, const std::filesystem::path& path);

/// Fisher-Yates shuffle of the sample indices driven by SplitMix64(seed),
/// scanning i = N-1 .. 1 and swapping i with below(i + 1). The first
/// round((1 - f) N) shuffled indices form the training part; both parts keep
/// their samples in ascending original order.
Split split(const Dataset& ds, double test_fraction, std::uint64_t seed);

enum class SyntheticKind { Linear, Nonlinear };

std::optional<SyntheticKind> parse_synthetic_kind(std::string_view name) noexcept;

struct SyntheticSpec {
    std::size_t inputs = 4;
    std::size_t samples = 2000;
    std::uint64_t seed = 42;
    SyntheticKind kind = SyntheticKind::Nonlinear;
};

/// Desk-scale fixtures with a single target. With g = SplitMix64(seed):
///   c_i   = g.symmetric(1)  for i = 0..n-1          (drawn first)
///   x_s,i = g.symmetric(1)  sample-major, s = 0..N-1
///   Linear:     t_s = sum_i c_i x_s,i
///   Nonlinear:  t_s = sin(pi * sum_i c_i x_s,i) + x_s,0 * x_s,1
Dataset make_synthetic(const SyntheticSpec& spec);

} // namespace layerwise
