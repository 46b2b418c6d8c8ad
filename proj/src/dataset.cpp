#include "layerwise/dataset.hpp"

#include "layerwise/errors.hpp"
#include "layerwise/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace layerwise {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_number(std::string_view field, double& out) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    if (field.empty()) return false;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size() && std::isfinite(out);
}

} // namespace

void Dataset::validate() const {
    if (inputs.cols() != targets.cols()) {
        throw ShapeError(fmt::format("dataset: {} input samples vs {} target samples", inputs.cols(),
                                     targets.cols()));
    }
    if (inputs.cols() == 0) throw ShapeError("dataset: no samples");
    if (!inputs.all_finite() || !targets.all_finite()) {
        throw FormatError("dataset: non-finite value");
    }
}

std::optional<SyntheticKind> parse_synthetic_kind(std::string_view name) noexcept {
    if (name == "linear") return SyntheticKind::Linear;
    if (name == "nonlinear") return SyntheticKind::Nonlinear;
    return std::nullopt;
}

Dataset load_csv(const std::filesystem::path& path, std::size_t n_inputs, std::size_t m_targets) {
    if (n_inputs == 0) throw InvalidArgument("load_csv: need at least one input column");
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));

    const std::size_t width = n_inputs + m_targets;
    std::vector<double> values;
    std::size_t samples = 0;
    std::string line;
    std::size_t line_no = 0;
    bool first_row = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);

        std::vector<double> row(fields.size());
        std::size_t bad = fields.size();
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (!parse_number(fields[i], row[i])) {
                bad = i;
                break;
            }
        }
        if (bad != fields.size()) {
            if (first_row) {
                first_row = false;
                continue;  // header
            }
            throw ParseError(fmt::format("{}:{}: column {}: cannot parse '{}' as a finite number",
                                         path.string(), line_no, bad + 1, fields[bad]));
        }
        first_row = false;
        if (fields.size() != width) {
            throw ShapeError(fmt::format("{}:{}: row has {} fields, expected {} ({} inputs + {} targets)",
                                         path.string(), line_no, fields.size(), width, n_inputs,
                                         m_targets));
        }
        values.insert(values.end(), row.begin(), row.end());
        ++samples;
    }
    if (in.bad()) throw IoError(fmt::format("read error on '{}'", path.string()));
    if (samples == 0) throw ShapeError(fmt::format("{}: no data rows", path.string()));

    Dataset ds{Matrix(n_inputs, samples), Matrix(m_targets, samples)};
    for (std::size_t s = 0; s < samples; ++s) {
        const double* row = values.data() + s * width;
        for (std::size_t i = 0; i < n_inputs; ++i) ds.inputs(i, s) = row[i];
        for (std::size_t j = 0; j < m_targets; ++j) ds.targets(j, s) = row[n_inputs + j];
    }
    return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    std::string line;
    for (std::size_t s = 0; s < ds.samples(); ++s) {
        line.clear();
        for (std::size_t i = 0; i < ds.input_width(); ++i) {
            fmt::format_to(std::back_inserter(line), "{}{}", i == 0 ? "" : ",", ds.inputs(i, s));
        }
        for (std::size_t j = 0; j < ds.target_width(); ++j) {
            fmt::format_to(std::back_inserter(line), ",{}", ds.targets(j, s));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError(fmt::format("write failed on '{}'", path.string()));
}

Split split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw InvalidArgument(fmt::format("test fraction {} not in (0, 1)", test_fraction));
    }
    const std::size_t n = ds.samples();
    const auto n_train = static_cast<std::size_t>(std::round((1.0 - test_fraction) * static_cast<double>(n)));
    if (n_train == 0 || n_train >= n) {
        throw TooFewSamples(fmt::format("{} samples cannot be split with test fraction {}", n,
                                        test_fraction));
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(order[i], order[rng.below(i + 1)]);
    }

    std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    return Split{
        Dataset{select_columns(ds.inputs, train_idx), select_columns(ds.targets, train_idx)},
        Dataset{select_columns(ds.inputs, test_idx), select_columns(ds.targets, test_idx)},
    };
}

Dataset make_synthetic(const SyntheticSpec& spec) {
    if (spec.inputs < 2) throw InvalidArgument("make_synthetic: need at least 2 inputs");
    if (spec.samples < 10) throw InvalidArgument("make_synthetic: need at least 10 samples");

    SplitMix64 rng(spec.seed);
    std::vector<double> coef(spec.inputs);
    for (double& c : coef) c = rng.symmetric(1.0);

    Dataset ds{Matrix(spec.inputs, spec.samples), Matrix(1, spec.samples)};
    for (std::size_t s = 0; s < spec.samples; ++s) {
        double proj = 0.0;
        for (std::size_t i = 0; i < spec.inputs; ++i) {
            const double x = rng.symmetric(1.0);
            ds.inputs(i, s) = x;
            proj += coef[i] * x;
        }
        ds.targets(0, s) = spec.kind == SyntheticKind::Linear
                               ? proj
                               : std::sin(std::numbers::pi * proj) + ds.inputs(0, s) * ds.inputs(1, s);
    }
    return ds;
}

} // namespace layerwise
