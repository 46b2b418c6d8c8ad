#include "layerwise/network.hpp"

#include "layerwise/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <system_error>

namespace layerwise {

using nlohmann::json;

Network::Network(std::vector<LayerState> layers, OutputHead head, json meta)
    : layers_(std::move(layers)), head_(std::move(head)), meta_(std::move(meta)) {
    if (layers_.empty()) throw InvalidArgument("network needs at least one nonlinear layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& w = layers_[i].weights;
        if (w.rows() == 0 || w.cols() == 0) {
            throw DimensionMismatch(fmt::format("layer {} has empty weights", i + 1));
        }
        layers_[i].params.validate();
        if (i > 0 && layers_[i - 1].output_width() != layers_[i].input_width()) {
            throw DimensionMismatch(fmt::format("layer {} outputs {} but layer {} takes {}", i,
                                                layers_[i - 1].output_width(), i + 1,
                                                layers_[i].input_width()));
        }
    }
    if (head_.weights.rows() == 0 || head_.weights.cols() != layers_.back().output_width()) {
        throw DimensionMismatch(fmt::format("head is {}x{} but last layer outputs {}",
                                            head_.weights.rows(), head_.weights.cols(),
                                            layers_.back().output_width()));
    }
    if (!meta_.is_object()) throw InvalidArgument("network meta must be an object");
}

Matrix features(const Network& net, const Matrix& x) {
    if (x.rows() != net.input_width()) {
        throw DimensionMismatch(fmt::format("network takes {} inputs, data has {}",
                                            net.input_width(), x.rows()));
    }
    Matrix z = layer_forward(net.layers().front(), x);
    for (std::size_t i = 1; i < net.layers().size(); ++i) z = layer_forward(net.layers()[i], z);
    return z;
}

Matrix forward(const Network& net, const Matrix& x) { return net.head().predict(features(net, x)); }

Evaluation evaluate(const Network& net, const Matrix& x, const Matrix& t) {
    if (t.rows() != net.output_width()) {
        throw DimensionMismatch(fmt::format("network predicts {} targets, data has {}",
                                            net.output_width(), t.rows()));
    }
    const Matrix z = features(net, x);
    Evaluation ev;
    ev.cost = quadratic_cost(net.head(), z, t);
    ev.mse = mean_sq_error(net.head(), z, t);
    return ev;
}

namespace {

json matrix_json(const Matrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()},
                {"weights", std::vector<double>(m.values().begin(), m.values().end())}};
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw FormatError(fmt::format("{}: missing field '{}'", where, key));
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(fmt::format("{}: field '{}' has the wrong type ({})", where, key, e.what()));
    }
}

double finite_number(const json& obj, const char* key, const std::string& where) {
    const json& v = obj.contains(key) ? obj.at(key) : json();
    if (!v.is_number()) throw FormatError(fmt::format("{}: field '{}' must be a number", where, key));
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw FormatError(fmt::format("{}: field '{}' is not finite", where, key));
    return x;
}

Matrix matrix_from_json(const json& obj, const std::string& where) {
    const auto rows = field<std::size_t>(obj, "rows", where);
    const auto cols = field<std::size_t>(obj, "cols", where);
    const json& w = obj.contains("weights") ? obj.at("weights") : json();
    if (!w.is_array()) throw FormatError(fmt::format("{}: 'weights' must be an array", where));
    if (w.size() != rows * cols) {
        throw FormatError(fmt::format("{}: {} weights for a {}x{} matrix", where, w.size(), rows, cols));
    }
    std::vector<double> data;
    data.reserve(w.size());
    for (const auto& v : w) {
        if (!v.is_number()) throw FormatError(fmt::format("{}: non-numeric weight", where));
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw FormatError(fmt::format("{}: non-finite weight", where));
        data.push_back(x);
    }
    return Matrix(rows, cols, std::move(data));
}

} // namespace

json to_json(const Network& net) {
    json layers = json::array();
    for (const auto& layer : net.layers()) {
        json rec = matrix_json(layer.weights);
        rec["activation"] = std::string(to_string(layer.params.kind));
        rec["a"] = layer.params.a;
        rec["b"] = layer.params.b;
        rec["mu"] = layer.params.mu;
        layers.push_back(std::move(rec));
    }
    return json{{"format_version", kModelFormatVersion},
                {"layers", std::move(layers)},
                {"head", matrix_json(net.head().weights)},
                {"meta", net.meta()}};
}

Network network_from_json(const json& doc) {
    if (!doc.is_object()) throw FormatError("model: top level must be an object");
    if (!doc.contains("format_version")) throw FormatError("model: missing format_version");
    const json& version = doc.at("format_version");
    if (!version.is_number_integer() || version.get<long long>() != kModelFormatVersion) {
        throw FormatError(fmt::format("model: unsupported format_version {} (expected {})",
                                      version.dump(), kModelFormatVersion));
    }

    const json& layers_doc = doc.contains("layers") ? doc.at("layers") : json();
    if (!layers_doc.is_array() || layers_doc.empty()) {
        throw FormatError("model: 'layers' must be a nonempty array");
    }
    std::vector<LayerState> layers;
    for (std::size_t i = 0; i < layers_doc.size(); ++i) {
        const std::string where = fmt::format("model: layer {}", i + 1);
        const json& rec = layers_doc[i];
        LayerState layer;
        layer.weights = matrix_from_json(rec, where);
        const auto kind = parse_activation(field<std::string>(rec, "activation", where));
        if (!kind) throw FormatError(fmt::format("{}: unknown activation", where));
        layer.params.kind = *kind;
        layer.params.a = finite_number(rec, "a", where);
        layer.params.b = finite_number(rec, "b", where);
        layer.params.mu = finite_number(rec, "mu", where);
        layers.push_back(std::move(layer));
    }
    if (!doc.contains("head")) throw FormatError("model: missing head");
    OutputHead head{matrix_from_json(doc.at("head"), "model: head")};
    json meta = doc.contains("meta") ? doc.at("meta") : json::object();

    try {
        return Network(std::move(layers), std::move(head), std::move(meta));
    } catch (const Error& e) {
        throw FormatError(fmt::format("model: {}", e.what()));
    }
}

void save(const Network& net, const std::filesystem::path& path) {
    const std::string text = to_json(net).dump(1) + "\n";
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot write '{}'", tmp.string()));
        out << text;
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw IoError(fmt::format("write failed on '{}'", tmp.string()));
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw IoError(fmt::format("cannot move model into '{}': {}", path.string(), ec.message()));
    }
}

Network load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return network_from_json(doc);
}

std::string summary(const Network& net) {
    const json& meta = net.meta();
    const json* costs = meta.contains("layer_best_test_cost") ? &meta.at("layer_best_test_cost") : nullptr;

    std::string out = fmt::format("network: {} layer(s), {} inputs -> {} outputs\n",
                                  net.layers().size(), net.input_width(), net.output_width());
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        const auto& layer = net.layers()[i];
        fmt::format_to(std::back_inserter(out), "layer {}: {} -> {} activation={} a={} b={} mu={}",
                       i + 1, layer.input_width(), layer.output_width(),
                       to_string(layer.params.kind), layer.params.a, layer.params.b, layer.params.mu);
        if (costs && costs->is_array() && i < costs->size() && (*costs)[i].is_number()) {
            fmt::format_to(std::back_inserter(out), " best_test_cost={}", (*costs)[i].get<double>());
        }
        out += '\n';
    }
    fmt::format_to(std::back_inserter(out), "head: {} x {}\n", net.head().weights.rows(),
                   net.head().weights.cols());
    for (const char* key : {"train_mse", "test_mse"}) {
        if (meta.contains(key) && meta.at(key).is_number()) {
            fmt::format_to(std::back_inserter(out), "{}={}\n", key, meta.at(key).get<double>());
        }
    }
    return out;
}

} // namespace layerwise
