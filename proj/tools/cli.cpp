#include "cli.hpp"

#include "layerwise/configurator.hpp"
#include "layerwise/dataset.hpp"
#include "layerwise/errors.hpp"
#include "layerwise/network.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace layerwise::cli {

namespace {

struct Options {
    std::string data;
    std::size_t inputs = 0;
    std::size_t targets = 1;
    std::size_t model_targets = 0;  // predict/eval: 0 means "from the model"
    double test_fraction = 0.25;
    std::uint64_t seed = 42;
    std::string model;
    std::string history;
    std::string out;
    std::string split = "all";

    std::size_t max_cycles = 200;
    std::size_t patience = 20;
    double step_scale = 0.15;
    std::string activation = "rect_amp";
    std::string slope_norm = "sum";
    std::vector<std::size_t> probe_widths{1, 2, 3, 4};
    std::size_t beta_width = 8;
    std::size_t max_layers = 8;
    std::string probe_mode = "trained";
    std::size_t probe_max_cycles = 50;
    std::size_t max_width = 256;
    std::size_t jobs = 1;
    bool show_quoted_k = false;

    std::string kind = "nonlinear";
    std::size_t samples = 2000;
};

void add_data_options(CLI::App* cmd, Options& o, bool with_split) {
    cmd->add_option("--data", o.data, "CSV dataset, one sample per row")->required()->check(CLI::ExistingFile);
    cmd->add_option("--inputs", o.inputs, "Number of leading input columns")->required()->check(CLI::PositiveNumber);
    cmd->add_option("--targets", o.targets, "Number of trailing target columns")->capture_default_str()->check(CLI::PositiveNumber);
    if (with_split) {
        cmd->add_option("--test-fraction", o.test_fraction, "Fraction of samples held out for testing")
            ->capture_default_str()
            ->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--seed", o.seed, "Seed for the split and all training")->capture_default_str();
    }
}

void add_growth_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--max-cycles", o.max_cycles, "Training cycles per layer")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--patience", o.patience, "Cycles without test improvement before stopping")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--step-scale", o.step_scale, "Frobenius norm of every weight update")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--activation", o.activation, "rect_amp or sigmoid")->capture_default_str()->check(CLI::IsMember({"rect_amp", "sigmoid"}));
    cmd->add_option("--a-norm", o.slope_norm, "Slope normalization: sum or rms")->capture_default_str()->check(CLI::IsMember({"sum", "rms"}));
    cmd->add_option("--probe-widths", o.probe_widths, "Small probe widths, comma separated")->delimiter(',')->capture_default_str();
    cmd->add_option("--beta-width", o.beta_width, "Width of the probe that fits beta")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--max-layers", o.max_layers, "Hard cap on nonlinear layers")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--probe-mode", o.probe_mode, "trained or untrained")->capture_default_str()->check(CLI::IsMember({"trained", "untrained"}));
    cmd->add_option("--probe-max-cycles", o.probe_max_cycles, "Training cycles per probe")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--max-width", o.max_width, "Upper bound on any layer width")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", o.jobs, "Concurrent probe trainings")->capture_default_str()->check(CLI::PositiveNumber);
}

GrowthConfig growth_config(const Options& o) {
    GrowthConfig g;
    g.probe_widths = o.probe_widths;
    g.beta_probe_width = o.beta_width;
    g.max_layers = o.max_layers;
    g.probe_mode = *parse_probe_mode(o.probe_mode);
    g.probe_max_cycles = o.probe_max_cycles;
    g.max_width = o.max_width;
    g.jobs = o.jobs;
    g.train.max_cycles = o.max_cycles;
    g.train.patience = o.patience;
    g.train.step_scale = o.step_scale;
    g.train.seed = o.seed;
    g.train.activation = *parse_activation(o.activation);
    g.train.slope_norm = *parse_slope_norm(o.slope_norm);
    g.validate();
    return g;
}

Split load_split(const Options& o) {
    Dataset ds = load_csv(o.data, o.inputs, o.targets);
    ds.validate();
    return split(ds, o.test_fraction, o.seed);
}

void require_writable_parent(const std::string& path) {
    const auto parent = std::filesystem::absolute(path).parent_path();
    if (!std::filesystem::is_directory(parent)) {
        throw IoError(fmt::format("cannot write '{}': directory '{}' does not exist", path, parent.string()));
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(fmt::format("cannot write '{}'", path));
    f << text;
    if (!f) throw IoError(fmt::format("write failed on '{}'", path));
}

void print_plan(std::ostream& out, std::size_t layer, const WidthPlan& plan, bool show_quoted) {
    const std::string prefix = layer == 0 ? "" : fmt::format("layer{}_", layer + 1);
    for (const auto& p : plan.probes) {
        fmt::print(out, "{}probe p={} k={} sigma2={} train_sigma2={}\n", prefix, p.width, p.weights,
                   p.sigma2, p.train_sigma2);
    }
    if (plan.power_law) {
        fmt::print(out, "{}alpha={}\n{}lambda={}\n", prefix, plan.power_law->alpha, prefix,
                   plan.power_law->lambda);
    }
    if (plan.beta_probe) {
        const auto& p = *plan.beta_probe;
        fmt::print(out, "{}beta_probe p={} k={} sigma2={} train_sigma2={}\n", prefix, p.width,
                   p.weights, p.sigma2, p.train_sigma2);
    }
    if (plan.model) {
        fmt::print(out, "{}beta={}\n{}k_real={}\n{}k_o={}\n", prefix, plan.model->beta, prefix,
                   plan.k->k_real, prefix, plan.k->k_o);
        if (show_quoted) {
            fmt::print(out, "{}k_quoted={}\n", prefix,
                       quoted_k(plan.model->alpha, plan.model->lambda, plan.model->beta,
                                plan.model->samples));
        }
    }
    if (!plan.fallback_reason.empty()) fmt::print(out, "{}fallback={}\n", prefix, plan.fallback_reason);
    fmt::print(out, "{}p={}\n", prefix, plan.width);
}

std::string probe_table(const WidthPlan& plan) {
    std::string csv = "p,k,sigma2\n";
    for (const auto& p : plan.probes) fmt::format_to(std::back_inserter(csv), "{},{},{}\n", p.width, p.weights, p.sigma2);
    if (plan.beta_probe) {
        const auto& p = *plan.beta_probe;
        fmt::format_to(std::back_inserter(csv), "{},{},{}\n", p.width, p.weights, p.sigma2);
    }
    return csv;
}

std::string history_csv(const GrowthResult& result) {
    std::string csv = "layer,cycle,train_cost,test_cost,delta,is_best\n";
    for (std::size_t l = 0; l < result.attempts.size(); ++l) {
        for (const auto& r : result.attempts[l].trained.history) {
            fmt::format_to(std::back_inserter(csv), "{},{},{},{},{},{}\n", l + 1, r.cycle + 1,
                           r.train_cost, r.test_cost, r.delta, r.is_best ? 1 : 0);
        }
    }
    return csv;
}

int cmd_probe(const Options& o, std::ostream& out) {
    if (!o.out.empty()) require_writable_parent(o.out);
    const GrowthConfig g = growth_config(o);
    const Split data = load_split(o);
    fmt::print(out, "samples_train={}\nsamples_test={}\n", data.train.samples(), data.test.samples());
    const WidthPlan plan = plan_width(data.train, data.test, 0, std::nullopt, g);
    print_plan(out, 0, plan, o.show_quoted_k);
    fmt::print(out, "p0={}\n", plan.width);
    if (!o.out.empty()) write_text(o.out, probe_table(plan));
    return kExitOk;
}

int cmd_grow(const Options& o, std::ostream& out, bool save_outputs) {
    if (save_outputs) {
        require_writable_parent(o.model);
        if (!o.history.empty()) require_writable_parent(o.history);
    }
    const GrowthConfig g = growth_config(o);
    const Split data = load_split(o);
    fmt::print(out, "samples_train={}\nsamples_test={}\n", data.train.samples(), data.test.samples());

    const GrowthResult result = grow_network(data, g);
    for (std::size_t l = 0; l < result.attempts.size(); ++l) {
        const auto& a = result.attempts[l];
        print_plan(out, l, a.plan, o.show_quoted_k);
        fmt::print(out, "layer{}_cycles={}\nlayer{}_best_test_cost={}\nlayer{}_accepted={}\n", l + 1,
                   a.trained.history.size(), l + 1, a.trained.best_test_cost, l + 1,
                   a.accepted ? 1 : 0);
    }
    if (save_outputs) {
        if (!o.history.empty()) write_text(o.history, history_csv(result));
        save(result.network, o.model);
    }
    out << summary(result.network);
    return kExitOk;
}

Network load_compatible(const Options& o, std::size_t& inputs, std::size_t& targets, bool need_targets) {
    Network net = load(o.model);
    if (inputs == 0) inputs = net.input_width();
    if (inputs != net.input_width()) {
        throw DimensionMismatch(fmt::format("model expects {} inputs but --inputs is {}",
                                            net.input_width(), inputs));
    }
    if (need_targets) {
        if (targets == 0) targets = net.output_width();
        if (targets != net.output_width()) {
            throw DimensionMismatch(fmt::format("model predicts {} targets but --targets is {}",
                                                net.output_width(), targets));
        }
    }
    return net;
}

Dataset select_part(const Options& o, Dataset ds) {
    if (o.split == "all") return ds;
    Split s = split(ds, o.test_fraction, o.seed);
    return o.split == "train" ? std::move(s.train) : std::move(s.test);
}

int cmd_predict(Options o, std::ostream& out) {
    std::size_t targets = 0;
    const Network net = load_compatible(o, o.inputs, targets, false);
    require_writable_parent(o.out);
    Dataset ds = load_csv(o.data, o.inputs, o.model_targets);
    const Matrix pred = forward(net, select_part(o, std::move(ds)).inputs);
    std::string csv;
    for (std::size_t s = 0; s < pred.cols(); ++s) {
        for (std::size_t j = 0; j < pred.rows(); ++j) {
            fmt::format_to(std::back_inserter(csv), "{}{}", j == 0 ? "" : ",", pred(j, s));
        }
        csv += '\n';
    }
    write_text(o.out, csv);
    fmt::print(out, "predictions={}\noutputs={}\n", pred.cols(), pred.rows());
    return kExitOk;
}

int cmd_eval(Options o, std::ostream& out) {
    const Network net = load_compatible(o, o.inputs, o.model_targets, true);
    const Dataset ds = select_part(o, load_csv(o.data, o.inputs, o.model_targets));
    const Evaluation ev = evaluate(net, ds.inputs, ds.targets);
    fmt::print(out, "samples={}\ncost={}\nmse={}\n", ds.samples(), ev.cost, ev.mse);
    return kExitOk;
}

int cmd_synth(const Options& o) {
    SyntheticSpec spec;
    spec.inputs = o.inputs;
    spec.samples = o.samples;
    spec.seed = o.seed;
    spec.kind = *parse_synthetic_kind(o.kind);
    require_writable_parent(o.out);
    save_csv(make_synthetic(spec), o.out);
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Layer-at-a-time network training with self-configured widths", "layerwise"};
    app.require_subcommand(1);
    Options o;

    auto* probe = app.add_subcommand("probe", "Fit the width model on the input layer and report p0");
    add_data_options(probe, o, true);
    add_growth_options(probe, o);
    probe->add_option("--out", o.out, "Write the probe table (p,k,sigma2) as CSV");
    probe->add_flag("--show-quoted-k", o.show_quoted_k, "Also print the closed form (alpha lambda / beta) N^(1/(lambda+1))");

    auto* configure = app.add_subcommand("configure", "Grow the network and report the chosen architecture");
    add_data_options(configure, o, true);
    add_growth_options(configure, o);
    configure->add_flag("--show-quoted-k", o.show_quoted_k, "Also print the closed form k");

    auto* train = app.add_subcommand("train", "Grow and train the network, then save it");
    add_data_options(train, o, true);
    add_growth_options(train, o);
    train->add_option("--model", o.model, "Model file to write")->required();
    train->add_option("--history", o.history, "Per-cycle history CSV to write");
    train->add_flag("--show-quoted-k", o.show_quoted_k, "Also print the closed form k");

    auto* predict = app.add_subcommand("predict", "Write model predictions as CSV");
    predict->add_option("--model", o.model, "Model file")->required()->check(CLI::ExistingFile);
    predict->add_option("--data", o.data, "CSV with inputs (and optionally targets)")->required()->check(CLI::ExistingFile);
    predict->add_option("--inputs", o.inputs, "Input columns (default: model input width)");
    predict->add_option("--targets", o.model_targets, "Trailing target columns to ignore");
    predict->add_option("--out", o.out, "Predictions CSV")->required();
    predict->add_option("--split", o.split, "all, train or test")->capture_default_str()->check(CLI::IsMember({"all", "train", "test"}));
    predict->add_option("--test-fraction", o.test_fraction, "Split fraction (with --split)")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    predict->add_option("--seed", o.seed, "Split seed (with --split)")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "Print quadratic cost and mean squared error");
    eval->add_option("--model", o.model, "Model file")->required()->check(CLI::ExistingFile);
    eval->add_option("--data", o.data, "CSV with inputs and targets")->required()->check(CLI::ExistingFile);
    eval->add_option("--inputs", o.inputs, "Input columns (default: model input width)");
    eval->add_option("--targets", o.model_targets, "Target columns (default: model output width)");
    eval->add_option("--split", o.split, "all, train or test")->capture_default_str()->check(CLI::IsMember({"all", "train", "test"}));
    eval->add_option("--test-fraction", o.test_fraction, "Split fraction (with --split)")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    eval->add_option("--seed", o.seed, "Split seed (with --split)")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "Write a synthetic dataset as CSV");
    synth->add_option("--kind", o.kind, "linear or nonlinear")->capture_default_str()->check(CLI::IsMember({"linear", "nonlinear"}));
    synth->add_option("--inputs", o.inputs, "Input dimension")->required();
    synth->add_option("--samples", o.samples, "Sample count")->capture_default_str();
    synth->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
    synth->add_option("--out", o.out, "CSV to write")->required();

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (probe->parsed()) return cmd_probe(o, out);
        if (configure->parsed()) return cmd_grow(o, out, false);
        if (train->parsed()) return cmd_grow(o, out, true);
        if (predict->parsed()) return cmd_predict(o, out);
        if (eval->parsed()) return cmd_eval(o, out);
        if (synth->parsed()) return cmd_synth(o);
    } catch (const InvalidArgument& e) {
        fmt::print(err, "usage error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitFailure;
    }
    return kExitUsage;
}

} // namespace layerwise::cli
