#include "gearnet/cli.hpp"

#include "gearnet/data.hpp"
#include "gearnet/experiment.hpp"
#include "gearnet/gradient_suite.hpp"
#include "gearnet/manifest.hpp"
#include "gearnet/model.hpp"
#include "gearnet/serialize.hpp"
#include "gearnet/synth.hpp"
#include "gearnet/train.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace gearnet::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void append(KeyValues& into, const KeyValues& from, const std::string& prefix = "") {
    for (const auto& [k, v] : from) into.emplace_back(prefix + k, v);
}

fs::path sibling(const fs::path& p, const std::string& suffix) { return fs::path(p.string() + suffix); }

// ---------------------------------------------------------------- synth

struct SynthArgs {
    fs::path out;
    SynthSpec spec;
    std::uint64_t seed = 1;
};

void add_synth(CLI::App& app, SynthArgs& a) {
    app.add_option("--out", a.out, "output CSV path")->required();
    app.add_option("--cycles", a.spec.cycles_per_gear, "cycles per gear per skier")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--skiers", a.spec.skiers, "number of simulated skiers")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--noise-std", a.spec.noise_std, "Gaussian noise standard deviation")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app.add_option("--intensity-min", a.spec.intensity_min)->capture_default_str();
    app.add_option("--intensity-max", a.spec.intensity_max)->capture_default_str();
    app.add_option("--freq-min", a.spec.frequency_min, "cycle frequency lower bound (Hz)")->capture_default_str();
    app.add_option("--freq-max", a.spec.frequency_max, "cycle frequency upper bound (Hz)")->capture_default_str();
    app.add_option("--seed", a.seed)->capture_default_str();
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    const auto start = Clock::now();
    a.spec.validate();
    const auto records = synth_generate(a.spec, a.seed);
    save_csv(a.out, records);

    std::size_t high = 0;
    for (const auto& r : records) high += r.gear == kGearHigh;
    const std::size_t low = records.size() - high;
    const double n = static_cast<double>(std::max<std::size_t>(records.size(), 1));
    out << "records " << records.size() << "\n";
    out << "gear 2: " << low << " (" << fixed(100.0 * static_cast<double>(low) / n, 2) << "%)\n";
    out << "gear 3: " << high << " (" << fixed(100.0 * static_cast<double>(high) / n, 2) << "%)\n";

    RunManifest m;
    m.command = "synth";
    m.seed = a.seed;
    m.configuration = a.spec.to_key_values();
    m.configuration.emplace_back("records", std::to_string(records.size()));
    m.configuration.emplace_back("records.gear2", std::to_string(low));
    m.configuration.emplace_back("records.gear3", std::to_string(high));
    m.outputs = {{"data", a.out.string()}};
    m.wall_seconds = seconds_since(start);
    m.write(sibling(a.out, ".manifest"));
    return kSuccess;
}

// ---------------------------------------------------------------- train

struct ModelArgs {
    std::string family;
    std::size_t units = 50;
    std::size_t conv_layers = 1;
    std::size_t filters = 20;
    std::size_t full_layers = 1;
    std::optional<std::size_t> neurons;
    std::string candidate = "tanh";
    bool override_grid = false;

    ModelConfig resolve() const {
        const Family f = parse_family(family);
        ModelConfig c;
        switch (f) {
            case Family::cnn: c = ModelConfig::cnn(conv_layers, filters); break;
            case Family::mlp: c = ModelConfig::mlp(full_layers, 30); break;
            default: c = ModelConfig::lstm(f, units); break;
        }
        if (neurons) c.hidden_neurons = *neurons;
        if (f == Family::cnn) c.full_layers = full_layers;
        c.candidate = parse_candidate_activation(candidate);
        c.override_grid = override_grid;
        c.validate();
        return c;
    }
};

void add_model_options(CLI::App& app, ModelArgs& m, bool family_required) {
    auto* fam = app.add_option("--model", m.family, "family: cnn, lstm-f, lstm-p, blstm or mlp");
    if (family_required) fam->required();
    app.add_option("--units", m.units, "LSTM units (BLSTM: total over both directions)")->capture_default_str();
    app.add_option("--conv-layers", m.conv_layers, "CNN convolutional layers")->capture_default_str();
    app.add_option("--filters", m.filters, "CNN filters per convolutional layer")->capture_default_str();
    app.add_option("--layers", m.full_layers, "fully connected hidden layers")->capture_default_str();
    app.add_option("--neurons", m.neurons, "hidden neurons per fully connected layer (CNN 1000, MLP 30)");
    app.add_option("--candidate", m.candidate, "LSTM candidate activation: tanh or sigmoid")->capture_default_str();
    app.add_flag("--override-grid", m.override_grid, "allow values outside the architecture grid");
}

void add_train_options(CLI::App& app, TrainConfig& t, std::string& optimizer) {
    app.add_option("--iterations", t.max_iterations, "mini-batch updates")->capture_default_str();
    app.add_option("--batch", t.batch_size, "mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--lr", t.learning_rate, "learning rate")->capture_default_str()->check(CLI::NonNegativeNumber);
    app.add_option("--optimizer", optimizer, "sgd, momentum or adam")->capture_default_str();
    app.add_option("--validation-period", t.validation_period, "iterations between validation checkpoints")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--clip", t.clip_norm, "global gradient norm limit for recurrent models")->capture_default_str();
    app.add_option("--seed", t.seed)->capture_default_str();
}

struct TrainArgs {
    fs::path data;
    fs::path out;
    ModelArgs model;
    TrainConfig train;
    std::string optimizer = "adam";
};

int cmd_train(TrainArgs a, std::ostream& out) {
    const auto start = Clock::now();
    a.train.optimizer = parse_optimizer(a.optimizer);
    a.train.runs = 1;
    ModelConfig config = a.model.resolve();
    config.batch_size = a.train.batch_size;
    a.train.validate();

    const auto records = load_csv(a.data);
    const WindowedDataset ds = prepare_dataset(records);
    auto result = train(build_model(config, a.train.seed), ds, a.train);
    const double test_error = evaluate(result.model, ds.test);

    save_model(a.out, result.model);
    const fs::path history_path = sibling(a.out, ".history.csv");
    write_file_atomic(history_path, result.history.checkpoints_csv());

    out << "model " << config.id() << " (" << result.model.parameter_count() << " parameters)\n";
    out << "best validation error " << fixed(result.history.best_validation_error, 4) << " at iteration "
        << result.history.best_iteration << "\n";
    out << "test error " << fixed(test_error, 4) << "\n";

    RunManifest m;
    m.command = "train";
    m.seed = a.train.seed;
    append(m.configuration, config.to_key_values(), "model.");
    append(m.configuration, a.train.to_key_values(), "train.");
    append(m.configuration, dataset_summary(ds), "data.");
    m.configuration.emplace_back("result.best_iteration", std::to_string(result.history.best_iteration));
    m.configuration.emplace_back("result.test_error", fixed(test_error, 6));
    m.inputs = {{"data", a.data.string()}, {"data.checksum", file_checksum(a.data)}};
    m.outputs = {{"model", a.out.string()}, {"history", history_path.string()}};
    m.wall_seconds = seconds_since(start);
    m.write(sibling(a.out, ".manifest"));
    return kSuccess;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
    fs::path data;
    fs::path out;
    std::string grid = "full";
    TrainConfig train;
    std::string optimizer = "adam";
    std::size_t jobs = 1;
};

int cmd_experiment(ExperimentArgs a, std::ostream& out) {
    const auto start = Clock::now();
    a.train.optimizer = parse_optimizer(a.optimizer);
    a.train.validate();
    const auto grid = a.grid == "full" ? enumerate_grid() : enumerate_family(parse_family(a.grid));

    const auto records = load_csv(a.data);
    const WindowedDataset ds = prepare_dataset(records);
    const ExperimentReport report = run_experiment(grid, ds, a.train, a.jobs);

    fs::create_directories(a.out);
    RunManifest m;
    m.command = "experiment";
    m.seed = a.train.seed;
    m.configuration = {{"grid", a.grid}, {"configs", std::to_string(grid.size())}};
    append(m.configuration, a.train.to_key_values(), "train.");
    append(m.configuration, dataset_summary(ds), "data.");
    m.inputs = {{"data", a.data.string()}, {"data.checksum", file_checksum(a.data)}};

    write_file_atomic(a.out / "report.csv", report_csv(report));
    m.outputs.emplace_back("report", (a.out / "report.csv").string());
    for (const auto& [family, csv] : plot_data_csvs(report)) {
        const fs::path p = a.out / ("plot_" + std::string(family_name(family)) + ".csv");
        write_file_atomic(p, csv);
        m.outputs.emplace_back(std::string("plot.") + family_name(family), p.string());
    }
    const std::string summary = summary_text(report);
    write_file_atomic(a.out / "summary.txt", summary);
    m.outputs.emplace_back("summary", (a.out / "summary.txt").string());
    out << summary;

    bool failed = false;
    for (const auto& r : report.rows) {
        if (!r.ok()) {
            failed = true;
            out << "run failed: " << r.config.id() << " run " << r.run << ": " << r.failure << "\n";
        }
    }
    m.wall_seconds = seconds_since(start);
    m.write(a.out / "manifest.txt");
    return failed ? kCheckFailed : kSuccess;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckArgs {
    std::string layer = "all";
    std::size_t seeds = 10;
    double tolerance = 1e-4;
    std::string corrupt;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
    GradCheckOptions opts;
    opts.tolerance = a.tolerance;
    opts.corrupt_parameter = a.corrupt;
    const auto results = run_gradient_suite(a.layer, a.seeds, opts);

    char line[160];
    std::snprintf(line, sizeof line, "%-10s %4s %8s %12s %8s %12s  %s\n", "layer", "seed", "params", "max_rel_err",
                  "inputs", "max_rel_err", "status");
    out << line;
    std::vector<std::string> failures;
    for (const auto& r : results) {
        const bool ok = r.parameters.passed() && r.input.passed();
        std::snprintf(line, sizeof line, "%-10s %4zu %8zu %12.3e %8zu %12.3e  %s\n", r.layer.c_str(), r.seed,
                      r.parameters.entries.size(), r.parameters.max_relative_error(), r.input.entries.size(),
                      r.input.max_relative_error(), ok ? "PASS" : "FAIL");
        out << line;
        for (const GradReport* rep : {&r.parameters, &r.input}) {
            if (rep->passed()) continue;
            const GradEntry* w = rep->worst();
            failures.push_back(r.layer + " seed " + std::to_string(r.seed) + ": parameter '" + w->parameter + "' index " +
                               std::to_string(w->index) + " analytic " + std::to_string(w->analytic) + " numeric " +
                               std::to_string(w->numeric) + " relative error " + std::to_string(w->relative_error));
        }
    }
    for (const auto& f : failures) out << "FAIL " << f << "\n";
    out << results.size() << " report(s), " << failures.size() << " failure(s)\n";
    return failures.empty() ? kSuccess : kCheckFailed;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    fs::path model;
    fs::path data;
    std::string partition = "all";
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    Model model = load_model(a.model);
    const auto records = load_csv(a.data);

    std::vector<Window> windows;
    if (a.partition == "all") {
        windows = segment(records, model.config().window, model.config().window / 2);
    } else {
        WindowedDataset ds = split(segment(records, model.config().window, model.config().window / 2));
        windows = a.partition == "train" ? std::move(ds.train)
                  : a.partition == "validation" ? std::move(ds.validation)
                                                : std::move(ds.test);
    }
    if (!model.input_mean.empty()) {
        ChannelStats stats;
        if (model.input_mean.size() != stats.mean.size() || model.input_std.size() != stats.std.size()) {
            throw ShapeError("model normalisation statistics do not have 3 channels");
        }
        std::copy(model.input_mean.begin(), model.input_mean.end(), stats.mean.begin());
        std::copy(model.input_std.begin(), model.input_std.end(), stats.std.begin());
        apply_stats(windows, stats);
    }
    const double error = evaluate(model, windows);
    out << "windows " << windows.size() << "\n";
    out << "classification error " << fixed(error, 6) << "\n";
    return kSuccess;
}

// Every `--config FILE` becomes `--key=value` flags placed straight after the
// subcommand name. Options keep their last value, so explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> injected;
    for (std::size_t i = 1; i < args.size(); ++i) {
        std::string file;
        if (args[i] == "--config" && i + 1 < args.size()) {
            file = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            file = args[i].substr(9);
        } else {
            continue;
        }
        for (const auto& [key, value] : parse_key_values(read_file(file))) {
            if (key == "config") throw std::invalid_argument("config files cannot include other config files");
            injected.push_back("--" + key + "=" + value);
        }
    }
    if (injected.empty()) return args;
    std::vector<std::string> out{args.front()};
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), args.begin() + 1, args.end());
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"gearnet: gear classification from accelerometer windows"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // Already expanded by expand_config; declared so it parses and shows in help.
    std::string config_path;
    auto config_file = [&config_path](CLI::App* sub) {
        sub->add_option("--config", config_path, "key=value file with defaults for this command's flags");
    };

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic two-gear accelerometer CSV");
    config_file(synth);
    add_synth(*synth, synth_args);

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train one model and save it with its validation history");
    config_file(train_cmd);
    train_cmd->add_option("--data", train_args.data, "input CSV")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--out", train_args.out, "output model file")->required();
    add_model_options(*train_cmd, train_args.model, true);
    add_train_options(*train_cmd, train_args.train, train_args.optimizer);

    ExperimentArgs exp_args;
    auto* exp = app.add_subcommand("experiment", "train a grid of models over several seeded runs");
    config_file(exp);
    exp->add_option("--data", exp_args.data, "input CSV")->required()->check(CLI::ExistingFile);
    exp->add_option("--out", exp_args.out, "output directory")->required();
    exp->add_option("--grid", exp_args.grid, "full or a family name")->capture_default_str();
    exp->add_option("--runs", exp_args.train.runs, "seeded runs per configuration")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    exp->add_option("--jobs", exp_args.jobs, "concurrent training runs")->capture_default_str()->check(
        CLI::PositiveNumber);
    add_train_options(*exp, exp_args.train, exp_args.optimizer);

    GradcheckArgs gc_args;
    auto* gc = app.add_subcommand("gradcheck", "compare analytic gradients with central differences");
    config_file(gc);
    gc->add_option("--layer", gc_args.layer, "all or one layer name")->capture_default_str();
    gc->add_option("--seeds", gc_args.seeds, "random instances per layer")->capture_default_str()->check(
        CLI::PositiveNumber);
    gc->add_option("--tolerance", gc_args.tolerance, "maximum relative error")->capture_default_str();
    gc->add_option("--corrupt", gc_args.corrupt, "test hook: offset the analytic gradient of this parameter")
        ->group("");

    EvalArgs eval_args;
    auto* ev = app.add_subcommand("eval", "classification error of a saved model on a CSV");
    config_file(ev);
    ev->add_option("--model", eval_args.model, "model file")->required()->check(CLI::ExistingFile);
    ev->add_option("--data", eval_args.data, "input CSV")->required()->check(CLI::ExistingFile);
    ev->add_option("--partition", eval_args.partition, "all, train, validation or test")
        ->capture_default_str()
        ->check(CLI::IsMember({"all", "train", "validation", "test"}));

    std::vector<std::string> expanded;
    try {
        expanded = expand_config(args);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::invalid_argument& e) {
        err << "config file: " << e.what() << "\n";
        return kUsage;
    }

    try {
        std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    }

    try {
        if (*synth) return cmd_synth(synth_args, out);
        if (*train_cmd) return cmd_train(train_args, out);
        if (*exp) return cmd_experiment(exp_args, out);
        if (*gc) return cmd_gradcheck(gc_args, out);
        if (*ev) return cmd_eval(eval_args, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kIo;
    } catch (const ShapeError& e) {
        err << "shape error: " << e.what() << "\n";
        return kCheckFailed;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "invalid argument: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kCheckFailed;
    }
    return kUsage;
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace gearnet::cli
