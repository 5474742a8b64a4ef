#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "fairboost/bench.hpp"
#include "fairboost/booster.hpp"
#include "fairboost/csv.hpp"
#include "fairboost/data.hpp"
#include "fairboost/error.hpp"
#include "fairboost/metrics.hpp"

namespace fb = fairboost;
namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kUsage = 2, kData = 3, kTraining = 4, kGate = 5 };

// A failure that maps straight onto an exit code.
struct Failure {
  int code;
  std::string message;
};

struct DataFlags {
  std::string data;
  std::string schema;
  std::optional<double> test_fraction;
  std::uint64_t seed = 42;
  std::string part = "all";

  void add(CLI::App* cmd, std::string_view part_help) {
    cmd->add_option("--data", data, "Prepared CSV file")->required();
    cmd->add_option("--schema", schema, "Column schema file")->required();
    cmd->add_option("--test-fraction", test_fraction,
                    "Split the data with this test share before use (default: no split)");
    cmd->add_option("--seed", seed, "Split seed")->capture_default_str();
    cmd->add_option("--part", part, std::string(part_help))
        ->check(CLI::IsMember({"all", "train", "test"}))
        ->capture_default_str();
  }

  void validate() const {
    if (test_fraction && !(*test_fraction > 0.0 && *test_fraction < 1.0)) {
      throw fb::ParameterError("--test-fraction must lie in (0, 1)");
    }
    if (part != "all" && !test_fraction) {
      throw fb::ParameterError("--part " + part + " needs --test-fraction");
    }
  }

  fb::Dataset load() const {
    const fb::ColumnSchema schema_spec = fb::read_schema(schema);
    fb::Dataset full = fb::load_csv(data, schema_spec);
    if (!test_fraction) return full;
    auto [train, test] = fb::train_test_split(full, *test_fraction, seed);
    return part == "test" ? std::move(test) : std::move(train);
  }
};

std::string di_text(const std::optional<double>& di) {
  return di ? fb::format_real(*di) : std::string(fb::kUndefined);
}

void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw fb::ParameterError("--threshold must lie in (0, 1)");
  }
}

// ---------------------------------------------------------------------------

struct PrepareCmd {
  std::string dataset;
  std::string raw_dir = "data/raw";
  std::string out_dir = "data/prepared";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("prepare", "Clean a raw benchmark file into CSV + schema");
    cmd->add_option("--dataset", dataset, "adult, compas, default or bank")
        ->required()
        ->check(CLI::IsMember({"adult", "compas", "default", "bank"}));
    cmd->add_option("--raw-dir", raw_dir, "Directory with the downloaded raw files")
        ->capture_default_str();
    cmd->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto which = fb::bench::parse_benchmark(dataset);
    const auto files = fb::bench::prepare_dataset(which, raw_dir, out_dir);
    std::cout << "prepare dataset=" << dataset << " rows=" << files.n_rows
              << " checksum=" << (files.checksum_verified ? "verified" : "unrecorded")
              << " csv=" << files.csv.string() << " schema=" << files.schema.string() << "\n";
  }
};

struct TrainCmd {
  DataFlags input;
  double mu = 0.0;
  fb::BoosterParams params;
  std::string out;
  std::string log;
  double threshold = fb::kDefaultThreshold;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("train", "Train a booster and write the model file");
    input.add(cmd, "Rows to train on when splitting: all, train or test");
    cmd->add_option("--mu", mu, "Fairness regularizer weight in [0, 1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--max-depth", params.tree.max_depth, "Maximum tree depth")
        ->capture_default_str();
    cmd->add_option("--rounds", params.num_rounds, "Number of boosting rounds")
        ->capture_default_str();
    cmd->add_option("--eta", params.learning_rate, "Learning rate (shrinkage)")
        ->capture_default_str();
    cmd->add_option("--lambda", params.tree.lambda, "L2 penalty on leaf weights")
        ->capture_default_str();
    cmd->add_option("--gamma", params.tree.gamma, "Penalty per leaf")->capture_default_str();
    cmd->add_option("--min-child-weight", params.tree.min_child_weight,
                    "Minimum hessian sum per child")
        ->capture_default_str();
    cmd->add_option("--min-split-gain", params.tree.min_split_gain, "Minimum gain to split")
        ->capture_default_str();
    cmd->add_option("--base-score", params.base_score_raw, "Initial raw score")
        ->capture_default_str();
    cmd->add_option("--threshold", threshold, "Decision threshold for the summary")
        ->capture_default_str();
    cmd->add_option("--out", out, "Model file to write")->required();
    cmd->add_option("--log", log, "Per-round training log CSV (default: <out>.log.csv)");
    cmd->callback([this] { run(); });
  }

  void run() {
    params.objective = mu == 0.0 ? fb::ObjectiveConfig::vanilla() : fb::ObjectiveConfig::fair(mu);
    params.validate();
    input.validate();
    check_threshold(threshold);
    const std::string log_path = log.empty() ? out + ".log.csv" : log;

    const fb::Dataset data = input.load();
    fb::TrainResult result;
    try {
      result = fb::train(data, params);
    } catch (const fb::Error& e) {
      throw Failure{kTraining, std::string("training failed: ") + e.what()};
    }
    const fb::FairnessReport report = fb::evaluate(result.model, data, threshold);
    fb::save_model(result.model, out);
    fb::write_text_file_atomic(log_path, result.log.to_csv());
    std::cout << "train rows=" << data.n_rows() << " mu=" << fb::format_real(mu)
              << " rounds=" << params.num_rounds << " accuracy=" << fb::format_real(report.accuracy)
              << " di=" << di_text(report.disparate_impact) << " model=" << out << "\n";
  }
};

struct PredictCmd {
  DataFlags input;
  std::string model;
  std::string out;
  double threshold = fb::kDefaultThreshold;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("predict", "Write per-row probabilities and predictions");
    input.add(cmd, "Rows to score when splitting: all, train or test");
    cmd->add_option("--model", model, "Model file")->required();
    cmd->add_option("--threshold", threshold, "Decision threshold")->capture_default_str();
    cmd->add_option("--out", out, "Output CSV (columns proba,prediction)")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    input.validate();
    check_threshold(threshold);
    const fb::BoosterModel booster = fb::load_model(model);
    const fb::Dataset data = input.load();
    if (data.feature_names() != booster.feature_names) {
      throw fb::SchemaError("dataset features do not match the model's features");
    }
    const Eigen::VectorXd proba = fb::predict_proba(booster, data.features());
    const fb::BinaryVector predictions = fb::binarize(proba, threshold);
    std::string text = "proba,prediction\n";
    for (Eigen::Index i = 0; i < proba.size(); ++i) {
      text += fb::format_real(proba(i)) + "," + std::to_string(predictions(i)) + "\n";
    }
    fb::write_text_file_atomic(out, text);
    std::cout << "predict rows=" << data.n_rows() << " positives=" << predictions.sum()
              << " out=" << out << "\n";
  }
};

struct EvaluateCmd {
  DataFlags input;
  std::string model;
  std::string out;
  double threshold = fb::kDefaultThreshold;
  std::optional<double> require_di;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("evaluate", "Report accuracy and disparate impact");
    input.add(cmd, "Rows to evaluate when splitting: all, train or test");
    cmd->add_option("--model", model, "Model file")->required();
    cmd->add_option("--threshold", threshold, "Decision threshold")->capture_default_str();
    cmd->add_option("--require-di", require_di,
                    "Exit with status 5 when DI is below this value or undefined (default: off)");
    cmd->add_option("--out", out, "Also write the report as CSV (default: none)");
    cmd->callback([this] { run(); });
  }

  void run() const {
    input.validate();
    check_threshold(threshold);
    if (require_di && !(*require_di >= 0.0)) {
      throw fb::ParameterError("--require-di must be >= 0");
    }
    const fb::BoosterModel booster = fb::load_model(model);
    const fb::Dataset data = input.load();
    const fb::FairnessReport report = fb::evaluate(booster, data, threshold);
    if (!out.empty()) {
      fb::write_text_file_atomic(out, fb::FairnessReport::csv_header() + "\n" +
                                          report.to_csv_row() + "\n");
    }
    std::cerr << fb::FairnessReport::csv_header() << "\n";
    std::cout << report.to_csv_row() << "\n";
    if (require_di &&
        !(report.disparate_impact && *report.disparate_impact >= *require_di)) {
      throw Failure{kGate, "disparate impact " + di_text(report.disparate_impact) +
                               " is below the required " + fb::format_real(*require_di)};
    }
  }
};

struct SweepCmd {
  std::string data;
  std::string schema;
  std::string config;
  std::string mu_grid;
  std::optional<std::uint64_t> seed;
  std::optional<double> test_fraction;
  std::optional<double> threshold;
  std::string out = "sweep.csv";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("sweep", "Tune the vanilla model, then train one model per mu");
    cmd->add_option("--data", data, "Prepared CSV file")->required();
    cmd->add_option("--schema", schema, "Column schema file")->required();
    cmd->add_option("--config", config,
                    "Sweep config file (default: mu_grid=0:1:0.05, max_depth=6, num_rounds=100, "
                    "learning_rate=0.3, test_fraction=0.3, seed=42)");
    cmd->add_option("--mu-grid", mu_grid, "Override mu grid, start:stop:step or a list");
    cmd->add_option("--seed", seed, "Override the split seed (default: from config, 42)");
    cmd->add_option("--test-fraction", test_fraction,
                    "Override the test share (default: from config, 0.3)");
    cmd->add_option("--threshold", threshold,
                    "Override the decision threshold (default: from config, 0.5)");
    cmd->add_option("--out", out, "Sweep CSV to write")->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() const {
    std::string text = config.empty() ? std::string() : fb::read_text_file(config);
    if (!mu_grid.empty()) text += "\nmu_grid=" + mu_grid;
    if (seed) text += "\nseed=" + std::to_string(*seed);
    if (test_fraction) text += "\ntest_fraction=" + fb::format_real(*test_fraction);
    if (threshold) text += "\nthreshold=" + fb::format_real(*threshold);
    const fb::bench::SweepConfig cfg = parse_overridden(text);

    const fb::Dataset dataset = fb::load_csv(data, fb::read_schema(schema));
    fb::bench::SweepResult result;
    try {
      result = fb::bench::run_sweep(dataset, cfg);
    } catch (const fb::ParameterError&) {
      throw;
    } catch (const fb::Error& e) {
      throw Failure{kTraining, e.what()};
    }
    fb::write_text_file_atomic(out, fb::bench::format_sweep_csv(result));
    std::cerr << fb::bench::format_sweep_table(result);
    const auto& tuned = result.rows.front();
    std::cout << "sweep rows=" << result.rows.size() << " max_depth=" << tuned.max_depth
              << " num_rounds=" << tuned.num_rounds
              << " learning_rate=" << fb::format_real(tuned.learning_rate) << " out=" << out
              << "\n";
  }

  // Later lines override earlier ones for the keys the flags control.
  static fb::bench::SweepConfig parse_overridden(const std::string& text) {
    std::vector<std::string> lines;
    std::map<std::string, std::size_t> last;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) {
      const auto body = fb::trim(line);
      const auto eq = body.find('=');
      if (!body.empty() && body.front() != '#' && eq != std::string_view::npos) {
        const std::string key(fb::trim(body.substr(0, eq)));
        if (auto it = last.find(key); it != last.end()) lines[it->second].clear();
        last[key] = lines.size();
      }
      lines.push_back(line);
    }
    std::string merged;
    for (const auto& l : lines) merged += l + "\n";
    return fb::bench::parse_sweep_config(merged);
  }
};

struct ReportCmd {
  std::string sweep;
  double di_target = 0.8;
  std::string out_dir = ".";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("report", "Accuracy drop and curves from a sweep CSV");
    cmd->add_option("--sweep", sweep, "Sweep CSV written by the sweep command")->required();
    cmd->add_option("--di-target", di_target, "DI level the drop is measured against")
        ->capture_default_str();
    cmd->add_option("--out-dir", out_dir,
                    "Directory for drop_report.txt, curves.csv and curves.svg")
        ->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() const {
    if (!(di_target > 0.0)) throw fb::ParameterError("--di-target must be > 0");
    const auto result = fb::bench::parse_sweep_csv(fb::read_text_file(sweep));
    if (result.rows.empty()) throw fb::DataError("sweep CSV has no rows");
    const auto report = fb::bench::accuracy_drop_report(result, di_target);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw fb::IoError("cannot create output directory " + out_dir);
    const std::string report_text = report.to_text();
    const std::string curves_csv = fb::bench::format_curves_csv(result);
    const std::string curves_svg = fb::bench::render_curves_svg(result, di_target);
    fb::write_text_file_atomic(fs::path(out_dir) / "drop_report.txt", report_text);
    fb::write_text_file_atomic(fs::path(out_dir) / "curves.csv", curves_csv);
    fb::write_text_file_atomic(fs::path(out_dir) / "curves.svg", curves_svg);
    std::cerr << report_text;
    const auto opt = [](const std::optional<double>& v) {
      return v ? fb::format_real(*v) : std::string("none");
    };
    std::cout << "report di_target=" << fb::format_real(di_target)
              << " drop=" << (report.drop ? fb::format_real(*report.drop) : "unachieved")
              << " best_mu=" << opt(report.best_mu) << " smallest_mu=" << opt(report.smallest_mu)
              << "\n";
  }
};

int report_error(int code, const std::string& message) {
  std::cerr << "fairboost: error: " << message << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-regularized gradient boosting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fairboost 1.0");

  PrepareCmd prepare;
  TrainCmd train;
  PredictCmd predict;
  EvaluateCmd evaluate;
  SweepCmd sweep;
  ReportCmd report;
  prepare.add(app);
  train.add(app);
  predict.add(app);
  evaluate.add(app);
  sweep.add(app);
  report.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const Failure& f) {
    return report_error(f.code, f.message);
  } catch (const fb::ParameterError& e) {
    return report_error(kUsage, e.what());
  } catch (const fb::DegenerateLeafError& e) {
    return report_error(kTraining, e.what());
  } catch (const fb::Error& e) {
    return report_error(kData, e.what());
  } catch (const std::exception& e) {
    return report_error(kTraining, e.what());
  }
  return kOk;
}
