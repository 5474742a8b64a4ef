#ifndef FAIRBOOST_BENCH_HPP_
#define FAIRBOOST_BENCH_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairboost/booster.hpp"
#include "fairboost/csv.hpp"
#include "fairboost/data.hpp"
#include "fairboost/metrics.hpp"

namespace fairboost::bench {

// ---------------------------------------------------------------------------
// Benchmark preparation

enum class Benchmark { kAdult, kCompas, kDefault, kBank };

std::string_view benchmark_name(Benchmark which);
/// Accepts adult, compas, default, bank. Throws ParameterError otherwise.
Benchmark parse_benchmark(std::string_view name);
std::span<const Benchmark> all_benchmarks();

/// Where a raw file comes from and the checksum it must match.
struct RawSource {
  /// Accepted file names inside the raw directory, first match wins.
  std::vector<std::string> file_names;
  /// Lower-case hex SHA-256 per accepted file name; empty when none is recorded.
  std::vector<std::string> sha256;
  std::string download_hint;
};

const RawSource& raw_source(Benchmark which);

struct PreparedTable {
  CsvTable table;
  ColumnSchema schema;
  std::filesystem::path raw_file;
  /// False when the raw file has no recorded checksum to compare against.
  bool checksum_verified = false;
};

/// Reads the raw file for `which` from `raw_dir` and reduces it to the clean
/// table + fitted schema:
///   adult    income >50K = 1, sex: Male = majority; '?' kept as a category
///   compas   two_year_recid = 1, race: African-American = majority (1) vs
///            every other race (0); 13 feature columns including race
///   default  default payment next month = 1, SEX: female (2) = majority
///   bank     subscribed 'yes' = 1, sensitive 1 iff 33 <= age <= 60
/// The raw sensitive column is replaced by its 0/1 group indicator, which is
/// also a model feature (feature=yes in the schema). Throws
/// IngestionError (with download instructions) for a missing file or a
/// checksum mismatch.
PreparedTable prepare_table(Benchmark which, const std::filesystem::path& raw_dir);

struct PreparedFiles {
  std::filesystem::path csv;
  std::filesystem::path schema;
  Index n_rows = 0;
  bool checksum_verified = false;
};

/// prepare_table, then writes <name>.csv and <name>.schema into out_dir.
PreparedFiles prepare_dataset(Benchmark which, const std::filesystem::path& raw_dir,
                              const std::filesystem::path& out_dir);

/// Loads a prepared benchmark straight into a Dataset.
Dataset load_benchmark(Benchmark which, const std::filesystem::path& raw_dir);

std::string sha256_hex(std::string_view bytes);

// ---------------------------------------------------------------------------
// Sweeps

/// Candidate values for the vanilla tuning phase, searched as a cartesian
/// product in (max_depth, num_rounds, learning_rate) order.
struct HyperparameterGrid {
  std::vector<int> max_depth;
  std::vector<int> num_rounds;
  std::vector<double> learning_rate;

  std::size_t size() const { return max_depth.size() * num_rounds.size() * learning_rate.size(); }
};

/// 0.00, 0.05, ..., 1.00.
std::vector<double> default_mu_grid();

struct SweepConfig {
  std::vector<double> mu_grid = default_mu_grid();
  /// Everything except max_depth / num_rounds / learning_rate (taken from the
  /// tuned grid point) and the objective (set per mu).
  BoosterParams base_params;
  HyperparameterGrid grid{{6}, {100}, {0.3}};
  double test_fraction = 0.3;
  /// Share of the training part held out while tuning the vanilla model.
  double validation_fraction = 0.25;
  std::uint64_t seed = 42;
  double threshold = kDefaultThreshold;

  /// Throws ParameterError for an empty or unsorted grid, mu outside [0, 1],
  /// mu = 1 with lambda = 0, an empty hyperparameter grid, or bad fractions.
  void validate() const;
};

/// Key-value text, one setting per line; lists are comma separated and
/// mu_grid also accepts start:stop:step.
///
///   mu_grid=0:1:0.05
///   max_depth=3,4,5,6
///   num_rounds=50,100,200
///   learning_rate=0.1,0.3
///   lambda=1
///   gamma=0
///   min_child_weight=0.001
///   min_split_gain=0
///   base_score_raw=0
///   test_fraction=0.3
///   validation_fraction=0.25
///   seed=42
///   threshold=0.5
SweepConfig parse_sweep_config(std::string_view text);
std::string format_sweep_config(const SweepConfig& config);

/// Exhaustive search at mu = 0 over `grid`; models are fit on one part of
/// `data` and scored on a held-out validation part (validation_fraction,
/// seed). Ties keep the earlier grid point. A singleton grid is returned
/// without training.
BoosterParams tune_vanilla(const Dataset& data, const HyperparameterGrid& grid,
                           const BoosterParams& base, double validation_fraction,
                           std::uint64_t seed, double threshold = kDefaultThreshold);

struct SweepRow {
  double mu = 0.0;
  FairnessReport train;
  FairnessReport test;
  int max_depth = 0;
  int num_rounds = 0;
  double learning_rate = 0.0;
};

struct SweepResult {
  /// Ordered by mu.
  std::vector<SweepRow> rows;

  const SweepRow* find(double mu) const;
};

/// Splits, tunes the vanilla hyperparameters on the training part, then trains
/// one fair_logistic model per mu on the training part and evaluates it on
/// both parts. Points may run in parallel; rows come back ordered by mu.
/// A failing point aborts with an Error naming its mu.
SweepResult run_sweep(const Dataset& data, const SweepConfig& config);

/// Train one model at `mu` with already tuned params and score it.
SweepRow evaluate_mu(const Dataset& train, const Dataset& test, const BoosterParams& tuned,
                     double mu, double threshold);

/// Columns: mu,train_acc,test_acc,train_di,test_di,max_depth,num_rounds,learning_rate.
std::string format_sweep_csv(const SweepResult& result);
/// Inverse of format_sweep_csv (reports carry accuracy and DI only).
SweepResult parse_sweep_csv(std::string_view text);

// ---------------------------------------------------------------------------
// Reports

enum class DropStatus {
  /// The mu = 0 row already meets the DI target; drop is exactly 0.
  kVanillaQualifies,
  kAchieved,
  kUnachieved,
};

/// Accuracy cost of reaching a DI target, on test metrics.
struct DropReport {
  double di_target = 0.8;
  DropStatus status = DropStatus::kUnachieved;
  double vanilla_accuracy = 0.0;
  std::optional<double> vanilla_di;
  /// vanilla accuracy - best accuracy among rows with DI >= target.
  std::optional<double> drop;
  /// mu of that best row.
  std::optional<double> best_mu;
  /// Smallest mu meeting the target and the accuracy drop at that mu.
  std::optional<double> smallest_mu;
  std::optional<double> drop_at_smallest_mu;

  std::string to_text() const;
};

/// Throws ContractError when the result has no mu = 0 row.
DropReport accuracy_drop_report(const SweepResult& result, double di_target = 0.8);

/// Columns: mu,train_acc,test_acc,train_di,test_di.
std::string format_curves_csv(const SweepResult& result);
/// Line chart of DI and accuracy against mu with a dashed horizontal reference
/// line at DI = reference.
std::string render_curves_svg(const SweepResult& result, double reference = 0.8);

/// Writes curves.csv and curves.svg into out_dir. Throws IoError when the
/// directory is not writable.
void emit_curves(const SweepResult& result, const std::filesystem::path& out_dir,
                 double reference = 0.8);

/// Kendall's tau-b; 0 when either input is constant.
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Kendall's tau between mu and test DI over rows with a defined DI.
double mu_di_trend(const SweepResult& result);

/// Human-readable table of every row, for diagnostics.
std::string format_sweep_table(const SweepResult& result);

}  // namespace fairboost::bench

#endif  // FAIRBOOST_BENCH_HPP_
