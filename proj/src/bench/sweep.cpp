#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "fairboost/bench.hpp"
#include "fairboost/error.hpp"
#include "fairboost/parallel.hpp"

namespace fairboost::bench {

std::vector<double> default_mu_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(k / 20.0);
  return grid;
}

void SweepConfig::validate() const {
  if (mu_grid.empty()) throw ParameterError("mu_grid must not be empty");
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    const double mu = mu_grid[i];
    if (!(mu >= 0.0 && mu <= 1.0)) {
      throw ParameterError("mu_grid value " + format_real(mu) + " is outside [0, 1]");
    }
    if (i > 0 && !(mu > mu_grid[i - 1])) {
      throw ParameterError("mu_grid must be strictly increasing");
    }
  }
  if (grid.size() == 0) throw ParameterError("hyperparameter grid must not be empty");
  for (int d : grid.max_depth) {
    if (d < 0) throw ParameterError("max_depth values must be >= 0");
  }
  for (int r : grid.num_rounds) {
    if (r < 1) throw ParameterError("num_rounds values must be >= 1");
  }
  for (double lr : grid.learning_rate) {
    if (!(lr > 0.0 && std::isfinite(lr))) {
      throw ParameterError("learning_rate values must be positive");
    }
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ParameterError("test_fraction must lie in (0, 1)");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ParameterError("validation_fraction must lie in (0, 1)");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) throw ParameterError("threshold must lie in (0, 1)");
  base_params.tree.validate();
  if (mu_grid.back() == 1.0 && base_params.tree.lambda == 0.0) {
    throw ParameterError("mu = 1 requires lambda > 0: every hessian vanishes at mu = 1");
  }
}

namespace {

double require_real(std::string_view key, std::string_view value) {
  const auto v = parse_real(value);
  if (!v) {
    throw ParameterError("config key '" + std::string(key) + "': '" + std::string(value) +
                         "' is not a number");
  }
  return *v;
}

int require_int(std::string_view key, std::string_view value) {
  const auto v = parse_integer(value);
  if (!v || *v < INT32_MIN || *v > INT32_MAX) {
    throw ParameterError("config key '" + std::string(key) + "': '" + std::string(value) +
                         "' is not an integer");
  }
  return static_cast<int>(*v);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<double> parse_mu_grid(std::string_view value) {
  const auto range = split(value, ':');
  if (range.size() == 3) {
    const double start = require_real("mu_grid", range[0]);
    const double stop = require_real("mu_grid", range[1]);
    const double step = require_real("mu_grid", range[2]);
    if (!(step > 0.0)) throw ParameterError("mu_grid step must be positive");
    // Points are start + k * step, snapped so 0:1:0.05 gives exactly k / 20.
    const double count = (stop - start) / step;
    const auto n = static_cast<long long>(std::floor(count + 1e-9));
    if (n < 0) throw ParameterError("mu_grid stop is below start");
    const double inverse = 1.0 / step;
    const bool integral_inverse = std::abs(inverse - std::round(inverse)) < 1e-9;
    std::vector<double> out;
    for (long long k = 0; k <= n; ++k) {
      out.push_back(integral_inverse ? start + static_cast<double>(k) / std::round(inverse)
                                     : start + static_cast<double>(k) * step);
    }
    return out;
  }
  if (range.size() != 1) throw ParameterError("mu_grid range must be start:stop:step");
  std::vector<double> out;
  for (auto part : split(value, ',')) out.push_back(require_real("mu_grid", part));
  return out;
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view key, std::string_view value, Parse parse) {
  std::vector<T> out;
  for (auto part : split(value, ',')) out.push_back(parse(key, part));
  return out;
}

template <typename T, typename Format>
std::string join(const std::vector<T>& values, Format format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ",";
    out += format(values[i]);
  }
  return out;
}

}  // namespace

SweepConfig parse_sweep_config(std::string_view text) {
  SweepConfig config;
  std::map<std::string, int> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParameterError("config line " + std::to_string(line_no) + " is not key=value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (seen[key]++ > 0) throw ParameterError("config key '" + key + "' given twice");
    if (key == "mu_grid") {
      config.mu_grid = parse_mu_grid(value);
    } else if (key == "max_depth") {
      config.grid.max_depth = parse_list<int>(key, value, require_int);
    } else if (key == "num_rounds") {
      config.grid.num_rounds = parse_list<int>(key, value, require_int);
    } else if (key == "learning_rate") {
      config.grid.learning_rate = parse_list<double>(key, value, require_real);
    } else if (key == "lambda") {
      config.base_params.tree.lambda = require_real(key, value);
    } else if (key == "gamma") {
      config.base_params.tree.gamma = require_real(key, value);
    } else if (key == "min_child_weight") {
      config.base_params.tree.min_child_weight = require_real(key, value);
    } else if (key == "min_split_gain") {
      config.base_params.tree.min_split_gain = require_real(key, value);
    } else if (key == "base_score_raw") {
      config.base_params.base_score_raw = require_real(key, value);
    } else if (key == "test_fraction") {
      config.test_fraction = require_real(key, value);
    } else if (key == "validation_fraction") {
      config.validation_fraction = require_real(key, value);
    } else if (key == "seed") {
      const auto v = parse_integer(value);
      if (!v || *v < 0) throw ParameterError("config key 'seed' must be a non-negative integer");
      config.seed = static_cast<std::uint64_t>(*v);
    } else if (key == "threshold") {
      config.threshold = require_real(key, value);
    } else {
      throw ParameterError("unknown config key '" + key + "' on line " + std::to_string(line_no));
    }
  }
  config.validate();
  return config;
}

std::string format_sweep_config(const SweepConfig& config) {
  const auto real = [](double v) { return format_real(v); };
  const auto integer = [](int v) { return std::to_string(v); };
  std::string out;
  out += "mu_grid=" + join(config.mu_grid, real) + "\n";
  out += "max_depth=" + join(config.grid.max_depth, integer) + "\n";
  out += "num_rounds=" + join(config.grid.num_rounds, integer) + "\n";
  out += "learning_rate=" + join(config.grid.learning_rate, real) + "\n";
  out += "lambda=" + format_real(config.base_params.tree.lambda) + "\n";
  out += "gamma=" + format_real(config.base_params.tree.gamma) + "\n";
  out += "min_child_weight=" + format_real(config.base_params.tree.min_child_weight) + "\n";
  out += "min_split_gain=" + format_real(config.base_params.tree.min_split_gain) + "\n";
  out += "base_score_raw=" + format_real(config.base_params.base_score_raw) + "\n";
  out += "test_fraction=" + format_real(config.test_fraction) + "\n";
  out += "validation_fraction=" + format_real(config.validation_fraction) + "\n";
  out += "seed=" + std::to_string(config.seed) + "\n";
  out += "threshold=" + format_real(config.threshold) + "\n";
  return out;
}

BoosterParams tune_vanilla(const Dataset& data, const HyperparameterGrid& grid,
                           const BoosterParams& base, double validation_fraction,
                           std::uint64_t seed, double threshold) {
  if (grid.size() == 0) throw ParameterError("hyperparameter grid must not be empty");
  BoosterParams candidate = base;
  candidate.objective = ObjectiveConfig::vanilla();
  if (grid.size() == 1) {
    candidate.tree.max_depth = grid.max_depth.front();
    candidate.num_rounds = grid.num_rounds.front();
    candidate.learning_rate = grid.learning_rate.front();
    candidate.validate();
    return candidate;
  }

  const auto [fit, validation] = train_test_split(data, validation_fraction, seed);
  const int max_rounds = *std::max_element(grid.num_rounds.begin(), grid.num_rounds.end());

  // Models for fewer rounds are prefixes of the longest one, so each
  // (depth, rate) pair is trained once.
  struct Cell {
    int depth;
    double rate;
  };
  std::vector<Cell> cells;
  for (int depth : grid.max_depth) {
    for (double rate : grid.learning_rate) cells.push_back({depth, rate});
  }
  std::vector<std::vector<double>> scores(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    BoosterParams params = candidate;
    params.tree.max_depth = cells[c].depth;
    params.learning_rate = cells[c].rate;
    params.num_rounds = max_rounds;
    const BoosterModel model = train(fit, params).model;
    for (int rounds : grid.num_rounds) {
      const auto predictions =
          binarize(predict_proba(model.prefix(static_cast<std::size_t>(rounds)),
                                 validation.features()),
                   threshold);
      scores[c].push_back(accuracy(predictions, validation.labels()));
    }
  });

  double best = -1.0;
  for (std::size_t d = 0; d < grid.max_depth.size(); ++d) {
    for (std::size_t r = 0; r < grid.num_rounds.size(); ++r) {
      for (std::size_t l = 0; l < grid.learning_rate.size(); ++l) {
        const double score = scores[d * grid.learning_rate.size() + l][r];
        if (score > best) {
          best = score;
          candidate.tree.max_depth = grid.max_depth[d];
          candidate.num_rounds = grid.num_rounds[r];
          candidate.learning_rate = grid.learning_rate[l];
        }
      }
    }
  }
  return candidate;
}

SweepRow evaluate_mu(const Dataset& train_part, const Dataset& test_part,
                     const BoosterParams& tuned, double mu, double threshold) {
  BoosterParams params = tuned;
  params.objective = ObjectiveConfig::fair(mu);
  const BoosterModel model = train(train_part, params).model;
  SweepRow row;
  row.mu = mu;
  row.train = evaluate(model, train_part, threshold);
  row.test = evaluate(model, test_part, threshold);
  row.max_depth = params.tree.max_depth;
  row.num_rounds = params.num_rounds;
  row.learning_rate = params.learning_rate;
  return row;
}

SweepResult run_sweep(const Dataset& data, const SweepConfig& config) {
  config.validate();
  const auto [train_part, test_part] = train_test_split(data, config.test_fraction, config.seed);
  const BoosterParams tuned = tune_vanilla(train_part, config.grid, config.base_params,
                                           config.validation_fraction, config.seed,
                                           config.threshold);
  SweepResult result;
  result.rows.resize(config.mu_grid.size());
  parallel_for(config.mu_grid.size(), [&](std::size_t i) {
    const double mu = config.mu_grid[i];
    try {
      result.rows[i] = evaluate_mu(train_part, test_part, tuned, mu, config.threshold);
    } catch (const Error& e) {
      throw Error("sweep point mu=" + format_real(mu) + " failed: " + e.what());
    }
  });
  return result;
}

const SweepRow* SweepResult::find(double mu) const {
  for (const auto& row : rows) {
    if (row.mu == mu) return &row;
  }
  return nullptr;
}

namespace {

constexpr std::string_view kSweepHeader =
    "mu,train_acc,test_acc,train_di,test_di,max_depth,num_rounds,learning_rate";

std::string di_cell(const std::optional<double>& di) {
  return di ? format_real(*di) : std::string(kUndefined);
}

std::optional<double> parse_di_cell(std::string_view cell, std::size_t line) {
  if (cell == kUndefined) return std::nullopt;
  const auto v = parse_real(cell);
  if (!v) throw DataError("sweep CSV line " + std::to_string(line) + ": bad DI '" + std::string(cell) + "'");
  return *v;
}

}  // namespace

std::string format_sweep_csv(const SweepResult& result) {
  std::string out(kSweepHeader);
  out += "\n";
  for (const auto& row : result.rows) {
    out += format_real(row.mu) + "," + format_real(row.train.accuracy) + "," +
           format_real(row.test.accuracy) + "," + di_cell(row.train.disparate_impact) + "," +
           di_cell(row.test.disparate_impact) + "," + std::to_string(row.max_depth) + "," +
           std::to_string(row.num_rounds) + "," + format_real(row.learning_rate) + "\n";
  }
  return out;
}

SweepResult parse_sweep_csv(std::string_view text) {
  const CsvTable table = parse_csv(text);
  if (format_csv_row(table.header) != std::string(kSweepHeader) + "\n") {
    throw DataError("sweep CSV header must be " + std::string(kSweepHeader));
  }
  SweepResult result;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    const std::size_t line = r + 2;
    const auto real = [&](std::size_t c) {
      const auto v = parse_real(cells[c]);
      if (!v) {
        throw DataError("sweep CSV line " + std::to_string(line) + ", column '" + table.header[c] +
                        "': '" + cells[c] + "' is not a number");
      }
      return *v;
    };
    const auto integer = [&](std::size_t c) {
      const auto v = parse_integer(cells[c]);
      if (!v) {
        throw DataError("sweep CSV line " + std::to_string(line) + ", column '" + table.header[c] +
                        "': '" + cells[c] + "' is not an integer");
      }
      return static_cast<int>(*v);
    };
    SweepRow row;
    row.mu = real(0);
    row.train.accuracy = real(1);
    row.test.accuracy = real(2);
    row.train.disparate_impact = parse_di_cell(cells[3], line);
    row.test.disparate_impact = parse_di_cell(cells[4], line);
    row.max_depth = integer(5);
    row.num_rounds = integer(6);
    row.learning_rate = real(7);
    if (!result.rows.empty() && !(row.mu > result.rows.back().mu)) {
      throw DataError("sweep CSV line " + std::to_string(line) + ": mu values must increase");
    }
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace fairboost::bench
