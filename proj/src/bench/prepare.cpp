#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <memory>
#include <set>

#include "fairboost/bench.hpp"
#include "fairboost/error.hpp"

namespace fairboost::bench {

std::string_view benchmark_name(Benchmark which) {
  switch (which) {
    case Benchmark::kAdult: return "adult";
    case Benchmark::kCompas: return "compas";
    case Benchmark::kDefault: return "default";
    case Benchmark::kBank: return "bank";
  }
  return "adult";
}

Benchmark parse_benchmark(std::string_view name) {
  for (Benchmark b : all_benchmarks()) {
    if (benchmark_name(b) == name) return b;
  }
  throw ParameterError("unknown benchmark '" + std::string(name) +
                       "' (expected adult, compas, default or bank)");
}

std::span<const Benchmark> all_benchmarks() {
  static constexpr std::array kAll{Benchmark::kAdult, Benchmark::kCompas, Benchmark::kDefault,
                                   Benchmark::kBank};
  return kAll;
}

const RawSource& raw_source(Benchmark which) {
  static const RawSource kAdult{
      {"adult.data"},
      {"5b00264637dbfec36bdeaab5676b0b309ff9eb788d63554ca0a249491c86603d"},
      "download adult.data from the UCI Machine Learning Repository "
      "(https://archive.ics.uci.edu/ml/machine-learning-databases/adult/adult.data)"};
  static const RawSource kCompas{
      {"compas-scores-two-years.csv"},
      {"c451db85908b2f7fef1d83203bedf6b71ecda0d5af468d82ae62178f91d0cc7d"},
      "download compas-scores-two-years.csv from ProPublica's compas-analysis repository "
      "(https://github.com/propublica/compas-analysis)"};
  // No checksum is recorded for these two yet; see the README.
  static const RawSource kDefault{
      {"default of credit card clients.csv", "UCI_Credit_Card.csv"},
      {"", ""},
      "download 'default of credit card clients' from the UCI Machine Learning Repository "
      "(dataset 350) and export the sheet as 'default of credit card clients.csv', or use the "
      "equivalent UCI_Credit_Card.csv export"};
  static const RawSource kBank{
      {"bank-full.csv"},
      {""},
      "download bank.zip from the UCI Machine Learning Repository (Bank Marketing, dataset 222) "
      "and extract bank-full.csv"};
  switch (which) {
    case Benchmark::kAdult: return kAdult;
    case Benchmark::kCompas: return kCompas;
    case Benchmark::kDefault: return kDefault;
    case Benchmark::kBank: return kBank;
  }
  return kAdult;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

namespace {

struct RawFile {
  std::filesystem::path path;
  std::string bytes;
  bool verified = false;
};

RawFile read_raw(Benchmark which, const std::filesystem::path& raw_dir) {
  const RawSource& source = raw_source(which);
  for (std::size_t k = 0; k < source.file_names.size(); ++k) {
    const auto path = raw_dir / source.file_names[k];
    if (!std::filesystem::exists(path)) continue;
    RawFile raw{path, read_text_file(path), false};
    const std::string& expected = source.sha256[k];
    if (!expected.empty()) {
      const auto actual = sha256_hex(raw.bytes);
      if (actual != expected) {
        throw IngestionError("checksum mismatch for " + path.string() + ": expected sha256 " +
                             expected + ", got " + actual + "; " + source.download_hint);
      }
      raw.verified = true;
    }
    return raw;
  }
  std::string names;
  for (const auto& n : source.file_names) names += (names.empty() ? "'" : " or '") + n + "'";
  throw IngestionError("raw file for benchmark '" + std::string(benchmark_name(which)) +
                       "' not found in " + raw_dir.string() + " (looked for " + names + "); " +
                       source.download_hint);
}

// Copies selected raw columns into a new table, renaming as needed.
struct ColumnPick {
  std::string source;
  std::string output;
};

CsvTable select_columns(const CsvTable& raw, const std::vector<ColumnPick>& picks,
                        std::string_view dataset) {
  std::vector<std::size_t> positions;
  CsvTable out;
  for (const auto& pick : picks) {
    auto pos = raw.column(pick.source);
    if (!pos) {
      throw IngestionError("raw " + std::string(dataset) + " file lacks column '" + pick.source + "'");
    }
    positions.push_back(*pos);
    out.header.push_back(pick.output);
  }
  out.rows.reserve(raw.rows.size());
  for (const auto& row : raw.rows) {
    std::vector<std::string> cells;
    cells.reserve(positions.size());
    for (auto p : positions) cells.emplace_back(trim(row[p]));
    out.rows.push_back(std::move(cells));
  }
  return out;
}

ColumnSpec numeric(std::string name) {
  return {std::move(name), ColumnRole::kFeature, ColumnKind::kNumeric, "1", {}, {}};
}
ColumnSpec categorical(std::string name) {
  return {std::move(name), ColumnRole::kFeature, ColumnKind::kCategorical, "1", {}, {}};
}
ColumnSpec target(std::string name, std::string one, std::string zero) {
  return {std::move(name), ColumnRole::kTarget, ColumnKind::kNumeric, std::move(one),
          std::move(zero), {}};
}
ColumnSpec sensitive(std::string name, std::string majority, std::optional<std::string> minority) {
  return {std::move(name), ColumnRole::kSensitive, ColumnKind::kNumeric, std::move(majority),
          std::move(minority), {}, true};
}

// Lists the sorted distinct values of every categorical feature, matching what
// load_table would fit, so the written schema is self-contained.
void fit_categories(const CsvTable& table, ColumnSchema& schema) {
  for (auto& col : schema.columns) {
    if (col.role != ColumnRole::kFeature || col.kind != ColumnKind::kCategorical) continue;
    const auto pos = table.column(col.name);
    std::set<std::string> values;
    for (const auto& row : table.rows) values.insert(std::string(trim(row[*pos])));
    col.categories.assign(values.begin(), values.end());
  }
}

PreparedTable prepare_adult(const std::string& bytes) {
  CsvOptions options;
  options.has_header = false;
  options.trim = true;
  CsvTable raw = parse_csv(bytes, options);
  static const std::vector<std::string> kNames{
      "age", "workclass", "fnlwgt", "education", "education-num", "marital-status", "occupation",
      "relationship", "race", "sex", "capital-gain", "capital-loss", "hours-per-week",
      "native-country", "income"};
  if (raw.header.size() != kNames.size()) {
    throw IngestionError("adult.data should have 15 columns, found " +
                         std::to_string(raw.header.size()));
  }
  raw.header = kNames;
  PreparedTable out;
  out.table = std::move(raw);
  out.schema.columns = {
      numeric("age"),
      categorical("workclass"),
      {"fnlwgt", ColumnRole::kDrop, ColumnKind::kNumeric, "1", {}, {}},
      categorical("education"),
      numeric("education-num"),
      categorical("marital-status"),
      categorical("occupation"),
      categorical("relationship"),
      categorical("race"),
      sensitive("sex", "Male", "Female"),
      numeric("capital-gain"),
      numeric("capital-loss"),
      numeric("hours-per-week"),
      categorical("native-country"),
      target("income", ">50K", "<=50K"),
  };
  return out;
}

PreparedTable prepare_compas(const std::string& bytes) {
  const CsvTable raw = parse_csv(bytes);
  PreparedTable out;
  out.table = select_columns(raw,
                             {{"sex", "sex"},
                              {"age", "age"},
                              {"juv_fel_count", "juv_fel_count"},
                              {"juv_misd_count", "juv_misd_count"},
                              {"juv_other_count", "juv_other_count"},
                              {"priors_count", "priors_count"},
                              {"c_charge_degree", "c_charge_degree"},
                              {"c_charge_desc", "c_charge_desc"},
                              {"decile_score", "decile_score"},
                              {"score_text", "score_text"},
                              {"v_decile_score", "v_decile_score"},
                              {"v_score_text", "v_score_text"},
                              {"race", "race"},
                              {"two_year_recid", "two_year_recid"}},
                             "compas");
  const auto desc = *out.table.column("c_charge_desc");
  const auto race = *out.table.column("race");
  for (auto& row : out.table.rows) {
    if (row[desc].empty()) row[desc] = "missing";
    row[race] = row[race] == "African-American" ? "African-American" : "Other";
  }
  out.schema.columns = {
      categorical("sex"),
      numeric("age"),
      numeric("juv_fel_count"),
      numeric("juv_misd_count"),
      numeric("juv_other_count"),
      numeric("priors_count"),
      categorical("c_charge_degree"),
      categorical("c_charge_desc"),
      numeric("decile_score"),
      categorical("score_text"),
      numeric("v_decile_score"),
      categorical("v_score_text"),
      sensitive("race", "African-American", "Other"),
      target("two_year_recid", "1", "0"),
  };
  return out;
}

PreparedTable prepare_default(const std::string& bytes) {
  CsvTable raw = parse_csv(bytes);
  // The UCI spreadsheet export carries an extra X1..X23,Y row above the names.
  if (raw.header.size() > 1 && raw.header[1] == "X1" && !raw.rows.empty()) {
    raw.header = raw.rows.front();
    raw.rows.erase(raw.rows.begin());
  }
  std::string target_column;
  for (const char* name : {"default payment next month", "default.payment.next.month"}) {
    if (raw.column(name)) target_column = name;
  }
  if (target_column.empty()) throw IngestionError("raw default file lacks the target column");

  std::vector<ColumnPick> picks;
  PreparedTable out;
  for (const char* name : {"LIMIT_BAL", "EDUCATION", "MARRIAGE", "AGE", "PAY_0", "PAY_2",
                           "PAY_3", "PAY_4", "PAY_5", "PAY_6", "BILL_AMT1", "BILL_AMT2",
                           "BILL_AMT3", "BILL_AMT4", "BILL_AMT5", "BILL_AMT6", "PAY_AMT1",
                           "PAY_AMT2", "PAY_AMT3", "PAY_AMT4", "PAY_AMT5", "PAY_AMT6"}) {
    picks.push_back({name, name});
    const std::string_view n(name);
    out.schema.columns.push_back(n == "EDUCATION" || n == "MARRIAGE" ? categorical(name)
                                                                      : numeric(name));
  }
  picks.push_back({"SEX", "SEX"});
  picks.push_back({target_column, "default"});
  out.table = select_columns(raw, picks, "default");
  // SEX: 1 = male, 2 = female; female is the larger group.
  out.schema.columns.push_back(sensitive("SEX", "2", "1"));
  out.schema.columns.push_back(target("default", "1", "0"));
  return out;
}

PreparedTable prepare_bank(const std::string& bytes) {
  CsvOptions options;
  options.delimiter = ';';
  const CsvTable raw = parse_csv(bytes, options);
  PreparedTable out;
  std::vector<ColumnPick> picks;
  for (const char* name : {"job", "marital", "education", "default", "balance", "housing", "loan",
                           "contact", "day", "month", "duration", "campaign", "pdays", "previous",
                           "poutcome"}) {
    picks.push_back({name, name});
    const std::string_view n(name);
    const bool is_numeric = n == "balance" || n == "day" || n == "duration" || n == "campaign" ||
                            n == "pdays" || n == "previous";
    out.schema.columns.push_back(is_numeric ? numeric(name) : categorical(name));
  }
  picks.push_back({"age", "age_group"});
  picks.push_back({"y", "y"});
  out.table = select_columns(raw, picks, "bank");
  const auto group = *out.table.column("age_group");
  for (std::size_t r = 0; r < out.table.rows.size(); ++r) {
    auto& cell = out.table.rows[r][group];
    const auto age = parse_real(cell);
    if (!age) {
      throw IngestionError("bank row " + std::to_string(r + 1) + " has a non-numeric age '" + cell + "'");
    }
    cell = (*age >= 33.0 && *age <= 60.0) ? "33-60" : "other";
  }
  out.schema.columns.push_back(sensitive("age_group", "33-60", "other"));
  out.schema.columns.push_back(target("y", "yes", "no"));
  return out;
}

}  // namespace

PreparedTable prepare_table(Benchmark which, const std::filesystem::path& raw_dir) {
  RawFile raw = read_raw(which, raw_dir);
  PreparedTable out;
  switch (which) {
    case Benchmark::kAdult: out = prepare_adult(raw.bytes); break;
    case Benchmark::kCompas: out = prepare_compas(raw.bytes); break;
    case Benchmark::kDefault: out = prepare_default(raw.bytes); break;
    case Benchmark::kBank: out = prepare_bank(raw.bytes); break;
  }
  fit_categories(out.table, out.schema);
  out.schema.validate();
  out.raw_file = raw.path;
  out.checksum_verified = raw.verified;
  return out;
}

PreparedFiles prepare_dataset(Benchmark which, const std::filesystem::path& raw_dir,
                              const std::filesystem::path& out_dir) {
  PreparedTable prepared = prepare_table(which, raw_dir);
  // Loading validates every cell before anything is written.
  const Dataset data = load_table(prepared.table, prepared.schema);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());

  PreparedFiles files;
  const std::string name(benchmark_name(which));
  files.csv = out_dir / (name + ".csv");
  files.schema = out_dir / (name + ".schema");
  std::string text = format_csv_row(prepared.table.header);
  for (const auto& row : prepared.table.rows) text += format_csv_row(row);
  write_text_file_atomic(files.csv, text);
  write_schema(prepared.schema, files.schema);
  files.n_rows = data.n_rows();
  files.checksum_verified = prepared.checksum_verified;
  return files;
}

Dataset load_benchmark(Benchmark which, const std::filesystem::path& raw_dir) {
  const PreparedTable prepared = prepare_table(which, raw_dir);
  return load_table(prepared.table, prepared.schema);
}

}  // namespace fairboost::bench
