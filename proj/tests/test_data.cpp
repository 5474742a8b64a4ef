#include <doctest.h>

#include <random>
#include <set>

#include "fairboost/csv.hpp"
#include "fairboost/data.hpp"
#include "fairboost/error.hpp"
#include "support.hpp"

using namespace fairboost;

namespace {

const char* kSchemaText =
    "column=age role=feature kind=numeric\n"
    "column=y role=target positive=yes negative=no\n"
    "column=sex role=sensitive majority=M minority=F\n";

ColumnSchema simple_schema() { return parse_schema(kSchemaText); }

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("csv") {
  TEST_CASE("quoted cells, BOM and CRLF") {
    const auto table = parse_csv("\xEF\xBB\xBF" "a,b\r\n\"x, y\",\"he said \"\"hi\"\"\"\r\n1,\"multi\nline\"\n");
    REQUIRE(table.header == std::vector<std::string>{"a", "b"});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0][0] == "x, y");
    CHECK(table.rows[0][1] == "he said \"hi\"");
    CHECK(table.rows[1][1] == "multi\nline");
  }

  TEST_CASE("ragged rows are data errors naming the line") {
    const auto message = error_of([] { parse_csv("a,b\n1,2\n3\n"); });
    CHECK(message.find("line 3") != std::string::npos);
    CHECK_THROWS_AS(parse_csv("a,b\n1,2\n3\n"), DataError);
  }

  TEST_CASE("headerless mode and custom delimiter") {
    CsvOptions options;
    options.has_header = false;
    options.delimiter = ';';
    options.trim = true;
    const auto table = parse_csv("1 ; 2\n3;4\n", options);
    CHECK(table.header == std::vector<std::string>{"c0", "c1"});
    CHECK(table.rows[0][1] == "2");
  }

  TEST_CASE("row formatting quotes only when needed") {
    CHECK(format_csv_row({"a", "b,c", "d\"e"}) == "a,\"b,c\",\"d\"\"e\"\n");
    const auto back = parse_csv("h1,h2,h3\n" + format_csv_row({"a", "b,c", "d\"e"}));
    CHECK(back.rows[0] == std::vector<std::string>{"a", "b,c", "d\"e"});
  }

  TEST_CASE("real formatting round trips") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
      const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
      CHECK(parse_real(format_real(v)) == v);
    }
    CHECK(format_real(0.1) == "0.1");
    CHECK_FALSE(parse_real("1.5x"));
    CHECK_FALSE(parse_real(""));
    CHECK(parse_real("+2") == 2.0);
    CHECK(parse_integer("-12") == -12);
    CHECK_FALSE(parse_integer("1.0"));
  }

  TEST_CASE("atomic write leaves no temporary file") {
    const auto dir = fbtest::temp_dir("csv_atomic");
    write_text_file_atomic(dir / "out.txt", "hello\n");
    CHECK(read_text_file(dir / "out.txt") == "hello\n");
    int files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      (void)entry;
      ++files;
    }
    CHECK(files == 1);
    CHECK_THROWS_AS(write_text_file_atomic(dir / "missing" / "x.txt", "x"), IoError);
  }
}

TEST_SUITE("data") {
  TEST_CASE("three-row CSV maps target and sensitive") {
    const auto data = load_csv_text("age,y,sex\n30,yes,M\n40,no,F\n50,yes,M\n", simple_schema());
    CHECK(data.n_rows() == 3);
    CHECK(data.n_cols() == 1);
    CHECK(data.labels() == (BinaryVector(3) << 1, 0, 1).finished());
    CHECK(data.sensitive() == (BinaryVector(3) << 1, 0, 1).finished());
    CHECK(data.features()(1, 0) == 40.0);
  }

  TEST_CASE("NaN and unparseable cells are data errors naming row and column") {
    const auto nan_msg =
        error_of([] { load_csv_text("age,y,sex\n30,yes,M\nNaN,no,F\n", simple_schema()); });
    CHECK(nan_msg.find("row 2") != std::string::npos);
    CHECK(nan_msg.find("'age'") != std::string::npos);
    CHECK_THROWS_AS(load_csv_text("age,y,sex\n30,yes,M\nNaN,no,F\n", simple_schema()), DataError);
    CHECK_THROWS_AS(load_csv_text("age,y,sex\nold,yes,M\n3,no,F\n", simple_schema()), DataError);
    CHECK_THROWS_AS(load_csv_text("age,y,sex\n1,maybe,M\n3,no,F\n", simple_schema()), DataError);
  }

  TEST_CASE("missing and undeclared columns are schema errors") {
    CHECK_THROWS_AS(load_csv_text("age,y\n1,yes\n", simple_schema()), SchemaError);
    CHECK_THROWS_AS(load_csv_text("age,y,sex,extra\n1,yes,M,3\n2,no,F,4\n", simple_schema()),
                    SchemaError);
  }

  TEST_CASE("a single sensitive group is a validation error") {
    CHECK_THROWS_AS(load_csv_text("age,y,sex\n1,yes,M\n2,no,M\n", simple_schema()),
                    ValidationError);
  }

  TEST_CASE("dataset invariants") {
    Eigen::MatrixXd x(2, 1);
    x << 1, 2;
    BinaryVector y(2), s(2);
    y << 0, 1;
    s << 0, 1;
    CHECK_NOTHROW(Dataset(x, y, s, {"a"}));
    CHECK_THROWS_AS(Dataset(x, y, s, {"a", "b"}), ValidationError);
    BinaryVector bad(2);
    bad << 0, 2;
    CHECK_THROWS_AS(Dataset(x, bad, s, {"a"}), ValidationError);
    Eigen::MatrixXd inf = x;
    inf(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(Dataset(inf, y, s, {"a"}), ValidationError);
    Eigen::MatrixXd two(2, 2);
    two.setZero();
    CHECK_THROWS_AS(Dataset(two, y, s, {"a", "a"}), ValidationError);
  }

  TEST_CASE("one-hot encoding has exactly one 1 per source column") {
    const auto schema = parse_schema(
        "column=color role=feature kind=categorical\n"
        "column=size role=feature kind=numeric\n"
        "column=y role=target positive=1\n"
        "column=g role=sensitive majority=a\n");
    ColumnSchema fitted;
    const auto data = load_csv_text(
        "color,size,y,g\nred,1,1,a\nblue,2,0,b\ngreen,3,1,a\nred,4,0,b\n", schema, &fitted);
    CHECK(data.feature_names() ==
          std::vector<std::string>{"color=blue", "color=green", "color=red", "size"});
    for (Index i = 0; i < data.n_rows(); ++i) {
      CHECK(data.features().row(i).head(3).sum() == 1.0);
    }
    CHECK(fitted.find("color")->categories == std::vector<std::string>{"blue", "green", "red"});
    // A fitted schema rejects unseen categories.
    CHECK_THROWS_AS(load_csv_text("color,size,y,g\npink,1,1,a\nred,1,0,b\n", fitted), DataError);
  }

  TEST_CASE("sensitive column can double as a feature") {
    const auto schema = parse_schema(
        "column=age role=feature kind=numeric\n"
        "column=y role=target positive=yes\n"
        "column=sex role=sensitive majority=M minority=F feature=yes\n");
    const auto data = load_csv_text("age,y,sex\n30,yes,M\n40,no,F\n", schema);
    CHECK(data.feature_names() == std::vector<std::string>{"age", "sex"});
    CHECK(data.features()(0, 1) == 1.0);
    CHECK(data.features()(1, 1) == 0.0);
    CHECK(parse_schema(format_schema(schema)) == schema);
    CHECK_THROWS_AS(parse_schema("column=a role=feature feature=yes\n"
                                 "column=y role=target\ncolumn=s role=sensitive\n"),
                    SchemaError);
  }

  TEST_CASE("schema text round trip with escapes") {
    ColumnSchema schema;
    schema.columns.push_back({"odd name", ColumnRole::kFeature, ColumnKind::kCategorical, "1", {},
                              {"a|b", "c=d", "50%", "#x", " sp"}});
    schema.columns.push_back({"y", ColumnRole::kTarget, ColumnKind::kNumeric, ">50K", "<=50K", {}});
    schema.columns.push_back({"s", ColumnRole::kSensitive, ColumnKind::kNumeric, "Male", {}, {}});
    schema.columns.push_back({"drop me", ColumnRole::kDrop, ColumnKind::kNumeric, "1", {}, {}});
    CHECK(parse_schema(format_schema(schema)) == schema);
  }

  TEST_CASE("schema validation") {
    CHECK_THROWS_AS(parse_schema("column=a role=feature\ncolumn=s role=sensitive\n"), SchemaError);
    CHECK_THROWS_AS(parse_schema("column=y role=target\ncolumn=y role=sensitive\n"), SchemaError);
    CHECK_THROWS_AS(parse_schema("column=y role=boss\n"), SchemaError);
    CHECK_THROWS_AS(parse_schema("column=y role=target\ncolumn=s role=sensitive bogus=1\n"),
                    SchemaError);
  }

  TEST_CASE("CSV round trip is bit exact") {
    std::mt19937_64 rng(4);
    const auto data = fbtest::random_dataset(rng, 100, 5);
    const auto back = load_csv_text(format_csv(data), encoded_schema(data));
    CHECK(back.features() == data.features());
    CHECK(back.labels() == data.labels());
    CHECK(back.sensitive() == data.sensitive());
    CHECK(back.feature_names() == data.feature_names());
  }

  TEST_CASE("split sizes, disjointness and determinism") {
    auto [train, test] = split_indices(10, 0.3, 7);
    CHECK(train.size() == 7);
    CHECK(test.size() == 3);
    std::set<Index> all(train.begin(), train.end());
    all.insert(test.begin(), test.end());
    CHECK(all.size() == 10);
    CHECK(split_indices(10, 0.3, 7) == std::make_pair(train, test));

    auto [t2, s2] = split_indices(2, 0.9, 1);
    CHECK(t2.size() == 1);
    CHECK(s2.size() == 1);
    auto [t3, s3] = split_indices(5, 0.01, 1);
    CHECK(s3.size() == 1);
    CHECK_THROWS_AS(split_indices(1, 0.5, 1), ParameterError);
    CHECK_THROWS_AS(split_indices(10, 0.0, 1), ParameterError);
    CHECK_THROWS_AS(split_indices(10, 1.0, 1), ParameterError);
  }

  TEST_CASE("different seeds give different partitions") {
    std::set<std::vector<Index>> seen;
    for (std::uint64_t seed = 0; seed < 100; ++seed) seen.insert(split_indices(1000, 0.3, seed).second);
    CHECK(seen.size() == 100);
  }

  TEST_CASE("train_test_split keeps rows aligned") {
    std::mt19937_64 rng(8);
    const auto data = fbtest::random_dataset(rng, 200, 3);
    const auto [train, test] = train_test_split(data, 0.25, 3);
    const auto [ti, si] = split_indices(200, 0.25, 3);
    CHECK(test.n_rows() == 50);
    for (std::size_t k = 0; k < si.size(); ++k) {
      CHECK(test.features().row(static_cast<Index>(k)) == data.features().row(si[k]));
      CHECK(test.labels()(static_cast<Index>(k)) == data.labels()(si[k]));
    }
  }
}
