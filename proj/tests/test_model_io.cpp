#include <doctest.h>

#include <random>

#include "fairboost/booster.hpp"
#include "fairboost/error.hpp"
#include "support.hpp"

using namespace fairboost;

namespace {

std::string fixture_text() {
  return "fairboost-model v1\n"
         "objective=fair_logistic\n"
         "mu=0.5\n"
         "num_rounds=1\n"
         "learning_rate=1\n"
         "base_score_raw=0\n"
         "max_depth=1\n"
         "lambda=1\n"
         "gamma=0\n"
         "min_child_weight=0.001\n"
         "min_split_gain=0\n"
         "num_features=1\n"
         "feature.0=x\n"
         "num_trees=1\n"
         "tree 0\n"
         "node 0 split 0 2.5 1 2\n"
         "leaf 1 1.3333333333333333\n"
         "leaf 2 -1.3333333333333333\n"
         "end\n";
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_SUITE("model_io") {
  TEST_CASE("fixture parses and predicts") {
    const auto model = parse_model(fixture_text());
    CHECK(model.params.objective == ObjectiveConfig::fair(0.5));
    CHECK(model.feature_names == std::vector<std::string>{"x"});
    Eigen::MatrixXd rows(2, 1);
    rows << 1.0, 2.5;
    const auto raw = predict_raw(model, rows);
    CHECK(raw(0) == doctest::Approx(4.0 / 3.0));
    CHECK(raw(1) == doctest::Approx(-4.0 / 3.0));
    CHECK(format_model(model) == fixture_text());
  }

  TEST_CASE("random models reload with bit-identical predictions") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> mu(0.0, 0.9), eta(0.05, 1.0);
    std::uniform_int_distribution<int> depth(0, 4), rounds(1, 6);
    const auto dir = fbtest::temp_dir("model_io");
    for (int trial = 0; trial < 50; ++trial) {
      const auto data = fbtest::random_dataset(rng, 80, 3, 12);
      BoosterParams params;
      params.num_rounds = rounds(rng);
      params.learning_rate = eta(rng);
      params.tree.max_depth = depth(rng);
      params.base_score_raw = mu(rng) - 0.4;
      params.objective = ObjectiveConfig::fair(mu(rng));
      const auto model = train(data, params).model;
      const auto path = dir / "m.fb";
      save_model(model, path);
      const auto back = load_model(path);
      CHECK(back.params == model.params);
      CHECK(back.trees == model.trees);
      const Eigen::MatrixXd rows = Eigen::MatrixXd::Random(100, 3) * 3.0;
      CHECK(predict_raw(back, rows) == predict_raw(model, rows));
    }
  }

  TEST_CASE("feature names with odd characters survive") {
    BoosterModel model;
    model.feature_names = {"a b", "100%", "line\nbreak", "c=d"};
    const auto back = parse_model(format_model(model));
    CHECK(back.feature_names == model.feature_names);
  }

  TEST_CASE("version mismatch") {
    CHECK_THROWS_AS(parse_model(replace(fixture_text(), "v1", "v2")), VersionError);
    CHECK_THROWS_AS(parse_model("not a model\n"), ParseError);
  }

  TEST_CASE("truncation reports a byte offset") {
    const std::string text = fixture_text();
    for (std::size_t cut : {text.size() - 1, text.size() - 5, text.size() / 2, std::size_t{30}}) {
      try {
        parse_model(text.substr(0, cut));
        FAIL("truncated model parsed");
      } catch (const ParseError& e) {
        CHECK(e.byte_offset() <= cut);
        CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
      }
    }
  }

  TEST_CASE("malformed nodes and dangling references") {
    CHECK_THROWS_AS(parse_model(replace(fixture_text(), "split 0 2.5 1 2", "split 3 2.5 1 2")),
                    MalformedNodeError);
    CHECK_THROWS_AS(parse_model(replace(fixture_text(), "split 0 2.5 1 2", "split 0 2.5 1 7")),
                    DanglingReferenceError);
    CHECK_THROWS_AS(parse_model(replace(fixture_text(), "split 0 2.5 1 2", "split 0 2.5 1 -4")),
                    DanglingReferenceError);
    CHECK_THROWS_AS(parse_model(replace(fixture_text(), "split 0 2.5 1 2", "split 0 2.5 1 1")),
                    MalformedNodeError);
    CHECK_THROWS_AS(parse_model(replace(fixture_text(), "leaf 1 1.3333333333333333", "leaf 1 abc")),
                    MalformedNodeError);
  }

  TEST_CASE("unknown and duplicate keys") {
    CHECK_THROWS_AS(parse_model(replace(fixture_text(), "gamma=0\n", "gamma=0\ncolor=blue\n")),
                    ParseError);
    CHECK_THROWS_AS(parse_model(replace(fixture_text(), "gamma=0\n", "gamma=0\ngamma=1\n")),
                    ParseError);
  }

  TEST_CASE("load_model of a missing file is an I/O error") {
    CHECK_THROWS_AS(load_model("/nonexistent/dir/model.fb"), IoError);
  }
}
