#include <doctest.h>

#include <algorithm>
#include <random>

#include "fairboost/error.hpp"
#include "fairboost/metrics.hpp"
#include "support.hpp"

using namespace fairboost;

namespace {

BinaryVector vec(std::initializer_list<int> values) {
  BinaryVector out(static_cast<Index>(values.size()));
  Index i = 0;
  for (int v : values) out(i++) = v;
  return out;
}

BoosterModel constant_model(double raw, std::vector<std::string> names) {
  BoosterModel model;
  model.params.learning_rate = 1.0;
  model.params.base_score_raw = raw;
  model.feature_names = std::move(names);
  return model;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("binarize is inclusive at the threshold") {
    Eigen::VectorXd p(3);
    p << 0.4, 0.5, 0.6;
    CHECK(binarize(p, 0.5) == vec({0, 1, 1}));
    CHECK(binarize(p, 0.9) == vec({0, 0, 0}));
    CHECK_THROWS_AS(binarize(p, 0.0), ParameterError);
    CHECK_THROWS_AS(binarize(p, 1.0), ParameterError);
  }

  TEST_CASE("accuracy") {
    CHECK(accuracy(vec({1, 0, 1}), vec({1, 0, 1})) == 1.0);
    CHECK(accuracy(vec({1, 0, 1}), vec({0, 1, 0})) == 0.0);
    CHECK(accuracy(vec({1, 0, 1, 1}), vec({1, 1, 1, 0})) == 0.5);
    CHECK_THROWS_AS(accuracy(BinaryVector(0), BinaryVector(0)), ContractError);
    CHECK_THROWS_AS(accuracy(vec({1}), vec({1, 0})), ContractError);
  }

  TEST_CASE("disparate impact by counting") {
    // Minority [1, 1, 0], majority [1, 1, 1, 0].
    const auto di = disparate_impact(vec({1, 1, 0, 1, 1, 1, 0}), vec({0, 0, 0, 1, 1, 1, 1}));
    REQUIRE(di.ratio);
    CHECK(*di.ratio == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
    CHECK(di.n_minority == 3);
    CHECK(di.n_majority == 4);

    const auto equal = disparate_impact(vec({1, 0, 1, 0}), vec({0, 0, 1, 1}));
    CHECK(equal.ratio == 1.0);

    const auto undefined = disparate_impact(vec({1, 0, 0, 0}), vec({0, 0, 1, 1}));
    CHECK_FALSE(undefined.ratio);
    CHECK_THROWS_AS(disparate_impact(vec({1, 0}), vec({1, 1})), ValidationError);
    CHECK_THROWS_AS(disparate_impact(vec({1, 0}), vec({1})), ContractError);
  }

  TEST_CASE("constant classifiers") {
    std::mt19937_64 rng(3);
    const auto data = fbtest::random_dataset(rng, 50, 2);
    const auto positive = evaluate(constant_model(10.0, data.feature_names()), data);
    CHECK(positive.disparate_impact == 1.0);
    CHECK(positive.accuracy == doctest::Approx(data.labels().cast<double>().mean()));
    const auto negative = evaluate(constant_model(-10.0, data.feature_names()), data);
    CHECK_FALSE(negative.disparate_impact);
    CHECK(negative.to_csv_row().find("undefined") != std::string::npos);
    CHECK(negative.n_minority + negative.n_majority == 50);
    CHECK_THROWS_AS(evaluate(constant_model(0.0, {"other", "names"}), data), SchemaError);
  }

  TEST_CASE("evaluate composes predict, binarize, accuracy and DI") {
    const auto data = fbtest::synthetic_dataset(200, 5);
    BoosterParams params;
    params.num_rounds = 5;
    const auto model = train(data, params).model;
    const auto report = evaluate(model, data, 0.4);
    const auto predictions = binarize(predict_proba(model, data.features()), 0.4);
    const auto di = disparate_impact(predictions, data.sensitive());
    CHECK(report.threshold == 0.4);
    CHECK(report.accuracy == accuracy(predictions, data.labels()));
    CHECK(report.disparate_impact == di.ratio);
    CHECK(report.pos_rate_minority == di.pos_rate_minority);
    CHECK(report.pos_rate_majority == di.pos_rate_majority);
  }

  TEST_CASE("report serialization column order") {
    FairnessReport r;
    r.accuracy = 0.75;
    r.pos_rate_minority = 0.2;
    r.pos_rate_majority = 0.4;
    r.disparate_impact = 0.5;
    r.n_minority = 10;
    r.n_majority = 30;
    CHECK(FairnessReport::csv_header() ==
          "threshold,accuracy,pos_rate_minority,pos_rate_majority,di,n_minority,n_majority");
    CHECK(r.to_csv_row() == "0.5,0.75,0.2,0.4,0.5,10,30");
    CHECK(r.to_key_value() ==
          "threshold=0.5\naccuracy=0.75\npos_rate_minority=0.2\npos_rate_majority=0.4\ndi=0.5\n"
          "n_minority=10\nn_majority=30\n");
  }

  TEST_CASE("metric identities over random fixtures") {
    std::mt19937_64 rng(31);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> size(2, 40);
    for (int trial = 0; trial < 500; ++trial) {
      const Index n = size(rng);
      BinaryVector pred(n), y(n), s(n);
      for (Index i = 0; i < n; ++i) {
        pred(i) = coin(rng);
        y(i) = coin(rng);
        s(i) = coin(rng);
      }
      s(0) = 0;
      s(n - 1) = 1;
      const auto base = make_report(pred, y, s, 0.5);

      // Permutation equivariance.
      std::vector<Index> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), Index{0});
      std::shuffle(order.begin(), order.end(), rng);
      BinaryVector pp(n), py(n), ps(n);
      for (Index i = 0; i < n; ++i) {
        pp(i) = pred(order[static_cast<std::size_t>(i)]);
        py(i) = y(order[static_cast<std::size_t>(i)]);
        ps(i) = s(order[static_cast<std::size_t>(i)]);
      }
      const auto permuted = make_report(pp, py, ps, 0.5);
      CHECK(permuted.accuracy == base.accuracy);
      CHECK(permuted.disparate_impact == base.disparate_impact);
      CHECK(permuted.pos_rate_minority == base.pos_rate_minority);

      // Group swap inverts DI when both rates are positive.
      const BinaryVector swapped = (1 - s.array()).matrix();
      const auto flipped = disparate_impact(pred, swapped);
      if (base.pos_rate_minority > 0 && base.pos_rate_majority > 0) {
        REQUIRE(flipped.ratio);
        CHECK(*flipped.ratio * *base.disparate_impact == doctest::Approx(1.0).epsilon(1e-12));
      }

      // Constant-positive classifier and perfect classifier.
      CHECK(disparate_impact(BinaryVector::Ones(n), s).ratio == 1.0);
      CHECK(accuracy(y, y) == 1.0);
    }
  }
}
