#include <doctest.h>

#include <cmath>
#include <random>

#include "fairboost/booster.hpp"
#include "fairboost/error.hpp"
#include "support.hpp"

using namespace fairboost;

namespace {

BoosterModel fixture_model() {
  BoosterModel model;
  model.params.learning_rate = 1.0;
  model.feature_names = {"x"};
  model.trees.push_back(Tree::from_nodes({TreeNode::make_split(0, 2.5, 1, 2),
                                          TreeNode::make_leaf(4.0 / 3.0),
                                          TreeNode::make_leaf(-4.0 / 3.0)}));
  return model;
}

}  // namespace

TEST_SUITE("booster") {
  TEST_CASE("balanced labels give a zero first leaf") {
    Eigen::MatrixXd x(4, 1);
    x << 1, 2, 3, 4;
    BinaryVector y(4), s(4);
    y << 1, 0, 1, 0;
    s << 0, 1, 0, 1;
    const Dataset data(x, y, s, {"x"});
    BoosterParams params;
    params.num_rounds = 1;
    params.learning_rate = 1.0;
    params.tree.max_depth = 0;
    params.tree.lambda = 0.0;
    const auto result = train(data, params);
    REQUIRE(result.model.trees.size() == 1);
    CHECK(result.model.trees[0].nodes()[0].weight == 0.0);
    CHECK(result.log.rounds.size() == 1);
  }

  TEST_CASE("prediction arithmetic") {
    BoosterModel empty;
    empty.params.base_score_raw = 0.25;
    empty.feature_names = {"a", "b"};
    const Eigen::MatrixXd rows = Eigen::MatrixXd::Random(5, 2);
    CHECK((predict_raw(empty, rows).array() == 0.25).all());

    BoosterModel one = empty;
    one.params.learning_rate = 0.3;
    one.params.base_score_raw = 0.0;
    one.trees.push_back(Tree::single_leaf(1.0));
    CHECK((predict_raw(one, rows).array() == 0.3).all());

    Eigen::MatrixXd r(1, 1);
    r << 1.0;
    CHECK(predict_raw(fixture_model(), r)(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(predict_raw(fixture_model(), rows), ContractError);
  }

  TEST_CASE("predict_proba is the sigmoid of the raw score") {
    BoosterModel model;
    model.feature_names = {"a"};
    model.params.learning_rate = 1.0;
    model.trees.push_back(Tree::single_leaf(std::log(3.0)));
    Eigen::MatrixXd rows(1, 1);
    rows << 0.0;
    CHECK(predict_proba(model, rows)(0) == doctest::Approx(0.75).epsilon(1e-15));
    model.trees.clear();
    CHECK(predict_proba(model, rows)(0) == 0.5);
  }

  TEST_CASE("additivity and prefix property") {
    const auto data = fbtest::synthetic_dataset(300, 3);
    BoosterParams params;
    params.num_rounds = 12;
    params.tree.max_depth = 3;
    params.learning_rate = 0.2;
    params.objective = ObjectiveConfig::fair(0.4);
    const auto model = train(data, params).model;
    for (std::size_t k = 1; k <= model.trees.size(); ++k) {
      const Eigen::VectorXd prefix = predict_raw(model.prefix(k - 1), data.features());
      const Eigen::VectorXd full = predict_raw(model.prefix(k), data.features());
      for (Index i = 0; i < data.n_rows(); ++i) {
        CHECK(full(i) ==
              prefix(i) + params.learning_rate * predict_tree(model.trees[k - 1], data.features().row(i)));
      }
    }
    BoosterParams shorter = params;
    shorter.num_rounds = 5;
    const auto fresh = train(data, shorter).model;
    CHECK(predict_raw(fresh, data.features()) == predict_raw(model.prefix(5), data.features()));
    CHECK(fresh.trees == model.prefix(5).trees);
  }

  TEST_CASE("training is deterministic") {
    const auto data = fbtest::synthetic_dataset(250, 4);
    BoosterParams params;
    params.num_rounds = 8;
    params.objective = ObjectiveConfig::fair(0.5);
    const auto a = train(data, params);
    const auto b = train(data, params);
    CHECK(a.model.trees == b.model.trees);
    CHECK(a.log.to_csv() == b.log.to_csv());
  }

  TEST_CASE("mu = 0 fair training equals vanilla bitwise") {
    const auto data = fbtest::synthetic_dataset(500, 1);
    BoosterParams params;
    params.num_rounds = 20;
    params.tree.max_depth = 3;
    const auto vanilla = train(data, params).model;
    params.objective = ObjectiveConfig::fair(0.0);
    const auto fair = train(data, params).model;
    CHECK(vanilla.trees == fair.trees);
    CHECK(predict_raw(vanilla, data.features()) == predict_raw(fair, data.features()));
  }

  TEST_CASE("parameter validation") {
    BoosterParams params;
    params.objective = ObjectiveConfig::fair(1.0);
    params.tree.lambda = 0.0;
    CHECK_THROWS_AS(params.validate(), ParameterError);
    params.tree.lambda = 1.0;
    CHECK_NOTHROW(params.validate());
    params.num_rounds = 0;
    CHECK_THROWS_AS(params.validate(), ParameterError);
    params.num_rounds = 1;
    params.learning_rate = 1.5;
    CHECK_THROWS_AS(params.validate(), ParameterError);
    params.learning_rate = 0.0;
    CHECK_THROWS_AS(params.validate(), ParameterError);
  }

  TEST_CASE("mu = 1 trains under the lambda guard") {
    const auto data = fbtest::synthetic_dataset(100, 2);
    BoosterParams params;
    params.num_rounds = 3;
    params.objective = ObjectiveConfig::fair(1.0);
    const auto result = train(data, params);
    for (const auto& tree : result.model.trees) {
      for (const auto& node : tree.nodes()) CHECK(std::isfinite(node.weight));
    }
  }

  TEST_CASE("train log columns and loss trend at small eta") {
    const auto data = fbtest::synthetic_dataset(400, 6);
    BoosterParams params;
    params.num_rounds = 15;
    params.learning_rate = 0.1;
    const auto result = train(data, params);
    CHECK(result.log.rounds.size() == 15);
    CHECK(result.log.to_csv().rfind("round,loss,accuracy,di\n", 0) == 0);
    CHECK_FALSE(first_loss_increase(result.log));
    TrainLog rising;
    rising.rounds = {{1, 2.0, 0.5, {}}, {2, 1.0, 0.5, {}}, {3, 1.5, 0.5, {}}};
    const auto inc = first_loss_increase(rising);
    REQUIRE(inc);
    CHECK(inc->round == 3);
    CHECK(inc->delta == 0.5);
  }
}
