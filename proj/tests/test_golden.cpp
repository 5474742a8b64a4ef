#include <doctest.h>

#include <filesystem>

#include "fairboost/booster.hpp"
#include "fairboost/csv.hpp"
#include "fairboost/data.hpp"

using namespace fairboost;

// Predictions frozen from tests/reference/reference_booster.py.
TEST_SUITE("golden") {
  TEST_CASE("matches the independent reference booster") {
    const std::filesystem::path dir = FAIRBOOST_GOLDEN_DIR;
    const auto schema = parse_schema(
        "column=a role=feature kind=numeric\n"
        "column=b role=feature kind=numeric\n"
        "column=c role=feature kind=numeric\n"
        "column=y role=target positive=1 negative=0\n"
        "column=s role=sensitive majority=1 minority=0\n");
    const auto data = load_csv(dir / "golden_data.csv", schema);
    const auto expected = parse_csv(read_text_file(dir / "golden_raw.csv"));
    REQUIRE(static_cast<Index>(expected.rows.size()) == data.n_rows());

    BoosterParams params;
    params.objective = ObjectiveConfig::fair(0.4);
    params.tree.max_depth = 3;
    params.num_rounds = 10;
    params.learning_rate = 0.3;
    const auto raw = predict_raw(train(data, params).model, data.features());
    double worst = 0.0;
    for (Index i = 0; i < data.n_rows(); ++i) {
      const double want = *parse_real(expected.rows[static_cast<std::size_t>(i)][0]);
      worst = std::max(worst, std::abs(raw(i) - want));
    }
    CHECK(worst <= 1e-6);
  }
}
