#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fairboost/bench.hpp"
#include "fairboost/error.hpp"

namespace fairboost::bench {

namespace {

std::string optional_real(const std::optional<double>& v) {
  return v ? format_real(*v) : std::string(kUndefined);
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * fraction);
  return buf;
}

}  // namespace

DropReport accuracy_drop_report(const SweepResult& result, double di_target) {
  const SweepRow* vanilla = result.find(0.0);
  if (vanilla == nullptr) throw ContractError("sweep result has no mu = 0 row");
  DropReport report;
  report.di_target = di_target;
  report.vanilla_accuracy = vanilla->test.accuracy;
  report.vanilla_di = vanilla->test.disparate_impact;

  const auto qualifies = [&](const SweepRow& row) {
    return row.test.disparate_impact && *row.test.disparate_impact >= di_target;
  };
  if (qualifies(*vanilla)) {
    report.status = DropStatus::kVanillaQualifies;
    report.drop = 0.0;
    report.best_mu = 0.0;
    report.smallest_mu = 0.0;
    report.drop_at_smallest_mu = 0.0;
    return report;
  }
  for (const auto& row : result.rows) {
    if (!qualifies(row)) continue;
    if (!report.smallest_mu) {
      report.smallest_mu = row.mu;
      report.drop_at_smallest_mu = report.vanilla_accuracy - row.test.accuracy;
    }
    if (!report.best_mu || row.test.accuracy > report.vanilla_accuracy - *report.drop) {
      report.best_mu = row.mu;
      report.drop = report.vanilla_accuracy - row.test.accuracy;
    }
  }
  report.status = report.drop ? DropStatus::kAchieved : DropStatus::kUnachieved;
  return report;
}

std::string DropReport::to_text() const {
  std::string out = "di_target=" + format_real(di_target) + "\n";
  switch (status) {
    case DropStatus::kVanillaQualifies: out += "status=vanilla_qualifies\n"; break;
    case DropStatus::kAchieved: out += "status=achieved\n"; break;
    case DropStatus::kUnachieved: out += "status=unachieved\n"; break;
  }
  out += "vanilla_accuracy=" + format_real(vanilla_accuracy) + "\n";
  out += "vanilla_di=" + optional_real(vanilla_di) + "\n";
  out += "drop=" + (drop ? format_real(*drop) : std::string("unachieved")) + "\n";
  out += "drop_percent=" + (drop ? percent(*drop) : std::string("unachieved")) + "\n";
  out += "best_mu=" + (best_mu ? format_real(*best_mu) : std::string("none")) + "\n";
  out += "smallest_mu=" + (smallest_mu ? format_real(*smallest_mu) : std::string("none")) + "\n";
  out += "drop_at_smallest_mu=" +
         (drop_at_smallest_mu ? format_real(*drop_at_smallest_mu) : std::string("unachieved")) +
         "\n";
  return out;
}

std::string format_curves_csv(const SweepResult& result) {
  std::string out = "mu,train_acc,test_acc,train_di,test_di\n";
  for (const auto& row : result.rows) {
    out += format_real(row.mu) + "," + format_real(row.train.accuracy) + "," +
           format_real(row.test.accuracy) + "," + optional_real(row.train.disparate_impact) + "," +
           optional_real(row.test.disparate_impact) + "\n";
  }
  return out;
}

std::string render_curves_svg(const SweepResult& result, double reference) {
  constexpr double kWidth = 640, kHeight = 400;
  constexpr double kLeft = 60, kRight = 20, kTop = 30, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double y_max = std::max(1.0, reference);
  for (const auto& row : result.rows) {
    for (const auto& di : {row.train.disparate_impact, row.test.disparate_impact}) {
      if (di && std::isfinite(*di)) y_max = std::max(y_max, *di);
    }
  }
  y_max = std::ceil(y_max * 10.0) / 10.0;
  double mu_min = 0.0, mu_max = 1.0;
  if (!result.rows.empty()) {
    mu_min = result.rows.front().mu;
    mu_max = result.rows.back().mu;
    if (mu_max <= mu_min) mu_max = mu_min + 1.0;
  }
  const auto px = [&](double mu) { return kLeft + (mu - mu_min) / (mu_max - mu_min) * plot_w; };
  const auto py = [&](double v) { return kTop + (1.0 - v / y_max) * plot_h; };
  const auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                    "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
                    num(kHeight) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" fill=\"white\"/>\n";
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line class=\"axis\" x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + plot_h) + "\" x2=\"" +
         num(kLeft + plot_w) + "\" y2=\"" + num(kTop + plot_h) + "\"/>\n";
  svg += "<line class=\"axis\" x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" +
         num(kLeft) + "\" y2=\"" + num(kTop + plot_h) + "\"/>\n";
  svg += "</g>\n";
  svg += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double mu = mu_min + (mu_max - mu_min) * k / 4.0;
    svg += "<text x=\"" + num(px(mu)) + "\" y=\"" + num(kTop + plot_h + 16) +
           "\" text-anchor=\"middle\">" + num(mu) + "</text>\n";
    const double v = y_max * k / 4.0;
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(v) + 4) +
           "\" text-anchor=\"end\">" + num(v) + "</text>\n";
  }
  svg += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(kHeight - 10) +
         "\" text-anchor=\"middle\">mu</text>\n";
  svg += "</g>\n";

  svg += "<line class=\"reference\" x1=\"" + num(kLeft) + "\" y1=\"" + num(py(reference)) +
         "\" x2=\"" + num(kLeft + plot_w) + "\" y2=\"" + num(py(reference)) +
         "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";

  struct Series {
    const char* name;
    const char* color;
    std::optional<double> (*value)(const SweepRow&);
  };
  const Series series[] = {
      {"train_di", "#1f77b4", [](const SweepRow& r) { return r.train.disparate_impact; }},
      {"test_di", "#ff7f0e", [](const SweepRow& r) { return r.test.disparate_impact; }},
      {"train_acc", "#2ca02c",
       [](const SweepRow& r) { return std::optional<double>(r.train.accuracy); }},
      {"test_acc", "#d62728",
       [](const SweepRow& r) { return std::optional<double>(r.test.accuracy); }},
  };
  int legend = 0;
  for (const auto& s : series) {
    std::string points;
    for (const auto& row : result.rows) {
      const auto v = s.value(row);
      if (!v || !std::isfinite(*v)) continue;
      if (!points.empty()) points += " ";
      points += num(px(row.mu)) + "," + num(py(*v));
    }
    svg += "<polyline class=\"" + std::string(s.name) + "\" fill=\"none\" stroke=\"" + s.color +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    svg += "<text x=\"" + num(kLeft + 10 + 120 * legend) + "\" y=\"" + num(kTop - 10) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + s.color + "\">" + s.name +
           "</text>\n";
    ++legend;
  }
  svg += "</svg>\n";
  return svg;
}

void emit_curves(const SweepResult& result, const std::filesystem::path& out_dir,
                 double reference) {
  if (result.rows.empty()) throw ContractError("cannot emit curves for an empty sweep");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw IoError("cannot create output directory " + out_dir.string());
  }
  const std::string csv = format_curves_csv(result);
  const std::string svg = render_curves_svg(result, reference);
  write_text_file_atomic(out_dir / "curves.csv", csv);
  write_text_file_atomic(out_dir / "curves.svg", svg);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("kendall_tau inputs differ in length");
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[j] - x[i];
      const double dy = y[j] - y[i];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++ties_x;
      } else if (dy == 0) {
        ++ties_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double n1 = static_cast<double>(concordant + discordant + ties_y);
  const double n2 = static_cast<double>(concordant + discordant + ties_x);
  if (n1 == 0 || n2 == 0) return 0.0;
  return static_cast<double>(concordant - discordant) / std::sqrt(n1 * n2);
}

double mu_di_trend(const SweepResult& result) {
  std::vector<double> mu, di;
  for (const auto& row : result.rows) {
    if (!row.test.disparate_impact) continue;
    mu.push_back(row.mu);
    di.push_back(*row.test.disparate_impact);
  }
  return kendall_tau(mu, di);
}

std::string format_sweep_table(const SweepResult& result) {
  std::string out = "    mu  train_acc  test_acc   train_di    test_di  depth  rounds     eta\n";
  for (const auto& row : result.rows) {
    const auto di = [](const std::optional<double>& v) {
      char buf[32];
      if (v) {
        std::snprintf(buf, sizeof buf, "%9.4f", *v);
      } else {
        std::snprintf(buf, sizeof buf, "%9s", "undefined");
      }
      return std::string(buf);
    };
    char buf[160];
    std::snprintf(buf, sizeof buf, "%6.2f  %9.4f  %8.4f  %s  %s  %5d  %6d  %6.3f\n", row.mu,
                  row.train.accuracy, row.test.accuracy, di(row.train.disparate_impact).c_str(),
                  di(row.test.disparate_impact).c_str(), row.max_depth, row.num_rounds,
                  row.learning_rate);
    out += buf;
  }
  return out;
}

}  // namespace fairboost::bench
