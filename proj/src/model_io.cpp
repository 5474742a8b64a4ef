#include <climits>
#include <cmath>
#include <cstdint>
#include <map>

#include "fairboost/booster.hpp"
#include "fairboost/csv.hpp"
#include "fairboost/error.hpp"

namespace fairboost {

namespace {

std::string escape_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == '%') {
      out += "%25";
    } else if (c == '\n') {
      out += "%0A";
    } else if (c == '\r') {
      out += "%0D";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string unescape_name(std::string_view name) {
  std::string out;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (name[i] == '%' && i + 2 < name.size()) {
      const auto code = name.substr(i + 1, 2);
      if (code == "25") {
        out.push_back('%');
      } else if (code == "0A") {
        out.push_back('\n');
      } else if (code == "0D") {
        out.push_back('\r');
      } else {
        out.push_back('%');
        continue;
      }
      i += 2;
    } else {
      out.push_back(name[i]);
    }
  }
  return out;
}

struct Line {
  std::string_view text;
  std::size_t offset = 0;
};

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const auto start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

class ModelParser {
 public:
  explicit ModelParser(std::string_view text) : text_(text) {}

  BoosterModel parse() {
    split_lines();
    check_header();
    check_terminated();
    BoosterModel model;
    parse_params(model);
    parse_trees(model);
    return model;
  }

 private:
  void split_lines() {
    std::size_t pos = 0;
    while (pos < text_.size()) {
      auto end = text_.find('\n', pos);
      if (end == std::string_view::npos) end = text_.size();
      auto line = text_.substr(pos, end - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines_.push_back({line, pos});
      pos = end + 1;
    }
  }

  [[noreturn]] void fail(const std::string& what, std::size_t offset) const {
    throw ParseError(what, offset);
  }

  void check_header() const {
    if (lines_.empty()) fail("empty model file", 0);
    const auto first = lines_[0].text;
    if (first == kModelHeader) return;
    constexpr std::string_view kPrefix = "fairboost-model ";
    if (first.substr(0, kPrefix.size()) == kPrefix) {
      throw VersionError("unsupported model format version '" +
                         std::string(first.substr(kPrefix.size())) + "' (expected v1)");
    }
    fail("missing 'fairboost-model v1' header", 0);
  }

  // A file cut short anywhere lacks the closing "end" line and its newline.
  void check_terminated() const {
    const bool ends_with_newline = !text_.empty() && text_.back() == '\n';
    if (!ends_with_newline || lines_.back().text != "end") {
      fail("model file is truncated: missing final 'end' line", text_.size());
    }
  }

  double real_value(std::string_view text, const Line& line) const {
    auto value = parse_real(text);
    if (!value || !std::isfinite(*value)) {
      fail("invalid number '" + std::string(text) + "'", line.offset);
    }
    return *value;
  }

  long long integer_value(std::string_view text, const Line& line) const {
    auto value = parse_integer(text);
    if (!value) fail("invalid integer '" + std::string(text) + "'", line.offset);
    return *value;
  }

  void parse_params(BoosterModel& model) {
    std::map<std::string, std::pair<std::string, std::size_t>> values;
    std::map<long long, std::string> features;
    next_ = 1;
    for (; next_ + 1 < lines_.size(); ++next_) {
      const Line& line = lines_[next_];
      if (line.text.substr(0, 5) == "tree ") break;
      if (line.text.empty()) continue;
      const auto eq = line.text.find('=');
      if (eq == std::string_view::npos) fail("expected key=value parameter line", line.offset);
      const std::string key(line.text.substr(0, eq));
      const auto value = line.text.substr(eq + 1);
      if (key.rfind("feature.", 0) == 0) {
        const auto index = integer_value(std::string_view(key).substr(8), line);
        if (!features.emplace(index, unescape_name(value)).second) {
          fail("feature " + std::to_string(index) + " declared twice", line.offset);
        }
      } else if (!values.emplace(key, std::make_pair(std::string(value), line.offset)).second) {
        fail("parameter '" + key + "' declared twice", line.offset);
      }
    }

    auto take = [&](const std::string& key) -> std::pair<std::string, Line> {
      auto it = values.find(key);
      if (it == values.end()) fail("missing parameter '" + key + "'", lines_[next_].offset);
      auto out = std::make_pair(it->second.first, Line{{}, it->second.second});
      values.erase(it);
      return out;
    };
    auto real = [&](const std::string& key) {
      auto [text, line] = take(key);
      return real_value(text, line);
    };
    auto integer = [&](const std::string& key) {
      auto [text, line] = take(key);
      return integer_value(text, line);
    };

    BoosterParams& p = model.params;
    {
      auto [text, line] = take("objective");
      try {
        p.objective.kind = parse_objective_kind(text);
      } catch (const ParameterError& e) {
        fail(e.what(), line.offset);
      }
    }
    p.objective.mu = real("mu");
    p.num_rounds = static_cast<int>(integer("num_rounds"));
    p.learning_rate = real("learning_rate");
    p.base_score_raw = real("base_score_raw");
    p.tree.max_depth = static_cast<int>(integer("max_depth"));
    p.tree.lambda = real("lambda");
    p.tree.gamma = real("gamma");
    p.tree.min_child_weight = real("min_child_weight");
    p.tree.min_split_gain = real("min_split_gain");
    const auto n_features = integer("num_features");
    n_trees_ = integer("num_trees");
    if (!values.empty()) {
      const auto& [key, where] = *values.begin();
      fail("unknown parameter '" + key + "'", where.second);
    }
    try {
      p.validate();
    } catch (const ParameterError& e) {
      fail(std::string("invalid parameters: ") + e.what(), lines_[1].offset);
    }
    if (n_features < 0 || static_cast<long long>(features.size()) != n_features) {
      fail("expected " + std::to_string(n_features) + " feature names, found " +
               std::to_string(features.size()),
           lines_[next_].offset);
    }
    long long expected = 0;
    for (auto& [index, name] : features) {
      if (index != expected++) fail("feature indices must run 0..num_features-1", lines_[1].offset);
      model.feature_names.push_back(std::move(name));
    }
    if (n_trees_ < 0) fail("num_trees must be >= 0", lines_[next_].offset);
  }

  void parse_trees(BoosterModel& model) {
    const std::size_t end_line = lines_.size() - 1;
    while (next_ < end_line) {
      const Line& header = lines_[next_];
      const auto head = tokens(header.text);
      if (head.size() != 2 || head[0] != "tree") fail("expected 'tree <index>'", header.offset);
      const auto index = integer_value(head[1], header);
      if (index != static_cast<long long>(model.trees.size())) {
        fail("trees must be numbered consecutively from 0", header.offset);
      }
      ++next_;

      std::map<long long, TreeNode> by_id;
      for (; next_ < end_line; ++next_) {
        const Line& line = lines_[next_];
        const auto parts = tokens(line.text);
        if (parts.empty()) continue;
        if (parts[0] == "tree") break;
        by_id_insert(by_id, parse_node(parts, line, model.n_features()), line);
      }
      if (by_id.empty()) fail("tree " + std::to_string(index) + " has no nodes", header.offset);
      std::vector<TreeNode> nodes;
      long long expected = 0;
      for (auto& [id, node] : by_id) {
        if (id != expected++) {
          throw MalformedNodeError("tree " + std::to_string(index) +
                                   ": node ids must run 0..n-1 without gaps");
        }
        nodes.push_back(node);
      }
      try {
        model.trees.push_back(Tree::from_nodes(std::move(nodes)));
      } catch (const DanglingReferenceError& e) {
        throw DanglingReferenceError("tree " + std::to_string(index) + ": " + e.what());
      } catch (const MalformedNodeError& e) {
        throw MalformedNodeError("tree " + std::to_string(index) + ": " + e.what());
      }
    }
    if (static_cast<long long>(model.trees.size()) != n_trees_) {
      fail("expected " + std::to_string(n_trees_) + " trees, found " +
               std::to_string(model.trees.size()),
           lines_.back().offset);
    }
  }

  std::pair<long long, TreeNode> parse_node(const std::vector<std::string_view>& parts,
                                            const Line& line, Index n_features) const {
    auto bad = [&](const std::string& what) {
      throw MalformedNodeError(what + " in node record '" + std::string(line.text) +
                               "' at byte offset " + std::to_string(line.offset));
    };
    auto to_int = [&](std::string_view t) {
      auto v = parse_integer(t);
      if (!v) bad("invalid integer '" + std::string(t) + "'");
      return *v;
    };
    auto to_real = [&](std::string_view t) {
      auto v = parse_real(t);
      if (!v || !std::isfinite(*v)) bad("invalid number '" + std::string(t) + "'");
      return *v;
    };
    if (parts[0] == "leaf") {
      if (parts.size() != 3) bad("leaf record needs 'leaf <id> <weight>'");
      return {to_int(parts[1]), TreeNode::make_leaf(to_real(parts[2]))};
    }
    if (parts[0] == "node") {
      if (parts.size() != 7 || parts[2] != "split") {
        bad("split record needs 'node <id> split <feature> <threshold> <left> <right>'");
      }
      const auto feature = to_int(parts[3]);
      if (feature < 0 || feature >= n_features) bad("feature index out of range");
      const auto left = to_int(parts[5]);
      const auto right = to_int(parts[6]);
      if (left < 0 || right < 0 || left > INT32_MAX || right > INT32_MAX) {
        throw DanglingReferenceError("node record '" + std::string(line.text) +
                                     "' references an invalid child id");
      }
      return {to_int(parts[1]),
              TreeNode::make_split(feature, to_real(parts[4]), static_cast<std::int32_t>(left),
                                   static_cast<std::int32_t>(right))};
    }
    bad("unknown record type '" + std::string(parts[0]) + "'");
    return {};
  }

  void by_id_insert(std::map<long long, TreeNode>& by_id, std::pair<long long, TreeNode> entry,
                    const Line& line) const {
    if (entry.first < 0) {
      throw MalformedNodeError("negative node id at byte offset " + std::to_string(line.offset));
    }
    if (!by_id.insert(entry).second) {
      throw MalformedNodeError("node id " + std::to_string(entry.first) +
                               " repeated at byte offset " + std::to_string(line.offset));
    }
  }

  std::string_view text_;
  std::vector<Line> lines_;
  std::size_t next_ = 1;
  long long n_trees_ = 0;
};

}  // namespace

std::string format_model(const BoosterModel& model) {
  const BoosterParams& p = model.params;
  std::string out(kModelHeader);
  out += "\n";
  out += "objective=" + std::string(objective_name(p.objective.kind)) + "\n";
  out += "mu=" + format_real(p.objective.mu) + "\n";
  out += "num_rounds=" + std::to_string(p.num_rounds) + "\n";
  out += "learning_rate=" + format_real(p.learning_rate) + "\n";
  out += "base_score_raw=" + format_real(p.base_score_raw) + "\n";
  out += "max_depth=" + std::to_string(p.tree.max_depth) + "\n";
  out += "lambda=" + format_real(p.tree.lambda) + "\n";
  out += "gamma=" + format_real(p.tree.gamma) + "\n";
  out += "min_child_weight=" + format_real(p.tree.min_child_weight) + "\n";
  out += "min_split_gain=" + format_real(p.tree.min_split_gain) + "\n";
  out += "num_features=" + std::to_string(model.feature_names.size()) + "\n";
  for (std::size_t i = 0; i < model.feature_names.size(); ++i) {
    out += "feature." + std::to_string(i) + "=" + escape_name(model.feature_names[i]) + "\n";
  }
  out += "num_trees=" + std::to_string(model.trees.size()) + "\n";
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    out += "tree " + std::to_string(t) + "\n";
    const auto& nodes = model.trees[t].nodes();
    for (std::size_t id = 0; id < nodes.size(); ++id) {
      const TreeNode& node = nodes[id];
      if (node.is_leaf()) {
        out += "leaf " + std::to_string(id) + " " + format_real(node.weight) + "\n";
      } else {
        out += "node " + std::to_string(id) + " split " + std::to_string(node.feature) + " " +
               format_real(node.threshold) + " " + std::to_string(node.left) + " " +
               std::to_string(node.right) + "\n";
      }
    }
  }
  out += "end\n";
  return out;
}

BoosterModel parse_model(std::string_view text) { return ModelParser(text).parse(); }

void save_model(const BoosterModel& model, const std::filesystem::path& path) {
  write_text_file_atomic(path, format_model(model));
}

BoosterModel load_model(const std::filesystem::path& path) {
  return parse_model(read_text_file(path));
}

}  // namespace fairboost
