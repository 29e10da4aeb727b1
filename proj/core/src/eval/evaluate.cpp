#include "scenezsl/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "scenezsl/loss/contrastive.hpp"
#include "scenezsl/parallel.hpp"
#include "scenezsl/scenegen/prompts.hpp"

namespace scenezsl::eval {

std::string_view to_string(EvalMode mode) noexcept { return mode == EvalMode::kZsl ? "zsl" : "gzsl"; }

std::string_view to_string(Averaging averaging) noexcept {
  return averaging == Averaging::kMacro ? "macro" : "micro";
}

EvalError::EvalError(Code code, const std::string& detail) : std::runtime_error(detail), code_(code) {}

LabelBank build_label_bank(const std::vector<std::string>& classes, const semantics::EmbeddingTable& table,
                           const nn::ModelParams& params) {
  LabelBank bank;
  for (const auto& name : classes) {
    const std::string prompt = scenegen::label_prompt(name);
    std::vector<double> e;
    try {
      e = table.lookup(prompt);
    } catch (const semantics::TableError& err) {
      throw semantics::TableError(semantics::TableErrc::kMissingPrompt,
                                  "class '" + name + "': " + err.detail());
    }
    std::vector<float> ef(e.begin(), e.end());
    const auto v = nn::project_text<float>(params, ef);
    bank.classes.push_back(name);
    bank.vectors.emplace_back(v.begin(), v.end());
  }
  return bank;
}

std::size_t predict_embedding(std::span<const double> z, const LabelBank& bank) {
  if (bank.size() == 0) throw EvalError(EvalError::Code::kEmptyBank, "label bank is empty");
  std::size_t best = 0;
  double best_sim = -INFINITY;
  for (std::size_t c = 0; c < bank.size(); ++c) {
    const double s = loss::cosine_sim(z, bank.vectors[c]);
    if (s > best_sim) {
      best_sim = s;
      best = c;
    }
  }
  return best;
}

std::size_t predict(const nn::ModelParams& params, const dataset::PointCloud& cloud, const LabelBank& bank) {
  const auto h = nn::encoder_forward(params, cloud);
  const auto z = nn::project_point<float>(params, h);
  const std::vector<double> zd(z.begin(), z.end());
  return predict_embedding(zd, bank);
}

double harmonic_mean(double acc_s, double acc_u) {
  if (acc_s + acc_u == 0.0) return 0.0;
  return 2.0 * acc_s * acc_u / (acc_s + acc_u);
}

std::pair<double, double> harmonic_mean_range(double acc_s, double acc_u, double half_width) {
  const auto clamp = [](double x) { return std::clamp(x, 0.0, 100.0); };
  return {harmonic_mean(clamp(acc_s - half_width), clamp(acc_u - half_width)),
          harmonic_mean(clamp(acc_s + half_width), clamp(acc_u + half_width))};
}

EvalReport score_predictions(EvalMode mode, Averaging averaging, const std::vector<std::string>& classes,
                             const std::vector<bool>& is_seen,
                             std::span<const std::pair<std::size_t, std::size_t>> outcomes) {
  const std::size_t k = classes.size();
  EvalReport report;
  report.mode = mode;
  report.averaging = averaging;
  report.classes = classes;
  report.confusion.assign(k, std::vector<std::size_t>(k, 0));
  report.items = outcomes.size();
  for (auto [t, p] : outcomes) ++report.confusion.at(t).at(p);

  // Per-group (hits, items) for micro, and per-class accuracies for macro.
  struct Group {
    std::size_t hits = 0, items = 0;
    double class_acc_sum = 0.0;
    std::size_t classes = 0;
  } seen, unseen;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t total = 0;
    for (std::size_t p = 0; p < k; ++p) total += report.confusion[c][p];
    if (total == 0) continue;
    const std::size_t hits = report.confusion[c][c];
    const double acc = 100.0 * static_cast<double>(hits) / static_cast<double>(total);
    report.per_class[classes[c]] = acc;
    Group& g = is_seen[c] ? seen : unseen;
    g.hits += hits;
    g.items += total;
    g.class_acc_sum += acc;
    ++g.classes;
  }
  const auto group_acc = [&](const Group& g) {
    if (averaging == Averaging::kMacro) return g.class_acc_sum / static_cast<double>(g.classes);
    return 100.0 * static_cast<double>(g.hits) / static_cast<double>(g.items);
  };

  if (unseen.items == 0) throw EvalError(EvalError::Code::kEmptyTestSet, "no unseen-class test items");
  report.acc_u = group_acc(unseen);
  if (mode == EvalMode::kGzsl) {
    if (seen.items == 0) throw EvalError(EvalError::Code::kEmptyTestSet, "no seen-class test items");
    report.acc_s = group_acc(seen);
    report.hm = harmonic_mean(*report.acc_s, report.acc_u);
  }
  return report;
}

EvalReport evaluate(const nn::ModelParams& params, const dataset::SeenUnseenSplit& split,
                    const semantics::EmbeddingTable& table, const EvalOptions& options) {
  std::vector<std::string> classes;
  std::vector<bool> is_seen;
  if (options.mode == EvalMode::kGzsl) {
    for (const auto& c : split.seen_classes) {
      classes.push_back(c);
      is_seen.push_back(true);
    }
  }
  for (const auto& c : split.unseen_classes) {
    classes.push_back(c);
    is_seen.push_back(false);
  }

  std::vector<std::pair<dataset::SplitItem, std::size_t>> items;
  const auto index_of = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (classes[c] == name) return c;
    }
    return std::nullopt;
  };
  bool seen_in_test = false;
  for (const auto& item : split.test_items) {
    if (auto c = index_of(item.class_name)) {
      items.emplace_back(item, *c);
      seen_in_test = seen_in_test || is_seen[*c];
    }
  }
  if (options.mode == EvalMode::kGzsl && !seen_in_test) {
    for (const auto& item : split.valid_items) {
      if (auto c = index_of(item.class_name); c && is_seen[*c]) items.emplace_back(item, *c);
    }
  }
  if (items.empty()) {
    throw EvalError(EvalError::Code::kEmptyTestSet,
                    std::string("no test items for ") + std::string(to_string(options.mode)));
  }

  const LabelBank bank = build_label_bank(classes, table, params);
  std::vector<std::pair<std::size_t, std::size_t>> outcomes(items.size());
  parallel_for(items.size(), std::max<std::size_t>(options.threads, 1), [&](std::size_t i) {
    const auto cloud = dataset::normalize_unit_sphere(dataset::read_pcb1(split.resolve(items[i].first).string()));
    outcomes[i] = {items[i].second, predict(params, cloud, bank)};
  });
  return score_predictions(options.mode, options.averaging, classes, is_seen, outcomes);
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(report.mode);
  j["averaging"] = to_string(report.averaging);
  j["acc_u"] = report.acc_u;
  if (report.acc_s) j["acc_s"] = *report.acc_s;
  if (report.hm) j["hm"] = *report.hm;
  j["items"] = report.items;
  j["per_class"] = nlohmann::ordered_json::object();
  for (const auto& c : report.classes) {
    if (auto it = report.per_class.find(c); it != report.per_class.end()) j["per_class"][c] = it->second;
  }
  j["classes"] = report.classes;
  j["confusion"] = report.confusion;
  return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "mode %s (%s), %zu items\n", std::string(to_string(report.mode)).c_str(),
                std::string(to_string(report.averaging)).c_str(), report.items);
  out += line;
  std::size_t width = 5;
  for (const auto& c : report.classes) width = std::max(width, c.size());
  for (const auto& c : report.classes) {
    auto it = report.per_class.find(c);
    if (it == report.per_class.end()) continue;
    std::snprintf(line, sizeof(line), "  %-*s %6.1f\n", static_cast<int>(width), c.c_str(), it->second);
    out += line;
  }
  std::snprintf(line, sizeof(line), "acc_u %.1f\n", report.acc_u);
  out += line;
  if (report.acc_s) {
    std::snprintf(line, sizeof(line), "acc_s %.1f\nhm    %.1f\n", *report.acc_s, *report.hm);
    out += line;
  }
  return out;
}

}  // namespace scenezsl::eval
