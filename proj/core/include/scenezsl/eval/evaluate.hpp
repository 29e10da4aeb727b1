#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "scenezsl/dataset/point_cloud.hpp"
#include "scenezsl/dataset/split.hpp"
#include "scenezsl/nn/model.hpp"
#include "scenezsl/semantics/embedding_table.hpp"

namespace scenezsl::eval {

enum class EvalMode { kZsl, kGzsl };
enum class Averaging { kMacro, kMicro };

std::string_view to_string(EvalMode mode) noexcept;
std::string_view to_string(Averaging averaging) noexcept;

class EvalError : public std::runtime_error {
 public:
  enum class Code { kEmptyTestSet, kEmptyBank };
  EvalError(Code code, const std::string& detail);
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// Projected label prompts, one row per candidate class in list order.
struct LabelBank {
  std::vector<std::string> classes;
  std::vector<std::vector<double>> vectors;

  std::size_t size() const noexcept { return classes.size(); }
};

/// Embeds "This is a {class}." for every class through the text head. A
/// class without a table entry raises TableError(kMissingPrompt) naming it.
LabelBank build_label_bank(const std::vector<std::string>& classes, const semantics::EmbeddingTable& table,
                           const nn::ModelParams& params);

/// Index of the bank row with the highest cosine to z; lowest index on ties.
std::size_t predict_embedding(std::span<const double> z, const LabelBank& bank);

/// Encodes the cloud, projects it, and calls predict_embedding().
std::size_t predict(const nn::ModelParams& params, const dataset::PointCloud& cloud, const LabelBank& bank);

/// 2 s u / (s + u); 0 when both are 0.
double harmonic_mean(double acc_s, double acc_u);

/// Range of harmonic_mean() over inputs that round to (acc_s, acc_u) at the
/// given half-width (0.05 for one printed decimal).
std::pair<double, double> harmonic_mean_range(double acc_s, double acc_u, double half_width);

struct EvalReport {
  EvalMode mode = EvalMode::kZsl;
  Averaging averaging = Averaging::kMacro;
  double acc_u = 0.0;  ///< percent
  std::optional<double> acc_s;
  std::optional<double> hm;
  std::map<std::string, double> per_class;  ///< percent, classes with items only
  std::vector<std::string> classes;         ///< candidate order
  /// confusion[t][p]: items of candidate t predicted as candidate p.
  std::vector<std::vector<std::size_t>> confusion;
  std::size_t items = 0;
};

/// Builds a report from (true, predicted) candidate indices. `is_seen[c]`
/// says which group candidate c belongs to.
EvalReport score_predictions(EvalMode mode, Averaging averaging, const std::vector<std::string>& classes,
                             const std::vector<bool>& is_seen,
                             std::span<const std::pair<std::size_t, std::size_t>> outcomes);

struct EvalOptions {
  EvalMode mode = EvalMode::kZsl;
  Averaging averaging = Averaging::kMacro;
  std::size_t threads = 1;
};

/// ZSL: unseen test items against unseen label prompts. GZSL: seen and
/// unseen items against the union (seen classes first). Seen items come from
/// [test]; when it has none, the held-out [valid] items stand in. Clouds are
/// normalized to the unit sphere before encoding.
EvalReport evaluate(const nn::ModelParams& params, const dataset::SeenUnseenSplit& split,
                    const semantics::EmbeddingTable& table, const EvalOptions& options);

std::string report_json(const EvalReport& report);
/// Plain-text summary for terminals.
std::string report_table(const EvalReport& report);

}  // namespace scenezsl::eval
