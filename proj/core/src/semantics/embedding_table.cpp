#include "scenezsl/semantics/embedding_table.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace scenezsl::semantics {

std::string_view to_string(TableKind kind) noexcept {
  return kind == TableKind::kContextual ? "contextual" : "word_average";
}

std::string_view to_string(TableErrc code) noexcept {
  switch (code) {
    case TableErrc::kDimMismatch: return "DimMismatch";
    case TableErrc::kDuplicateKey: return "DuplicateKey";
    case TableErrc::kMalformedLine: return "MalformedLine";
    case TableErrc::kMissingPrompt: return "MissingPrompt";
    case TableErrc::kMissingWord: return "MissingWord";
    case TableErrc::kIo: return "Io";
  }
  return "Unknown";
}

namespace {

std::string describe(TableErrc code, const std::string& detail, std::size_t line) {
  std::string msg(to_string(code));
  if (line > 0) msg += " (line " + std::to_string(line) + ")";
  return msg + ": " + detail;
}

}  // namespace

TableError::TableError(TableErrc code, const std::string& detail, std::size_t line)
    : std::runtime_error(describe(code, detail, line)), code_(code), line_(line), detail_(detail) {}

EmbeddingTable::EmbeddingTable(std::size_t dim, TableKind kind) : dim_(dim), kind_(kind) {
  if (dim == 0) throw TableError(TableErrc::kMalformedLine, "embedding dim must be positive");
}

void EmbeddingTable::insert(std::string text, std::vector<double> vector) {
  if (vector.size() != dim_) {
    throw TableError(TableErrc::kDimMismatch, "row '" + text + "' has " +
                                                  std::to_string(vector.size()) +
                                                  " components, table dim is " + std::to_string(dim_));
  }
  for (double v : vector) {
    if (!std::isfinite(v)) {
      throw TableError(TableErrc::kMalformedLine, "row '" + text + "' has a non-finite component");
    }
  }
  auto [it, inserted] = entries_.try_emplace(std::move(text), std::move(vector));
  if (!inserted) {
    throw TableError(TableErrc::kDuplicateKey, "duplicate row '" + it->first + "'");
  }
}

bool EmbeddingTable::contains(std::string_view text) const {
  return entries_.find(text) != entries_.end();
}

std::vector<std::string> EmbeddingTable::tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else if (ch != '.' && ch != ',') {
      current += static_cast<char>(std::tolower(c));
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::vector<double> EmbeddingTable::lookup(std::string_view text) const {
  if (auto it = entries_.find(text); it != entries_.end()) {
    return it->second;
  }
  if (kind_ == TableKind::kContextual) {
    throw TableError(TableErrc::kMissingPrompt, "no embedding for prompt '" + std::string(text) + "'");
  }
  const std::vector<std::string> words = tokenize(text);
  if (words.empty()) {
    throw TableError(TableErrc::kMissingWord, "prompt '" + std::string(text) + "' has no words");
  }
  std::vector<double> mean(dim_, 0.0);
  for (const auto& word : words) {
    auto it = entries_.find(word);
    if (it == entries_.end()) {
      throw TableError(TableErrc::kMissingWord,
                       "word '" + word + "' of prompt '" + std::string(text) + "' is not in the table");
    }
    for (std::size_t k = 0; k < dim_; ++k) mean[k] += it->second[k];
  }
  const double inv = 1.0 / static_cast<double>(words.size());
  for (double& v : mean) v *= inv;
  return mean;
}

EmbeddingTable parse_table(std::string_view jsonl) {
  struct Row {
    std::string text;
    std::vector<double> vector;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::size_t dim = 0;
  bool word_average = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    ++line_no;
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw TableError(TableErrc::kMalformedLine, e.what(), line_no);
    }
    if (!row.is_object() || !row.contains("text") || !row["text"].is_string() ||
        !row.contains("dim") || !row["dim"].is_number_unsigned() || !row.contains("vector") ||
        !row["vector"].is_array()) {
      throw TableError(TableErrc::kMalformedLine, "row needs string 'text', integer 'dim', array 'vector'",
                       line_no);
    }
    const auto row_dim = row["dim"].get<std::size_t>();
    std::vector<double> vector;
    vector.reserve(row["vector"].size());
    for (const auto& v : row["vector"]) {
      if (!v.is_number()) throw TableError(TableErrc::kMalformedLine, "non-numeric vector entry", line_no);
      vector.push_back(v.get<double>());
    }
    if (vector.size() != row_dim) {
      throw TableError(TableErrc::kDimMismatch,
                       "declared dim " + std::to_string(row_dim) + " but vector has " +
                           std::to_string(vector.size()) + " entries",
                       line_no);
    }
    if (dim == 0) dim = row_dim;
    if (row_dim != dim) {
      throw TableError(TableErrc::kDimMismatch,
                       "dim " + std::to_string(row_dim) + " differs from table dim " + std::to_string(dim),
                       line_no);
    }
    // Rows without a marker are contextual.
    bool row_word_average = false;
    if (row.contains("kind")) {
      const auto& kind = row["kind"];
      if (kind == "word_average") row_word_average = true;
      else if (kind != "contextual") throw TableError(TableErrc::kMalformedLine, "unknown kind " + kind.dump(), line_no);
    }
    if (rows.empty()) word_average = row_word_average;
    else if (row_word_average != word_average) {
      throw TableError(TableErrc::kMalformedLine, "rows disagree on table kind", line_no);
    }
    rows.push_back({row["text"].get<std::string>(), std::move(vector), line_no});
  }
  if (rows.empty() || dim == 0) {
    throw TableError(TableErrc::kMalformedLine, "embedding table is empty");
  }

  EmbeddingTable table(dim, word_average ? TableKind::kWordAverage : TableKind::kContextual);
  for (auto& row : rows) {
    try {
      table.insert(std::move(row.text), std::move(row.vector));
    } catch (const TableError& e) {
      throw TableError(e.code(), e.detail(), row.line);
    }
  }
  return table;
}

EmbeddingTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TableError(TableErrc::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_table(buffer.str());
}

std::string format_table(const EmbeddingTable& table) {
  std::string out;
  for (const auto& [text, vector] : table.entries()) {
    nlohmann::json row;
    row["text"] = text;
    row["dim"] = table.dim();
    row["vector"] = vector;
    if (table.kind() == TableKind::kWordAverage) row["kind"] = "word_average";
    out += row.dump();
    out += '\n';
  }
  return out;
}

}  // namespace scenezsl::semantics
