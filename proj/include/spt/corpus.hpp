#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

namespace spt {

enum class CorpusKind { Labeled, Unlabeled, Test };

inline const char* to_string(CorpusKind kind) {
  switch (kind) {
    case CorpusKind::Labeled: return "labeled";
    case CorpusKind::Unlabeled: return "unlabeled";
    case CorpusKind::Test: return "test";
  }
  return "?";
}

struct Document {
  std::string id;
  std::string text;
  std::optional<int> label;  // 0 = negative, 1 = positive
};

struct Corpus {
  CorpusKind kind = CorpusKind::Labeled;
  std::vector<Document> documents;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
};

inline bool requires_labels(CorpusKind kind) { return kind != CorpusKind::Unlabeled; }

// Lowercased maximal ASCII alphanumeric runs, in order of appearance.
// Everything else (punctuation, whitespace, non-ASCII bytes) separates tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const bool lower = ch >= 'a' && ch <= 'z';
    const bool upper = ch >= 'A' && ch <= 'Z';
    const bool digit = ch >= '0' && ch <= '9';
    if (lower || digit) {
      current.push_back(ch);
    } else if (upper) {
      current.push_back(static_cast<char>(ch - 'A' + 'a'));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

enum class CorpusFormat { Csv, Jsonl };

namespace detail {

inline std::string location(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ", line " + std::to_string(line_no);
}

// One CSV record; double quotes delimit fields, "" escapes a quote.
// Embedded newlines inside quoted fields are not supported (records are line-based).
inline std::vector<std::string> parse_csv_record(const std::string& line,
                                                 const std::filesystem::path& path,
                                                 std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      if (!current.empty() || was_quoted)
        throw std::runtime_error(location(path, line_no) + ": unexpected quote inside field");
      in_quotes = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
      was_quoted = false;
    } else {
      current.push_back(c);
    }
  }
  if (in_quotes)
    throw std::runtime_error(location(path, line_no) + ": unterminated quoted field");
  fields.push_back(std::move(current));
  return fields;
}

inline std::string csv_quote(std::string_view value) {
  std::string out;
  out.push_back('"');
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline int parse_label_field(const std::string& value, const std::filesystem::path& path,
                             std::size_t line_no) {
  if (value == "0") return 0;
  if (value == "1") return 1;
  throw std::runtime_error(location(path, line_no) + ": label must be 0 or 1, got '" + value +
                           "'");
}

inline void check_unique_id(std::unordered_set<std::string>& seen, const std::string& id,
                            const std::filesystem::path& path, std::size_t line_no) {
  if (!seen.insert(id).second)
    throw std::runtime_error(location(path, line_no) + ": duplicate document id '" + id + "'");
}

inline Corpus load_csv(const std::filesystem::path& path, CorpusKind kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());
  Corpus corpus;
  corpus.kind = kind;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return corpus;  // zero-byte file -> empty corpus
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = parse_csv_record(line, path, line_no);
  const bool labeled = requires_labels(kind);
  if (labeled) {
    if (header != std::vector<std::string>{"id", "text", "label"})
      throw std::runtime_error(location(path, line_no) +
                               ": expected header id,text,label for a " +
                               std::string(to_string(kind)) + " corpus");
  } else {
    if (header == std::vector<std::string>{"id", "text", "label"})
      throw std::runtime_error(location(path, line_no) +
                               ": unlabeled corpus must not carry a label column");
    if (header != std::vector<std::string>{"id", "text"})
      throw std::runtime_error(location(path, line_no) +
                               ": expected header id,text for an unlabeled corpus");
  }
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = parse_csv_record(line, path, line_no);
    const std::size_t expected = labeled ? 3 : 2;
    if (fields.size() != expected)
      throw std::runtime_error(location(path, line_no) + ": expected " +
                               std::to_string(expected) + " fields, got " +
                               std::to_string(fields.size()));
    Document doc;
    doc.id = std::move(fields[0]);
    doc.text = std::move(fields[1]);
    if (labeled) doc.label = parse_label_field(fields[2], path, line_no);
    check_unique_id(seen, doc.id, path, line_no);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

inline Corpus load_jsonl(const std::filesystem::path& path, CorpusKind kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());
  Corpus corpus;
  corpus.kind = kind;
  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(location(path, line_no) + ": invalid JSON: " + e.what());
    }
    if (!j.is_object())
      throw std::runtime_error(location(path, line_no) + ": expected a JSON object");
    if (!j.contains("id") || !j["id"].is_string())
      throw std::runtime_error(location(path, line_no) + ": missing string field 'id'");
    if (!j.contains("text") || !j["text"].is_string())
      throw std::runtime_error(location(path, line_no) + ": missing string field 'text'");
    Document doc;
    doc.id = j["id"].get<std::string>();
    doc.text = j["text"].get<std::string>();
    if (requires_labels(kind)) {
      if (!j.contains("label"))
        throw std::runtime_error(location(path, line_no) + ": missing 'label' in a " +
                                 std::string(to_string(kind)) + " corpus");
      if (!j["label"].is_number_integer() ||
          (j["label"].get<int>() != 0 && j["label"].get<int>() != 1))
        throw std::runtime_error(location(path, line_no) + ": label must be 0 or 1");
      doc.label = j["label"].get<int>();
    } else if (j.contains("label")) {
      throw std::runtime_error(location(path, line_no) +
                               ": unlabeled corpus must not carry a 'label' field");
    }
    check_unique_id(seen, doc.id, path, line_no);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace detail

inline Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                          CorpusKind kind) {
  return format == CorpusFormat::Csv ? detail::load_csv(path, kind)
                                     : detail::load_jsonl(path, kind);
}

inline void write_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path.string());
  for (const auto& doc : corpus.documents) {
    nlohmann::json j{{"id", doc.id}, {"text", doc.text}};
    if (doc.label) j["label"] = *doc.label;
    out << j.dump() << '\n';
  }
}

inline void write_corpus_csv(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path.string());
  const bool labeled = requires_labels(corpus.kind);
  out << (labeled ? "\"id\",\"text\",\"label\"\n" : "\"id\",\"text\"\n");
  for (const auto& doc : corpus.documents) {
    out << detail::csv_quote(doc.id) << ',' << detail::csv_quote(doc.text);
    if (labeled) out << ',' << (doc.label.value_or(0));
    out << '\n';
  }
}

inline Corpus strip_labels(Corpus corpus) {
  corpus.kind = CorpusKind::Unlabeled;
  for (auto& doc : corpus.documents) doc.label.reset();
  return corpus;
}

inline void validate_corpus(const Corpus& corpus) {
  std::unordered_set<std::string> seen;
  for (const auto& doc : corpus.documents) {
    if (!seen.insert(doc.id).second)
      throw std::runtime_error("duplicate document id '" + doc.id + "'");
    if (requires_labels(corpus.kind) && !doc.label)
      throw std::runtime_error("document '" + doc.id + "' lacks a label in a " +
                               std::string(to_string(corpus.kind)) + " corpus");
    if (!requires_labels(corpus.kind) && doc.label)
      throw std::runtime_error("document '" + doc.id + "' carries a label in an unlabeled corpus");
  }
}

}  // namespace spt
