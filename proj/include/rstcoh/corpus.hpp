#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "rstcoh/rst_tree.hpp"
#include "rstcoh/tensor.hpp"

namespace rstcoh {

inline constexpr int kNumClasses = 3;

/// Token lists: paragraph -> sentence -> tokens.
using Sentence = std::vector<std::string>;
using Paragraph = std::vector<Sentence>;
using Paragraphs = std::vector<Paragraph>;

// --- text processing ------------------------------------------------------

/// Lowercases ASCII letters and splits on whitespace; every ASCII
/// punctuation character becomes a token of its own.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 128 && std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

namespace detail {

inline bool is_blank(std::string_view s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

inline bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

/// Sentence boundaries: a terminator followed by whitespace and an
/// uppercase letter, or by the end of the paragraph.
inline std::vector<std::string> split_sentences(const std::string& para) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t k = 0; k < para.size(); ++k) {
    if (!is_terminator(para[k])) continue;
    std::size_t j = k + 1;
    if (j < para.size() && !std::isspace(static_cast<unsigned char>(para[j]))) continue;
    while (j < para.size() && std::isspace(static_cast<unsigned char>(para[j]))) ++j;
    if (j == para.size() || std::isupper(static_cast<unsigned char>(para[j]))) {
      out.push_back(para.substr(start, k + 1 - start));
      start = k + 1;
    }
  }
  if (start < para.size()) out.push_back(para.substr(start));
  return out;
}

}  // namespace detail

/// Splits text into paragraphs (blank-line separated), sentences and
/// lowercased tokens. Empty sentences and paragraphs are dropped.
inline Paragraphs segment(std::string_view text) {
  std::vector<std::string> raw_paragraphs;
  std::string cur;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (detail::is_blank(line)) {
      if (!cur.empty()) raw_paragraphs.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    if (!cur.empty()) cur.push_back('\n');
    cur += line;
  }
  if (!cur.empty()) raw_paragraphs.push_back(std::move(cur));

  Paragraphs out;
  for (const auto& raw : raw_paragraphs) {
    Paragraph para;
    for (const auto& s : detail::split_sentences(raw)) {
      auto toks = tokenize(s);
      if (!toks.empty()) para.push_back(std::move(toks));
    }
    if (!para.empty()) out.push_back(std::move(para));
  }
  if (out.empty()) throw EmptyDocumentError("text contains no tokens");
  return out;
}

/// Inverse rendering of a segmentation: tokens space-separated, each
/// sentence capitalized, paragraphs separated by a blank line. Segmenting
/// the result reproduces the input.
inline std::string join_segments(const Paragraphs& paragraphs) {
  std::string out;
  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    if (p > 0) out += "\n\n";
    for (std::size_t s = 0; s < paragraphs[p].size(); ++s) {
      if (s > 0) out.push_back(' ');
      std::string sentence;
      for (std::size_t t = 0; t < paragraphs[p][s].size(); ++t) {
        if (t > 0) sentence.push_back(' ');
        sentence += paragraphs[p][s][t];
      }
      if (!sentence.empty())
        sentence[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[0])));
      out += sentence;
    }
  }
  return out;
}

// --- documents ------------------------------------------------------------

struct Document {
  std::string id;
  int label = 3;  // 1 incoherent, 2 neutral, 3 coherent
  std::string text;
  Paragraphs paragraphs;
  RstTree tree;
  std::vector<std::vector<std::string>> edu_tokens;  // per leaf, left to right

  void tokenize_edus() {
    edu_tokens.clear();
    for (const RstTree* leaf : tree.leaves()) edu_tokens.push_back(tokenize(leaf->edu_text));
  }
};

inline bool valid_label(long long label) { return label >= 1 && label <= kNumClasses; }

struct Exclusion {
  std::string id;
  std::string reason;
};

struct CorpusSplit {
  std::vector<Document> train;
  std::vector<Document> test;
  std::vector<Exclusion> exclusion_log;
  std::size_t input_count = 0;

  std::size_t retained() const { return train.size() + test.size(); }
  double retention_rate() const {
    return input_count == 0 ? 0.0 : static_cast<double>(retained()) / static_cast<double>(input_count);
  }

  std::vector<const RstTree*> train_trees() const {
    std::vector<const RstTree*> out;
    for (const auto& d : train) out.push_back(&d.tree);
    return out;
  }
};

namespace detail {

inline std::string describe(const std::vector<Violation>& vs) {
  std::string out;
  for (const auto& v : vs) {
    if (!out.empty()) out += ',';
    out += to_string(v.kind);
  }
  return out;
}

inline Paragraphs paragraphs_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_array()) throw IngestError(line, "'paragraphs' must be an array of arrays of strings");
  Paragraphs out;
  for (const auto& p : j) {
    if (!p.is_array()) throw IngestError(line, "'paragraphs' must be an array of arrays of strings");
    Paragraph para;
    for (const auto& s : p) {
      if (!s.is_string()) throw IngestError(line, "'paragraphs' sentences must be strings");
      auto toks = tokenize(s.get<std::string>());
      if (!toks.empty()) para.push_back(std::move(toks));
    }
    if (!para.empty()) out.push_back(std::move(para));
  }
  return out;
}

}  // namespace detail

/// Joins a JSON Lines document file with a tree file ("<id> <tree>" per
/// line). Documents whose tree is missing, unparseable, invalid or whose
/// text has no tokens are excluded and logged, never silently dropped.
inline CorpusSplit load_corpus(const std::string& docs_path, const std::string& trees_path) {
  std::ifstream tree_in(trees_path);
  if (!tree_in) throw IngestError(0, "cannot open tree file '" + trees_path + "'");
  struct TreeEntry {
    std::optional<RstTree> tree;
    std::string error;
  };
  std::map<std::string, TreeEntry> trees;
  std::size_t line_no = 0;
  for (std::string line; std::getline(tree_in, line);) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    std::size_t p = 0;
    while (std::isspace(static_cast<unsigned char>(line[p]))) ++p;
    if (line[p] == '(') throw IngestError(line_no, "tree line lacks a document id");
    std::size_t e = p;
    while (e < line.size() && !std::isspace(static_cast<unsigned char>(line[e]))) ++e;
    std::string id = line.substr(p, e - p);
    if (trees.count(id)) throw DuplicateIdError("duplicate tree id '" + id + "' (line " + std::to_string(line_no) + ")");
    TreeEntry entry;
    try {
      entry.tree = parse_tree_line(line).tree;
    } catch (const ParseError& err) {
      entry.error = err.what();
    }
    trees.emplace(std::move(id), std::move(entry));
  }

  std::ifstream doc_in(docs_path);
  if (!doc_in) throw IngestError(0, "cannot open documents file '" + docs_path + "'");
  CorpusSplit split;
  std::set<std::string> seen;
  line_no = 0;
  for (std::string line; std::getline(doc_in, line);) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& err) {
      throw IngestError(line_no, std::string("malformed JSON: ") + err.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
      throw IngestError(line_no, "record needs a string 'id'");
    if (!j.contains("label") || !j["label"].is_number_integer() ||
        !valid_label(j["label"].get<long long>()))
      throw IngestError(line_no, "record needs an integer 'label' in {1,2,3}");
    if (!j.contains("text") || !j["text"].is_string())
      throw IngestError(line_no, "record needs a string 'text'");
    std::string which = "train";
    if (j.contains("split")) {
      if (!j["split"].is_string()) throw IngestError(line_no, "'split' must be a string");
      which = j["split"].get<std::string>();
      if (which != "train" && which != "test")
        throw IngestError(line_no, "'split' must be \"train\" or \"test\"");
    }

    Document doc;
    doc.id = j["id"].get<std::string>();
    doc.label = static_cast<int>(j["label"].get<long long>());
    doc.text = j["text"].get<std::string>();
    if (!seen.insert(doc.id).second)
      throw DuplicateIdError("duplicate document id '" + doc.id + "' (line " + std::to_string(line_no) + ")");
    ++split.input_count;

    auto it = trees.find(doc.id);
    if (it == trees.end()) {
      split.exclusion_log.push_back({doc.id, "missing tree"});
      continue;
    }
    if (!it->second.tree) {
      split.exclusion_log.push_back({doc.id, "unparseable tree: " + it->second.error});
      continue;
    }
    if (auto vs = validate_tree(*it->second.tree); !vs.empty()) {
      split.exclusion_log.push_back({doc.id, "invalid tree: " + detail::describe(vs)});
      continue;
    }
    doc.tree = *it->second.tree;
    if (j.contains("paragraphs")) {
      doc.paragraphs = detail::paragraphs_from_json(j["paragraphs"], line_no);
    } else {
      try {
        doc.paragraphs = segment(doc.text);
      } catch (const EmptyDocumentError&) {
      }
    }
    if (doc.paragraphs.empty()) {
      split.exclusion_log.push_back({doc.id, "empty document"});
      continue;
    }
    doc.tokenize_edus();
    (which == "train" ? split.train : split.test).push_back(std::move(doc));
  }
  return split;
}

inline void write_documents_jsonl(const CorpusSplit& split, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  auto emit = [&](const std::vector<Document>& docs, const char* which) {
    for (const auto& d : docs) {
      nlohmann::ordered_json j;
      j["id"] = d.id;
      j["label"] = d.label;
      j["text"] = d.text;
      j["split"] = which;
      out << j.dump() << '\n';
    }
  };
  emit(split.train, "train");
  emit(split.test, "test");
}

inline void write_trees(const CorpusSplit& split, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  for (const auto* docs : {&split.train, &split.test})
    for (const auto& d : *docs) out << d.id << ' ' << serialize_tree(d.tree) << '\n';
}

// --- word vectors ---------------------------------------------------------

/// Frozen token -> vector table. Out-of-vocabulary tokens map to zeros.
class WordVectors {
 public:
  explicit WordVectors(std::size_t dimension = 300) : dim_(dimension), zero_(dimension, 0.0) {}

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return table_.size(); }

  void set(const std::string& token, std::vector<double> v) {
    if (v.size() != dim_)
      throw FormatError("vector for '" + token + "' has " + std::to_string(v.size()) +
                        " values, expected " + std::to_string(dim_));
    table_[token] = std::move(v);
  }

  bool contains(const std::string& token) const { return table_.count(token) > 0; }

  const std::vector<double>& lookup(const std::string& token) const {
    auto it = table_.find(token);
    return it == table_.end() ? zero_ : it->second;
  }

  /// Writes "token v1 ... vD" lines in sorted token order.
  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    std::map<std::string, const std::vector<double>*> sorted;
    for (const auto& [k, v] : table_) sorted[k] = &v;
    char buf[32];
    for (const auto& [k, v] : sorted) {
      out << k;
      for (double x : *v) {
        std::snprintf(buf, sizeof buf, " %.17g", x);
        out << buf;
      }
      out << '\n';
    }
  }

 private:
  std::size_t dim_;
  std::vector<double> zero_;
  std::unordered_map<std::string, std::vector<double>> table_;
};

/// Reads the standard text format. Only tokens in `vocab` are kept (all
/// tokens when `vocab` is empty). `declared_dimension` of 0 means "take it
/// from the first vector line". A leading "<count> <dim>" header is skipped.
inline WordVectors load_word_vectors(const std::string& path,
                                     const std::unordered_set<std::string>& vocab = {},
                                     std::size_t declared_dimension = 0) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open word vector file '" + path + "'");
  std::size_t dim = declared_dimension;
  std::optional<WordVectors> wv;
  if (dim > 0) wv.emplace(dim);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<double> values;
    std::string num;
    while (fields >> num) {
      char* end = nullptr;
      const double v = std::strtod(num.c_str(), &end);
      if (end == num.c_str() || *end != '\0')
        throw FormatError("line " + std::to_string(line_no) + ": bad number '" + num + "'");
      if (!std::isfinite(v)) throw FormatError("line " + std::to_string(line_no) + ": non-finite value");
      values.push_back(v);
    }
    if (line_no == 1 && values.size() == 1 &&
        token.find_first_not_of("0123456789") == std::string::npos &&
        num.find_first_not_of("0123456789") == std::string::npos)
      continue;
    if (dim == 0) {
      dim = values.size();
      if (dim == 0) throw FormatError("line " + std::to_string(line_no) + ": vector has no values");
      wv.emplace(dim);
    }
    if (values.size() != dim)
      throw FormatError("line " + std::to_string(line_no) + ": " + std::to_string(values.size()) +
                        " values, expected " + std::to_string(dim));
    if (vocab.empty() || vocab.count(token)) wv->set(token, std::move(values));
  }
  if (!wv) throw FormatError("word vector file '" + path + "' is empty");
  return std::move(*wv);
}

/// Every token appearing in the split's EDUs and segmented text.
inline std::unordered_set<std::string> corpus_tokens(const CorpusSplit& split) {
  std::unordered_set<std::string> out;
  for (const auto* docs : {&split.train, &split.test})
    for (const auto& d : *docs) {
      for (const auto& p : d.paragraphs)
        for (const auto& s : p) out.insert(s.begin(), s.end());
      for (const auto& e : d.edu_tokens) out.insert(e.begin(), e.end());
    }
  return out;
}

// --- synthetic corpus -----------------------------------------------------

/// 31 combined labels: 16 relation classes in both nuclearities, minus the
/// satellite form of the multinuclear Same-Unit.
inline std::vector<std::string> default_relation_labels() {
  static const char* relations[] = {
      "Attribution", "Background", "Cause",   "Comparison", "Condition", "Contrast",
      "Elaboration", "Enablement", "Evaluation", "Explanation", "Joint", "Manner-Means",
      "Same-Unit",   "Summary",    "Temporal", "Topic-Change"};
  std::vector<std::string> out;
  for (const char* r : relations)
    for (const char* n : {"_N", "_S"}) {
      std::string l = std::string(r) + n;
      if (l != "Same-Unit_S") out.push_back(std::move(l));
    }
  return out;
}

inline std::vector<std::string> default_token_pool() {
  return {"the",  "a",     "we",    "it",     "they",  "was",    "is",   "good",
          "food", "place", "staff", "time",   "again", "never",  "very", "said",
          "came", "went",  "made",  "after",  "and",   "but",    "so",   "because"};
}

/// Planted-signal generator. Coherent (3) documents draw a label from the
/// first `pattern_size` labels with probability `signal`, neutral (2) from
/// the next `pattern_size`; otherwise, and always for incoherent (1)
/// documents, labels are uniform over the whole set. Tree shape and EDU
/// text are independent of the class.
struct GeneratorConfig {
  std::size_t n_train = 300;
  std::size_t n_test = 150;
  double signal = 0.9;
  std::vector<std::string> labels = default_relation_labels();
  std::size_t pattern_size = 10;
  std::array<double, kNumClasses> class_priors{0.28, 0.20, 0.52};
  std::size_t min_edus = 4;
  std::size_t max_edus = 16;
  std::size_t min_edu_tokens = 3;
  std::size_t max_edu_tokens = 7;
  std::vector<std::string> token_pool = default_token_pool();

  void check() const {
    if (!(signal >= 0.0 && signal <= 1.0))
      throw ConfigError("generator signal strength must lie in [0, 1]");
    if (labels.empty()) throw ConfigError("generator needs at least one relation label");
    if (2 * pattern_size > labels.size())
      throw ConfigError("generator pattern subsets exceed the label set");
    if (min_edus < 2 || max_edus < min_edus) throw ConfigError("generator EDU range invalid");
    if (min_edu_tokens < 1 || max_edu_tokens < min_edu_tokens)
      throw ConfigError("generator EDU length range invalid");
    if (token_pool.empty()) throw ConfigError("generator token pool is empty");
    for (double p : class_priors)
      if (!(p >= 0.0)) throw ConfigError("generator class priors must be non-negative");
    for (const auto& l : labels) {
      auto us = l.rfind('_');
      if (us == std::string::npos || us + 2 != l.size() || (l[us + 1] != 'N' && l[us + 1] != 'S') ||
          !detail::valid_relation_name(l.substr(0, us)))
        throw ConfigError("generator label '" + l + "' is not of the form Relation_N|S");
    }
  }

  /// Probability of drawing label index `k` for a document of class `cls`.
  double label_probability(int cls, std::size_t k) const {
    const double uniform = 1.0 / static_cast<double>(labels.size());
    const std::size_t lo = cls == 3 ? 0 : pattern_size;
    const bool patterned = cls != 1 && k >= lo && k < lo + pattern_size;
    const double s = cls == 1 ? 0.0 : signal;
    return s * (patterned ? 1.0 / static_cast<double>(pattern_size) : 0.0) + (1.0 - s) * uniform;
  }
};

namespace detail {

inline RelationLabel label_from_combined(const std::string& combined) {
  const auto us = combined.rfind('_');
  return {combined.substr(0, us),
          combined[us + 1] == 'N' ? Nuclearity::Nucleus : Nuclearity::Satellite};
}

class SyntheticWriter {
 public:
  SyntheticWriter(const GeneratorConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {}

  Document make(std::string id, int cls) {
    std::uniform_int_distribution<std::size_t> n_dist(cfg_.min_edus, cfg_.max_edus);
    const std::size_t n = n_dist(rng_);
    std::vector<std::string> edus;
    for (std::size_t k = 0; k < n; ++k) edus.push_back(edu_text());
    std::size_t next = 0;
    Document d;
    d.id = std::move(id);
    d.label = cls;
    d.tree = build(n, cls, edus, next);
    // paragraphs of 1-4 EDU sentences each
    std::uniform_int_distribution<std::size_t> para_len(1, 4);
    for (std::size_t k = 0; k < n;) {
      const std::size_t take = std::min(para_len(rng_), n - k);
      if (!d.text.empty()) d.text += "\n\n";
      for (std::size_t j = 0; j < take; ++j) {
        if (j > 0) d.text.push_back(' ');
        d.text += edus[k + j];
      }
      k += take;
    }
    d.paragraphs = segment(d.text);
    d.tokenize_edus();
    return d;
  }

 private:
  std::string edu_text() {
    std::uniform_int_distribution<std::size_t> len(cfg_.min_edu_tokens, cfg_.max_edu_tokens);
    std::uniform_int_distribution<std::size_t> pick(0, cfg_.token_pool.size() - 1);
    const std::size_t n = len(rng_);
    std::string s;
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) s.push_back(' ');
      s += cfg_.token_pool[pick(rng_)];
    }
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    s.push_back('.');
    return s;
  }

  RelationLabel draw_label(int cls) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const double s = cls == 1 ? 0.0 : cfg_.signal;
    std::size_t k;
    if (coin(rng_) < s) {
      std::uniform_int_distribution<std::size_t> in_pattern(0, cfg_.pattern_size - 1);
      k = (cls == 3 ? 0 : cfg_.pattern_size) + in_pattern(rng_);
    } else {
      std::uniform_int_distribution<std::size_t> any(0, cfg_.labels.size() - 1);
      k = any(rng_);
    }
    return label_from_combined(cfg_.labels[k]);
  }

  RstTree build(std::size_t n, int cls, const std::vector<std::string>& edus, std::size_t& next) {
    if (n == 1) return RstTree::leaf(edus[next++]);
    std::uniform_int_distribution<std::size_t> cut(1, n - 1);
    const std::size_t left_n = cut(rng_);
    RelationLabel ll = draw_label(cls);
    RelationLabel rl = draw_label(cls);
    RstTree left = build(left_n, cls, edus, next);
    RstTree right = build(n - left_n, cls, edus, next);
    return RstTree::internal(std::move(left), std::move(right), std::move(ll), std::move(rl));
  }

  const GeneratorConfig& cfg_;
  Rng& rng_;
};

inline std::string synthetic_id(const char* which, std::size_t k) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "synth-%s-%05zu", which, k);
  return buf;
}

}  // namespace detail

/// Deterministic given (cfg, seed).
inline CorpusSplit synthesize_corpus(const GeneratorConfig& cfg, std::uint64_t seed) {
  cfg.check();
  Rng rng(seed);
  std::discrete_distribution<int> cls_dist(cfg.class_priors.begin(), cfg.class_priors.end());
  detail::SyntheticWriter writer(cfg, rng);
  CorpusSplit split;
  for (std::size_t k = 0; k < cfg.n_train; ++k)
    split.train.push_back(writer.make(detail::synthetic_id("train", k), cls_dist(rng) + 1));
  for (std::size_t k = 0; k < cfg.n_test; ++k)
    split.test.push_back(writer.make(detail::synthetic_id("test", k), cls_dist(rng) + 1));
  split.input_count = cfg.n_train + cfg.n_test;
  return split;
}

/// Random vectors (uniform in ±0.5) for the generator's token pool plus
/// the sentence terminator.
inline WordVectors synthesize_word_vectors(const GeneratorConfig& cfg, std::size_t dimension,
                                           std::uint64_t seed) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  WordVectors wv(dimension);
  std::set<std::string> tokens(cfg.token_pool.begin(), cfg.token_pool.end());
  tokens.insert(".");
  for (const auto& t : tokens) {
    std::vector<double> v(dimension);
    for (double& x : v) x = dist(rng);
    wv.set(t, std::move(v));
  }
  return wv;
}

}  // namespace rstcoh
