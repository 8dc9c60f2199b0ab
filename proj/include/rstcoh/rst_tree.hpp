#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rstcoh/errors.hpp"

namespace rstcoh {

enum class Nuclearity { Nucleus, Satellite };

inline char nuclearity_code(Nuclearity n) { return n == Nuclearity::Nucleus ? 'N' : 'S'; }

struct RelationLabel {
  std::string relation;
  Nuclearity nuclearity = Nuclearity::Nucleus;

  /// "Relation_N" / "Relation_S": the key of a relation embedding row.
  std::string combined() const { return relation + '_' + nuclearity_code(nuclearity); }

  friend bool operator==(const RelationLabel&, const RelationLabel&) = default;
};

/// Binary discourse tree. Leaves hold EDU text; an internal node holds two
/// children and the (relation, nuclearity) label of each child. The root
/// itself is unlabeled.
struct RstTree {
  std::string edu_text;
  std::vector<RstTree> children;
  RelationLabel left_label;
  RelationLabel right_label;

  static RstTree leaf(std::string text) {
    RstTree t;
    t.edu_text = std::move(text);
    return t;
  }

  static RstTree internal(RstTree left, RstTree right, RelationLabel left_label,
                          RelationLabel right_label) {
    RstTree t;
    t.children.reserve(2);
    t.children.push_back(std::move(left));
    t.children.push_back(std::move(right));
    t.left_label = std::move(left_label);
    t.right_label = std::move(right_label);
    return t;
  }

  bool is_leaf() const noexcept { return children.empty(); }
  const RstTree& left() const { return children.at(0); }
  const RstTree& right() const { return children.at(1); }

  std::size_t leaf_count() const {
    if (is_leaf()) return 1;
    std::size_t n = 0;
    for (const auto& c : children) n += c.leaf_count();
    return n;
  }

  std::size_t node_count() const {
    std::size_t n = 1;
    for (const auto& c : children) n += c.node_count();
    return n;
  }

  std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& c : children) d = std::max(d, c.depth());
    return d + 1;
  }

  /// Leaves in left-to-right order.
  std::vector<const RstTree*> leaves() const {
    std::vector<const RstTree*> out;
    collect_leaves(out);
    return out;
  }

  /// Visits every child label in pre-order.
  template <typename F>
  void for_each_label(F&& f) const {
    if (is_leaf()) return;
    f(left_label);
    f(right_label);
    for (const auto& c : children) c.for_each_label(f);
  }

  /// Same leaf count, same branching, labels and text ignored.
  bool same_shape(const RstTree& other) const {
    if (children.size() != other.children.size()) return false;
    for (std::size_t k = 0; k < children.size(); ++k)
      if (!children[k].same_shape(other.children[k])) return false;
    return true;
  }

  friend bool operator==(const RstTree& a, const RstTree& b) {
    if (a.children.size() != b.children.size()) return false;
    if (a.is_leaf()) return a.edu_text == b.edu_text;
    return a.left_label == b.left_label && a.right_label == b.right_label &&
           a.children == b.children;
  }

 private:
  void collect_leaves(std::vector<const RstTree*>& out) const {
    if (is_leaf()) {
      out.push_back(this);
      return;
    }
    for (const auto& c : children) c.collect_leaves(out);
  }
};

// --- text format ----------------------------------------------------------
//
//   tree     := leaf | internal
//   leaf     := "(" "edu" quoted-string ")"
//   internal := "(" "rel" label "/" nuc label "/" nuc tree tree ")"
//   nuc      := "N" | "S" ; label := [A-Za-z][A-Za-z0-9-]*
//
// Quoted strings accept the escapes \" \\ \n \t \r.

namespace detail {

class TreeReader {
 public:
  TreeReader(std::string_view text, std::size_t base) : text_(text), base_(base) {}

  RstTree read_document() {
    skip_ws();
    RstTree t = read_tree(0);
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input after tree");
    return t;
  }

 private:
  static constexpr std::size_t kMaxDepth = 4096;

  [[noreturn]] void fail(const std::string& msg) const { fail_at(pos_, msg); }
  [[noreturn]] void fail_at(std::size_t at, const std::string& msg) const {
    throw ParseError(base_ + at, msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char ch) {
    skip_ws();
    if (pos_ >= text_.size()) fail(std::string("expected '") + ch + "', found end of input");
    if (text_[pos_] != ch)
      fail(std::string("expected '") + ch + "', found '" + text_[pos_] + "'");
    ++pos_;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-';
  }

  std::string read_ident(const char* what) {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) fail(std::string("expected ") + what);
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  Nuclearity read_nuclearity() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    const auto tok = text_.substr(start, pos_ - start);
    if (tok == "N") return Nuclearity::Nucleus;
    if (tok == "S") return Nuclearity::Satellite;
    fail_at(start, "bad nuclearity token '" + std::string(tok) + "' (expected N or S)");
  }

  RelationLabel read_label() {
    RelationLabel l;
    l.relation = read_ident("relation label");
    expect('/');
    l.nuclearity = read_nuclearity();
    return l;
  }

  std::string read_quoted() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ >= text_.size() || text_[pos_] != '"') fail("expected quoted EDU text");
    ++pos_;
    std::string out;
    for (;;) {
      if (pos_ >= text_.size()) fail_at(start, "unterminated string");
      const char c = text_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= text_.size()) fail_at(start, "unterminated string");
      switch (const char e = text_[pos_++]; e) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        default: fail_at(pos_ - 2, std::string("unknown escape '\\") + e + "'");
      }
    }
    if (out.empty()) fail_at(start, "empty EDU string");
    return out;
  }

  RstTree read_tree(std::size_t depth) {
    if (depth > kMaxDepth) fail("tree nesting too deep");
    skip_ws();
    if (pos_ >= text_.size()) fail("expected '(', found end of input");
    if (text_[pos_] == ')') fail("unbalanced ')'");
    expect('(');
    skip_ws();
    const std::size_t kw_at = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    const auto keyword = text_.substr(kw_at, pos_ - kw_at);
    RstTree t;
    if (keyword == "edu") {
      t = RstTree::leaf(read_quoted());
    } else if (keyword == "rel") {
      RelationLabel l = read_label();
      RelationLabel r = read_label();
      RstTree left = read_tree(depth + 1);
      RstTree right = read_tree(depth + 1);
      t = RstTree::internal(std::move(left), std::move(right), std::move(l), std::move(r));
    } else {
      fail_at(kw_at, "unknown node keyword '" + std::string(keyword) + "'");
    }
    skip_ws();
    if (pos_ >= text_.size()) fail("unbalanced '(': missing ')'");
    expect(')');
    return t;
  }

  std::string_view text_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

inline void write_quoted(std::string& out, const std::string& s) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
}

inline void write_tree(std::string& out, const RstTree& t) {
  if (t.is_leaf()) {
    out += "(edu ";
    write_quoted(out, t.edu_text);
    out.push_back(')');
    return;
  }
  out += "(rel ";
  out += t.left_label.relation;
  out += '/';
  out += nuclearity_code(t.left_label.nuclearity);
  out += ' ';
  out += t.right_label.relation;
  out += '/';
  out += nuclearity_code(t.right_label.nuclearity);
  for (const auto& c : t.children) {
    out.push_back(' ');
    write_tree(out, c);
  }
  out.push_back(')');
}

}  // namespace detail

/// Parses one serialized tree. Byte offsets in errors are relative to `text`.
inline RstTree parse_tree(std::string_view text) {
  return detail::TreeReader(text, 0).read_document();
}

/// Canonical single-line form: single spaces, escaped quotes.
inline std::string serialize_tree(const RstTree& t) {
  std::string out;
  detail::write_tree(out, t);
  return out;
}

/// A line of a tree file: an optional whitespace-free document id followed
/// by the tree. Lines starting with '(' carry no id.
struct TreeRecord {
  std::string id;
  RstTree tree;
};

inline TreeRecord parse_tree_line(std::string_view line) {
  std::size_t p = 0;
  while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
  TreeRecord rec;
  if (p < line.size() && line[p] != '(') {
    const std::size_t start = p;
    while (p < line.size() && !std::isspace(static_cast<unsigned char>(line[p])) && line[p] != '(')
      ++p;
    rec.id = std::string(line.substr(start, p - start));
  }
  rec.tree = detail::TreeReader(line.substr(p), p).read_document();
  return rec;
}

// --- validation -----------------------------------------------------------

enum class ViolationKind { DegenerateTree, NonBinary, EmptyRelation, InvalidRelation, EmptyEdu };

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::DegenerateTree: return "DegenerateTree";
    case ViolationKind::NonBinary: return "NonBinary";
    case ViolationKind::EmptyRelation: return "EmptyRelation";
    case ViolationKind::InvalidRelation: return "InvalidRelation";
    case ViolationKind::EmptyEdu: return "EmptyEdu";
  }
  return "Unknown";
}

struct Violation {
  ViolationKind kind;
  std::string path;  // "" for the root, then 'L'/'R' steps, e.g. "LR"
  friend bool operator==(const Violation&, const Violation&) = default;
};

namespace detail {

inline bool valid_relation_name(const std::string& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-';
  });
}

inline void check_label(const RelationLabel& l, const std::string& path, std::vector<Violation>& out) {
  if (l.relation.empty())
    out.push_back({ViolationKind::EmptyRelation, path});
  else if (!valid_relation_name(l.relation))
    out.push_back({ViolationKind::InvalidRelation, path});
}

inline void validate(const RstTree& t, const std::string& path, std::vector<Violation>& out) {
  if (t.is_leaf()) {
    const bool blank = std::all_of(t.edu_text.begin(), t.edu_text.end(), [](char c) {
      return std::isspace(static_cast<unsigned char>(c)) != 0;
    });
    if (blank) out.push_back({ViolationKind::EmptyEdu, path});
    return;
  }
  if (t.children.size() != 2) {
    out.push_back({ViolationKind::NonBinary, path});
    for (std::size_t k = 0; k < t.children.size(); ++k)
      validate(t.children[k], path + std::to_string(k), out);
    return;
  }
  check_label(t.left_label, path + 'L', out);
  check_label(t.right_label, path + 'R', out);
  validate(t.children[0], path + 'L', out);
  validate(t.children[1], path + 'R', out);
}

}  // namespace detail

/// Structural problems of a tree; empty iff the tree is classifiable.
inline std::vector<Violation> validate_tree(const RstTree& t) {
  std::vector<Violation> out;
  if (t.leaf_count() < 2) out.push_back({ViolationKind::DegenerateTree, ""});
  detail::validate(t, "", out);
  return out;
}

// --- relation vocabulary --------------------------------------------------

/// Frozen, lexicographically ordered set of combined labels with the
/// reserved "UNK" entry at index 0.
class RelationVocabulary {
 public:
  static constexpr const char* kUnk = "UNK";
  static constexpr std::size_t kUnkIndex = 0;

  RelationVocabulary() : labels_{kUnk} {}

  static RelationVocabulary from_labels(std::vector<std::string> labels) {
    std::set<std::string> uniq;
    for (auto& l : labels)
      if (l != kUnk) uniq.insert(std::move(l));
    RelationVocabulary v;
    v.labels_.insert(v.labels_.end(), uniq.begin(), uniq.end());
    v.reindex();
    return v;
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Unseen labels resolve to UNK.
  std::size_t index(const std::string& combined) const {
    auto it = index_.find(combined);
    return it == index_.end() ? kUnkIndex : it->second;
  }
  std::size_t index(const RelationLabel& l) const { return index(l.combined()); }
  bool contains(const std::string& combined) const { return index_.count(combined) > 0; }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write vocabulary file '" + path + "'");
    for (const auto& l : labels_) out << l << '\n';
  }

  static RelationVocabulary load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot read vocabulary file '" + path + "'");
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) lines.push_back(line);
    if (lines.empty() || lines.front() != kUnk)
      throw FormatError("vocabulary file '" + path + "' must start with UNK");
    return from_labels(std::vector<std::string>(lines.begin() + 1, lines.end()));
  }

  friend bool operator==(const RelationVocabulary& a, const RelationVocabulary& b) {
    return a.labels_ == b.labels_;
  }

 private:
  void reindex() {
    index_.clear();
    for (std::size_t k = 0; k < labels_.size(); ++k) index_[labels_[k]] = k;
  }

  std::vector<std::string> labels_;
  std::map<std::string, std::size_t> index_;
};

inline RelationVocabulary build_relation_vocab(std::span<const RstTree* const> trees) {
  if (trees.empty()) throw EmptyVocabError("cannot build a relation vocabulary from zero trees");
  std::vector<std::string> labels;
  for (const RstTree* t : trees)
    t->for_each_label([&](const RelationLabel& l) { labels.push_back(l.combined()); });
  if (labels.empty()) throw EmptyVocabError("input trees carry no relation labels");
  return RelationVocabulary::from_labels(std::move(labels));
}

inline RelationVocabulary build_relation_vocab(std::span<const RstTree> trees) {
  std::vector<const RstTree*> ptrs;
  for (const auto& t : trees) ptrs.push_back(&t);
  return build_relation_vocab(std::span<const RstTree* const>(ptrs));
}

}  // namespace rstcoh
