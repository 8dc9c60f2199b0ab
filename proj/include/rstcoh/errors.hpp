#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rstcoh {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the command-line front end.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define RSTCOH_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

RSTCOH_DEFINE_ERROR(DimensionError)
RSTCOH_DEFINE_ERROR(ShapeError)
RSTCOH_DEFINE_ERROR(StateError)
RSTCOH_DEFINE_ERROR(EmptyVocabError)
RSTCOH_DEFINE_ERROR(ValidationError)
RSTCOH_DEFINE_ERROR(DegenerateTreeError)
RSTCOH_DEFINE_ERROR(FormatError)
RSTCOH_DEFINE_ERROR(EmptyDocumentError)
RSTCOH_DEFINE_ERROR(DuplicateIdError)
RSTCOH_DEFINE_ERROR(ConfigError)
RSTCOH_DEFINE_ERROR(EmptyEvaluationError)

#undef RSTCOH_DEFINE_ERROR

/// Syntax error in a serialized tree; `offset` is the byte position of the
/// offending token.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error("ParseError", what + " at byte " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Malformed input record; `line` is 1-based.
class IngestError : public Error {
 public:
  IngestError(std::size_t line, const std::string& what)
      : Error("IngestError", what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class TrainingDiverged : public Error {
 public:
  explicit TrainingDiverged(std::string document_id)
      : Error("TrainingDiverged",
              "non-finite loss on document '" + document_id + "'"),
        document_id_(std::move(document_id)) {}
  const std::string& document_id() const noexcept { return document_id_; }

 private:
  std::string document_id_;
};

}  // namespace rstcoh
