#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace qana {

enum class ErrorCode {
  missing_file,
  parse_error,
  integrity_error,
  duplicate_annotation,
  unknown_topic,
  invalid_template,
  backend_error,
  empty_generation,
  dimension_mismatch,
  zero_norm,
  missing_embedding,
  unknown_node,
  format_error,
  empty_question_set,
  degenerate_labels,
  empty_truth,
  mixed_corpora,
  missing_upstream,
  invalid_argument,
  config_error,
};

std::string_view to_string(ErrorCode code);

// Base of every error raised by the library. The code is the stable
// discriminator; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t row, std::size_t column,
             const std::string& what)
      : Error(ErrorCode::parse_error,
              file + ":" + std::to_string(row) + ":" + std::to_string(column) +
                  ": " + what),
        file_(std::move(file)),
        row_(row),
        column_(column) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string file_;
  std::size_t row_;
  std::size_t column_;
};

// Failure of a generation or embedding backend. `subject` names what was
// being processed (an argument id, or a batch index).
class BackendError : public Error {
 public:
  BackendError(std::string subject, const std::string& what)
      : Error(ErrorCode::backend_error,
              subject.empty() ? what : subject + ": " + what),
        subject_(std::move(subject)) {}

  const std::string& subject() const noexcept { return subject_; }

 private:
  std::string subject_;
};

}  // namespace qana
