#include "qana/error.hpp"

namespace qana {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::missing_file: return "MissingFile";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::integrity_error: return "IntegrityError";
    case ErrorCode::duplicate_annotation: return "DuplicateAnnotation";
    case ErrorCode::unknown_topic: return "UnknownTopic";
    case ErrorCode::invalid_template: return "InvalidTemplate";
    case ErrorCode::backend_error: return "BackendError";
    case ErrorCode::empty_generation: return "EmptyGeneration";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::zero_norm: return "ZeroNorm";
    case ErrorCode::missing_embedding: return "MissingEmbedding";
    case ErrorCode::unknown_node: return "UnknownNode";
    case ErrorCode::format_error: return "FormatError";
    case ErrorCode::empty_question_set: return "EmptyQuestionSet";
    case ErrorCode::degenerate_labels: return "DegenerateLabels";
    case ErrorCode::empty_truth: return "EmptyTruth";
    case ErrorCode::mixed_corpora: return "MixedCorpora";
    case ErrorCode::missing_upstream: return "MissingUpstream";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::config_error: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace qana
