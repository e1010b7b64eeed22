#pragma once

#include <string>

namespace qana {

/// Identifies the configuration an evaluation report was produced under.
struct ConfigFingerprint {
  std::string corpus_hash;
  std::string style;
  std::string generator;
  std::string embedding_model;
  std::string policy;
  friend bool operator==(const ConfigFingerprint&, const ConfigFingerprint&) = default;
};

}  // namespace qana
