#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qana {

enum class Stance { pro, con };
enum class Label { match, no_match, undecided };

std::string_view to_string(Stance stance);
std::string_view to_string(Label label);
Stance parse_stance(std::string_view text);

struct Topic {
  std::string id;
  std::string text;
  friend bool operator==(const Topic&, const Topic&) = default;
};

struct Argument {
  std::string id;
  std::string topic_id;
  Stance stance = Stance::pro;
  std::string text;
  friend bool operator==(const Argument&, const Argument&) = default;
};

struct KeyPoint {
  std::string id;
  std::string topic_id;
  Stance stance = Stance::pro;
  std::string text;
  friend bool operator==(const KeyPoint&, const KeyPoint&) = default;
};

struct MatchAnnotation {
  std::string arg_id;
  std::string kp_id;
  Label label = Label::undecided;
  friend bool operator==(const MatchAnnotation&, const MatchAnnotation&) = default;
};

/// (argument, key point) -> label lookup. Pairs never inserted read as
/// undecided; the first insertion of a pair wins.
class LabelIndex {
 public:
  /// Returns false if the pair was already present.
  bool insert(std::string_view arg_id, std::string_view kp_id, Label label);
  Label get(std::string_view arg_id, std::string_view kp_id) const;
  std::size_t size() const { return labels_.size(); }

 private:
  static std::string key(std::string_view arg_id, std::string_view kp_id);
  std::unordered_map<std::string, Label> labels_;
};

struct SliceKey {
  std::string topic_id;
  Stance stance = Stance::pro;
  friend bool operator==(const SliceKey&, const SliceKey&) = default;
  friend auto operator<=>(const SliceKey&, const SliceKey&) = default;
};

/// Topics, arguments, key points and match annotations. Construction only
/// indexes the collections; call validate() to check the invariants.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<Topic> topics, std::vector<Argument> arguments,
         std::vector<KeyPoint> key_points, std::vector<MatchAnnotation> annotations);

  const std::vector<Topic>& topics() const { return topics_; }
  const std::vector<Argument>& arguments() const { return arguments_; }
  const std::vector<KeyPoint>& key_points() const { return key_points_; }
  const std::vector<MatchAnnotation>& annotations() const { return annotations_; }
  const LabelIndex& labels() const { return labels_; }

  const Topic* find_topic(std::string_view id) const;
  const Argument* find_argument(std::string_view id) const;
  const KeyPoint* find_key_point(std::string_view id) const;

  /// Stored label, or undecided when the pair was never annotated.
  Label effective_label(std::string_view arg_id, std::string_view kp_id) const {
    return labels_.get(arg_id, kp_id);
  }

  /// Every (topic, stance) pair in topic order, pro before con.
  std::vector<SliceKey> slice_keys() const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.topics_ == b.topics_ && a.arguments_ == b.arguments_ &&
           a.key_points_ == b.key_points_ && a.annotations_ == b.annotations_;
  }

 private:
  std::vector<Topic> topics_;
  std::vector<Argument> arguments_;
  std::vector<KeyPoint> key_points_;
  std::vector<MatchAnnotation> annotations_;
  std::unordered_map<std::string, std::size_t> topic_index_;
  std::unordered_map<std::string, std::size_t> argument_index_;
  std::unordered_map<std::string, std::size_t> key_point_index_;
  LabelIndex labels_;
};

enum class CorpusFormat { argkp_csv, jsonl };

std::optional<CorpusFormat> parse_corpus_format(std::string_view name);

/// Loads a corpus. For argkp_csv, `path` is a directory holding
/// arguments.csv, key_points.csv and labels.csv (or `<name>_<split>.csv` when
/// `split` is given). For jsonl, `path` is a single file.
///
/// Text fields are NFC-normalized and trimmed. Throws MissingFile,
/// ParseError, IntegrityError or DuplicateAnnotation.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   std::string_view split = {});

/// Writes `corpus` in the given format. The CSV layout cannot carry explicit
/// undecided annotations; they are omitted (absent rows read back as
/// undecided).
void save_corpus(const Corpus& corpus, const std::filesystem::path& path,
                 CorpusFormat format);

std::string to_jsonl(const Corpus& corpus);

/// Sub-corpus restricted to one topic and stance. Throws UnknownTopic.
Corpus slice(const Corpus& corpus, std::string_view topic_id, Stance stance);

struct Violation {
  std::string entity;
  std::string rule;
};

std::vector<Violation> validate(const Corpus& corpus);

/// Content digest of the canonical JSONL serialization.
std::string corpus_hash(const Corpus& corpus);

}  // namespace qana
