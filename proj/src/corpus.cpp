#include "qana/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "qana/csv.hpp"
#include "qana/error.hpp"
#include "qana/hash.hpp"
#include "qana/text.hpp"

namespace qana {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Stance stance) {
  return stance == Stance::pro ? "pro" : "con";
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::match: return "match";
    case Label::no_match: return "no_match";
    case Label::undecided: return "undecided";
  }
  return "invalid";
}

Stance parse_stance(std::string_view text) {
  if (text == "pro" || text == "1" || text == "1.0" || text == "+1") return Stance::pro;
  if (text == "con" || text == "-1" || text == "-1.0") return Stance::con;
  throw Error(ErrorCode::invalid_argument, "unknown stance '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

std::string LabelIndex::key(std::string_view arg_id, std::string_view kp_id) {
  std::string k;
  k.reserve(arg_id.size() + kp_id.size() + 1);
  k.append(arg_id);
  k.push_back('\x1f');
  k.append(kp_id);
  return k;
}

bool LabelIndex::insert(std::string_view arg_id, std::string_view kp_id, Label label) {
  return labels_.emplace(key(arg_id, kp_id), label).second;
}

Label LabelIndex::get(std::string_view arg_id, std::string_view kp_id) const {
  const auto it = labels_.find(key(arg_id, kp_id));
  return it == labels_.end() ? Label::undecided : it->second;
}

// ---------------------------------------------------------------------------

Corpus::Corpus(std::vector<Topic> topics, std::vector<Argument> arguments,
               std::vector<KeyPoint> key_points,
               std::vector<MatchAnnotation> annotations)
    : topics_(std::move(topics)),
      arguments_(std::move(arguments)),
      key_points_(std::move(key_points)),
      annotations_(std::move(annotations)) {
  for (std::size_t i = 0; i < topics_.size(); ++i) topic_index_.emplace(topics_[i].id, i);
  for (std::size_t i = 0; i < arguments_.size(); ++i) argument_index_.emplace(arguments_[i].id, i);
  for (std::size_t i = 0; i < key_points_.size(); ++i) key_point_index_.emplace(key_points_[i].id, i);
  for (const auto& a : annotations_) labels_.insert(a.arg_id, a.kp_id, a.label);
}

const Topic* Corpus::find_topic(std::string_view id) const {
  const auto it = topic_index_.find(std::string(id));
  return it == topic_index_.end() ? nullptr : &topics_[it->second];
}

const Argument* Corpus::find_argument(std::string_view id) const {
  const auto it = argument_index_.find(std::string(id));
  return it == argument_index_.end() ? nullptr : &arguments_[it->second];
}

const KeyPoint* Corpus::find_key_point(std::string_view id) const {
  const auto it = key_point_index_.find(std::string(id));
  return it == key_point_index_.end() ? nullptr : &key_points_[it->second];
}

std::vector<SliceKey> Corpus::slice_keys() const {
  std::vector<SliceKey> keys;
  for (const auto& t : topics_) {
    keys.push_back({t.id, Stance::pro});
    keys.push_back({t.id, Stance::con});
  }
  return keys;
}

std::optional<CorpusFormat> parse_corpus_format(std::string_view name) {
  if (name == "argkp_csv" || name == "csv") return CorpusFormat::argkp_csv;
  if (name == "jsonl") return CorpusFormat::jsonl;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate(const Corpus& corpus) {
  std::vector<Violation> out;
  auto add = [&](std::string entity, std::string rule) {
    out.push_back({std::move(entity), std::move(rule)});
  };

  std::set<std::string> seen;
  for (const auto& t : corpus.topics()) {
    const std::string entity = "topic " + t.id;
    if (t.id.empty()) add(entity, "topic id is empty");
    if (!seen.insert(t.id).second) add(entity, "duplicate topic id");
    if (t.text.empty()) add(entity, "topic text is empty");
  }

  auto check_unit = [&](const std::string& kind, const std::string& id,
                        const std::string& topic_id, Stance stance,
                        const std::string& text, std::set<std::string>& ids) {
    const std::string entity = kind + " " + id;
    if (id.empty()) add(entity, kind + " id is empty");
    if (!ids.insert(id).second) add(entity, "duplicate " + kind + " id");
    if (text.empty()) add(entity, kind + " text is empty");
    if (corpus.find_topic(topic_id) == nullptr) {
      add(entity, "unknown topic '" + topic_id + "'");
    }
    if (stance != Stance::pro && stance != Stance::con) add(entity, "invalid stance");
  };

  std::set<std::string> arg_ids;
  for (const auto& a : corpus.arguments()) {
    check_unit("argument", a.id, a.topic_id, a.stance, a.text, arg_ids);
  }
  std::set<std::string> kp_ids;
  for (const auto& k : corpus.key_points()) {
    check_unit("key_point", k.id, k.topic_id, k.stance, k.text, kp_ids);
  }

  std::set<std::pair<std::string, std::string>> pairs;
  for (std::size_t row = 0; row < corpus.annotations().size(); ++row) {
    const auto& m = corpus.annotations()[row];
    const std::string entity =
        "annotation #" + std::to_string(row) + " (" + m.arg_id + ", " + m.kp_id + ")";
    const Argument* arg = corpus.find_argument(m.arg_id);
    const KeyPoint* kp = corpus.find_key_point(m.kp_id);
    if (arg == nullptr) add(entity, "unknown argument '" + m.arg_id + "'");
    if (kp == nullptr) add(entity, "unknown key point '" + m.kp_id + "'");
    if (m.label != Label::match && m.label != Label::no_match &&
        m.label != Label::undecided) {
      add(entity, "label outside {match, no_match, undecided}");
    }
    if (!pairs.emplace(m.arg_id, m.kp_id).second) add(entity, "duplicate annotation");
    if (arg != nullptr && kp != nullptr &&
        (arg->topic_id != kp->topic_id || arg->stance != kp->stance)) {
      add(entity, "argument and key point differ in topic or stance");
    }
  }
  return out;
}

namespace {

void enforce(const Corpus& corpus) {
  const auto violations = validate(corpus);
  for (const auto& v : violations) {
    if (v.rule == "duplicate annotation") {
      throw Error(ErrorCode::duplicate_annotation, v.entity + ": " + v.rule);
    }
  }
  if (!violations.empty()) {
    throw Error(ErrorCode::integrity_error,
                violations.front().entity + ": " + violations.front().rule +
                    (violations.size() > 1
                         ? " (+" + std::to_string(violations.size() - 1) + " more)"
                         : std::string()));
  }
}

// ---------------------------------------------------------------------------
// ArgKP CSV layout

struct CsvTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<csv::Row> rows;

  std::size_t column(const std::string& col) const {
    const auto it = std::find(header.begin(), header.end(), col);
    if (it == header.end()) {
      throw ParseError(name, 1, 0, "missing column '" + col + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  }
};

CsvTable read_table(const fs::path& file) {
  if (!fs::exists(file)) {
    throw Error(ErrorCode::missing_file, "missing file " + file.string());
  }
  CsvTable t;
  t.name = file.filename().string();
  auto rows = csv::parse(read_file(file), t.name);
  std::erase_if(rows, [](const csv::Row& r) {
    return r.fields.size() == 1 && trim(r.fields[0]).empty();
  });
  if (rows.empty()) throw ParseError(t.name, 1, 0, "missing header row");
  for (auto& h : rows.front().fields) t.header.emplace_back(trim(h));
  rows.erase(rows.begin());
  for (const auto& r : rows) {
    if (r.fields.size() != t.header.size()) {
      throw ParseError(t.name, r.line, r.fields.size(),
                       "expected " + std::to_string(t.header.size()) + " fields, got " +
                           std::to_string(r.fields.size()));
    }
  }
  t.rows = std::move(rows);
  return t;
}

Stance csv_stance(const CsvTable& t, const csv::Row& r, std::size_t col) {
  try {
    return parse_stance(trim(r.fields[col]));
  } catch (const Error&) {
    throw ParseError(t.name, r.line, col + 1, "stance must be 1 or -1");
  }
}

std::string csv_text(const CsvTable& t, const csv::Row& r, std::size_t col) {
  try {
    return normalize_text(r.fields[col]);
  } catch (const Error& e) {
    throw ParseError(t.name, r.line, col + 1, e.what());
  }
}

Corpus load_csv(const fs::path& dir, std::string_view split) {
  auto file = [&](std::string base) {
    if (!split.empty()) base += "_" + std::string(split);
    return dir / (base + ".csv");
  };
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::missing_file, "corpus directory not found: " + dir.string());
  }
  const CsvTable args = read_table(file("arguments"));
  const CsvTable kps = read_table(file("key_points"));
  const CsvTable labels = read_table(file("labels"));

  std::vector<Topic> topics;
  std::set<std::string> topic_seen;
  auto note_topic = [&](const std::string& text) {
    if (topic_seen.insert(text).second) topics.push_back({text, text});
  };

  std::vector<Argument> arguments;
  {
    const auto c_id = args.column("arg_id"), c_text = args.column("argument"),
               c_topic = args.column("topic"), c_stance = args.column("stance");
    for (const auto& r : args.rows) {
      Argument a{csv_text(args, r, c_id), csv_text(args, r, c_topic),
                 csv_stance(args, r, c_stance), csv_text(args, r, c_text)};
      note_topic(a.topic_id);
      arguments.push_back(std::move(a));
    }
  }
  std::vector<KeyPoint> key_points;
  {
    const auto c_id = kps.column("key_point_id"), c_text = kps.column("key_point"),
               c_topic = kps.column("topic"), c_stance = kps.column("stance");
    for (const auto& r : kps.rows) {
      KeyPoint k{csv_text(kps, r, c_id), csv_text(kps, r, c_topic),
                 csv_stance(kps, r, c_stance), csv_text(kps, r, c_text)};
      note_topic(k.topic_id);
      key_points.push_back(std::move(k));
    }
  }
  std::vector<MatchAnnotation> annotations;
  {
    const auto c_arg = labels.column("arg_id"), c_kp = labels.column("key_point_id"),
               c_label = labels.column("label");
    for (const auto& r : labels.rows) {
      const std::string_view raw = trim(r.fields[c_label]);
      Label label;
      if (raw == "1" || raw == "1.0") {
        label = Label::match;
      } else if (raw == "0" || raw == "0.0") {
        label = Label::no_match;
      } else {
        throw ParseError(labels.name, r.line, c_label + 1,
                         "label must be 1 or 0, got '" + std::string(raw) + "'");
      }
      annotations.push_back(
          {csv_text(labels, r, c_arg), csv_text(labels, r, c_kp), label});
    }
  }
  return Corpus(std::move(topics), std::move(arguments), std::move(key_points),
                std::move(annotations));
}

void save_csv(const Corpus& corpus, const fs::path& dir) {
  fs::create_directories(dir);
  auto topic_text = [&](const std::string& id) {
    const Topic* t = corpus.find_topic(id);
    return t ? t->text : id;
  };
  auto stance = [](Stance s) { return std::string(s == Stance::pro ? "1" : "-1"); };

  std::string out = "arg_id,argument,topic,stance\n";
  for (const auto& a : corpus.arguments()) {
    out += csv::join({a.id, a.text, topic_text(a.topic_id), stance(a.stance)}) + "\n";
  }
  write_file(dir / "arguments.csv", out);

  out = "key_point_id,key_point,topic,stance\n";
  for (const auto& k : corpus.key_points()) {
    out += csv::join({k.id, k.text, topic_text(k.topic_id), stance(k.stance)}) + "\n";
  }
  write_file(dir / "key_points.csv", out);

  out = "arg_id,key_point_id,label\n";
  for (const auto& m : corpus.annotations()) {
    if (m.label == Label::undecided) continue;
    out += csv::join({m.arg_id, m.kp_id, m.label == Label::match ? "1" : "0"}) + "\n";
  }
  write_file(dir / "labels.csv", out);
}

// ---------------------------------------------------------------------------
// JSONL layout: one record per line, discriminated by "type".

Label parse_label_name(std::string_view s) {
  if (s == "match") return Label::match;
  if (s == "no_match") return Label::no_match;
  if (s == "undecided") return Label::undecided;
  throw Error(ErrorCode::invalid_argument, "unknown label '" + std::string(s) + "'");
}

Corpus load_jsonl(const fs::path& file) {
  if (!fs::exists(file)) {
    throw Error(ErrorCode::missing_file, "missing file " + file.string());
  }
  const std::string name = file.filename().string();
  const std::string content = read_file(file);

  std::vector<Topic> topics;
  std::vector<Argument> arguments;
  std::vector<KeyPoint> key_points;
  std::vector<MatchAnnotation> annotations;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    const std::string_view line = trim(std::string_view(content).substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(name, line_no, e.byte, "invalid JSON");
    }
    try {
      const std::string type = rec.at("type").get<std::string>();
      auto text = [&](const char* key) { return normalize_text(rec.at(key).get<std::string>()); };
      if (type == "topic") {
        topics.push_back({text("topic_id"), text("text")});
      } else if (type == "argument") {
        arguments.push_back({text("arg_id"), text("topic_id"),
                             parse_stance(rec.at("stance").get<std::string>()), text("text")});
      } else if (type == "key_point") {
        key_points.push_back({text("kp_id"), text("topic_id"),
                              parse_stance(rec.at("stance").get<std::string>()), text("text")});
      } else if (type == "label") {
        annotations.push_back({text("arg_id"), text("kp_id"),
                               parse_label_name(rec.at("label").get<std::string>())});
      } else {
        throw Error(ErrorCode::invalid_argument, "unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(name, line_no, 1, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(name, line_no, 1, e.what());
    }
  }
  return Corpus(std::move(topics), std::move(arguments), std::move(key_points),
                std::move(annotations));
}

}  // namespace

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  auto emit = [&](const json& j) { out += j.dump() + "\n"; };
  for (const auto& t : corpus.topics()) {
    emit({{"type", "topic"}, {"topic_id", t.id}, {"text", t.text}});
  }
  for (const auto& a : corpus.arguments()) {
    emit({{"type", "argument"}, {"arg_id", a.id}, {"topic_id", a.topic_id},
          {"stance", to_string(a.stance)}, {"text", a.text}});
  }
  for (const auto& k : corpus.key_points()) {
    emit({{"type", "key_point"}, {"kp_id", k.id}, {"topic_id", k.topic_id},
          {"stance", to_string(k.stance)}, {"text", k.text}});
  }
  for (const auto& m : corpus.annotations()) {
    emit({{"type", "label"}, {"arg_id", m.arg_id}, {"kp_id", m.kp_id},
          {"label", to_string(m.label)}});
  }
  return out;
}

Corpus load_corpus(const fs::path& path, CorpusFormat format, std::string_view split) {
  Corpus corpus = format == CorpusFormat::argkp_csv ? load_csv(path, split) : load_jsonl(path);
  enforce(corpus);
  return corpus;
}

void save_corpus(const Corpus& corpus, const fs::path& path, CorpusFormat format) {
  if (format == CorpusFormat::argkp_csv) {
    save_csv(corpus, path);
  } else {
    write_file(path, to_jsonl(corpus));
  }
}

Corpus slice(const Corpus& corpus, std::string_view topic_id, Stance stance) {
  const Topic* topic = corpus.find_topic(topic_id);
  if (topic == nullptr) {
    throw Error(ErrorCode::unknown_topic, "unknown topic '" + std::string(topic_id) + "'");
  }
  std::vector<Argument> arguments;
  std::set<std::string> arg_ids;
  for (const auto& a : corpus.arguments()) {
    if (a.topic_id == topic_id && a.stance == stance) {
      arguments.push_back(a);
      arg_ids.insert(a.id);
    }
  }
  std::vector<KeyPoint> key_points;
  std::set<std::string> kp_ids;
  for (const auto& k : corpus.key_points()) {
    if (k.topic_id == topic_id && k.stance == stance) {
      key_points.push_back(k);
      kp_ids.insert(k.id);
    }
  }
  std::vector<MatchAnnotation> annotations;
  for (const auto& m : corpus.annotations()) {
    if (arg_ids.contains(m.arg_id) && kp_ids.contains(m.kp_id)) annotations.push_back(m);
  }
  return Corpus({*topic}, std::move(arguments), std::move(key_points), std::move(annotations));
}

std::string corpus_hash(const Corpus& corpus) { return sha256_hex(to_jsonl(corpus)); }

}  // namespace qana
