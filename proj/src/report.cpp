#include "qana/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "qana/csv.hpp"
#include "qana/error.hpp"
#include "qana/text.hpp"

namespace qana {

using nlohmann::json;

namespace {

json fingerprint_json(const ConfigFingerprint& f) {
  return {{"corpus_hash", f.corpus_hash}, {"style", f.style},
          {"generator", f.generator},     {"embedding_model", f.embedding_model},
          {"policy", f.policy}};
}

ConfigFingerprint fingerprint_from(const json& j) {
  return {j.at("corpus_hash").get<std::string>(), j.at("style").get<std::string>(),
          j.at("generator").get<std::string>(), j.at("embedding_model").get<std::string>(),
          j.at("policy").get<std::string>()};
}

json slice_json(const SliceKey& k) {
  return {{"topic_id", k.topic_id}, {"stance", to_string(k.stance)}};
}

SliceKey slice_from(const json& j) {
  return {j.at("topic_id").get<std::string>(), parse_stance(j.at("stance").get<std::string>())};
}

// Non-finite numbers (an unreachable cut) are stored as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

double number_from(const json& j) {
  if (j.is_string()) {
    return j.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                         : -std::numeric_limits<double>::infinity();
  }
  return j.get<double>();
}

std::string row(const std::vector<std::string>& fields) { return csv::join(fields) + "\n"; }

}  // namespace

json to_json(const RunManifest& m) {
  return {{"run_id", m.run_id},
          {"corpus_hash", m.corpus_hash},
          {"style", m.style},
          {"generator", m.generator},
          {"embedding", m.embedding},
          {"policy", m.policy},
          {"measures", m.measures},
          {"template_version", m.template_version},
          {"n_max", m.n_max},
          {"truncation", m.truncation},
          {"seed", m.seed},
          {"timestamps", m.finished_at.empty()
                             ? json{{"started_at", m.started_at}}
                             : json{{"started_at", m.started_at}, {"finished_at", m.finished_at}}},
          {"versions", m.versions}};
}

json to_json(const KpmReport& r) {
  json slices = json::array();
  for (const auto& s : r.per_slice) {
    json j = slice_json(s.slice);
    j["ap"] = s.ap;
    j["n_args"] = s.n_args;
    j["n_kps"] = s.n_kps;
    slices.push_back(j);
  }
  json excluded = json::array();
  for (const auto& k : r.excluded) excluded.push_back(slice_json(k));
  return {{"kind", "kpm"},
          {"overall_map", r.overall_map},
          {"truncation", r.truncation},
          {"per_slice", slices},
          {"excluded", excluded},
          {"fallback_args", r.fallback_args},
          {"fingerprint", fingerprint_json(r.fingerprint)}};
}

json to_json(const KpgReport& r) {
  json slices = json::array();
  for (const auto& c : r.per_slice) {
    json j = slice_json(c.slice);
    j["coverage"] = c.coverage;
    j["predicted"] = c.predicted;
    slices.push_back(j);
  }
  json excluded = json::array();
  for (const auto& k : r.excluded) excluded.push_back(slice_json(k));
  return {{"kind", "kpg"},
          {"measure", r.measure.name()},
          {"weighted_degree", r.measure.weighted_degree},
          {"pagerank",
           {{"damping", r.measure.pagerank.damping},
            {"tolerance", r.measure.pagerank.tolerance},
            {"max_iters", r.measure.pagerank.max_iters}}},
          {"threshold",
           {{"theta", number(r.threshold.theta)},
            {"tpr", r.threshold.tpr},
            {"fpr", r.threshold.fpr},
            {"source", r.threshold.source}}},
          {"n_max", r.n_max},
          {"curve", r.curve},
          {"per_slice", slices},
          {"excluded", excluded},
          {"fingerprint", fingerprint_json(r.fingerprint)}};
}

KpmReport kpm_report_from_json(const json& j) {
  try {
    KpmReport r;
    r.overall_map = j.at("overall_map").get<double>();
    r.truncation = j.at("truncation").get<double>();
    for (const auto& s : j.at("per_slice")) {
      r.per_slice.push_back({slice_from(s), s.at("ap").get<double>(),
                             s.at("n_args").get<std::size_t>(), s.at("n_kps").get<std::size_t>()});
    }
    for (const auto& k : j.at("excluded")) r.excluded.push_back(slice_from(k));
    r.fallback_args = j.at("fallback_args").get<std::vector<std::string>>();
    r.fingerprint = fingerprint_from(j.at("fingerprint"));
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format_error, std::string("malformed KPM report: ") + e.what());
  }
}

KpgReport kpg_report_from_json(const json& j) {
  try {
    KpgReport r;
    const auto kind = parse_centrality(j.at("measure").get<std::string>());
    if (!kind) throw Error(ErrorCode::format_error, "unknown centrality measure in report");
    r.measure.kind = *kind;
    r.measure.weighted_degree = j.at("weighted_degree").get<bool>();
    r.measure.pagerank.damping = j.at("pagerank").at("damping").get<double>();
    r.measure.pagerank.tolerance = j.at("pagerank").at("tolerance").get<double>();
    r.measure.pagerank.max_iters = j.at("pagerank").at("max_iters").get<int>();
    const json& t = j.at("threshold");
    r.threshold = {number_from(t.at("theta")), t.at("tpr").get<double>(), t.at("fpr").get<double>(),
                   t.at("source").get<std::string>()};
    r.n_max = j.at("n_max").get<std::size_t>();
    r.curve = j.at("curve").get<std::vector<double>>();
    for (const auto& s : j.at("per_slice")) {
      r.per_slice.push_back({slice_from(s), s.at("coverage").get<std::vector<double>>(),
                             s.at("predicted").get<std::vector<std::string>>()});
    }
    for (const auto& k : j.at("excluded")) r.excluded.push_back(slice_from(k));
    r.fingerprint = fingerprint_from(j.at("fingerprint"));
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format_error, std::string("malformed KPG report: ") + e.what());
  }
}

GridFiles emit_grid_report(std::span<const EvalReport> reports,
                           const std::filesystem::path& out_dir) {
  std::vector<const KpmReport*> kpm;
  std::vector<const KpgReport*> kpg;
  const ConfigFingerprint* first = nullptr;
  for (const auto& r : reports) {
    const ConfigFingerprint& f =
        std::visit([](const auto& rep) -> const ConfigFingerprint& { return rep.fingerprint; }, r);
    if (first == nullptr) {
      first = &f;
    } else if (f.corpus_hash != first->corpus_hash) {
      throw Error(ErrorCode::mixed_corpora, "reports come from different corpora (" +
                                                first->corpus_hash + " vs " + f.corpus_hash + ")");
    }
    if (const auto* p = std::get_if<KpmReport>(&r)) kpm.push_back(p);
    if (const auto* p = std::get_if<KpgReport>(&r)) kpg.push_back(p);
  }

  auto config_key = [](const ConfigFingerprint& f) {
    return std::tie(f.style, f.generator, f.embedding_model, f.policy);
  };
  std::stable_sort(kpm.begin(), kpm.end(), [&](const KpmReport* a, const KpmReport* b) {
    return config_key(a->fingerprint) < config_key(b->fingerprint);
  });
  std::stable_sort(kpg.begin(), kpg.end(), [&](const KpgReport* a, const KpgReport* b) {
    const auto ka = config_key(a->fingerprint);
    const auto kb = config_key(b->fingerprint);
    if (ka != kb) return ka < kb;
    return a->measure.name() < b->measure.name();
  });

  std::string kpm_csv =
      row({"style", "generator", "embedding", "policy", "truncation", "overall_map", "n_slices"});
  for (const auto* r : kpm) {
    const auto& f = r->fingerprint;
    kpm_csv += row({f.style, f.generator, f.embedding_model, f.policy,
                    format_number(r->truncation), format_number(r->overall_map),
                    std::to_string(r->per_slice.size())});
  }
  std::string kpg_csv = row({"style", "generator", "embedding", "policy", "measure", "theta",
                             "n_max", "coverage_at_n_max", "mean_coverage"});
  for (const auto* r : kpg) {
    const auto& f = r->fingerprint;
    const double last = r->curve.empty() ? 0.0 : r->curve.back();
    const double mean =
        r->curve.empty()
            ? 0.0
            : std::accumulate(r->curve.begin(), r->curve.end(), 0.0) /
                  static_cast<double>(r->curve.size());
    kpg_csv += row({f.style, f.generator, f.embedding_model, f.policy, r->measure.name(),
                    format_number(r->threshold.theta), std::to_string(r->n_max),
                    format_number(last), format_number(mean)});
  }
  GridFiles files{out_dir / "kpm_grid.csv", out_dir / "kpg_grid.csv"};
  write_file(files.kpm_csv, kpm_csv);
  write_file(files.kpg_csv, kpg_csv);
  return files;
}

std::string render_plot_data(const KpmReport& report) {
  std::string out = row({"topic", "stance", "ap", "n_args", "n_kps"});
  for (const auto& s : report.per_slice) {
    out += row({s.slice.topic_id, std::string(to_string(s.slice.stance)), format_number(s.ap),
                std::to_string(s.n_args), std::to_string(s.n_kps)});
  }
  return out;
}

std::string render_plot_data(std::span<const KpgReport> reports) {
  std::string out = row({"measure", "style", "n", "coverage"});
  for (const auto& r : reports) {
    for (std::size_t n = 0; n < r.curve.size(); ++n) {
      out += row({r.measure.name(), r.fingerprint.style, std::to_string(n + 1),
                  format_number(r.curve[n])});
    }
  }
  return out;
}

std::string render_centrality_scores(std::span<const SliceScores> slices) {
  std::string out = row({"node_id", "role", "measure", "score", "rank"});
  for (const auto& s : slices) {
    const QaNetwork& net = *s.network;
    for (const auto& scores : s.scores) {
      std::vector<std::size_t> order(net.node_count());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double sa = scores.values[static_cast<Eigen::Index>(a)];
        const double sb = scores.values[static_cast<Eigen::Index>(b)];
        if (sa != sb) return sa > sb;
        return net.node_id(a) < net.node_id(b);
      });
      for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const std::size_t i = order[rank];
        out += row({net.node_id(i), net.role(i) == NodeRole::question ? "question" : "argument",
                    scores.measure.name(),
                    format_number(scores.values[static_cast<Eigen::Index>(i)]),
                    std::to_string(rank + 1)});
      }
    }
  }
  return out;
}

}  // namespace qana
