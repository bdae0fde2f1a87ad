#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "affordsim/config.hpp"
#include "affordsim/containability.hpp"
#include "affordsim/json_io.hpp"
#include "affordsim/mesh_io.hpp"
#include "affordsim/parallel.hpp"
#include "affordsim/pouring.hpp"

namespace affordsim {

struct ManifestEntry {
  std::string mesh;  // as written in the manifest
  std::filesystem::path resolved;
  bool label = false;
  std::string category;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

/// Manifest is a JSON array of {mesh, label, category}; relative mesh paths
/// resolve against the manifest's directory.
inline DatasetManifest parse_manifest(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_array()) throw Error(ErrorCode::kParse, "manifest must be a JSON array");
  DatasetManifest m;
  std::set<std::filesystem::path> seen;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const Json& e = j[k];
    const std::string where = "manifest entry " + std::to_string(k);
    if (!e.is_object()) throw Error(ErrorCode::kParse, where + " is not an object");
    for (const auto& [key, value] : e.items())
      if (key != "mesh" && key != "label" && key != "category")
        throw Error(ErrorCode::kParse, where + " has unknown key '" + key + "'");
    if (!e.contains("mesh") || !e["mesh"].is_string()) throw Error(ErrorCode::kParse, where + " needs a string 'mesh'");
    if (!e.contains("label") || !e["label"].is_boolean())
      throw Error(ErrorCode::kParse, where + " needs a boolean 'label'");
    if (e.contains("category") && !e["category"].is_string())
      throw Error(ErrorCode::kParse, where + " has a non-string 'category'");

    ManifestEntry entry;
    entry.mesh = e["mesh"].get<std::string>();
    entry.label = e["label"].get<bool>();
    entry.category = e.value("category", std::string());
    const std::filesystem::path p(entry.mesh);
    entry.resolved = (p.is_absolute() ? p : base_dir / p).lexically_normal();
    if (!seen.insert(entry.resolved).second)
      throw Error(ErrorCode::kDuplicatePath, "mesh listed twice: " + entry.mesh);
    if (!std::filesystem::is_regular_file(entry.resolved))
      throw Error(ErrorCode::kMissingMeshFile, "mesh file not found: " + entry.resolved.string());
    m.entries.push_back(std::move(entry));
  }
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, "cannot open manifest " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return parse_manifest(j, path.parent_path());
}

/// Mann-Whitney AUC: share of (positive, negative) pairs where the positive
/// scores higher, ties counting one half.
inline double roc_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::kUsage, "scores and labels differ in length");
  std::vector<double> neg;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (!labels[i]) neg.push_back(scores[i]);
  const std::uint64_t n_neg = neg.size();
  const std::uint64_t n_pos = scores.size() - n_neg;
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorCode::kSingleClassInput, "AUC needs both classes");
  std::sort(neg.begin(), neg.end());

  // Twice the Mann-Whitney U statistic, kept integral so the result is exact.
  std::uint64_t twice_u = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    const auto lo = std::lower_bound(neg.begin(), neg.end(), scores[i]);
    const auto hi = std::upper_bound(lo, neg.end(), scores[i]);
    twice_u += 2 * static_cast<std::uint64_t>(lo - neg.begin()) + static_cast<std::uint64_t>(hi - lo);
  }
  return static_cast<double>(twice_u) / static_cast<double>(2 * n_pos * n_neg);
}

struct EvalEntry {
  std::string mesh;
  std::string category;
  bool label = false;
  double omega = 0.0;
  bool predicted = false;
  int n_in = 0;
  int n_drop = 0;
  /// Empty on success; otherwise the failure message (omega is then 0).
  std::string error;
  std::optional<PourPlan> pour_plan;
  std::string pour_error;
  double runtime_seconds = 0.0;
};

struct Confusion {
  int tp = 0;
  int fp = 0;
  int tn = 0;
  int fn = 0;
};

struct EvalReport {
  std::vector<EvalEntry> entries;
  double accuracy = 0.0;
  /// Absent when the corpus holds a single class.
  std::optional<double> auc;
  Confusion confusion;
  int n_failed = 0;
  double runtime_seconds = 0.0;
};

struct EvalConfig {
  RunConfig run;
  /// Entries evaluated concurrently.
  int jobs = 1;
};

inline EvalEntry evaluate_entry(const ManifestEntry& entry, const RunConfig& run) {
  const auto t0 = std::chrono::steady_clock::now();
  EvalEntry row;
  row.mesh = entry.mesh;
  row.category = entry.category;
  row.label = entry.label;
  try {
    const TriangleMesh mesh = load_mesh(entry.resolved, run.load_options()).mesh;
    const ContainabilityResult r = imagine_containability(mesh, run.containability());
    row.omega = r.omega;
    row.n_in = r.n_in;
    row.n_drop = r.n_drop;
    row.predicted = r.is_open_container;
    if (run.with_pouring && r.is_open_container) {
      PouringConfig pc = run.pouring();
      pc.jobs = 1;
      try {
        row.pour_plan = imagine_pouring(mesh, r, pc);
      } catch (const std::exception& e) {
        row.pour_error = e.what();
      }
    }
  } catch (const std::exception& e) {
    row = EvalEntry{};
    row.mesh = entry.mesh;
    row.category = entry.category;
    row.label = entry.label;
    row.error = e.what();
  }
  row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

/// Accuracy, confusion counts and AUC over finished rows.
inline void summarize(EvalReport& report) {
  report.confusion = {};
  report.n_failed = 0;
  std::vector<double> scores;
  std::vector<bool> labels;
  for (const auto& e : report.entries) {
    if (!e.error.empty()) ++report.n_failed;
    auto& c = report.confusion;
    (e.label ? (e.predicted ? c.tp : c.fn) : (e.predicted ? c.fp : c.tn))++;
    scores.push_back(e.omega);
    labels.push_back(e.label);
  }
  const int total = static_cast<int>(report.entries.size());
  const int correct = report.confusion.tp + report.confusion.tn;
  report.accuracy = total > 0 ? static_cast<double>(correct) / total : 0.0;
  try {
    report.auc = roc_auc(scores, labels);
  } catch (const Error&) {
    report.auc.reset();
  }
}

inline EvalReport evaluate(const DatasetManifest& manifest, const EvalConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.run.validate();
  EvalReport report;
  report.entries.resize(manifest.entries.size());
  parallel_for(manifest.entries.size(), cfg.jobs,
               [&](std::size_t k) { report.entries[k] = evaluate_entry(manifest.entries[k], cfg.run); });
  summarize(report);
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// ---------------------------------------------------------------------------
// Serialization. `timing` = false writes every runtime as 0 so reports are
// byte-identical between runs.

inline double shown_runtime(double seconds, bool timing) { return timing ? round9(seconds) : 0.0; }

inline Json containability_json(const ContainabilityResult& r, const std::string& mesh, double omega_thr,
                                bool timing) {
  Json footprint = Json::array();
  for (const auto& p : r.footprint.points) footprint.push_back(to_json(p));
  return Json{{"mesh", mesh},
              {"omega", round9(r.omega)},
              {"omega_thr", round9(omega_thr)},
              {"n_in", r.n_in},
              {"n_drop", r.n_drop},
              {"n_x", r.grid.n_x},
              {"n_y", r.grid.n_y},
              {"n_z", r.grid.n_z},
              {"scale_s", round9(r.grid.scale_s)},
              {"is_open_container", r.is_open_container},
              {"footprint", std::move(footprint)},
              {"runtime_seconds", shown_runtime(r.runtime_seconds, timing)}};
}

inline Json pour_plan_json(const PourPlan& plan, bool timing) {
  Json table = Json::array(), counts = Json::array(), infeasible = Json::array();
  for (int i = 0; i < kPourAngles; ++i) {
    Json row = Json::array(), crow = Json::array(), irow = Json::array();
    for (int j = 0; j < kPourIndents; ++j) {
      row.push_back(round9(plan.table[i][j]));
      crow.push_back(plan.counts[i][j]);
      irow.push_back(plan.infeasible[i][j]);
    }
    table.push_back(std::move(row));
    counts.push_back(std::move(crow));
    infeasible.push_back(std::move(irow));
  }
  return Json{{"table", std::move(table)},
              {"counts", std::move(counts)},
              {"infeasible", std::move(infeasible)},
              {"i_star", plan.i_star},
              {"j_star", plan.j_star},
              {"theta_star_rad", round9(plan.theta_star)},
              {"p_star", to_json(plan.p_star)},
              {"R_init", rotation_row_major(plan.init_pose.rotation)},
              {"t_init", to_json(plan.init_pose.translation)},
              {"n_pour", plan.n_pour},
              {"gamma0_rad", round9(plan.gamma0)},
              {"pivot_body", to_json(plan.pivot_body)},
              {"plane_E",
               {{"origin", to_json(plan.frame.origin2d)},
                {"axis_x", to_json(plan.frame.axis_x)},
                {"axis_y", to_json(plan.frame.axis_y)},
                {"z", round9(plan.frame.z)}}},
              {"runtime_seconds", shown_runtime(plan.runtime_seconds, timing)}};
}

inline Json report_json(const EvalReport& report, bool timing) {
  Json rows = Json::array();
  for (const auto& e : report.entries) {
    Json row{{"mesh", e.mesh},
             {"category", e.category},
             {"label", e.label},
             {"omega", round9(e.omega)},
             {"predicted", e.predicted},
             {"n_in", e.n_in},
             {"n_drop", e.n_drop},
             {"error", e.error.empty() ? Json(nullptr) : Json(e.error)},
             {"runtime_seconds", shown_runtime(e.runtime_seconds, timing)}};
    if (e.pour_plan) row["pour_plan"] = pour_plan_json(*e.pour_plan, timing);
    if (!e.pour_error.empty()) row["pour_error"] = e.pour_error;
    rows.push_back(std::move(row));
  }
  const auto& c = report.confusion;
  return Json{{"entries", std::move(rows)},
              {"n_entries", report.entries.size()},
              {"n_failed", report.n_failed},
              {"accuracy", round9(report.accuracy)},
              {"auc", report.auc ? Json(round9(*report.auc)) : Json(nullptr)},
              {"confusion", {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}}},
              {"runtime_seconds", shown_runtime(report.runtime_seconds, timing)}};
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "mesh,category,label,omega,predicted,n_in,n_drop,error\n";
  for (const auto& e : report.entries) {
    const Json omega = round9(e.omega);
    out << csv_field(e.mesh) << ',' << csv_field(e.category) << ',' << (e.label ? "true" : "false") << ','
        << omega.dump() << ',' << (e.predicted ? "true" : "false") << ',' << e.n_in << ',' << e.n_drop << ','
        << csv_field(e.error) << '\n';
  }
  return out.str();
}

inline std::string summary_line(const EvalReport& report) {
  char buf[96];
  if (report.auc)
    std::snprintf(buf, sizeof buf, "accuracy=%.4f auc=%.4f", report.accuracy, *report.auc);
  else
    std::snprintf(buf, sizeof buf, "accuracy=%.4f auc=undefined", report.accuracy);
  return buf;
}

}  // namespace affordsim
