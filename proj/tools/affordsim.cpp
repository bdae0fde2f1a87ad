// affordsim: containability and pour planning from the command line.
//
//   affordsim contain MESH [options]
//   affordsim pour MESH [options]
//   affordsim eval MANIFEST [--report PATH] [--csv PATH] [--with-pouring] [options]
//   affordsim export-frames MESH --output PATH [--pipeline contain|pour] [--stride N] [options]
//
// Exit status: 0 ok, 2 usage, 3 io, 4 parse, 5 simulation, 6 not a container.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "affordsim/affordsim.hpp"

namespace fs = std::filesystem;
using namespace affordsim;

namespace {

enum Exit { kOk = 0, kUsageExit = 2, kIoExit = 3, kParseExit = 4, kSimExit = 5, kNotContainerExit = 6 };

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidSpec:
      return kUsageExit;
    case ErrorCode::kFileNotFound:
    case ErrorCode::kIo:
    case ErrorCode::kMissingMeshFile:
      return kIoExit;
    case ErrorCode::kParse:
    case ErrorCode::kEmptyMesh:
    case ErrorCode::kZeroArea:
    case ErrorCode::kDuplicatePath:
      return kParseExit;
    case ErrorCode::kNotAContainer:
      return kNotContainerExit;
    default:
      return kSimExit;
  }
}

struct CommonFlags {
  std::string config_path;
  std::optional<double> scale;
  std::optional<double> omega_thr;
  std::optional<int> jobs;
  std::string export_frames;
  bool seedless = false;
  bool timing = false;
  std::string output;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON run configuration");
  cmd->add_option("--scale", f.scale, "Multiply mesh coordinates by this factor at load");
  cmd->add_option("--omega-thr", f.omega_thr, "Containability threshold");
  cmd->add_option("--jobs", f.jobs, "Parallel simulations")->check(CLI::PositiveNumber);
  cmd->add_option("--export-frames", f.export_frames, "Write a JSON-lines frame stream to this path");
  cmd->add_flag("--seedless", f.seedless, "Assert the run uses no random numbers (always true)");
  cmd->add_flag("--timing", f.timing, "Report wall-clock runtimes instead of 0");
  cmd->add_option("-o,--output", f.output, "Write the result JSON here instead of standard output");
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig cfg = f.config_path.empty() ? RunConfig{} : load_run_config(f.config_path);
  if (f.scale) cfg.scale = *f.scale;
  if (f.omega_thr) cfg.omega_thr = *f.omega_thr;
  if (f.jobs) cfg.jobs = *f.jobs;
  cfg.validate();
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

std::ofstream open_frames(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  return out;
}

TriangleMesh load(const std::string& path, const RunConfig& cfg) {
  return load_mesh(path, cfg.load_options()).mesh;
}

int cmd_contain(const std::string& mesh_path, const CommonFlags& f) {
  const RunConfig cfg = resolve_config(f);
  const TriangleMesh mesh = load(mesh_path, cfg);
  ContainabilityConfig cc = cfg.containability();
  std::ofstream frames_out;
  std::optional<FrameWriter> frames;
  if (!f.export_frames.empty()) {
    frames_out = open_frames(f.export_frames);
    frames.emplace(frames_out, cfg.frame_stride);
    cc.frames = &*frames;
  }
  const ContainabilityResult r = imagine_containability(mesh, cc);
  write_text(f.output, dump_canonical(containability_json(r, mesh_path, cfg.omega_thr, f.timing)));
  return kOk;
}

int cmd_pour(const std::string& mesh_path, const CommonFlags& f) {
  const RunConfig cfg = resolve_config(f);
  const TriangleMesh mesh = load(mesh_path, cfg);
  const ContainabilityResult r = imagine_containability(mesh, cfg.containability());
  const PouringConfig pc = cfg.pouring();
  const PourPlan plan = imagine_pouring(mesh, r, pc);
  if (!f.export_frames.empty()) {
    std::ofstream out = open_frames(f.export_frames);
    FrameWriter frames(out, cfg.frame_stride);
    replay_best_pour(mesh, plan, pc, frames);
  }
  Json j = pour_plan_json(plan, f.timing);
  j["mesh"] = mesh_path;
  j["omega"] = round9(r.omega);
  write_text(f.output, dump_canonical(j));
  return kOk;
}

int cmd_eval(const std::string& manifest_path, const CommonFlags& f, const std::string& report_path,
             const std::string& csv_path, bool with_pouring) {
  RunConfig cfg = resolve_config(f);
  if (with_pouring) cfg.with_pouring = true;
  const DatasetManifest manifest = load_manifest(manifest_path);
  if (manifest.entries.empty()) throw Error(ErrorCode::kUsage, "manifest has no entries");
  EvalConfig ec;
  ec.run = cfg;
  ec.jobs = cfg.jobs;
  const EvalReport report = evaluate(manifest, ec);
  const std::string json_path = !f.output.empty() ? f.output : report_path;
  write_text(json_path, dump_canonical(report_json(report, f.timing)));
  if (!csv_path.empty()) write_text(csv_path, report_csv(report));
  if (json_path != "-" && !json_path.empty()) std::cout << summary_line(report) << '\n';
  return kOk;
}

int cmd_export(const std::string& mesh_path, const CommonFlags& f, const std::string& pipeline,
               std::optional<long> stride) {
  RunConfig cfg = resolve_config(f);
  if (stride) cfg.frame_stride = *stride;
  cfg.validate();
  const std::string path = !f.export_frames.empty() ? f.export_frames : f.output;
  if (path.empty()) throw Error(ErrorCode::kUsage, "export-frames needs --output or --export-frames");
  const TriangleMesh mesh = load(mesh_path, cfg);
  std::ofstream out = open_frames(path);
  FrameWriter frames(out, cfg.frame_stride);
  if (pipeline == "contain") {
    ContainabilityConfig cc = cfg.containability();
    cc.frames = &frames;
    imagine_containability(mesh, cc);
  } else {
    const ContainabilityResult r = imagine_containability(mesh, cfg.containability());
    const PouringConfig pc = cfg.pouring();
    replay_best_pour(mesh, imagine_pouring(mesh, r, pc), pc, frames);
  }
  std::cout << "frames=" << frames.records() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle-based containability and pour planning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "affordsim 1.0.0");

  CommonFlags flags;
  std::string target;

  auto* contain = app.add_subcommand("contain", "Estimate open containability of a mesh");
  contain->add_option("mesh", target, "Mesh file (.obj or .ply)")->required();
  add_common(contain, flags);

  auto* pour = app.add_subcommand("pour", "Plan a pour into a mesh");
  pour->add_option("mesh", target, "Mesh file (.obj or .ply)")->required();
  add_common(pour, flags);

  std::string report_path = "report.json";
  std::string csv_path;
  bool with_pouring = false;
  auto* eval = app.add_subcommand("eval", "Evaluate a labelled mesh corpus");
  eval->add_option("manifest", target, "Manifest JSON")->required();
  eval->add_option("--report", report_path, "Report JSON path ('-' for standard output)");
  eval->add_option("--csv", csv_path, "Per-entry CSV path");
  eval->add_flag("--with-pouring", with_pouring, "Plan pours for predicted containers");
  add_common(eval, flags);

  std::string pipeline = "contain";
  std::optional<long> stride;
  auto* exp = app.add_subcommand("export-frames", "Stream simulation frames as JSON lines");
  exp->add_option("mesh", target, "Mesh file (.obj or .ply)")->required();
  exp->add_option("--pipeline", pipeline, "Which simulation to record")
      ->check(CLI::IsMember({"contain", "pour"}));
  exp->add_option("--stride", stride, "Record every Nth step")->check(CLI::PositiveNumber);
  add_common(exp, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageExit;
  }

  try {
    if (*contain) return cmd_contain(target, flags);
    if (*pour) return cmd_pour(target, flags);
    if (*eval) return cmd_eval(target, flags, report_path, csv_path, with_pouring);
    return cmd_export(target, flags, pipeline, stride);
  } catch (const Error& e) {
    std::cerr << "affordsim: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "affordsim: " << e.what() << '\n';
    return kSimExit;
  }
}
