// occfof: pipeline driver and occlusion sweep harness.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "occfof/completion.hpp"
#include "occfof/errors.hpp"
#include "occfof/harness.hpp"
#include "occfof/metrics.hpp"
#include "occfof/occlusion.hpp"
#include "occfof/oracles.hpp"
#include "occfof/render.hpp"
#include "occfof/shapes.hpp"
#include "occfof/surface.hpp"
#include "occfof/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace occfof;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitSelftest = 4;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("OAHUMAN_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("OAHUMAN_SEED is not an unsigned integer: '{}'", env));
    }
  }
  return 0;
}

struct FrameOptions {
  int resolution = 128;
  double half_extent = 1.0;
  std::vector<double> center{0.0, 0.0, 0.0};

  void add(CLI::App* app) {
    app->add_option("--resolution", resolution, "Image width and height in pixels")
        ->check(CLI::Range(1, 8192));
    app->add_option("--half-extent", half_extent, "Half edge length of the scene cube")
        ->check(CLI::PositiveNumber);
    app->add_option("--center", center, "Scene cube center x y z")->expected(3);
  }

  OrthoFrame frame() const {
    OrthoFrame f;
    f.center = Vec3(center[0], center[1], center[2]);
    f.half_extent = half_extent;
    f.width = resolution;
    f.height = resolution;
    return f;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier occupancy field toolkit and occlusion sweep harness"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  // shapes
  auto* shapes_cmd = app.add_subcommand("shapes", "Write a procedural watertight mesh");
  std::string shape_kind = "sphere";
  fs::path shape_out;
  double radius = 0.6, major = 0.5, minor = 0.2, side = 1.0, spacing = 0.01;
  int subdivisions = 4;
  shapes_cmd->add_option("kind", shape_kind, "sphere, torus, capsule_figure or cube")
      ->check(CLI::IsMember({"sphere", "torus", "capsule_figure", "cube"}));
  shapes_cmd->add_option("-o,--out", shape_out, "Output OBJ")->required();
  shapes_cmd->add_option("--radius", radius, "Sphere radius")->check(CLI::PositiveNumber);
  shapes_cmd->add_option("--subdivisions", subdivisions, "Icosphere subdivisions")
      ->check(CLI::Range(0, 8));
  shapes_cmd->add_option("--major", major, "Torus ring radius")->check(CLI::PositiveNumber);
  shapes_cmd->add_option("--minor", minor, "Torus tube radius")->check(CLI::PositiveNumber);
  shapes_cmd->add_option("--side", side, "Cube edge length")->check(CLI::PositiveNumber);
  shapes_cmd->add_option("--spacing", spacing, "Capsule figure lattice spacing")
      ->check(CLI::PositiveNumber);

  // encode
  auto* encode_cmd = app.add_subcommand("encode", "Encode a watertight mesh into a field");
  fs::path encode_mesh, encode_out;
  int order = 15;
  FrameOptions encode_frame;
  encode_cmd->add_option("mesh", encode_mesh, "Input OBJ")->required();
  encode_cmd->add_option("-o,--out", encode_out, "Output tensor file")->required();
  encode_cmd->add_option("-N,--order", order, "Fourier order")->check(CLI::Range(0, 256));
  encode_frame.add(encode_cmd);

  // reconstruct
  auto* recon_cmd = app.add_subcommand("reconstruct", "Decode a field and extract its surface");
  fs::path recon_field, recon_out;
  int grid_res = 128;
  FrameOptions recon_frame;
  recon_cmd->add_option("field", recon_field, "Input tensor file")->required();
  recon_cmd->add_option("-o,--out", recon_out, "Output OBJ")->required();
  recon_cmd->add_option("--grid-res", grid_res, "Depth samples per ray")->check(CLI::Range(2, 4096));
  recon_frame.add(recon_cmd);

  // occlude
  auto* occlude_cmd = app.add_subcommand("occlude", "Synthesize an occluder and corrupt a field");
  fs::path occ_field, occ_body, occ_out, occ_visible, occ_occluded;
  double ratio = 0.4, sigma = 0.1;
  std::optional<std::uint64_t> occ_seed;
  std::string policy = "zero", occ_kind = "rectangle";
  occlude_cmd->add_option("field", occ_field, "Input tensor file")->required();
  occlude_cmd->add_option("--body", occ_body, "Body silhouette PGM (default: field support)");
  occlude_cmd->add_option("--ratio", ratio, "Target occluded fraction of the body")
      ->check(CLI::Range(0.0, 0.95));
  occlude_cmd->add_option("--seed", occ_seed, "Placement seed (default OAHUMAN_SEED or 0)");
  occlude_cmd->add_option("--kind", occ_kind, "Occluder shape")
      ->check(CLI::IsMember({"rectangle", "ellipse", "capsule"}));
  occlude_cmd->add_option("--policy", policy, "zero or noise")->check(CLI::IsMember({"zero", "noise"}));
  occlude_cmd->add_option("--sigma", sigma, "Noise deviation")->check(CLI::NonNegativeNumber);
  occlude_cmd->add_option("-o,--out", occ_out, "Output tensor file")->required();
  occlude_cmd->add_option("--visible", occ_visible, "Output visibility PGM")->required();
  occlude_cmd->add_option("--occluded", occ_occluded, "Output occlusion PGM")->required();

  // blend
  auto* blend_cmd = app.add_subcommand("blend", "Visibility-guided blend of observed and prior fields");
  fs::path blend_obs, blend_prior, blend_visible, blend_occluded, blend_out;
  double feather = 3.0;
  blend_cmd->add_option("observed", blend_obs, "Observed field")->required();
  blend_cmd->add_option("prior", blend_prior, "Prior field")->required();
  blend_cmd->add_option("--visible", blend_visible, "Visibility PGM")->required();
  blend_cmd->add_option("--occluded", blend_occluded, "Occlusion PGM")->required();
  blend_cmd->add_option("--feather", feather, "Feather width in pixels")->check(CLI::NonNegativeNumber);
  blend_cmd->add_option("-o,--out", blend_out, "Output tensor file")->required();

  // render-normals
  auto* render_cmd = app.add_subcommand("render-normals", "Render front and back normal maps");
  fs::path render_mesh, render_front, render_back;
  bool render_png = false;
  FrameOptions render_frame;
  render_cmd->add_option("mesh", render_mesh, "Input OBJ")->required();
  render_cmd->add_option("--front", render_front, "Front view PFM")->required();
  render_cmd->add_option("--back", render_back, "Back view PFM")->required();
  render_cmd->add_flag("--png", render_png, "Also write 16-bit PNG encodings next to the PFMs");
  render_frame.add(render_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Compare a reconstruction with a reference mesh");
  fs::path eval_recon, eval_gt, eval_out;
  std::optional<std::uint64_t> eval_seed;
  std::size_t samples = 10000;
  FrameOptions eval_frame;
  eval_cmd->add_option("recon", eval_recon, "Reconstructed OBJ")->required();
  eval_cmd->add_option("gt", eval_gt, "Reference OBJ")->required();
  eval_cmd->add_option("--seed", eval_seed, "Sampling seed (default OAHUMAN_SEED or 0)");
  eval_cmd->add_option("--samples", samples, "Surface samples per mesh")->check(CLI::PositiveNumber);
  eval_cmd->add_option("-o,--out", eval_out, "Output CSV (a .txt sidecar is written next to it)")
      ->required();
  eval_frame.add(eval_cmd);

  // sweep
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Occlusion sweep; extra --section.key value pairs override the config");
  fs::path sweep_config, sweep_out = "sweep_out";
  std::optional<unsigned> sweep_jobs;
  sweep_cmd->add_option("--config", sweep_config, "INI config file");
  sweep_cmd->add_option("-o,--out", sweep_out, "Output directory");
  sweep_cmd->add_option("--jobs", sweep_jobs, "Worker threads (0: all cores)");
  sweep_cmd->allow_extras();

  // selftest
  auto* selftest_cmd = app.add_subcommand("selftest", "Run the embedded oracle checks");
  std::optional<std::uint64_t> selftest_seed;
  selftest_cmd->add_option("--seed", selftest_seed, "Seed for the random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const auto level = spdlog::level::from_str(log_level);
    if (level == spdlog::level::off && log_level != "off") {
      throw ConfigError("unknown log level '" + log_level + "'");
    }
    spdlog::set_level(level);

    if (*shapes_cmd) {
      TriMesh mesh;
      if (shape_kind == "sphere") {
        mesh = shapes::icosphere(radius, subdivisions);
      } else if (shape_kind == "torus") {
        mesh = shapes::torus(major, minor);
      } else if (shape_kind == "cube") {
        mesh = shapes::cube(side);
      } else {
        mesh = shapes::capsule_figure(spacing);
      }
      save_obj(mesh, shape_out);
      const auto wt = check_watertight(mesh);
      const double volume = wt.watertight ? mesh_volume(mesh).volume : 0.0;
      fmt::print("{}: {} vertices, {} faces, watertight {}, volume {:.6f}\n", shape_out.string(),
                 mesh.vertices.size(), mesh.faces.size(), wt.watertight, volume);
    } else if (*encode_cmd) {
      const TriMesh mesh = load_obj(encode_mesh);
      const OrthoFrame frame = encode_frame.frame();
      const FourierField field = mesh_to_fof(mesh, frame, BasisConfig{order});
      save_field(encode_out, field, frame);
      fmt::print("{}: {}x{}x{} field\n", encode_out.string(), field.height(), field.width(),
                 field.channels());
    } else if (*recon_cmd) {
      const StoredField stored = load_field(recon_field);
      OrthoFrame frame = recon_frame.frame();
      if (stored.frame && recon_cmd->count("--resolution") == 0 &&
          recon_cmd->count("--half-extent") == 0 && recon_cmd->count("--center") == 0) {
        frame = *stored.frame;
      }
      frame.width = stored.field.width();
      frame.height = stored.field.height();
      const TriMesh mesh = reconstruct(stored.field, frame, grid_res);
      save_obj(mesh, recon_out);
      fmt::print("{}: {} vertices, {} faces\n", recon_out.string(), mesh.vertices.size(),
                 mesh.faces.size());
    } else if (*occlude_cmd) {
      const StoredField stored = load_field(occ_field);
      const Mask body = occ_body.empty() ? field_silhouette(stored.field) : read_pgm(occ_body);
      OccluderSpec spec;
      spec.kind = occ_kind == "ellipse"   ? OccluderKind::Ellipse
                  : occ_kind == "capsule" ? OccluderKind::Capsule
                                          : OccluderKind::Rectangle;
      spec.seed = occ_seed.value_or(default_seed());
      spec.ratio = ratio;
      const MaskPair pair = synthesize_occlusion(body, spec);
      const FieldCorruption corruption =
          policy == "zero" ? FieldCorruption::zero() : FieldCorruption::noise(sigma, spec.seed);
      save_field(occ_out, occlude_field(stored.field, pair, corruption), stored.frame);
      write_pgm(occ_visible, pair.visible);
      write_pgm(occ_occluded, pair.occluded);
      fmt::print("occluded {:.4f} of {} body pixels\n", pair.occlusion_ratio(), body.count());
    } else if (*blend_cmd) {
      const StoredField obs = load_field(blend_obs);
      const StoredField prior = load_field(blend_prior);
      MaskPair pair{read_pgm(blend_visible), read_pgm(blend_occluded), Mask()};
      pair.body = pair.visible;
      if (!pair.occluded.same_size(pair.body.width, pair.body.height)) {
        throw ShapeError("visibility and occlusion masks differ in size");
      }
      for (std::size_t i = 0; i < pair.body.data.size(); ++i) {
        pair.body.data[i] = pair.visible.data[i] | pair.occluded.data[i];
      }
      validate(pair);
      save_field(blend_out, vgcc_blend(obs.field, prior.field, pair, feather), obs.frame);
      fmt::print("{}: blended with feather {}\n", blend_out.string(), feather);
    } else if (*render_cmd) {
      const TriMesh mesh = load_obj(render_mesh);
      const OrthoFrame frame = render_frame.frame();
      const NormalMap front = render_normals(mesh, frame, View::Front);
      const NormalMap back = render_normals(mesh, frame, View::Back);
      write_normal_pfm(render_front, front);
      write_normal_pfm(render_back, back);
      if (render_png) {
        write_png16(fs::path(render_front).replace_extension(".png"), encode_normals(front));
        write_png16(fs::path(render_back).replace_extension(".png"), encode_normals(back));
      }
      fmt::print("front {} px, back {} px foreground\n", front.mask.count(), back.mask.count());
    } else if (*eval_cmd) {
      const TriMesh recon = load_obj(eval_recon);
      const TriMesh gt = load_obj(eval_gt);
      const MetricReport report =
          evaluate_pair(recon, gt, eval_frame.frame(), samples, eval_seed.value_or(default_seed()));
      write_text(eval_out, report_csv_header() + "\n" + report_csv_row(report) + "\n");
      write_text(fs::path(eval_out).replace_extension(".txt"), report_sidecar(report));
      fmt::print("{}\n{}\n", report_csv_header(), report_csv_row(report));
    } else if (*sweep_cmd) {
      SweepConfig config =
          sweep_config.empty() ? default_sweep_config() : load_sweep_config(sweep_config);
      const std::vector<std::string> extras = sweep_cmd->remaining();
      for (std::size_t i = 0; i < extras.size(); ++i) {
        std::string key = extras[i];
        if (key.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + key + "'");
        key = key.substr(2);
        std::string value;
        if (const auto eq = key.find('='); eq != std::string::npos) {
          value = key.substr(eq + 1);
          key = key.substr(0, eq);
        } else {
          if (i + 1 >= extras.size()) throw ConfigError("missing value for --" + key);
          value = extras[++i];
        }
        config.set(key, value);
      }
      if (sweep_jobs) config.jobs = *sweep_jobs;
      const SweepResult result = run_sweep(config);
      write_sweep_outputs(result, config, sweep_out);
      std::size_t failed = 0;
      for (const auto& row : result.cells) failed += row.status == "ok" ? 0 : 1;
      fmt::print("{} cells ({} failed) written to {}\n", result.cells.size(), failed,
                 sweep_out.string());
    } else if (*selftest_cmd) {
      const auto results = oracles::run_selftest(selftest_seed.value_or(default_seed()));
      bool all = true;
      for (const auto& r : results) {
        fmt::print("{} {}: {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
        all = all && r.passed;
      }
      return all ? kExitOk : kExitSelftest;
    }
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  }
  return kExitOk;
}
