#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "occfof/encode.hpp"
#include "occfof/fof.hpp"
#include "occfof/image.hpp"
#include "occfof/mesh.hpp"
#include "occfof/metrics.hpp"
#include "occfof/occlusion.hpp"

namespace occfof {

// Bad configuration key or value (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Procedural ground truth by name: sphere, torus, capsule_figure, cube.
TriMesh make_shape(std::string_view kind);

// Pixels whose ray crosses any occupied depth (constant coefficient > 0).
Mask field_silhouette(const FourierField& field);

// decode_grid over `depth_res` samples, then marching cubes at 0.5.
TriMesh reconstruct(const FourierField& field, const OrthoFrame& frame, int depth_res);

/// Occlusion sweep settings. Keys are `section.name`, as in the INI file:
///
///   [scene]      shape, resolution, grid_resolution, order, normalize
///   [prior]      iterations, strength
///   [occlusion]  ratios, seeds, base_seed, kind
///   [completion] feather
///   [eval]       samples, seed
///   [run]        jobs
struct SweepConfig {
  std::string shape = "sphere";
  int resolution = 128;
  int grid_resolution = 128;
  int order = 15;
  bool normalize = false;  // rescale the shape into a 0.9 half-extent box

  int prior_iterations = 20;
  double prior_strength = 0.5;

  std::vector<double> ratios{0.2, 0.4, 0.6, 0.8};
  int seeds = 5;
  std::uint64_t base_seed = 0;
  OccluderKind kind = OccluderKind::Rectangle;

  double feather = 3.0;

  std::size_t samples = 10000;
  std::uint64_t eval_seed = 0;

  unsigned jobs = 0;  // 0: all hardware threads

  // Applies one `section.name` (or unambiguous bare `name`) assignment.
  void set(std::string_view key, std::string_view value);
  std::vector<std::uint64_t> seed_list() const;
  OrthoFrame frame() const;
  // Resolved settings as INI text; parses back to the same config.
  std::string to_ini() const;
};

// Reads an INI file; every key goes through SweepConfig::set. Seeds fall
// back to the OAHUMAN_SEED environment variable when the file sets none.
SweepConfig load_sweep_config(const std::filesystem::path& path);
SweepConfig parse_sweep_config(std::string_view ini_text);
SweepConfig default_sweep_config();

struct SweepRow {
  double ratio = 0.0;
  std::uint64_t seed = 0;
  std::string method;  // naive, blend, roundtrip, prior
  MetricReport report;
  std::string status = "ok";
};

struct SweepResult {
  SweepRow roundtrip;  // unoccluded encode -> reconstruct
  SweepRow prior;      // smoothed prior mesh against ground truth
  std::vector<SweepRow> cells;  // (ratio, seed, method) order
};

/// For every ratio and seed: encode the ground truth, synthesize an
/// occluder over its silhouette, zero-fill (naive) or blend with the
/// encoded prior (blend), reconstruct and evaluate against the ground truth.
/// A failing cell is recorded with its error as status.
SweepResult run_sweep(const SweepConfig& config);

std::string sweep_csv(const SweepResult& result);
// Line chart of mean chamfer per method over ratios.
std::string sweep_svg(const SweepResult& result, const SweepConfig& config);

// Writes curves.csv, curves.svg and config.ini into `out_dir`.
void write_sweep_outputs(const SweepResult& result, const SweepConfig& config,
                         const std::filesystem::path& out_dir);

}  // namespace occfof
