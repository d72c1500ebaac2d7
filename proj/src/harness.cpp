#include "occfof/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "occfof/completion.hpp"
#include "occfof/errors.hpp"
#include "occfof/parallel.hpp"
#include "occfof/shapes.hpp"
#include "occfof/surface.hpp"
#include "occfof/tensor_io.hpp"

namespace occfof {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view raw) {
  const std::string text = trim(raw);
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError(fmt::format("invalid value '{}' for {}", raw, key));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view raw) {
  const std::string text = trim(raw);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(fmt::format("invalid boolean '{}' for {}", raw, key));
}

std::vector<double> parse_list(std::string_view key, std::string_view raw) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(raw)};
  while (std::getline(in, item, ',')) out.push_back(parse_number<double>(key, item));
  if (out.empty()) throw ConfigError(fmt::format("{} needs at least one value", key));
  return out;
}

const char* kind_name(OccluderKind kind) {
  switch (kind) {
    case OccluderKind::Rectangle:
      return "rectangle";
    case OccluderKind::Ellipse:
      return "ellipse";
    case OccluderKind::Capsule:
      return "capsule";
  }
  return "rectangle";
}

constexpr std::string_view kKeys[] = {
    "scene.shape",          "scene.resolution",   "scene.grid_resolution", "scene.order",
    "scene.normalize",      "prior.iterations",   "prior.strength",        "occlusion.ratios",
    "occlusion.seeds",      "occlusion.base_seed", "occlusion.kind",       "completion.feather",
    "eval.samples",         "eval.seed",          "run.jobs",
};

std::string canonical_key(std::string_view key) {
  for (std::string_view k : kKeys) {
    if (k == key) return std::string(k);
  }
  if (key.find('.') == std::string_view::npos) {
    std::string found;
    for (std::string_view k : kKeys) {
      if (k.substr(k.find('.') + 1) == key) {
        if (!found.empty()) throw ConfigError(fmt::format("ambiguous key '{}'", key));
        found = std::string(k);
      }
    }
    if (!found.empty()) return found;
  }
  throw ConfigError(fmt::format("unknown configuration key '{}'", key));
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

TriMesh make_shape(std::string_view kind) {
  if (kind == "sphere") return shapes::icosphere();
  if (kind == "torus") return shapes::torus();
  if (kind == "capsule_figure") return shapes::capsule_figure();
  if (kind == "cube") return shapes::cube();
  throw ConfigError(fmt::format("unknown shape '{}'", kind));
}

Mask field_silhouette(const FourierField& field) {
  Mask m(field.width(), field.height());
  for (int r = 0; r < field.height(); ++r) {
    for (int c = 0; c < field.width(); ++c) m.at(r, c) = field.at(r, c, 0) > 0.0 ? 1 : 0;
  }
  return m;
}

TriMesh reconstruct(const FourierField& field, const OrthoFrame& frame, int depth_res) {
  const DecodedGrid decoded = decode_grid(field, depth_res);
  return marching_cubes(to_occupancy_grid(decoded, frame), 0.5);
}

void SweepConfig::set(std::string_view raw_key, std::string_view value) {
  const std::string key = canonical_key(trim(raw_key));
  if (key == "scene.shape") {
    const std::string v = trim(value);
    if (v != "sphere" && v != "torus" && v != "capsule_figure" && v != "cube") {
      throw ConfigError(fmt::format("unknown shape '{}'", v));
    }
    shape = v;
  } else if (key == "scene.resolution") {
    resolution = parse_number<int>(key, value);
    if (resolution < 8 || resolution > 4096) throw ConfigError("resolution must lie in [8, 4096]");
  } else if (key == "scene.grid_resolution") {
    grid_resolution = parse_number<int>(key, value);
    if (grid_resolution < 2 || grid_resolution > 4096) {
      throw ConfigError("grid_resolution must lie in [2, 4096]");
    }
  } else if (key == "scene.order") {
    order = parse_number<int>(key, value);
    if (order < 0 || order > 256) throw ConfigError("order must lie in [0, 256]");
  } else if (key == "scene.normalize") {
    normalize = parse_bool(key, value);
  } else if (key == "prior.iterations") {
    prior_iterations = parse_number<int>(key, value);
    if (prior_iterations < 0) throw ConfigError("prior.iterations must be non-negative");
  } else if (key == "prior.strength") {
    prior_strength = parse_number<double>(key, value);
    if (!(prior_strength >= 0.0 && prior_strength <= 1.0)) {
      throw ConfigError("prior.strength must lie in [0, 1]");
    }
  } else if (key == "occlusion.ratios") {
    ratios = parse_list(key, value);
    for (double r : ratios) {
      if (!(r >= 0.0 && r <= 0.95)) throw ConfigError("ratios must lie in [0, 0.95]");
    }
  } else if (key == "occlusion.seeds") {
    seeds = parse_number<int>(key, value);
    if (seeds < 1) throw ConfigError("occlusion.seeds must be positive");
  } else if (key == "occlusion.base_seed") {
    base_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "occlusion.kind") {
    const std::string v = trim(value);
    if (v == "rectangle") {
      kind = OccluderKind::Rectangle;
    } else if (v == "ellipse") {
      kind = OccluderKind::Ellipse;
    } else if (v == "capsule") {
      kind = OccluderKind::Capsule;
    } else {
      throw ConfigError(fmt::format("unknown occluder kind '{}'", v));
    }
  } else if (key == "completion.feather") {
    feather = parse_number<double>(key, value);
    if (!(feather >= 0.0)) throw ConfigError("completion.feather must be non-negative");
  } else if (key == "eval.samples") {
    samples = parse_number<std::size_t>(key, value);
    if (samples < 1) throw ConfigError("eval.samples must be positive");
  } else if (key == "eval.seed") {
    eval_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "run.jobs") {
    jobs = parse_number<unsigned>(key, value);
  }
}

std::vector<std::uint64_t> SweepConfig::seed_list() const {
  std::vector<std::uint64_t> out(static_cast<std::size_t>(seeds));
  for (int i = 0; i < seeds; ++i) out[i] = base_seed + static_cast<std::uint64_t>(i);
  return out;
}

OrthoFrame SweepConfig::frame() const {
  OrthoFrame f;
  f.width = resolution;
  f.height = resolution;
  return f;
}

std::string SweepConfig::to_ini() const {
  std::string ratio_text;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    ratio_text += (i ? "," : "") + fmt::format("{}", ratios[i]);
  }
  return fmt::format(
      "[scene]\nshape={}\nresolution={}\ngrid_resolution={}\norder={}\nnormalize={}\n\n"
      "[prior]\niterations={}\nstrength={}\n\n"
      "[occlusion]\nratios={}\nseeds={}\nbase_seed={}\nkind={}\n\n"
      "[completion]\nfeather={}\n\n"
      "[eval]\nsamples={}\nseed={}\n\n"
      "[run]\njobs={}\n",
      shape, resolution, grid_resolution, order, normalize ? "true" : "false", prior_iterations,
      prior_strength, ratio_text, seeds, base_seed, kind_name(kind), feather, samples, eval_seed,
      jobs);
}

SweepConfig default_sweep_config() {
  SweepConfig cfg;
  if (const char* env = std::getenv("OAHUMAN_SEED")) {
    cfg.base_seed = parse_number<std::uint64_t>("OAHUMAN_SEED", env);
    cfg.eval_seed = cfg.base_seed;
  }
  return cfg;
}

SweepConfig parse_sweep_config(std::string_view ini_text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(ini_text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  SweepConfig cfg = default_sweep_config();
  for (const auto& [section, node] : tree) {
    if (node.empty()) {
      cfg.set(section, node.data());
      continue;
    }
    for (const auto& [name, leaf] : node) cfg.set(section + "." + name, leaf.data());
  }
  return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_sweep_config(buffer.str());
}

SweepResult run_sweep(const SweepConfig& config) {
  const OrthoFrame frame = config.frame();
  const BasisConfig basis{config.order};
  TriMesh gt = make_shape(config.shape);
  if (config.normalize) gt = normalize_to_box(gt, 0.9);

  const FourierField gt_field = mesh_to_fof(gt, frame, basis);
  const TriMesh prior = degrade_prior(gt, config.prior_iterations, config.prior_strength);
  const FourierField prior_field = mesh_to_fof(prior, frame, basis);
  const Mask body = field_silhouette(gt_field);

  SweepResult result;
  auto evaluate = [&](const TriMesh& mesh, double ratio, std::uint64_t seed, const char* method) {
    SweepRow row;
    row.ratio = ratio;
    row.seed = seed;
    row.method = method;
    try {
      row.report = evaluate_pair(mesh, gt, frame, config.samples, config.eval_seed);
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
      spdlog::warn("{} cell ratio={} seed={} failed: {}", method, ratio, seed, e.what());
    }
    return row;
  };

  result.roundtrip =
      evaluate(reconstruct(gt_field, frame, config.grid_resolution), 0.0, config.eval_seed, "roundtrip");
  result.prior = evaluate(prior, 0.0, config.eval_seed, "prior");

  const std::vector<std::uint64_t> seeds = config.seed_list();
  const std::size_t n_cells = config.ratios.size() * seeds.size();
  result.cells.resize(2 * n_cells);

  auto run_cell = [&](std::size_t cell) {
    const double ratio = config.ratios[cell / seeds.size()];
    const std::uint64_t seed = seeds[cell % seeds.size()];
    SweepRow& naive_row = result.cells[2 * cell];
    SweepRow& blend_row = result.cells[2 * cell + 1];
    try {
      const MaskPair pair = synthesize_occlusion(body, {config.kind, OccluderAnchor::Interior, seed, ratio});
      const FourierField naive = occlude_field(gt_field, pair, FieldCorruption::zero());
      const FourierField blend = vgcc_blend(naive, prior_field, pair, config.feather);
      naive_row = evaluate(reconstruct(naive, frame, config.grid_resolution), ratio, seed, "naive");
      blend_row = evaluate(reconstruct(blend, frame, config.grid_resolution), ratio, seed, "blend");
    } catch (const std::exception& e) {
      for (SweepRow* row : {&naive_row, &blend_row}) {
        row->ratio = ratio;
        row->seed = seed;
        row->status = std::string("error: ") + e.what();
      }
      naive_row.method = "naive";
      blend_row.method = "blend";
      spdlog::warn("sweep cell ratio={} seed={} failed: {}", ratio, seed, e.what());
    }
  };

  {
    ScopedWorkers pool(config.jobs);
    const std::size_t workers = std::min<std::size_t>(resolved_workers(), std::max<std::size_t>(n_cells, 1));
    // Cells are dealt round-robin so expensive high-ratio cells spread out.
    parallel_for(workers, [&](std::size_t begin, std::size_t end) {
      for (std::size_t w = begin; w < end; ++w) {
        for (std::size_t cell = w; cell < n_cells; cell += workers) run_cell(cell);
      }
    });
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "ratio,seed,method,cd,p2s,normal_err,status\n";
  auto emit = [&](const SweepRow& row) {
    out += fmt::format("{:.6f},{},{},{:.6f},{:.6f},{:.6f},{}\n", row.ratio, row.seed, row.method,
                       row.report.chamfer, row.report.p2s, row.report.normal_error, row.status);
  };
  emit(result.roundtrip);
  emit(result.prior);
  for (const SweepRow& row : result.cells) emit(row);
  return out;
}

std::string sweep_svg(const SweepResult& result, const SweepConfig& config) {
  constexpr double kW = 800.0, kH = 500.0;
  constexpr double kLeft = 80.0, kRight = 180.0, kTop = 40.0, kBottom = 60.0;
  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;

  struct Series {
    std::string name;
    std::string color;
    std::vector<std::pair<double, double>> points;
  };
  std::vector<Series> series{{"naive zero-fill", "#d62728", {}}, {"visibility-guided blend", "#1f77b4", {}}};
  for (std::size_t i = 0; i < config.ratios.size(); ++i) {
    for (std::size_t m = 0; m < 2; ++m) {
      std::vector<double> values;
      for (const SweepRow& row : result.cells) {
        if (row.ratio == config.ratios[i] && row.method == (m == 0 ? "naive" : "blend") &&
            row.status == "ok") {
          values.push_back(row.report.chamfer);
        }
      }
      if (!values.empty()) series[m].points.emplace_back(config.ratios[i], mean_of(values));
    }
  }

  double y_max = result.roundtrip.report.chamfer;
  double x_min = 0.0, x_max = 1.0;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) y_max = std::max(y_max, y);
  }
  y_max = y_max > 0.0 ? y_max * 1.1 : 1.0;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - y / y_max * plot_h; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {0} {1}\" width=\"{0}\" "
      "height=\"{1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
      kW, kH);
  svg += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"15\">Chamfer vs. occlusion ratio ({})</text>\n",
                     kLeft, config.shape);
  svg += fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#000\"/>\n"
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{3}\" stroke=\"#000\"/>\n",
      kLeft, kTop + plot_h, kLeft + plot_w, kTop);
  for (int t = 0; t <= 5; ++t) {
    const double x = x_min + (x_max - x_min) * t / 5.0;
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#000\"/>"
        "<text x=\"{0:.2f}\" y=\"{3}\" text-anchor=\"middle\">{4:.1f}</text>\n",
        px(x), kTop + plot_h, kTop + plot_h + 5, kTop + plot_h + 20, x);
    const double y = y_max * t / 5.0;
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#000\"/>"
        "<text x=\"{3}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:.2f}</text>\n",
        kLeft - 5, py(y), kLeft, kLeft - 8, py(y) + 4, y);
  }
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">occlusion ratio</text>\n",
                     kLeft + plot_w / 2, kH - 15);
  svg += fmt::format(
      "<text x=\"20\" y=\"{0:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {0:.2f})\">"
      "Chamfer (centi-units)</text>\n",
      kTop + plot_h / 2);

  const double ref = result.roundtrip.report.chamfer;
  svg += fmt::format(
      "<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#7f7f7f\" "
      "stroke-dasharray=\"6 4\"/>\n",
      kLeft, py(ref), kLeft + plot_w);

  for (const Series& s : series) {
    std::string pts;
    for (const auto& [x, y] : s.points) pts += fmt::format("{:.2f},{:.2f} ", px(x), py(y));
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n",
                       s.color, trim(pts));
    for (const auto& [x, y] : s.points) {
      svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px(x), py(y),
                         s.color);
    }
  }

  const double lx = kLeft + plot_w + 15;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double ly = kTop + 20 + 22 * static_cast<double>(i);
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>"
        "<text x=\"{4}\" y=\"{5}\">{6}</text>\n",
        lx, ly, lx + 20, series[i].color, lx + 26, ly + 4, series[i].name);
  }
  const double ly = kTop + 20 + 22 * static_cast<double>(series.size());
  svg += fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#7f7f7f\" "
      "stroke-dasharray=\"6 4\"/><text x=\"{3}\" y=\"{4}\">unoccluded</text>\n",
      lx, ly, lx + 20, lx + 26, ly + 4);
  svg += "</svg>\n";
  return svg;
}

void write_sweep_outputs(const SweepResult& result, const SweepConfig& config,
                         const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write_text = [](const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  };
  write_text(out_dir / "curves.csv", sweep_csv(result));
  write_text(out_dir / "curves.svg", sweep_svg(result, config));
  write_text(out_dir / "config.ini", config.to_ini());
}

}  // namespace occfof
