#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "occfof/completion.hpp"
#include "occfof/encode.hpp"
#include "occfof/errors.hpp"
#include "occfof/fof.hpp"
#include "occfof/harness.hpp"
#include "occfof/losses.hpp"
#include "occfof/metrics.hpp"
#include "occfof/occlusion.hpp"
#include "occfof/oracles.hpp"
#include "occfof/render.hpp"
#include "occfof/surface.hpp"
#include "occfof/tensor_io.hpp"

namespace py = pybind11;
using namespace occfof;

namespace {

using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;
using BArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

void require_ndim(const py::array& a, py::ssize_t ndim, const char* name) {
  if (a.ndim() != ndim) {
    throw ShapeError(std::string(name) + " must have " + std::to_string(ndim) + " dimensions");
  }
}

std::vector<Vec3> to_points(const DArray& a, const char* name = "points") {
  require_ndim(a, 2, name);
  if (a.shape(1) != 3) throw ShapeError(std::string(name) + " must have shape (n, 3)");
  auto v = a.unchecked<2>();
  std::vector<Vec3> out(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) out[i] = Vec3(v(i, 0), v(i, 1), v(i, 2));
  return out;
}

DArray from_points(const std::vector<Vec3>& pts) {
  DArray out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
  auto o = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int k = 0; k < 3; ++k) o(i, k) = pts[i][k];
  }
  return out;
}

TriMesh to_mesh(const DArray& vertices, const IArray& faces) {
  TriMesh m;
  m.vertices = to_points(vertices, "vertices");
  require_ndim(faces, 2, "faces");
  if (faces.shape(1) != 3) throw ShapeError("faces must have shape (m, 3)");
  auto f = faces.unchecked<2>();
  m.faces.resize(static_cast<std::size_t>(faces.shape(0)));
  for (py::ssize_t i = 0; i < faces.shape(0); ++i) {
    for (int k = 0; k < 3; ++k) m.faces[i][k] = static_cast<int>(f(i, k));
  }
  validate(m);
  return m;
}

py::tuple from_mesh(const TriMesh& m) {
  IArray faces({static_cast<py::ssize_t>(m.faces.size()), py::ssize_t{3}});
  auto f = faces.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.faces.size(); ++i) {
    for (int k = 0; k < 3; ++k) f(i, k) = m.faces[i][k];
  }
  return py::make_tuple(from_points(m.vertices), faces);
}

FourierField to_field(const DArray& a) {
  require_ndim(a, 3, "field");
  FourierField f(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                 static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), f.data().begin());
  return f;
}

DArray from_field(const FourierField& f) {
  DArray out({static_cast<py::ssize_t>(f.height()), static_cast<py::ssize_t>(f.width()),
              static_cast<py::ssize_t>(f.channels())});
  std::copy(f.data().begin(), f.data().end(), out.mutable_data());
  return out;
}

Mask to_mask(const BArray& a, const char* name = "mask") {
  require_ndim(a, 2, name);
  Mask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.size(); ++i) m.data[i] = a.data()[i] ? 1 : 0;
  return m;
}

BArray from_mask(const Mask& m) {
  BArray out({static_cast<py::ssize_t>(m.height), static_cast<py::ssize_t>(m.width)});
  for (std::size_t i = 0; i < m.data.size(); ++i) out.mutable_data()[i] = m.data[i] != 0;
  return out;
}

Image to_image(const DArray& a) {
  if (a.ndim() == 2) {
    Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), 1);
    std::copy(a.data(), a.data() + a.size(), img.data.begin());
    return img;
  }
  require_ndim(a, 3, "image");
  Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), img.data.begin());
  return img;
}

MaskPair to_pair(const BArray& visible, const BArray& occluded) {
  MaskPair pair{to_mask(visible, "visible"), to_mask(occluded, "occluded"), Mask()};
  if (!pair.visible.same_size(pair.occluded.width, pair.occluded.height)) {
    throw ShapeError("visible and occluded masks differ in shape");
  }
  pair.body = pair.visible;
  for (std::size_t i = 0; i < pair.body.data.size(); ++i) {
    pair.body.data[i] = pair.visible.data[i] | pair.occluded.data[i];
  }
  return pair;
}

OrthoFrame make_frame(int resolution, double half_extent, std::vector<double> center) {
  if (center.size() != 3) throw ShapeError("center must have three components");
  OrthoFrame f;
  f.center = Vec3(center[0], center[1], center[2]);
  f.half_extent = half_extent;
  f.width = resolution;
  f.height = resolution;
  validate(f);
  return f;
}

OccluderKind parse_kind(const std::string& kind) {
  if (kind == "rectangle") return OccluderKind::Rectangle;
  if (kind == "ellipse") return OccluderKind::Ellipse;
  if (kind == "capsule") return OccluderKind::Capsule;
  throw DomainError("unknown occluder kind '" + kind + "'");
}

const std::vector<double> kOrigin{0.0, 0.0, 0.0};

}  // namespace

PYBIND11_MODULE(_occfof, m) {
  m.doc() = "Fourier occupancy fields, occlusion synthesis, completion, losses and metrics";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<MeshError>(m, "MeshError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def(
      "basis_eval",
      [](double z, int order) {
        const auto b = basis_eval(z, BasisConfig{order});
        return DArray(static_cast<py::ssize_t>(b.size()), b.data());
      },
      py::arg("z"), py::arg("order") = 15);
  m.def(
      "intervals_to_coeffs",
      [](const std::vector<std::pair<double, double>>& intervals, int order) {
        IntervalList iv;
        for (const auto& [a, b] : intervals) iv.push_back({a, b});
        const auto c = intervals_to_coeffs(iv, BasisConfig{order});
        return DArray(static_cast<py::ssize_t>(c.size()), c.data());
      },
      py::arg("intervals"), py::arg("order") = 15);
  m.def(
      "decode_ray",
      [](const DArray& coeffs, double z) {
        require_ndim(coeffs, 1, "coeffs");
        const int k = static_cast<int>(coeffs.shape(0));
        if (k % 2 == 0) throw ShapeError("coefficient count must be odd");
        return decode_ray(std::span(coeffs.data(), coeffs.size()), z, BasisConfig{(k - 1) / 2});
      },
      py::arg("coeffs"), py::arg("z"));

  m.def(
      "make_shape", [](const std::string& kind) { return from_mesh(make_shape(kind)); },
      py::arg("kind"), "Procedural mesh as (vertices, faces)");
  m.def(
      "load_obj", [](const std::string& path) { return from_mesh(load_obj(path)); },
      py::arg("path"));
  m.def(
      "save_obj",
      [](const DArray& v, const IArray& f, const std::string& path) { save_obj(to_mesh(v, f), path); },
      py::arg("vertices"), py::arg("faces"), py::arg("path"));
  m.def(
      "is_watertight",
      [](const DArray& v, const IArray& f) { return check_watertight(to_mesh(v, f)).watertight; },
      py::arg("vertices"), py::arg("faces"));
  m.def(
      "mesh_volume", [](const DArray& v, const IArray& f) { return mesh_volume(to_mesh(v, f)).volume; },
      py::arg("vertices"), py::arg("faces"));
  m.def(
      "surface_area", [](const DArray& v, const IArray& f) { return surface_area(to_mesh(v, f)); },
      py::arg("vertices"), py::arg("faces"));
  m.def(
      "degrade_prior",
      [](const DArray& v, const IArray& f, int iterations, double strength) {
        return from_mesh(degrade_prior(to_mesh(v, f), iterations, strength));
      },
      py::arg("vertices"), py::arg("faces"), py::arg("iterations") = 20, py::arg("strength") = 0.5);

  m.def(
      "mesh_to_fof",
      [](const DArray& v, const IArray& f, int resolution, int order, double half_extent,
         std::vector<double> center) {
        const TriMesh mesh = to_mesh(v, f);
        const OrthoFrame frame = make_frame(resolution, half_extent, std::move(center));
        FourierField field;
        {
          py::gil_scoped_release release;
          field = mesh_to_fof(mesh, frame, BasisConfig{order});
        }
        return from_field(field);
      },
      py::arg("vertices"), py::arg("faces"), py::arg("resolution") = 128, py::arg("order") = 15,
      py::arg("half_extent") = 1.0, py::arg("center") = kOrigin,
      "Field of shape (height, width, 2 * order + 1)");
  m.def(
      "reconstruct",
      [](const DArray& field, int grid_resolution, double half_extent, std::vector<double> center) {
        const FourierField f = to_field(field);
        OrthoFrame frame = make_frame(f.width(), half_extent, std::move(center));
        frame.height = f.height();
        TriMesh mesh;
        {
          py::gil_scoped_release release;
          mesh = reconstruct(f, frame, grid_resolution);
        }
        return from_mesh(mesh);
      },
      py::arg("field"), py::arg("grid_resolution") = 128, py::arg("half_extent") = 1.0,
      py::arg("center") = kOrigin);
  m.def(
      "field_silhouette", [](const DArray& field) { return from_mask(field_silhouette(to_field(field))); },
      py::arg("field"));

  m.def(
      "synthesize_occlusion",
      [](const BArray& body, double ratio, std::uint64_t seed, const std::string& kind) {
        const MaskPair pair =
            synthesize_occlusion(to_mask(body, "body"), {parse_kind(kind), OccluderAnchor::Interior, seed, ratio});
        return py::make_tuple(from_mask(pair.visible), from_mask(pair.occluded));
      },
      py::arg("body"), py::arg("ratio"), py::arg("seed") = 0, py::arg("kind") = "rectangle",
      "Returns (visible, occluded) boolean masks");
  m.def(
      "weight_map",
      [](const BArray& visible, const BArray& occluded, double lambda_occ, double lambda_vis) {
        const ScalarMap w = weight_map(to_pair(visible, occluded), lambda_occ, lambda_vis);
        DArray out({static_cast<py::ssize_t>(w.height), static_cast<py::ssize_t>(w.width)});
        std::copy(w.data.begin(), w.data.end(), out.mutable_data());
        return out;
      },
      py::arg("visible"), py::arg("occluded"), py::arg("lambda_occ") = 2.0,
      py::arg("lambda_vis") = 1.0);
  m.def(
      "occlude_field",
      [](const DArray& field, const BArray& occluded, double sigma, std::uint64_t seed) {
        const Mask m = to_mask(occluded, "occluded");
        MaskPair pair{Mask(m.width, m.height), m, m};
        const FieldCorruption policy =
            sigma > 0.0 ? FieldCorruption::noise(sigma, seed) : FieldCorruption::zero();
        return from_field(occlude_field(to_field(field), pair, policy));
      },
      py::arg("field"), py::arg("occluded"), py::arg("sigma") = 0.0, py::arg("seed") = 0,
      "Zero-fills occluded pixels, or adds Gaussian noise when sigma > 0");
  m.def(
      "vgcc_blend",
      [](const DArray& observed, const DArray& prior, const BArray& visible, const BArray& occluded,
         double feather) {
        return from_field(
            vgcc_blend(to_field(observed), to_field(prior), to_pair(visible, occluded), feather));
      },
      py::arg("observed"), py::arg("prior"), py::arg("visible"), py::arg("occluded"),
      py::arg("feather") = 3.0);

  m.def(
      "mse_coeff_loss",
      [](const DArray& c, const DArray& c_gt) {
        const CoeffLoss l = mse_coeff_loss(to_field(c), to_field(c_gt));
        return py::make_tuple(l.loss, from_field(l.grad));
      },
      py::arg("c"), py::arg("c_gt"), "Returns (loss, gradient)");

  m.def(
      "render_normals",
      [](const DArray& v, const IArray& f, int resolution, const std::string& view,
         double half_extent, std::vector<double> center) {
        if (view != "front" && view != "back") throw DomainError("view must be 'front' or 'back'");
        const NormalMap map = render_normals(to_mesh(v, f), make_frame(resolution, half_extent, std::move(center)),
                                             view == "front" ? View::Front : View::Back);
        DArray normals({static_cast<py::ssize_t>(map.height), static_cast<py::ssize_t>(map.width),
                        py::ssize_t{3}});
        for (std::size_t p = 0; p < map.normals.size(); ++p) {
          for (int k = 0; k < 3; ++k) normals.mutable_data()[p * 3 + k] = map.normals[p][k];
        }
        return py::make_tuple(normals, from_mask(map.mask));
      },
      py::arg("vertices"), py::arg("faces"), py::arg("resolution") = 128, py::arg("view") = "front",
      py::arg("half_extent") = 1.0, py::arg("center") = kOrigin,
      "Returns (normals of shape (h, w, 3), foreground mask)");

  m.def(
      "chamfer", [](const DArray& a, const DArray& b) { return chamfer(to_points(a), to_points(b)); },
      py::arg("a"), py::arg("b"), "Symmetric mean nearest-neighbour distance times 100");
  m.def(
      "p2s",
      [](const DArray& points, const DArray& v, const IArray& f) {
        return p2s(to_points(points), to_mesh(v, f));
      },
      py::arg("points"), py::arg("vertices"), py::arg("faces"));
  m.def(
      "ssim", [](const DArray& a, const DArray& b) { return ssim(to_image(a), to_image(b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "psnr", [](const DArray& a, const DArray& b) { return psnr(to_image(a), to_image(b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "evaluate_pair",
      [](const DArray& rv, const IArray& rf, const DArray& gv, const IArray& gf, int resolution,
         std::size_t samples, std::uint64_t seed) {
        const MetricReport r = evaluate_pair(to_mesh(rv, rf), to_mesh(gv, gf),
                                             make_frame(resolution, 1.0, kOrigin), samples, seed);
        py::dict d;
        d["chamfer"] = r.chamfer;
        d["p2s"] = r.p2s;
        d["normal_front"] = r.normal_front;
        d["normal_back"] = r.normal_back;
        d["normal_error"] = r.normal_error;
        d["samples"] = r.samples;
        d["seed"] = r.seed;
        d["config_hash"] = r.config_hash;
        return d;
      },
      py::arg("recon_vertices"), py::arg("recon_faces"), py::arg("gt_vertices"),
      py::arg("gt_faces"), py::arg("resolution") = 128, py::arg("samples") = 10000,
      py::arg("seed") = 0);

  m.def(
      "write_tensor",
      [](const std::string& path, const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
        std::vector<std::uint64_t> dims(a.shape(), a.shape() + a.ndim());
        write_tensor(path, dims, std::span(a.data(), static_cast<std::size_t>(a.size())));
      },
      py::arg("path"), py::arg("array"));
  m.def(
      "read_tensor",
      [](const std::string& path) {
        const Tensor t = read_tensor(path);
        std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
        py::array_t<float> out(shape);
        std::copy(t.data.begin(), t.data.end(), out.mutable_data());
        return out;
      },
      py::arg("path"));

  m.def(
      "selftest",
      [](std::uint64_t seed) {
        std::vector<std::tuple<std::string, bool, std::string>> out;
        for (const auto& r : oracles::run_selftest(seed)) out.emplace_back(r.name, r.passed, r.detail);
        return out;
      },
      py::arg("seed") = 0, "List of (check, passed, detail)");
}
