#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bevlab/clustering.hpp"
#include "bevlab/depth_labels.hpp"
#include "bevlab/dynamics.hpp"
#include "bevlab/error.hpp"
#include "bevlab/eval.hpp"
#include "bevlab/hungarian.hpp"
#include "bevlab/losses.hpp"
#include "bevlab/mask_bev.hpp"
#include "bevlab/splat.hpp"
#include "bevlab/stereo.hpp"

namespace py = pybind11;
using namespace bevlab;

namespace {

template <typename T>
using Array = py::array_t<T, py::array::c_style | py::array::forcecast>;

template <typename R, typename T>
R to_raster(const Array<T>& a, const char* name) {
  if (a.ndim() != 2) throw py::value_error(std::string(name) + " must be 2-D");
  R r(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  const T* p = a.data();
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<typename R::value_type>(p[i]);
  return r;
}

template <typename T, typename R>
Array<T> to_array(const R& r) {
  Array<T> out({r.height(), r.width()});
  T* p = out.mutable_data();
  for (std::size_t i = 0; i < r.size(); ++i) p[i] = static_cast<T>(r[i]);
  return out;
}

std::vector<int> to_labels(const Array<long long>& a) {
  if (a.ndim() != 1) throw py::value_error("labels must be 1-D");
  return {a.data(), a.data() + a.size()};
}

Region parse_region(const std::string& name) {
  if (name == "unoccluded") return Region::Unoccluded;
  if (name == "occluded") return Region::Occluded;
  if (name == "both") return Region::Both;
  throw py::value_error("region must be unoccluded, occluded or both");
}

// Grids from numpy: negative labels / NaN values mark invalid cells.
GridConfig grid_like(py::ssize_t rows, py::ssize_t cols) {
  return GridConfig::ego_centered(static_cast<int>(rows), static_cast<int>(cols), 0.1);
}

LabelGrid label_grid(const Array<long long>& a) {
  if (a.ndim() != 2) throw py::value_error("label grid must be 2-D");
  LabelGrid g(grid_like(a.shape(0), a.shape(1)), 1, 0, true);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    if (a.data()[i] >= 0) {
      g.at(i) = static_cast<std::uint16_t>(a.data()[i]);
      g.valid[i] = 1;
    }
  }
  return g;
}

PartitionGrid partition_grid(const Array<std::uint8_t>& a) {
  if (a.ndim() != 2) throw py::value_error("partition must be 2-D");
  PartitionGrid g(grid_like(a.shape(0), a.shape(1)), 1, CellState::OutsideFov, false);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    if (a.data()[i] > 2) throw py::value_error("partition values must be 0, 1 or 2");
    g.at(i) = static_cast<CellState>(a.data()[i]);
  }
  return g;
}

FeatureGrid feature_grid(const Array<double>& a) {
  if (a.ndim() != 2) throw py::value_error("elevation grid must be 2-D");
  FeatureGrid g(grid_like(a.shape(0), a.shape(1)), 1, 0.0, true);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    if (std::isfinite(a.data()[i])) {
      g.at(i) = a.data()[i];
      g.valid[i] = 1;
    }
  }
  return g;
}

py::dict iou_dict(const IouReport& r) {
  py::dict per_class;
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    if (r.per_class[c]) per_class[py::int_(c)] = *r.per_class[c];
  }
  py::dict d;
  d["per_class"] = per_class;
  d["miou"] = r.miou;
  return d;
}

std::vector<Eigen::Vector3d> to_points(const Eigen::MatrixXd& m) {
  if (m.cols() != 3) throw py::value_error("points must be N x 3");
  std::vector<Eigen::Vector3d> pts(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) pts[static_cast<std::size_t>(i)] = m.row(i).transpose();
  return pts;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of bevlab: depth labels, mask merging, losses and evaluation.";

  static py::exception<Error> error_type(m, "BevlabError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, e.what());
    }
  });

  m.def(
      "stereo_disparity",
      [](const Array<std::uint8_t>& left, const Array<std::uint8_t>& right, int max_disparity, int block_radius,
         int num_paths) {
        StereoConfig cfg;
        cfg.max_disparity = max_disparity;
        cfg.block_radius = block_radius;
        cfg.num_paths = num_paths;
        const DisparityMap d = stereo_disparity(to_raster<GrayImage>(left, "left"),
                                                to_raster<GrayImage>(right, "right"), cfg);
        Array<double> out({d.height(), d.width()});
        for (int r = 0; r < d.height(); ++r) {
          for (int c = 0; c < d.width(); ++c) {
            out.mutable_at(r, c) = d.is_valid(r, c) ? d.values(r, c) : std::numeric_limits<double>::quiet_NaN();
          }
        }
        return out;
      },
      py::arg("left"), py::arg("right"), py::arg("max_disparity") = 64, py::arg("block_radius") = 2,
      py::arg("num_paths") = 8, "SGM disparity in pixels; NaN where invalid.");

  m.def(
      "consistency_filter",
      [](const Array<double>& lidar, const Array<double>& stereo, double rel_threshold) {
        return to_array<double>(consistency_filter(to_raster<DepthImage>(lidar, "lidar"),
                                                   to_raster<DepthImage>(stereo, "stereo"), rel_threshold));
      },
      py::arg("lidar"), py::arg("stereo"), py::arg("rel_threshold") = 0.3);

  m.def(
      "idw_infill",
      [](const Array<double>& sparse, int radius, double power, double edge_sigma,
         const std::optional<Array<std::uint8_t>>& guide) {
        IdwConfig cfg{radius, power, edge_sigma};
        const DepthImage d = to_raster<DepthImage>(sparse, "sparse");
        if (guide) {
          const GrayImage g = to_raster<GrayImage>(*guide, "guide");
          return to_array<double>(idw_infill(d, cfg, &g));
        }
        return to_array<double>(idw_infill(d, cfg));
      },
      py::arg("sparse"), py::arg("radius") = 4, py::arg("power") = 2.0, py::arg("edge_sigma") = 0.0,
      py::arg("guide") = py::none());

  m.def(
      "bin_depth",
      [](const Array<double>& depth, int num_bins, double d_min, double d_max) {
        return to_array<std::uint16_t>(bin_depth(to_raster<DepthImage>(depth, "depth"), num_bins, d_min, d_max).bins);
      },
      py::arg("depth"), py::arg("num_bins") = 128, py::arg("d_min") = 0.5, py::arg("d_max") = 51.2);

  m.def(
      "igmm_merge",
      [](const Array<std::uint16_t>& m1, const Array<std::uint16_t>& m2, std::uint16_t max_label) {
        const MergeResult r = igmm_merge(to_raster<LabelMask>(m1, "m1"), to_raster<LabelMask>(m2, "m2"), max_label);
        py::dict d;
        d["merged"] = to_array<std::uint16_t>(r.merged);
        d["relabeled"] = to_array<std::uint16_t>(r.relabeled);
        d["label_map"] = r.label_map;
        d["max_label"] = r.max_label;
        return d;
      },
      py::arg("m1"), py::arg("m2"), py::arg("max_label") = 0);

  m.def(
      "classify_dynamic",
      [](const Eigen::MatrixXd& query, const Eigen::MatrixXd& static_points, double voxel, int k, double radius) {
        const auto pts = to_points(static_points);
        const VoxelMap map = VoxelMap::from_points(pts, voxel);
        PointCloud cloud;
        cloud.frame = Frame::World;
        cloud.points = to_points(query);
        const auto flags = classify_dynamic(cloud, map, k, radius);
        std::vector<bool> out(flags.size());
        for (std::size_t i = 0; i < flags.size(); ++i) out[i] = flags[i] == Motion::Dynamic;
        return out;
      },
      py::arg("query"), py::arg("static_points"), py::arg("voxel") = 0.2, py::arg("k") = 1, py::arg("radius") = 0.2,
      "True for query points with fewer than k static neighbours within radius.");

  m.def(
      "splat",
      [](const Eigen::MatrixXd& points, const Eigen::MatrixXd& features, int rows, int cols, double resolution) {
        PointCloud cloud;
        cloud.points = to_points(points);
        cloud.features = features;
        const SplatResult r = splat_features(cloud, GridConfig::ego_centered(rows, cols, resolution));
        const int z = r.features.channels;
        Array<double> f({rows, cols, z});
        Array<double> w({rows, cols});
        for (std::size_t c = 0; c < r.features.cell_count(); ++c) {
          for (int ch = 0; ch < z; ++ch) {
            f.mutable_data()[c * static_cast<std::size_t>(z) + static_cast<std::size_t>(ch)] =
                r.features.is_valid(c) ? r.features.at(c, ch) : std::numeric_limits<double>::quiet_NaN();
          }
          w.mutable_data()[c] = r.weight.at(c);
        }
        return py::make_tuple(f, w, r.dropped);
      },
      py::arg("points"), py::arg("features"), py::arg("rows") = 256, py::arg("cols") = 256,
      py::arg("resolution") = 0.1, "Bilinear splat in the ego grid frame: (features HxWxZ, weight HxW, dropped).");

  m.def(
      "supcon_loss",
      [](const Eigen::MatrixXd& z, const Array<long long>& labels, double tau) {
        return supcon_loss(z, to_labels(labels), tau);
      },
      py::arg("features"), py::arg("labels"), py::arg("tau") = 0.1);
  m.def(
      "supcon_gradient",
      [](const Eigen::MatrixXd& z, const Array<long long>& labels, double tau) {
        return supcon_gradient(z, to_labels(labels), tau);
      },
      py::arg("features"), py::arg("labels"), py::arg("tau") = 0.1);
  m.def(
      "elevation_l1",
      [](const std::vector<double>& pred, const std::vector<double>& gt, const std::vector<std::uint8_t>& mask) {
        return elevation_l1(pred, gt, mask);
      },
      py::arg("pred"), py::arg("gt"), py::arg("mask"));

  m.def(
      "hungarian",
      [](const Eigen::MatrixXd& cost) {
        const Assignment a = hungarian(cost);
        return py::make_tuple(a.row_to_col, a.total);
      },
      py::arg("cost"), "Minimum-cost assignment: (row_to_col with -1 for unmatched, total).");

  m.def(
      "kmeans",
      [](const Eigen::MatrixXd& x, int k, std::uint64_t seed, int max_iters, double tol) {
        const KMeansResult r = kmeans(x, {k, seed, max_iters, tol});
        py::dict d;
        d["centroids"] = r.model.centroids;
        d["assignments"] = r.assignments;
        d["objective_history"] = r.objective_history;
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("features"), py::arg("k"), py::arg("seed"), py::arg("max_iters") = 100, py::arg("tol") = 1e-6);

  py::class_<PcaModel>(m, "PcaModel")
      .def_readonly("mean", &PcaModel::mean)
      .def_readonly("components", &PcaModel::components)
      .def_readonly("eigenvalues", &PcaModel::eigenvalues)
      .def_readonly("rank_deficient", &PcaModel::rank_deficient)
      .def("explained_variance_fraction", &PcaModel::explained_variance_fraction)
      .def("transform", [](const PcaModel& self, const Eigen::MatrixXd& x) { return pca_transform(self, x); });
  m.def("pca_fit", &pca_fit, py::arg("features"), py::arg("out_dim"));

  m.def(
      "iou",
      [](const Array<long long>& pred, const Array<long long>& gt, const Array<std::uint8_t>& partition,
         const std::string& region, int num_classes) {
        return iou_dict(iou(label_grid(pred), label_grid(gt), parse_region(region), partition_grid(partition),
                            num_classes));
      },
      py::arg("pred"), py::arg("gt"), py::arg("partition"), py::arg("region") = "both", py::arg("num_classes") = 0,
      "Per-class IoU and mIoU; negative labels are invalid, partition is 0 outside, 1 observed, 2 occluded.");

  m.def(
      "mae",
      [](const Array<double>& pred, const Array<double>& gt, const Array<std::uint8_t>& partition,
         const std::string& region) {
        return mae(feature_grid(pred), feature_grid(gt), parse_region(region), partition_grid(partition));
      },
      py::arg("pred"), py::arg("gt"), py::arg("partition"), py::arg("region") = "both",
      "Mean absolute error over cells finite in both grids.");

  m.def(
      "unsup_ssc_eval",
      [](const Eigen::MatrixXd& val, const Array<long long>& val_labels, const Eigen::MatrixXd& test,
         const Array<long long>& test_labels, int k, std::uint64_t seed) {
        UnsupConfig cfg;
        cfg.k = k;
        cfg.seed = seed;
        const UnsupResult r = unsup_ssc_eval(val, to_labels(val_labels), test, to_labels(test_labels), cfg);
        py::dict d = iou_dict(r.report);
        d["cluster_to_class"] = r.model.cluster_to_class;
        d["predictions"] = r.test_predictions;
        return d;
      },
      py::arg("val"), py::arg("val_labels"), py::arg("test"), py::arg("test_labels"), py::arg("k"), py::arg("seed"));
}
