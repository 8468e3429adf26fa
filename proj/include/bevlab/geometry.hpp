#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "bevlab/raster.hpp"

namespace bevlab {

/// Rigid transform p' = R p + t with a timestamp.
///
/// Conventions: right-handed, z-up world; camera frame x-right, y-down,
/// z-forward. A camera's extrinsics map world to camera.
struct Pose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double timestamp = 0.0;

  static Pose identity(double timestamp = 0.0);
  static Pose from_yaw(double yaw, const Eigen::Vector3d& translation, double timestamp = 0.0);

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  Eigen::Matrix3d rotation_matrix() const { return rotation.toRotationMatrix(); }
  Pose inverse() const;
  /// Throws InvalidArgument if the quaternion is not unit within 1e-9.
  void validate() const;

  /// (a * b).apply(p) == a.apply(b.apply(p)); the timestamp of `a` is kept.
  friend Pose operator*(const Pose& a, const Pose& b);
};

/// Gravity-aligned frame under a sensor pose: same yaw and xy, z = 0, no roll/pitch.
Pose ego_frame(const Pose& sensor_pose);

enum class Frame : std::uint8_t { Sensor = 0, World = 1 };

struct PointCloud {
  double timestamp = 0.0;
  Frame frame = Frame::Sensor;
  std::vector<Eigen::Vector3d> points;
  std::vector<std::uint16_t> labels;  // empty or one per point
  Eigen::MatrixXd features;           // 0 x 0 or N x Z

  std::size_t size() const noexcept { return points.size(); }
  bool has_labels() const noexcept { return !labels.empty(); }
  bool has_features() const noexcept { return features.size() > 0; }
  Eigen::Index feature_dim() const noexcept { return has_features() ? features.cols() : 0; }
  /// Finite coordinates, aligned label/feature counts.
  void validate() const;
};

struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  Pose extrinsics;  // world -> camera

  void validate() const;
  Eigen::Matrix3d intrinsic_matrix() const;
};

/// World -> camera at time t for a camera rigidly mounted on a sensor:
/// `rig.extrinsics` is sensor -> camera and `sensor_pose` sensor -> world.
CameraModel camera_at(const CameraModel& rig, const Pose& sensor_pose);

/// Continuous pixel coordinates and camera-frame depth of one point.
struct PixelProjection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

/// Homogeneous projection K [I|0] T p followed by the perspective divide.
/// Empty when the point is not strictly in front of the camera.
std::optional<PixelProjection> project_point(const CameraModel& camera, const Eigen::Vector3d& world);

/// Inverse of project_point: T^-1 [K^-1 (u d, v d, d)].
Eigen::Vector3d backproject_pixel(const CameraModel& camera, double u, double v, double depth);

struct ProjectedPoint {
  int u = 0;
  int v = 0;
  double depth = 0.0;
  std::size_t index = 0;
};

struct Projection {
  std::vector<ProjectedPoint> points;
  std::size_t omitted = 0;  // behind the camera or outside the image
};

/// Projects every point; pixels are rounded to nearest, entries kept only
/// when depth > 0 and the pixel lies inside the image.
Projection project_cloud(const PointCloud& cloud, const CameraModel& camera);

/// Z-buffered rendering of a projection: the smallest depth wins per pixel.
DepthImage render_depth(const Projection& projection, int width, int height);
DepthImage render_depth(const PointCloud& cloud, const CameraModel& camera);

/// Calls fn(row, col, world_point) for each valid pixel, in row-major order.
template <typename Fn>
void for_each_backprojected(const DepthImage& depth, const CameraModel& camera, Fn&& fn) {
  require(depth.width() == camera.width && depth.height() == camera.height, ErrorCode::DimensionMismatch,
          "depth image and camera sizes differ");
  for (int row = 0; row < depth.height(); ++row) {
    for (int col = 0; col < depth.width(); ++col) {
      const double d = depth(row, col);
      if (d > 0.0) fn(row, col, backproject_pixel(camera, col, row, d));
    }
  }
}

/// One world-frame point per valid pixel.
PointCloud backproject_depth(const DepthImage& depth, const CameraModel& camera);

/// Applies `pose` to every point; labels and features are carried through.
PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose);

/// Transforms each sensor cloud by its pose and concatenates the results.
/// Throws LengthMismatch for unequal list lengths and InvalidArgument when
/// a cloud and its pose disagree on the timestamp by more than 1e-6 s.
PointCloud accumulate_clouds(std::span<const PointCloud> clouds, std::span<const Pose> poses);

}  // namespace bevlab
