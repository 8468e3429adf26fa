#include "bevlab/geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace bevlab {

Pose Pose::identity(double timestamp) {
  Pose p;
  p.timestamp = timestamp;
  return p;
}

Pose Pose::from_yaw(double yaw, const Eigen::Vector3d& translation, double timestamp) {
  Pose p;
  p.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()));
  p.translation = translation;
  p.timestamp = timestamp;
  return p;
}

Pose Pose::inverse() const {
  Pose inv;
  inv.rotation = rotation.conjugate();
  inv.translation = -(inv.rotation * translation);
  inv.timestamp = timestamp;
  return inv;
}

void Pose::validate() const {
  require(std::abs(rotation.norm() - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
          "pose quaternion is not unit norm");
  require(translation.allFinite() && std::isfinite(timestamp), ErrorCode::InvalidArgument,
          "pose has non-finite values");
}

Pose operator*(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  out.timestamp = a.timestamp;
  return out;
}

Pose ego_frame(const Pose& sensor_pose) {
  const Eigen::Vector3d forward = sensor_pose.rotation * Eigen::Vector3d::UnitX();
  const double yaw = std::atan2(forward.y(), forward.x());
  return Pose::from_yaw(yaw, {sensor_pose.translation.x(), sensor_pose.translation.y(), 0.0},
                        sensor_pose.timestamp);
}

void PointCloud::validate() const {
  for (const auto& p : points) {
    require(p.allFinite(), ErrorCode::InvalidArgument, "point cloud has non-finite coordinates");
  }
  require(labels.empty() || labels.size() == points.size(), ErrorCode::LengthMismatch,
          "label count differs from point count");
  require(!has_features() || static_cast<std::size_t>(features.rows()) == points.size(), ErrorCode::LengthMismatch,
          "feature count differs from point count");
}

void CameraModel::validate() const {
  require(fx > 0.0 && fy > 0.0, ErrorCode::InvalidArgument, "focal lengths must be positive");
  require(width > 0 && height > 0, ErrorCode::InvalidArgument, "image size must be positive");
  require(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height, ErrorCode::InvalidArgument,
          "principal point outside the image");
  extrinsics.validate();
  const Eigen::Matrix3d r = extrinsics.rotation_matrix();
  require((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-9 &&
              std::abs(r.determinant() - 1.0) <= 1e-9,
          ErrorCode::InvalidArgument, "extrinsic rotation is not a proper rotation");
}

Eigen::Matrix3d CameraModel::intrinsic_matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

CameraModel camera_at(const CameraModel& rig, const Pose& sensor_pose) {
  CameraModel cam = rig;
  cam.extrinsics = rig.extrinsics * sensor_pose.inverse();
  cam.extrinsics.timestamp = sensor_pose.timestamp;
  return cam;
}

std::optional<PixelProjection> project_point(const CameraModel& camera, const Eigen::Vector3d& world) {
  const Eigen::Vector3d pc = camera.extrinsics.apply(world);
  if (!(pc.z() > 0.0)) return std::nullopt;
  // K [I|0] gives (u d, v d, d); divide by d.
  const double ud = camera.fx * pc.x() + camera.cx * pc.z();
  const double vd = camera.fy * pc.y() + camera.cy * pc.z();
  return PixelProjection{ud / pc.z(), vd / pc.z(), pc.z()};
}

Eigen::Vector3d backproject_pixel(const CameraModel& camera, double u, double v, double depth) {
  const Eigen::Vector3d pc((u - camera.cx) * depth / camera.fx, (v - camera.cy) * depth / camera.fy, depth);
  return camera.extrinsics.rotation.conjugate() * (pc - camera.extrinsics.translation);
}

Projection project_cloud(const PointCloud& cloud, const CameraModel& camera) {
  Projection out;
  out.points.reserve(cloud.size());
  const Eigen::Matrix3d r = camera.extrinsics.rotation_matrix();
  const Eigen::Vector3d t = camera.extrinsics.translation;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d pc = r * cloud.points[i] + t;
    if (!(pc.z() > 0.0)) {
      ++out.omitted;
      continue;
    }
    const double u = std::floor(camera.fx * pc.x() / pc.z() + camera.cx + 0.5);
    const double v = std::floor(camera.fy * pc.y() / pc.z() + camera.cy + 0.5);
    if (u < 0.0 || v < 0.0 || u >= camera.width || v >= camera.height) {
      ++out.omitted;
      continue;
    }
    out.points.push_back({static_cast<int>(u), static_cast<int>(v), pc.z(), i});
  }
  return out;
}

DepthImage render_depth(const Projection& projection, int width, int height) {
  DepthImage depth(width, height, 0.0);
  for (const auto& p : projection.points) {
    if (!depth.contains(p.v, p.u)) continue;
    double& d = depth(p.v, p.u);
    if (d == 0.0 || p.depth < d) d = p.depth;
  }
  return depth;
}

DepthImage render_depth(const PointCloud& cloud, const CameraModel& camera) {
  return render_depth(project_cloud(cloud, camera), camera.width, camera.height);
}

PointCloud backproject_depth(const DepthImage& depth, const CameraModel& camera) {
  PointCloud cloud;
  cloud.frame = Frame::World;
  cloud.timestamp = camera.extrinsics.timestamp;
  for_each_backprojected(depth, camera,
                         [&](int, int, const Eigen::Vector3d& p) { cloud.points.push_back(p); });
  return cloud;
}

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose) {
  PointCloud out = cloud;
  out.frame = Frame::World;
  const Eigen::Matrix3d r = pose.rotation_matrix();
  for (auto& p : out.points) p = r * p + pose.translation;
  return out;
}

PointCloud accumulate_clouds(std::span<const PointCloud> clouds, std::span<const Pose> poses) {
  require(clouds.size() == poses.size(), ErrorCode::LengthMismatch,
          "got " + std::to_string(clouds.size()) + " clouds and " + std::to_string(poses.size()) + " poses");
  PointCloud out;
  out.frame = Frame::World;
  if (clouds.empty()) return out;

  bool all_labels = true;
  Eigen::Index dim = clouds.front().feature_dim();
  std::size_t total = 0;
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    require(std::abs(clouds[i].timestamp - poses[i].timestamp) <= 1e-6, ErrorCode::InvalidArgument,
            "cloud " + std::to_string(i) + " and its pose have different timestamps");
    all_labels = all_labels && clouds[i].has_labels();
    if (clouds[i].feature_dim() != dim) dim = 0;
    total += clouds[i].size();
  }
  out.timestamp = clouds.back().timestamp;
  out.points.reserve(total);
  if (all_labels) out.labels.reserve(total);
  if (dim > 0) out.features.resize(static_cast<Eigen::Index>(total), dim);

  Eigen::Index row = 0;
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    const Eigen::Matrix3d r = poses[i].rotation_matrix();
    for (const auto& p : clouds[i].points) out.points.push_back(r * p + poses[i].translation);
    if (all_labels) out.labels.insert(out.labels.end(), clouds[i].labels.begin(), clouds[i].labels.end());
    if (dim > 0) {
      out.features.middleRows(row, clouds[i].features.rows()) = clouds[i].features;
      row += clouds[i].features.rows();
    }
  }
  return out;
}

double density(const DepthImage& depth) {
  if (depth.empty()) return 0.0;
  std::size_t valid = 0;
  for (double d : depth.data()) valid += d > 0.0;
  return static_cast<double>(valid) / static_cast<double>(depth.size());
}

}  // namespace bevlab
