#pragma once

// Pinhole camera and rigid-body math: the bridge between image pixels and
// world coordinates.
//
// Conventions:
//   world  - z up, floor at z = 0, meters.
//   camera - x right, y down, z forward (optical axis).
//   Pose   - rotation maps camera-frame vectors into the world frame.
//   depth  - camera-frame z ("z-depth"), not ray length.

#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace agentvln {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  // Square pixels with the principal point at the image center.
  static CameraIntrinsics from_hfov(int width, int height, double hfov_deg);

  Mat3 matrix() const;
  // Throws InvalidArgument when an invariant is violated.
  void validate() const;
  bool contains(double u, double v) const {
    return u >= 0.0 && u < width && v >= 0.0 && v < height;
  }
};

// 640x480 with a 110 degree horizontal field of view.
CameraIntrinsics default_camera();

inline constexpr double kDefaultCameraHeight = 1.25;
inline constexpr double kBehindEpsilon = 1e-6;

struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  void validate(double tol = 1e-9) const;
  Vec3 optical_axis() const { return rotation.col(2); }
  // Planar heading of the optical axis, atan2(y, x).
  double heading() const;
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 vec() const { return {x, y, z}; }
  static WorldPoint from(const Vec3& p) { return {p.x(), p.y(), p.z()}; }
};

struct CameraPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct ProjectionResult {
  PixelPoint pixel;
  double depth_scale = 0.0;
};
struct Behind {};
struct OutOfFrame {
  PixelPoint pixel;
  double depth_scale = 0.0;
};
using Projection = std::variant<ProjectionResult, Behind, OutOfFrame>;

class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  bool valid(int u, int v) const { return valid_[index(u, v)] != 0; }
  double at(int u, int v) const { return values_[index(u, v)]; }
  void set(int u, int v, double depth);
  void invalidate(int u, int v);

  bool in_bounds(int u, int v) const {
    return u >= 0 && v >= 0 && u < width_ && v < height_;
  }
  // Sample at (round(u), round(v)); nullopt-like semantics via return flag.
  bool lookup(const PixelPoint& p, double& depth) const;

  const std::vector<double>& values() const { return values_; }
  const std::vector<unsigned char>& valid_mask() const { return valid_; }

 private:
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
  std::vector<unsigned char> valid_;
};

// Level camera at (x, y, h_c) looking along world direction (cos t, sin t, 0).
Pose heading_pose(double x, double y, double theta, double camera_height);

// R * (d * K^-1 * [u v 1]^T) + t, computed through the inverse matrix.
WorldPoint back_project(const PixelPoint& pixel, double depth,
                        const CameraIntrinsics& K, const Pose& pose);

// s * [u v 1]^T = K * R^T * (P - t).
Projection project(const WorldPoint& point, const CameraIntrinsics& K,
                   const Pose& pose);

CameraPoint to_camera(const WorldPoint& point, const Pose& pose);

// Componentwise camera-frame back-projection followed by the rigid transform,
// with the depth read from the map at the rounded pixel.
WorldPoint pixel_to_world(const PixelPoint& pixel, const DepthMap& depth_map,
                          const CameraIntrinsics& K, const Pose& pose);

double wrap_angle(double a);

}  // namespace agentvln
