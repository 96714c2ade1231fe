#include "agentvln/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "agentvln/errors.hpp"

namespace agentvln {

CameraIntrinsics CameraIntrinsics::from_hfov(int width, int height,
                                             double hfov_deg) {
  const double half = hfov_deg * std::numbers::pi / 360.0;
  CameraIntrinsics K;
  K.width = width;
  K.height = height;
  K.cx = width / 2.0;
  K.cy = height / 2.0;
  K.fx = K.cx / std::tan(half);
  K.fy = K.fx;
  return K;
}

CameraIntrinsics default_camera() {
  return CameraIntrinsics::from_hfov(640, 480, 110.0);
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 K;
  K << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return K;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw InvalidArgument("focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw InvalidArgument("principal point outside the image");
  }
}

void Pose::validate(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw InvalidArgument("pose has non-finite entries");
  }
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > tol || std::abs(rotation.determinant() - 1.0) > tol) {
    std::ostringstream os;
    os << "rotation is not in SO(3) (orthogonality error " << ortho << ")";
    throw InvalidArgument(os.str());
  }
}

double Pose::heading() const {
  const Vec3 axis = optical_axis();
  return std::atan2(axis.y(), axis.x());
}

DepthMap::DepthMap(int width, int height)
    : width_(width),
      height_(height),
      values_(static_cast<std::size_t>(width) * height, 0.0),
      valid_(static_cast<std::size_t>(width) * height, 0) {}

void DepthMap::set(int u, int v, double depth) {
  if (!(depth > 0.0)) throw NonPositiveDepth("depth sample must be positive");
  values_[index(u, v)] = depth;
  valid_[index(u, v)] = 1;
}

void DepthMap::invalidate(int u, int v) {
  values_[index(u, v)] = 0.0;
  valid_[index(u, v)] = 0;
}

bool DepthMap::lookup(const PixelPoint& p, double& depth) const {
  const int u = static_cast<int>(std::lround(p.u));
  const int v = static_cast<int>(std::lround(p.v));
  if (!in_bounds(u, v) || !valid(u, v)) return false;
  depth = at(u, v);
  return true;
}

Pose heading_pose(double x, double y, double theta, double camera_height) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Pose pose;
  pose.rotation.col(0) = Vec3(s, -c, 0.0);
  pose.rotation.col(1) = Vec3(0.0, 0.0, -1.0);
  pose.rotation.col(2) = Vec3(c, s, 0.0);
  pose.translation = Vec3(x, y, camera_height);
  return pose;
}

WorldPoint back_project(const PixelPoint& pixel, double depth,
                        const CameraIntrinsics& K, const Pose& pose) {
  if (!(depth > 0.0)) throw NonPositiveDepth("back_project needs depth > 0");
  const Vec3 homogeneous(pixel.u, pixel.v, 1.0);
  const Vec3 camera = depth * (K.matrix().inverse() * homogeneous);
  return WorldPoint::from(pose.rotation * camera + pose.translation);
}

CameraPoint to_camera(const WorldPoint& point, const Pose& pose) {
  const Vec3 c = pose.rotation.transpose() * (point.vec() - pose.translation);
  return {c.x(), c.y(), c.z()};
}

Projection project(const WorldPoint& point, const CameraIntrinsics& K,
                   const Pose& pose) {
  const Vec3 camera =
      pose.rotation.transpose() * (point.vec() - pose.translation);
  const double s = camera.z();
  if (s <= kBehindEpsilon) return Behind{};
  const Vec3 scaled = K.matrix() * camera;
  const PixelPoint pixel{scaled.x() / s, scaled.y() / s};
  if (!K.contains(pixel.u, pixel.v)) return OutOfFrame{pixel, s};
  return ProjectionResult{pixel, s};
}

WorldPoint pixel_to_world(const PixelPoint& pixel, const DepthMap& depth_map,
                          const CameraIntrinsics& K, const Pose& pose) {
  double d = 0.0;
  if (!depth_map.lookup(pixel, d)) {
    std::ostringstream os;
    os << "no valid depth at (" << pixel.u << ", " << pixel.v << ")";
    throw InvalidDepthPixel(os.str());
  }
  const Vec3 camera((pixel.u - K.cx) * d / K.fx, (pixel.v - K.cy) * d / K.fy,
                    d);
  return WorldPoint::from(pose.rotation * camera + pose.translation);
}

double wrap_angle(double a) {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}

}  // namespace agentvln
