#include <cmath>
#include <random>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "agentvln/errors.hpp"
#include "agentvln/geometry.hpp"

using namespace agentvln;

namespace {

const CameraIntrinsics K0 = default_camera();
const Pose P0 = heading_pose(0, 0, 0, 1.25);

}  // namespace

TEST(Camera, DefaultIntrinsics) {
  EXPECT_EQ(K0.width, 640);
  EXPECT_EQ(K0.height, 480);
  EXPECT_DOUBLE_EQ(K0.cx, 320.0);
  EXPECT_DOUBLE_EQ(K0.cy, 240.0);
  EXPECT_NEAR(K0.fx, 320.0 / std::tan(55.0 * M_PI / 180.0), 1e-12);
  EXPECT_NEAR(K0.fx, 224.06, 0.01);
  EXPECT_DOUBLE_EQ(K0.fx, K0.fy);
}

TEST(Camera, ValidateRejectsBadIntrinsics) {
  CameraIntrinsics k = K0;
  k.fx = 0;
  EXPECT_THROW(k.validate(), InvalidArgument);
  k = K0;
  k.cx = 640;
  EXPECT_THROW(k.validate(), InvalidArgument);
}

TEST(HeadingPose, IdentityHeading) {
  const Mat3& R = P0.rotation;
  EXPECT_NEAR((R.col(0) - Vec3(0, -1, 0)).norm(), 0, 1e-15);
  EXPECT_NEAR((R.col(1) - Vec3(0, 0, -1)).norm(), 0, 1e-15);
  EXPECT_NEAR((R.col(2) - Vec3(1, 0, 0)).norm(), 0, 1e-15);
  EXPECT_EQ(P0.translation, Vec3(0, 0, 1.25));
}

TEST(HeadingPose, QuarterTurn) {
  const Pose p = heading_pose(1, 2, M_PI / 2, 1.25);
  EXPECT_NEAR((p.optical_axis() - Vec3(0, 1, 0)).norm(), 0, 1e-15);
  EXPECT_EQ(p.translation, Vec3(1, 2, 1.25));
}

TEST(HeadingPose, Orthonormal) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> th(-10, 10);
  for (int i = 0; i < 200; ++i) {
    const Pose p = heading_pose(0, 0, th(rng), 1.25);
    EXPECT_LT((p.rotation.transpose() * p.rotation - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(p.rotation.determinant(), 1.0, 1e-12);
    EXPECT_NO_THROW(p.validate());
  }
}

TEST(HeadingPose, OppositeHeadingsCompose) {
  const double t = 0.7;
  const Mat3 a = heading_pose(0, 0, t, 1).rotation;
  const Mat3 b = heading_pose(0, 0, -t, 1).rotation;
  const Mat3 z = heading_pose(0, 0, 0, 1).rotation;
  // Camera-to-world rotations R(t) = Rz(t) R(0), so R(t) R(0)^T R(-t) = R(0).
  EXPECT_LT((a * z.transpose() * b - z).norm(), 1e-12);
}

TEST(BackProject, FloorPointAhead) {
  const WorldPoint w = back_project({320, 240 + K0.fy * 1.25 / 2.0}, 2.0, K0, P0);
  EXPECT_NEAR(w.x, 2.0, 1e-12);
  EXPECT_NEAR(w.y, 0.0, 1e-12);
  EXPECT_NEAR(w.z, 0.0, 1e-12);
  const WorldPoint r = back_project({320, 380.04}, 2.0, K0, P0);
  EXPECT_NEAR(r.z, 0.0, 1e-3);
}

TEST(BackProject, PrincipalRay) {
  const WorldPoint w = back_project({K0.cx, K0.cy}, 4.2, K0, P0);
  EXPECT_NEAR(w.x, 4.2, 1e-12);
  EXPECT_NEAR(w.y, 0.0, 1e-12);
  EXPECT_NEAR(w.z, 1.25, 1e-12);
}

TEST(BackProject, NonPositiveDepth) {
  EXPECT_THROW(back_project({1, 1}, 0.0, K0, P0), NonPositiveDepth);
  EXPECT_THROW(back_project({1, 1}, -1.0, K0, P0), NonPositiveDepth);
}

TEST(Project, FloorPointAhead) {
  const auto r = project({2, 0, 0}, K0, P0);
  ASSERT_TRUE(std::holds_alternative<ProjectionResult>(r));
  const auto& p = std::get<ProjectionResult>(r);
  EXPECT_NEAR(p.pixel.u, 320.0, 1e-12);
  EXPECT_NEAR(p.pixel.v, 380.04, 0.01);
  EXPECT_DOUBLE_EQ(p.depth_scale, 2.0);
}

TEST(Project, BehindAndOutOfFrame) {
  EXPECT_TRUE(std::holds_alternative<Behind>(project({-1, 0, 1.25}, K0, P0)));
  EXPECT_TRUE(std::holds_alternative<Behind>(project({0, 0, 1.25}, K0, P0)));
  EXPECT_TRUE(std::holds_alternative<Behind>(project({0.5e-6, 0.3, 1.0}, K0, P0)));
  const auto r = project({0, 10, 0}, K0, P0);
  EXPECT_TRUE(std::holds_alternative<Behind>(r) || std::holds_alternative<OutOfFrame>(r));
  const auto o = project({1, 10, 0}, K0, P0);
  ASSERT_TRUE(std::holds_alternative<OutOfFrame>(o));
  EXPECT_LT(std::get<OutOfFrame>(o).pixel.u, 0.0);
}

TEST(Project, DepthScaleIsCameraZ) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-5, 5);
  for (int i = 0; i < 500; ++i) {
    const Pose p = heading_pose(U(rng), U(rng), U(rng), 1.25);
    const WorldPoint w{U(rng), U(rng), U(rng) / 2 + 1};
    const CameraPoint c = to_camera(w, p);
    const auto r = project(w, K0, p);
    if (const auto* ok = std::get_if<ProjectionResult>(&r)) {
      EXPECT_EQ(ok->depth_scale, c.z);
    } else if (const auto* oof = std::get_if<OutOfFrame>(&r)) {
      EXPECT_EQ(oof->depth_scale, c.z);
    } else {
      EXPECT_LE(c.z, kBehindEpsilon);
    }
  }
}

TEST(RoundTrip, RandomPointsInFront) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-20, 20), Th(-M_PI, M_PI);
  int checked = 0;
  while (checked < 1000) {
    const Pose p = heading_pose(U(rng), U(rng), Th(rng), 1.25);
    const WorldPoint w{U(rng), U(rng), U(rng) / 4};
    const auto r = project(w, K0, p);
    const auto* ok = std::get_if<ProjectionResult>(&r);
    if (!ok) continue;
    const WorldPoint b = back_project(ok->pixel, ok->depth_scale, K0, p);
    EXPECT_LT((b.vec() - w.vec()).norm(), 1e-6);
    ++checked;
  }
}

TEST(PixelToWorld, MatchesBackProject) {
  DepthMap d(640, 480);
  d.set(320, 240, 3.5);
  d.set(100, 400, 1.75);
  const WorldPoint a = pixel_to_world({320, 240}, d, K0, P0);
  EXPECT_NEAR(a.x, 3.5, 1e-12);
  EXPECT_NEAR(a.y, 0.0, 1e-12);
  EXPECT_NEAR(a.z, 1.25, 1e-12);
  const Pose p = heading_pose(1.5, -2, 2.2, 1.25);
  const WorldPoint b = pixel_to_world({100, 400}, d, K0, p);
  const WorldPoint c = back_project({100, 400}, 1.75, K0, p);
  EXPECT_LT((b.vec() - c.vec()).norm(), 1e-12);
}

TEST(PixelToWorld, InvalidDepth) {
  DepthMap d(640, 480);
  EXPECT_THROW(pixel_to_world({10, 10}, d, K0, P0), InvalidDepthPixel);
  d.set(10, 10, 2.0);
  d.invalidate(10, 10);
  EXPECT_THROW(pixel_to_world({10, 10}, d, K0, P0), InvalidDepthPixel);
}

TEST(DepthMap, RejectsNonPositive) {
  DepthMap d(4, 4);
  EXPECT_THROW(d.set(1, 1, 0.0), NonPositiveDepth);
  double out = 0;
  d.set(2, 1, 1.5);
  EXPECT_TRUE(d.lookup({1.6, 0.6}, out));
  EXPECT_EQ(out, 1.5);
}

TEST(WrapAngle, Range) {
  for (double a = -20; a < 20; a += 0.37) {
    const double w = wrap_angle(a);
    EXPECT_GT(w, -M_PI - 1e-12);
    EXPECT_LE(w, M_PI + 1e-12);
    EXPECT_NEAR(std::remainder(w - a, 2 * M_PI), 0.0, 1e-9);
  }
}
