#include "roomgen/raycast.hpp"
#include "roomgen/scenegen.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace roomgen;
using namespace roomgen::raycast;

namespace {

// Square [-s, s]^2 in the plane z = depth, facing the origin.
SurfaceMesh wall_at(double depth, double s = 50.0, std::int32_t id = kWallId) {
  SurfaceMesh m;
  m.vertices = {{-s, -s, depth}, {s, -s, depth}, {s, s, depth}, {-s, s, depth}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  m.object_id = id;
  return m;
}

scene::AssembledScene harmonic_scene(std::uint64_t seed) {
  std::vector<harmonics::Coefficients> cs;
  for (std::uint64_t i = 0; i < 40; ++i) {
    Rng rng(derive_seed(5, "object", i));
    cs.push_back(harmonics::sample_coefficients(rng));
  }
  const auto set = ObjectSet::from_harmonics(std::move(cs), {32, 64});
  for (std::uint64_t a = 0;; ++a) {
    Rng rng(derive_seed(seed, "retry", a));
    try {
      return scene::assemble_scene(set, rng);
    } catch (const scene::SceneRejected&) {
    }
  }
}

void expect_same_hit(const std::optional<Hit>& a, const std::optional<Hit>& b) {
  ASSERT_EQ(a.has_value(), b.has_value());
  if (!a) return;
  EXPECT_EQ(a->t, b->t);
  EXPECT_EQ(a->triangle, b->triangle);
  EXPECT_EQ(a->object_id, b->object_id);
}

}  // namespace

TEST(IntersectTriangle, HitMissAndParallel) {
  const Vec3 a(0, 0, 2), e1(1, 0, 0), e2(0, 1, 0);
  const auto t = intersect_triangle({Vec3(0.25, 0.25, 0), Vec3(0, 0, 1)}, a, e1, e2);
  ASSERT_TRUE(t);
  EXPECT_NEAR(*t, 2.0, 1e-15);
  EXPECT_NEAR(*intersect_triangle({Vec3(0.25, 0.25, 0), Vec3(0, 0, 4)}, a, e1, e2), 0.5, 1e-15);
  EXPECT_NEAR(*intersect_triangle({Vec3(0.25, 0.25, 4), Vec3(0, 0, -1)}, a, e1, e2), 2.0, 1e-15);  // back face
  EXPECT_FALSE(intersect_triangle({Vec3(0.75, 0.75, 0), Vec3(0, 0, 1)}, a, e1, e2));
  EXPECT_FALSE(intersect_triangle({Vec3(0.25, 0.25, 0), Vec3(0, 0, -1)}, a, e1, e2));
  EXPECT_FALSE(intersect_triangle({Vec3(0.25, 0.25, 2), Vec3(1, 0, 0)}, a, e1, e2));
}

TEST(Bvh, MatchesBruteForceOnTriangleSoup) {
  Rng rng(1);
  const auto mesh = testkit::random_triangles(rng, 10000, -5, 5, 0.4);
  const Bvh bvh(mesh);
  EXPECT_EQ(bvh.triangle_count(), mesh.triangles.size());
  EXPECT_GT(bvh.leaf_count(), 100u);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const Ray ray{Vec3(rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(-6, 6)),
                  Vec3(rng.normal(), rng.normal(), rng.normal())};
    const auto expected = intersect_brute_force(mesh, ray);
    expect_same_hit(bvh.intersect(ray), expected);
    hits += expected.has_value();
  }
  EXPECT_GT(hits, 100);
  EXPECT_LT(hits, 1000);
}

TEST(Bvh, AxisAlignedRaysAndMisses) {
  Rng rng(2);
  const auto mesh = testkit::random_triangles(rng, 2000, 0, 1, 0.1);
  const Bvh bvh(mesh);
  for (int i = 0; i < 300; ++i) {
    Vec3 dir = Vec3::Zero();
    dir[i % 3] = i % 2 ? 1.0 : -1.0;
    const Ray ray{Vec3(rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.2)), dir};
    expect_same_hit(bvh.intersect(ray), intersect_brute_force(mesh, ray));
  }
  EXPECT_FALSE(bvh.intersect({Vec3(5, 5, 5), Vec3(1, 1, 1)}));
}

TEST(Bvh, EmptySceneNeverHits) {
  const Bvh bvh{SurfaceMesh{}};
  EXPECT_FALSE(bvh.intersect({Vec3::Zero(), Vec3::UnitX()}));
  CameraIntrinsics k;
  k.width = 16;
  k.height = 12;
  k.cx = 7.5;
  k.cy = 5.5;
  const auto frame = render_depth(bvh, k, Pose::Identity());
  for (double d : frame.depth) EXPECT_EQ(d, 0.0);
  for (auto id : frame.id_map) EXPECT_EQ(id, kNoObject);
}

TEST(RenderDepth, WallAtTwoMetersHasConstantZDepth) {
  const Bvh bvh(wall_at(2.0));
  const CameraIntrinsics k;
  const auto frame = render_depth(bvh, k, Pose::Identity());
  EXPECT_NEAR(frame.depth_at(320, 240), 2.0, 1e-12);
  EXPECT_NEAR(frame.depth_at(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(frame.depth_at(639, 479), 2.0, 1e-12);
  for (double d : frame.depth) ASSERT_NEAR(d, 2.0, 1e-12);
  for (auto id : frame.id_map) ASSERT_EQ(id, kWallId);
  EXPECT_TRUE(qualifying_objects(frame, 64).empty());
}

TEST(RenderDepth, WorkerCountDoesNotChangeFrame) {
  const auto scene = harmonic_scene(3);
  const Bvh bvh(scene::scene_mesh(scene));
  const Pose pose = look_pose({scene.spec.room_width / 2, 0.3, 1.5}, std::numbers::pi / 2, -0.3);
  CameraIntrinsics k = CameraIntrinsics{}.downscaled(2);
  const auto a = render_depth(bvh, k, pose, 1), b = render_depth(bvh, k, pose, 4);
  EXPECT_EQ(a.depth, b.depth);
  EXPECT_EQ(a.id_map, b.id_map);
}

TEST(Camera, LookPoseIsRigidAndLooksForward) {
  const Pose p = look_pose({1, 2, 1.5}, 0.7, -0.2);
  EXPECT_LT((p.linear().transpose() * p.linear() - Mat3::Identity()).norm(), 1e-12);
  EXPECT_NEAR(p.linear().determinant(), 1.0, 1e-12);
  const Vec3 fwd = p.linear().col(2);
  EXPECT_NEAR(fwd.z(), std::sin(-0.2), 1e-12);
  EXPECT_NEAR(std::atan2(fwd.y(), fwd.x()), 0.7, 1e-12);
  EXPECT_GT(p.linear().col(1).dot(Vec3::UnitZ()) * -1.0, 0.0);  // image "down" points downward
  EXPECT_NEAR(p.linear().col(0).z(), 0.0, 1e-12);                 // no roll
}

TEST(Camera, PrincipalPointRayIsOpticalAxis) {
  CameraIntrinsics k;
  k.cx = 2.5;
  k.cy = 1.5;
  k.width = 6;
  k.height = 4;
  EXPECT_EQ(pixel_direction(k, 2, 1), Vec3(0, 0, 1));
  const Pose p = look_pose({0, 0, 0}, 0.0, 0.0);
  EXPECT_LT((back_project(k, p, 2, 1, 3.0) - Vec3(3, 0, 0)).norm(), 1e-12);
}

TEST(Camera, DownscaledPixelCentersShareRays) {
  const CameraIntrinsics full;
  const auto half = full.downscaled(2);
  EXPECT_EQ(half.width, 320);
  EXPECT_EQ(half.height, 240);
  // Coarse pixel (u, v) covers fine pixels 2u..2u+1; its center is their shared corner.
  const Vec3 coarse = pixel_direction(half, 10, 7);
  const Vec3 fine_corner((2 * 10 + 1 - full.cx) / full.fx, (2 * 7 + 1 - full.cy) / full.fy, 1.0);
  EXPECT_LT((coarse - fine_corner).norm(), 1e-15);
}

TEST(RoundTrip, LiftedPixelsReRenderAtSameDepth) {
  const auto scene = harmonic_scene(4);
  const Bvh bvh(scene::scene_mesh(scene));
  Rng rng(4);
  ViewConfig vc;
  vc.intrinsics = CameraIntrinsics{}.downscaled(2);
  vc.min_objects = 1;
  vc.min_pixels = 1;
  for (int i = 0; i < 3; ++i) {
    const auto frame = render_depth(bvh, vc.intrinsics, sample_pose(rng, {scene.spec.room_width, scene.spec.room_length}, vc));
    EXPECT_LT(round_trip_error(bvh, frame), 1e-4);
  }
}

TEST(RoundTrip, FlatWallLiftsOntoPlane) {
  const Bvh bvh(wall_at(2.0));
  CameraIntrinsics k = CameraIntrinsics{}.downscaled(4);
  const auto frame = render_depth(bvh, k, Pose::Identity());
  for (int v = 0; v < k.height; ++v)
    for (int u = 0; u < k.width; ++u) ASSERT_NEAR(back_project(k, frame.pose, u, v, frame.depth_at(u, v)).z(), 2.0, 1e-4);
  EXPECT_LT(round_trip_error(bvh, frame), 1e-12);
}

TEST(QualifyingObjects, CountsPixelsPerId) {
  DepthFrame f;
  f.intrinsics.width = 10;
  f.intrinsics.height = 10;
  f.id_map.assign(100, kNoObject);
  for (int i = 0; i < 64; ++i) f.id_map[i] = 3;
  for (int i = 64; i < 90; ++i) f.id_map[i] = 5;
  for (int i = 90; i < 100; ++i) f.id_map[i] = kFloorId;
  EXPECT_EQ(qualifying_objects(f, 64), std::vector<std::int32_t>{3});
  EXPECT_EQ(qualifying_objects(f, 26), (std::vector<std::int32_t>{3, 5}));
  EXPECT_EQ(object_pixel_counts(f).size(), 2u);
}

TEST(ValidView, RequiresSevenObjects) {
  const Bvh bvh(wall_at(2.0));
  Rng rng(5);
  EXPECT_THROW(sample_valid_view(bvh, {4, 4}, 6, rng), std::invalid_argument);
}

TEST(ValidView, BareWallPoseIsRejected) {
  // Seven boxes behind a camera that faces a wall 0.3 m away.
  SurfaceMesh room = wall_at(0.3, 50.0, kWallId);
  for (int i = 0; i < 7; ++i) room.append(testkit::box_mesh(Vec3(i - 3.5, -0.5, -3), Vec3(i - 3.0, 0.5, -2), i));
  const Bvh bvh(room);
  const auto frame = render_depth(bvh, CameraIntrinsics{}, Pose::Identity());
  EXPECT_TRUE(qualifying_objects(frame, 64).empty());
  for (double d : frame.depth) ASSERT_NEAR(d, 0.3, 1e-12);

  // Objects too small to reach 64 pixels from anywhere: every pose is rejected.
  SurfaceMesh tiny;
  for (int i = 0; i < 7; ++i) tiny.append(testkit::box_mesh(Vec3(1 + 0.3 * i, 1, 0), Vec3(1.001 + 0.3 * i, 1.001, 0.001), i));
  const Bvh tiny_bvh(tiny);
  ViewConfig vc;
  vc.max_attempts = 5;
  Rng rng(6);
  EXPECT_THROW(sample_valid_view(tiny_bvh, {4, 4}, 7, rng, vc), ViewRejected);
}

TEST(ValidView, AcceptedFramesHaveSevenQualifyingObjects) {
  const auto scene = harmonic_scene(7);
  const Bvh bvh(scene::scene_mesh(scene));
  const RoomBox room{scene.spec.room_width, scene.spec.room_length};
  Rng a(8), b(8);
  const auto v = sample_valid_view(bvh, room, scene.objects.size(), a);
  EXPECT_GE(v.object_ids.size(), 7u);
  EXPECT_EQ(v.object_ids, qualifying_objects(v.frame, 64));
  const Vec3 c = v.frame.pose.translation();
  EXPECT_GE(c.x(), 0.3);
  EXPECT_LE(c.x(), room.width - 0.3);
  EXPECT_GE(c.z(), 1.2);
  EXPECT_LE(c.z(), 1.8);
  const auto w = sample_valid_view(bvh, room, scene.objects.size(), b);
  EXPECT_EQ(w.attempts, v.attempts);
  EXPECT_EQ(w.frame.depth, v.frame.depth);
}

TEST(ValidView, PrefilterDoesNotChangeAcceptanceRule) {
  const auto scene = harmonic_scene(9);
  const Bvh bvh(scene::scene_mesh(scene));
  const RoomBox room{scene.spec.room_width, scene.spec.room_length};
  ViewConfig vc;
  vc.prefilter_factor = 1;
  Rng rng(10);
  const auto v = sample_valid_view(bvh, room, scene.objects.size(), rng, vc);
  EXPECT_GE(qualifying_objects(v.frame, 64).size(), 7u);
}
