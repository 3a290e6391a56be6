// Copyright Contributors to the mimonerf Project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mimonerf/dataset.hpp"
#include "testutil.hpp"

using namespace mimonerf;
using namespace mimonerf::test;

namespace {

std::string temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("mimonerf_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_SUITE("scene") {

TEST_CASE("scene_field: outside, center, surface midpoint") {
  const ProceduralScene scene = make_scene("spheres3");
  CHECK(scene_field(scene, Vec3d(5.0, 5.0, 5.0)).sigma == 0.0);

  const Primitive& s0 = scene.primitives[0];
  const FieldSample center = scene_field(scene, s0.center);
  CHECK(center.sigma == doctest::Approx(s0.sigma0).epsilon(1e-12));
  CHECK((center.albedo - s0.albedo).cwiseAbs().maxCoeff() < 1e-12);

  // On the surface the smoothstep sits at its midpoint.
  const Vec3d on_surface = s0.center + Vec3d(s0.size.x(), 0.0, 0.0);
  CHECK(scene_field(scene, on_surface).sigma == doctest::Approx(s0.sigma0 / 2.0).epsilon(1e-12));

  // Background albedo where there is no density.
  CHECK(scene_field(scene, Vec3d(0.0, -0.9, 0.9)).albedo == scene.background);
}

TEST_CASE("box primitive signed distance") {
  Primitive box;
  box.kind = Primitive::Kind::kBox;
  box.center = Vec3d::Zero();
  box.size = Vec3d(0.3, 0.2, 0.1);
  CHECK(signed_distance(box, Vec3d(0.5, 0.0, 0.0)) == doctest::Approx(0.2));
  CHECK(signed_distance(box, Vec3d(0.0, 0.0, 0.0)) == doctest::Approx(-0.1));
  CHECK(signed_distance(box, Vec3d(0.3, 0.2, 0.1)) == doctest::Approx(0.0));
}

TEST_CASE("all primitives stay inside the unit-radius domain") {
  for (const std::string& name : scene_names()) {
    const ProceduralScene scene = make_scene(name);
    for (const Primitive& p : scene.primitives) {
      const double extent = p.kind == Primitive::Kind::kSphere ? p.size.x() : p.size.norm();
      CHECK(p.center.norm() + extent <= 1.0);
      CHECK(p.sigma0 > 0.0);
    }
  }
}

TEST_CASE("unknown scenes are rejected with the available list") {
  CHECK_THROWS_WITH_AS(make_scene("nope"), doctest::Contains("spheres3"), UsageError);
}

TEST_CASE("oracle: misses give background, opaque hits give albedo") {
  const ProceduralScene scene = make_scene("spheres3");
  Ray miss;
  miss.origin = Vec3d(0.0, 3.4, 0.0);
  miss.dir = Vec3d(0.0, 1.0, 0.0);  // away from the scene
  miss.t_near = 0.1;
  miss.t_far = 2.0;
  CHECK((oracle_render(scene, miss, 10000) - scene.background).cwiseAbs().maxCoeff() < 1e-12);

  const Primitive& s0 = scene.primitives[0];
  Ray hit;
  hit.origin = s0.center + Vec3d(0.0, 0.0, 2.0);
  hit.dir = Vec3d(0.0, 0.0, -1.0);
  hit.t_near = 0.5;
  hit.t_far = 3.5;
  // sigma0 * diameter >> 1: the ray saturates inside the sphere.
  CHECK((oracle_render(scene, hit, 20000) - s0.albedo).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("oracle: quadrature refinement is self-consistent") {
  const ProceduralScene scene = make_scene("mix");
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    const Ray ray = test_ray(rng);
    const Vec3d a = oracle_render(scene, ray, 4096);
    const Vec3d b = oracle_render(scene, ray, 8192);
    const Vec3d c = oracle_render(scene, ray, 16384);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-4);
    CHECK((b - c).cwiseAbs().maxCoeff() <= (a - b).cwiseAbs().maxCoeff() + 1e-6);
  }
}

TEST_CASE("dataset generation: shape, split, determinism") {
  const ProceduralScene scene = make_scene("box");
  const Dataset a = generate_dataset(scene, 20, 32, 5, "orbit", 512, 2);
  CHECK(a.views.size() == 20);
  CHECK(a.views[0].image.width == 32);
  CHECK(a.views[0].image.height == 32);
  CHECK(a.split_indices(false).size() == 16);
  CHECK(a.split_indices(true).size() == 4);

  const Dataset b = generate_dataset(scene, 20, 32, 5, "orbit", 512, 1);
  for (size_t i = 0; i < a.views.size(); ++i) {
    CHECK(a.views[i].image.rgb == b.views[i].image.rgb);  // thread-count independent
    CHECK((a.views[i].pose.trans - b.views[i].pose.trans).norm() == 0.0);
  }
  const Dataset c = generate_dataset(scene, 20, 32, 6, "orbit", 512, 2);
  CHECK(a.views[0].image.rgb != c.views[0].image.rgb);
}

TEST_CASE("forward-facing rig keeps cameras in a cone") {
  const ProceduralScene scene = make_scene("box");
  const Dataset ds = generate_dataset(scene, 6, 16, 3, "forward", 256, 2);
  for (const auto& v : ds.views) CHECK(v.pose.trans.z() > 0.0);
}

TEST_CASE("ppm round-trip is bit exact") {
  const std::string dir = temp_dir("ppm");
  Image8 img;
  img.width = 7;
  img.height = 5;
  FixtureLcg lcg(77);
  img.rgb.resize(7 * 5 * 3);
  for (auto& b : img.rgb) b = static_cast<uint8_t>(lcg.next_u64() >> 56);
  write_ppm(dir + "/x.ppm", img);
  const Image8 back = read_ppm(dir + "/x.ppm");
  CHECK(back.width == 7);
  CHECK(back.height == 5);
  CHECK(back.rgb == img.rgb);
  CHECK_THROWS_AS(read_ppm(dir + "/missing.ppm"), IoError);
}

TEST_CASE("png export writes a valid signature") {
  const std::string dir = temp_dir("png");
  Image8 img;
  img.width = 9;
  img.height = 4;
  img.rgb.assign(9 * 4 * 3, 128);
  write_png(dir + "/x.png", img);
  const std::vector<char> bytes = slurp(dir + "/x.png");
  REQUIRE(bytes.size() > 8);
  CHECK(static_cast<uint8_t>(bytes[0]) == 0x89);
  CHECK(bytes[1] == 'P');
  CHECK(bytes[2] == 'N');
  CHECK(bytes[3] == 'G');
}

TEST_CASE("dataset save/load round-trip: poses to 1e-9, images bit exact") {
  const std::string dir = temp_dir("dataset");
  const ProceduralScene scene = make_scene("spheres3");
  const Dataset ds = generate_dataset(scene, 5, 16, 11, "orbit", 256, 2);
  save_dataset(ds, dir);
  const Dataset back = load_dataset(dir);
  CHECK(back.scene_name == "spheres3");
  CHECK(back.views.size() == ds.views.size());
  CHECK(back.intrinsics.focal == doctest::Approx(ds.intrinsics.focal).epsilon(1e-12));
  CHECK(back.t_near == ds.t_near);
  CHECK(back.t_far == ds.t_far);
  for (size_t i = 0; i < ds.views.size(); ++i) {
    CHECK(back.views[i].is_test == ds.views[i].is_test);
    CHECK(back.views[i].image.rgb == ds.views[i].image.rgb);
    CHECK((back.views[i].pose.rot - ds.views[i].pose.rot).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((back.views[i].pose.trans - ds.views[i].pose.trans).cwiseAbs().maxCoeff() < 1e-9);
  }

  // Save again from the loaded copy: manifests and images must be identical.
  const std::string dir2 = temp_dir("dataset2");
  save_dataset(back, dir2);
  CHECK(slurp(dir + "/manifest.txt") == slurp(dir2 + "/manifest.txt"));
  CHECK(slurp(dir + "/img_000.ppm") == slurp(dir2 + "/img_000.ppm"));
}

TEST_CASE("corrupt manifests are rejected") {
  const std::string dir = temp_dir("corrupt");
  std::ofstream(dir + "/manifest.txt") << "not-a-manifest 9\n";
  CHECK_THROWS_AS(load_dataset(dir), IoError);
}

}  // TEST_SUITE
