#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "retarget/retarget_cost.hpp"

#include <Eigen/Eigenvalues>

#include <random>

using namespace retarget;

namespace {

KeypointTrajectory make_trajectory(const std::vector<MatX3>& frames, double dt = 0.02) {
  KeypointTrajectory x;
  x.dt = dt;
  for (const auto& f : frames) x.frames.push_back({f});
  return x;
}

MatX3 rows(std::initializer_list<Vec3> points) {
  MatX3 out(static_cast<int>(points.size()), 3);
  int r = 0;
  for (const Vec3& p : points) out.row(r++) = p.transpose();
  return out;
}

KeypointTrajectory random_trajectory(int T, int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<MatX3> frames(T, MatX3(m, 3));
  for (auto& f : frames) {
    for (int k = 0; k < m; ++k) f.row(k) = Vec3(unit(rng), unit(rng), unit(rng));
  }
  return make_trajectory(frames);
}

}  // namespace

TEST_CASE("laplacian of a single edge is the textbook 2x2") {
  MatX L = build_laplacian({{0, 1}}, 2).L;
  MatX expected(2, 2);
  expected << 1, -1, -1, 1;
  CHECK((L - expected).norm() == 0.0);
}

TEST_CASE("laplacian of an empty edge set is zero") {
  CHECK(build_laplacian({}, 3).L.norm() == 0.0);
}

TEST_CASE("laplacian of the path graph 0-1-2") {
  MatX L = build_laplacian({{0, 1}, {1, 2}}, 3).L;
  MatX expected(3, 3);
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK((L - expected).norm() == 0.0);
}

TEST_CASE("laplacian rejects bad edges") {
  CHECK_THROWS_AS(build_laplacian({{0, 5}}, 3), DimensionError);
  CHECK_THROWS_AS(build_laplacian({{-1, 0}}, 3), DimensionError);
  CHECK_THROWS_AS(build_laplacian({{1, 1}}, 3), InvariantError);
}

TEST_CASE("laplacian rows sum to zero exactly on random graphs") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> node(0, 9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<int, int>> edges;
    for (int e = 0; e < 15; ++e) {
      int a = node(rng), b = node(rng);
      if (a != b) edges.emplace_back(a, b);
    }
    MatX L = build_laplacian(edges, 10).L;
    CHECK((L.rowwise().sum()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((L - L.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<MatX> es(L);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
  }
}

TEST_CASE("spatial cost on the authored examples") {
  SUBCASE("identical trajectories cost zero") {
    KeypointTrajectory x = make_trajectory({rows({{1, 2, 3}, {4, 5, 6}})});
    CHECK(spatial_cost(x, x) == 0.0);
  }
  SUBCASE("unit displacement costs one") {
    KeypointTrajectory x = make_trajectory({rows({{0, 0, 1}})});
    KeypointTrajectory ref = make_trajectory({rows({{0, 0, 0}})});
    CHECK(spatial_cost(x, ref) == 1.0);
  }
  SUBCASE("frames add up") {
    KeypointTrajectory x = make_trajectory({rows({{1, 0, 0}}), rows({{0, 2, 0}})});
    KeypointTrajectory ref = make_trajectory({rows({{0, 0, 0}}), rows({{0, 0, 0}})});
    CHECK(spatial_cost(x, ref) == 5.0);
  }
  SUBCASE("per-keypoint weights scale the terms") {
    KeypointTrajectory x = make_trajectory({rows({{0, 0, 1}, {0, 0, 1}})});
    KeypointTrajectory ref = make_trajectory({rows({{0, 0, 0}, {0, 0, 0}})});
    VecX w(2);
    w << 3.0, 0.0;
    CHECK(spatial_cost(x, ref, w) == 3.0);
  }
}

TEST_CASE("laplacian cost hand example and invariances") {
  LaplacianMatrix L = build_laplacian({{0, 1}}, 2);
  KeypointTrajectory ref = make_trajectory({rows({{0, 0, 0}, {0, 0, 0}})});

  SUBCASE("hand-computed value 1.0") {
    KeypointTrajectory x = make_trajectory({rows({{0, 0, 0}, {0, 0, 1}})});
    CHECK(laplacian_cost(x, ref, L) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(per_keypoint_laplacian_error(x, ref, L, 0, 0) == doctest::Approx(1.0));
    CHECK(per_keypoint_laplacian_error(x, ref, L, 0, 1) == doctest::Approx(1.0));
  }

  SUBCASE("identical trajectories cost zero") {
    CHECK(laplacian_cost(ref, ref, L) == 0.0);
    CHECK(per_keypoint_laplacian_error(ref, ref, L, 0, 0) == 0.0);
  }

  SUBCASE("global translation of one side leaves the cost unchanged") {
    std::mt19937_64 rng(43);
    KeypointTrajectory x = random_trajectory(6, 5, rng);
    KeypointTrajectory y = random_trajectory(6, 5, rng);
    LaplacianMatrix L5 = build_laplacian({{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}}, 5);
    const double before = laplacian_cost(x, y, L5);
    const Vec3 t(0.7, -0.3, 1.9);
    for (auto& f : x.frames) f.positions.rowwise() += t.transpose();
    CHECK(laplacian_cost(x, y, L5) == doctest::Approx(before).epsilon(1e-12));
  }
}

TEST_CASE("costs are symmetric and non-negative") {
  std::mt19937_64 rng(47);
  KeypointTrajectory x = random_trajectory(4, 6, rng);
  KeypointTrajectory y = random_trajectory(4, 6, rng);
  LaplacianMatrix L = build_laplacian({{0, 1}, {1, 2}, {3, 4}, {4, 5}, {1, 4}}, 6);
  CHECK(spatial_cost(x, y) == doctest::Approx(spatial_cost(y, x)).epsilon(1e-15));
  CHECK(laplacian_cost(x, y, L) == doctest::Approx(laplacian_cost(y, x, L)).epsilon(1e-15));
  CHECK(spatial_cost(x, y) >= 0.0);
  CHECK(laplacian_cost(x, y, L) >= 0.0);
}

TEST_CASE("combined distance composes its two terms") {
  std::mt19937_64 rng(53);
  KeypointTrajectory x = random_trajectory(3, 4, rng);
  KeypointTrajectory y = random_trajectory(3, 4, rng);
  LaplacianMatrix L = build_laplacian({{0, 1}, {1, 2}, {2, 3}}, 4);
  const double ep = spatial_cost(x, y);
  const double el = laplacian_cost(x, y, L);

  CHECK(combined_distance(x, y, L, {1.0, 0.0}) == doctest::Approx(ep).epsilon(1e-15));
  CHECK(combined_distance(x, y, L, {0.0, 1.0}) == doctest::Approx(el).epsilon(1e-15));
  const double d1 = combined_distance(x, y, L, {1.0, 1.0});
  const double d2 = combined_distance(x, y, L, {2.0, 1.0});
  CHECK(d2 - d1 == doctest::Approx(ep).epsilon(1e-12));
  CHECK_THROWS_AS(combined_distance(x, y, L, {0.0, 0.0}), InvariantError);
}

TEST_CASE("shape mismatches are dimension errors") {
  std::mt19937_64 rng(59);
  KeypointTrajectory x = random_trajectory(3, 4, rng);
  KeypointTrajectory fewer_frames = random_trajectory(2, 4, rng);
  KeypointTrajectory fewer_points = random_trajectory(3, 3, rng);
  LaplacianMatrix L = build_laplacian({{0, 1}}, 4);
  CHECK_THROWS_AS(spatial_cost(x, fewer_frames), DimensionError);
  CHECK_THROWS_AS(spatial_cost(x, fewer_points), DimensionError);
  CHECK_THROWS_AS(laplacian_cost(x, fewer_points, L), DimensionError);
  CHECK_THROWS_AS(laplacian_cost(x, x, build_laplacian({{0, 1}}, 3)), DimensionError);
  CHECK_THROWS_AS(per_keypoint_laplacian_error(x, x, L, 5, 0), DimensionError);
  CHECK_THROWS_AS(per_keypoint_laplacian_error(x, x, L, 0, 9), DimensionError);
  VecX bad_w(2);
  bad_w << 1.0, 1.0;
  CHECK_THROWS_AS(spatial_cost(x, x, bad_w), DimensionError);
}
