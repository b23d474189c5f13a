#include "roomgen/analysis.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace roomgen;
using namespace roomgen::analysis;

namespace {

double brute_chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  auto directed = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double sum = 0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, (p - q).norm());
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };
  return 0.5 * (directed(a, b) + directed(b, a));
}

std::vector<Vec3> random_points(Rng& rng, std::size_t n) {
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  return pts;
}

ObjectSet harmonics_set(std::size_t n, std::uint64_t seed) {
  std::vector<harmonics::Coefficients> cs;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, "object", i));
    cs.push_back(harmonics::sample_coefficients(rng));
  }
  return ObjectSet::from_harmonics(std::move(cs), {24, 48});
}

}  // namespace

TEST(Chamfer, Examples) {
  const std::vector<Vec3> a = {Vec3(1, 2, 3)}, b = {Vec3(1, 2, 3.75)};
  EXPECT_DOUBLE_EQ(chamfer(a, b), 0.75);
  Rng rng(1);
  const auto c = random_points(rng, 300);
  EXPECT_EQ(chamfer(c, c), 0.0);
  EXPECT_THROW(chamfer(std::vector<Vec3>{}, c), std::invalid_argument);
}

TEST(Chamfer, MatchesDoubleLoop) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_points(rng, 5), b = random_points(rng, 5);
    EXPECT_NEAR(chamfer(a, b), brute_chamfer(a, b), 1e-15);
  }
  const auto a = random_points(rng, 700), b = random_points(rng, 400);
  EXPECT_NEAR(chamfer(a, b), brute_chamfer(a, b), 1e-12);
}

TEST(Chamfer, SymmetricAndRigidInvariant) {
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_points(rng, 500), b = random_points(rng, 300);
    EXPECT_NEAR(chamfer(a, b), chamfer(b, a), 1e-15);
    const Mat3 r = Eigen::AngleAxisd(rng.uniform(0, 6.28), Vec3(rng.normal(), rng.normal(), rng.normal()).normalized())
                       .toRotationMatrix();
    const Vec3 shift(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    auto move = [&](std::vector<Vec3> v) {
      for (auto& p : v) p = r * p + shift;
      return v;
    };
    EXPECT_NEAR(chamfer(move(a), move(b)), chamfer(a, b), 1e-9);
  }
}

TEST(Quantile, NearestRank) {
  const std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_EQ(quantile(v, 0.10), 1.0);
  EXPECT_EQ(quantile(v, 0.50), 5.0);
  EXPECT_EQ(quantile(v, 0.0), 1.0);
  EXPECT_EQ(quantile(v, 1.0), 10.0);
  const auto r = summarize(3, {0.4, 0.1, 0.3, 0.2});
  EXPECT_EQ(r.chamfer_min, 0.1);
  EXPECT_DOUBLE_EQ(r.chamfer_mean, 0.25);
  EXPECT_EQ(r.n_pairs, 4u);
  EXPECT_THROW(summarize(3, {}), std::invalid_argument);
}

TEST(Diversity, IdenticalObjectsHaveZeroMinimum) {
  Rng rng(4);
  const auto c = harmonics::sample_coefficients(rng);
  const auto set = ObjectSet::from_harmonics({c, c}, {24, 48});
  DiversityConfig cfg;
  cfg.points_per_object = 256;
  const auto r = diversity_report(set, 1, rng, cfg);
  EXPECT_EQ(r.chamfer_min, 0.0);
  EXPECT_THROW(diversity_report(set, 2, rng, cfg), std::invalid_argument);  // only one pair exists
}

TEST(Diversity, ReportIsOrderedAndDeterministic) {
  const auto set = harmonics_set(60, 5);
  DiversityConfig cfg;
  cfg.points_per_object = 256;
  for (auto pairing : {Pairing::uniform, Pairing::nearest}) {
    cfg.pairing = pairing;
    Rng a(6), b(6);
    const auto r = diversity_report(set, 200, a, cfg);
    EXPECT_EQ(r.n_pairs, 200u);
    EXPECT_EQ(r.n_objects, 60u);
    EXPECT_GE(r.chamfer_min, 0.0);
    EXPECT_LE(r.chamfer_min, r.chamfer_p10);
    EXPECT_LE(r.chamfer_p10, r.chamfer_p50);
    const auto s = diversity_report(set, 200, b, cfg);
    EXPECT_EQ(r.chamfer_mean, s.chamfer_mean);
    cfg.workers = 3;
    Rng c(6);
    EXPECT_EQ(diversity_report(set, 200, c, cfg).chamfer_mean, r.chamfer_mean);
    cfg.workers = 1;
  }
}

TEST(Diversity, NearestPairsAreCloserThanUniformPairs) {
  const auto set = harmonics_set(200, 7);
  DiversityConfig cfg;
  cfg.points_per_object = 256;
  Rng a(8), b(8);
  const auto uniform = diversity_report(set, 300, a, cfg);
  cfg.pairing = Pairing::nearest;
  const auto nearest = diversity_report(set, 300, b, cfg);
  EXPECT_LT(nearest.chamfer_mean, uniform.chamfer_mean);
}

TEST(Diversity, LargerSetHasSmallerMinimum) {
  // The small set is a prefix of the large one.
  const auto small = harmonics_set(100, 9), large = harmonics_set(500, 9);
  DiversityConfig cfg;
  cfg.points_per_object = 256;
  cfg.pairing = Pairing::nearest;
  Rng a(10), b(10);
  const auto rs = diversity_report(small, 300, a, cfg), rl = diversity_report(large, 300, b, cfg);
  EXPECT_LE(rl.chamfer_min, rs.chamfer_min);
  EXPECT_LE(rl.chamfer_p10, rs.chamfer_p10);
}
