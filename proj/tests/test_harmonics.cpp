#include "roomgen/harmonics.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

using namespace roomgen;
using namespace roomgen::harmonics;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent evaluation through std::pow with the 0^0 = 1 rule spelled out.
double reference_radius(const Coefficients& c, double theta, double phi) {
  const double base[4] = {std::sin(c.m[0] * phi), std::cos(c.m[1] * phi), std::sin(c.m[2] * theta),
                          std::cos(c.m[3] * theta)};
  double r = 0.0;
  for (int i = 0; i < 4; ++i) r += c.p[i] == 0 ? 1.0 : std::pow(base[i], c.p[i]);
  return r;
}

}  // namespace

TEST(EvalRadius, CoefficientCaptionCase) {
  const Coefficients c{{2, 1, 2, 2}, {2, 2, 1, 2}};
  EXPECT_NEAR(eval_radius(c, kPi / 2, kPi / 4), 2.5, 1e-12);
}

TEST(EvalRadius, ZeroFrequencies) {
  const Coefficients c{{0, 0, 0, 0}, {1, 1, 1, 1}};
  for (double t : {0.0, 1.0, 4.0})
    for (double p : {0.0, 0.7, kPi}) EXPECT_DOUBLE_EQ(eval_radius(c, t, p), 2.0);
}

TEST(EvalRadius, ZeroExponentsGiveConstantFour) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    auto c = sample_coefficients(rng);
    c.p = {0, 0, 0, 0};
    EXPECT_EQ(eval_radius(c, rng.uniform(0, 2 * kPi), rng.uniform(0, kPi)), 4.0);
  }
}

TEST(EvalRadius, MatchesReferenceOnRandomTuples) {
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    const auto c = sample_coefficients(rng);
    const double t = rng.uniform(0, 2 * kPi), p = rng.uniform(0, kPi);
    EXPECT_NEAR(eval_radius(c, t, p), reference_radius(c, t, p), 1e-12);
  }
}

TEST(EvalRadius, PeriodicInAzimuthForIntegerFrequencies) {
  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    auto c = sample_coefficients(rng);
    c.m[2] = static_cast<double>(rng.integer(-5, 5));
    c.m[3] = static_cast<double>(rng.integer(-5, 5));
    const double t = rng.uniform(0, 2 * kPi), p = rng.uniform(0, kPi);
    EXPECT_NEAR(eval_radius(c, t, p), eval_radius(c, t + 2 * kPi, p), 1e-9);
  }
}

TEST(SampleCoefficients, RangesHold) {
  Rng rng(14);
  for (int i = 0; i < 10000; ++i) {
    const auto c = sample_coefficients(rng);
    ASSERT_TRUE(c.valid());
  }
}

TEST(SampleCoefficients, Deterministic) {
  Rng a(15), b(15);
  EXPECT_EQ(sample_coefficients(a), sample_coefficients(b));
}

TEST(SampleCoefficients, EachCoefficientUniform) {
  Rng rng(16);
  std::vector<std::vector<std::size_t>> m_bins(4, std::vector<std::size_t>(10, 0));
  std::vector<std::vector<std::size_t>> p_bins(4, std::vector<std::size_t>(5, 0));
  for (int i = 0; i < 10000; ++i) {
    const auto c = sample_coefficients(rng);
    for (int k = 0; k < 4; ++k) {
      ++m_bins[k][std::min<std::size_t>(9, static_cast<std::size_t>((c.m[k] + 5.0)))];
      ++p_bins[k][static_cast<std::size_t>(c.p[k])];
    }
  }
  for (int k = 0; k < 4; ++k) {
    EXPECT_LT(testkit::chi_square_uniform(m_bins[k]), testkit::chi_square_critical_001(9)) << "m" << k;
    EXPECT_LT(testkit::chi_square_uniform(p_bins[k]), testkit::chi_square_critical_001(4)) << "p" << k;
  }
}

TEST(GenerateMesh, SphereOfRadiusFour) {
  const Coefficients c{{1.5, -2, 3, 0.5}, {0, 0, 0, 0}};
  const auto mesh = generate_mesh(c, 16, 32);
  for (const auto& v : mesh.vertices) EXPECT_NEAR(v.norm(), 4.0, 1e-9);
}

TEST(GenerateMesh, GridCounts) {
  Rng rng(17);
  const auto mesh = generate_mesh(sample_coefficients(rng), 16, 32);
  EXPECT_EQ(mesh.vertices.size(), 17u * 32u);
  EXPECT_EQ(mesh.triangles.size(), 2u * 16u * 32u);
  EXPECT_NO_THROW(mesh.validate());
}

TEST(GenerateMesh, RejectsTinyResolution) {
  const Coefficients c{};
  EXPECT_THROW(generate_mesh(c, 2, 32), GeometryError);
  EXPECT_THROW(generate_mesh(c, 16, 2), GeometryError);
}

TEST(GenerateMesh, InteriorEdgesSharedByTwoTriangles) {
  Rng rng(18);
  const int np = 16, na = 32;
  for (int trial = 0; trial < 20; ++trial) {
    const auto mesh = generate_mesh(sample_coefficients(rng), np, na);
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> incidence;
    for (const auto& t : mesh.triangles)
      for (int k = 0; k < 3; ++k) {
        auto a = t[k], b = t[(k + 1) % 3];
        incidence[{std::min(a, b), std::max(a, b)}]++;
      }
    const auto row = [na](std::uint32_t v) { return static_cast<int>(v) / na; };
    for (const auto& [edge, count] : incidence) {
      const bool pole_row = (row(edge.first) == 0 && row(edge.second) == 0) ||
                            (row(edge.first) == np && row(edge.second) == np);
      if (!pole_row) EXPECT_EQ(count, 2);
    }
  }
}

TEST(GenerateMesh, AllCoordinatesFinite) {
  Rng rng(19);
  for (int i = 0; i < 50; ++i) {
    const auto mesh = generate_mesh(sample_coefficients(rng), MeshResolution{});
    for (const auto& v : mesh.vertices) ASSERT_TRUE(v.allFinite());
  }
}

TEST(GenerateMesh, SubgridVerticesBitIdentical) {
  Rng rng(20);
  const auto c = sample_coefficients(rng);
  const auto coarse = generate_mesh(c, 16, 32);
  const auto fine = generate_mesh(c, 32, 64);
  for (int i = 0; i <= 16; ++i)
    for (int j = 0; j < 32; ++j) {
      const auto& a = coarse.vertices[static_cast<std::size_t>(i * 32 + j)];
      const auto& b = fine.vertices[static_cast<std::size_t>(2 * i * 64 + 2 * j)];
      ASSERT_EQ(a, b) << i << "," << j;
    }
}

TEST(GenerateMesh, Deterministic) {
  Rng rng(21);
  const auto c = sample_coefficients(rng);
  const auto a = generate_mesh(c), b = generate_mesh(c);
  EXPECT_EQ(a.vertices, b.vertices);
  EXPECT_EQ(a.triangles, b.triangles);
}

TEST(GenerateMesh, NegativeRadiusReflects) {
  const Vec3 p = to_cartesian(-1.0, 0.3, 1.1);
  const Vec3 q = to_cartesian(1.0, 0.3, 1.1);
  EXPECT_NEAR((p + q).norm(), 0.0, 1e-15);
}

TEST(CoefficientFile, RoundTripsExactly) {
  Rng rng(22);
  std::vector<Coefficients> set;
  for (int i = 0; i < 100; ++i) set.push_back(sample_coefficients(rng));
  std::stringstream ss;
  write_coefficients(ss, set);
  EXPECT_EQ(read_coefficients(ss), set);
}

TEST(CoefficientFile, ReportsLineOfBadRecord) {
  std::stringstream ss("1 2 3 4 0 1 2 3\n# comment\n1 2 3 0 1 2\n");
  try {
    read_coefficients(ss);
    FAIL();
  } catch (const GeometryError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::stringstream out_of_range("9 0 0 0 0 0 0 0\n");
  EXPECT_THROW(read_coefficients(out_of_range), GeometryError);
}
