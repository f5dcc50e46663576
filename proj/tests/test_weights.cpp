#include <gtest/gtest.h>

#include <cmath>

#include "kpzlab/weights.hpp"

using namespace kpz;

namespace {

std::vector<WeightSpec> all_families() {
  return {standardize(WeightSpec::gaussian()), standardize(WeightSpec::rademacher()),
          standardize(WeightSpec::uniform()), standardize(WeightSpec::shifted_exponential()),
          standardize(WeightSpec::finite_discrete({{0.0, 0.2}, {1.0, 0.5}, {3.0, 0.3}}))};
}

}  // namespace

TEST(Standardize, Uniform) {
  const auto s = standardize(WeightSpec::uniform());
  EXPECT_NEAR(s.location, 0.5, 1e-15);
  EXPECT_NEAR(s.scale, 1.0 / std::sqrt(12.0), 1e-15);
}

TEST(Standardize, RademacherIsIdentity) {
  const auto s = standardize(WeightSpec::rademacher());
  EXPECT_EQ(s.location, 0.0);
  EXPECT_EQ(s.scale, 1.0);
}

TEST(Standardize, ShiftedExponential) {
  const auto s = standardize(WeightSpec::shifted_exponential());
  EXPECT_NEAR(s.location, 1.0, 1e-15);
  EXPECT_NEAR(s.scale, 1.0, 1e-15);
}

TEST(Standardize, ExactMomentsAndIdempotence) {
  for (const auto& s : all_families()) {
    EXPECT_LE(std::abs(mean(s)), 1e-12) << family_name(s.family);
    EXPECT_LE(std::abs(variance(s) - 1.0), 1e-12) << family_name(s.family);
    const auto t = standardize(s);
    EXPECT_EQ(t.location, s.location);
    EXPECT_EQ(t.scale, s.scale);
    EXPECT_TRUE(is_standardized(s));
  }
}

TEST(Standardize, DegenerateThrows) {
  EXPECT_THROW(standardize(WeightSpec::finite_discrete({{2.0, 1.0}})), DomainError);
  EXPECT_THROW(standardize(WeightSpec::finite_discrete({{0.0, 0.5}, {1.0, 0.4}})), DomainError);
  EXPECT_THROW(standardize(WeightSpec::finite_discrete({{0.0, -0.5}, {1.0, 1.5}})), DomainError);
}

TEST(ExactMoments, FourthMoments) {
  EXPECT_NEAR(exact_moments(standardize(WeightSpec::gaussian()), 4), 3.0, 1e-14);
  EXPECT_NEAR(exact_moments(standardize(WeightSpec::rademacher()), 4), 1.0, 1e-14);
  EXPECT_NEAR(exact_moments(standardize(WeightSpec::shifted_exponential()), 4), 9.0, 1e-12);
  EXPECT_THROW(exact_moments(standardize(WeightSpec::gaussian()), 5), DomainError);
}

// Independent oracle: Gauss-Legendre-free midpoint rule of (x sqrt 12)^4 on [-1/2, 1/2].
TEST(ExactMoments, UniformFourthMomentByQuadrature) {
  const int m = 200000;
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    const double x = -0.5 + (i + 0.5) / m;
    acc += std::pow(x * std::sqrt(12.0), 4) / m;
  }
  const double exact = exact_moments(standardize(WeightSpec::uniform()), 4);
  EXPECT_NEAR(exact, 9.0 / 5.0, 1e-13);
  EXPECT_NEAR(acc, exact, 1e-8);
}

TEST(Sample, EmptyAndSupport) {
  Stream s(1, 0, 0);
  EXPECT_TRUE(sample(standardize(WeightSpec::gaussian()), s, 0).empty());
  for (double x : sample(standardize(WeightSpec::rademacher()), s, 1000)) {
    ASSERT_TRUE(x == 1.0 || x == -1.0);
  }
}

TEST(Sample, GaussianMeanClt) {
  Stream s(2, 0, 0);
  const auto x = sample(standardize(WeightSpec::gaussian()), s, 1000000);
  double m = 0.0;
  for (double v : x) m += v;
  EXPECT_LE(std::abs(m / 1e6), 4.0 / 1e3);
}

TEST(Sample, EveryFamilyWithinFiveStandardErrors) {
  const std::size_t count = 1000000;
  std::uint64_t seed = 10;
  for (const auto& spec : all_families()) {
    Stream s(seed++, 0, 0);
    const auto x = sample(spec, s, count);
    double m1 = 0.0, m2 = 0.0;
    for (double v : x) {
      m1 += v;
      m2 += v * v;
    }
    m1 /= double(count);
    m2 /= double(count);
    const double var_se = std::sqrt((exact_moments(spec, 4) - 1.0) / double(count));
    EXPECT_LE(std::abs(m1), 5.0 / std::sqrt(double(count))) << family_name(spec.family);
    EXPECT_LE(std::abs(m2 - 1.0), 5.0 * var_se + 1e-12) << family_name(spec.family);
  }
}

TEST(Sample, Reproducible) {
  for (const auto& spec : all_families()) {
    Stream a(3, 4, 5), b(3, 4, 5);
    EXPECT_EQ(sample(spec, a, 100), sample(spec, b, 100));
  }
}

TEST(Json, RoundTrip) {
  for (const auto& spec : all_families()) {
    const nlohmann::json j = spec;
    const auto back = j.get<WeightSpec>();
    EXPECT_EQ(back.family, spec.family);
    EXPECT_EQ(back.location, spec.location);
    EXPECT_EQ(back.scale, spec.scale);
    EXPECT_EQ(back.atoms.size(), spec.atoms.size());
  }
}

TEST(Json, MissingLocationScaleStandardizes) {
  const auto s = nlohmann::json{{"family", "uniform"}}.get<WeightSpec>();
  EXPECT_TRUE(is_standardized(s));
  EXPECT_THROW((nlohmann::json{{"family", "cauchy"}}.get<WeightSpec>()), DomainError);
}
