#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "kpzlab/lattice.hpp"

using namespace kpz;

namespace {

// Enumerates every up/right path from (0, 0) to (N-1, n-1) and returns
// {log sum exp(beta * energy), max energy}.
std::pair<double, double> enumerate_paths(const DisorderField& w, double beta) {
  const std::size_t N = w.cols(), n = w.rows();
  std::vector<double> energies;
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double e) {
    e += w(i, j);
    if (i + 1 == N && j + 1 == n) {
      energies.push_back(e);
      return;
    }
    if (i + 1 < N) walk(i + 1, j, e);
    if (j + 1 < n) walk(i, j + 1, e);
  };
  walk(0, 0, 0.0);
  double mx = -INFINITY;
  for (double e : energies) mx = std::max(mx, e);
  long double s = 0.0L;
  for (double e : energies) s += std::exp(static_cast<long double>(beta) * (e - mx));
  return {beta * mx + static_cast<double>(std::log(s)), mx};
}

DisorderField gaussian_field(std::size_t N, std::size_t n, std::uint64_t seed) {
  Stream s(seed, 0, channel::kMisc);
  DisorderField w(N, n);
  for (double& x : w.data()) x = s.normal();
  return w;
}

}  // namespace

TEST(LogPartition, ZeroWeightsCountPaths) {
  const LatticeParams p{3, 2, 1.7};
  EXPECT_NEAR(log_partition(p, DisorderField(3, 2)), std::log(3.0), 1e-15);
  const LatticeParams q{10, 4, 0.3};
  EXPECT_NEAR(log_partition(q, DisorderField(10, 4)), log_binomial(12, 3), 1e-12);
}

TEST(LogPartition, TwoByTwo) {
  // columns i, rows j: W(i, j)
  const double a = 0.3, b = -1.1, c = 0.7, d = 2.0, beta = 1.3;
  DisorderField w(2, 2);
  w(0, 0) = a;
  w(0, 1) = b;
  w(1, 0) = c;
  w(1, 1) = d;
  const LatticeParams p{2, 2, beta};
  EXPECT_NEAR(log_partition(p, w), std::log(std::exp(beta * (a + c + d)) + std::exp(beta * (a + b + d))), 1e-14);
  EXPECT_DOUBLE_EQ(last_passage(p, w), a + d + std::max(b, c));
}

TEST(LogPartition, SixByThreeMatchesEnumeration) {
  const auto w = gaussian_field(6, 3, 1);
  const auto [lz, lp] = enumerate_paths(w, 1.0);
  EXPECT_NEAR(log_partition({6, 3, 1.0}, w), lz, 1e-10 * std::abs(lz));
  EXPECT_DOUBLE_EQ(last_passage({6, 3, 1.0}, w), lp);
}

TEST(LogPartition, BruteForceEquivalenceSmallShapes) {
  std::uint64_t seed = 100;
  for (std::size_t N = 1; N <= 11; ++N) {
    for (std::size_t n = 1; N + n <= 12; ++n) {
      for (int rep = 0; rep < 5; ++rep) {
        const auto w = gaussian_field(N, n, seed++);
        for (double beta : {0.5, 2.0}) {
          const auto [lz, lp] = enumerate_paths(w, beta);
          const double dp = log_partition({N, n, beta}, w);
          ASSERT_LE(std::abs(dp - lz), 1e-10 * std::max(1.0, std::abs(lz))) << N << "x" << n;
          ASSERT_EQ(last_passage({N, n, beta}, w), lp) << N << "x" << n;
        }
      }
    }
  }
}

TEST(LogPartition, ShapeAndFiniteness) {
  EXPECT_THROW(log_partition({3, 2, 1.0}, DisorderField(2, 3)), DomainError);
  DisorderField w(3, 2);
  w(1, 1) = NAN;
  EXPECT_THROW(log_partition({3, 2, 1.0}, w), DomainError);
  EXPECT_THROW(LatticeParams({3, 2, 0.0}).validate(), DomainError);
}

TEST(LastPassage, ZeroAndSandwich) {
  EXPECT_EQ(last_passage({5, 3, 1.0}, DisorderField(5, 3)), 0.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto w = gaussian_field(40, 5, seed);
    for (double beta : {0.5, 1.0, 4.0}) {
      const LatticeParams p{40, 5, beta};
      const double gap = log_partition(p, w) / beta - last_passage(p, w);
      EXPECT_GE(gap, 0.0);
      EXPECT_LE(gap, log_path_count(40, 5) / beta + 1e-12);
    }
  }
}

TEST(LogPartition, MonotoneInEachWeight) {
  auto w = gaussian_field(8, 4, 3);
  const LatticeParams p{8, 4, 1.0};
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double z0 = log_partition(p, w), l0 = last_passage(p, w);
      w(i, j) += 0.25;
      EXPECT_GT(log_partition(p, w), z0);
      EXPECT_GE(last_passage(p, w), l0);
      w(i, j) -= 0.25;
    }
  }
}

TEST(LogPartition, ShiftCovariance) {
  auto w = gaussian_field(30, 4, 5);
  const LatticeParams p{30, 4, 0.8};
  const double z0 = log_partition(p, w);
  for (double& x : w.data()) x += 0.6;
  EXPECT_NEAR(log_partition(p, w) - z0, 0.8 * 0.6 * (30 + 4 - 1), 1e-11);
}

TEST(LogPartition, NoOverflowAtLargeEnergy) {
  // exp of the answer would overflow a double.
  const LatticeParams p{2000, 4, 1.0};
  DisorderField w(2000, 4, 1.0);
  EXPECT_NEAR(log_partition(p, w), 2003.0 + log_binomial(2002, 3), 1e-9);
}

TEST(Normalize, CenteringAndUnitFluctuation) {
  const auto p = LatticeParams{10000, 6, 1.0, 0.2};
  EXPECT_NEAR(normalize_free_energy(2.0 * std::pow(1e4, 0.6), p), 0.0, 1e-14);
  EXPECT_NEAR(normalize_free_energy(2.0 * std::pow(1e4, 0.6) + std::pow(1e4, 0.5 - 0.2 / 6.0), p), 1.0, 1e-12);
  EXPECT_NEAR(lln_ratio(2.0 * std::pow(1e4, 0.6), p), 1.0, 1e-15);
}

TEST(RowsForAlpha, FloorWithAtLeastOneRow) {
  EXPECT_EQ(rows_for_alpha(10000, 0.2), 6u);
  EXPECT_EQ(rows_for_alpha(8000, 0.2), 6u);
  EXPECT_EQ(rows_for_alpha(500, 0.2), 3u);
  EXPECT_EQ(rows_for_alpha(32, 0.2), 2u);  // 32^0.2 = 2 exactly
  EXPECT_EQ(rows_for_alpha(1, 0.2), 1u);
  EXPECT_EQ(rows_for_alpha(16, 0.5), 4u);
}

TEST(Ensemble, SingleSampleMatchesDirectCall) {
  const auto spec = standardize(WeightSpec::uniform());
  const LatticeParams p{50, 3, 1.0, 0.2};
  const auto e = ensemble(p, spec, 1, 42);
  const auto w = materialize_disorder(p, WeightSampler(spec), 42, 0);
  EXPECT_DOUBLE_EQ(e[0].log_z, log_partition(p, w));
  EXPECT_DOUBLE_EQ(e[0].last_passage, last_passage(p, w));
  ASSERT_TRUE(e[0].normalized.has_value());
  EXPECT_EQ(e[0].weight_family, "uniform");
}

TEST(Ensemble, WorkerCountDoesNotMatter) {
  const auto spec = standardize(WeightSpec::gaussian());
  const LatticeParams p{200, 3, 1.0, 0.2};
  const auto a = ensemble(p, spec, 40, 9, 1);
  const auto b = ensemble(p, spec, 40, 9, 3);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].index, k);
    EXPECT_EQ(a[k].log_z, b[k].log_z);
  }
}

TEST(Ensemble, IndependentSeedsAgreeStatistically) {
  const auto spec = standardize(WeightSpec::gaussian());
  const LatticeParams p{2000, 4, 1.0};
  auto stats = [&](std::uint64_t seed) {
    const auto e = ensemble(p, spec, 1000, seed, 0);
    double m = 0.0, v = 0.0;
    for (const auto& s : e) m += s.log_z;
    m /= 1000.0;
    for (const auto& s : e) v += (s.log_z - m) * (s.log_z - m);
    return std::pair{m, std::sqrt(v / 999.0 / 1000.0)};
  };
  const auto [m1, se1] = stats(1);
  const auto [m2, se2] = stats(2);
  EXPECT_LE(std::abs(m1 - m2), 5.0 * std::hypot(se1, se2));
}
