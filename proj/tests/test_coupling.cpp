#include <gtest/gtest.h>

#include <cmath>

#include "kpzlab/coupling.hpp"
#include "kpzlab/lattice.hpp"
#include "kpzlab/stats.hpp"

using namespace kpz;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

PathFamily random_family(std::size_t rows, std::size_t N, std::uint64_t seed, double scale = 1.0) {
  Stream s(seed, 0, channel::kMisc);
  PathFamily f(rows, N);
  for (std::size_t j = 0; j < rows; ++j) {
    for (std::size_t k = 1; k <= N; ++k) f.at(j, k) = f.at(j, k - 1) + scale * s.normal() / std::sqrt(double(N));
  }
  return f;
}

// Law of the barrier-exit value of a Brownian motion started at 0: u with
// probability v / (v - u), v otherwise.
std::vector<double> exit_values(const WeightSpec& spec, std::size_t count, std::uint64_t seed) {
  const PairSampler pairs(spec);
  Stream s(seed, 0, 0), pick(seed, 0, 1);
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k) {
    const auto p = pairs(s);
    if (p.u == 0.0 && p.v == 0.0) {
      out.push_back(0.0);
      continue;
    }
    out.push_back(pick.uniform() < p.v / (p.v - p.u) ? p.u : p.v);
  }
  return out;
}

}  // namespace

TEST(SkorohodPair, Rademacher) {
  Stream s(1, 0, 0);
  for (int k = 0; k < 100; ++k) {
    const auto p = skorohod_pair(standardize(WeightSpec::rademacher()), s);
    EXPECT_EQ(p.u, -1.0);
    EXPECT_EQ(p.v, 1.0);
  }
}

TEST(SkorohodPair, TwoPointLaw) {
  const double a = 2.5;
  // Mean zero, variance one on {-a, 1/a}.
  const auto spec = standardize(WeightSpec::finite_discrete({{-a, 1.0 / (1.0 + a * a)}, {1.0 / a, a * a / (1.0 + a * a)}}));
  EXPECT_NEAR(spec.location, 0.0, 1e-12);
  EXPECT_NEAR(spec.scale, 1.0, 1e-12);
  Stream s(2, 0, 0);
  const PairSampler pairs(spec);
  for (int k = 0; k < 100; ++k) {
    const auto p = pairs(s);
    EXPECT_NEAR(p.u, -a, 1e-12);
    EXPECT_NEAR(p.v, 1.0 / a, 1e-12);
  }
}

TEST(SkorohodPair, RequiresStandardizedLaw) {
  EXPECT_THROW(PairSampler(WeightSpec::uniform()), DomainError);
  EXPECT_EQ(PairSampler(standardize(WeightSpec::gaussian())).truncation_mass(), 0.0);
}

TEST(SkorohodPair, BarrierSigns) {
  for (const auto& spec : {standardize(WeightSpec::gaussian()), standardize(WeightSpec::uniform()),
                           standardize(WeightSpec::shifted_exponential())}) {
    Stream s(3, 0, 0);
    const PairSampler pairs(spec);
    for (int k = 0; k < 10000; ++k) {
      const auto p = pairs(s);
      ASSERT_LE(p.u, 0.0);
      ASSERT_GE(p.v, 0.0);
      ASSERT_LT(p.u, p.v);
    }
  }
}

TEST(SkorohodPair, ExitLawMatchesGaussian) {
  const auto x = exit_values(standardize(WeightSpec::gaussian()), 100000, 4);
  EXPECT_LT(ks_distance(EmpiricalDistribution(x), normal_cdf), dkw_threshold(x.size()));
}

TEST(SkorohodPair, ExitLawMatchesUniform) {
  const double a = std::sqrt(3.0);
  const auto x = exit_values(standardize(WeightSpec::uniform()), 100000, 5);
  EXPECT_LT(ks_distance(EmpiricalDistribution(x), [&](double v) { return std::clamp((v + a) / (2 * a), 0.0, 1.0); }),
            dkw_threshold(x.size()));
}

TEST(SkorohodPair, ExitLawMatchesShiftedExponential) {
  const auto x = exit_values(standardize(WeightSpec::shifted_exponential()), 100000, 6);
  EXPECT_LT(ks_distance(EmpiricalDistribution(x), [](double v) { return v <= -1.0 ? 0.0 : 1.0 - std::exp(-(v + 1.0)); }),
            dkw_threshold(x.size()));
}

TEST(SkorohodPair, ExitLawMatchesDiscreteWithZeroAtom) {
  // Mean zero already, so half the mass sits at the standardized origin.
  const auto spec = standardize(WeightSpec::finite_discrete({{-1.0, 0.3}, {0.0, 0.5}, {1.5, 0.2}}));
  const auto x = exit_values(spec, 100000, 7);
  // Exact CDF of the standardized atoms.
  std::vector<std::pair<double, double>> atoms;
  for (const auto& a : spec.atoms) {
    const double y = (a.value - spec.location) / spec.scale;
    // The sampler treats rounding-level atoms as the origin.
    atoms.emplace_back(std::abs(y) < 1e-14 ? 0.0 : y, a.prob);
  }
  auto F = [&](double v) {
    double c = 0.0;
    for (const auto& [y, p] : atoms) c += (y <= v) ? p : 0.0;
    return c;
  };
  EXPECT_LT(ks_distance(EmpiricalDistribution(x), F), dkw_threshold(x.size()));
}

TEST(EmbedWalks, StructureAndRademacherIncrements) {
  EmbeddingOptions opt;
  opt.steps_per_unit = 256;
  const auto c = embed_walks(standardize(WeightSpec::rademacher()), 50, 3, 1, 0, opt);
  ASSERT_EQ(c.rows(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    ASSERT_EQ(c.embedded_walk[j].size(), 51u);
    ASSERT_EQ(c.stopping_indices[j].size(), 50u);
    EXPECT_EQ(c.embedded_walk[j][0], 0.0);
    EXPECT_EQ(c.brownian[j][0], 0.0);
    EXPECT_GE(c.brownian[j].size(), 50u * 256u + 1u);
    for (std::size_t k = 1; k <= 50; ++k) {
      EXPECT_EQ(std::abs(c.embedded_walk[j][k] - c.embedded_walk[j][k - 1]), 1.0);
      // The walk tracks the Brownian path at the stop up to the grid overshoot.
      const double b = c.brownian[j][c.stopping_indices[j][k - 1]];
      EXPECT_LE(std::abs(b - c.embedded_walk[j][k]), 8.0 * std::sqrt(c.h()));
      if (k > 1) {
        EXPECT_GE(c.stopping_indices[j][k - 1], c.stopping_indices[j][k - 2]);
      }
    }
  }
}

TEST(EmbedWalks, Deterministic) {
  EmbeddingOptions opt;
  opt.steps_per_unit = 64;
  const auto spec = standardize(WeightSpec::gaussian());
  const auto a = embed_walks(spec, 30, 2, 9, 4, opt);
  const auto b = embed_walks(spec, 30, 2, 9, 4, opt);
  EXPECT_EQ(a.embedded_walk, b.embedded_walk);
  EXPECT_EQ(a.brownian, b.brownian);
}

TEST(EmbedWalks, GridExhaustion) {
  EmbeddingOptions opt;
  opt.steps_per_unit = 16;
  opt.horizon_factor = 0.01;
  EXPECT_THROW(embed_walks(standardize(WeightSpec::rademacher()), 2000, 1, 1, 0, opt), GridExhaustedError);
}

// Wald: E[tau_1 + ... + tau_N] = N.
TEST(EmbedWalks, MeanTotalStoppingTime) {
  EmbeddingOptions opt;
  opt.steps_per_unit = 1000;
  const std::size_t N = 20, count = 1000;
  for (const auto& spec : {standardize(WeightSpec::rademacher()), standardize(WeightSpec::gaussian())}) {
    std::vector<double> total;
    for (std::size_t k = 0; k < count; ++k) {
      const auto c = embed_walks(spec, N, 1, 11, k, opt);
      total.push_back(double(c.stopping_indices[0].back()) * c.h());
    }
    const auto m = sample_moments(total);
    EXPECT_NEAR(m.mean, double(N), 5.0 * m.sd / std::sqrt(double(count))) << family_name(spec.family);
  }
}

TEST(EmbedWalks, CentralLimitTrend) {
  EmbeddingOptions opt;
  opt.steps_per_unit = 16;
  const auto spec = standardize(WeightSpec::uniform());
  for (std::size_t N : {100u, 1000u}) {
    std::vector<double> x;
    for (std::size_t k = 0; k < 2000; ++k) {
      const auto c = embed_walks(spec, N, 1, 13, k, opt);
      x.push_back(c.embedded_walk[0].back() / std::sqrt(double(N)));
    }
    EXPECT_LT(ks_distance(EmpiricalDistribution(x), normal_cdf), dkw_threshold(x.size())) << N;
  }
}

TEST(FunctionalF, ZeroPathCountsSequences) {
  for (std::size_t n : {1u, 2u, 5u}) {
    EXPECT_NEAR(functional_F_N(PathFamily(n, 17), 1.3), log_path_count(17, n), 1e-12);
  }
}

TEST(FunctionalF, SingleRowIsEndpointIncrement) {
  const auto f = random_family(1, 25, 3);
  EXPECT_NEAR(functional_F_N(f, 0.7), 0.7 * (f.at(0, 25) - f.at(0, 0)), 1e-13);
}

TEST(FunctionalF, EqualsLatticeOnWalkIncrements) {
  EmbeddingOptions opt;
  opt.steps_per_unit = 32;
  const auto c = embed_walks(standardize(WeightSpec::gaussian()), 40, 3, 17, 0, opt);
  DisorderField w(40, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t i = 0; i < 40; ++i) w(i, j) = c.embedded_walk[j][i + 1] - c.embedded_walk[j][i];
  }
  EXPECT_DOUBLE_EQ(functional_F_N(c.rescaled_walk(), 1.1), log_partition({40, 3, 1.1}, w));
}

TEST(PathMetric, BasicCases) {
  const auto f = random_family(3, 20, 1);
  EXPECT_EQ(path_metric(f, f), 0.0);
  auto g = f;
  for (double& x : g.row(1)) x += 0.3;
  EXPECT_NEAR(path_metric(f, g), 0.3, 1e-15);
  const auto h = random_family(3, 20, 2);
  EXPECT_EQ(path_metric(f, h), path_metric(h, f));
  EXPECT_THROW(path_metric(f, PathFamily(3, 21)), DomainError);
}

TEST(Lipschitz, ConstantShiftOnAllRows) {
  const auto f = random_family(4, 30, 5);
  auto g = f;
  for (std::size_t j = 0; j < 4; ++j) {
    for (double& x : g.row(j)) x += 0.4;
  }
  const auto c = lipschitz_check(f, g, 1.5);
  EXPECT_NEAR(c.lhs, 0.0, 1e-12);
  EXPECT_NEAR(c.rhs, 2.0 * 1.5 * 4 * 0.4, 1e-12);
  EXPECT_TRUE(c.ok);
  EXPECT_TRUE(lipschitz_check(f, f, 1.0).ok);
}

TEST(Lipschitz, RandomPairsNeverViolate) {
  for (std::uint64_t k = 0; k < 1000; ++k) {
    Stream s(99, k, 0);
    const std::size_t n = 1 + k % 5, N = 5 + k % 40;
    const double beta = 0.25 + 2.0 * s.uniform();
    const auto f = random_family(n, N, 2 * k + 1000, 3.0);
    const auto g = random_family(n, N, 2 * k + 1001, 3.0);
    ASSERT_TRUE(lipschitz_check(f, g, beta).ok) << k;
  }
}

TEST(CouplingGaps, SmallRunIsFiniteAndBounded) {
  EmbeddingOptions opt;
  opt.steps_per_unit = 16;
  const auto c = embed_walks(standardize(WeightSpec::rademacher()), 60, 2, 3, 0, opt);
  const auto g = coupling_gaps(c, 1.0);
  EXPECT_TRUE(std::isfinite(g.log_z_oy));
  EXPECT_LE(g.walk_vs_brownian, 2.0 * path_metric(c.rescaled_walk(), c.rescaled_brownian()) + 1e-9);
}

TEST(CouplingGaps, SmallBetaShrinksGapOne) {
  EmbeddingOptions opt;
  opt.steps_per_unit = 16;
  const auto c = embed_walks(standardize(WeightSpec::rademacher()), 60, 2, 3, 0, opt);
  const double d = path_metric(c.rescaled_walk(), c.rescaled_brownian());
  EXPECT_LE(coupling_gaps(c, 0.01).walk_vs_brownian, 2.0 * 0.01 * d + 1e-9);
}

TEST(CouplingGaps, EnvelopeFormula) {
  EXPECT_NEAR(oy_gap_envelope(3, 0.5, 2.0), 2.0 * 0.5 * 3 * 2.0 + std::log(6.0), 1e-14);
}

TEST(CouplingGaps, ExperimentShapeAndWorkers) {
  GapExperimentOptions opt;
  opt.embedding.steps_per_unit = 8;
  const std::vector<std::size_t> Ns{40, 80};
  const auto a = coupling_gap_experiment(standardize(WeightSpec::rademacher()), 0.2, Ns, 1.0, 12, 5, opt);
  opt.workers = 3;
  const auto b = coupling_gap_experiment(standardize(WeightSpec::rademacher()), 0.2, Ns, 1.0, 12, 5, opt);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].n, 2u);
  EXPECT_EQ(a[0].gap1, b[0].gap1);
  EXPECT_EQ(a[1].gap2, b[1].gap2);
  EXPECT_LE(a[0].gap1_median, a[0].gap1_q90);
  EXPECT_GE(a[1].envelope_fraction, 0.0);
}

TEST(Modulus, FarTailIsEmpty) {
  EXPECT_EQ(modulus_check(1.0, 0.01, 10.0, 10000, 1).probability, 0.0);
}

TEST(Modulus, LooseConstraintIsLikely) {
  EXPECT_GT(modulus_check(1.0, 0.99, 0.1, 2000, 2).probability, 0.99);
}

TEST(Modulus, OscillationWindow) {
  const std::vector<double> p{0.0, 1.0, -1.0, 0.5, 3.0};
  EXPECT_EQ(max_window_oscillation(p, 1), 2.5);
  EXPECT_EQ(max_window_oscillation(p, 4), 4.0);
}

TEST(Modulus, FittedEnvelopeCoversGrid) {
  std::vector<ModulusPoint> pts;
  std::uint64_t seed = 20;
  for (double r : {0.05, 0.1, 0.2}) {
    for (double x : {0.5, 0.8, 1.2}) pts.push_back({r, x, modulus_check(1.0, r, x, 2000, seed++, 512).probability});
  }
  const double k1 = fit_levy_k1(pts, 0.5);
  EXPECT_TRUE(std::isfinite(k1));
  for (const auto& p : pts) EXPECT_LE(p.probability, levy_envelope(p.r, p.x, k1, 0.5) * (1 + 1e-12));
}
