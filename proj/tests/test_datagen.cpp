#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace ldinfomax;

TEST(ToeplitzCorrelation, Examples) {
  EXPECT_EQ(toeplitz_correlation(2, 0.0), Matrix::Identity(2, 2));
  const Matrix c = toeplitz_correlation(5, 0.5);
  Eigen::RowVectorXd first(5);
  first << 1, 0.5, 0.5, 0.5, 0.5;
  EXPECT_EQ(c.row(0), first);
  EXPECT_EQ(c, c.transpose());
}

TEST(ToeplitzCorrelation, EigenvaluesOfStrongCorrelation) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(toeplitz_correlation(3, 0.9));
  EXPECT_NEAR(eig.eigenvalues()(0), 0.1, 1e-12);
  EXPECT_NEAR(eig.eigenvalues()(1), 0.1, 1e-12);
  EXPECT_NEAR(eig.eigenvalues()(2), 2.8, 1e-12);
}

TEST(ToeplitzCorrelation, RejectsNonPositiveDefinite) {
  EXPECT_THROW(toeplitz_correlation(3, 1.0), std::invalid_argument);
  EXPECT_THROW(toeplitz_correlation(3, -0.5), std::invalid_argument);
  EXPECT_NO_THROW(toeplitz_correlation(3, -0.49));
  EXPECT_NO_THROW(toeplitz_correlation(1, 0.99));
}

TEST(CopulaT, OutputsInUnitInterval) {
  const Matrix u = copula_t_uniforms(4, 5000, 0.6, 4.0, std::uint64_t{3});
  EXPECT_GE(u.minCoeff(), 0.0);
  EXPECT_LE(u.maxCoeff(), 1.0);
}

TEST(CopulaT, UncorrelatedMarginalsAreUniform) {
  const Matrix u = copula_t_uniforms(3, 10000, 0.0, 4.0, std::uint64_t{5});
  for (Index i = 0; i < 3; ++i) {
    std::vector<double> x(static_cast<std::size_t>(u.cols()));
    for (Index j = 0; j < u.cols(); ++j) x[static_cast<std::size_t>(j)] = u(i, j);
    EXPECT_LT(oracle::ks_uniform(x), 0.02) << "row " << i;
  }
}

TEST(CopulaT, CorrelatedPairsInExpectedRange) {
  const Matrix u = copula_t_uniforms(5, 10000, 0.5, 4.0, std::uint64_t{7});
  for (Index i = 0; i < 5; ++i) {
    for (Index j = i + 1; j < 5; ++j) {
      const double c = oracle::pearson(u.row(i), u.row(j));
      EXPECT_GE(c, 0.35);
      EXPECT_LE(c, 0.60);
    }
  }
}

TEST(CopulaT, DeterministicGivenSeed) {
  EXPECT_EQ(copula_t_uniforms(3, 100, 0.3, 4.0, std::uint64_t{9}),
            copula_t_uniforms(3, 100, 0.3, 4.0, std::uint64_t{9}));
  EXPECT_NE(copula_t_uniforms(3, 100, 0.3, 4.0, std::uint64_t{9}),
            copula_t_uniforms(3, 100, 0.3, 4.0, std::uint64_t{10}));
}

TEST(SourcesInPolytope, CubeIsIdentity) {
  Rng rng(1);
  Matrix batch;
  const UniformSource draw = [&](Index n) {
    batch = uniform01(rng, 3, n);
    return batch;
  };
  const PlacementResult res = sources_in_polytope(draw, PolytopeSpec::linf_nonneg(3), 500, PlacementMode::Reject);
  EXPECT_EQ(res.sources, batch);
  EXPECT_EQ(res.acceptance_rate, 1.0);
}

TEST(SourcesInPolytope, SignedCoordinatesMapped) {
  const UniformSource draw = [](Index n) { return Matrix::Constant(2, n, 0.75); };
  const PlacementResult res = sources_in_polytope(draw, PolytopeSpec::linf(2), 3, PlacementMode::Reject);
  EXPECT_EQ(res.sources, Matrix::Constant(2, 3, 0.5));
}

TEST(SourcesInPolytope, SimplexRejectionRateIsHalf) {
  Rng rng(2);
  const UniformSource draw = [&](Index n) { return copula_t_uniforms(2, n, 0.0, 4.0, rng); };
  const PlacementResult res = sources_in_polytope(draw, PolytopeSpec::l1_nonneg(2), 20000, PlacementMode::Reject);
  EXPECT_NEAR(res.acceptance_rate, 0.5, 0.05);
  EXPECT_TRUE(columns_contained(PolytopeSpec::l1_nonneg(2), res.sources, 1e-9));
}

TEST(SourcesInPolytope, ScaleModeFeasible) {
  Rng rng(3);
  const UniformSource draw = [&](Index n) { return uniform01(rng, 4, n); };
  for (const auto& p : {PolytopeSpec::l1_nonneg(4), PolytopeSpec::l1(4)}) {
    const PlacementResult res = sources_in_polytope(draw, p, 2000, PlacementMode::Scale);
    EXPECT_TRUE(columns_contained(p, res.sources, 1e-9));
    EXPECT_EQ(res.acceptance_rate, 1.0);
  }
}

TEST(SourcesInPolytope, AbortsOnTinyAcceptance) {
  Rng rng(4);
  const UniformSource draw = [&](Index n) { return uniform01(rng, 12, n); };
  EXPECT_THROW(sources_in_polytope(draw, PolytopeSpec::l1_nonneg(12), 100, PlacementMode::Reject),
               std::runtime_error);
}

TEST(MixingMatrix, ReproducibleAndFullRank) {
  EXPECT_EQ(mixing_matrix(8, 5, std::uint64_t{1}), mixing_matrix(8, 5, std::uint64_t{1}));
  for (std::uint64_t s = 0; s < 20; ++s) {
    Eigen::ColPivHouseholderQR<Matrix> qr(mixing_matrix(8, 5, s));
    EXPECT_EQ(qr.rank(), 5);
  }
  EXPECT_THROW(mixing_matrix(3, 5, std::uint64_t{1}), std::invalid_argument);
}

TEST(MixingMatrix, StandardNormalEntries) {
  const Matrix h = mixing_matrix(100, 100, std::uint64_t{2});
  const double mean = h.mean();
  const double var = (h.array() - mean).square().mean();
  EXPECT_LT(std::abs(mean), 3.0 / std::sqrt(100.0 * 100.0));
  EXPECT_NEAR(var, 1.0, 0.2);
}

TEST(AddNoise, NoiselessSentinels) {
  Rng rng(5);
  const Matrix y = Matrix::Ones(3, 10);
  const NoisyMixture a = add_noise(y, std::nullopt, rng);
  EXPECT_EQ(a.Y, y);
  EXPECT_EQ(a.sigma, 0.0);
  const NoisyMixture b = add_noise(y, std::numeric_limits<double>::infinity(), rng);
  EXPECT_EQ(b.Y, y);
}

TEST(AddNoise, ZeroDbMeansUnitRatio) {
  Rng rng(6);
  const Matrix y = 2.0 * Matrix::Ones(3, 10);
  EXPECT_NEAR(add_noise(y, 0.0, rng).sigma, 2.0, 1e-15);
  EXPECT_THROW(add_noise(Matrix::Zero(2, 5), 10.0, rng), std::invalid_argument);
}

TEST(AddNoise, RealizedSnrNearTarget) {
  Rng rng(7);
  const Matrix clean = standard_normal(rng, 8, 10000);
  for (double snr : {0.0, 10.0, 30.0}) {
    const NoisyMixture noisy = add_noise(clean, snr, rng);
    EXPECT_NEAR(realized_snr_db(clean, noisy.Y), snr, 0.2);
  }
}

TEST(GenerateScenario, InvariantsHold) {
  ScenarioConfig cfg;
  cfg.N = 3000;
  cfg.snr_db.reset();
  const Scenario sc = generate_scenario(cfg);
  EXPECT_EQ(sc.S_g.rows(), 5);
  EXPECT_EQ(sc.H_g.rows(), 8);
  EXPECT_LT((sc.Y - sc.H_g * sc.S_g).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(columns_contained(cfg.polytope, sc.S_g, 1e-9));
  EXPECT_EQ(sc.noise_sigma, 0.0);
}

TEST(GenerateScenario, AllPresetsFeasible) {
  for (const auto& p : {PolytopeSpec::l1(3), PolytopeSpec::linf(3), PolytopeSpec::l1_nonneg(3),
                        PolytopeSpec::linf_nonneg(3), PolytopeSpec::example()}) {
    ScenarioConfig cfg;
    cfg.r = 3;
    cfg.M = 4;
    cfg.N = 500;
    cfg.polytope = p;
    EXPECT_TRUE(columns_contained(p, generate_scenario(cfg).S_g, 1e-9)) << p.name;
  }
}

TEST(GenerateScenario, SeedFixesEverything) {
  ScenarioConfig cfg;
  cfg.N = 500;
  cfg.seed = 42;
  const Scenario a = generate_scenario(cfg);
  const Scenario b = generate_scenario(cfg);
  EXPECT_EQ(a.S_g, b.S_g);
  EXPECT_EQ(a.H_g, b.H_g);
  EXPECT_EQ(a.Y, b.Y);
  cfg.seed = 43;
  EXPECT_NE(generate_scenario(cfg).Y, a.Y);
}

TEST(GenerateScenario, IidUniformSourcesUncorrelated) {
  ScenarioConfig cfg;
  cfg.N = 10000;
  cfg.rho = 0.0;
  cfg.source_mode = SourceMode::UniformIid;
  const Scenario sc = generate_scenario(cfg);
  for (Index i = 0; i < 5; ++i) {
    for (Index j = i + 1; j < 5; ++j) {
      EXPECT_LT(std::abs(oracle::pearson(sc.S_g.row(i), sc.S_g.row(j))), 3.0 / std::sqrt(10000.0));
    }
  }
}

TEST(GenerateScenario, ConfigValidation) {
  ScenarioConfig cfg;
  cfg.M = 4;
  EXPECT_THROW(generate_scenario(cfg), std::invalid_argument);
  cfg = {};
  cfg.r = 4;
  EXPECT_THROW(generate_scenario(cfg), std::invalid_argument);  // polytope still 5-D
  cfg = {};
  cfg.dof = 0.5;
  EXPECT_THROW(generate_scenario(cfg), std::invalid_argument);
  EXPECT_THROW(parse_source_mode("gaussian"), std::invalid_argument);
  EXPECT_THROW(parse_placement_mode("clip"), std::invalid_argument);
}
