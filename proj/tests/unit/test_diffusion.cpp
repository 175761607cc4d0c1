#include "helpers.hpp"

#include "spme/diffusion.hpp"
#include "spme/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace spme;

TEST(Noise, ThetaAndGain) {
  TripleContext ctx(spme::testing::laplacian(16));
  NoiseCoefficient b(ctx, {.c0 = 2.0, .c1 = 0.5, .c2 = 0.5, .gamma = 0.5, .beta = 1.0}, 4.0);
  EXPECT_DOUBLE_EQ(b.theta(0.0), 1.0);
  EXPECT_DOUBLE_EQ(b.theta(1.0), 1.0 + 0.5 * 0.5);
  EXPECT_DOUBLE_EQ(b.theta(4.0), 1.5);
  EXPECT_THROW(b.theta(-0.1), DomainError);
  EXPECT_THROW(b.theta(4.1), DomainError);
  const Field u = spme::testing::sine(ctx.generator().grid(), 1);
  EXPECT_NEAR(b.gain(u), 2.0 + 0.5 * norm_fstar(ctx, u), 1e-14);
}

TEST(Noise, KernelHsNormClosedFormAndDense) {
  auto g = spme::testing::laplacian(24, 5.0);
  TripleContext ctx(g);
  NoiseCoefficient b(ctx, {.c0 = 1.0, .c1 = 0.0, .c2 = 0.0, .gamma = 1.0, .beta = 0.5}, 1.0);
  double expect = 0.0;
  for (Eigen::Index k = 0; k < 24; ++k) expect += 1.0 / ((1.0 - g.eigenvalues()(k)) * (1.0 - g.eigenvalues()(k)));
  // m_k^2 / (1 - l_k) with m_k = (1 - l_k)^{-1/2}
  EXPECT_NEAR(b.kernel_hs_norm(), std::sqrt(expect), 1e-12 * std::sqrt(expect));
  const Field u = Field::zeros(g.grid());
  EXPECT_NEAR(hs_norm(b, 0.3, u), hs_norm_to_fstar(ctx, b.assemble(0.3, u), 1.0), 1e-10);
}

TEST(Noise, ApplyMatchesAssembledMatrix) {
  auto g = spme::testing::laplacian(12);
  TripleContext ctx(g);
  NoiseCoefficient b(ctx, {}, 2.0);
  std::mt19937_64 rng(9);
  const Field u = spme::testing::random_field(g.grid(), rng);
  const Field v = spme::testing::random_field(g.grid(), rng);
  const Eigen::VectorXd expect = b.assemble(1.3, u) * v.values();
  EXPECT_LT((apply(b, 1.3, u, v).values() - expect).norm(), 1e-12 * expect.norm());
}

TEST(Noise, DeclaredConstants) {
  TripleContext ctx(spme::testing::laplacian(8));
  NoiseCoefficient b(ctx, {.c0 = 1.0, .c1 = 3.0, .c2 = 0.5, .gamma = 0.5, .beta = 1.0}, 4.0);
  const double k = b.kernel_hs_norm();
  EXPECT_DOUBLE_EQ(b.lipschitz_constant(), 1.5 * 3.0 * k);
  EXPECT_DOUBLE_EQ(b.growth_constant(), 1.5 * 3.0 * k);
  EXPECT_DOUBLE_EQ(b.holder_constant(), 0.5 * std::pow(4.0, -0.5) * 3.0 * k);
}

TEST(Noise, HypothesesHoldForDefaults) {
  TripleContext ctx(spme::testing::laplacian(32));
  for (const NoiseParams& p : {NoiseParams{}, spme::testing::constant_noise(),
                               NoiseParams{.c0 = 0.0, .c1 = 2.0, .c2 = 1.0, .gamma = 0.3, .beta = 0.0}}) {
    NoiseCoefficient b(ctx, p, 1.0);
    const auto r = validate_hypotheses(b, 10000, 11);
    EXPECT_TRUE(r.all_pass());
    EXPECT_GE(r.lipschitz_margin, -1e-12);
    EXPECT_GE(r.growth_margin, -1e-12);
    EXPECT_GE(r.holder_margin, -1e-12);
  }
}

TEST(Noise, DenseFamilyDetectsUnderstatedConstant) {
  auto g = spme::testing::laplacian(10);
  TripleContext ctx(g);
  NoiseCoefficient b(ctx, {}, 1.0);
  DenseNoiseFamily fam;
  fam.matrix = [&](double t, const Field& u) { return b.assemble(t, u); };
  fam.horizon = 1.0;
  fam.gamma = 0.5;
  fam.declared_lipschitz = b.lipschitz_constant();
  fam.declared_growth = b.growth_constant();
  fam.declared_holder = b.holder_constant();
  EXPECT_TRUE(validate_hypotheses(ctx, fam, 300, 5).all_pass());
  fam.declared_lipschitz *= 0.5;
  const auto r = validate_hypotheses(ctx, fam, 300, 5);
  EXPECT_FALSE(r.lipschitz_ok);
  EXPECT_TRUE(r.growth_ok);
}

TEST(Noise, RejectsBadParameters) {
  TripleContext ctx(spme::testing::laplacian(8));
  EXPECT_THROW(NoiseCoefficient(ctx, {.c0 = -1.0}, 1.0), ValidationError);
  EXPECT_THROW(NoiseCoefficient(ctx, {.gamma = 1.5}, 1.0), ValidationError);
  EXPECT_THROW(NoiseCoefficient(ctx, {}, 0.0), ValidationError);
}
