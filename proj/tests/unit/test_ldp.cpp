#include "helpers.hpp"

#include "spme/errors.hpp"
#include "spme/ldp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace spme;
using spme::testing::constant_noise;
using spme::testing::laplacian;
using spme::testing::make_model;
using spme::testing::sine;

namespace {

Field free_flow_end(const Model& m, const Field& x, std::size_t steps) {
  return solve_skeleton(m, Control::zero(x.grid(), m.horizon(), 1), x, steps).final_state();
}

RateProblem linear_problem(const SpectralGenerator& g, const Eigen::VectorXd& shift, std::size_t modes,
                           std::size_t cells) {
  const Model m = make_model(g, Nonlinearity::linear(1.0), constant_noise(1.0, 0.0));
  const Field x = spme::testing::sine(g.grid(), 1.0) + Field::constant(g.grid(), 0.3);
  const std::size_t steps = 64;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
  c.head(shift.size()) = shift;
  return RateProblem{.model = m,
                     .x = x,
                     .steps = steps,
                     .target = free_flow_end(m, x, steps) + g.synthesize(c),
                     .terminal_tol = 1e-3,
                     .control_modes = modes,
                     .control_cells = cells};
}

}  // namespace

TEST(RateFunction, EvaluateExamples) {
  auto grid = MeasureGrid::periodic1d(4, 2.0);
  EXPECT_EQ(rate_evaluate(Control::zero(grid, 1.0, 3)), 0.0);
  // |h|_2^2 = 9 * 2 over T = 2
  EXPECT_DOUBLE_EQ(rate_evaluate(Control(2.0, {Field::constant(grid, 3.0)})), 18.0);
  Control a(1.0, {Field::constant(grid, 1.0), Field::constant(grid, -2.0)});
  Control b(1.0, {Field::constant(grid, 0.5), Field::constant(grid, 4.0)});
  Control mid(1.0, {0.5 * (a.cell(0) + b.cell(0)), 0.5 * (a.cell(1) + b.cell(1))});
  EXPECT_LE(rate_evaluate(mid), 0.5 * (rate_evaluate(a) + rate_evaluate(b)));
}

TEST(RateFunction, CoordinatesAreIsometric) {
  auto g = laplacian(16);
  const RateProblem p = linear_problem(g, Eigen::VectorXd::Zero(1), 3, 4);
  Eigen::VectorXd w(12);
  for (int i = 0; i < 12; ++i) w(i) = std::sin(1.0 + i);
  const Control h = control_from_coordinates(p, w);
  EXPECT_NEAR(rate_evaluate(h), 0.5 * w.squaredNorm(), 1e-12);
  EXPECT_LT((coordinates_from_control(p, h) - w).norm(), 1e-12);
}

TEST(RateFunction, ScalarOracle) {
  // Constant mode: Y_T = x + T c0 u e_0, so I = delta^2 / (2 T c0^2).
  auto g = laplacian(16);
  const Model m = make_model(g, Nonlinearity::linear(1.0), constant_noise(2.0, 0.0));
  const Field x = sine(g.grid(), 1.0);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(16);
  c(0) = 0.6;
  const RateProblem p{.model = m, .x = x, .steps = 32, .target = free_flow_end(m, x, 32) + g.synthesize(c),
                      .terminal_tol = 1e-6, .control_modes = 1, .control_cells = 1};
  const OracleResult o = linear_oracle(p);
  EXPECT_NEAR(o.rate, 0.36 / 8.0, 1e-12);
  EXPECT_LT(o.endpoint_gap, 1e-12);
  EXPECT_LT(endpoint_gap(p, o.control), 1e-10);
}

TEST(RateFunction, ZeroDisplacementCostsNothing) {
  auto g = laplacian(16);
  const RateProblem p = linear_problem(g, Eigen::VectorXd::Zero(3), 3, 8);
  EXPECT_LT(linear_oracle(p).rate, 1e-14);
  const ActionResult r = minimize_action(p);
  EXPECT_LE(r.rate, 1e-8);
  EXPECT_TRUE(r.reached);
}

TEST(RateFunction, MinimizerMatchesOracle) {
  auto g = laplacian(16);
  Eigen::VectorXd shift(3);
  shift << 0.5, -0.3, 0.2;
  const RateProblem p = linear_problem(g, shift, 3, 8);
  const OracleResult o = linear_oracle(p);
  const ActionResult r = minimize_action(p);
  EXPECT_GT(o.rate, 0.0);
  EXPECT_LT(std::abs(r.rate - o.rate) / o.rate, 0.01);
  EXPECT_TRUE(r.reached);
  EXPECT_FALSE(r.degraded);
  ASSERT_EQ(r.objective_per_level.size(), 3u);
}

TEST(RateFunction, OracleIsMinimumNormOnReachableSet) {
  auto g = laplacian(16);
  Eigen::VectorXd shift(3);
  shift << 0.5, -0.3, 0.2;
  const RateProblem p = linear_problem(g, shift, 3, 4);
  const OracleResult o = linear_oracle(p);
  EXPECT_EQ(o.rank, 3);
  const Eigen::MatrixXd kernel = Eigen::FullPivLU<Eigen::MatrixXd>(o.response).kernel();
  ASSERT_EQ(kernel.cols(), 9);
  for (Eigen::Index j = 0; j < kernel.cols(); ++j) {
    const Eigen::VectorXd v = kernel.col(j);
    EXPECT_LT(std::abs(o.w.dot(v)), 1e-10 * v.norm());
    const Control moved = control_from_coordinates(p, o.w + 0.1 * v);
    EXPECT_LT(endpoint_gap(p, moved), 1e-9);
    EXPECT_GT(rate_evaluate(moved), o.rate);
  }
}

TEST(RateFunction, UnreachableTargetReportsGap) {
  auto g = laplacian(16);
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(4);
  shift(3) = 0.4;  // only modes 0..1 are controlled
  const RateProblem p = linear_problem(g, shift, 2, 2);
  const OracleResult o = linear_oracle(p);
  const double expected = 0.4 / std::sqrt(1.0 - g.eigenvalues()(3));
  EXPECT_NEAR(o.endpoint_gap, expected, 1e-10);
  EXPECT_LT(o.rate, 1e-14);
  const ActionResult r = minimize_action(p);
  EXPECT_FALSE(r.reached);
  EXPECT_NEAR(r.endpoint_gap, expected, 1e-3);
}

TEST(RateFunction, ProjectionKeepsEnergyBound) {
  auto g = laplacian(16);
  Eigen::VectorXd shift(3);
  shift << 2.0, -1.0, 1.0;
  const RateProblem p = linear_problem(g, shift, 3, 4);
  MinimizeOptions opts;
  opts.energy_bound = 0.5;
  const ActionResult r = minimize_action(p, opts);
  EXPECT_LE(2.0 * r.rate, 0.5 * (1.0 + 1e-12));
  EXPECT_LE(r.control.energy(), 0.5 * (1.0 + 1e-12));
  EXPECT_FALSE(r.reached);
}

TEST(RateFunction, ProblemValidation) {
  auto g = laplacian(16);
  RateProblem p = linear_problem(g, Eigen::VectorXd::Zero(1), 3, 4);
  p.control_modes = 0;
  EXPECT_THROW(p.validate(), ValidationError);
  p.control_modes = 17;
  EXPECT_THROW(p.validate(), ValidationError);
  p = linear_problem(g, Eigen::VectorXd::Zero(1), 3, 4);
  p.target = sine(MeasureGrid::periodic1d(8, 1.0), 1.0);
  EXPECT_THROW(p.validate(), DimensionError);
  p = linear_problem(g, Eigen::VectorXd::Zero(1), 3, 5);
  EXPECT_THROW(p.validate(), ValidationError);
  RateProblem nl = linear_problem(g, Eigen::VectorXd::Zero(1), 3, 4);
  nl.model.psi = Nonlinearity::atan_saturated(1.0);
  EXPECT_THROW(linear_oracle(nl), DomainError);
}

TEST(WeakConvergence, ZeroAmplitudeGivesZeroDistance) {
  auto g = laplacian(16);
  const Model m = make_model(g, Nonlinearity::atan_saturated(1.0));
  const auto r = weak_convergence_test(m, sine(g.grid(), 1.0), 128, Control::zero(g.grid(), 1.0, 2), 0.0,
                                       {1, 2, 4});
  for (double d : r.distances) EXPECT_EQ(d, 0.0);
  EXPECT_FALSE(r.passed());
}

TEST(WeakConvergence, LinearClosedForm) {
  // Perturbation lives on the constant mode, which L and K leave alone:
  // d_n = A c0 sup_t |int_0^t sin(2 pi n s / T) ds| = A c0 T / (pi n).
  auto g = laplacian(16);
  const Model m = make_model(g, Nonlinearity::linear(1.0), constant_noise(1.5, 1.0));
  const double amp = 0.8;
  const std::vector<int> ns{1, 2, 4, 8};
  const auto r = weak_convergence_test(m, sine(g.grid(), 1.0), 256, Control::zero(g.grid(), 1.0, 1), amp, ns);
  for (std::size_t i = 0; i < ns.size(); ++i)
    EXPECT_NEAR(r.distances[i], amp * 1.5 / (std::numbers::pi * ns[i]), 1e-10) << "n=" << ns[i];
  EXPECT_TRUE(r.passed());
  EXPECT_NEAR(r.fit.slope, -1.0, 1e-6);
}

TEST(WeakConvergence, NonlinearDecays) {
  auto g = laplacian(32);
  const Model m = make_model(g, Nonlinearity::atan_saturated(1.0));
  const auto r = weak_convergence_test(m, sine(g.grid(), 1.0), 256, Control::zero(g.grid(), 1.0, 1), 1.0,
                                       {1, 2, 4, 8, 16, 32});
  EXPECT_TRUE(r.strictly_decreasing);
  EXPECT_LE(r.last_over_first, 0.2);
  EXPECT_LT(r.fit.slope, -0.7);
}

TEST(WeakConvergence, RequiresResolution) {
  auto g = laplacian(16);
  const Model m = make_model(g, Nonlinearity::linear(1.0));
  EXPECT_THROW(weak_convergence_test(m, sine(g.grid(), 1.0), 100, Control::zero(g.grid(), 1.0, 1), 1.0,
                                     {1, 2, 16}),
               ResolutionError);
}
