#include "spme/generator.hpp"

#include "spme/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace spme {

namespace {

constexpr int kGaussOrder = 16;

struct GaussLegendre {
  std::array<double, kGaussOrder> nodes{};
  std::array<double, kGaussOrder> weights{};
};

// Nodes and weights on [-1, 1] via Newton iteration on P_n.
GaussLegendre make_gauss_legendre() {
  GaussLegendre gl;
  const int n = kGaussOrder;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    gl.nodes[static_cast<std::size_t>(i)] = x;
    gl.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return gl;
}

const GaussLegendre& gauss_legendre() {
  static const GaussLegendre gl = make_gauss_legendre();
  return gl;
}

Eigen::MatrixXd semigroup_matrix(const SpectralGenerator& g, double t) {
  const Eigen::VectorXd decay = (t * g.eigenvalues().array()).exp().matrix();
  const Eigen::MatrixXd& v = g.eigenbasis();
  const Eigen::VectorXd& w = g.grid()->weights();
  return v * decay.asDiagonal() * v.transpose() * w.asDiagonal();
}

}  // namespace

SpectralGenerator SpectralGenerator::from_dense(GridPtr grid, const Eigen::MatrixXd& matrix,
                                                const GeneratorOptions& opts) {
  if (!grid) throw ValidationError("generator needs a grid");
  const auto n = static_cast<Eigen::Index>(grid->size());
  if (matrix.rows() != n || matrix.cols() != n) {
    throw DimensionError("generator matrix is " + std::to_string(matrix.rows()) + "x" +
                         std::to_string(matrix.cols()) + ", grid has " + std::to_string(n) +
                         " points");
  }
  if (!matrix.allFinite()) throw ValidationError("generator matrix has non-finite entries");

  const Eigen::VectorXd& w = grid->weights();
  const Eigen::MatrixXd wa = w.asDiagonal() * matrix;
  const double scale = std::max(1.0, wa.cwiseAbs().maxCoeff());
  const double asym = (wa - wa.transpose()).cwiseAbs().maxCoeff();
  if (asym > opts.symmetry_tol * scale) {
    throw ValidationError("generator is not self-adjoint in L2(mu): asymmetry " +
                          std::to_string(asym));
  }

  // W^{1/2} A W^{-1/2} is symmetric; its orthonormal eigenvectors q_k give
  // mu-orthonormal e_k = W^{-1/2} q_k.
  const Eigen::VectorXd sw = w.cwiseSqrt();
  Eigen::MatrixXd s = sw.asDiagonal() * matrix * sw.cwiseInverse().asDiagonal();
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) throw ValidationError("eigendecomposition failed");

  // Ascending from Eigen; store descending so the null mode comes first.
  Eigen::VectorXd lam = es.eigenvalues().reverse();
  Eigen::MatrixXd q = es.eigenvectors().rowwise().reverse();

  const double radius = lam.cwiseAbs().maxCoeff();
  const double clip = opts.eig_tol * std::max(1.0, radius);
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam(k) > clip) {
      throw ValidationError("generator is not negative semidefinite: eigenvalue " +
                            std::to_string(lam(k)));
    }
    if (lam(k) > 0.0) lam(k) = 0.0;
  }
  return from_spectrum(std::move(grid), std::move(lam), sw.cwiseInverse().asDiagonal() * q);
}

SpectralGenerator SpectralGenerator::periodic_laplacian(GridPtr grid) {
  if (!grid || !grid->spacing()) {
    throw ValidationError("periodic Laplacian needs a periodic1d grid");
  }
  const auto n = static_cast<Eigen::Index>(grid->size());
  const double inv_h2 = 1.0 / (*grid->spacing() * *grid->spacing());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) -= 2.0 * inv_h2;
    a(i, (i + 1) % n) += inv_h2;
    a(i, (i + n - 1) % n) += inv_h2;
  }
  return from_dense(std::move(grid), a);
}

SpectralGenerator SpectralGenerator::from_spectrum(GridPtr grid, Eigen::VectorXd eigenvalues,
                                                   Eigen::MatrixXd basis) {
  const auto n = static_cast<Eigen::Index>(grid->size());
  if (eigenvalues.size() != n || basis.rows() != n || basis.cols() != n) {
    throw DimensionError("spectrum does not match the grid");
  }
  auto data = std::make_shared<Data>();
  data->analysis = basis.transpose() * grid->weights().asDiagonal();
  data->grid = std::move(grid);
  data->eigenvalues = std::move(eigenvalues);
  data->basis = std::move(basis);
  return SpectralGenerator(std::move(data));
}

Field SpectralGenerator::eigenvector(std::size_t k) const {
  return Field(grid(), data_->basis.col(static_cast<Eigen::Index>(k)));
}

double SpectralGenerator::spectral_radius() const {
  return data_->eigenvalues.cwiseAbs().maxCoeff();
}

Eigen::VectorXd SpectralGenerator::coefficients(const Field& u) const {
  if (!same_grid(*u.grid(), *grid())) throw DimensionError("field is not on the generator grid");
  return data_->analysis * u.values();
}

Eigen::VectorXd SpectralGenerator::coefficients(const Eigen::VectorXd& values) const {
  if (values.size() != data_->analysis.cols()) throw DimensionError("value vector size mismatch");
  return data_->analysis * values;
}

Field SpectralGenerator::synthesize(const Eigen::VectorXd& coeffs) const {
  return Field(grid(), synthesize_values(coeffs));
}

Eigen::VectorXd SpectralGenerator::synthesize_values(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != data_->basis.cols()) throw DimensionError("coefficient vector size mismatch");
  return data_->basis * coeffs;
}

Field SpectralGenerator::apply(const Field& u) const {
  return multiply(u, [](double lam) { return lam; });
}

Eigen::MatrixXd SpectralGenerator::matrix() const {
  return data_->basis * data_->eigenvalues.asDiagonal() * data_->analysis;
}

Field semigroup_apply(const SpectralGenerator& g, double t, const Field& u) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("semigroup time must be >= 0");
  return g.multiply(u, [t](double lam) { return std::exp(t * lam); });
}

SpectralGenerator fractional(const SpectralGenerator& g, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("fractional exponent alpha must lie in (0, 1], got " +
                      std::to_string(alpha));
  }
  if (alpha == 1.0) return g;
  Eigen::VectorXd lam = g.eigenvalues();
  for (Eigen::Index k = 0; k < lam.size(); ++k) lam(k) = -std::pow(std::abs(lam(k)), alpha);
  return SpectralGenerator::from_spectrum(g.grid(), std::move(lam), g.eigenbasis());
}

Field resolvent_apply(const SpectralGenerator& g, double nu, const Field& u) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("resolvent shift nu must be > 0");
  return g.multiply(u, [nu](double lam) { return 1.0 / (nu - lam); });
}

Field one_minus_l_power(const SpectralGenerator& g, double p, const Field& u) {
  if (p == 1.0) return g.multiply(u, [](double lam) { return 1.0 - lam; });
  if (p == -1.0) return g.multiply(u, [](double lam) { return 1.0 / (1.0 - lam); });
  if (p == 0.5) return g.multiply(u, [](double lam) { return std::sqrt(1.0 - lam); });
  if (p == -0.5) return g.multiply(u, [](double lam) { return 1.0 / std::sqrt(1.0 - lam); });
  throw DomainError("unsupported exponent for (1-L)^p: " + std::to_string(p));
}

Field gamma_transform(const SpectralGenerator& g, double r, const Field& u,
                      const GammaTransformOptions& opts) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("Gamma-transform order r must be > 0");
  const double a = 0.5 * r;
  const Eigen::VectorXd c = g.coefficients(u);
  const Eigen::VectorXd& lam = g.eigenvalues();

  // t = e^s: the t^{a-1} singularity becomes the e^{a s} left tail and the
  // e^{-t} tail becomes doubly exponential on the right.
  const double s_lo = std::min(-10.0, std::log(1e-17 * a) / a);
  const double s_hi = std::log(std::max(80.0, 8.0 * a + 40.0));
  const auto& gl = gauss_legendre();
  const double norm = 1.0 / std::tgamma(a);

  auto integrate = [&](int panels) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(c.size());
    const double width = (s_hi - s_lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = s_lo + (p + 0.5) * width;
      for (int q = 0; q < kGaussOrder; ++q) {
        const double s = mid + 0.5 * width * gl.nodes[static_cast<std::size_t>(q)];
        const double t = std::exp(s);
        const double kernel = std::exp(a * s - t) * 0.5 * width *
                              gl.weights[static_cast<std::size_t>(q)];
        // kernel * P_t u in eigen-coordinates
        acc.array() += kernel * (t * lam.array()).exp() * c.array();
      }
    }
    return acc;
  };

  Eigen::VectorXd prev = integrate(opts.initial_panels);
  double change = 0.0;
  for (int level = 1; level <= opts.max_levels; ++level) {
    Eigen::VectorXd cur = integrate(opts.initial_panels << level);
    const double scale = cur.norm();
    change = scale > 0.0 ? (cur - prev).norm() / scale : (cur - prev).norm();
    prev = std::move(cur);
    if (change <= opts.rel_tol) return g.synthesize(norm * prev);
  }
  if (change > opts.fail_tol) {
    throw IntegrationError("Gamma-transform quadrature did not converge: relative change " +
                           std::to_string(change));
  }
  return g.synthesize(norm * prev);
}

bool SubMarkovReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.ok(); });
}

double SubMarkovReport::worst_violation() const {
  double worst = 0.0;
  for (const auto& c : checks) {
    worst = std::max({worst, c.contraction, c.positivity, c.submarkov});
  }
  return worst;
}

SubMarkovReport validate_submarkov(const SpectralGenerator& g,
                                   const std::vector<double>& sample_times,
                                   const SubMarkovOptions& opts) {
  SubMarkovReport report;
  const auto n = static_cast<Eigen::Index>(g.size());
  const Eigen::VectorXd& w = g.grid()->weights();
  auto l2 = [&](const Eigen::VectorXd& v) { return std::sqrt((w.array() * v.array().square()).sum()); };

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (double t : sample_times) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("sample times must be > 0");
    SubMarkovCheck chk;
    chk.t = t;
    const Eigen::MatrixXd pt = semigroup_matrix(g, t);

    // Columns of P_t are the images of point indicators: the extreme u >= 0.
    chk.positivity = std::max(0.0, -pt.minCoeff());
    // u = 1 is the extreme u <= 1 once positivity holds.
    chk.submarkov = std::max(0.0, pt.rowwise().sum().maxCoeff() - 1.0);

    for (std::size_t s = 0; s < opts.samples; ++s) {
      Eigen::VectorXd u(n), pos(n), low(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        u(i) = normal(rng);
        pos(i) = unit(rng);
        low(i) = 2.0 * unit(rng) - 1.0;
      }
      const double nu = l2(u);
      if (nu > 0.0) chk.contraction = std::max(chk.contraction, (l2(pt * u) - nu) / nu);
      chk.positivity = std::max(chk.positivity, -(pt * pos).minCoeff());
      chk.submarkov = std::max(chk.submarkov, (pt * low).maxCoeff() - 1.0);
    }
    chk.contraction = std::max(0.0, chk.contraction);
    chk.positivity = std::max(0.0, chk.positivity);
    chk.submarkov = std::max(0.0, chk.submarkov);
    chk.contraction_ok = chk.contraction <= opts.tol;
    chk.positivity_ok = chk.positivity <= opts.tol;
    chk.submarkov_ok = chk.submarkov <= opts.tol;
    report.checks.push_back(chk);
  }
  return report;
}

}  // namespace spme
