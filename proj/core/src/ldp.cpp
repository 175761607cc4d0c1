#include "spme/ldp.hpp"

#include "spme/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace spme {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void RateProblem::validate() const {
  const std::size_t n = model.generator().size();
  if (control_modes == 0 || control_modes > n) throw ValidationError("control_modes must be in [1, n]");
  if (control_cells == 0 || control_cells > steps) throw ValidationError("control_cells must be in [1, N_t]");
  if (steps % control_cells != 0) throw ValidationError("control_cells must divide N_t");
  if (!(terminal_tol > 0.0)) throw ValidationError("terminal_tol must be positive");
  require_same_grid(x, target);
  if (x.size() != n) throw DimensionError("initial state and generator sizes differ");
}

double rate_evaluate(const Control& h) { return 0.5 * h.energy(); }

Control control_from_coordinates(const RateProblem& p, const VectorXd& w) {
  if (static_cast<std::size_t>(w.size()) != p.dimension()) throw DimensionError("control coordinate size");
  const auto& g = p.model.generator();
  const double T = p.model.horizon();
  const double scale = 1.0 / std::sqrt(T / static_cast<double>(p.control_cells));
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto jc = static_cast<Eigen::Index>(p.control_modes);
  std::vector<Field> cells;
  cells.reserve(p.control_cells);
  for (std::size_t c = 0; c < p.control_cells; ++c) {
    VectorXd coeffs = VectorXd::Zero(n);
    coeffs.head(jc) = scale * w.segment(static_cast<Eigen::Index>(c) * jc, jc);
    cells.push_back(g.synthesize(coeffs));
  }
  return Control(T, std::move(cells));
}

VectorXd coordinates_from_control(const RateProblem& p, const Control& h) {
  if (h.cells() != p.control_cells) throw DimensionError("control has the wrong number of cells");
  const auto& g = p.model.generator();
  const double scale = std::sqrt(h.cell_width());
  const auto jc = static_cast<Eigen::Index>(p.control_modes);
  VectorXd w(static_cast<Eigen::Index>(p.dimension()));
  for (std::size_t c = 0; c < p.control_cells; ++c)
    w.segment(static_cast<Eigen::Index>(c) * jc, jc) = scale * g.coefficients(h.cell(c)).head(jc);
  return w;
}

namespace {

double gap_of(const RateProblem& p, const Control& h, const SolverOptions& opts) {
  const PathSolution path = solve_skeleton(p.model, h, p.x, p.steps, opts);
  return norm_fstar(p.model.context(), path.final_state() - p.target);
}

}  // namespace

double endpoint_gap(const RateProblem& p, const Control& h) { return gap_of(p, h, {}); }

ActionResult minimize_action(const RateProblem& p, const MinimizeOptions& opts) {
  p.validate();
  if (opts.penalties.empty()) throw DomainError("empty penalty schedule");
  const auto dim = static_cast<Eigen::Index>(p.dimension());

  auto project = [&](VectorXd& w) {
    if (!opts.energy_bound) return;
    const double e = w.squaredNorm();
    if (e > *opts.energy_bound) w *= std::sqrt(*opts.energy_bound / e);
  };

  ActionResult res{control_from_coordinates(p, VectorXd::Zero(dim)), 0.0, 0.0, false, false, 0, {}};
  VectorXd w = VectorXd::Zero(dim);
  for (double delta : opts.penalties) {
    if (!(delta > 0.0)) throw DomainError("penalties must be positive");
    auto objective = [&](const VectorXd& v) {
      const double gap = gap_of(p, control_from_coordinates(p, v), opts.solver);
      return 0.5 * v.squaredNorm() + gap * gap / delta;
    };
    auto gradient = [&](const VectorXd& v) {
      VectorXd gr(dim);
      VectorXd probe = v;
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double hstep = opts.fd_step * std::max(1.0, std::abs(v(i)));
        probe(i) = v(i) + hstep;
        const double fp = objective(probe);
        probe(i) = v(i) - hstep;
        const double fm = objective(probe);
        probe(i) = v(i);
        gr(i) = (fp - fm) / (2.0 * hstep);
      }
      return gr;
    };

    double f = objective(w);
    VectorXd gr = gradient(w);
    MatrixXd hinv = MatrixXd::Identity(dim, dim);
    for (int it = 0; it < opts.max_iterations; ++it) {
      if (gr.lpNorm<Eigen::Infinity>() <= opts.grad_tol * std::max(1.0, std::abs(f))) break;
      VectorXd dir = -hinv * gr;
      double slope = gr.dot(dir);
      if (!(slope < 0.0)) {
        hinv.setIdentity();
        dir = -gr;
        slope = -gr.squaredNorm();
      }
      double a = 1.0;
      bool accepted = false;
      VectorXd wn;
      double fn = 0.0;
      for (int ls = 0; ls < 40; ++ls, a *= 0.5) {
        wn = w + a * dir;
        project(wn);
        fn = objective(wn);
        if (std::isfinite(fn) && fn <= f + 1e-4 * a * slope) {
          accepted = true;
          break;
        }
      }
      ++res.iterations;
      if (!accepted) {
        // Nothing better along the direction: either converged to rounding
        // level or the model is too rough for the finite differences.
        if (gr.lpNorm<Eigen::Infinity>() > 1e-6 * std::max(1.0, std::abs(f))) res.degraded = true;
        break;
      }
      const VectorXd gn = gradient(wn);
      const VectorXd s = wn - w;
      const VectorXd y = gn - gr;
      const double sy = s.dot(y);
      if (sy > 1e-14 * s.norm() * y.norm()) {
        const double rho = 1.0 / sy;
        const MatrixXd id = MatrixXd::Identity(dim, dim);
        hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) +
               rho * s * s.transpose();
      }
      const bool small_step = s.lpNorm<Eigen::Infinity>() <= 1e-15 * std::max(1.0, w.lpNorm<Eigen::Infinity>());
      w = wn;
      f = fn;
      gr = gn;
      if (small_step) break;
      if (it + 1 == opts.max_iterations) res.degraded = true;
    }
    res.objective_per_level.push_back(f);
  }

  res.control = control_from_coordinates(p, w);
  res.rate = 0.5 * w.squaredNorm();
  res.endpoint_gap = gap_of(p, res.control, opts.solver);
  res.reached = res.endpoint_gap <= p.terminal_tol;
  return res;
}

OracleResult linear_oracle(const RateProblem& p, double rank_tol) {
  p.validate();
  if (!p.model.psi.is_linear()) throw DomainError("linear oracle needs linear Psi");
  if (!p.model.noise.state_independent()) throw DomainError("linear oracle needs c1 = 0");
  const auto& g = p.model.generator();
  const auto& ctx = p.model.context();
  const double T = p.model.horizon();
  const std::size_t N = p.steps;
  const double dt = T / static_cast<double>(N);
  const double k1 = p.model.psi.params().k1;
  const double c0 = p.model.noise.params().c0;
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto jc = static_cast<Eigen::Index>(p.control_modes);
  const std::size_t nc = p.control_cells;
  const double cell_scale = 1.0 / std::sqrt(T / static_cast<double>(nc));

  // y_k^{m+1} = a_k (y_k^m + dt theta_m c0 m_k h_k^m),  a_k = 1 / (1 - dt k1 lambda_k)
  VectorXd a(n);
  for (Eigen::Index k = 0; k < n; ++k) a(k) = 1.0 / (1.0 - dt * k1 * g.eigenvalues()(k));

  const VectorXd xc = g.coefficients(p.x);
  OracleResult out{Control::zero(g.grid(), T, nc), 0.0, 0.0, 0, {}, {}, {}};
  out.displacement = g.coefficients(p.target);
  for (Eigen::Index k = 0; k < n; ++k)
    out.displacement(k) -= std::pow(a(k), static_cast<double>(N)) * xc(k);

  out.response = MatrixXd::Zero(n, static_cast<Eigen::Index>(nc) * jc);
  const auto& gains = p.model.noise.mode_gains();
  for (std::size_t m = 0; m < N; ++m) {
    const double th = p.model.noise.theta(T * static_cast<double>(m) / static_cast<double>(N));
    const auto cell = static_cast<Eigen::Index>(m * nc / N);
    for (Eigen::Index k = 0; k < jc; ++k) {
      const double prop = std::pow(a(k), static_cast<double>(N - m));
      out.response(k, cell * jc + k) += prop * dt * th * c0 * gains(k) * cell_scale;
    }
  }

  // F*-weighted least squares: rows scaled by (nu - lambda_k)^{-1/2}.
  VectorXd wt(n);
  for (Eigen::Index k = 0; k < n; ++k) wt(k) = 1.0 / std::sqrt(ctx.default_nu() - g.eigenvalues()(k));
  const MatrixXd A = wt.asDiagonal() * out.response;
  const VectorXd b = wt.asDiagonal() * out.displacement;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod;
  cod.setThreshold(rank_tol);
  cod.compute(A);
  out.rank = cod.rank();
  out.w = cod.solve(b);
  out.control = control_from_coordinates(p, out.w);
  out.rate = 0.5 * out.w.squaredNorm();
  out.endpoint_gap = (A * out.w - b).norm();
  return out;
}

DecayReport weak_convergence_test(const Model& model, const Field& x, std::size_t steps,
                                  const Control& h, double amplitude, const std::vector<int>& n_list,
                                  const WeakTestOptions& opts) {
  if (n_list.empty()) throw DomainError("n_list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] <= 0) throw DomainError("n_list entries must be positive");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw DomainError("n_list must be increasing");
  }
  if (steps < 8 * static_cast<std::size_t>(n_list.back()))
    throw ResolutionError("fewer than 8 steps per oscillation at n = " + std::to_string(n_list.back()));

  const auto& g = model.generator();
  const double T = model.horizon();
  const double dt = T / static_cast<double>(steps);
  const Field e1 = g.eigenvector(0);
  const PathSolution base = solve_skeleton(model, h, x, steps, opts.solver);

  auto perturbed = [&](int n) {
    const double w = 2.0 * std::numbers::pi * n / T;
    std::vector<Field> cells;
    cells.reserve(steps);
    for (std::size_t m = 0; m < steps; ++m) {
      const double t0 = T * static_cast<double>(m) / static_cast<double>(steps);
      const double t1 = T * static_cast<double>(m + 1) / static_cast<double>(steps);
      const double avg = (std::cos(w * t0) - std::cos(w * t1)) / (w * dt);
      cells.push_back(h.at_step(m, steps) + (amplitude * avg) * e1);
    }
    return Control(T, std::move(cells));
  };

  DecayReport r;
  r.ns = n_list;
  r.distances.assign(n_list.size(), 0.0);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n_list.size(); i += stride) {
      const PathSolution p = solve_skeleton(model, perturbed(n_list[i]), x, steps, opts.solver);
      r.distances[i] = std::sqrt(sup_fstar_distance_sq(model.context(), p, base));
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(n_list.size())));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& t : pool) t.join();
  }

  r.strictly_decreasing = true;
  for (std::size_t i = 1; i < r.distances.size(); ++i)
    if (!(r.distances[i] < r.distances[i - 1])) r.strictly_decreasing = false;
  r.last_over_first = r.distances.front() > 0.0 ? r.distances.back() / r.distances.front() : 0.0;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < r.ns.size(); ++i) {
    if (r.distances[i] > 0.0) {
      xs.push_back(r.ns[i]);
      ys.push_back(r.distances[i]);
    }
  }
  if (xs.size() >= 2) r.fit = fit_loglog(xs, ys);
  return r;
}

}  // namespace spme
