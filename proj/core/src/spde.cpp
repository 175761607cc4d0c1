#include "spme/spde.hpp"

#include "spme/errors.hpp"
#include "stepper.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

namespace spme {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit(std::uint64_t bits) {
  // (0, 1], never zero so the log below is finite
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

std::size_t resolve_modes(std::size_t modes, std::size_t n) {
  if (modes == 0) return n;
  if (modes > n) throw DomainError("Wiener truncation exceeds the grid size");
  return modes;
}

}  // namespace

double normal_variate(std::uint64_t seed, std::uint64_t sample, std::uint64_t step,
                      std::uint64_t mode) {
  std::uint64_t k = mix(seed);
  k = mix(k ^ sample);
  k = mix(k ^ step);
  k = mix(k ^ mode);
  const double u1 = unit(k);
  const double u2 = unit(mix(k ^ 0x5851f42d4c957f2dULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SdeRun simulate(const Model& model, const Control& h, const Field& x, std::size_t steps,
                double epsilon, const WienerConfig& wiener, std::uint64_t sample,
                const SolverOptions& opts) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be >= 0");
  const std::size_t n = model.generator().size();
  const std::size_t modes = resolve_modes(wiener.modes, n);
  detail::IncrementFn noise;
  if (epsilon > 0.0) {
    const double sd = std::sqrt(epsilon * model.horizon() / static_cast<double>(steps));
    noise = [=](std::size_t step, Eigen::VectorXd& dw) {
      dw.setZero();
      for (std::size_t k = 0; k < modes; ++k)
        dw(static_cast<Eigen::Index>(k)) = sd * normal_variate(wiener.seed, sample, step, k);
    };
  }
  try {
    PathSolution p = detail::evolve(model, h, x, steps, {}, opts, noise);
    return {std::move(p), epsilon, h, wiener, sample};
  } catch (const DivergenceError& e) {
    std::ostringstream msg;
    msg << e.what() << " (eps = " << epsilon << ", sample " << sample << ")";
    throw DivergenceError(msg.str(), e.step());
  } catch (const StepFailure& e) {
    std::ostringstream msg;
    msg << e.what() << " (eps = " << epsilon << ", sample " << sample << ")";
    throw StepFailure(msg.str(), e.step());
  }
}

namespace {

struct SampleOutcome {
  std::optional<double> sup;
  double terminal = 0.0;
};

}  // namespace

McReport mc_condition_a(const Model& model, const Control& h, const Field& x, std::size_t steps,
                        const std::vector<double>& eps_list, std::size_t n_samples,
                        std::uint64_t seed, const McOptions& opts) {
  if (n_samples < 2) throw DomainError("n_samples must be at least 2");
  if (eps_list.empty()) throw DomainError("eps_list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw DomainError("eps values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw DomainError("eps_list must be decreasing");
  }
  const auto& ctx = model.context();
  const PathSolution skeleton = solve_skeleton(model, h, x, steps, opts.solver);
  const WienerConfig wiener{opts.modes, seed};

  McReport report;
  for (double eps : eps_list) {
    std::vector<SampleOutcome> out(n_samples);
    auto work = [&](std::size_t begin, std::size_t stride) {
      for (std::size_t s = begin; s < n_samples; s += stride) {
        try {
          const SdeRun run = simulate(model, h, x, steps, eps, wiener, s, opts.solver);
          out[s].sup = sup_fstar_distance_sq(ctx, run.path, skeleton);
          const double d = norm_fstar(ctx, run.path.final_state() - skeleton.final_state());
          out[s].terminal = d * d;
        } catch (const SolverError&) {
          out[s].sup.reset();
        }
      }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(n_samples)));
    if (threads == 1) {
      work(0, 1);
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
      for (auto& t : pool) t.join();
    }

    McRow row;
    row.epsilon = eps;
    double s1 = 0.0, s2 = 0.0, t1 = 0.0, t2 = 0.0;
    for (const auto& o : out) {
      if (!o.sup) {
        ++row.failed;
        continue;
      }
      ++row.n_effective;
      s1 += *o.sup;
      s2 += *o.sup * *o.sup;
      t1 += o.terminal;
      t2 += o.terminal * o.terminal;
    }
    if (row.failed > 0) {
      const double frac = static_cast<double>(row.failed) / static_cast<double>(n_samples);
      std::ostringstream msg;
      msg << row.failed << " of " << n_samples << " samples failed at eps = " << eps;
      if (frac >= opts.max_failed_fraction || row.n_effective < 2)
        throw DivergenceError(msg.str(), 0);
      report.warnings.push_back(msg.str() + "; excluded");
    }
    const double ne = static_cast<double>(row.n_effective);
    row.mean = s1 / ne;
    row.stderr_mean = std::sqrt(std::max(0.0, (s2 - ne * row.mean * row.mean) / (ne - 1.0)) / ne);
    row.terminal_mean = t1 / ne;
    row.terminal_stderr =
        std::sqrt(std::max(0.0, (t2 - ne * row.terminal_mean * row.terminal_mean) / (ne - 1.0)) / ne);
    report.rows.push_back(row);
  }

  report.monotone = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const auto& a = report.rows[i - 1];
    const auto& b = report.rows[i];
    const double pooled = std::hypot(a.stderr_mean, b.stderr_mean);
    if (b.mean > a.mean + 2.0 * pooled) report.monotone = false;
  }
  if (report.rows.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& r : report.rows) {
      if (r.mean > 0.0) {
        xs.push_back(r.epsilon);
        ys.push_back(r.mean);
      }
    }
    if (xs.size() >= 2) report.fit = fit_loglog(xs, ys);
  }
  return report;
}

double gaussian_terminal_moment(const Model& model, std::size_t steps, double epsilon,
                                std::size_t modes) {
  if (!model.psi.is_linear() || model.psi.params().k1 != 0.0)
    throw DomainError("closed form needs Psi = 0");
  if (!model.noise.state_independent()) throw DomainError("closed form needs c1 = 0");
  if (steps == 0) throw DomainError("N_t must be at least 1");
  const auto& g = model.generator();
  const std::size_t j = resolve_modes(modes, g.size());
  const double T = model.horizon();
  const double dt = T / static_cast<double>(steps);
  double time_sum = 0.0;
  for (std::size_t m = 0; m < steps; ++m) {
    const double th = model.noise.theta(T * static_cast<double>(m) / static_cast<double>(steps));
    time_sum += dt * th * th;
  }
  double mode_sum = 0.0;
  const auto& mk = model.noise.mode_gains();
  for (std::size_t k = 0; k < j; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    mode_sum += mk(i) * mk(i) / (model.context().default_nu() - g.eigenvalues()(i));
  }
  const double c0 = model.noise.params().c0;
  return epsilon * c0 * c0 * time_sum * mode_sum;
}

}  // namespace spme
