#include "commoncv/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "commoncv/error.hpp"
#include "commoncv/normal.hpp"

namespace commoncv {

namespace {

double total_n(std::span<const SampleSummary> groups) {
  double n = 0.0;
  for (const auto& g : groups) n += static_cast<double>(g.n());
  return n;
}

// (n_i - 1) s_i^2 + n_i xbar_i^2, i.e. sum_j x_ij^2.
double raw_second_moment(const SampleSummary& g) {
  const double n = static_cast<double>(g.n());
  return (n - 1.0) * g.variance() + n * g.mean() * g.mean();
}

void check_sigmas(std::span<const SampleSummary> groups, std::span<const double> sigmas) {
  if (sigmas.size() != groups.size()) {
    throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(groups.size()) +
                                                " sigmas, got " + std::to_string(sigmas.size()));
  }
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0) || !std::isfinite(sigmas[i])) {
      throw Error(ErrorCode::NonPositiveSigma, "sigma must be positive", i);
    }
  }
}

// Concave, scale-free parameterisation used by the MLE iteration:
// eta = 1/phi and rho_i = s_i / sigma_i. With r_i = xbar_i / s_i and
// q_i = (n_i - 1) + n_i r_i^2, per group and up to constants,
//   f_i = n_i ln rho_i - q_i rho_i^2 / 2 + n_i r_i eta rho_i - n_i eta^2 / 2,
// so the iteration sees the data only through (n_i, r_i).
struct ConcaveState {
  double eta;
  Eigen::VectorXd rho;
};

double scaled_second_moment(const SampleSummary& g) {
  const double n = static_cast<double>(g.n());
  const double r = g.inverse_cv();
  return (n - 1.0) + n * r * r;
}

bool in_domain(const ConcaveState& s) {
  const double a = std::abs(s.eta);
  if (!(a > 1e-6 && a < 1e6)) return false;
  return (s.rho.array() > 0.0).all() && s.rho.allFinite();
}

ParameterVector to_theta(std::span<const SampleSummary> groups, const ConcaveState& s) {
  std::vector<double> sigmas(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    sigmas[i] = groups[i].sd() / s.rho[static_cast<Eigen::Index>(i)];
  }
  return ParameterVector(1.0 / s.eta, std::move(sigmas));
}

// Log-likelihood change from `from` to `to`, formed term by term so that
// small steps are not lost to cancellation between two large totals.
double likelihood_change(std::span<const SampleSummary> groups, const ConcaveState& from,
                         const ConcaveState& to, double* noise) {
  double delta = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double n = static_cast<double>(groups[i].n());
    const double q = scaled_second_moment(groups[i]);
    const double r = groups[i].inverse_cv();
    const double p0 = from.rho[ii];
    const double p1 = to.rho[ii];
    delta += n * std::log(p1 / p0) - 0.5 * q * (p1 - p0) * (p1 + p0) +
             n * r * (to.eta * p1 - from.eta * p0) - 0.5 * n * (to.eta - from.eta) * (to.eta + from.eta);
    scale += n + q * p0 * p0 + std::abs(n * r * from.eta * p0) + n * from.eta * from.eta;
  }
  *noise = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  return delta;
}

}  // namespace

std::vector<double> group_cvs(const Study& study) {
  std::vector<double> out;
  out.reserve(study.k());
  for (const auto& g : study.groups()) out.push_back(g.cv());
  return out;
}

double feltz_miller_estimate(const Study& study) {
  double weighted = 0.0;
  for (const auto& g : study.groups()) weighted += static_cast<double>(g.n()) * g.cv();
  return weighted / static_cast<double>(study.total_n());
}

double new_estimate(const Study& study) {
  double denom = 0.0;
  for (const auto& g : study.groups()) denom += static_cast<double>(g.n()) * g.inverse_cv();
  if (denom == 0.0 || !std::isfinite(denom)) {
    throw Error(ErrorCode::DegenerateDenominator,
                "sum of n_i * mean_i / sd_i is zero; the estimator is undefined");
  }
  return static_cast<double>(study.total_n()) / denom;
}

double eta_hat(std::span<const SampleSummary> groups, std::span<const double> sigmas) {
  check_sigmas(groups, sigmas);
  double sum = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    sum += static_cast<double>(groups[i].n()) / sigmas[i] * groups[i].mean();
  }
  return sum / total_n(groups);
}

double eta_hat(const Study& study, std::span<const double> sigmas) {
  return eta_hat(std::span<const SampleSummary>(study.groups()), sigmas);
}

double log_likelihood(std::span<const SampleSummary> groups, const ParameterVector& theta) {
  check_sigmas(groups, theta.sigmas());
  const double phi = theta.phi();
  double ll = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    const double n = static_cast<double>(g.n());
    const double sigma = theta.sigma(i);
    const double dev = g.mean() - sigma / phi;
    ll += -n * std::log(sigma) - ((n - 1.0) * g.variance() + n * dev * dev) / (2.0 * sigma * sigma);
  }
  return ll - 0.5 * total_n(groups) * std::log(2.0 * std::numbers::pi);
}

double log_likelihood(const Study& study, const ParameterVector& theta) {
  return log_likelihood(std::span<const SampleSummary>(study.groups()), theta);
}

ScoreHessian score_and_hessian(std::span<const SampleSummary> groups,
                               const ParameterVector& theta) {
  check_sigmas(groups, theta.sigmas());
  const auto k = static_cast<Eigen::Index>(groups.size());
  const double phi = theta.phi();
  const double eta = 1.0 / phi;
  const double deta = -1.0 / (phi * phi);        // d eta / d phi
  const double d2eta = 2.0 / (phi * phi * phi);  // d2 eta / d phi2

  ScoreHessian out{Eigen::VectorXd::Zero(k + 1), Eigen::MatrixXd::Zero(k + 1, k + 1)};
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& g = groups[static_cast<std::size_t>(i)];
    const double n = static_cast<double>(g.n());
    const double xbar = g.mean();
    const double q = raw_second_moment(g);
    const double s = theta.sigma(static_cast<std::size_t>(i));
    const double s2 = s * s;

    // f_i = -n ln s - q/(2 s^2) + n xbar eta / s - n eta^2 / 2
    const double f_eta = n * xbar / s - n * eta;
    const double f_s = -n / s + q / (s2 * s) - n * xbar * eta / s2;
    const double f_ss = n / s2 - 3.0 * q / (s2 * s2) + 2.0 * n * xbar * eta / (s2 * s);
    const double f_eta_s = -n * xbar / s2;

    out.gradient[0] += f_eta * deta;
    out.gradient[i + 1] = f_s;
    out.hessian(0, 0) += -n * deta * deta + f_eta * d2eta;
    out.hessian(0, i + 1) = f_eta_s * deta;
    out.hessian(i + 1, 0) = f_eta_s * deta;
    out.hessian(i + 1, i + 1) = f_ss;
  }
  return out;
}

ScoreHessian score_and_hessian(const Study& study, const ParameterVector& theta) {
  return score_and_hessian(std::span<const SampleSummary>(study.groups()), theta);
}

Eigen::VectorXd newton_update(const Eigen::VectorXd& theta, const Eigen::VectorXd& gradient,
                              const Eigen::MatrixXd& hessian) {
  if (!hessian.allFinite() || !gradient.allFinite()) {
    throw Error(ErrorCode::SingularHessian, "non-finite gradient or Hessian");
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(hessian);
  if (!(lu.rcond() > 1e-14)) {
    throw Error(ErrorCode::SingularHessian, "Hessian is numerically singular");
  }
  Eigen::VectorXd next = theta - lu.solve(gradient);
  if (!next.allFinite()) throw Error(ErrorCode::SingularHessian, "Newton step is not finite");
  return next;
}

ParameterVector newton_step(const Study& study, const ParameterVector& theta) {
  const auto sh = score_and_hessian(study, theta);
  Eigen::VectorXd current(static_cast<Eigen::Index>(theta.k() + 1));
  current[0] = theta.phi();
  for (std::size_t i = 0; i < theta.k(); ++i) current[static_cast<Eigen::Index>(i + 1)] = theta.sigma(i);
  const Eigen::VectorXd next = newton_update(current, sh.gradient, sh.hessian);
  return ParameterVector(next[0], std::vector<double>(next.begin() + 1, next.end()));
}

ParameterVector initial_estimate(const Study& study) {
  std::vector<double> sigmas;
  sigmas.reserve(study.k());
  for (const auto& g : study.groups()) sigmas.push_back(g.sd());
  return ParameterVector(new_estimate(study), std::move(sigmas));
}

MleFit newton_mle_fit(std::span<const SampleSummary> groups, const ParameterVector& start,
                      const NewtonOptions& options) {
  check_sigmas(groups, start.sigmas());
  const auto k = static_cast<Eigen::Index>(groups.size());
  const double n_total = total_n(groups);
  constexpr double eps = std::numeric_limits<double>::epsilon();

  ConcaveState cur{start.eta(), Eigen::VectorXd(k)};
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    cur.rho[i] = groups[ii].sd() / start.sigma(ii);
  }

  auto finish = [&](int iterations) {
    const ParameterVector theta = to_theta(groups, cur);
    const double gmax = score_and_hessian(groups, theta).gradient.cwiseAbs().maxCoeff();
    return MleFit{theta, iterations, gmax};
  };

  double last_gmax = HUGE_VAL;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Eigen::VectorXd g(k + 1);
    Eigen::MatrixXd neg_h = Eigen::MatrixXd::Zero(k + 1, k + 1);
    g[0] = -n_total * cur.eta;
    neg_h(0, 0) = n_total;
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto& grp = groups[static_cast<std::size_t>(i)];
      const double n = static_cast<double>(grp.n());
      const double q = scaled_second_moment(grp);
      const double r = grp.inverse_cv();
      const double p = cur.rho[i];
      g[0] += n * r * p;
      g[i + 1] = n / p - q * p + n * r * cur.eta;
      neg_h(0, i + 1) = -n * r;
      neg_h(i + 1, 0) = -n * r;
      neg_h(i + 1, i + 1) = n / (p * p) + q;
    }
    last_gmax = g.cwiseAbs().maxCoeff();
    if (last_gmax == 0.0) return finish(iter);

    Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::SingularHessian, "Hessian is not negative definite");
    }
    const Eigen::VectorXd delta = llt.solve(g);
    if (!delta.allFinite()) throw Error(ErrorCode::SingularHessian, "Newton step is not finite");
    const double decrement = g.dot(delta);

    double step = 1.0;
    bool accepted = false;
    ConcaveState next = cur;
    for (int h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
      next.eta = cur.eta + step * delta[0];
      next.rho = cur.rho + step * delta.tail(k);
      if (!in_domain(next)) continue;
      double noise = 0.0;
      const double change = likelihood_change(groups, cur, next, &noise);
      if (change >= 1e-4 * step * decrement - noise) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw Error(ErrorCode::NoConvergence, "no ascent step found after step halving");
    }

    bool moved = std::abs(next.eta - cur.eta) > 4.0 * eps * std::abs(cur.eta);
    for (Eigen::Index i = 0; i < k && !moved; ++i) {
      moved = std::abs(next.rho[i] - cur.rho[i]) > 4.0 * eps * cur.rho[i];
    }
    cur = next;
    // A full step that no longer changes the iterate is a floating-point
    // fixed point of the iteration.
    if (!moved && step == 1.0) return finish(iter + 1);
  }
  if (last_gmax < options.gradient_tolerance * n_total) return finish(options.max_iterations);
  throw Error(ErrorCode::NoConvergence,
              "Newton iteration did not converge in " + std::to_string(options.max_iterations) +
                  " iterations");
}

ParameterVector newton_mle(const Study& study, const NewtonOptions& options) {
  return newton_mle_fit(study.groups(), initial_estimate(study), options).theta;
}

IntervalResult vj_interval(const Study& study, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "level must lie in (0, 1)");
  }
  const double phi = newton_mle(study).phi();
  const double z = normal_quantile(0.5 + 0.5 * level);
  const double half =
      z * std::sqrt((phi * phi * phi * phi + 0.5 * phi * phi) / static_cast<double>(study.total_n()));
  IntervalResult out;
  out.method = Method::VerrillJohnson;
  out.level = level;
  out.lower = phi - half;
  out.upper = phi + half;
  out.length = out.upper - out.lower;
  out.draws = 0;
  return out;
}

}  // namespace commoncv
