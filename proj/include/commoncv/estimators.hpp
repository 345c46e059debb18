#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "commoncv/model.hpp"

namespace commoncv {

/// Per-group plug-in CVs s_i / xbar_i, in study order.
std::vector<double> group_cvs(const Study& study);

/// Sample-size weighted mean of the group CVs, sum n_i cv_i / n.
double feltz_miller_estimate(const Study& study);

/// n / sum n_i (xbar_i / s_i): the n_i-weighted harmonic mean of the group
/// CVs. Throws DegenerateDenominator when the sum vanishes (mixed signs).
double new_estimate(const Study& study);

/// MLE of eta = 1/phi when the sigmas are known: sum (n_i / sigma_i) xbar_i / n.
double eta_hat(std::span<const SampleSummary> groups, std::span<const double> sigmas);
double eta_hat(const Study& study, std::span<const double> sigmas);

/// Normal log-likelihood under a common CV, evaluated from the sufficient
/// statistics only:
///   sum_i [ -n_i ln sigma_i - ((n_i-1) s_i^2 + n_i (xbar_i - sigma_i/phi)^2) / (2 sigma_i^2) ]
///   - (n/2) ln 2 pi
double log_likelihood(std::span<const SampleSummary> groups, const ParameterVector& theta);
double log_likelihood(const Study& study, const ParameterVector& theta);

struct ScoreHessian {
  Eigen::VectorXd gradient;  // d lnL / d(phi, sigma_1..sigma_k)
  Eigen::MatrixXd hessian;   // symmetric, (k+1) x (k+1)
};

/// Analytic first and second derivatives of log_likelihood with respect to
/// (phi, sigma_1, ..., sigma_k).
ScoreHessian score_and_hessian(std::span<const SampleSummary> groups,
                               const ParameterVector& theta);
ScoreHessian score_and_hessian(const Study& study, const ParameterVector& theta);

/// theta - H^{-1} g. Throws SingularHessian when H is numerically singular.
Eigen::VectorXd newton_update(const Eigen::VectorXd& theta, const Eigen::VectorXd& gradient,
                              const Eigen::MatrixXd& hessian);

/// One undamped Newton step on the log-likelihood in (phi, sigma).
ParameterVector newton_step(const Study& study, const ParameterVector& theta);

/// Starting point (new_estimate, s_1, ..., s_k).
ParameterVector initial_estimate(const Study& study);

struct NewtonOptions {
  int max_iterations = 100;
  // Accepted gradient, times the total sample size, in (eta, s_i/sigma_i)
  // coordinates when the iteration cap is reached before a fixed point.
  double gradient_tolerance = 1e-9;
  int max_halvings = 30;
};

struct MleFit {
  ParameterVector theta;
  int iterations = 0;
  double max_abs_gradient = 0.0;  // in (phi, sigma) coordinates
};

/// Iterated maximum likelihood for (phi, sigma). Newton iterations run in
/// (eta, rho_i) = (1/phi, s_i/sigma_i), where the log-likelihood is strictly
/// concave and depends on the data only through n_i and xbar_i/s_i, with
/// step halving to keep every iterate valid and ascending. Iterates until a
/// full step no longer moves the point. Throws NoConvergence or
/// SingularHessian.
MleFit newton_mle_fit(std::span<const SampleSummary> groups, const ParameterVector& start,
                      const NewtonOptions& options = {});

/// newton_mle_fit started from initial_estimate(study).
ParameterVector newton_mle(const Study& study, const NewtonOptions& options = {});

/// Asymptotic interval phi_hat +/- z_{alpha/2} sqrt((phi_hat^4 + phi_hat^2/2) / n)
/// around the iterated MLE. draws = 0 and no seed.
IntervalResult vj_interval(const Study& study, double level);

}  // namespace commoncv
