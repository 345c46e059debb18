#include "support.hpp"

#include <numbers>
#include <random>
#include <vector>

#include "commoncv/datasets.hpp"
#include "commoncv/estimators.hpp"
#include "commoncv/normal.hpp"

using namespace commoncv;
using testing::error_code_of;
using testing::round_to;

namespace {

Study study_from_cvs(const std::vector<std::int64_t>& ns, const std::vector<double>& cvs) {
  std::vector<GroupMoments> g;
  for (std::size_t i = 0; i < ns.size(); ++i) g.push_back({ns[i], 1.0, cvs[i], ""});
  return validate_study(g);
}

// Profile log-likelihood in phi: for fixed eta every tau_i = 1/sigma_i solves
// Q tau^2 - n xbar eta tau - n = 0 (positive root).
double profile_log_likelihood(std::span<const SampleSummary> groups, double phi) {
  const double eta = 1.0 / phi;
  double ll = 0.0;
  double n_total = 0.0;
  for (const auto& g : groups) {
    const double n = static_cast<double>(g.n());
    const double q = (n - 1.0) * g.variance() + n * g.mean() * g.mean();
    const double b = n * g.mean() * eta;
    const double tau = (b + std::sqrt(b * b + 4.0 * q * n)) / (2.0 * q);
    ll += n * std::log(tau) - q * tau * tau / 2.0 + b * tau - n * eta * eta / 2.0;
    n_total += n;
  }
  return ll - n_total / 2.0 * std::log(2.0 * std::numbers::pi);
}

double grid_search_phi(std::span<const SampleSummary> groups, double lo, double hi) {
  double best = lo, best_ll = -HUGE_VAL;
  for (int pass = 0; pass < 4; ++pass) {
    const double step = (hi - lo) / 2000.0;
    for (int i = 0; i <= 2000; ++i) {
      const double phi = lo + step * i;
      const double ll = profile_log_likelihood(groups, phi);
      if (ll > best_ll) best_ll = ll, best = phi;
    }
    lo = best - 2 * step;
    hi = best + 2 * step;
  }
  return best;
}

double max_rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max(std::abs(b(i)), 1e-3 * b.cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(a(i) - b(i)) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("group CVs") {
  const auto cv2 = group_cvs(datasets::hospitals());
  const double table[] = {0.4937, 1.1224, 0.5853, 0.6100};
  for (int i = 0; i < 4; ++i) CHECK(round_to(cv2[i], 4) == doctest::Approx(table[i]));

  // plug-in values, not the rounded 0.0406 / 0.0346
  const auto cv1 = group_cvs(datasets::mcv_surveys());
  CHECK(cv1[0] == doctest::Approx(3.390 / 84.13).epsilon(1e-15));
  CHECK(round_to(cv1[0], 4) == doctest::Approx(0.0403));
  CHECK(round_to(cv1[1], 4) == doctest::Approx(0.0344));
}

TEST_CASE("sample-size weighted mean of CVs") {
  CHECK(round_to(feltz_miller_estimate(datasets::hospitals()), 4) == doctest::Approx(0.6734));
  const double full = (63 * 3.390 / 84.13 + 72 * 2.946 / 85.68) / 135;
  CHECK(feltz_miller_estimate(datasets::mcv_surveys()) == doctest::Approx(full).epsilon(1e-14));
  CHECK(round_to(feltz_miller_estimate(study_from_cvs({63, 72}, {0.0406, 0.0346})), 4) ==
        doctest::Approx(0.0374));
  CHECK(feltz_miller_estimate(study_from_cvs({4, 9, 30}, {0.2, 0.2, 0.2})) ==
        doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("new estimate") {
  CHECK(round_to(new_estimate(datasets::hospitals()), 4) == doctest::Approx(0.6248));
  CHECK(new_estimate(datasets::mcv_surveys()) ==
        doctest::Approx(135.0 / (63 * 84.13 / 3.390 + 72 * 85.68 / 2.946)).epsilon(1e-14));
  CHECK(round_to(new_estimate(datasets::mcv_surveys()), 4) == doctest::Approx(0.0369));
  CHECK(round_to(new_estimate(study_from_cvs({63, 72}, {0.0406, 0.0346})), 4) ==
        doctest::Approx(0.0372));
  CHECK(new_estimate(study_from_cvs({4, 9, 30}, {0.3, 0.3, 0.3})) == doctest::Approx(0.3).epsilon(1e-15));

  const GroupMoments cancel[] = {{2, 1.0, 1.0, ""}, {2, -1.0, 1.0, ""}};
  CHECK(error_code_of([&] { new_estimate(validate_study(cancel)); }) ==
        ErrorCode::DegenerateDenominator);
}

TEST_CASE("harmonic mean below arithmetic mean") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> cv(0.01, 2.0);
  std::uniform_int_distribution<int> n(2, 40);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = study_from_cvs({n(rng), n(rng), n(rng), n(rng)}, {cv(rng), cv(rng), cv(rng), cv(rng)});
    const auto cvs = group_cvs(s);
    const double lo = *std::min_element(cvs.begin(), cvs.end());
    const double hi = *std::max_element(cvs.begin(), cvs.end());
    const double nw = new_estimate(s), fm = feltz_miller_estimate(s);
    CHECK(lo <= nw * (1 + 1e-14));
    CHECK(nw <= fm * (1 + 1e-14));
    CHECK(fm <= hi * (1 + 1e-14));
  }
}

TEST_CASE("eta_hat") {
  const auto one = SampleSummary::from_moments(7, 3.0, 1.5);
  const SampleSummary single[] = {one};
  const double sigma[] = {1.5};
  CHECK(eta_hat(single, sigma) == doctest::Approx(2.0).epsilon(1e-15));

  const auto h = datasets::hospitals();
  std::vector<double> sds, doubled_sds;
  for (const auto& g : h.groups()) sds.push_back(g.sd()), doubled_sds.push_back(2 * g.sd());
  CHECK(eta_hat(h, sds) == doctest::Approx(1.0 / new_estimate(h)).epsilon(1e-14));
  CHECK(eta_hat(h, sds) == doctest::Approx(1.6004).epsilon(1e-4));
  CHECK(eta_hat(h.scaled(2.0), doubled_sds) == doctest::Approx(eta_hat(h, sds)).epsilon(1e-15));
}

TEST_CASE("log-likelihood by hand and under rescaling") {
  // n = 2, s = 1, xbar - sigma/phi = 1
  const auto g = SampleSummary::from_moments(2, 2.0, 1.0);
  const SampleSummary single[] = {g};
  CHECK(log_likelihood(single, ParameterVector(1.0, {1.0})) ==
        doctest::Approx(-1.5 - std::log(2 * std::numbers::pi)).epsilon(1e-14));

  const auto h = datasets::hospitals();
  const ParameterVector theta(0.55, {80.0, 60.0, 30.0, 100.0});
  const double c = 3.7;
  const ParameterVector scaled(0.55, {c * 80.0, c * 60.0, c * 30.0, c * 100.0});
  CHECK(log_likelihood(h.scaled(c), scaled) ==
        doctest::Approx(log_likelihood(h, theta) - 22 * std::log(c)).epsilon(1e-12));
}

TEST_CASE("score and Hessian agree with finite differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  const auto h = datasets::hospitals();
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> sig;
    for (const auto& g : h.groups()) sig.push_back(g.sd() * u(rng));
    const ParameterVector theta(0.6 * u(rng), sig);
    const auto sh = score_and_hessian(h, theta);
    const Eigen::Index p = sh.gradient.size();

    auto param = [&](const Eigen::VectorXd& v) {
      return ParameterVector(v(0), std::vector<double>(v.data() + 1, v.data() + p));
    };
    Eigen::VectorXd t(p);
    t(0) = theta.phi();
    for (Eigen::Index j = 1; j < p; ++j) t(j) = theta.sigma(j - 1);

    Eigen::VectorXd fd_grad(p);
    Eigen::MatrixXd fd_hess(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double step = 1e-5 * std::abs(t(j)) + 1e-8;
      Eigen::VectorXd up = t, down = t;
      up(j) += step;
      down(j) -= step;
      fd_grad(j) = (log_likelihood(h, param(up)) - log_likelihood(h, param(down))) / (2 * step);
      fd_hess.col(j) =
          (score_and_hessian(h, param(up)).gradient - score_and_hessian(h, param(down)).gradient) /
          (2 * step);
    }
    CAPTURE(trial);
    CHECK(max_rel_error(sh.gradient, fd_grad) < 1e-6);
    CHECK(max_rel_error(sh.hessian, fd_hess) < 1e-4);
    CHECK((sh.hessian - sh.hessian.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("Newton update") {
  // Exactly quadratic objective -(t - a)' A (t - a) / 2: one step reaches a.
  Eigen::MatrixXd a(3, 3);
  a << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const Eigen::VectorXd opt = Eigen::Vector3d(0.3, -2.0, 5.0);
  const Eigen::VectorXd t = Eigen::Vector3d(1.0, 1.0, 1.0);
  const Eigen::VectorXd next = newton_update(t, -a * (t - opt), -a);
  CHECK((next - opt).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(3, 3);
  singular(0, 0) = 1.0;
  CHECK(error_code_of([&] { newton_update(t, t, singular); }) == ErrorCode::SingularHessian);
}

TEST_CASE("iterated MLE") {
  const auto h = datasets::hospitals();
  const auto fit = newton_mle_fit(h.groups(), initial_estimate(h));
  CHECK(fit.max_abs_gradient < 1e-8 * 22);
  CHECK(round_to(fit.theta.phi(), 4) == doctest::Approx(0.6015).epsilon(5e-4 / 0.6015));
  CHECK(std::abs(fit.theta.phi() - grid_search_phi(h.groups(), 0.3, 1.2)) < 2e-6);

  const auto s = datasets::mcv_surveys();
  const double phi1 = newton_mle(s).phi();
  CHECK(std::abs(phi1 - 0.0369) <= 1e-4);
  CHECK(std::abs(phi1 - grid_search_phi(s.groups(), 0.02, 0.06)) < 1e-7);

  // a stationary point is a fixed point of the Newton step
  const auto again = newton_step(h, fit.theta);
  CHECK(std::abs(again.phi() - fit.theta.phi()) < 1e-10);
  for (std::size_t i = 0; i < h.k(); ++i) {
    CHECK(std::abs(again.sigma(i) - fit.theta.sigma(i)) < 1e-10 * fit.theta.sigma(i));
  }
}

TEST_CASE("single-group MLE matches the profile grid search") {
  const SampleSummary one[] = {SampleSummary::from_moments(8, 10.0, 3.0)};
  const auto fit = newton_mle_fit(one, ParameterVector(0.3, {3.0}));
  CHECK(std::abs(fit.theta.phi() - grid_search_phi(one, 0.1, 0.6)) < 1e-6);
  CHECK(fit.max_abs_gradient < 1e-8 * 8);
}

TEST_CASE("asymptotic interval around the MLE") {
  const auto h = datasets::hospitals();
  const auto r = vj_interval(h, 0.95);
  const double phi = newton_mle(h).phi();
  const double half = normal_quantile(0.975) * std::sqrt((std::pow(phi, 4) + phi * phi / 2) / 22);
  CHECK(r.lower == doctest::Approx(phi - half).epsilon(1e-14));
  CHECK(r.upper == doctest::Approx(phi + half).epsilon(1e-14));
  CHECK(r.length == r.upper - r.lower);
  CHECK(r.draws == 0);
  CHECK_FALSE(r.seed.has_value());

  const auto tiny = vj_interval(h, 1e-9);
  CHECK(tiny.length < 1e-8);
  CHECK(tiny.lower < phi);
  CHECK(tiny.upper > phi);
  CHECK(error_code_of([&] { vj_interval(h, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("estimators are scale invariant") {
  for (const auto& s : {datasets::hospitals(), datasets::mcv_surveys()}) {
    for (double c : {0.01, 3.0, 4.0, 1e5}) {
      const auto t = s.scaled(c);
      const auto a = group_cvs(s), b = group_cvs(t);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-15));
      CHECK(feltz_miller_estimate(t) == doctest::Approx(feltz_miller_estimate(s)).epsilon(1e-14));
      CHECK(new_estimate(t) == doctest::Approx(new_estimate(s)).epsilon(1e-14));
      CHECK(newton_mle(t).phi() == doctest::Approx(newton_mle(s).phi()).epsilon(1e-10));
      const auto vs = vj_interval(s, 0.95), vt = vj_interval(t, 0.95);
      CHECK(vt.lower == doctest::Approx(vs.lower).epsilon(1e-10));
      CHECK(vt.upper == doctest::Approx(vs.upper).epsilon(1e-10));
    }
  }
}
