#include "phyloabc/stochproc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace phyloabc {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

// (e^{d t} - 1) / d, continuous through d == 0
double expm1_over(double d, double t) {
  if (std::fabs(d) < kRateEqualTol) return t;
  return std::expm1(d * t) / d;
}

double median_of(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
  return 0.5 * (v[mid - 1] + hi);
}

}  // namespace

double bm_transition(double x_parent, double sigma, double t, RngStream& rng) {
  require_finite(x_parent, "bm_transition: x_parent");
  if (sigma < 0.0 || !std::isfinite(sigma))
    throw std::invalid_argument("bm_transition: sigma must be >= 0");
  if (t < 0.0 || !std::isfinite(t))
    throw std::invalid_argument("bm_transition: t must be >= 0");
  if (t == 0.0 || sigma == 0.0) return x_parent;
  return x_parent + sigma * std::sqrt(t) * rng.normal();
}

double ou_transition_mean(double x_parent, double alpha, double theta, double t) {
  const double decay = std::exp(-alpha * t);
  return x_parent * decay + theta * (1.0 - decay);
}

double ou_transition_var(double alpha, double sigma, double t) {
  return sigma * sigma * (-std::expm1(-2.0 * alpha * t)) / (2.0 * alpha);
}

double ou_transition(double x_parent, double alpha, double theta, double sigma,
                     double t, RngStream& rng) {
  require_finite(x_parent, "ou_transition: x_parent");
  require_finite(theta, "ou_transition: theta");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("ou_transition: alpha must be > 0 (route alpha == 0 to bm_transition)");
  if (sigma < 0.0 || !std::isfinite(sigma))
    throw std::invalid_argument("ou_transition: sigma must be >= 0");
  if (t < 0.0 || !std::isfinite(t))
    throw std::invalid_argument("ou_transition: t must be >= 0");
  if (t == 0.0) return x_parent;
  const double mean = ou_transition_mean(x_parent, alpha, theta, t);
  if (sigma == 0.0) return mean;
  return mean + std::sqrt(ou_transition_var(alpha, sigma, t)) * rng.normal();
}

CirParams cir_transition_params(double tau_s, double alpha_tau, double tau_bar,
                                double sigma_tau, double t) {
  // tau_s == 0 is a reachable boundary state when 2 alpha tau_bar < sigma^2;
  // it gives lambda == 0, a central transition
  if (!(tau_s >= 0.0) || !(alpha_tau > 0.0) || !(tau_bar > 0.0) ||
      !(sigma_tau > 0.0) || !(t > 0.0) || !std::isfinite(tau_s) ||
      !std::isfinite(alpha_tau) || !std::isfinite(tau_bar) ||
      !std::isfinite(sigma_tau) || !std::isfinite(t)) {
    throw std::invalid_argument(
        "cir_transition_params: rate must be >= 0 and the process parameters positive");
  }
  const double s2 = sigma_tau * sigma_tau;
  const double one_minus = -std::expm1(-alpha_tau * t);  // 1 - e^{-alpha t}
  CirParams p;
  p.c = s2 * one_minus / (4.0 * alpha_tau);
  p.k = 4.0 * tau_bar * alpha_tau / s2;
  p.lambda = 4.0 * tau_s * alpha_tau * std::exp(-alpha_tau * t) / (s2 * one_minus);
  return p;
}

double sample_noncentral_chisq(double k, double lambda, RngStream& rng) {
  if (!(k > 0.0) || !std::isfinite(k))
    throw std::invalid_argument("sample_noncentral_chisq: k must be > 0");
  if (lambda < 0.0 || !std::isfinite(lambda))
    throw std::invalid_argument("sample_noncentral_chisq: lambda must be >= 0");
  if (lambda == 0.0) return rng.chisq(k);
  if (k >= 1.0) {
    const double z = rng.normal() + std::sqrt(lambda);
    return z * z + rng.chisq(k - 1.0);
  }
  const double j = static_cast<double>(rng.poisson(0.5 * lambda));
  return rng.chisq(k + 2.0 * j);
}

double cir_transition(double tau_s, double alpha_tau, double tau_bar,
                      double sigma_tau, double t, RngStream& rng) {
  if (t == 0.0) return tau_s;
  if (sigma_tau == 0.0) {
    // degenerate deterministic mean reversion
    return tau_bar + (tau_s - tau_bar) * std::exp(-alpha_tau * t);
  }
  const CirParams p = cir_transition_params(tau_s, alpha_tau, tau_bar, sigma_tau, t);
  return p.c * sample_noncentral_chisq(p.k, p.lambda, rng);
}

double bm_theta_integral_var(double alpha, double t) {
  const double u = alpha * t;
  if (u < 1e-3) {
    // series: the three closed-form terms cancel to O(u^2)
    return t * u * u * (1.0 / 3.0 + u * (5.0 / 12.0 + u * (17.0 / 60.0)));
  }
  const double eat = std::exp(u);
  const double e2at = eat * eat;
  return t * e2at - (2.0 / alpha) * (e2at - eat) + (e2at - 1.0) / (2.0 * alpha);
}

double bm_theta_integral(double theta0, double alpha, double sigma_theta,
                         double t, RngStream& rng) {
  require_finite(theta0, "bm_theta_integral: theta0");
  if (!(alpha > 0.0)) throw std::invalid_argument("bm_theta_integral: alpha must be > 0");
  if (sigma_theta < 0.0) throw std::invalid_argument("bm_theta_integral: sigma_theta must be >= 0");
  if (t < 0.0) throw std::invalid_argument("bm_theta_integral: t must be >= 0");
  if (t == 0.0) return 0.0;
  const double mean = theta0 * std::expm1(alpha * t);
  if (sigma_theta == 0.0) return mean;
  return mean + sigma_theta * std::sqrt(bm_theta_integral_var(alpha, t)) * rng.normal();
}

double ouou_theta_noise_var(double alpha_y, double alpha_theta,
                            double sigma_theta, double t,
                            OuOptimumNoiseRule rule) {
  const double s2 = sigma_theta * sigma_theta;
  if (rule == OuOptimumNoiseRule::linearized) {
    const double b = s2 * alpha_y * alpha_y;
    return b * b * t * t * t / 3.0;
  }
  const double d = alpha_y - alpha_theta;
  if (std::fabs(d * t) < 1e-5) {
    // equal-rate limit: s^2 a^2 int_0^t (t-v)^2 e^{2 a v} dv
    const double a = 0.5 * (alpha_y + alpha_theta);
    const double c = 2.0 * a;
    double integral;
    if (c * t < 1e-3) {
      integral = t * t * t * (1.0 / 3.0 + c * t * (1.0 / 12.0 + c * t / 60.0));
    } else {
      integral = -t * t / c - 2.0 * t / (c * c) + 2.0 * std::expm1(c * t) / (c * c * c);
    }
    return s2 * alpha_y * alpha_theta * integral;
  }
  const double big_a = std::exp(d * t);
  const double bracket = big_a * big_a * expm1_over(2.0 * alpha_theta, t) -
                         2.0 * big_a * expm1_over(alpha_y + alpha_theta, t) +
                         expm1_over(2.0 * alpha_y, t);
  const double coef = sigma_theta * alpha_y / d;
  return coef * coef * bracket;
}

double ouou_theta_integral(double theta0, double theta1, double alpha_y,
                           double alpha_theta, double sigma_theta, double t,
                           RngStream& rng, OuOptimumNoiseRule rule) {
  require_finite(theta0, "ouou_theta_integral: theta0");
  require_finite(theta1, "ouou_theta_integral: theta1");
  if (!(alpha_y > 0.0) || !(alpha_theta > 0.0))
    throw std::invalid_argument("ouou_theta_integral: rates must be > 0");
  if (sigma_theta < 0.0)
    throw std::invalid_argument("ouou_theta_integral: sigma_theta must be >= 0");
  if (t < 0.0) throw std::invalid_argument("ouou_theta_integral: t must be >= 0");
  if (t == 0.0) return 0.0;
  const double d = alpha_y - alpha_theta;
  const double pull = alpha_y * expm1_over(d, t);  // alpha_y (e^{d t} - 1)/d
  const double term_a = theta0 * pull;
  const double term_b = theta1 * std::expm1(alpha_y * t) - theta1 * pull;
  double out = term_a + term_b;
  if (sigma_theta > 0.0) {
    out += std::sqrt(ouou_theta_noise_var(alpha_y, alpha_theta, sigma_theta, t, rule)) *
           rng.normal();
  }
  return out;
}

double ito_bm_weighted_integral(double sigma_tau, double alpha_y, double t,
                                int n_steps, RngStream& rng) {
  if (sigma_tau < 0.0) throw std::invalid_argument("ito_bm_weighted_integral: sigma_tau must be >= 0");
  if (!(alpha_y > 0.0)) throw std::invalid_argument("ito_bm_weighted_integral: alpha_y must be > 0");
  if (t < 0.0) throw std::invalid_argument("ito_bm_weighted_integral: t must be >= 0");
  if (n_steps < 1) throw std::invalid_argument("ito_bm_weighted_integral: n_steps must be >= 1");
  if (t == 0.0 || sigma_tau == 0.0) return 0.0;
  const double h = t / n_steps;
  const double sqrt_h = std::sqrt(h);
  double w_tau = 0.0;
  double integral = 0.0;
  std::vector<double> running(static_cast<std::size_t>(n_steps));
  for (int i = 0; i < n_steps; ++i) {
    const double s_i = i * h;
    const double dw_y = sqrt_h * rng.normal();
    integral += sigma_tau * w_tau * std::exp(alpha_y * s_i) * dw_y;
    running[static_cast<std::size_t>(i)] = integral;
    w_tau += sqrt_h * rng.normal();
  }
  return std::exp(-alpha_y * t) * median_of(running);
}

double cir_weighted_ito_integral(double tau0, double alpha_y, double alpha_tau,
                                 double tau_bar, double sigma_tau, double t,
                                 int n_steps, RngStream& rng) {
  // tau0 == 0 is the reachable boundary state of the rate chain
  if (!(tau0 >= 0.0) || !(alpha_y > 0.0) || !(alpha_tau > 0.0) || !(tau_bar > 0.0))
    throw std::invalid_argument(
        "cir_weighted_ito_integral: tau0 must be >= 0, rates and tau_bar > 0");
  if (sigma_tau < 0.0)
    throw std::invalid_argument("cir_weighted_ito_integral: sigma_tau must be >= 0");
  if (t < 0.0) throw std::invalid_argument("cir_weighted_ito_integral: t must be >= 0");
  if (n_steps < 1) throw std::invalid_argument("cir_weighted_ito_integral: n_steps must be >= 1");
  if (t == 0.0) return 0.0;

  // stationary-level part, exact
  const double var_a = tau_bar * tau_bar * expm1_over(2.0 * alpha_y, t);
  double out = std::sqrt(var_a) * rng.normal();

  // reversion-from-tau0 part, exact; vanishes when the rate starts at its mean
  const double diff = tau0 - tau_bar;
  if (diff != 0.0) {
    const double d = alpha_y - alpha_tau;
    const double var_b = (std::fabs(d) < kRateEqualTol)
                             ? diff * diff * t
                             : diff * diff * std::expm1(2.0 * d * t) / (2.0 * d);
    out += std::sqrt(var_b) * rng.normal();
  }

  // fluctuation part: nested grid scheme with exact CIR sub-steps
  if (sigma_tau > 0.0) {
    const double h = t / n_steps;
    const double sqrt_h = std::sqrt(h);
    const std::size_t n = static_cast<std::size_t>(n_steps);
    std::vector<double> tau_path(n + 1);
    tau_path[0] = tau0;
    for (std::size_t i = 0; i < n; ++i)
      tau_path[i + 1] = cir_transition(tau_path[i], alpha_tau, tau_bar, sigma_tau, h, rng);
    // inner prefix sums x_j = sum_{i<j} e^{alpha_tau s_i} sqrt(tau_i) W_i
    std::vector<double> x(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double s_i = static_cast<double>(i) * h;
      x[i + 1] = x[i] + std::exp(alpha_tau * s_i) * std::sqrt(tau_path[i]) * sqrt_h * rng.normal();
    }
    double c_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double s_j = static_cast<double>(j) * h;
      c_sum += std::exp(-alpha_tau * s_j) * x[j] * sqrt_h * rng.normal();
    }
    out += sigma_tau * c_sum;
  }
  return out;
}

double ito_exp_integral_grid(double alpha, double t, int n_steps, RngStream& rng) {
  if (t < 0.0) throw std::invalid_argument("ito_exp_integral_grid: t must be >= 0");
  if (n_steps < 1) throw std::invalid_argument("ito_exp_integral_grid: n_steps must be >= 1");
  if (t == 0.0) return 0.0;
  const double h = t / n_steps;
  const double sqrt_h = std::sqrt(h);
  double out = 0.0;
  for (int i = 0; i < n_steps; ++i)
    out += std::exp(alpha * (i * h)) * sqrt_h * rng.normal();
  return out;
}

double ito_exp_integral_var(double alpha, double t) {
  return expm1_over(2.0 * alpha, t);
}

}  // namespace phyloabc
