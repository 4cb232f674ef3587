#pragma once

#include "phyloabc/rng.hpp"

namespace phyloabc {

// Tolerance below which mean-reversion rate differences are treated as equal
// and the analytic limit expressions are used.
inline constexpr double kRateEqualTol = 1e-10;

// --- Markov transition laws along a branch -------------------------------

// Brownian motion: child ~ Normal(parent, sigma^2 t).  t == 0 or sigma == 0
// is the identity map and consumes no randomness.
double bm_transition(double x_parent, double sigma, double t, RngStream& rng);

// Ornstein-Uhlenbeck pulled toward theta.  alpha must be > 0; callers route
// alpha == 0 to bm_transition.
double ou_transition(double x_parent, double alpha, double theta, double sigma,
                     double t, RngStream& rng);
double ou_transition_mean(double x_parent, double alpha, double theta, double t);
double ou_transition_var(double alpha, double sigma, double t);

// Cox-Ingersoll-Ross rate process.  The exact transition is a scaled
// noncentral chi-squared law: tau_t | tau_s = c * chisq(k, lambda).
struct CirParams {
  double c;
  double k;
  double lambda;
};
CirParams cir_transition_params(double tau_s, double alpha_tau, double tau_bar,
                                double sigma_tau, double t);
double cir_transition(double tau_s, double alpha_tau, double tau_bar,
                      double sigma_tau, double t, RngStream& rng);

// Exact draw from chisq(k, lambda), k > 0, lambda >= 0.  Uses the
// (Z + sqrt(lambda))^2 + chisq(k-1) decomposition for k >= 1 and the Poisson
// mixture chisq(k + 2J), J ~ Poisson(lambda/2), for k < 1.  Never a
// discretized diffusion step.
double sample_noncentral_chisq(double k, double lambda, RngStream& rng);

// --- Branch-integral samplers for the randomly moving optimum / rate ------

// One draw of int_0^t alpha e^{alpha s} theta_s ds where theta is a Brownian
// optimum started at theta0 with diffusion sigma_theta.  Exactly Gaussian:
// mean theta0 (e^{alpha t} - 1), variance sigma_theta^2 *
// bm_theta_integral_var(alpha, t).  Caller applies the e^{-alpha t} prefactor.
double bm_theta_integral(double theta0, double alpha, double sigma_theta,
                         double t, RngStream& rng);
double bm_theta_integral_var(double alpha, double t);

// Variance rule for the noise part of the OU-optimum integral.  `linearized`
// is the small-time rule (sigma^2 a^2 t)^3 / (3 sigma^2 a^2); `exact` is the
// closed form of the nested Gaussian integral.
enum class OuOptimumNoiseRule { linearized, exact };

// One draw of int_0^t alpha_y e^{alpha_y s} theta_s ds where theta is an OU
// optimum started at theta0, attracted to theta1 with rate alpha_theta and
// noise sigma_theta.  Returns drift terms plus a Gaussian noise draw; caller
// applies the e^{-alpha_y t} prefactor.
double ouou_theta_integral(double theta0, double theta1, double alpha_y,
                           double alpha_theta, double sigma_theta, double t,
                           RngStream& rng,
                           OuOptimumNoiseRule rule = OuOptimumNoiseRule::linearized);
double ouou_theta_noise_var(double alpha_y, double alpha_theta,
                            double sigma_theta, double t,
                            OuOptimumNoiseRule rule);

// One draw of e^{-alpha_y t} int_0^t tau_s e^{alpha_y s} dW_s with tau a
// Brownian rate re-anchored at zero on the branch (tau_s = sigma_tau W_s).
// Euler grid with n_steps subintervals; the returned value is the median of
// the running-integral trajectory, times the prefactor.
double ito_bm_weighted_integral(double sigma_tau, double alpha_y, double t,
                                int n_steps, RngStream& rng);

// One draw of int_0^t tau_s e^{alpha_y s} dW_s with tau a CIR rate started at
// tau0.  Sum of an exact Gaussian stationary part, an exact Gaussian
// reversion part, and a nested grid scheme whose CIR values use exact
// noncentral chi-squared sub-steps.  Caller applies the e^{-alpha_y t}
// prefactor.
double cir_weighted_ito_integral(double tau0, double alpha_y, double alpha_tau,
                                 double tau_bar, double sigma_tau, double t,
                                 int n_steps, RngStream& rng);

// One Euler draw of int_0^t e^{alpha s} dW_s on a uniform grid, and its exact
// variance (e^{2 alpha t} - 1) / (2 alpha).
double ito_exp_integral_grid(double alpha, double t, int n_steps,
                             RngStream& rng);
double ito_exp_integral_var(double alpha, double t);

}  // namespace phyloabc
