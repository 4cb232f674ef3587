#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "phyloabc/models.hpp"
#include "phyloabc/rng.hpp"

namespace phyloabc {

// One-dimensional prior.  Parsed from / serialized to compact text such as
// "uniform(0,0.3)", "exponential(5)" (rate), "normal(0,1)", "chisq(30)".
struct Prior {
  enum class Kind { Uniform, Exponential, Normal, ChiSquared };

  Kind kind = Kind::Uniform;
  double a = 0.0;  // uniform lo | exponential rate | normal mean | chisq df
  double b = 1.0;  // uniform hi | normal sd

  double sample(RngStream& rng) const;
  double log_pdf(double x) const;  // -inf outside the support
  double mean() const;
  double sd() const;
  double support_lo() const;
  double support_hi() const;

  std::string text() const;
  static Prior parse(const std::string& text);

  static Prior uniform(double lo, double hi);
  static Prior exponential(double rate);
  static Prior normal(double mean, double sd);
  static Prior chisq(double df);
};

// Ordered (parameter name, prior) pairs; order defines the ABC parameter
// vector layout for a model.
struct PriorSet {
  std::vector<std::string> names;
  std::vector<Prior> priors;

  std::size_t size() const { return names.size(); }
  std::vector<double> sample(RngStream& rng) const;
  double log_pdf(const std::vector<double>& theta) const;
  int index_of(const std::string& name) const;  // -1 if absent
  void set(const std::string& name, const Prior& prior);
};

// Free parameters of a model, in table order: alpha_y, [alpha_x, theta_x],
// sigma_x, then tau or (alpha_tau, theta_tau, sigma_tau), then b0, b1..bk.
std::vector<std::string> model_param_names(ModelKind kind, std::size_t n_predictors);

// Applies a drawn parameter vector onto `base` (which supplies everything not
// inferred: y0, roots, interaction coefficients, grid size, ...).
ModelParams params_from_vector(ModelKind kind, const std::vector<double>& theta,
                               const ModelParams& base);

// Reference prior sets used by the simulation study: flat uniform and the
// informative exponential/chi-squared alternative, both centered on the
// study's true values.
PriorSet study_uniform_priors(ModelKind kind, std::size_t n_predictors);
PriorSet study_informative_priors(ModelKind kind, std::size_t n_predictors);

// Ordinary least squares of y on [1, x1..xk]; used to seed regression
// coefficient priors for empirical data.
struct OlsFit {
  std::vector<double> coef;  // b0, b1..bk
  std::vector<double> se;    // standard errors, same layout
};
OlsFit ols_fit(const TraitDataset& data);

// Uniform prior centered at an OLS coefficient: center +- 3 se, falling back
// to +- max(1, |coef|) when the standard error is degenerate.  index 0 is the
// intercept.
Prior ols_coefficient_prior(const OlsFit& ols, std::size_t index);

// Empirical-data set: exponential rates for the positive parameters, standard
// normal for theta_x, chisq(30) for the rate level, and uniform b ranges
// derived from the OLS fit.
PriorSet empirical_priors(ModelKind kind, std::size_t n_predictors, const OlsFit& ols);

// Study true values (parameter name -> value), matching model_param_names.
std::vector<double> study_true_values(ModelKind kind, std::size_t n_predictors);

}  // namespace phyloabc
