#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "phyloabc/phylo.hpp"
#include "phyloabc/rng.hpp"
#include "phyloabc/stochproc.hpp"

namespace phyloabc {

// Response trait follows an OU pull toward an optimum driven by regression on
// predictor traits.  The middle token names the predictor law (BM or OU), the
// last token names the response rate law (constant, BM, or CIR).
enum class ModelKind { OUBM, OUOU, OUBMBM, OUOUBM, OUBMCIR, OUOUCIR };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);
const std::vector<ModelKind>& all_model_kinds();

bool has_ou_predictors(ModelKind kind);  // OUOU, OUOUBM, OUOUCIR
bool has_bm_rate(ModelKind kind);        // OUBMBM, OUOUBM
bool has_cir_rate(ModelKind kind);       // OUBMCIR, OUOUCIR
bool has_constant_rate(ModelKind kind);  // OUBM, OUOU

// Optimum = b0 + sum_i b_i x_i + sum_{i<j} b_ij x_i x_j, each unordered pair
// counted once.
struct RegressionParams {
  double b0 = 0.0;
  std::vector<double> b;       // one per predictor
  std::vector<double> b_pair;  // upper triangle (i<j) row-major; empty means all zero

  double pair_coef(std::size_t i, std::size_t j) const;
  static std::size_t pair_count(std::size_t k) { return k * (k - 1) / 2; }
};

double compute_optimum(const RegressionParams& reg, const std::vector<double>& x);

enum class PredictorKind { BM, OU };

struct PredictorOuParams {
  double alpha_x;
  double theta_x;
  double x0;
};

// Expected optimum-noise variance at time t obtained by propagating the
// regression through the predictor law: E[sigma_theta^2] = sum_i b_i^2 s_i^2
// + sum_i s_i^2 sum_{j != i} b_ij^2 E[x_j^2] (+ cross term under OU, where
// E[x_j] is nonzero).  `interaction_own_variance` switches the BM interaction
// term to use the i-indexed predictor variance instead of the partner's.
double expected_sigma_theta_sq(const RegressionParams& reg,
                               const std::vector<double>& sigma_x, double t,
                               PredictorKind kind,
                               const PredictorOuParams* ou = nullptr,
                               bool interaction_own_variance = false);

struct ModelParams {
  ModelKind kind = ModelKind::OUBMBM;
  std::size_t n_predictors = 2;

  double alpha_y = 0.15;
  double y0 = 0.0;

  // predictor law (sigma_x shared across predictors)
  double sigma_x = 1.0;
  double alpha_x = 0.1;   // OU predictors only
  double theta_x = 0.0;   // OU predictors only
  std::optional<double> x_root;  // default: theta_x under OU, 0 under BM

  // response rate law
  double tau = 0.35;        // constant rate (OUBM/OUOU) or BM rate diffusion (..BM)
  double alpha_tau = 0.2;   // CIR models
  double tau_bar = 30.0;    // CIR stationary level; also the default rate at the root
  double sigma_tau = 0.5;   // CIR models
  std::optional<double> tau_root;

  RegressionParams reg;
  double predictor_rho = 0.0;  // common pairwise correlation of predictor innovations

  int n_steps = 100;  // grid size for branch integrals
  OuOptimumNoiseRule optimum_noise_rule = OuOptimumNoiseRule::linearized;
  bool interaction_own_variance = false;

  double x_root_value() const;
  double tau_root_value() const { return tau_root.value_or(tau_bar); }
};

struct TraitDataset {
  std::vector<std::string> species;       // one per tip, in tree tip order
  std::vector<double> y;                  // response
  std::vector<std::vector<double>> x;     // x[j][i]: predictor j, tip i

  std::size_t n_taxa() const { return y.size(); }
  std::size_t n_predictors() const { return x.size(); }
};

// Predictor values at every node (preorder-consistent ids): out[j][node].
std::vector<std::vector<double>> simulate_predictors(const PhyloTree& tree,
                                                     const ModelParams& params,
                                                     RngStream& rng);

// Response values at every node given per-node optima (theta[node]).
std::vector<double> simulate_response(const PhyloTree& tree, const ModelParams& params,
                                      const std::vector<double>& optimum,
                                      RngStream& rng);

TraitDataset simulate_tips(const PhyloTree& tree, const ModelParams& params,
                           RngStream& rng);

}  // namespace phyloabc
