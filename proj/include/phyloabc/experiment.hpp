#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phyloabc/abc.hpp"
#include "phyloabc/modelsel.hpp"
#include "phyloabc/models.hpp"
#include "phyloabc/phylo.hpp"
#include "phyloabc/priors.hpp"

namespace phyloabc {

// Pure-birth tree: equal-rate random splits, ultrametric, scaled to height 1.
// Tips are labelled t1..tn in left-to-right order.
PhyloTree generate_yule_tree(std::size_t n_tips, RngStream& rng);

enum class PriorFamily { study_uniform, study_informative, empirical };
std::string to_string(PriorFamily family);
PriorFamily prior_family_from_string(const std::string& text);

struct ExperimentConfig {
  std::vector<ModelKind> models{ModelKind::OUBMBM, ModelKind::OUOUBM,
                                ModelKind::OUBMCIR, ModelKind::OUOUCIR};
  std::vector<std::size_t> taxa_sizes{10, 20};
  std::size_t n_reps = 5000;
  double tolerance = 0.10;
  std::uint64_t seed = 1;
  int n_steps = 100;
  std::size_t n_predictors = 2;
  bool adjust = false;
  bool joint_stats = false;
  PriorFamily prior_family = PriorFamily::study_uniform;
  bool parallel = true;
  bool full = false;  // full-scale protocol: 50000 reps, sizes 10/20/50/100
  std::optional<double> fixed_epsilon;
  OuOptimumNoiseRule optimum_noise_rule = OuOptimumNoiseRule::linearized;
  bool interaction_own_variance = false;
  double predictor_rho = 0.0;
  double y0 = 0.0;
  std::vector<double> b_pair;  // fixed interaction coefficients, not inferred
  std::optional<std::string> tree_newick;  // sim-study tree override
  std::vector<std::pair<std::string, double>> truth_overrides;
  std::vector<std::pair<std::string, std::string>> prior_overrides;
  McmcOptions mcmc;

  void apply_full_scale();  // --full: bumps reps and taxa sizes
  // canonical sorted key=value serialization; hashed into output headers
  std::string canonical_text() const;
};

ModelParams base_params_from_config(const ExperimentConfig& cfg, ModelKind kind);

// Study prior families only; throws if the config asks for empirical priors
// (those need observed data, see data_priors_from_config).
PriorSet priors_from_config(const ExperimentConfig& cfg, ModelKind kind);

// Prior set for runs against observed data with k predictors; the OLS fit
// feeds the empirical regression-coefficient ranges.
PriorSet data_priors_from_config(const ExperimentConfig& cfg, ModelKind kind,
                                 std::size_t n_predictors, const OlsFit& ols);

std::vector<double> truth_from_config(const ExperimentConfig& cfg, ModelKind kind);

struct StudyCell {
  ModelKind model;
  std::size_t n_taxa = 0;
  std::vector<std::string> param_names;
  std::vector<double> truth;
  std::vector<ParamSummary> summaries;  // per parameter, over posterior draws
  std::size_t n_accepted = 0;
  std::size_t n_failed = 0;
  std::vector<std::string> warnings;
};

struct StudyResult {
  std::vector<StudyCell> cells;
  std::size_t total_replicates = 0;
};

// One observed dataset per (model, taxa size) from the true parameters, then
// rejection ABC against it; summaries in the layout of the study tables
// (bias, sd, 5% and 95% quantiles per parameter and taxa size).
StudyResult run_sim_study(const ExperimentConfig& cfg);

struct ModelSelectResult {
  std::vector<std::string> model_names;
  ModelComparison comparison;
  std::vector<PosteriorSample> per_model;  // estimates at the tolerance, own scaling
  OlsFit ols;
  std::vector<std::string> warnings;
};

// Candidate-model comparison on observed data: shared replicate tables,
// pooled MAD scaling for the pooled-acceptance comparison, per-model scaling
// for the parameter estimates.
ModelSelectResult run_model_select(const PhyloTree& tree, const TraitDataset& data,
                                   const ExperimentConfig& cfg);

}  // namespace phyloabc
