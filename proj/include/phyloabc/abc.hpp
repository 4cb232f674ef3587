#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phyloabc/models.hpp"
#include "phyloabc/phylo.hpp"
#include "phyloabc/priors.hpp"

namespace phyloabc {

// Mean and sample variance (n-1 denominator) of the nearest-neighbour
// absolute differences d_i = |v_i - v_nn(i)|, nearest by value with ties
// broken toward the smallest index.  Needs n >= 2.
std::vector<double> nn_summary(const std::vector<double>& values);

// Summary statistics of a dataset.  Default: nn_summary of the response and
// of each predictor, concatenated (2(k+1) values).  joint = nearest
// neighbour in the (k+1)-dimensional trait space instead (2 values).
std::vector<double> summary_stats(const TraitDataset& data, bool joint = false);

// Columnwise robust scales: 1.4826 * MAD.  Columns with zero MAD get scale 1
// and are flagged.
struct ScaleInfo {
  std::vector<double> scale;
  std::vector<bool> degenerate;
  bool any_degenerate() const;
};
ScaleInfo mad_scales(const std::vector<std::vector<double>>& stats);

// Euclidean distance between scaled vectors; infinity if any entry is not
// finite.
double scaled_distance(const std::vector<double>& a, const std::vector<double>& b,
                       const std::vector<double>& scale);

struct PosteriorSample {
  std::vector<std::string> param_names;
  std::vector<std::vector<double>> draws;         // accepted x P
  std::vector<std::vector<double>> adjusted;      // after regression_adjust; else empty
  std::vector<double> distances;                  // ascending, one per accepted draw
  std::vector<std::vector<double>> stats_scaled;  // accepted x S
  std::vector<double> observed_scaled;
  double threshold = 0.0;      // largest accepted distance
  std::size_t n_replicates = 0;
  std::size_t n_failed = 0;
  bool adjustment_fallback = false;  // rank-deficient design; raw draws kept
  std::vector<std::string> warnings;

  // adjusted draws when present, raw otherwise
  const std::vector<std::vector<double>>& posterior() const {
    return adjusted.empty() ? draws : adjusted;
  }
};

// Everything needed to simulate one prior-predictive replicate.
struct AbcContext {
  const PhyloTree* tree = nullptr;
  ModelKind kind = ModelKind::OUBMBM;
  PriorSet priors;
  ModelParams base;  // fixed pieces: y0, roots, interactions, grid size, ...
  bool joint_stats = false;
};

// Parameter draws and summary statistics for n_reps prior-predictive
// replicates.  Replicate i consumes RngStream(seed, stream_offset + i), so
// the result is identical whether or not the loop runs under OpenMP; the
// serial path is the reference implementation for testing.
struct ReplicateTable {
  std::vector<std::vector<double>> params;
  std::vector<std::vector<double>> stats;
  std::vector<char> ok;
  std::size_t n_failed() const;
};
ReplicateTable run_replicates(const AbcContext& ctx, std::size_t n_reps,
                              std::uint64_t seed, std::uint64_t stream_offset,
                              bool parallel);

// Scaled distance of every replicate to the observed stats; failed replicates
// get infinity.
std::vector<double> table_distances(const ReplicateTable& table,
                                    const std::vector<double>& observed_stats,
                                    const std::vector<double>& scale);

// Acceptance step on an existing replicate table (see abc_reject for the
// tolerance / fixed-epsilon semantics).  Lets callers reuse one table under
// different scalings.
PosteriorSample accept_from_table(const std::vector<std::string>& param_names,
                                  const ReplicateTable& table,
                                  const std::vector<double>& observed_stats,
                                  const ScaleInfo& scales, double tolerance,
                                  std::optional<double> fixed_epsilon = std::nullopt);

// Rejection sampler.  `tolerance` is an acceptance-rate quantile in (0,1]:
// the ceil(tolerance * n_reps) smallest distances are accepted, ties broken
// by replicate index.  A fixed distance cutoff can be supplied instead.
// Failed replicates carry infinite distance and are never dropped.
PosteriorSample abc_reject(const AbcContext& ctx,
                           const std::vector<double>& observed_stats,
                           std::size_t n_reps, double tolerance,
                           std::uint64_t seed,
                           std::optional<double> fixed_epsilon = std::nullopt,
                           bool parallel = true);

// Local-linear regression adjustment with Epanechnikov weights on distance,
// plus a heteroscedasticity correction fitted on log absolute residuals.
// Rank-deficient designs fall back to the unadjusted draws with a warning.
void regression_adjust(PosteriorSample& sample, bool het_correction = true);

struct McmcOptions {
  std::size_t chain_length = 50000;
  double delta = 100.0;        // distance threshold on raw summary stats
  std::size_t burn_in = 5000;
  double proposal_frac = 0.1;  // proposal sd = frac * prior sd, reflected at bounds
  std::size_t max_init_tries = 1000;
  std::size_t pilot = 0;       // >0: MAD scales estimated from this many prior sims
};

// Metropolis ABC: accept a proposal iff its distance to the observed stats is
// below delta AND the prior ratio passes a Metropolis draw.  Returns the
// post-burn-in chain (length chain_length - burn_in).
PosteriorSample abc_mcmc(const AbcContext& ctx,
                         const std::vector<double>& observed_stats,
                         const McmcOptions& opt, std::uint64_t seed);

// Type-7 quantile (linear interpolation between order statistics).
double quantile_type7(std::vector<double> values, double p);

struct ParamSummary {
  double mean;
  double sd;
  double q025;
  double q05;
  double q95;
  double q975;
};
ParamSummary summarize_draws(const std::vector<double>& draws);

}  // namespace phyloabc
