#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace phyloabc {

struct ModelComparison {
  std::vector<std::string> model_names;
  std::vector<std::size_t> accepted_counts;
  std::vector<double> probabilities;               // counts / target
  std::vector<std::vector<double>> bayes_factors;  // [i][j] = count_i / count_j
  double cutoff_distance = 0.0;
  std::size_t target_count = 0;
  std::vector<std::string> ranking;  // count desc, ties alphabetical
  bool ranking_ties = false;
};

// Pools every model's replicate distances (equal counts required), accepts
// the ceil(rate * total) smallest with ties at the cutoff admitted in pool
// order, and converts per-model acceptance counts into posterior model
// probabilities and pairwise Bayes factors.  A zero-count model yields
// infinite Bayes factors against it.
ModelComparison pooled_model_posterior(
    const std::vector<std::string>& model_names,
    const std::vector<std::vector<double>>& distances_per_model, double rate);

// Evidence strength bands for a Bayes factor K >= 1; boundary values fall in
// the lower band.
std::string kass_raftery_label(double k);

// Model names ordered by accepted count (descending), ties alphabetical.
std::vector<std::string> rank_models(const std::vector<std::string>& names,
                                     const std::vector<std::size_t>& counts,
                                     bool* had_ties = nullptr);

}  // namespace phyloabc
