#include "phyloabc/modelsel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace phyloabc {

ModelComparison pooled_model_posterior(
    const std::vector<std::string>& model_names,
    const std::vector<std::vector<double>>& distances_per_model, double rate) {
  const std::size_t n_models = model_names.size();
  if (n_models == 0 || distances_per_model.size() != n_models)
    throw std::invalid_argument("pooled_model_posterior: need one distance vector per model");
  if (!(rate > 0.0 && rate <= 1.0))
    throw std::invalid_argument("pooled_model_posterior: rate must be in (0,1]");
  const std::size_t per_model = distances_per_model.front().size();
  if (per_model == 0)
    throw std::invalid_argument("pooled_model_posterior: empty distance vectors");
  for (const auto& d : distances_per_model)
    if (d.size() != per_model)
      throw std::invalid_argument("pooled_model_posterior: unequal replicate counts per model");

  // pool in model-major replicate order; stable sort keeps that order among
  // tied distances, which fixes who gets admitted at the cutoff
  struct Entry {
    double dist;
    std::size_t model;
  };
  std::vector<Entry> pool;
  pool.reserve(n_models * per_model);
  for (std::size_t m = 0; m < n_models; ++m)
    for (double d : distances_per_model[m]) pool.push_back({d, m});
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Entry& a, const Entry& b) { return a.dist < b.dist; });

  const std::size_t total = pool.size();
  const std::size_t target = static_cast<std::size_t>(
      std::min<double>(static_cast<double>(total),
                       std::ceil(rate * static_cast<double>(total))));

  ModelComparison cmp;
  cmp.model_names = model_names;
  cmp.target_count = target;
  cmp.accepted_counts.assign(n_models, 0);
  for (std::size_t r = 0; r < target; ++r) ++cmp.accepted_counts[pool[r].model];
  cmp.cutoff_distance = pool[target - 1].dist;

  cmp.probabilities.resize(n_models);
  for (std::size_t m = 0; m < n_models; ++m)
    cmp.probabilities[m] =
        static_cast<double>(cmp.accepted_counts[m]) / static_cast<double>(target);

  cmp.bayes_factors.assign(n_models, std::vector<double>(n_models, 1.0));
  for (std::size_t i = 0; i < n_models; ++i) {
    for (std::size_t j = 0; j < n_models; ++j) {
      const double ci = static_cast<double>(cmp.accepted_counts[i]);
      const double cj = static_cast<double>(cmp.accepted_counts[j]);
      cmp.bayes_factors[i][j] =
          cj > 0.0 ? ci / cj
                   : (ci > 0.0 ? std::numeric_limits<double>::infinity()
                               : std::numeric_limits<double>::quiet_NaN());
    }
  }
  cmp.ranking = rank_models(cmp.model_names, cmp.accepted_counts, &cmp.ranking_ties);
  return cmp;
}

std::string kass_raftery_label(double k) {
  if (!(k >= 1.0))
    throw std::invalid_argument("kass_raftery_label: K must be >= 1 (invert the comparison)");
  if (k <= 3.0) return "bare mention";
  if (k <= 20.0) return "positive";
  if (k <= 150.0) return "strong";
  return "very strong";
}

std::vector<std::string> rank_models(const std::vector<std::string>& names,
                                     const std::vector<std::size_t>& counts,
                                     bool* had_ties) {
  if (names.size() != counts.size())
    throw std::invalid_argument("rank_models: size mismatch");
  std::vector<std::size_t> idx(names.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return names[a] < names[b];
  });
  if (had_ties) {
    *had_ties = false;
    for (std::size_t r = 1; r < idx.size(); ++r)
      if (counts[idx[r]] == counts[idx[r - 1]]) *had_ties = true;
  }
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(names[i]);
  return out;
}

}  // namespace phyloabc
