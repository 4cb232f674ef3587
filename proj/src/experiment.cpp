#include "phyloabc/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace phyloabc {

namespace {

// Seed tags are part of the reproducibility contract: changing them changes
// every published run.
constexpr std::uint64_t kTreeTag = 0x1000000;
constexpr std::uint64_t kObservedTag = 0x2000000;
constexpr std::uint64_t kCellTag = 0x3000000;
constexpr std::uint64_t kSelectTag = 0x4000000;

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += num(v[i]);
  }
  return s;
}

void apply_prior_overrides(const ExperimentConfig& cfg, PriorSet& priors) {
  for (const auto& [name, text] : cfg.prior_overrides) {
    if (priors.index_of(name) < 0) continue;  // not a parameter of this model
    priors.set(name, Prior::parse(text));
  }
}

std::vector<ParamSummary> column_summaries(const std::vector<std::vector<double>>& rows,
                                           std::size_t n_cols) {
  std::vector<ParamSummary> out;
  out.reserve(n_cols);
  std::vector<double> col(rows.size());
  for (std::size_t p = 0; p < n_cols; ++p) {
    for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i][p];
    out.push_back(summarize_draws(col));
  }
  return out;
}

}  // namespace

std::string to_string(PriorFamily family) {
  switch (family) {
    case PriorFamily::study_uniform: return "uniform";
    case PriorFamily::study_informative: return "informative";
    case PriorFamily::empirical: return "empirical";
  }
  throw std::logic_error("unknown prior family");
}

PriorFamily prior_family_from_string(const std::string& text) {
  if (text == "uniform") return PriorFamily::study_uniform;
  if (text == "informative") return PriorFamily::study_informative;
  if (text == "empirical") return PriorFamily::empirical;
  throw std::invalid_argument("unknown prior family: " + text +
                              " (expected uniform, informative or empirical)");
}

PhyloTree generate_yule_tree(std::size_t n_tips, RngStream& rng) {
  if (n_tips < 2)
    throw std::invalid_argument("generate_yule_tree: need at least 2 tips");

  std::vector<int> parents{-1};
  std::vector<double> lengths{0.0};
  std::vector<int> active;
  auto add_child = [&](int p) {
    parents.push_back(p);
    lengths.push_back(0.0);
    return static_cast<int>(parents.size()) - 1;
  };
  active.push_back(add_child(0));
  active.push_back(add_child(0));

  // equal-rate splits; every segment stretches all live lineages by the same
  // exponential wait, so the tree is ultrametric
  while (true) {
    const double wait =
        -std::log(rng.uniform()) / static_cast<double>(active.size());
    for (int id : active) lengths[static_cast<std::size_t>(id)] += wait;
    if (active.size() == n_tips) break;
    std::size_t pick = static_cast<std::size_t>(
        rng.uniform() * static_cast<double>(active.size()));
    if (pick >= active.size()) pick = active.size() - 1;
    const int node = active[pick];
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(pick));
    active.push_back(add_child(node));
    active.push_back(add_child(node));
  }

  std::vector<std::vector<int>> kids(parents.size());
  for (std::size_t i = 1; i < parents.size(); ++i)
    kids[static_cast<std::size_t>(parents[i])].push_back(static_cast<int>(i));

  // children were appended after their parent, so index order is preorder-safe
  std::vector<double> depth(parents.size(), 0.0);
  double height = 0.0;
  for (std::size_t i = 1; i < parents.size(); ++i) {
    depth[i] = depth[static_cast<std::size_t>(parents[i])] + lengths[i];
    height = std::max(height, depth[i]);
  }
  for (auto& len : lengths) len /= height;

  std::vector<std::string> labels(parents.size());
  std::size_t tip_no = 0;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const auto& ch = kids[static_cast<std::size_t>(id)];
    if (ch.empty())
      labels[static_cast<std::size_t>(id)] = "t" + std::to_string(++tip_no);
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }

  return PhyloTree::build(std::move(labels), std::move(parents), std::move(lengths));
}

void ExperimentConfig::apply_full_scale() {
  n_reps = 50000;
  taxa_sizes = {10, 20, 50, 100};
}

std::string ExperimentConfig::canonical_text() const {
  std::map<std::string, std::string> kv;
  std::string model_list;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (i) model_list += ',';
    model_list += to_string(models[i]);
  }
  kv["models"] = model_list;
  kv["taxa_sizes"] = join_sizes(taxa_sizes);
  kv["n_reps"] = std::to_string(n_reps);
  kv["tolerance"] = num(tolerance);
  kv["seed"] = std::to_string(seed);
  kv["n_steps"] = std::to_string(n_steps);
  kv["n_predictors"] = std::to_string(n_predictors);
  kv["adjust"] = adjust ? "1" : "0";
  kv["joint_stats"] = joint_stats ? "1" : "0";
  kv["prior_family"] = to_string(prior_family);
  kv["full"] = full ? "1" : "0";
  kv["epsilon"] = fixed_epsilon ? num(*fixed_epsilon) : "-";
  kv["optimum_noise_rule"] =
      optimum_noise_rule == OuOptimumNoiseRule::exact ? "exact" : "linearized";
  kv["interaction_own_variance"] = interaction_own_variance ? "1" : "0";
  kv["predictor_rho"] = num(predictor_rho);
  kv["y0"] = num(y0);
  kv["b_pair"] = b_pair.empty() ? "-" : join_doubles(b_pair);
  kv["tree"] = tree_newick ? *tree_newick : "-";
  kv["mcmc_chain_length"] = std::to_string(mcmc.chain_length);
  kv["mcmc_delta"] = num(mcmc.delta);
  kv["mcmc_burn_in"] = std::to_string(mcmc.burn_in);
  kv["mcmc_proposal_frac"] = num(mcmc.proposal_frac);
  kv["mcmc_pilot"] = std::to_string(mcmc.pilot);
  std::string truths;
  for (const auto& [name, value] : truth_overrides)
    truths += name + ":" + num(value) + ";";
  kv["truth_overrides"] = truths.empty() ? "-" : truths;
  std::string priors;
  for (const auto& [name, text] : prior_overrides) priors += name + ":" + text + ";";
  kv["prior_overrides"] = priors.empty() ? "-" : priors;

  std::string out;
  for (const auto& [key, value] : kv) out += key + "=" + value + "\n";
  return out;
}

ModelParams base_params_from_config(const ExperimentConfig& cfg, ModelKind kind) {
  ModelParams base;
  base.kind = kind;
  base.n_predictors = cfg.n_predictors;
  base.y0 = cfg.y0;
  base.n_steps = cfg.n_steps;
  base.optimum_noise_rule = cfg.optimum_noise_rule;
  base.interaction_own_variance = cfg.interaction_own_variance;
  base.predictor_rho = cfg.predictor_rho;
  base.reg.b.assign(cfg.n_predictors, 0.0);
  if (!cfg.b_pair.empty()) {
    if (cfg.b_pair.size() != RegressionParams::pair_count(cfg.n_predictors))
      throw std::invalid_argument(
          "b_pair needs one value per unordered predictor pair");
    base.reg.b_pair = cfg.b_pair;
  }
  return base;
}

PriorSet priors_from_config(const ExperimentConfig& cfg, ModelKind kind) {
  if (cfg.prior_family == PriorFamily::empirical)
    throw std::invalid_argument(
        "empirical priors need observed data; pick uniform or informative");
  PriorSet priors = cfg.prior_family == PriorFamily::study_informative
                        ? study_informative_priors(kind, cfg.n_predictors)
                        : study_uniform_priors(kind, cfg.n_predictors);
  apply_prior_overrides(cfg, priors);
  return priors;
}

PriorSet data_priors_from_config(const ExperimentConfig& cfg, ModelKind kind,
                                 std::size_t n_predictors, const OlsFit& ols) {
  PriorSet priors;
  switch (cfg.prior_family) {
    case PriorFamily::study_uniform:
      priors = study_uniform_priors(kind, n_predictors);
      break;
    case PriorFamily::study_informative:
      priors = study_informative_priors(kind, n_predictors);
      break;
    case PriorFamily::empirical:
      priors = empirical_priors(kind, n_predictors, ols);
      break;
  }
  apply_prior_overrides(cfg, priors);
  return priors;
}

std::vector<double> truth_from_config(const ExperimentConfig& cfg, ModelKind kind) {
  std::vector<double> truth = study_true_values(kind, cfg.n_predictors);
  const std::vector<std::string> names = model_param_names(kind, cfg.n_predictors);
  for (const auto& [name, value] : cfg.truth_overrides) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) continue;  // not a parameter of this model
    truth[static_cast<std::size_t>(it - names.begin())] = value;
  }
  return truth;
}

StudyResult run_sim_study(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  if (cfg.models.empty() || cfg.taxa_sizes.empty())
    throw std::invalid_argument("run_sim_study: no models or taxa sizes");

  std::map<std::size_t, PhyloTree> trees;
  if (cfg.tree_newick) {
    PhyloTree tree = PhyloTree::from_newick(*cfg.tree_newick);
    const std::size_t n = tree.n_tips();
    cfg.taxa_sizes = {n};
    trees.emplace(n, std::move(tree));
  } else {
    for (std::size_t n : cfg.taxa_sizes) {
      RngStream rng(derive_seed(cfg.seed, kTreeTag + n));
      trees.emplace(n, generate_yule_tree(n, rng));
    }
  }

  StudyResult out;
  std::uint64_t cell_idx = 0;
  for (ModelKind kind : cfg.models) {
    const ModelParams base = base_params_from_config(cfg, kind);
    const PriorSet priors = priors_from_config(cfg, kind);
    const std::vector<double> truth = truth_from_config(cfg, kind);
    const ModelParams true_params = params_from_vector(kind, truth, base);

    for (std::size_t n : cfg.taxa_sizes) {
      const PhyloTree& tree = trees.at(n);
      RngStream obs_rng(derive_seed(cfg.seed, kObservedTag + cell_idx));
      const TraitDataset observed = simulate_tips(tree, true_params, obs_rng);
      const std::vector<double> obs_stats = summary_stats(observed, cfg.joint_stats);

      AbcContext ctx{&tree, kind, priors, base, cfg.joint_stats};
      PosteriorSample sample =
          abc_reject(ctx, obs_stats, cfg.n_reps, cfg.tolerance,
                     derive_seed(cfg.seed, kCellTag + cell_idx),
                     cfg.fixed_epsilon, cfg.parallel);
      if (cfg.adjust) regression_adjust(sample);

      StudyCell cell;
      cell.model = kind;
      cell.n_taxa = n;
      cell.param_names = priors.names;
      cell.truth = truth;
      cell.summaries = column_summaries(sample.posterior(), priors.size());
      cell.n_accepted = sample.posterior().size();
      cell.n_failed = sample.n_failed;
      cell.warnings = sample.warnings;
      out.cells.push_back(std::move(cell));
      out.total_replicates += cfg.n_reps;
      ++cell_idx;
    }
  }
  return out;
}

ModelSelectResult run_model_select(const PhyloTree& tree, const TraitDataset& data,
                                   const ExperimentConfig& cfg) {
  if (cfg.models.empty()) throw std::invalid_argument("run_model_select: no models");

  ModelSelectResult out;
  out.ols = ols_fit(data);
  const std::vector<double> obs_stats = summary_stats(data, cfg.joint_stats);
  const std::size_t k = data.n_predictors();

  std::vector<ReplicateTable> tables;
  std::vector<PriorSet> priorsets;
  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
    const ModelKind kind = cfg.models[mi];
    out.model_names.push_back(to_string(kind));
    PriorSet priors = data_priors_from_config(cfg, kind, k, out.ols);
    ModelParams base = base_params_from_config(cfg, kind);
    base.n_predictors = k;
    base.reg.b.assign(k, 0.0);
    AbcContext ctx{&tree, kind, priors, base, cfg.joint_stats};
    tables.push_back(run_replicates(ctx, cfg.n_reps,
                                    derive_seed(cfg.seed, kSelectTag + mi), 0,
                                    cfg.parallel));
    priorsets.push_back(std::move(priors));
  }

  // one scaling across the pooled replicates so distances are comparable
  // between models
  std::vector<std::vector<double>> pooled;
  for (const auto& table : tables)
    for (std::size_t i = 0; i < table.params.size(); ++i)
      if (table.ok[i]) pooled.push_back(table.stats[i]);
  if (pooled.empty())
    throw std::runtime_error("run_model_select: every replicate failed");
  if (pooled.front().size() != obs_stats.size())
    throw std::invalid_argument("run_model_select: stats dimension mismatch");
  const ScaleInfo pooled_scales = mad_scales(pooled);
  if (pooled_scales.any_degenerate())
    out.warnings.push_back("constant summary-statistic column; unit scale used");

  std::vector<std::vector<double>> distances;
  distances.reserve(tables.size());
  for (const auto& table : tables)
    distances.push_back(table_distances(table, obs_stats, pooled_scales.scale));
  out.comparison = pooled_model_posterior(out.model_names, distances, cfg.tolerance);
  if (out.comparison.ranking_ties)
    out.warnings.push_back("acceptance-count ties in the ranking; alphabetical order");

  // per-model estimates use each model's own scaling, matching a standalone
  // rejection run on the same replicates
  for (std::size_t mi = 0; mi < tables.size(); ++mi) {
    std::vector<std::vector<double>> good;
    for (std::size_t i = 0; i < tables[mi].params.size(); ++i)
      if (tables[mi].ok[i]) good.push_back(tables[mi].stats[i]);
    const ScaleInfo scales = good.empty() ? pooled_scales : mad_scales(good);
    PosteriorSample sample =
        accept_from_table(priorsets[mi].names, tables[mi], obs_stats, scales,
                          cfg.tolerance, cfg.fixed_epsilon);
    if (cfg.adjust) regression_adjust(sample);
    out.per_model.push_back(std::move(sample));
  }
  return out;
}

}  // namespace phyloabc
