#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "phyloabc/abc.hpp"
#include "phyloabc/cli_config.hpp"
#include "phyloabc/experiment.hpp"
#include "phyloabc/models.hpp"
#include "phyloabc/phylo.hpp"
#include "phyloabc/priors.hpp"
#include "phyloabc/tables.hpp"

namespace {

using namespace phyloabc;

struct CliState {
  std::string config_file;
  std::string tree_path;
  std::string traits_path;
  std::string out_dir = "out";
  std::string model = "OUBMBM";
  std::vector<std::string> models;
  std::vector<std::size_t> sizes;
  std::uint64_t seed = 1;
  std::size_t reps = 5000;
  double tol = 0.10;
  int steps = 100;
  std::size_t predictors = 2;
  double rho = 0.0;
  double y0 = 0.0;
  std::vector<double> b_pair;
  double epsilon = std::nan("");
  bool full = false;
  bool adjust = false;
  bool joint = false;
  bool serial = false;
  bool own_var = false;
  std::string optimum_noise = "linearized";
  std::string priors;  // resolved per command after parsing
  std::vector<std::string> truth;
  std::vector<std::string> prior_override;
  std::size_t chain = 50000;
  std::size_t burn = 5000;
  std::size_t pilot = 0;
  double delta = 100.0;
  double proposal = 0.1;
};

std::pair<std::string, std::string> split_assignment(const std::string& text,
                                                     const char* flag) {
  const auto pos = text.find('=');
  if (pos == std::string::npos || pos == 0 || pos + 1 == text.size())
    throw std::runtime_error(std::string(flag) + " expects name=value, got '" +
                             text + "'");
  return {text.substr(0, pos), text.substr(pos + 1)};
}

double parse_value(const std::string& text, const char* flag) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size())
    throw std::runtime_error(std::string(flag) + ": bad number '" + text + "'");
  return v;
}

PhyloTree load_tree(const std::string& path) {
  std::string text = read_text_file(path);
  // the parser rejects trailing bytes, so strip surrounding whitespace here
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return PhyloTree::from_newick(text.substr(b, e - b));
}

ExperimentConfig make_config(const CliState& c, CLI::App* sub) {
  ExperimentConfig cfg;
  cfg.seed = c.seed;
  cfg.n_reps = c.reps;
  cfg.tolerance = c.tol;
  cfg.n_steps = c.steps;
  cfg.n_predictors = c.predictors;
  cfg.adjust = c.adjust;
  cfg.joint_stats = c.joint;
  cfg.parallel = !c.serial;
  cfg.predictor_rho = c.rho;
  cfg.y0 = c.y0;
  cfg.b_pair = c.b_pair;
  cfg.full = c.full;
  if (c.full) {
    cfg.apply_full_scale();
    const auto* reps_opt = sub->get_option_no_throw("--reps");
    if (reps_opt && reps_opt->count() > 0) cfg.n_reps = c.reps;
  }
  if (!c.sizes.empty()) cfg.taxa_sizes = c.sizes;
  if (!std::isnan(c.epsilon)) cfg.fixed_epsilon = c.epsilon;
  cfg.optimum_noise_rule = c.optimum_noise == "exact" ? OuOptimumNoiseRule::exact
                                                      : OuOptimumNoiseRule::linearized;
  cfg.interaction_own_variance = c.own_var;
  if (!c.priors.empty()) cfg.prior_family = prior_family_from_string(c.priors);
  for (const auto& item : c.truth) {
    const auto [name, value] = split_assignment(item, "--truth");
    cfg.truth_overrides.emplace_back(name, parse_value(value, "--truth"));
  }
  for (const auto& item : c.prior_override) {
    const auto [name, spec] = split_assignment(item, "--prior");
    Prior::parse(spec);  // fail fast on malformed specs
    cfg.prior_overrides.emplace_back(name, spec);
  }
  cfg.mcmc.chain_length = c.chain;
  cfg.mcmc.burn_in = c.burn;
  cfg.mcmc.delta = c.delta;
  cfg.mcmc.proposal_frac = c.proposal;
  cfg.mcmc.pilot = c.pilot;
  return cfg;
}

void validate_override_names(const ExperimentConfig& cfg) {
  std::set<std::string> known;
  for (ModelKind kind : cfg.models)
    for (const auto& name : model_param_names(kind, cfg.n_predictors))
      known.insert(name);
  for (const auto& [name, value] : cfg.truth_overrides)
    if (!known.count(name))
      throw std::runtime_error("--truth: '" + name +
                               "' is not a parameter of the selected models");
  for (const auto& [name, spec] : cfg.prior_overrides)
    if (!known.count(name))
      throw std::runtime_error("--prior: '" + name +
                               "' is not a parameter of the selected models");
}

std::string run_hash(const ExperimentConfig& cfg, const std::string& command,
                     const std::string& extra) {
  return fnv1a64_hex(cfg.canonical_text() + "command=" + command + "\n" + extra);
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_simulate(const CliState& c, CLI::App* sub) {
  const ModelKind kind = model_kind_from_string(c.model);
  ExperimentConfig cfg = make_config(c, sub);
  cfg.models = {kind};
  validate_override_names(cfg);

  const PhyloTree tree = load_tree(c.tree_path);
  const ModelParams params = params_from_vector(
      kind, truth_from_config(cfg, kind), base_params_from_config(cfg, kind));
  RngStream rng(cfg.seed);
  const TraitDataset data = simulate_tips(tree, params, rng);

  const std::string hash = run_hash(cfg, "simulate",
                                    "tree_fnv=" + fnv1a64_hex(tree.to_newick()) + "\n");
  emit_simulate_outputs(data, params, tree, cfg, hash, c.out_dir);
  std::cout << "simulated " << data.n_taxa() << " taxa under " << to_string(kind)
            << "; wrote " << c.out_dir << "/traits.csv\n";
  return 0;
}

int cmd_abc_reject(const CliState& c, CLI::App* sub) {
  const ModelKind kind = model_kind_from_string(c.model);
  ExperimentConfig cfg = make_config(c, sub);
  if (c.priors.empty()) cfg.prior_family = PriorFamily::empirical;
  cfg.models = {kind};

  const PhyloTree tree = load_tree(c.tree_path);
  const TraitDataset data = read_trait_csv(c.traits_path, tree);
  cfg.n_predictors = data.n_predictors();
  validate_override_names(cfg);

  OlsFit ols;
  if (cfg.prior_family == PriorFamily::empirical) ols = ols_fit(data);
  const PriorSet priors = data_priors_from_config(cfg, kind, data.n_predictors(), ols);
  ModelParams base = base_params_from_config(cfg, kind);
  const AbcContext ctx{&tree, kind, priors, base, cfg.joint_stats};
  const std::vector<double> obs = summary_stats(data, cfg.joint_stats);

  PosteriorSample sample =
      abc_reject(ctx, obs, cfg.n_reps, cfg.tolerance, derive_seed(cfg.seed, 0xAB0001),
                 cfg.fixed_epsilon, cfg.parallel);
  if (cfg.adjust) regression_adjust(sample);

  const std::string hash =
      run_hash(cfg, "abc-reject",
               "tree_fnv=" + fnv1a64_hex(tree.to_newick()) + "\ntraits_fnv=" +
                   fnv1a64_hex(read_text_file(c.traits_path)) + "\n");
  emit_abc_outputs(sample, cfg, kind, hash, c.out_dir, "posterior.csv");
  print_warnings(sample.warnings);
  std::cout << "accepted " << sample.draws.size() << " of " << cfg.n_reps
            << " replicates (threshold " << format_full(sample.threshold)
            << "); wrote " << c.out_dir << "\n";
  return 0;
}

int cmd_abc_mcmc(const CliState& c, CLI::App* sub) {
  const ModelKind kind = model_kind_from_string(c.model);
  ExperimentConfig cfg = make_config(c, sub);
  if (c.priors.empty()) cfg.prior_family = PriorFamily::empirical;
  cfg.models = {kind};

  const PhyloTree tree = load_tree(c.tree_path);
  const TraitDataset data = read_trait_csv(c.traits_path, tree);
  cfg.n_predictors = data.n_predictors();
  validate_override_names(cfg);

  OlsFit ols;
  if (cfg.prior_family == PriorFamily::empirical) ols = ols_fit(data);
  const PriorSet priors = data_priors_from_config(cfg, kind, data.n_predictors(), ols);
  ModelParams base = base_params_from_config(cfg, kind);
  const AbcContext ctx{&tree, kind, priors, base, cfg.joint_stats};
  const std::vector<double> obs = summary_stats(data, cfg.joint_stats);

  const PosteriorSample sample = abc_mcmc(ctx, obs, cfg.mcmc, cfg.seed);

  const std::string hash =
      run_hash(cfg, "abc-mcmc",
               "tree_fnv=" + fnv1a64_hex(tree.to_newick()) + "\ntraits_fnv=" +
                   fnv1a64_hex(read_text_file(c.traits_path)) + "\n");
  emit_abc_outputs(sample, cfg, kind, hash, c.out_dir, "chain.csv");
  print_warnings(sample.warnings);
  std::cout << "kept " << sample.draws.size() << " post-burn-in states; wrote "
            << c.out_dir << "\n";
  return 0;
}

int cmd_model_select(const CliState& c, CLI::App* sub) {
  ExperimentConfig cfg = make_config(c, sub);
  if (c.priors.empty()) cfg.prior_family = PriorFamily::empirical;
  if (!c.models.empty()) {
    cfg.models.clear();
    for (const auto& name : c.models) cfg.models.push_back(model_kind_from_string(name));
  }

  const PhyloTree tree = load_tree(c.tree_path);
  const TraitDataset data = read_trait_csv(c.traits_path, tree);
  cfg.n_predictors = data.n_predictors();
  validate_override_names(cfg);

  const ModelSelectResult result = run_model_select(tree, data, cfg);

  const std::string hash =
      run_hash(cfg, "model-select",
               "tree_fnv=" + fnv1a64_hex(tree.to_newick()) + "\ntraits_fnv=" +
                   fnv1a64_hex(read_text_file(c.traits_path)) + "\n");
  emit_model_select_tables(result, cfg, hash, c.out_dir);
  print_warnings(result.warnings);

  const ModelComparison& cmp = result.comparison;
  std::cout << "model ranking (accepted of " << cmp.target_count << "):\n";
  for (std::size_t r = 0; r < cmp.ranking.size(); ++r) {
    const auto it =
        std::find(cmp.model_names.begin(), cmp.model_names.end(), cmp.ranking[r]);
    const std::size_t i = static_cast<std::size_t>(it - cmp.model_names.begin());
    std::cout << "  " << r + 1 << ". " << cmp.ranking[r] << "  "
              << cmp.accepted_counts[i] << "  p=" << format_fixed(cmp.probabilities[i])
              << "\n";
  }
  if (cmp.ranking.size() >= 2) {
    const auto idx = [&](const std::string& name) {
      return static_cast<std::size_t>(
          std::find(cmp.model_names.begin(), cmp.model_names.end(), name) -
          cmp.model_names.begin());
    };
    const double K =
        cmp.bayes_factors[idx(cmp.ranking[0])][idx(cmp.ranking[1])];
    std::cout << "best vs runner-up: BF=" << format_fixed(K);
    if (std::isfinite(K) && K >= 1.0) std::cout << " (" << kass_raftery_label(K) << ")";
    std::cout << "\n";
  }
  std::cout << "wrote " << c.out_dir << "\n";
  return 0;
}

int cmd_sim_study(const CliState& c, CLI::App* sub) {
  ExperimentConfig cfg = make_config(c, sub);
  if (c.priors.empty()) cfg.prior_family = PriorFamily::study_uniform;
  if (!c.models.empty()) {
    cfg.models.clear();
    for (const auto& name : c.models) cfg.models.push_back(model_kind_from_string(name));
  }
  std::string extra;
  if (!c.tree_path.empty()) {
    const PhyloTree tree = load_tree(c.tree_path);
    cfg.tree_newick = tree.to_newick();
    extra = "tree_fnv=" + fnv1a64_hex(*cfg.tree_newick) + "\n";
  }
  validate_override_names(cfg);

  const StudyResult result = run_sim_study(cfg);
  const std::string hash = run_hash(cfg, "sim-study", extra);
  emit_study_tables(result, cfg, hash, c.out_dir);

  std::cout << "ran " << result.cells.size() << " study cells, "
            << result.total_replicates << " replicates total; wrote " << c.out_dir
            << "\n";
  for (const auto& cell : result.cells) {
    std::cout << "  " << to_string(cell.model) << " n=" << cell.n_taxa << ": "
              << cell.n_accepted << " accepted";
    if (cell.n_failed) std::cout << ", " << cell.n_failed << " failed";
    std::cout << "\n";
    print_warnings(cell.warnings);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CliState c;
  CLI::App app{
      "Trait evolution on phylogenies: simulation, approximate Bayesian "
      "fitting and model choice"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    // handled by expand_config_args before parse; registered here for --help
    sub->add_option("--config", c.config_file,
                    "key=value file applied where flags are absent");
    sub->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
    sub->add_option("--steps", c.steps, "grid points per branch integral")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", c.out_dir, "output directory")->capture_default_str();
    sub->add_option("--y0", c.y0, "response value at the root")->capture_default_str();
    sub->add_option("--rho", c.rho, "pairwise correlation of predictor innovations")
        ->capture_default_str();
    sub->add_option("--b-pair", c.b_pair,
                    "fixed interaction coefficients, upper triangle row-major")
        ->delimiter(',');
    sub->add_option("--truth", c.truth,
                    "override a generating parameter, name=value (repeatable)");
    sub->add_option("--optimum-noise", c.optimum_noise,
                    "optimum-noise variance rule for OU predictors")
        ->check(CLI::IsMember({"linearized", "exact"}))
        ->capture_default_str();
    sub->add_flag("--interaction-own-variance", c.own_var,
                  "use each predictor's own variance in the interaction term");
    sub->add_flag("--serial", c.serial, "run replicates on one thread");
  };
  auto add_abc_common = [&](CLI::App* sub) {
    sub->add_option("--reps", c.reps, "prior-predictive replicates per model")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol", c.tol, "acceptance-rate quantile in (0,1]")
        ->capture_default_str();
    sub->add_option("--epsilon", c.epsilon,
                    "fixed distance cutoff instead of the tolerance quantile");
    sub->add_flag("--full", c.full, "full-scale protocol (50000 replicates)");
    sub->add_flag("--adjust", c.adjust, "local-linear regression adjustment");
    sub->add_flag("--joint-stats", c.joint,
                  "joint nearest-neighbour summary instead of per-trait");
    sub->add_option("--priors", c.priors,
                    "prior family: uniform, informative or empirical");
    sub->add_option("--prior", c.prior_override,
                    "override one prior, e.g. alpha_y=uniform(0,0.3) (repeatable)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate tip traits on a tree");
  sim->add_option("--tree", c.tree_path, "Newick tree file")->required();
  sim->add_option("--model", c.model, "model name")->capture_default_str();
  sim->add_option("--predictors", c.predictors, "number of predictor traits")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_common(sim);

  CLI::App* rej = app.add_subcommand("abc-reject", "rejection sampler posterior");
  rej->add_option("--tree", c.tree_path, "Newick tree file")->required();
  rej->add_option("--traits", c.traits_path, "trait CSV (species,y,x1,...)")
      ->required();
  rej->add_option("--model", c.model, "model name")->capture_default_str();
  add_common(rej);
  add_abc_common(rej);

  CLI::App* mcmc = app.add_subcommand("abc-mcmc", "Metropolis sampler posterior");
  mcmc->add_option("--tree", c.tree_path, "Newick tree file")->required();
  mcmc->add_option("--traits", c.traits_path, "trait CSV (species,y,x1,...)")
      ->required();
  mcmc->add_option("--model", c.model, "model name")->capture_default_str();
  mcmc->add_option("--chain", c.chain, "chain length")->capture_default_str();
  mcmc->add_option("--delta", c.delta, "distance acceptance threshold")
      ->capture_default_str();
  mcmc->add_option("--burn-in", c.burn, "states discarded from the front")
      ->capture_default_str();
  mcmc->add_option("--proposal-frac", c.proposal,
                   "proposal sd as a fraction of the prior sd")
      ->capture_default_str();
  mcmc->add_option("--mcmc-pilot", c.pilot,
                   "pilot replicates for distance scaling (0 = raw stats)")
      ->capture_default_str();
  add_common(mcmc);
  add_abc_common(mcmc);

  CLI::App* sel = app.add_subcommand("model-select",
                                     "candidate-model comparison on observed data");
  sel->add_option("--tree", c.tree_path, "Newick tree file")->required();
  sel->add_option("--traits", c.traits_path, "trait CSV (species,y,x1,...)")
      ->required();
  sel->add_option("--models", c.models, "candidate models")->delimiter(',');
  add_common(sel);
  add_abc_common(sel);

  CLI::App* study = app.add_subcommand("sim-study",
                                       "bias/coverage study on simulated data");
  study->add_option("--models", c.models, "models to study")->delimiter(',');
  study->add_option("--sizes", c.sizes, "taxa counts")->delimiter(',');
  study->add_option("--tree", c.tree_path,
                    "fixed tree instead of generated pure-birth trees");
  study->add_option("--predictors", c.predictors, "number of predictor traits")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_common(study);
  add_abc_common(study);

  std::vector<std::string> args;
  try {
    args = expand_config_args(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::reverse(args.begin(), args.end());  // parse(vector) wants reversed args
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed()) return cmd_simulate(c, sim);
    if (rej->parsed()) return cmd_abc_reject(c, rej);
    if (mcmc->parsed()) return cmd_abc_mcmc(c, mcmc);
    if (sel->parsed()) return cmd_model_select(c, sel);
    if (study->parsed()) return cmd_sim_study(c, study);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
