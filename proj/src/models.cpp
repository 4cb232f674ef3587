#include "phyloabc/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phyloabc {

ModelKind model_kind_from_string(const std::string& name) {
  for (ModelKind k : all_model_kinds())
    if (name == to_string(k)) return k;
  throw std::invalid_argument("unknown model '" + name +
                              "' (expected OUBM, OUOU, OUBMBM, OUOUBM, OUBMCIR or OUOUCIR)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::OUBM: return "OUBM";
    case ModelKind::OUOU: return "OUOU";
    case ModelKind::OUBMBM: return "OUBMBM";
    case ModelKind::OUOUBM: return "OUOUBM";
    case ModelKind::OUBMCIR: return "OUBMCIR";
    case ModelKind::OUOUCIR: return "OUOUCIR";
  }
  throw std::logic_error("bad ModelKind");
}

const std::vector<ModelKind>& all_model_kinds() {
  static const std::vector<ModelKind> kinds = {
      ModelKind::OUBM,    ModelKind::OUOU,    ModelKind::OUBMBM,
      ModelKind::OUOUBM,  ModelKind::OUBMCIR, ModelKind::OUOUCIR};
  return kinds;
}

bool has_ou_predictors(ModelKind kind) {
  return kind == ModelKind::OUOU || kind == ModelKind::OUOUBM ||
         kind == ModelKind::OUOUCIR;
}

bool has_bm_rate(ModelKind kind) {
  return kind == ModelKind::OUBMBM || kind == ModelKind::OUOUBM;
}

bool has_cir_rate(ModelKind kind) {
  return kind == ModelKind::OUBMCIR || kind == ModelKind::OUOUCIR;
}

bool has_constant_rate(ModelKind kind) {
  return kind == ModelKind::OUBM || kind == ModelKind::OUOU;
}

double RegressionParams::pair_coef(std::size_t i, std::size_t j) const {
  if (b_pair.empty()) return 0.0;
  if (i > j) std::swap(i, j);
  const std::size_t k = b.size();
  const std::size_t idx = i * k - i * (i + 1) / 2 + (j - i - 1);
  return b_pair[idx];
}

double compute_optimum(const RegressionParams& reg, const std::vector<double>& x) {
  if (x.size() != reg.b.size())
    throw std::invalid_argument("compute_optimum: predictor count mismatch");
  if (!reg.b_pair.empty() && reg.b_pair.size() != RegressionParams::pair_count(reg.b.size()))
    throw std::invalid_argument("compute_optimum: wrong interaction coefficient count");
  double out = reg.b0;
  for (std::size_t i = 0; i < x.size(); ++i) out += reg.b[i] * x[i];
  if (!reg.b_pair.empty()) {
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = i + 1; j < x.size(); ++j)
        out += reg.pair_coef(i, j) * x[i] * x[j];
  }
  return out;
}

double expected_sigma_theta_sq(const RegressionParams& reg,
                               const std::vector<double>& sigma_x, double t,
                               PredictorKind kind, const PredictorOuParams* ou,
                               bool interaction_own_variance) {
  const std::size_t k = reg.b.size();
  if (sigma_x.size() != k)
    throw std::invalid_argument("expected_sigma_theta_sq: sigma_x size mismatch");
  if (t < 0.0) throw std::invalid_argument("expected_sigma_theta_sq: t must be >= 0");
  if (kind == PredictorKind::OU && ou == nullptr)
    throw std::invalid_argument("expected_sigma_theta_sq: OU predictors need ou params");

  double out = 0.0;
  for (std::size_t i = 0; i < k; ++i) out += reg.b[i] * reg.b[i] * sigma_x[i] * sigma_x[i];
  if (reg.b_pair.empty() ||
      std::all_of(reg.b_pair.begin(), reg.b_pair.end(), [](double v) { return v == 0.0; }))
    return out;

  // first and second moments of each predictor at time t
  std::vector<double> m1(k, 0.0), m2(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    if (kind == PredictorKind::BM) {
      m1[j] = 0.0;  // zero-mean Brownian predictors from the root
      m2[j] = sigma_x[j] * sigma_x[j] * t;
    } else {
      const double decay = std::exp(-ou->alpha_x * t);
      m1[j] = ou->x0 * decay + ou->theta_x * (1.0 - decay);
      m2[j] = sigma_x[j] * sigma_x[j] * (-std::expm1(-2.0 * ou->alpha_x * t)) /
                  (2.0 * ou->alpha_x) +
              m1[j] * m1[j];
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double si2 = sigma_x[i] * sigma_x[i];
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const double bij = reg.pair_coef(i, j);
      const double second = interaction_own_variance && kind == PredictorKind::BM
                                ? si2 * t
                                : m2[j];
      out += si2 * bij * bij * second;
      out += 2.0 * reg.b[i] * si2 * bij * m1[j];
    }
  }
  // Eq-of-motion value is an expectation of a square; numerical floor at zero
  return std::max(0.0, out);
}

double ModelParams::x_root_value() const {
  if (x_root) return *x_root;
  return has_ou_predictors(kind) ? theta_x : 0.0;
}

namespace {

void validate(const ModelParams& p, const PhyloTree& tree) {
  if (!(p.alpha_y > 0.0) || !std::isfinite(p.alpha_y))
    throw std::invalid_argument("model params: alpha_y must be > 0");
  if (!(p.sigma_x >= 0.0)) throw std::invalid_argument("model params: sigma_x must be >= 0");
  if (p.n_predictors != p.reg.b.size())
    throw std::invalid_argument("model params: regression size != n_predictors");
  if (!p.reg.b_pair.empty() &&
      p.reg.b_pair.size() != RegressionParams::pair_count(p.n_predictors))
    throw std::invalid_argument("model params: wrong interaction coefficient count");
  if (has_ou_predictors(p.kind) && !(p.alpha_x > 0.0))
    throw std::invalid_argument("model params: alpha_x must be > 0 for OU predictors");
  if (has_constant_rate(p.kind) && !(p.tau >= 0.0))
    throw std::invalid_argument("model params: tau must be >= 0");
  if (has_bm_rate(p.kind) && !(p.tau >= 0.0))
    throw std::invalid_argument("model params: tau must be >= 0");
  if (has_cir_rate(p.kind)) {
    if (!(p.alpha_tau > 0.0) || !(p.tau_bar > 0.0) || !(p.sigma_tau >= 0.0))
      throw std::invalid_argument("model params: CIR rate needs alpha_tau, tau_bar > 0 and sigma_tau >= 0");
    if (!(p.tau_root_value() > 0.0))
      throw std::invalid_argument("model params: CIR root rate must be > 0");
  }
  if (p.predictor_rho < 0.0 || p.predictor_rho >= 1.0)
    throw std::invalid_argument("model params: predictor_rho must be in [0,1)");
  if (tree.n_tips() < 1) throw std::invalid_argument("tree has no tips");
  if (p.n_steps < 1) throw std::invalid_argument("model params: n_steps must be >= 1");
}

}  // namespace

std::vector<std::vector<double>> simulate_predictors(const PhyloTree& tree,
                                                     const ModelParams& params,
                                                     RngStream& rng) {
  validate(params, tree);
  const std::size_t k = params.n_predictors;
  const bool ou = has_ou_predictors(params.kind);
  const double rho = params.predictor_rho;
  std::vector<std::vector<double>> x(k, std::vector<double>(tree.n_nodes(), 0.0));
  for (int id : tree.preorder()) {
    const PhyloNode& nd = tree.node(id);
    if (nd.parent < 0) {
      const double root = params.x_root_value();
      for (std::size_t j = 0; j < k; ++j) x[j][static_cast<std::size_t>(id)] = root;
      continue;
    }
    const double t = nd.branch_length;
    // shared innovation component for equicorrelated predictors
    const double g = (rho > 0.0 && t > 0.0) ? rng.normal() : 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double parent = x[j][static_cast<std::size_t>(nd.parent)];
      double mean, sd;
      if (ou) {
        mean = ou_transition_mean(parent, params.alpha_x, params.theta_x, t);
        sd = std::sqrt(ou_transition_var(params.alpha_x, params.sigma_x, t));
      } else {
        mean = parent;
        sd = params.sigma_x * std::sqrt(t);
      }
      double value = mean;
      if (t > 0.0 && sd > 0.0) {
        const double z = rho > 0.0
                             ? std::sqrt(1.0 - rho) * rng.normal() + std::sqrt(rho) * g
                             : rng.normal();
        value += sd * z;
      }
      x[j][static_cast<std::size_t>(id)] = value;
    }
  }
  return x;
}

std::vector<double> simulate_response(const PhyloTree& tree, const ModelParams& params,
                                      const std::vector<double>& optimum,
                                      RngStream& rng) {
  validate(params, tree);
  if (optimum.size() != tree.n_nodes())
    throw std::invalid_argument("simulate_response: optimum size != node count");
  const std::vector<double> depth = tree.depths();
  const std::vector<double> sigma_vec(params.n_predictors, params.sigma_x);
  const PredictorOuParams ou_params{params.alpha_x, params.theta_x, params.x_root_value()};
  const PredictorKind pk = has_ou_predictors(params.kind) ? PredictorKind::OU : PredictorKind::BM;
  // attractor of the optimum process under OU predictors: regression at the
  // predictor stationary mean
  double theta_attractor = 0.0;
  if (has_ou_predictors(params.kind) && !has_constant_rate(params.kind)) {
    theta_attractor = compute_optimum(
        params.reg, std::vector<double>(params.n_predictors, params.theta_x));
  }

  std::vector<double> y(tree.n_nodes(), 0.0);
  std::vector<double> tau_node;
  if (has_cir_rate(params.kind)) tau_node.assign(tree.n_nodes(), params.tau_root_value());

  for (int id : tree.preorder()) {
    const PhyloNode& nd = tree.node(id);
    const std::size_t uid = static_cast<std::size_t>(id);
    if (nd.parent < 0) {
      y[uid] = params.y0;
      continue;
    }
    const std::size_t pid = static_cast<std::size_t>(nd.parent);
    const double t = nd.branch_length;
    if (t == 0.0) {  // zero-length branches are identity maps
      y[uid] = y[pid];
      if (has_cir_rate(params.kind)) tau_node[uid] = tau_node[pid];
      continue;
    }

    if (has_constant_rate(params.kind)) {
      // optimum held constant over the branch at the child-node value
      y[uid] = ou_transition(y[pid], params.alpha_y, optimum[uid], params.tau, t, rng);
      continue;
    }

    const double t_mid = depth[pid] + 0.5 * t;
    const double s2 = expected_sigma_theta_sq(
        params.reg, sigma_vec, t_mid, pk,
        pk == PredictorKind::OU ? &ou_params : nullptr, params.interaction_own_variance);
    const double sigma_theta = std::sqrt(s2);
    const double decay = std::exp(-params.alpha_y * t);

    // pull toward the moving optimum, anchored at the parent-node optimum
    double core;
    if (pk == PredictorKind::OU) {
      core = ouou_theta_integral(optimum[pid], theta_attractor, params.alpha_y,
                                 params.alpha_x, sigma_theta, t, rng,
                                 params.optimum_noise_rule);
    } else {
      core = bm_theta_integral(optimum[pid], params.alpha_y, sigma_theta, t, rng);
    }

    double noise;
    if (has_bm_rate(params.kind)) {
      noise = ito_bm_weighted_integral(params.tau, params.alpha_y, t, params.n_steps, rng);
    } else {
      noise = decay * cir_weighted_ito_integral(tau_node[pid], params.alpha_y,
                                                params.alpha_tau, params.tau_bar,
                                                params.sigma_tau, t, params.n_steps, rng);
    }

    y[uid] = y[pid] * decay + decay * core + noise;

    if (has_cir_rate(params.kind)) {
      tau_node[uid] = cir_transition(tau_node[pid], params.alpha_tau, params.tau_bar,
                                     params.sigma_tau, t, rng);
    }
  }
  return y;
}

TraitDataset simulate_tips(const PhyloTree& tree, const ModelParams& params,
                           RngStream& rng) {
  const auto x_nodes = simulate_predictors(tree, params, rng);
  std::vector<double> optimum(tree.n_nodes());
  std::vector<double> x_at(params.n_predictors);
  for (std::size_t id = 0; id < tree.n_nodes(); ++id) {
    for (std::size_t j = 0; j < params.n_predictors; ++j) x_at[j] = x_nodes[j][id];
    optimum[id] = compute_optimum(params.reg, x_at);
  }
  const std::vector<double> y_nodes = simulate_response(tree, params, optimum, rng);

  TraitDataset out;
  out.species = tree.tip_labels();
  out.y.reserve(tree.n_tips());
  out.x.assign(params.n_predictors, {});
  for (int tip : tree.tips()) {
    out.y.push_back(y_nodes[static_cast<std::size_t>(tip)]);
    for (std::size_t j = 0; j < params.n_predictors; ++j)
      out.x[j].push_back(x_nodes[j][static_cast<std::size_t>(tip)]);
  }
  return out;
}

}  // namespace phyloabc
