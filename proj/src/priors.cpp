#include "phyloabc/priors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "linalg.hpp"

namespace phyloabc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

Prior Prior::uniform(double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("uniform prior: hi must exceed lo");
  return Prior{Kind::Uniform, lo, hi};
}

Prior Prior::exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential prior: rate must be > 0");
  return Prior{Kind::Exponential, rate, 0.0};
}

Prior Prior::normal(double mean, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("normal prior: sd must be > 0");
  return Prior{Kind::Normal, mean, sd};
}

Prior Prior::chisq(double df) {
  if (!(df > 0.0)) throw std::invalid_argument("chisq prior: df must be > 0");
  return Prior{Kind::ChiSquared, df, 0.0};
}

double Prior::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::Uniform: return rng.uniform(a, b);
    case Kind::Exponential: return -std::log(rng.uniform()) / a;
    case Kind::Normal: return rng.normal(a, b);
    case Kind::ChiSquared: return rng.chisq(a);
  }
  throw std::logic_error("bad prior kind");
}

double Prior::log_pdf(double x) const {
  switch (kind) {
    case Kind::Uniform:
      return (x < a || x > b) ? kNegInf : -std::log(b - a);
    case Kind::Exponential:
      return x < 0.0 ? kNegInf : std::log(a) - a * x;
    case Kind::Normal: {
      const double z = (x - a) / b;
      return -0.5 * z * z - std::log(b) - 0.9189385332046727;
    }
    case Kind::ChiSquared: {
      if (x < 0.0) return kNegInf;
      if (x == 0.0) return a < 2.0 ? kInf : (a == 2.0 ? -std::log(2.0) : kNegInf);
      const double h = 0.5 * a;
      return (h - 1.0) * std::log(x) - 0.5 * x - h * std::log(2.0) - std::lgamma(h);
    }
  }
  throw std::logic_error("bad prior kind");
}

double Prior::mean() const {
  switch (kind) {
    case Kind::Uniform: return 0.5 * (a + b);
    case Kind::Exponential: return 1.0 / a;
    case Kind::Normal: return a;
    case Kind::ChiSquared: return a;
  }
  throw std::logic_error("bad prior kind");
}

double Prior::sd() const {
  switch (kind) {
    case Kind::Uniform: return (b - a) / std::sqrt(12.0);
    case Kind::Exponential: return 1.0 / a;
    case Kind::Normal: return b;
    case Kind::ChiSquared: return std::sqrt(2.0 * a);
  }
  throw std::logic_error("bad prior kind");
}

double Prior::support_lo() const {
  switch (kind) {
    case Kind::Uniform: return a;
    case Kind::Exponential: return 0.0;
    case Kind::Normal: return kNegInf;
    case Kind::ChiSquared: return 0.0;
  }
  throw std::logic_error("bad prior kind");
}

double Prior::support_hi() const {
  return kind == Kind::Uniform ? b : kInf;
}

std::string Prior::text() const {
  switch (kind) {
    case Kind::Uniform: return "uniform(" + fmt_num(a) + "," + fmt_num(b) + ")";
    case Kind::Exponential: return "exponential(" + fmt_num(a) + ")";
    case Kind::Normal: return "normal(" + fmt_num(a) + "," + fmt_num(b) + ")";
    case Kind::ChiSquared: return "chisq(" + fmt_num(a) + ")";
  }
  throw std::logic_error("bad prior kind");
}

Prior Prior::parse(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    throw std::invalid_argument("prior parse: expected name(args) in '" + text + "'");
  const std::string name = s.substr(0, open);
  const std::string args = s.substr(open + 1, s.size() - open - 2);
  std::vector<double> vals;
  std::size_t start = 0;
  while (start <= args.size()) {
    const auto comma = args.find(',', start);
    const std::string tok = args.substr(start, comma == std::string::npos ? std::string::npos
                                                                          : comma - start);
    if (tok.empty()) throw std::invalid_argument("prior parse: empty argument in '" + text + "'");
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("prior parse: bad number '" + tok + "' in '" + text + "'");
    }
    if (used != tok.size())
      throw std::invalid_argument("prior parse: bad number '" + tok + "' in '" + text + "'");
    vals.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  auto need = [&](std::size_t n) {
    if (vals.size() != n)
      throw std::invalid_argument("prior parse: '" + name + "' takes " + std::to_string(n) +
                                  " argument(s)");
  };
  if (name == "uniform") {
    need(2);
    return uniform(vals[0], vals[1]);
  }
  if (name == "exponential" || name == "exp") {
    need(1);
    return exponential(vals[0]);
  }
  if (name == "normal") {
    need(2);
    return normal(vals[0], vals[1]);
  }
  if (name == "chisq") {
    need(1);
    return chisq(vals[0]);
  }
  throw std::invalid_argument("prior parse: unknown distribution '" + name + "'");
}

std::vector<double> PriorSet::sample(RngStream& rng) const {
  std::vector<double> out(priors.size());
  for (std::size_t i = 0; i < priors.size(); ++i) out[i] = priors[i].sample(rng);
  return out;
}

double PriorSet::log_pdf(const std::vector<double>& theta) const {
  if (theta.size() != priors.size())
    throw std::invalid_argument("prior log_pdf: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < priors.size(); ++i) s += priors[i].log_pdf(theta[i]);
  return s;
}

int PriorSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

void PriorSet::set(const std::string& name, const Prior& prior) {
  const int i = index_of(name);
  if (i < 0) throw std::invalid_argument("prior set: no parameter named '" + name + "'");
  priors[static_cast<std::size_t>(i)] = prior;
}

std::vector<std::string> model_param_names(ModelKind kind, std::size_t n_predictors) {
  std::vector<std::string> names{"alpha_y"};
  if (has_ou_predictors(kind)) {
    names.push_back("alpha_x");
    names.push_back("theta_x");
  }
  names.push_back("sigma_x");
  if (has_cir_rate(kind)) {
    names.push_back("alpha_tau");
    names.push_back("theta_tau");
    names.push_back("sigma_tau");
  } else {
    names.push_back("tau");
  }
  names.push_back("b0");
  for (std::size_t i = 1; i <= n_predictors; ++i) names.push_back("b" + std::to_string(i));
  return names;
}

ModelParams params_from_vector(ModelKind kind, const std::vector<double>& theta,
                               const ModelParams& base) {
  const auto names = model_param_names(kind, base.n_predictors);
  if (theta.size() != names.size())
    throw std::invalid_argument("params_from_vector: expected " +
                                std::to_string(names.size()) + " values, got " +
                                std::to_string(theta.size()));
  ModelParams p = base;
  p.kind = kind;
  p.reg.b.assign(base.n_predictors, 0.0);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& n = names[i];
    const double v = theta[i];
    if (n == "alpha_y") p.alpha_y = v;
    else if (n == "alpha_x") p.alpha_x = v;
    else if (n == "theta_x") p.theta_x = v;
    else if (n == "sigma_x") p.sigma_x = v;
    else if (n == "tau") p.tau = v;
    else if (n == "alpha_tau") p.alpha_tau = v;
    else if (n == "theta_tau") p.tau_bar = v;
    else if (n == "sigma_tau") p.sigma_tau = v;
    else if (n == "b0") p.reg.b0 = v;
    else p.reg.b[static_cast<std::size_t>(std::stoi(n.substr(1))) - 1] = v;
  }
  return p;
}

namespace {

Prior study_uniform_for(const std::string& name) {
  if (name == "alpha_y") return Prior::uniform(0.0, 0.3);
  if (name == "alpha_x") return Prior::uniform(0.0, 0.2);
  if (name == "theta_x") return Prior::uniform(-1.0, 1.0);
  if (name == "sigma_x") return Prior::uniform(0.0, 2.0);
  if (name == "alpha_tau") return Prior::uniform(0.0, 0.4);
  if (name == "theta_tau") return Prior::uniform(0.0, 60.0);
  if (name == "sigma_tau") return Prior::uniform(0.0, 1.0);
  if (name == "tau") return Prior::uniform(0.0, 0.7);
  if (name == "b0") return Prior::uniform(-1.0, 1.0);
  return Prior::uniform(0.0, 1.0);  // b1..bk
}

Prior study_informative_for(const std::string& name) {
  if (name == "alpha_y") return Prior::exponential(1.0 / 0.15);
  if (name == "alpha_x") return Prior::exponential(1.0 / 0.1);
  if (name == "theta_x") return Prior::normal(0.0, 1.0);
  if (name == "sigma_x") return Prior::exponential(1.0);
  if (name == "alpha_tau") return Prior::exponential(1.0 / 0.2);
  if (name == "theta_tau") return Prior::chisq(30.0);
  if (name == "sigma_tau") return Prior::exponential(1.0 / 0.5);
  if (name == "tau") return Prior::exponential(1.0);
  if (name == "b0") return Prior::uniform(-1.0, 1.0);
  return Prior::uniform(0.0, 1.0);
}

Prior empirical_for(const std::string& name) {
  if (name == "alpha_y" || name == "alpha_x" || name == "alpha_tau")
    return Prior::exponential(5.0);
  if (name == "theta_x") return Prior::normal(0.0, 1.0);
  if (name == "tau") return Prior::exponential(3.0);
  if (name == "sigma_x" || name == "sigma_tau") return Prior::exponential(2.0);
  if (name == "theta_tau") return Prior::chisq(30.0);
  throw std::logic_error("empirical prior: unhandled parameter " + name);
}

}  // namespace

PriorSet study_uniform_priors(ModelKind kind, std::size_t n_predictors) {
  PriorSet set;
  set.names = model_param_names(kind, n_predictors);
  for (const auto& n : set.names) set.priors.push_back(study_uniform_for(n));
  return set;
}

PriorSet study_informative_priors(ModelKind kind, std::size_t n_predictors) {
  PriorSet set;
  set.names = model_param_names(kind, n_predictors);
  for (const auto& n : set.names) set.priors.push_back(study_informative_for(n));
  return set;
}

OlsFit ols_fit(const TraitDataset& data) {
  const std::size_t n = data.n_taxa();
  const std::size_t p = data.n_predictors() + 1;
  if (n <= p)
    throw std::invalid_argument("ols_fit: need more taxa than coefficients");
  // design matrix [1, x1..xk], normal equations
  auto design = [&](std::size_t row, std::size_t col) {
    return col == 0 ? 1.0 : data.x[col - 1][row];
  };
  std::vector<double> xtx(p * p, 0.0), xty(p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      xty[i] += design(r, i) * data.y[r];
      for (std::size_t j = 0; j < p; ++j) xtx[i * p + j] += design(r, i) * design(r, j);
    }
  }
  std::vector<double> inv = xtx;
  if (!detail::invert_inplace(inv, p))
    throw std::invalid_argument("ols_fit: singular design (collinear predictors)");
  OlsFit fit;
  fit.coef.assign(p, 0.0);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) fit.coef[i] += inv[i * p + j] * xty[j];
  double rss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double fitted = 0.0;
    for (std::size_t i = 0; i < p; ++i) fitted += fit.coef[i] * design(r, i);
    const double e = data.y[r] - fitted;
    rss += e * e;
  }
  const double s2 = rss / static_cast<double>(n - p);
  fit.se.assign(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) fit.se[i] = std::sqrt(s2 * inv[i * p + i]);
  return fit;
}

Prior ols_coefficient_prior(const OlsFit& ols, std::size_t index) {
  if (index >= ols.coef.size())
    throw std::invalid_argument("ols_coefficient_prior: index out of range");
  const double c = ols.coef[index];
  double half = 3.0 * ols.se[index];
  if (!(half > 0.0) || !std::isfinite(half)) half = std::max(1.0, std::fabs(c));
  return Prior::uniform(c - half, c + half);
}

PriorSet empirical_priors(ModelKind kind, std::size_t n_predictors, const OlsFit& ols) {
  PriorSet set;
  set.names = model_param_names(kind, n_predictors);
  for (const auto& n : set.names) {
    if (n[0] == 'b' && n != "b0" && std::isdigit(static_cast<unsigned char>(n[1]))) {
      const std::size_t i = static_cast<std::size_t>(std::stoi(n.substr(1)));
      set.priors.push_back(ols_coefficient_prior(ols, i));
    } else if (n == "b0") {
      set.priors.push_back(ols_coefficient_prior(ols, 0));
    } else {
      set.priors.push_back(empirical_for(n));
    }
  }
  return set;
}

std::vector<double> study_true_values(ModelKind kind, std::size_t n_predictors) {
  const auto names = model_param_names(kind, n_predictors);
  std::vector<double> out;
  out.reserve(names.size());
  for (const auto& n : names) {
    if (n == "alpha_y") out.push_back(0.15);
    else if (n == "alpha_x") out.push_back(0.1);
    else if (n == "theta_x") out.push_back(0.0);
    else if (n == "sigma_x") out.push_back(1.0);
    else if (n == "alpha_tau") out.push_back(0.2);
    else if (n == "theta_tau") out.push_back(30.0);
    else if (n == "sigma_tau") out.push_back(0.5);
    else if (n == "tau") out.push_back(0.35);
    else if (n == "b0") out.push_back(0.0);
    else out.push_back(0.5);
  }
  return out;
}

}  // namespace phyloabc
