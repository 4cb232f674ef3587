// End-to-end acceptance suite.  Prints one [PASS]/[FAIL] line per criterion
// and exits nonzero if any fails.  argv[1] is the path to the CLI binary,
// used by the determinism criterion.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "phyloabc/abc.hpp"
#include "phyloabc/experiment.hpp"
#include "phyloabc/models.hpp"
#include "phyloabc/modelsel.hpp"
#include "phyloabc/phylo.hpp"
#include "phyloabc/priors.hpp"
#include "phyloabc/rng.hpp"
#include "phyloabc/stochproc.hpp"
#include "phyloabc/tables.hpp"

using namespace phyloabc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void run_criterion(int id, const char* name, double time_budget_s,
                   const std::function<Outcome()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = fn();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= time_budget_s) {
    out.pass = false;
    out.detail += (out.detail.empty() ? "" : "; ") + std::string("over time budget");
  }
  if (!out.pass) ++g_failures;
  std::printf("[%s] %02d %s (%s%s%.1fs)\n", out.pass ? "PASS" : "FAIL", id, name,
              out.detail.c_str(), out.detail.empty() ? "" : ", ", secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

// Regularized lower incomplete gamma P(a, y) via series / continued fraction.
double gamma_p(double a, double y) {
  if (y <= 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (y < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int it = 0; it < 1000; ++it) {
      ap += 1.0;
      del *= y / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-y + a * std::log(y) - lg);
  }
  double b = y + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(-y + a * std::log(y) - lg) * h;
}

// CDF of c * chisq(k, lambda) as a Poisson mixture of central chi-squared
// laws, evaluated by one incomplete-gamma call plus an upward recurrence in
// the mixture index.
struct NoncentralCdf {
  double c, k2, l2;
  int jlo, jhi;
  std::vector<double> w;

  NoncentralCdf(double c_, double k, double lambda) : c(c_), k2(0.5 * k), l2(0.5 * lambda) {
    const double spread = 12.0 * std::sqrt(l2) + 25.0;
    jlo = std::max(0, static_cast<int>(l2 - spread));
    jhi = static_cast<int>(l2 + spread);
    for (int j = jlo; j <= jhi; ++j)
      w.push_back(std::exp(j * std::log(l2) - l2 - std::lgamma(j + 1.0)));
  }

  double operator()(double x) const {
    const double y = x / (2.0 * c);
    if (y <= 0.0) return 0.0;
    double a = k2 + jlo;
    double p = gamma_p(a, y);
    // t_a = y^a e^-y / Gamma(a+1); P(a+1) = P(a) - t_a
    double t = std::exp(a * std::log(y) - y - std::lgamma(a + 1.0));
    double cdf = 0.0;
    for (std::size_t idx = 0; idx < w.size(); ++idx) {
      cdf += w[idx] * p;
      p = std::max(0.0, p - t);
      t *= y / (a + 1.0);
      a += 1.0;
    }
    return cdf;
  }
};

// 3x3 linear algebra for the Gaussian branch-composition oracle.
using Mat3 = std::array<double, 9>;
using Vec3 = std::array<double, 3>;

Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i * 3 + j] += a[i * 3 + k] * b[k * 3 + j];
  return r;
}

Mat3 mul_t(const Mat3& a, const Mat3& b) {  // a * b^T
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i * 3 + j] += a[i * 3 + k] * b[j * 3 + k];
  return r;
}

Vec3 mul(const Mat3& a, const Vec3& v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r[i] += a[i * 3 + k] * v[k];
  return r;
}

Mat3 add(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r[i] = a[i] + b[i];
  return r;
}

// One branch of the OUBM model as an affine-Gaussian map on (x1, x2, y).
struct BranchMap {
  Mat3 M;
  Vec3 c;
  Mat3 S;
};

BranchMap oubm_branch(double t, double alpha, double sigma, double tau, double b0,
                      double b1, double b2) {
  const double e = std::exp(-alpha * t);
  const double w = 1.0 - e;
  const double vx = sigma * sigma * t;
  const double s2 = tau * tau * (1.0 - std::exp(-2.0 * alpha * t)) / (2.0 * alpha);
  BranchMap m;
  m.M = {1.0, 0.0, 0.0, 0.0, 1.0, 0.0, b1 * w, b2 * w, e};
  m.c = {0.0, 0.0, w * b0};
  m.S = {vx,          0.0,         b1 * w * vx,
         0.0,         vx,          b2 * w * vx,
         b1 * w * vx, b2 * w * vx, (b1 * b1 + b2 * b2) * w * w * vx + s2};
  return m;
}

bool read_dir(const std::string& dir, std::map<std::string, std::string>& files) {
  files.clear();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) return false;
    files[entry.path().filename().string()] = read_text_file(entry.path().string());
  }
  return true;
}

std::string g_cli_path;

// ---- criteria -------------------------------------------------------------

Outcome cir_transition_law() {
  const CirParams cp = cir_transition_params(30.0, 0.2, 30.0, 0.5, 1.0);
  const NoncentralCdf cdf(cp.c, cp.k, cp.lambda);
  const std::size_t n = 100000;
  std::vector<double> draws(n);
  RngStream rng(1001);
  for (auto& d : draws) d = cir_transition(30.0, 0.2, 30.0, 0.5, 1.0, rng);
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(draws[i]);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    ks = std::max(ks, std::max(f - lo, hi - f));
  }
  return {ks < 0.02, fmt("ks=%.5f, c=%.6f k=%.0f lambda=%.3f", ks, cp.c, cp.k, cp.lambda)};
}

Outcome ou_transition_moments() {
  const std::size_t n = 100000;
  const double mean_target = ou_transition_mean(0.0, 0.15, 2.0, 1.0);
  const double var_target = ou_transition_var(0.15, 0.35, 1.0);
  RngStream rng(1002);
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = ou_transition(0.0, 0.15, 2.0, 0.35, 1.0, rng);
    s += d;
    s2 += d * d;
  }
  const double mean = s / n;
  const double var = (s2 - n * mean * mean) / (n - 1.0);
  const double em = std::fabs(mean / mean_target - 1.0);
  const double ev = std::fabs(var / var_target - 1.0);
  return {em < 0.01 && ev < 0.01, fmt("mean err=%.4f%%, var err=%.4f%%", 100 * em, 100 * ev)};
}

Outcome ito_isometry() {
  const std::size_t n = 100000;
  const double target = ito_exp_integral_var(0.15, 1.0);
  RngStream rng(1003);
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = ito_exp_integral_grid(0.15, 1.0, 1000, rng);
    s += d;
    s2 += d * d;
  }
  const double mean = s / n;
  const double var = (s2 - n * mean * mean) / (n - 1.0);
  const double ev = std::fabs(var / target - 1.0);
  return {ev < 0.02, fmt("var=%.5f vs %.5f, err=%.3f%%", var, target, 100 * ev)};
}

Outcome gaussian_model_oracle() {
  const PhyloTree tree = PhyloTree::from_newick("((A:1,B:1):0.5,C:1.5);");
  ModelParams params;
  params.kind = ModelKind::OUBM;
  params.n_predictors = 2;
  params.alpha_y = 0.15;
  params.y0 = 0.5;
  params.sigma_x = 1.0;
  params.x_root = 0.0;
  params.tau = 0.35;
  params.reg.b0 = 0.3;
  params.reg.b = {0.5, 0.5};

  // oracle: compose affine-Gaussian branch maps, root state deterministic
  const BranchMap half = oubm_branch(0.5, 0.15, 1.0, 0.35, 0.3, 0.5, 0.5);
  const BranchMap one = oubm_branch(1.0, 0.15, 1.0, 0.35, 0.3, 0.5, 0.5);
  const BranchMap long_b = oubm_branch(1.5, 0.15, 1.0, 0.35, 0.3, 0.5, 0.5);
  const Vec3 z_root{0.0, 0.0, 0.5};
  Vec3 m_mid = mul(half.M, z_root);
  for (int i = 0; i < 3; ++i) m_mid[i] += half.c[i];
  const Mat3 s_mid = half.S;
  Vec3 m_a = mul(one.M, m_mid);
  for (int i = 0; i < 3; ++i) m_a[i] += one.c[i];
  Vec3 m_c = mul(long_b.M, z_root);
  for (int i = 0; i < 3; ++i) m_c[i] += long_b.c[i];
  const Mat3 shared = mul_t(mul(one.M, s_mid), one.M);  // M S_mid M^T
  const Mat3 c_aa = add(shared, one.S);
  const Mat3 c_ab = shared;
  const Mat3 c_cc = long_b.S;

  // observable vector: (x1, x2, y) for tips A, B, C
  std::array<double, 9> mean_oracle{};
  std::array<std::array<double, 9>, 9> cov_oracle{};
  for (int i = 0; i < 3; ++i) {
    mean_oracle[i] = m_a[i];
    mean_oracle[3 + i] = m_a[i];
    mean_oracle[6 + i] = m_c[i];
    for (int j = 0; j < 3; ++j) {
      cov_oracle[i][j] = c_aa[i * 3 + j];
      cov_oracle[3 + i][3 + j] = c_aa[i * 3 + j];
      cov_oracle[i][3 + j] = c_ab[i * 3 + j];
      cov_oracle[3 + i][j] = c_ab[j * 3 + i];
      cov_oracle[6 + i][6 + j] = c_cc[i * 3 + j];
    }
  }

  const std::size_t n = 100000;
  std::array<double, 9> sum{};
  std::array<std::array<double, 9>, 9> sp{};
  for (std::size_t rep = 0; rep < n; ++rep) {
    RngStream rng(1004, rep);
    const TraitDataset data = simulate_tips(tree, params, rng);
    std::array<double, 9> v{};
    for (int tip = 0; tip < 3; ++tip) {
      v[tip * 3 + 0] = data.x[0][static_cast<std::size_t>(tip)];
      v[tip * 3 + 1] = data.x[1][static_cast<std::size_t>(tip)];
      v[tip * 3 + 2] = data.y[static_cast<std::size_t>(tip)];
    }
    for (int i = 0; i < 9; ++i) {
      sum[i] += v[i];
      for (int j = i; j < 9; ++j) sp[i][j] += v[i] * v[j];
    }
  }

  double worst_mean_z = 0.0, worst_cov = 0.0;
  bool pass = true;
  std::array<double, 9> mean{};
  for (int i = 0; i < 9; ++i) mean[i] = sum[i] / static_cast<double>(n);
  for (int i = 0; i < 9; ++i) {
    const double se = std::sqrt(cov_oracle[i][i] / static_cast<double>(n));
    const double z = std::fabs(mean[i] - mean_oracle[i]) / se;
    worst_mean_z = std::max(worst_mean_z, z);
    if (z > 3.0) pass = false;
  }
  for (int i = 0; i < 9; ++i) {
    for (int j = i; j < 9; ++j) {
      const double emp =
          (sp[i][j] - static_cast<double>(n) * mean[i] * mean[j]) / (n - 1.0);
      const double truth = cov_oracle[i][j];
      const double se = std::sqrt(
          (cov_oracle[i][i] * cov_oracle[j][j] + truth * truth) / static_cast<double>(n));
      const double gate = std::max(0.05 * std::fabs(truth), 4.0 * se);
      const double err = std::fabs(emp - truth);
      worst_cov = std::max(worst_cov, err / gate);
      if (err > gate) pass = false;
    }
  }
  return {pass, fmt("worst mean z=%.2f, worst cov err=%.2f of gate", worst_mean_z, worst_cov)};
}

Outcome study_recovery() {
  ExperimentConfig cfg;
  cfg.models = {ModelKind::OUBMBM};
  cfg.taxa_sizes = {10};
  cfg.n_reps = 5000;
  cfg.tolerance = 0.10;
  cfg.seed = 2026;
  const StudyResult result = run_sim_study(cfg);
  if (result.cells.size() != 1) return {false, "expected one study cell"};
  const StudyCell& cell = result.cells[0];
  int idx = -1;
  for (std::size_t i = 0; i < cell.param_names.size(); ++i)
    if (cell.param_names[i] == "alpha_y") idx = static_cast<int>(i);
  if (idx < 0) return {false, "alpha_y missing"};
  const ParamSummary& s = cell.summaries[static_cast<std::size_t>(idx)];
  const double bias = s.mean - 0.15;
  const bool pass = std::fabs(bias) <= 0.05 && std::fabs(s.q05 - 0.015) <= 0.05 &&
                    std::fabs(s.q95 - 0.286) <= 0.05;
  return {pass, fmt("bias=%.3f, q05=%.3f vs 0.015, q95=%.3f vs 0.286", bias, s.q05, s.q95)};
}

Outcome model_probabilities() {
  const std::vector<std::string> names{"OUBMBM", "OUOUBM", "OUBMCIR", "OUOUCIR"};
  const std::vector<std::size_t> close{1200, 1500, 1800, 500};
  auto make_distances = [](const std::vector<std::size_t>& counts, std::size_t n) {
    std::vector<std::vector<double>> out(counts.size());
    for (std::size_t m = 0; m < counts.size(); ++m)
      for (std::size_t i = 0; i < n; ++i) {
        const double base = i < counts[m] ? 0.0 : 100.0;
        out[m].push_back(base +
                         (static_cast<double>(i * counts.size() + m) + 1.0) /
                             (static_cast<double>(n * counts.size()) + 2.0));
      }
    return out;
  };

  // pool 8000, rate 0.625 -> target 5000, counts land exactly on (1200,
  // 1500, 1800, 500)
  const ModelComparison cmp =
      pooled_model_posterior(names, make_distances(close, 2000), 0.625);
  if (cmp.accepted_counts != close)
    return {false, "acceptance counts drifted from the construction"};
  if (cmp.bayes_factors[1][3] != 3.0)
    return {false, fmt("BF(OUOUBM,OUOUCIR)=%.12f != 3", cmp.bayes_factors[1][3])};
  double psum = 0.0;
  for (double p : cmp.probabilities) psum += p;
  if (std::fabs(psum - 1.0) > 1e-12) return {false, fmt("probabilities sum %.15f", psum)};

  // randomized counts: reciprocity to 1e-9 (power-of-two pool keeps the
  // acceptance target exact)
  RngStream rng(1006);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::size_t> counts(4);
    std::size_t total = 0;
    for (auto& c : counts) {
      c = 1 + static_cast<std::size_t>(rng.uniform() * 400.0);
      total += c;
    }
    const double rate = static_cast<double>(total) / 2048.0;
    const ModelComparison r =
        pooled_model_posterior(names, make_distances(counts, 512), rate);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        worst = std::max(worst,
                         std::fabs(r.bayes_factors[static_cast<std::size_t>(i)]
                                                  [static_cast<std::size_t>(j)] *
                                       r.bayes_factors[static_cast<std::size_t>(j)]
                                                      [static_cast<std::size_t>(i)] -
                                   1.0));
    double ps = 0.0;
    for (double p : r.probabilities) ps += p;
    if (std::fabs(ps - 1.0) > 1e-12) return {false, "randomized probabilities sum"};
  }
  if (worst >= 1e-9) return {false, fmt("reciprocity worst=%.2e", worst)};
  return {true, fmt("BF=3 exact, reciprocity worst=%.1e", worst)};
}

Outcome evidence_bands() {
  const std::string strong = kass_raftery_label(23.417);
  const std::string bare = kass_raftery_label(2.617);
  const bool pass = strong == "strong" && bare.find("bare mention") != std::string::npos;
  return {pass, "23.417 -> \"" + strong + "\", 2.617 -> \"" + bare + "\""};
}

Outcome regression_adjustment_oracle() {
  // 20-point synthetic posterior with one parameter and one statistic
  const double s_obs = 0.55;
  std::vector<std::array<double, 3>> rows;  // distance, stat, draw
  for (int i = 0; i < 20; ++i) {
    const double stat = 0.1 + 0.045 * i;
    const double draw = 2.0 * stat + 1.0 + 0.01 * std::sin(i + 1.0);
    rows.push_back({std::fabs(stat - s_obs), stat, draw});
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });

  PosteriorSample sample;
  sample.param_names = {"p"};
  for (const auto& r : rows) {
    sample.distances.push_back(r[0]);
    sample.stats_scaled.push_back({r[1]});
    sample.draws.push_back({r[2]});
  }
  sample.observed_scaled = {s_obs};
  sample.threshold = sample.distances.back();
  regression_adjust(sample);
  if (sample.adjustment_fallback) return {false, "unexpected fallback"};

  // independent weighted-least-squares oracle on the same normal equations
  const std::size_t m = rows.size();
  std::vector<double> w(m), x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = rows[i][0] / sample.threshold;
    w[i] = std::max(0.0, 1.0 - u * u);
    x[i] = rows[i][1] - s_obs;
    y[i] = rows[i][2];
  }
  auto wls2 = [&](const std::vector<double>& resp, double& beta0, double& beta1) {
    double sw = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      sw += w[i];
      sx += w[i] * x[i];
      sxx += w[i] * x[i] * x[i];
      sy += w[i] * resp[i];
      sxy += w[i] * x[i] * resp[i];
    }
    const double det = sw * sxx - sx * sx;
    beta1 = (sw * sxy - sx * sy) / det;
    beta0 = (sy * sxx - sx * sxy) / det;
  };
  double b0, b1;
  wls2(y, b0, b1);
  std::vector<double> resid(m), logres(m);
  for (std::size_t i = 0; i < m; ++i) {
    resid[i] = y[i] - (b0 + b1 * x[i]);
    logres[i] = std::log(std::max(std::fabs(resid[i]), 1e-30));
  }
  double g0, g1;
  wls2(logres, g0, g1);
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double oracle = b0 + resid[i] * (std::exp(g0) / std::exp(g0 + g1 * x[i]));
    worst = std::max(worst, std::fabs(sample.adjusted[i][0] - oracle));
  }
  if (worst > 1e-10) return {false, fmt("worst |impl-oracle|=%.2e", worst)};

  // identical statistics: the adjustment must be the exact identity
  PosteriorSample same;
  same.param_names = {"p"};
  for (int i = 0; i < 20; ++i) {
    same.draws.push_back({1.0 + 0.37 * i});
    same.stats_scaled.push_back({s_obs});
    same.distances.push_back(0.0);
  }
  same.observed_scaled = {s_obs};
  same.threshold = 0.0;
  regression_adjust(same);
  if (same.adjustment_fallback || same.adjusted != same.draws)
    return {false, "identity adjustment is not exact"};
  return {true, fmt("worst |impl-oracle|=%.1e, identity exact", worst)};
}

Outcome nn_summary_cases() {
  const auto a = nn_summary({0.0, 1.0, 3.0});
  const auto b = nn_summary({0.0, 5.0});
  const bool pass = std::fabs(a[0] - 4.0 / 3.0) <= 1e-15 &&
                    std::fabs(a[1] - 1.0 / 3.0) <= 1e-15 && b[0] == 5.0 && b[1] == 0.0;
  return {pass, fmt("(0,1,3)->(%.15f,%.15f), (0,5)->(%g,%g)", a[0], a[1], b[0], b[1])};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path();
  const std::string d1 = (base / "phyloabc_accept_a").string();
  const std::string d2 = (base / "phyloabc_accept_b").string();
  fs::remove_all(d1);
  fs::remove_all(d2);
  const std::string args =
      " sim-study --models OUBM,OUBMBM --sizes 6 --reps 300 --tol 0.1 --seed 77"
      " --steps 20 --out ";
  for (const std::string& dir : {d1, d2}) {
    const std::string cmd = "\"" + g_cli_path + "\"" + args + dir + " >/dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed"};
  }
  std::map<std::string, std::string> f1, f2;
  if (!read_dir(d1, f1) || !read_dir(d2, f2)) return {false, "unexpected output layout"};
  fs::remove_all(d1);
  fs::remove_all(d2);
  if (f1.empty()) return {false, "no output files"};
  if (f1.size() != f2.size()) return {false, "file sets differ"};
  for (const auto& [name, text] : f1) {
    const auto it = f2.find(name);
    if (it == f2.end()) return {false, "missing file " + name};
    if (it->second != text) return {false, "byte mismatch in " + name};
  }
  return {true, fmt("%zu files byte-identical", f1.size())};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-cli>\n");
    return 2;
  }
  g_cli_path = argv[1];

  run_criterion(1, "cir-transition-law", 10.0, cir_transition_law);
  run_criterion(2, "ou-transition-moments", 5.0, ou_transition_moments);
  run_criterion(3, "ito-isometry", 60.0, ito_isometry);
  run_criterion(4, "gaussian-model-oracle", 300.0, gaussian_model_oracle);
  run_criterion(5, "study-recovery", 1800.0, study_recovery);
  run_criterion(6, "model-probabilities", 60.0, model_probabilities);
  run_criterion(7, "evidence-bands", 60.0, evidence_bands);
  run_criterion(8, "regression-adjustment-oracle", 60.0, regression_adjustment_oracle);
  run_criterion(9, "nn-summary", 60.0, nn_summary_cases);
  run_criterion(10, "determinism", 300.0, determinism);

  if (g_failures == 0) {
    std::printf("acceptance: all 10 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return 1;
}
