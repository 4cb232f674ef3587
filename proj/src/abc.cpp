#include "phyloabc/abc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "linalg.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace phyloabc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double median_sorted_copy(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> mean_and_var(const std::vector<double>& d) {
  const double n = static_cast<double>(d.size());
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  var /= (n - 1.0);
  return {mean, var};
}

}  // namespace

std::vector<double> nn_summary(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("nn_summary: need at least 2 values");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = kInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double gap = std::fabs(values[i] - values[j]);
      if (gap < best) best = gap;  // strict: ties keep the smallest index
    }
    d[i] = best;
  }
  return mean_and_var(d);
}

std::vector<double> summary_stats(const TraitDataset& data, bool joint) {
  const std::size_t n = data.n_taxa();
  if (n < 2) throw std::invalid_argument("summary_stats: need at least 2 taxa");
  for (const auto& col : data.x)
    if (col.size() != n) throw std::invalid_argument("summary_stats: ragged predictor column");
  if (!joint) {
    std::vector<double> out = nn_summary(data.y);
    for (const auto& col : data.x) {
      const auto s = nn_summary(col);
      out.insert(out.end(), s.begin(), s.end());
    }
    return out;
  }
  // nearest neighbour in the joint trait space
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = kInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double sq = (data.y[i] - data.y[j]) * (data.y[i] - data.y[j]);
      for (const auto& col : data.x) sq += (col[i] - col[j]) * (col[i] - col[j]);
      const double gap = std::sqrt(sq);
      if (gap < best) best = gap;
    }
    d[i] = best;
  }
  return mean_and_var(d);
}

bool ScaleInfo::any_degenerate() const {
  return std::any_of(degenerate.begin(), degenerate.end(), [](bool b) { return b; });
}

ScaleInfo mad_scales(const std::vector<std::vector<double>>& stats) {
  if (stats.empty()) throw std::invalid_argument("mad_scales: no rows");
  const std::size_t dim = stats.front().size();
  ScaleInfo info;
  info.scale.assign(dim, 1.0);
  info.degenerate.assign(dim, false);
  std::vector<double> col(stats.size());
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t r = 0; r < stats.size(); ++r) col[r] = stats[r][c];
    const double med = median_sorted_copy(col);
    for (double& v : col) v = std::fabs(v - med);
    const double mad = median_sorted_copy(col);
    const double s = 1.4826 * mad;
    if (s > 0.0 && std::isfinite(s)) {
      info.scale[c] = s;
    } else {
      info.degenerate[c] = true;  // constant column: fall back to unit scale
    }
  }
  return info;
}

double scaled_distance(const std::vector<double>& a, const std::vector<double>& b,
                       const std::vector<double>& scale) {
  if (a.size() != b.size() || a.size() != scale.size())
    throw std::invalid_argument("scaled_distance: dimension mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double z = (a[i] - b[i]) / scale[i];
    if (!std::isfinite(z)) return kInf;
    sq += z * z;
  }
  return std::sqrt(sq);
}

std::size_t ReplicateTable::n_failed() const {
  return static_cast<std::size_t>(std::count(ok.begin(), ok.end(), static_cast<char>(0)));
}

ReplicateTable run_replicates(const AbcContext& ctx, std::size_t n_reps,
                              std::uint64_t seed, std::uint64_t stream_offset,
                              bool parallel) {
  if (ctx.tree == nullptr) throw std::invalid_argument("run_replicates: no tree");
  if (n_reps == 0) throw std::invalid_argument("run_replicates: n_reps must be > 0");
  ReplicateTable table;
  table.params.resize(n_reps);
  table.stats.resize(n_reps);
  table.ok.assign(n_reps, 0);

  const auto body = [&](std::size_t i) {
    RngStream rng(seed, stream_offset + i);
    table.params[i] = ctx.priors.sample(rng);
    try {
      const ModelParams p = params_from_vector(ctx.kind, table.params[i], ctx.base);
      const TraitDataset sim = simulate_tips(*ctx.tree, p, rng);
      table.stats[i] = summary_stats(sim, ctx.joint_stats);
      bool finite = true;
      for (double v : table.stats[i]) finite = finite && std::isfinite(v);
      table.ok[i] = finite ? 1 : 0;
    } catch (const std::exception&) {
      table.ok[i] = 0;
    }
  };

  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (long long i = 0; i < static_cast<long long>(n_reps); ++i)
      body(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n_reps; ++i) body(i);
  }
  return table;
}

std::vector<double> table_distances(const ReplicateTable& table,
                                    const std::vector<double>& observed_stats,
                                    const std::vector<double>& scale) {
  const std::size_t n = table.params.size();
  std::vector<double> dist(n, kInf);
  for (std::size_t i = 0; i < n; ++i)
    if (table.ok[i])
      dist[i] = scaled_distance(table.stats[i], observed_stats, scale);
  return dist;
}

PosteriorSample accept_from_table(const std::vector<std::string>& param_names,
                                  const ReplicateTable& table,
                                  const std::vector<double>& observed_stats,
                                  const ScaleInfo& scales, double tolerance,
                                  std::optional<double> fixed_epsilon) {
  if (!fixed_epsilon && !(tolerance > 0.0 && tolerance <= 1.0))
    throw std::invalid_argument("accept_from_table: tolerance must be in (0,1]");
  const std::size_t n_reps = table.params.size();
  if (n_reps == 0) throw std::invalid_argument("accept_from_table: empty table");

  PosteriorSample sample;
  sample.param_names = param_names;
  sample.n_replicates = n_reps;
  sample.n_failed = table.n_failed();
  if (scales.any_degenerate())
    sample.warnings.push_back("constant summary-statistic column; unit scale used");

  sample.observed_scaled.resize(observed_stats.size());
  for (std::size_t c = 0; c < observed_stats.size(); ++c)
    sample.observed_scaled[c] = observed_stats[c] / scales.scale[c];

  const std::vector<double> dist = table_distances(table, observed_stats, scales.scale);

  std::vector<std::size_t> order(n_reps);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
  });

  std::size_t n_accept;
  if (fixed_epsilon) {
    n_accept = 0;
    while (n_accept < n_reps && dist[order[n_accept]] <= *fixed_epsilon) ++n_accept;
    if (n_accept == 0)
      throw std::runtime_error(
          "accept_from_table: no replicate within the fixed distance cutoff");
  } else {
    n_accept = static_cast<std::size_t>(
        std::ceil(tolerance * static_cast<double>(n_reps)));
    n_accept = std::min(n_accept, n_reps);
  }

  for (std::size_t r = 0; r < n_accept; ++r) {
    const std::size_t i = order[r];
    sample.draws.push_back(table.params[i]);
    sample.distances.push_back(dist[i]);
    std::vector<double> row(observed_stats.size(), kInf);
    if (table.ok[i])
      for (std::size_t c = 0; c < row.size(); ++c)
        row[c] = table.stats[i][c] / scales.scale[c];
    sample.stats_scaled.push_back(std::move(row));
  }
  sample.threshold = sample.distances.back();
  if (!std::isfinite(sample.threshold))
    sample.warnings.push_back("accepted set includes failed replicates (infinite distance)");
  return sample;
}

PosteriorSample abc_reject(const AbcContext& ctx,
                           const std::vector<double>& observed_stats,
                           std::size_t n_reps, double tolerance,
                           std::uint64_t seed,
                           std::optional<double> fixed_epsilon, bool parallel) {
  if (!fixed_epsilon && !(tolerance > 0.0 && tolerance <= 1.0))
    throw std::invalid_argument("abc_reject: tolerance must be in (0,1]");
  const ReplicateTable table = run_replicates(ctx, n_reps, seed, 0, parallel);

  std::vector<std::vector<double>> good;
  good.reserve(n_reps);
  for (std::size_t i = 0; i < n_reps; ++i)
    if (table.ok[i]) good.push_back(table.stats[i]);
  if (good.empty()) throw std::runtime_error("abc_reject: every replicate failed");
  if (good.front().size() != observed_stats.size())
    throw std::invalid_argument("abc_reject: observed stats dimension mismatch");
  const ScaleInfo scales = mad_scales(good);
  return accept_from_table(ctx.priors.names, table, observed_stats, scales,
                           tolerance, fixed_epsilon);
}

void regression_adjust(PosteriorSample& sample, bool het_correction) {
  const std::size_t m = sample.draws.size();
  if (m == 0) return;
  const std::size_t s_dim = sample.observed_scaled.size();
  const std::size_t n_par = sample.param_names.size();
  sample.adjusted.clear();
  sample.adjustment_fallback = false;

  if (!std::isfinite(sample.threshold)) {
    sample.adjustment_fallback = true;
    sample.warnings.push_back("regression adjustment skipped: non-finite threshold");
    return;
  }

  // Epanechnikov kernel on distance; all-zero weights degrade to uniform
  std::vector<double> w(m, 1.0);
  if (sample.threshold > 0.0) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double u = sample.distances[i] / sample.threshold;
      w[i] = std::max(0.0, 1.0 - u * u);
      total += w[i];
    }
    if (!(total > 0.0)) w.assign(m, 1.0);
  }

  // design [1, s - s_obs], dropping columns with no variation
  std::vector<std::size_t> cols;  // indices into stats for non-constant columns
  for (std::size_t c = 0; c < s_dim; ++c) {
    double maxabs = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      maxabs = std::max(maxabs,
                        std::fabs(sample.stats_scaled[i][c] - sample.observed_scaled[c]));
    if (maxabs > 1e-12) cols.push_back(c);
  }
  if (cols.empty()) {
    // no stat varies around the observed point, so the intercept-only fit
    // returns each draw unchanged; take that path exactly
    sample.adjusted = sample.draws;
    return;
  }
  const std::size_t p = 1 + cols.size();
  auto design = [&](std::size_t row, std::size_t col) {
    return col == 0 ? 1.0
                    : sample.stats_scaled[row][cols[col - 1]] -
                          sample.observed_scaled[cols[col - 1]];
  };

  std::vector<double> xtwx(p * p, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b)
        xtwx[a * p + b] += w[i] * design(i, a) * design(i, b);

  // weighted least squares for one response; returns empty on rank deficiency
  auto wls = [&](const std::vector<double>& y) -> std::vector<double> {
    std::vector<double> a = xtwx;
    std::vector<double> rhs(p, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t c = 0; c < p; ++c) rhs[c] += w[i] * design(i, c) * y[i];
    if (!detail::solve_inplace(a, rhs, p)) return {};
    return rhs;
  };

  std::vector<std::vector<double>> adjusted(m, std::vector<double>(n_par, 0.0));
  std::vector<double> y(m), resid(m), logres(m);
  for (std::size_t j = 0; j < n_par; ++j) {
    for (std::size_t i = 0; i < m; ++i) y[i] = sample.draws[i][j];
    const std::vector<double> beta = wls(y);
    if (beta.empty()) {
      sample.adjusted.clear();
      sample.adjustment_fallback = true;
      sample.warnings.push_back("regression adjustment fell back to raw draws (rank-deficient design)");
      return;
    }
    for (std::size_t i = 0; i < m; ++i) {
      double fitted = 0.0;
      for (std::size_t c = 0; c < p; ++c) fitted += beta[c] * design(i, c);
      resid[i] = y[i] - fitted;
    }
    const double at_obs = beta[0];  // design is centered on the observed stats
    if (!het_correction) {
      for (std::size_t i = 0; i < m; ++i) adjusted[i][j] = at_obs + resid[i];
      continue;
    }
    for (std::size_t i = 0; i < m; ++i)
      logres[i] = std::log(std::max(std::fabs(resid[i]), 1e-30));
    const std::vector<double> gamma = wls(logres);
    if (gamma.empty()) {
      sample.adjusted.clear();
      sample.adjustment_fallback = true;
      sample.warnings.push_back("regression adjustment fell back to raw draws (rank-deficient design)");
      return;
    }
    const double sd_at_obs = std::exp(gamma[0]);
    for (std::size_t i = 0; i < m; ++i) {
      double fit = 0.0;
      for (std::size_t c = 0; c < p; ++c) fit += gamma[c] * design(i, c);
      adjusted[i][j] = at_obs + resid[i] * (sd_at_obs / std::exp(fit));
    }
  }
  sample.adjusted = std::move(adjusted);
}

namespace {

double reflect_into(double x, double lo, double hi) {
  const bool flo = std::isfinite(lo), fhi = std::isfinite(hi);
  if (!flo && !fhi) return x;
  if (flo && !fhi) return lo + std::fabs(x - lo);
  if (!flo && fhi) return hi - std::fabs(hi - x);
  const double span = hi - lo;
  double y = std::fmod(x - lo, 2.0 * span);
  if (y < 0.0) y += 2.0 * span;
  if (y > span) y = 2.0 * span - y;
  return lo + y;
}

}  // namespace

PosteriorSample abc_mcmc(const AbcContext& ctx,
                         const std::vector<double>& observed_stats,
                         const McmcOptions& opt, std::uint64_t seed) {
  if (ctx.tree == nullptr) throw std::invalid_argument("abc_mcmc: no tree");
  if (opt.chain_length == 0 || opt.burn_in >= opt.chain_length)
    throw std::invalid_argument("abc_mcmc: need burn_in < chain_length");
  if (!(opt.delta > 0.0)) throw std::invalid_argument("abc_mcmc: delta must be > 0");

  std::vector<double> scale(observed_stats.size(), 1.0);
  if (opt.pilot > 0) {
    const ReplicateTable pilot = run_replicates(ctx, opt.pilot, seed, 1u << 20, true);
    std::vector<std::vector<double>> good;
    for (std::size_t i = 0; i < pilot.stats.size(); ++i)
      if (pilot.ok[i]) good.push_back(pilot.stats[i]);
    if (good.empty()) throw std::runtime_error("abc_mcmc: pilot produced no usable replicates");
    scale = mad_scales(good).scale;
  }

  RngStream rng(seed, 0);
  const std::size_t n_par = ctx.priors.size();
  std::vector<double> prop_sd(n_par);
  for (std::size_t j = 0; j < n_par; ++j)
    prop_sd[j] = opt.proposal_frac * ctx.priors.priors[j].sd();

  const auto simulate_distance = [&](const std::vector<double>& theta) -> double {
    try {
      const ModelParams p = params_from_vector(ctx.kind, theta, ctx.base);
      const TraitDataset sim = simulate_tips(*ctx.tree, p, rng);
      return scaled_distance(summary_stats(sim, ctx.joint_stats), observed_stats, scale);
    } catch (const std::exception&) {
      return kInf;
    }
  };

  // initial state: prior draws until one lands inside the ball
  std::vector<double> state;
  double state_dist = kInf;
  std::size_t tries = 0;
  while (tries < opt.max_init_tries) {
    ++tries;
    std::vector<double> theta = ctx.priors.sample(rng);
    const double d = simulate_distance(theta);
    if (d < opt.delta) {
      state = std::move(theta);
      state_dist = d;
      break;
    }
  }
  if (state.empty())
    throw std::runtime_error("abc_mcmc: no initial state within delta after " +
                             std::to_string(opt.max_init_tries) + " prior draws");

  PosteriorSample sample;
  sample.param_names = ctx.priors.names;
  sample.n_replicates = opt.chain_length;
  sample.threshold = opt.delta;
  double state_logp = ctx.priors.log_pdf(state);

  std::vector<double> proposal(n_par);
  for (std::size_t it = 0; it < opt.chain_length; ++it) {
    for (std::size_t j = 0; j < n_par; ++j) {
      const double step = state[j] + prop_sd[j] * rng.normal();
      proposal[j] = reflect_into(step, ctx.priors.priors[j].support_lo(),
                                 ctx.priors.priors[j].support_hi());
    }
    const double prop_logp = ctx.priors.log_pdf(proposal);
    const double d = simulate_distance(proposal);
    const double u = rng.uniform();
    if (d < opt.delta && std::log(u) <= prop_logp - state_logp) {
      state = proposal;
      state_dist = d;
      state_logp = prop_logp;
    }
    if (it >= opt.burn_in) {
      sample.draws.push_back(state);
      sample.distances.push_back(state_dist);
    }
  }
  return sample;
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p must be in [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

ParamSummary summarize_draws(const std::vector<double>& draws) {
  if (draws.empty()) throw std::invalid_argument("summarize_draws: empty sample");
  double mean = 0.0;
  for (double v : draws) mean += v;
  mean /= static_cast<double>(draws.size());
  double var = 0.0;
  for (double v : draws) var += (v - mean) * (v - mean);
  var = draws.size() > 1 ? var / static_cast<double>(draws.size() - 1) : 0.0;
  return {mean,
          std::sqrt(var),
          quantile_type7(draws, 0.025),
          quantile_type7(draws, 0.05),
          quantile_type7(draws, 0.95),
          quantile_type7(draws, 0.975)};
}

}  // namespace phyloabc
