#include "phyloabc/tables.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "phyloabc/modelsel.hpp"

namespace phyloabc {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& s, const std::string& what) {
  const std::string t = trimmed(s);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("bad number for " + what + ": '" + s + "'");
  }
}

// non-finite doubles become strings so the JSON stays lossless (nlohmann
// would emit null)
json num_or_str(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json summary_to_json(const ParamSummary& s) {
  json j;
  j["mean"] = num_or_str(s.mean);
  j["sd"] = num_or_str(s.sd);
  j["q025"] = num_or_str(s.q025);
  j["q05"] = num_or_str(s.q05);
  j["q95"] = num_or_str(s.q95);
  j["q975"] = num_or_str(s.q975);
  return j;
}

json params_to_json(const ModelParams& p) {
  json j;
  j["kind"] = to_string(p.kind);
  j["n_predictors"] = p.n_predictors;
  j["alpha_y"] = p.alpha_y;
  j["y0"] = p.y0;
  j["sigma_x"] = p.sigma_x;
  if (has_ou_predictors(p.kind)) {
    j["alpha_x"] = p.alpha_x;
    j["theta_x"] = p.theta_x;
  }
  j["x_root"] = p.x_root_value();
  if (has_cir_rate(p.kind)) {
    j["alpha_tau"] = p.alpha_tau;
    j["tau_bar"] = p.tau_bar;
    j["sigma_tau"] = p.sigma_tau;
    j["tau_root"] = p.tau_root_value();
  } else {
    j["tau"] = p.tau;
  }
  j["b0"] = p.reg.b0;
  j["b"] = p.reg.b;
  j["b_pair"] = p.reg.b_pair;
  j["predictor_rho"] = p.predictor_rho;
  j["n_steps"] = p.n_steps;
  j["optimum_noise_rule"] =
      p.optimum_noise_rule == OuOptimumNoiseRule::exact ? "exact" : "linearized";
  j["interaction_own_variance"] = p.interaction_own_variance;
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::string path_join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
}

std::vector<ParamSummary> posterior_summaries(const PosteriorSample& sample) {
  const auto& post = sample.posterior();
  std::vector<ParamSummary> out;
  std::vector<double> col(post.size());
  for (std::size_t p = 0; p < sample.param_names.size(); ++p) {
    for (std::size_t i = 0; i < post.size(); ++i) col[i] = post[i][p];
    out.push_back(summarize_draws(col));
  }
  return out;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(text)));
  return std::string(buf);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string format_fixed(double v, int decimals) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return std::string(buf);
}

std::string format_full(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string file_header_comment(const std::string& config_hash, std::uint64_t seed) {
  return "# config=" + config_hash + " seed=" + std::to_string(seed) + "\n";
}

TraitDataset read_trait_csv(const std::string& path, const PhyloTree& tree) {
  const std::string text = read_text_file(path);
  std::stringstream ss(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trimmed(line);
    if (t.empty() || t[0] == '#') continue;
    rows.push_back(split_csv_line(t));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty trait table");

  const auto& header = rows.front();
  if (header.size() < 2 || trimmed(header[0]) != "species" || trimmed(header[1]) != "y")
    throw std::runtime_error(path + ": header must start with species,y");
  const std::size_t k = header.size() - 2;
  for (std::size_t j = 0; j < k; ++j) {
    const std::string want = "x" + std::to_string(j + 1);
    if (trimmed(header[2 + j]) != want)
      throw std::runtime_error(path + ": predictor column " + std::to_string(j + 1) +
                               " must be named " + want);
  }

  std::map<std::string, std::vector<double>> by_species;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw std::runtime_error(path + ": row " + std::to_string(r + 1) + " has " +
                               std::to_string(row.size()) + " fields, expected " +
                               std::to_string(header.size()));
    const std::string sp = trimmed(row[0]);
    if (by_species.count(sp))
      throw std::runtime_error(path + ": duplicate species '" + sp + "'");
    std::vector<double> vals;
    for (std::size_t c = 1; c < row.size(); ++c)
      vals.push_back(parse_double(row[c], sp + "/" + trimmed(header[c])));
    by_species.emplace(sp, std::move(vals));
  }

  // exact case-sensitive bijection with the tree tips
  const std::vector<std::string> tips = tree.tip_labels();
  std::vector<std::string> missing, extra;
  const std::set<std::string> tip_set(tips.begin(), tips.end());
  for (const auto& tip : tips)
    if (!by_species.count(tip)) missing.push_back(tip);
  for (const auto& [sp, vals] : by_species)
    if (!tip_set.count(sp)) extra.push_back(sp);
  if (!missing.empty() || !extra.empty()) {
    std::string msg = path + ": species do not match the tree tips.";
    if (!missing.empty()) {
      msg += " In tree but not in table:";
      for (const auto& s : missing) msg += " " + s;
      msg += ".";
    }
    if (!extra.empty()) {
      msg += " In table but not in tree:";
      for (const auto& s : extra) msg += " " + s;
      msg += ".";
    }
    throw std::runtime_error(msg);
  }

  TraitDataset data;
  data.species = tips;
  data.y.resize(tips.size());
  data.x.assign(k, std::vector<double>(tips.size()));
  for (std::size_t i = 0; i < tips.size(); ++i) {
    const auto& vals = by_species.at(tips[i]);
    data.y[i] = vals[0];
    for (std::size_t j = 0; j < k; ++j) data.x[j][i] = vals[j + 1];
  }
  return data;
}

std::string trait_csv_text(const TraitDataset& data, const std::string& header_comment) {
  std::string out = header_comment;
  out += "species,y";
  for (std::size_t j = 0; j < data.n_predictors(); ++j)
    out += ",x" + std::to_string(j + 1);
  out += "\n";
  for (std::size_t i = 0; i < data.n_taxa(); ++i) {
    out += data.species[i] + "," + format_full(data.y[i]);
    for (std::size_t j = 0; j < data.n_predictors(); ++j)
      out += "," + format_full(data.x[j][i]);
    out += "\n";
  }
  return out;
}

void emit_simulate_outputs(const TraitDataset& data, const ModelParams& params,
                           const PhyloTree& tree, const ExperimentConfig& cfg,
                           const std::string& config_hash, const std::string& out_dir) {
  ensure_dir(out_dir);
  write_text_file(path_join(out_dir, "traits.csv"),
                  trait_csv_text(data, file_header_comment(config_hash, cfg.seed)));
  json j;
  j["config_hash"] = config_hash;
  j["seed"] = cfg.seed;
  j["model"] = to_string(params.kind);
  j["n_taxa"] = data.n_taxa();
  j["tree"] = tree.to_newick();
  j["params"] = params_to_json(params);
  write_json_file(path_join(out_dir, "run.json"), j);
}

void emit_abc_outputs(const PosteriorSample& sample, const ExperimentConfig& cfg,
                      ModelKind kind, const std::string& config_hash,
                      const std::string& out_dir, const std::string& draws_name) {
  ensure_dir(out_dir);
  const bool adjusted = !sample.adjusted.empty();

  std::string csv = file_header_comment(config_hash, cfg.seed);
  for (std::size_t p = 0; p < sample.param_names.size(); ++p) {
    if (p) csv += ",";
    csv += sample.param_names[p];
  }
  if (adjusted)
    for (const auto& name : sample.param_names) csv += "," + name + "_adj";
  csv += ",distance\n";
  for (std::size_t i = 0; i < sample.draws.size(); ++i) {
    for (std::size_t p = 0; p < sample.param_names.size(); ++p) {
      if (p) csv += ",";
      csv += format_full(sample.draws[i][p]);
    }
    if (adjusted)
      for (std::size_t p = 0; p < sample.param_names.size(); ++p)
        csv += "," + format_full(sample.adjusted[i][p]);
    csv += "," + format_full(sample.distances[i]) + "\n";
  }
  write_text_file(path_join(out_dir, draws_name), csv);

  const std::vector<ParamSummary> summaries = posterior_summaries(sample);
  std::string table = file_header_comment(config_hash, cfg.seed);
  table += "parameter,mean,sd,q025,q05,q95,q975\n";
  for (std::size_t p = 0; p < sample.param_names.size(); ++p) {
    const auto& s = summaries[p];
    table += sample.param_names[p] + "," + format_fixed(s.mean) + "," +
             format_fixed(s.sd) + "," + format_fixed(s.q025) + "," +
             format_fixed(s.q05) + "," + format_fixed(s.q95) + "," +
             format_fixed(s.q975) + "\n";
  }
  write_text_file(path_join(out_dir, "summary.csv"), table);

  json j;
  j["config_hash"] = config_hash;
  j["seed"] = cfg.seed;
  j["model"] = to_string(kind);
  j["param_names"] = sample.param_names;
  j["accepted"] = sample.draws.size();
  j["n_replicates"] = sample.n_replicates;
  j["n_failed"] = sample.n_failed;
  j["threshold"] = num_or_str(sample.threshold);
  j["adjusted"] = adjusted;
  j["adjustment_fallback"] = sample.adjustment_fallback;
  j["warnings"] = sample.warnings;
  json sj;
  for (std::size_t p = 0; p < sample.param_names.size(); ++p)
    sj[sample.param_names[p]] = summary_to_json(summaries[p]);
  j["summaries"] = sj;
  write_json_file(path_join(out_dir, "run.json"), j);
}

void emit_study_tables(const StudyResult& result, const ExperimentConfig& cfg,
                       const std::string& config_hash, const std::string& out_dir) {
  ensure_dir(out_dir);

  // one table per model: parameter rows x taxa-size columns
  std::vector<std::string> model_order;
  for (const auto& cell : result.cells) {
    const std::string name = to_string(cell.model);
    if (std::find(model_order.begin(), model_order.end(), name) == model_order.end())
      model_order.push_back(name);
  }
  for (const auto& model_name : model_order) {
    std::vector<const StudyCell*> cells;
    for (const auto& cell : result.cells)
      if (to_string(cell.model) == model_name) cells.push_back(&cell);

    std::string csv = file_header_comment(config_hash, cfg.seed);
    csv += "parameter,metric";
    for (const auto* cell : cells) csv += ",n" + std::to_string(cell->n_taxa);
    csv += "\n";
    const auto& names = cells.front()->param_names;
    for (std::size_t p = 0; p < names.size(); ++p) {
      const char* metrics[] = {"truth", "bias", "sd", "q05", "q95"};
      for (const char* metric : metrics) {
        csv += names[p];
        csv += ",";
        csv += metric;
        for (const auto* cell : cells) {
          double v = 0.0;
          const ParamSummary& s = cell->summaries[p];
          const std::string m(metric);
          if (m == "truth") v = cell->truth[p];
          else if (m == "bias") v = std::fabs(s.mean - cell->truth[p]);
          else if (m == "sd") v = s.sd;
          else if (m == "q05") v = s.q05;
          else v = s.q95;
          csv += "," + format_fixed(v);
        }
        csv += "\n";
      }
    }
    write_text_file(path_join(out_dir, "study_" + model_name + ".csv"), csv);
  }

  json manifest;
  manifest["config_hash"] = config_hash;
  manifest["seed"] = cfg.seed;
  manifest["n_reps"] = cfg.n_reps;
  manifest["tolerance"] = cfg.tolerance;
  manifest["prior_family"] = to_string(cfg.prior_family);
  manifest["total_replicates"] = result.total_replicates;
  manifest["config"] = cfg.canonical_text();
  json cells = json::array();
  for (const auto& cell : result.cells) {
    json c;
    c["model"] = to_string(cell.model);
    c["n_taxa"] = cell.n_taxa;
    c["accepted"] = cell.n_accepted;
    c["failed"] = cell.n_failed;
    c["warnings"] = cell.warnings;
    json truth, summaries;
    for (std::size_t p = 0; p < cell.param_names.size(); ++p) {
      truth[cell.param_names[p]] = cell.truth[p];
      summaries[cell.param_names[p]] = summary_to_json(cell.summaries[p]);
    }
    c["truth"] = truth;
    c["summaries"] = summaries;
    cells.push_back(c);
  }
  manifest["cells"] = cells;
  write_json_file(path_join(out_dir, "manifest.json"), manifest);
}

void emit_model_select_tables(const ModelSelectResult& result,
                              const ExperimentConfig& cfg,
                              const std::string& config_hash,
                              const std::string& out_dir) {
  ensure_dir(out_dir);
  const ModelComparison& cmp = result.comparison;
  const std::string header = file_header_comment(config_hash, cfg.seed);

  std::string probs = header + "model,accepted,probability\n";
  for (std::size_t i = 0; i < cmp.model_names.size(); ++i)
    probs += cmp.model_names[i] + "," + std::to_string(cmp.accepted_counts[i]) +
             "," + format_fixed(cmp.probabilities[i]) + "\n";
  write_text_file(path_join(out_dir, "model_probs.csv"), probs);

  std::string bf = header + "model";
  for (const auto& name : cmp.model_names) bf += "," + name;
  bf += "\n";
  for (std::size_t i = 0; i < cmp.model_names.size(); ++i) {
    bf += cmp.model_names[i];
    for (std::size_t j = 0; j < cmp.model_names.size(); ++j)
      bf += "," + format_fixed(cmp.bayes_factors[i][j]);
    bf += "\n";
  }
  write_text_file(path_join(out_dir, "bf_matrix.csv"), bf);

  std::string ranking = header + "rank,model,accepted\n";
  for (std::size_t r = 0; r < cmp.ranking.size(); ++r) {
    const auto it = std::find(cmp.model_names.begin(), cmp.model_names.end(),
                              cmp.ranking[r]);
    const std::size_t i =
        static_cast<std::size_t>(it - cmp.model_names.begin());
    ranking += std::to_string(r + 1) + "," + cmp.ranking[r] + "," +
               std::to_string(cmp.accepted_counts[i]) + "\n";
  }
  write_text_file(path_join(out_dir, "ranking.csv"), ranking);

  std::string est = header + "model,parameter,mean,sd,q025,q05,q95,q975\n";
  std::vector<std::vector<ParamSummary>> summaries;
  for (std::size_t m = 0; m < result.per_model.size(); ++m) {
    const PosteriorSample& sample = result.per_model[m];
    summaries.push_back(posterior_summaries(sample));
    for (std::size_t p = 0; p < sample.param_names.size(); ++p) {
      const auto& s = summaries[m][p];
      est += result.model_names[m] + "," + sample.param_names[p] + "," +
             format_fixed(s.mean) + "," + format_fixed(s.sd) + "," +
             format_fixed(s.q025) + "," + format_fixed(s.q05) + "," +
             format_fixed(s.q95) + "," + format_fixed(s.q975) + "\n";
    }
  }
  write_text_file(path_join(out_dir, "estimates.csv"), est);

  // regression coefficients with 95% intervals; OLS row for reference
  std::string coef = header + "source,coefficient,estimate,lo95,hi95\n";
  for (std::size_t c = 0; c < result.ols.coef.size(); ++c) {
    const std::string name = "b" + std::to_string(c);
    const double b = result.ols.coef[c];
    const double half = 1.96 * result.ols.se[c];
    coef += "ols," + name + "," + format_fixed(b) + "," + format_fixed(b - half) +
            "," + format_fixed(b + half) + "\n";
  }
  for (std::size_t m = 0; m < result.per_model.size(); ++m) {
    const PosteriorSample& sample = result.per_model[m];
    for (std::size_t p = 0; p < sample.param_names.size(); ++p) {
      const std::string& name = sample.param_names[p];
      if (name.size() < 2 || name[0] != 'b' ||
          !std::isdigit(static_cast<unsigned char>(name[1])))
        continue;
      const auto& s = summaries[m][p];
      coef += result.model_names[m] + "," + name + "," + format_fixed(s.mean) +
              "," + format_fixed(s.q025) + "," + format_fixed(s.q975) + "\n";
    }
  }
  write_text_file(path_join(out_dir, "coefficients.csv"), coef);

  json j;
  j["config_hash"] = config_hash;
  j["seed"] = cfg.seed;
  j["n_reps"] = cfg.n_reps;
  j["tolerance"] = cfg.tolerance;
  j["prior_family"] = to_string(cfg.prior_family);
  j["model_names"] = cmp.model_names;
  j["accepted_counts"] = cmp.accepted_counts;
  j["probabilities"] = cmp.probabilities;
  j["target_count"] = cmp.target_count;
  j["cutoff_distance"] = num_or_str(cmp.cutoff_distance);
  j["ranking"] = cmp.ranking;
  j["ranking_ties"] = cmp.ranking_ties;
  j["warnings"] = result.warnings;
  json bfj = json::array();
  for (const auto& row : cmp.bayes_factors) {
    json r = json::array();
    for (double v : row) r.push_back(num_or_str(v));
    bfj.push_back(r);
  }
  j["bayes_factors"] = bfj;
  // evidence grade of the top model against each rival, where defined
  if (!cmp.ranking.empty()) {
    const auto best_it = std::find(cmp.model_names.begin(), cmp.model_names.end(),
                                   cmp.ranking.front());
    const std::size_t best =
        static_cast<std::size_t>(best_it - cmp.model_names.begin());
    json ev;
    for (std::size_t m = 0; m < cmp.model_names.size(); ++m) {
      if (m == best) continue;
      const double K = cmp.bayes_factors[best][m];
      if (std::isfinite(K) && K >= 1.0)
        ev[cmp.model_names[m]] = kass_raftery_label(K);
      else
        ev[cmp.model_names[m]] = num_or_str(K);
    }
    j["evidence_vs_best"] = ev;
  }
  json ols;
  ols["coef"] = result.ols.coef;
  ols["se"] = result.ols.se;
  j["ols"] = ols;
  json est_j;
  for (std::size_t m = 0; m < result.per_model.size(); ++m) {
    json mj;
    const PosteriorSample& sample = result.per_model[m];
    for (std::size_t p = 0; p < sample.param_names.size(); ++p)
      mj[sample.param_names[p]] = summary_to_json(summaries[m][p]);
    json info;
    info["summaries"] = mj;
    info["accepted"] = sample.draws.size();
    info["threshold"] = num_or_str(sample.threshold);
    info["n_failed"] = sample.n_failed;
    info["warnings"] = sample.warnings;
    est_j[result.model_names[m]] = info;
  }
  j["models"] = est_j;
  write_json_file(path_join(out_dir, "run.json"), j);
}

}  // namespace phyloabc
