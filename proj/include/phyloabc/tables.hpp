#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phyloabc/abc.hpp"
#include "phyloabc/experiment.hpp"
#include "phyloabc/models.hpp"
#include "phyloabc/phylo.hpp"

namespace phyloabc {

std::uint64_t fnv1a64(const std::string& text);
std::string fnv1a64_hex(const std::string& text);  // 16 hex digits

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

std::string format_fixed(double v, int decimals = 3);  // table cells
std::string format_full(double v);                     // shortest round-trip

// First line of every emitted file; no timestamps anywhere so reruns with the
// same configuration are byte-identical.
std::string file_header_comment(const std::string& config_hash, std::uint64_t seed);

// Trait table: header species,y,x1,...,xk; '#' lines are comments.  Rows must
// be an exact case-sensitive bijection with the tree tips; the dataset comes
// back in tip order.  Mismatches throw with the full label diff.
TraitDataset read_trait_csv(const std::string& path, const PhyloTree& tree);
std::string trait_csv_text(const TraitDataset& data, const std::string& header_comment);

void emit_simulate_outputs(const TraitDataset& data, const ModelParams& params,
                           const PhyloTree& tree, const ExperimentConfig& cfg,
                           const std::string& config_hash, const std::string& out_dir);

// draws_name is "posterior.csv" for rejection runs, "chain.csv" for MCMC.
void emit_abc_outputs(const PosteriorSample& sample, const ExperimentConfig& cfg,
                      ModelKind kind, const std::string& config_hash,
                      const std::string& out_dir, const std::string& draws_name);

void emit_study_tables(const StudyResult& result, const ExperimentConfig& cfg,
                       const std::string& config_hash, const std::string& out_dir);

void emit_model_select_tables(const ModelSelectResult& result,
                              const ExperimentConfig& cfg,
                              const std::string& config_hash,
                              const std::string& out_dir);

}  // namespace phyloabc
