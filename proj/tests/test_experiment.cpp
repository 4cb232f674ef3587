#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "phyloabc/cli_config.hpp"
#include "phyloabc/experiment.hpp"
#include "phyloabc/tables.hpp"

using namespace phyloabc;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("phyloabc_test_" + tag);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("yule trees are ultrametric with unit height") {
  for (std::size_t n : {2, 5, 17}) {
    RngStream rng(400, n);
    const PhyloTree tree = generate_yule_tree(n, rng);
    CHECK(tree.n_tips() == n);
    CHECK(tree.height() == doctest::Approx(1.0).epsilon(1e-12));
    const auto depth = tree.depths();
    for (int tip : tree.tips())
      CHECK(depth[static_cast<std::size_t>(tip)] == doctest::Approx(1.0).epsilon(1e-9));
    // labels t1..tn in tip order
    for (std::size_t i = 0; i < n; ++i)
      CHECK(tree.node(tree.tips()[i]).label == "t" + std::to_string(i + 1));
  }
  RngStream r1(400, 5), r2(400, 5);
  CHECK(generate_yule_tree(5, r1).to_newick() == generate_yule_tree(5, r2).to_newick());
  RngStream r3(401);
  CHECK_THROWS(generate_yule_tree(1, r3));
}

TEST_CASE("prior family names round trip") {
  for (PriorFamily f : {PriorFamily::study_uniform, PriorFamily::study_informative,
                        PriorFamily::empirical}) {
    CHECK(prior_family_from_string(to_string(f)) == f);
  }
  CHECK_THROWS(prior_family_from_string("flat"));
}

TEST_CASE("canonical config text is stable and injective on the knobs") {
  ExperimentConfig a;
  const std::string ta = a.canonical_text();
  CHECK(ta == a.canonical_text());
  CHECK(ta.find("seed=1") != std::string::npos);
  CHECK(ta.find("n_reps=5000") != std::string::npos);

  ExperimentConfig b = a;
  b.seed = 2;
  CHECK(b.canonical_text() != ta);
  ExperimentConfig c = a;
  c.tolerance = 0.2;
  CHECK(c.canonical_text() != ta);
  ExperimentConfig d = a;
  d.truth_overrides.emplace_back("alpha_y", 0.2);
  CHECK(d.canonical_text() != ta);
  // the execution mode is not part of the result identity
  ExperimentConfig e = a;
  e.parallel = !a.parallel;
  CHECK(e.canonical_text() == ta);
}

TEST_CASE("full-scale switch") {
  ExperimentConfig cfg;
  cfg.full = true;
  cfg.apply_full_scale();
  CHECK(cfg.n_reps == 50000);
  CHECK(cfg.taxa_sizes == std::vector<std::size_t>{10, 20, 50, 100});
}

TEST_CASE("config-derived parameters and priors") {
  ExperimentConfig cfg;
  cfg.y0 = 3.0;
  cfg.n_steps = 17;
  cfg.predictor_rho = 0.4;
  const ModelParams base = base_params_from_config(cfg, ModelKind::OUOUCIR);
  CHECK(base.kind == ModelKind::OUOUCIR);
  CHECK(base.y0 == 3.0);
  CHECK(base.n_steps == 17);
  CHECK(base.predictor_rho == 0.4);
  CHECK(base.n_predictors == 2);

  const PriorSet flat = priors_from_config(cfg, ModelKind::OUBM);
  CHECK(flat.names == model_param_names(ModelKind::OUBM, 2));

  cfg.prior_overrides.emplace_back("alpha_y", "uniform(0,0.9)");
  const PriorSet edited = priors_from_config(cfg, ModelKind::OUBM);
  CHECK(edited.priors[0].text() == "uniform(0,0.9)");

  cfg.prior_family = PriorFamily::empirical;
  CHECK_THROWS(priors_from_config(cfg, ModelKind::OUBM));

  ExperimentConfig tcfg;
  tcfg.truth_overrides.emplace_back("b1", 0.9);
  const auto truth = truth_from_config(tcfg, ModelKind::OUBM);
  const auto names = model_param_names(ModelKind::OUBM, 2);
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == "b1") CHECK(truth[i] == 0.9);
}

TEST_CASE("hash and formatting helpers") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64_hex("").size() == 16);
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(format_fixed(1.23456) == "1.235");
  CHECK(format_fixed(-0.5, 2) == "-0.50");
  CHECK(format_fixed(std::numeric_limits<double>::infinity()) == "inf");
  const std::string full = format_full(0.1);
  CHECK(std::stod(full) == 0.1);
  CHECK(format_full(3.0) == "3");
  CHECK(file_header_comment("abc123", 7) == "# config=abc123 seed=7\n");
}

TEST_CASE("trait tables round trip through files") {
  const PhyloTree tree = PhyloTree::from_newick("((A:1,B:1):0.5,C:1.5);");
  TraitDataset data;
  data.species = {"A", "B", "C"};
  data.y = {0.1234567890123456, -2.5, 3.0};
  data.x = {{1.0, 2.0, 3.0}, {0.5, 0.25, 1.0 / 3.0}};
  TempDir dir("traits");
  const std::string path = (dir.path / "traits.csv").string();
  write_text_file(path, trait_csv_text(data, "# config=deadbeef seed=1\n"));
  const TraitDataset back = read_trait_csv(path, tree);
  CHECK(back.species == data.species);
  for (std::size_t i = 0; i < 3; ++i) CHECK(back.y[i] == data.y[i]);
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 3; ++i) CHECK(back.x[j][i] == data.x[j][i]);
}

TEST_CASE("trait table rows are reordered into tip order") {
  const PhyloTree tree = PhyloTree::from_newick("((A:1,B:1):0.5,C:1.5);");
  TempDir dir("reorder");
  const std::string path = (dir.path / "t.csv").string();
  write_text_file(path, "species,y,x1\nC,3,30\nA,1,10\nB,2,20\n");
  const TraitDataset data = read_trait_csv(path, tree);
  CHECK(data.species == std::vector<std::string>{"A", "B", "C"});
  CHECK(data.y == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(data.x[0] == std::vector<double>{10.0, 20.0, 30.0});
}

TEST_CASE("trait table mismatches report the full label diff") {
  const PhyloTree tree = PhyloTree::from_newick("((A:1,B:1):0.5,C:1.5);");
  TempDir dir("diff");
  const std::string path = (dir.path / "t.csv").string();
  write_text_file(path, "species,y,x1\nA,1,10\nD,2,20\n");
  try {
    read_trait_csv(path, tree);
    FAIL("expected a label mismatch error");
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    CHECK(msg.find("B") != std::string::npos);
    CHECK(msg.find("C") != std::string::npos);
    CHECK(msg.find("D") != std::string::npos);
  }

  write_text_file(path, "species,y,x1\nA,1,10\nB,2,20\nC,3,30\nA,4,40\n");
  CHECK_THROWS(read_trait_csv(path, tree));  // duplicate species
  write_text_file(path, "name,y,x1\nA,1,10\nB,2,20\nC,3,30\n");
  CHECK_THROWS(read_trait_csv(path, tree));  // wrong header
  write_text_file(path, "species,y,x1\nA,1,10\nB,oops,20\nC,3,30\n");
  CHECK_THROWS(read_trait_csv(path, tree));  // bad number
}

TEST_CASE("simulation study runs deterministically") {
  ExperimentConfig cfg;
  cfg.models = {ModelKind::OUBM};
  cfg.taxa_sizes = {6};
  cfg.n_reps = 200;
  cfg.tolerance = 0.1;
  cfg.seed = 5;
  cfg.n_steps = 10;
  const StudyResult r1 = run_sim_study(cfg);
  REQUIRE(r1.cells.size() == 1);
  const StudyCell& cell = r1.cells[0];
  CHECK(cell.n_taxa == 6);
  CHECK(cell.n_accepted == 20);
  CHECK(cell.param_names == model_param_names(ModelKind::OUBM, 2));
  REQUIRE(cell.summaries.size() == cell.truth.size());
  for (const auto& s : cell.summaries) {
    CHECK(std::isfinite(s.mean));
    CHECK(s.q05 <= s.q95);
  }
  CHECK(r1.total_replicates == 200);

  const StudyResult r2 = run_sim_study(cfg);
  REQUIRE(r2.cells.size() == 1);
  for (std::size_t p = 0; p < cell.summaries.size(); ++p) {
    CHECK(r2.cells[0].summaries[p].mean == cell.summaries[p].mean);
    CHECK(r2.cells[0].summaries[p].q95 == cell.summaries[p].q95);
  }

  // regression adjustment changes the summaries but not the bookkeeping
  ExperimentConfig adj = cfg;
  adj.adjust = true;
  const StudyResult r3 = run_sim_study(adj);
  CHECK(r3.cells[0].n_accepted == 20);
}

TEST_CASE("study tree override collapses the size grid") {
  ExperimentConfig cfg;
  cfg.models = {ModelKind::OUBM};
  cfg.taxa_sizes = {10, 20};
  cfg.n_reps = 50;
  cfg.seed = 6;
  cfg.n_steps = 10;
  cfg.tree_newick = "((A:1,B:1):0.5,(C:0.75,D:0.75):0.75);";
  const StudyResult r = run_sim_study(cfg);
  REQUIRE(r.cells.size() == 1);
  CHECK(r.cells[0].n_taxa == 4);
}

TEST_CASE("model selection on shared replicate tables") {
  RngStream tree_rng(402);
  const PhyloTree tree = generate_yule_tree(8, tree_rng);
  ExperimentConfig truth_cfg;
  truth_cfg.n_steps = 10;
  ModelParams truth = base_params_from_config(truth_cfg, ModelKind::OUBM);
  truth.reg.b = {0.5, 0.5};
  RngStream data_rng(403);
  const TraitDataset data = simulate_tips(tree, truth, data_rng);

  ExperimentConfig cfg;
  cfg.models = {ModelKind::OUBM, ModelKind::OUBMBM};
  cfg.n_reps = 150;
  cfg.tolerance = 0.2;
  cfg.seed = 9;
  cfg.n_steps = 10;
  cfg.prior_family = PriorFamily::study_uniform;
  const ModelSelectResult r = run_model_select(tree, data, cfg);
  CHECK(r.model_names == std::vector<std::string>{"OUBM", "OUBMBM"});
  std::size_t total = 0;
  for (std::size_t c : r.comparison.accepted_counts) total += c;
  CHECK(total == r.comparison.target_count);
  CHECK(r.comparison.target_count == 60);  // ceil(0.2 * 300)
  REQUIRE(r.per_model.size() == 2);
  for (const auto& s : r.per_model) CHECK(s.draws.size() == 30);
  CHECK(r.ols.coef.size() == 3);

  const ModelSelectResult again = run_model_select(tree, data, cfg);
  CHECK(again.comparison.accepted_counts == r.comparison.accepted_counts);
  CHECK(again.per_model[0].draws == r.per_model[0].draws);
}

TEST_CASE("emitted study tables are byte-identical across reruns") {
  ExperimentConfig cfg;
  cfg.models = {ModelKind::OUBM};
  cfg.taxa_sizes = {5};
  cfg.n_reps = 60;
  cfg.seed = 8;
  cfg.n_steps = 10;
  const std::string hash = fnv1a64_hex(cfg.canonical_text());
  TempDir d1("emit1"), d2("emit2");
  emit_study_tables(run_sim_study(cfg), cfg, hash, d1.path.string());
  emit_study_tables(run_sim_study(cfg), cfg, hash, d2.path.string());
  int n_files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(d1.path)) {
    const auto name = entry.path().filename();
    ++n_files;
    CHECK(read_text_file((d2.path / name).string()) ==
          read_text_file(entry.path().string()));
  }
  CHECK(n_files == 2);  // study_OUBM.csv + manifest.json
  CHECK(read_text_file((d1.path / "study_OUBM.csv").string()).rfind("# config=", 0) == 0);
}

TEST_CASE("config files expand into argument tokens") {
  TempDir dir("cfg");
  const std::string cfg = (dir.path / "run.cfg").string();
  write_text_file(cfg,
                  "# study setup\n"
                  "seed = 21\n"
                  "\n"
                  "models=OUBM,OUBMCIR   # two candidates\n"
                  "--reps=400\n"
                  "truth=b0=0.25\n"
                  "truth=b1=0.5\n");

  SUBCASE("no config flag leaves arguments alone") {
    const std::vector<std::string> argv{"sim-study", "--seed", "3"};
    CHECK(expand_config_args(argv) == argv);
  }
  SUBCASE("keys become --key=value in file order") {
    const auto out = expand_config_args({"sim-study", "--config", cfg});
    const std::vector<std::string> want{"sim-study",         "--seed=21",
                                        "--models=OUBM,OUBMCIR", "--reps=400",
                                        "--truth=b0=0.25",   "--truth=b1=0.5"};
    CHECK(out == want);
  }
  SUBCASE("explicit flags suppress the matching file keys") {
    const auto out =
        expand_config_args({"sim-study", "--seed", "99", "--reps=7", "--config=" + cfg});
    const std::vector<std::string> want{"sim-study",       "--seed",
                                        "99",              "--reps=7",
                                        "--models=OUBM,OUBMCIR", "--truth=b0=0.25",
                                        "--truth=b1=0.5"};
    CHECK(out == want);
  }
  SUBCASE("bad inputs throw with the location") {
    CHECK_THROWS_WITH_AS(expand_config_args({"sim-study", "--config"}),
                         "--config expects a file path", std::runtime_error);
    CHECK_THROWS_AS(expand_config_args({"sim-study", "--config", "/no/such.cfg"}),
                    std::runtime_error);
    const std::string bad = (dir.path / "bad.cfg").string();
    write_text_file(bad, "seed=1\njust a line\n");
    CHECK_THROWS_WITH_AS(expand_config_args({"sim-study", "--config", bad}),
                         (bad + ":2: expected key=value, got 'just a line'").c_str(),
                         std::runtime_error);
    const std::string nested = (dir.path / "nested.cfg").string();
    write_text_file(nested, "config=other.cfg\n");
    CHECK_THROWS_AS(expand_config_args({"sim-study", "--config", nested}),
                    std::runtime_error);
  }
}
