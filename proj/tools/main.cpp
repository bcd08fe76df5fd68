#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "artifacts.hpp"
#include "wsisel/cluster.hpp"
#include "wsisel/dataset.hpp"
#include "wsisel/entropy.hpp"
#include "wsisel/evalharness.hpp"
#include "wsisel/pca.hpp"
#include "wsisel/simbench.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace wsisel;
using namespace wsisel::tools;

namespace {

TableFormat parse_format(const std::string& name) {
  if (name == "csv") return TableFormat::csv;
  if (name == "binary") return TableFormat::binary;
  throw ConfigError("unknown table format '" + name + "'");
}

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

FeatureTable load_input(const std::string& path, const std::string& format,
                        Domain domain) {
  require_exists(path);
  return load_table(path, parse_format(format), domain);
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineParams {
  std::string target_path;
  std::string source_path;  // empty = absent
  std::string format = "csv";
  int dim = 30;
  int k = 10;
  std::uint64_t seed = 1;
  int restarts = 10;
  double tol = 1e-6;
  int max_iter = 300;
  std::size_t slice_n = 5;
  std::string pca_fit = "target";
  int jobs = 1;
};

json pipeline_manifest(const PipelineParams& p,
                       const std::vector<std::string>& artifacts) {
  json inputs;
  inputs["target"] = p.target_path;
  if (p.source_path.empty()) {
    inputs["source"] = nullptr;
  } else {
    inputs["source"] = p.source_path;
  }
  inputs["format"] = p.format;
  json params;
  params["dim"] = p.dim;
  params["k"] = p.k;
  params["seed"] = p.seed;
  params["restarts"] = p.restarts;
  params["tol"] = p.tol;
  params["max_iter"] = p.max_iter;
  params["slice_n"] = p.slice_n;
  params["pca_fit"] = p.pca_fit;
  params["jobs"] = p.jobs;
  json j;
  j["command"] = "pipeline";
  j["inputs"] = inputs;
  j["params"] = params;
  j["artifacts"] = artifacts;
  return j;
}

PipelineParams pipeline_params_from_manifest(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw IngestError(path + ": invalid manifest JSON: " + e.what());
  }
  PipelineParams p;
  const json& inputs = j.at("inputs");
  p.target_path = inputs.at("target").get<std::string>();
  if (!inputs.at("source").is_null()) {
    p.source_path = inputs.at("source").get<std::string>();
  }
  p.format = inputs.at("format").get<std::string>();
  const json& params = j.at("params");
  p.dim = params.at("dim").get<int>();
  p.k = params.at("k").get<int>();
  p.seed = params.at("seed").get<std::uint64_t>();
  p.restarts = params.at("restarts").get<int>();
  p.tol = params.at("tol").get<double>();
  p.max_iter = params.at("max_iter").get<int>();
  p.slice_n = params.at("slice_n").get<std::size_t>();
  p.pca_fit = params.at("pca_fit").get<std::string>();
  p.jobs = params.at("jobs").get<int>();
  return p;
}

template <typename F>
auto run_stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const Error&) {
    std::cerr << "wsisel pipeline: stage '" << name << "' failed\n";
    throw;
  }
}

int cmd_pipeline(const PipelineParams& p, const std::string& out_dir) {
  const TableFormat format = parse_format(p.format);
  std::vector<std::string> artifacts;

  const FeatureTable target = run_stage("load", [&] {
    require_exists(p.target_path);
    return load_table(p.target_path, format, Domain::target);
  });
  std::optional<FeatureTable> source;
  if (!p.source_path.empty()) {
    source = run_stage("load", [&] {
      require_exists(p.source_path);
      return load_table(p.source_path, format, Domain::source);
    });
  }
  if (p.pca_fit == "both" && !source) {
    throw ConfigError("--pca-fit both requires --source");
  }

  const PcaModel pca = run_stage("pca", [&] {
    if (p.pca_fit == "target") return fit_pca(target, p.dim);
    if (p.pca_fit != "both") throw ConfigError("--pca-fit must be target|both");
    std::vector<PatchRecord> pooled = target.records();
    pooled.insert(pooled.end(), source->records().begin(), source->records().end());
    const FeatureTable joint(std::move(pooled), target.dim(), target.num_classes(),
                             Domain::target);
    return fit_pca(joint, p.dim);
  });
  const FeatureTable reduced = run_stage("pca", [&] { return transform(pca, target); });
  save_pca_model(pca, out_path(out_dir, "pca.json"));
  artifacts.push_back("pca.json");
  write_table(reduced, out_path(out_dir, "reduced.csv"), TableFormat::csv);
  artifacts.push_back("reduced.csv");
  if (source) {
    const FeatureTable source_reduced =
        run_stage("pca", [&] { return transform(pca, *source); });
    write_table(source_reduced, out_path(out_dir, "source_reduced.csv"),
                TableFormat::csv);
    artifacts.push_back("source_reduced.csv");
  }

  KMeansOptions options;
  options.tol = p.tol;
  options.max_iter = p.max_iter;
  options.restarts = p.restarts;
  options.jobs = p.jobs;
  const LloydResult kmeans = run_stage(
      "cluster", [&] { return fit_kmeans(reduced, p.k, p.seed, options); });
  save_kmeans_model(kmeans.model, out_path(out_dir, "kmeans.json"));
  artifacts.push_back("kmeans.json");
  write_assignments(reduced, kmeans.assignment, out_path(out_dir, "assignments.csv"));
  artifacts.push_back("assignments.csv");

  const std::vector<GroupEntropy> entropies = run_stage("entropy", [&] {
    std::vector<std::pair<std::string, int>> pairs;
    for (std::size_t i = 0; i < reduced.size(); ++i) {
      pairs.emplace_back(reduced.record(i).group_id, kmeans.assignment.labels[i]);
    }
    return group_entropies(pairs, p.k);
  });
  write_text_file(out_path(out_dir, "entropy.ndjson"), entropies_to_ndjson(entropies));
  artifacts.push_back("entropy.ndjson");

  const RankedSelection ranking =
      run_stage("rank", [&] { return rank_groups(entropies, p.slice_n); });
  write_text_file(out_path(out_dir, "ranking.ndjson"), ranking_to_ndjson(ranking));
  artifacts.push_back("ranking.ndjson");
  write_text_file(out_path(out_dir, "selection.json"), selection_json(ranking));
  artifacts.push_back("selection.json");

  write_text_file(out_path(out_dir, "manifest.json"),
                  pipeline_manifest(p, artifacts).dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// single-stage commands

int cmd_validate(const std::string& input, const std::string& format,
                 const std::string& domain) {
  const FeatureTable table =
      load_input(input, format, domain == "source" ? Domain::source : Domain::target);
  json j;
  j["path"] = input;
  j["format"] = format;
  j["domain"] = domain;
  j["n"] = table.size();
  j["dim"] = table.dim();
  j["classes"] = table.num_classes();
  j["groups"] = table.group_count();
  std::int64_t labeled = 0;
  for (const PatchRecord& r : table.records()) labeled += r.label ? 1 : 0;
  j["labeled"] = labeled;
  if (labeled > 0) j["label_counts"] = class_histogram(table).counts;
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_reduce(const std::string& input, const std::string& format, int dim,
               const std::string& project, const std::string& out_dir) {
  const FeatureTable table = load_input(input, format, Domain::target);
  const PcaModel model = fit_pca(table, dim);
  save_pca_model(model, out_path(out_dir, "pca.json"));
  write_table(transform(model, table), out_path(out_dir, "reduced.csv"),
              TableFormat::csv);
  if (!project.empty()) {
    const FeatureTable extra = load_input(project, format, Domain::target);
    write_table(transform(model, extra), out_path(out_dir, "projected.csv"),
                TableFormat::csv);
  }
  return 0;
}

int cmd_cluster(const std::string& input, const std::string& format, int k,
                std::uint64_t seed, const KMeansOptions& options,
                const std::string& out_dir) {
  const FeatureTable table = load_input(input, format, Domain::target);
  const LloydResult result = fit_kmeans(table, k, seed, options);
  save_kmeans_model(result.model, out_path(out_dir, "kmeans.json"));
  write_assignments(table, result.assignment, out_path(out_dir, "assignments.csv"));
  return 0;
}

int cmd_entropy(const std::string& assignments_path, int k,
                const std::string& out_dir) {
  const AssignmentRows rows = read_assignments(assignments_path);
  const std::vector<GroupEntropy> entropies = group_entropies(rows.group_cluster, k);
  write_text_file(out_path(out_dir, "entropy.ndjson"), entropies_to_ndjson(entropies));
  return 0;
}

int cmd_rank(const std::string& entropy_path, std::size_t n,
             const std::string& out_dir) {
  const auto entropies = entropies_from_ndjson(read_text_file(entropy_path));
  const RankedSelection ranking = rank_groups(entropies, n);
  write_text_file(out_path(out_dir, "ranking.ndjson"), ranking_to_ndjson(ranking));
  return 0;
}

int cmd_select(const std::string& ranking_path, const std::string& out_dir) {
  const RankedSelection ranking = ranking_from_ndjson(read_text_file(ranking_path));
  write_text_file(out_path(out_dir, "selection.json"), selection_json(ranking));
  std::cout << select_wsi(ranking) << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed, bool seed_set,
                 const std::string& format, const std::string& out_dir) {
  SimConfig config;
  if (!config_path.empty()) {
    config = sim_config_from_json(read_text_file(config_path));
  }
  if (seed_set) config.seed = seed;
  const SimResult result = generate(config);
  const TableFormat table_format = parse_format(format);
  const char* ext = table_format == TableFormat::csv ? ".csv" : ".json";
  write_table(result.source, out_path(out_dir, std::string("source") + ext),
              table_format);
  write_table(result.target, out_path(out_dir, std::string("target") + ext),
              table_format);
  save_sim_truth(result.truth, out_path(out_dir, "truth.json"));
  write_text_file(out_path(out_dir, "sim_config.json"), to_json_string(config));
  return 0;
}

int cmd_evaluate(const std::string& source_path, const std::string& target_path,
                 const std::string& format, const std::string& ranking_path,
                 int num_seeds, std::uint64_t base_seed,
                 const ExperimentConfig& config, const std::string& out_dir) {
  const FeatureTable source = load_input(source_path, format, Domain::source);
  const FeatureTable target = load_input(target_path, format, Domain::target);
  const RankedSelection ranking = ranking_from_ndjson(read_text_file(ranking_path));
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < num_seeds; ++i) {
    seeds.push_back(base_seed + static_cast<std::uint64_t>(i));
  }
  const ExperimentSummary summary =
      run_experiment(source, target, ranking, seeds, config);
  save_experiment_summary(summary, out_path(out_dir, "experiment.json"));
  return 0;
}

int cmd_report(const std::string& input) {
  const ExperimentSummary summary =
      experiment_summary_from_json(read_text_file(input));
  std::printf("%-8s %-18s %-18s %-18s %-18s\n", "cond", "mPrecision", "mRecall",
              "mDice", "mIoU");
  for (const ConditionSummary& cs : summary.conditions) {
    std::printf("%-8s %6.3f +/- %-6.3f %6.3f +/- %-6.3f %6.3f +/- %-6.3f "
                "%6.3f +/- %-6.3f\n",
                to_string(cs.condition), cs.mean_mprecision, cs.std_mprecision,
                cs.mean_mrecall, cs.std_mrecall, cs.mean_mdice, cs.std_mdice,
                cs.mean_miou, cs.std_miou);
  }
  std::printf("\npairwise Welch tests on mIoU (Bonferroni x%zu):\n",
              summary.pairwise.size());
  for (const PairwiseTest& pt : summary.pairwise) {
    std::printf("  %s vs %s: t=%.4f df=%.2f p=%.6f p_adj=%.6f%s\n",
                to_string(pt.a), to_string(pt.b), pt.welch.t, pt.welch.df,
                pt.welch.p, pt.p_adjusted, pt.significant ? "  *" : "");
  }
  return 0;
}

int cmd_export_plot_data(const std::string& reduced_path,
                         const std::string& assignments_path,
                         const std::string& ranking_path,
                         std::vector<std::string> groups,
                         const std::string& out_dir) {
  const FeatureTable reduced = load_input(reduced_path, "csv", Domain::target);
  const AssignmentRows rows = read_assignments(assignments_path);
  const RankedSelection ranking = ranking_from_ndjson(read_text_file(ranking_path));
  if (groups.empty()) {
    // default to the Fig-3 style columns: highest, median, lowest rank
    const std::size_t m = ranking.ordered.size();
    groups = {ranking.ordered[0].group_id, ranking.ordered[(m - 1) / 2].group_id,
              ranking.ordered[m - 1].group_id};
  }
  fs::create_directories(out_dir);
  for (const std::string& group : groups) {
    write_plot_data(reduced, rows, ranking.ordered, group, out_dir);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cluster-entropy selection of diverse WSIs for active domain "
               "adaptation"};
  app.require_subcommand(1);

  // validate
  auto* validate = app.add_subcommand("validate", "load a feature table and "
                                      "print a summary");
  std::string v_input, v_format = "csv", v_domain = "target";
  validate->add_option("--input", v_input, "table path")->required();
  validate->add_option("--format", v_format, "csv|binary");
  validate->add_option("--domain", v_domain, "source|target")
      ->check(CLI::IsMember({"source", "target"}));

  // reduce
  auto* reduce = app.add_subcommand("reduce", "fit PCA and project the table");
  std::string r_input, r_format = "csv", r_project, r_out = ".";
  int r_dim = 30;
  reduce->add_option("--input", r_input, "table to fit and project")->required();
  reduce->add_option("--format", r_format, "csv|binary");
  reduce->add_option("--dim", r_dim, "target dimension");
  reduce->add_option("--project", r_project, "extra table to project");
  reduce->add_option("--out", r_out, "output directory");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "k-means++ over a reduced table");
  std::string c_input, c_format = "csv", c_out = ".";
  int c_k = 10, c_restarts = 10, c_max_iter = 300, c_jobs = 1;
  std::uint64_t c_seed = 1;
  double c_tol = 1e-6;
  cluster->add_option("--input", c_input, "reduced table")->required();
  cluster->add_option("--format", c_format, "csv|binary");
  cluster->add_option("--k", c_k, "number of clusters");
  cluster->add_option("--seed", c_seed, "base seed");
  cluster->add_option("--restarts", c_restarts, "k-means restarts");
  cluster->add_option("--tol", c_tol, "relative inertia tolerance");
  cluster->add_option("--max-iter", c_max_iter, "Lloyd iteration cap");
  cluster->add_option("--jobs", c_jobs, "parallel restart workers");
  cluster->add_option("--out", c_out, "output directory");

  // entropy
  auto* entropy = app.add_subcommand("entropy", "per-WSI cluster entropy");
  std::string e_assignments, e_out = ".";
  int e_k = 10;
  entropy->add_option("--assignments", e_assignments, "assignments.csv")->required();
  entropy->add_option("--k", e_k, "number of clusters");
  entropy->add_option("--out", e_out, "output directory");

  // rank
  auto* rank = app.add_subcommand("rank", "sort WSIs, slice high/med/low");
  std::string k_entropy, k_out = ".";
  std::size_t k_n = 5;
  rank->add_option("--entropy", k_entropy, "entropy.ndjson")->required();
  rank->add_option("--n", k_n, "slice size");
  rank->add_option("--out", k_out, "output directory");

  // select
  auto* select = app.add_subcommand("select", "pick the highest-entropy WSI");
  std::string s_ranking, s_out = ".";
  select->add_option("--ranking", s_ranking, "ranking.ndjson")->required();
  select->add_option("--out", s_out, "output directory");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic "
                                      "domain-shift benchmark");
  std::string sim_config, sim_format = "csv", sim_out = ".";
  std::uint64_t sim_seed = 1;
  simulate->add_option("--config", sim_config, "SimConfig JSON");
  auto* sim_seed_opt = simulate->add_option("--seed", sim_seed, "override the "
                                            "config seed");
  simulate->add_option("--format", sim_format, "csv|binary");
  simulate->add_option("--out", sim_out, "output directory");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "run the retraining "
                                      "comparison across entropy slices");
  std::string ev_source, ev_target, ev_format = "csv", ev_ranking, ev_out = ".";
  int ev_seeds = 20, ev_epochs = 40, ev_batch = 64;
  std::uint64_t ev_base_seed = 1, ev_split_seed = 1;
  double ev_lr = 0.05, ev_val_fraction = 0.2;
  bool ev_early_stop = false;
  evaluate->add_option("--source", ev_source, "labeled source table")->required();
  evaluate->add_option("--target", ev_target, "target table (labels act as "
                       "the annotation oracle)")->required();
  evaluate->add_option("--format", ev_format, "csv|binary");
  evaluate->add_option("--ranking", ev_ranking, "ranking.ndjson")->required();
  evaluate->add_option("--seeds", ev_seeds, "number of experiment seeds");
  evaluate->add_option("--base-seed", ev_base_seed, "first seed");
  evaluate->add_option("--epochs", ev_epochs, "training epochs");
  evaluate->add_option("--lr", ev_lr, "learning rate");
  evaluate->add_option("--batch", ev_batch, "batch size (mixed batches split "
                       "this in half)");
  evaluate->add_option("--split-seed", ev_split_seed, "validation/test split seed");
  evaluate->add_option("--validation-fraction", ev_val_fraction,
                       "share of target WSIs held out for validation");
  evaluate->add_flag("--early-stop", ev_early_stop, "keep the best validation "
                     "mIoU weights");
  evaluate->add_option("--out", ev_out, "output directory");

  // report
  auto* report = app.add_subcommand("report", "print an experiment summary");
  std::string rp_input;
  report->add_option("--input", rp_input, "experiment.json")->required();

  // export-plot-data
  auto* export_plot = app.add_subcommand("export-plot-data", "emit scatter and "
                                         "histogram CSVs for chosen WSIs");
  std::string x_reduced, x_assignments, x_ranking, x_out = ".";
  std::vector<std::string> x_groups;
  export_plot->add_option("--reduced", x_reduced, "reduced.csv")->required();
  export_plot->add_option("--assignments", x_assignments, "assignments.csv")
      ->required();
  export_plot->add_option("--ranking", x_ranking, "ranking.ndjson")->required();
  export_plot->add_option("--groups", x_groups, "group ids (default: highest, "
                          "median, lowest)")->delimiter(',');
  export_plot->add_option("--out", x_out, "output directory");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "load -> reduce -> cluster "
                                      "-> entropy -> rank -> select");
  PipelineParams pp;
  std::string p_manifest, p_out = ".";
  pipeline->add_option("--target", pp.target_path, "target table");
  pipeline->add_option("--source", pp.source_path, "source table (projected "
                       "with the target-fit model)");
  pipeline->add_option("--format", pp.format, "csv|binary");
  pipeline->add_option("--dim", pp.dim, "PCA dimension");
  pipeline->add_option("--k", pp.k, "number of clusters");
  pipeline->add_option("--seed", pp.seed, "k-means base seed");
  pipeline->add_option("--restarts", pp.restarts, "k-means restarts");
  pipeline->add_option("--tol", pp.tol, "relative inertia tolerance");
  pipeline->add_option("--max-iter", pp.max_iter, "Lloyd iteration cap");
  pipeline->add_option("--n", pp.slice_n, "slice size");
  pipeline->add_option("--pca-fit", pp.pca_fit, "target|both")
      ->check(CLI::IsMember({"target", "both"}));
  pipeline->add_option("--jobs", pp.jobs, "parallel restart workers");
  pipeline->add_option("--manifest", p_manifest, "re-run a recorded manifest");
  pipeline->add_option("--out", p_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(v_input, v_format, v_domain);
    if (*reduce) return cmd_reduce(r_input, r_format, r_dim, r_project, r_out);
    if (*cluster) {
      KMeansOptions options;
      options.tol = c_tol;
      options.max_iter = c_max_iter;
      options.restarts = c_restarts;
      options.jobs = c_jobs;
      return cmd_cluster(c_input, c_format, c_k, c_seed, options, c_out);
    }
    if (*entropy) return cmd_entropy(e_assignments, e_k, e_out);
    if (*rank) return cmd_rank(k_entropy, k_n, k_out);
    if (*select) return cmd_select(s_ranking, s_out);
    if (*simulate) {
      return cmd_simulate(sim_config, sim_seed, sim_seed_opt->count() > 0,
                          sim_format, sim_out);
    }
    if (*evaluate) {
      ExperimentConfig config;
      config.train.learning_rate = ev_lr;
      config.train.epochs = ev_epochs;
      config.train.batch_size = ev_batch;
      config.train.early_stop = ev_early_stop;
      config.validation_fraction = ev_val_fraction;
      config.split_seed = ev_split_seed;
      return cmd_evaluate(ev_source, ev_target, ev_format, ev_ranking, ev_seeds,
                          ev_base_seed, config, ev_out);
    }
    if (*report) return cmd_report(rp_input);
    if (*export_plot) {
      return cmd_export_plot_data(x_reduced, x_assignments, x_ranking, x_groups,
                                  x_out);
    }
    if (*pipeline) {
      if (!p_manifest.empty()) {
        pp = pipeline_params_from_manifest(p_manifest);
      } else if (pp.target_path.empty()) {
        std::cerr << "wsisel pipeline: --target or --manifest is required\n";
        return 1;
      }
      return cmd_pipeline(pp, p_out);
    }
  } catch (const MissingInputError& e) {
    std::cerr << "wsisel: " << e.what() << "\n";
    return 2;
  } catch (const LeakageError& e) {
    std::cerr << "wsisel: leakage: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "wsisel: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "wsisel: unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
