#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hclass/config.hpp"
#include "hclass/csv.hpp"
#include "hclass/errors.hpp"
#include "hclass/manifest.hpp"
#include "hclass/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hclass;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 1;

  Config config() const {
    return config_path.empty() ? Config() : Config::load(config_path);
  }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "flat key=value config file");
  cmd->add_option("--seed", args.seed, "RNG seed (overrides config and HCLASS_SEED)");
  cmd->add_option("--jobs", args.jobs, "worker threads for grids and cascade nodes")
      ->check(CLI::PositiveNumber);
}

GridSpec grid_from_config(const Config& config, const GridSpec& fallback) {
  GridSpec grid = fallback;
  if (config.has("grid.c")) grid.c_values = config.get_doubles("grid.c", {});
  if (config.has("grid.gamma")) grid.gamma_values = config.get_doubles("grid.gamma", {});
  const std::string phase = config.get("grid.phase", "");
  if (phase == "single") grid.phase = GridSpec::Phase::single;
  else if (phase == "coarse-then-refine") grid.phase = GridSpec::Phase::coarse_then_refine;
  else if (!phase.empty()) throw_validation("BadConfig", "grid.phase must be single or coarse-then-refine");
  return grid;
}

LearnerSpec learner_from_config(const Config& config, const std::string& learner,
                                const std::string& rule, std::uint64_t seed, int jobs) {
  LearnerSpec spec;
  spec.kind = model_kind_from_string(learner);
  spec.rule = aggregation_rule_from_string(rule);
  spec.seed = seed;
  spec.jobs = jobs;
  spec.svm_tol = config.get_double("svm.tol", 1e-3);
  spec.retained_variance = config.get_double("pca.retained_variance", 1.0);
  spec.softmax.learning_rate = config.get_double("softmax.learning_rate", 0.5);
  spec.softmax.epochs = static_cast<int>(config.get_long("softmax.epochs", 300));
  spec.softmax.l2 = config.get_double("softmax.l2", 1e-4);
  // An explicit grid replaces both the flat and the per-node default.
  if (config.has("grid.c") || config.has("grid.gamma") || config.has("grid.phase")) {
    GridSpec grid = grid_from_config(config, GridSpec::flat_default());
    spec.flat_grid = grid;
    spec.node_grid = grid;
  }
  return spec;
}

SplitSpec split_spec_from_config(const Config& config, SplitScheme scheme,
                                 std::uint64_t seed) {
  SplitSpec spec = SplitSpec::make_default(scheme, seed);
  spec.n_splits = static_cast<int>(config.get_long("n_splits", spec.n_splits));
  spec.train_view_cap = static_cast<int>(config.get_long("train_view_cap", spec.train_view_cap));
  spec.test_view_cap = static_cast<int>(config.get_long("test_view_cap", spec.test_view_cap));
  spec.comparison_train_fraction =
      config.get_double("comparison.train_fraction", spec.comparison_train_fraction);
  spec.ml_train = config.get_double("ml.train", spec.ml_train);
  spec.ml_val = config.get_double("ml.val", spec.ml_val);
  spec.ml_test = config.get_double("ml.test", spec.ml_test);
  spec.ml_stratified = config.get_bool("ml.stratified", spec.ml_stratified);
  const std::string counts_file = config.get("comparison.counts_file", "");
  if (!counts_file.empty()) {
    CsvTable table = read_csv_file(counts_file);
    for (const auto& row : table.rows) {
      if (row.size() < 2) throw_validation("BadConfig", "counts file rows are label,count");
      spec.test_counts[row[0]] = std::stoi(row[1]);
    }
  }
  return spec;
}

SyntheticSpec synth_spec_from_config(const Config& config, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.dim = static_cast<std::size_t>(config.get_long("synth.dim", 8));
  spec.separation = config.get_double("synth.separation", 10.0);
  spec.level_decay = config.get_double("synth.level_decay", 0.6);
  spec.alignment = config.get_double("synth.alignment", 1.0);
  spec.specimen_sd = config.get_double("synth.specimen_sd", 1.0);
  spec.view_sd = config.get_double("synth.view_sd", 0.5);
  spec.specimens_per_leaf = static_cast<int>(config.get_long("synth.specimens_per_leaf", 30));
  spec.views_per_specimen = static_cast<int>(config.get_long("synth.views_per_specimen", 5));
  return spec;
}

int run(int argc, char** argv) {
  CLI::App app{"hierarchical taxa classification benchmark"};
  app.require_subcommand(1);

  // taxonomy validate|stats
  auto* taxonomy_cmd = app.add_subcommand("taxonomy", "validate or summarize a taxonomy CSV");
  std::string tax_file;
  bool tax_stats = false;
  auto* validate_cmd = taxonomy_cmd->add_subcommand("validate", "parse and check the file");
  auto* stats_cmd = taxonomy_cmd->add_subcommand("stats", "print node counts per rank");
  validate_cmd->add_option("--file", tax_file)->required();
  stats_cmd->add_option("--file", tax_file)->required();
  taxonomy_cmd->require_subcommand(1);
  stats_cmd->callback([&] { tax_stats = true; });

  // split
  auto* split_cmd = app.add_subcommand("split", "generate train/val/test splits");
  CommonArgs split_args;
  std::string split_taxonomy, split_features, split_scheme = "ml", split_out = ".";
  add_common(split_cmd, split_args);
  split_cmd->add_option("--taxonomy", split_taxonomy)->required();
  split_cmd->add_option("--features", split_features)->required();
  split_cmd->add_option("--scheme", split_scheme, "comparison or ml");
  split_cmd->add_option("--out-dir", split_out);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic feature CSV");
  CommonArgs synth_args;
  std::string synth_taxonomy, synth_out;
  add_common(synth_cmd, synth_args);
  synth_cmd->add_option("--taxonomy", synth_taxonomy)->required();
  synth_cmd->add_option("--out", synth_out)->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train one topology on one split");
  CommonArgs train_args;
  std::string train_taxonomy, train_features, train_split, train_topology = "flat";
  std::string train_learner = "svm", train_rule = "vote", train_out;
  add_common(train_cmd, train_args);
  train_cmd->add_option("--taxonomy", train_taxonomy)->required();
  train_cmd->add_option("--features", train_features)->required();
  train_cmd->add_option("--split", train_split)->required();
  train_cmd->add_option("--topology", train_topology, "flat, per-level or cascade");
  train_cmd->add_option("--learner", train_learner, "svm or softmax");
  train_cmd->add_option("--rule", train_rule, "vote or average");
  train_cmd->add_option("--out-bundle", train_out)->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "predict a split's test specimens");
  CommonArgs predict_args;
  std::string pred_taxonomy, pred_features, pred_scores, pred_split, pred_bundle;
  std::string pred_rule, pred_out, pred_truth_out;
  add_common(predict_cmd, predict_args);
  predict_cmd->add_option("--taxonomy", pred_taxonomy)->required();
  predict_cmd->add_option("--features", pred_features);
  predict_cmd->add_option("--scores", pred_scores, "score CSV; predicts without a bundle");
  predict_cmd->add_option("--split", pred_split);
  predict_cmd->add_option("--bundle", pred_bundle);
  predict_cmd->add_option("--rule", pred_rule, "vote or average (default: bundle's rule)");
  predict_cmd->add_option("--out", pred_out)->required();
  predict_cmd->add_option("--truth-out", pred_truth_out, "also write the truth CSV");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score prediction files against truth");
  CommonArgs eval_args;
  std::string eval_taxonomy, eval_mode = "auto", eval_policy = "partial-credit";
  std::vector<std::string> eval_preds, eval_truths;
  std::string eval_json, eval_table;
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--taxonomy", eval_taxonomy)->required();
  eval_cmd->add_option("--pred", eval_preds, "prediction CSV (repeatable)")->required();
  eval_cmd->add_option("--truth", eval_truths, "truth CSV: one total, or one per --pred")
      ->required();
  eval_cmd->add_option("--policy", eval_policy, "partial-credit or strict");
  eval_cmd->add_option("--mode", eval_mode, "auto, full or per-rank");
  eval_cmd->add_option("--json", eval_json, "write the JSON report here");
  eval_cmd->add_option("--table", eval_table, "write the text table here");

  CLI11_PARSE(app, argc, argv);

  if (taxonomy_cmd->parsed()) {
    Taxonomy taxonomy = Taxonomy::parse_csv_file(tax_file);
    std::printf("labels: %zu\n", taxonomy.label_count());
    for (const Rank& r : taxonomy.ranks()) {
      std::printf("%s: %zu\n", r.name.c_str(), taxonomy.count_at_rank(r.index));
    }
    if (tax_stats) {
      std::map<int, std::size_t> depth_histogram;
      for (NodeId id : taxonomy.labels()) {
        depth_histogram[taxonomy.node(id).rank] += 1;
      }
      for (const auto& [depth, count] : depth_histogram) {
        std::printf("labels at depth %d: %zu\n", depth, count);
      }
      if (taxonomy.total_specimens() > 0) {
        std::printf("specimens: %ld\nimages: %ld\n", taxonomy.total_specimens(),
                    taxonomy.total_images());
      }
    }
    std::printf("ok\n");
    return 0;
  }

  if (split_cmd->parsed()) {
    Config config = split_args.config();
    const std::uint64_t seed = resolve_seed(split_args.seed, config, 1);
    Taxonomy taxonomy = Taxonomy::parse_csv_file(split_taxonomy);
    Dataset dataset = ingest_features_file(split_features, taxonomy);
    const SplitScheme scheme = split_scheme == "comparison" ? SplitScheme::comparison
                                                            : SplitScheme::machine_learning;
    if (split_scheme != "comparison" && split_scheme != "ml") {
      throw_validation("BadInput", "--scheme must be comparison or ml");
    }
    SplitSpec spec = split_spec_from_config(config, scheme, seed);

    RunManifest manifest;
    manifest.command = "split";
    manifest.seed = seed;
    manifest.taxonomy_hash = hash_file(split_taxonomy);
    manifest.dataset_hash = hash_file(split_features);
    manifest.config = config.values();
    manifest.config["scheme"] = split_scheme;
    manifest.timestamp = current_timestamp();

    std::vector<DataSplit> splits = scheme == SplitScheme::comparison
                                        ? make_comparison_splits(dataset, taxonomy, spec)
                                        : make_ml_splits(dataset, taxonomy, spec);
    fs::create_directories(split_out);
    for (const DataSplit& s : splits) {
      write_file_atomic(split_out + "/split_" + std::to_string(s.index) + ".json",
                        split_to_json(s, manifest.hash()));
    }
    write_file_atomic(split_out + "/manifest.json", manifest.to_json());
    std::printf("wrote %zu splits to %s\n", splits.size(), split_out.c_str());
    return 0;
  }

  if (synth_cmd->parsed()) {
    Config config = synth_args.config();
    const std::uint64_t seed = resolve_seed(synth_args.seed, config, 1);
    Taxonomy taxonomy = Taxonomy::parse_csv_file(synth_taxonomy);
    SyntheticSpec spec = synth_spec_from_config(config, seed);
    Dataset dataset = generate_synthetic(taxonomy, spec);
    write_file_atomic(synth_out, features_to_csv(dataset, taxonomy));
    std::printf("wrote %zu specimens to %s\n", dataset.specimens.size(), synth_out.c_str());
    return 0;
  }

  if (train_cmd->parsed()) {
    Config config = train_args.config();
    const std::uint64_t seed = resolve_seed(train_args.seed, config, 1);
    Taxonomy taxonomy = Taxonomy::parse_csv_file(train_taxonomy);
    Dataset dataset = ingest_features_file(train_features, taxonomy);
    DataSplit split = split_from_json(read_entire_file(train_split));
    LearnerSpec spec = learner_from_config(config, train_learner, train_rule, seed,
                                           train_args.jobs);
    const Topology topology = topology_from_string(train_topology);

    RunManifest manifest;
    manifest.command = "train";
    manifest.seed = seed;
    manifest.taxonomy_hash = hash_file(train_taxonomy);
    manifest.dataset_hash = hash_file(train_features);
    manifest.topology = train_topology;
    manifest.learner = train_learner;
    manifest.rule = train_rule;
    manifest.config = config.values();
    manifest.config["split_file"] = hash_file(train_split);
    manifest.timestamp = current_timestamp();

    Bundle bundle = train_topology(dataset, taxonomy, split, topology, spec);
    save_bundle(bundle, taxonomy, train_out, manifest);
    for (const std::string& w : bundle.warnings) {
      std::fprintf(stderr, "warning: %s\n", w.c_str());
    }
    std::printf("bundle written to %s\n", train_out.c_str());
    return 0;
  }

  if (predict_cmd->parsed()) {
    Config config = predict_args.config();
    Taxonomy taxonomy = Taxonomy::parse_csv_file(pred_taxonomy);

    if (!pred_scores.empty()) {
      Dataset scores = ingest_scores_file(pred_scores, taxonomy);
      std::vector<std::string> ids;
      if (!pred_split.empty()) {
        ids = split_from_json(read_entire_file(pred_split)).test;
      }
      const AggregationRule rule =
          aggregation_rule_from_string(pred_rule.empty() ? "average" : pred_rule);
      std::vector<PredictionRow> rows = predict_from_scores(scores, taxonomy, ids, rule);
      RunManifest manifest;
      manifest.command = "predict";
      manifest.taxonomy_hash = hash_file(pred_taxonomy);
      manifest.dataset_hash = hash_file(pred_scores);
      manifest.rule = to_string(rule);
      manifest.config = config.values();
      manifest.timestamp = current_timestamp();
      write_file_atomic(pred_out, predictions_to_csv(rows, taxonomy, Topology::flat, rule,
                                                     manifest.hash()));
      std::printf("wrote %zu predictions to %s\n", rows.size(), pred_out.c_str());
      return 0;
    }

    if (pred_features.empty() || pred_split.empty() || pred_bundle.empty()) {
      throw_validation("BadInput",
                       "predict needs --features, --split and --bundle (or --scores)");
    }
    Dataset dataset = ingest_features_file(pred_features, taxonomy);
    DataSplit split = split_from_json(read_entire_file(pred_split));
    Bundle bundle = load_bundle(pred_bundle, taxonomy);
    const AggregationRule rule = pred_rule.empty() ? bundle.default_rule
                                                   : aggregation_rule_from_string(pred_rule);

    RunManifest manifest;
    manifest.command = "predict";
    manifest.taxonomy_hash = hash_file(pred_taxonomy);
    manifest.dataset_hash = hash_file(pred_features);
    manifest.topology = to_string(bundle.topology);
    manifest.rule = to_string(rule);
    manifest.config = config.values();
    manifest.config["bundle"] = bundle.manifest_hash;
    manifest.config["split_file"] = hash_file(pred_split);
    manifest.timestamp = current_timestamp();

    std::vector<PredictionRow> rows = predict_split(dataset, taxonomy, split, bundle, rule);
    write_file_atomic(pred_out, predictions_to_csv(rows, taxonomy, bundle.topology, rule,
                                                   manifest.hash()));
    if (!pred_truth_out.empty()) {
      write_file_atomic(pred_truth_out, truth_to_csv(dataset, taxonomy, split.test));
    }
    std::printf("wrote %zu predictions to %s\n", rows.size(), pred_out.c_str());
    return 0;
  }

  if (eval_cmd->parsed()) {
    Taxonomy taxonomy = Taxonomy::parse_csv_file(eval_taxonomy);
    std::vector<ParsedPredictions> preds;
    for (const std::string& p : eval_preds) {
      preds.push_back(parse_predictions_csv(read_entire_file(p), taxonomy));
    }
    std::vector<ParsedPredictions> truths;
    for (const std::string& t : eval_truths) {
      truths.push_back(parse_predictions_csv(read_entire_file(t), taxonomy));
    }
    const PrefixPolicy policy = prefix_policy_from_string(eval_policy);

    RunManifest manifest;
    manifest.command = "evaluate";
    manifest.taxonomy_hash = hash_file(eval_taxonomy);
    manifest.config["policy"] = eval_policy;
    manifest.config["mode"] = eval_mode;
    for (std::size_t i = 0; i < eval_preds.size(); ++i) {
      manifest.config["pred_" + std::to_string(i)] = hash_file(eval_preds[i]);
    }
    manifest.timestamp = current_timestamp();

    EvaluationResult result = evaluate_predictions(preds, truths, taxonomy, policy, eval_mode);
    const std::string table = report_to_table(result, taxonomy);
    std::fputs(table.c_str(), stdout);
    if (!eval_json.empty()) {
      write_file_atomic(eval_json, report_to_json(result, taxonomy, manifest.hash()));
    }
    if (!eval_table.empty()) write_file_atomic(eval_table, table);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == ErrorKind::validation ? 2 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
