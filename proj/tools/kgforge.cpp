// kgforge: knowledge-graph augmentation and link-prediction driver.
//
//   kgforge prepare  --dataset DIR --out DIR
//   kgforge augment  --dataset DIR --num-aug L [--n-clusters N] --out DIR
//   kgforge train    --dataset DIR [--augmented FILE] [--seeds 1,2,3] --out DIR
//   kgforge evaluate --dataset DIR --checkpoint FILE --out DIR
//   kgforge pipeline --dataset DIR --num-aug L [--with-baseline] --out DIR
//   kgforge sweep    --dataset DIR --axis num-aug --values 0,500,1000 --out DIR
//
// Options may also come from `--config FILE` (sectioned key=value); flags on
// the command line win.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "kgforge/io.hpp"
#include "kgforge/parallel.hpp"
#include "kgforge/pipeline.hpp"

namespace fs = std::filesystem;
using namespace kgforge;

namespace {

struct Options {
  RunConfig run;
  fs::path out = "out";
  std::vector<std::uint64_t> seeds;
  std::string model = "transe", eval_mode = "raw", cluster_algo = "agglomerative", linkage = "ward";

  // subcommand specific
  bool dump_matrices = false;
  fs::path augmented;
  std::string variant;
  fs::path checkpoint;
  bool dump_ranks = false;
  bool with_baseline = false;
  std::string axis;
  std::vector<std::string> values;

  std::vector<std::uint64_t> seed_list() const { return seeds.empty() ? std::vector{run.seed} : seeds; }
};

void add_options(CLI::App& app, Options& o) {
  auto& r = o.run;
  app.add_option("--dataset", r.dataset, "Directory holding *train*, *valid* and *test* triple files");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--seed", r.seed, "Global seed");
  app.add_option("--seeds", o.seeds, "Comma-separated seeds; one run each plus mean/std rows")->delimiter(',');
  app.add_option("--threads", r.threads, "Worker threads (capped by KGFORGE_THREADS)");

  app.add_option("--rank", r.nnmf.rank, "NNMF rank p");
  app.add_option("--alpha", r.nnmf.alpha, "NNMF regularization weight");
  app.add_option("--l1-mix", r.nnmf.l1_mix, "NNMF L1 share c in [0, 1]");
  app.add_option("--nnmf-iters", r.nnmf.max_iters, "NNMF iteration cap q");
  app.add_option("--nnmf-tol", r.nnmf.rel_tol, "NNMF relative improvement threshold");

  app.add_option("--cluster-algo", o.cluster_algo, "agglomerative or dbscan");
  app.add_option("--n-clusters", r.cluster.n_clusters, "Cluster count (0: round(sqrt(|E|)))");
  app.add_option("--linkage", o.linkage, "ward or average");
  app.add_option("--eps", r.cluster.eps, "DBSCAN radius (0: median min-pts neighbor distance)");
  app.add_option("--min-pts", r.cluster.min_pts, "DBSCAN core threshold");

  app.add_option("--num-aug", r.sampler.target_count, "Augmented triples to generate (L)");
  app.add_option("--exclude-train", r.sampler.exclude_train, "Reject samples already in train (true/false)");
  app.add_option("--max-attempts", r.sampler.max_attempts, "Sampling attempt budget (0: 100 L)");
  app.add_option("--workers", r.sampler.workers, "Independent sampling workers");

  app.add_option("--model", o.model, "transe or rotate");
  app.add_option("--epochs", r.train.epochs, "Training epochs E");
  app.add_option("--exponent-k", r.train.exponent_k, "Augmentation schedule exponent k");
  app.add_option("--batch-size", r.train.batch_size, "Positives per mini-batch");
  app.add_option("--lr", r.train.learning_rate, "SGD learning rate");
  app.add_option("--margin", r.train.margin, "Ranking margin");
  app.add_option("--negatives", r.train.negatives, "Negatives per positive");
  app.add_option("--norm", r.train.norm_order, "TransE norm order (1 or 2)");
  app.add_option("--dim", r.train.dim, "Embedding dimension");
  app.add_option("--validate-every", r.train.validate_every, "Validation MRR every N epochs (0: off)");

  app.add_option("--eval-mode", o.eval_mode, "raw or filtered");
}

void finalize(Options& o) {
  o.run.model = parse_model_kind(o.model);
  o.run.eval_mode = parse_rank_mode(o.eval_mode);
  o.run.cluster.algorithm = parse_cluster_algorithm(o.cluster_algo);
  o.run.cluster.linkage = parse_linkage(o.linkage);
  o.run.threads = std::min(o.run.threads, thread_budget());
  o.run.sampler.workers = std::min(o.run.sampler.workers, thread_budget());
  o.run.validate();
  if (o.run.dataset.empty()) throw Error("--dataset is required");
}

KnowledgeGraph load(const Options& o) {
  auto g = load_dataset(resolve_dataset_dir(o.run.dataset));
  const auto s = graph_stats(g);
  if (s.self_loops_dropped) std::cerr << "warning: dropped " << s.self_loops_dropped << " self-loop triples\n";
  if (s.duplicates_dropped) std::cerr << "warning: dropped " << s.duplicates_dropped << " duplicate train triples\n";
  return g;
}

void report_augmentation(const AugmentedSet& s, const SamplerConfig& cfg) {
  if (s.exhausted)
    std::cerr << "warning: generated " << s.size() << " of " << cfg.target_count
              << " requested triples before the attempt budget ran out\n";
}

int cmd_prepare(const Options& o) {
  const auto g = load(o);
  const auto stats = format_stats(graph_stats(g));
  io::atomic_write(o.out / "entities.dict", serialize_vocabulary(g.entities));
  io::atomic_write(o.out / "relations.dict", serialize_vocabulary(g.relations));
  io::atomic_write(o.out / "stats.tsv", stats);
  std::cout << stats;
  return 0;
}

void write_augmentation(const fs::path& dir, const KnowledgeGraph& g, const EntityClusters* clusters,
                        const AugmentedSet& set, const RunConfig& cfg, bool dump_matrices) {
  if (clusters) {
    io::atomic_write(dir / "factors.txt", serialize_factors(clusters->factors));
    io::atomic_write(dir / "nnmf_loss.csv", serialize_loss_trace(clusters->factors));
    io::atomic_write(dir / "partition.tsv", serialize_partition(clusters->partition));
    if (dump_matrices) {
      io::atomic_write(dir / "head_relation.coo", serialize_coordinates(clusters->head_relation));
      io::atomic_write(dir / "tail_relation.coo", serialize_coordinates(clusters->tail_relation));
      io::atomic_write(dir / "affinity.coo",
                       serialize_coordinates(build_affinity(clusters->head_relation, clusters->tail_relation)));
    }
  }
  const auto n_clusters = clusters ? clusters->partition.n_clusters : 0;
  io::atomic_write(dir / "augmented.meta", augment_metadata(set, cfg.sampler, n_clusters));
  io::atomic_write(dir / "augmented.tsv", serialize_triples(g, set.triples));
}

int cmd_augment(const Options& o) {
  const auto g = load(o);
  const auto cfg = o.run.with_seed(o.run.seed);
  if (cfg.sampler.target_count == 0) {
    std::cerr << "warning: --num-aug is 0; writing an empty augmented set\n";
    write_augmentation(o.out, g, nullptr, {}, cfg, false);
    return 0;
  }
  const auto clusters = fit_entity_clusters(g, cfg);
  const auto set = augment_graph(g, clusters, cfg);
  report_augmentation(set, cfg.sampler);
  write_augmentation(o.out, g, &clusters, set, cfg, o.dump_matrices);
  std::cout << augment_metadata(set, cfg.sampler, clusters.partition.n_clusters);
  return 0;
}

void write_run(const fs::path& dir, const TrainEvalResult& r) {
  io::atomic_write(dir / "model.ckpt", serialize_model(r.trained.model));
  io::atomic_write(dir / "history.csv", serialize_history(r.trained.history));
}

fs::path seed_dir(const fs::path& out, std::uint64_t seed) { return out / ("seed-" + std::to_string(seed)); }

int cmd_train(const Options& o) {
  const auto g = load(o);
  std::vector<Triple> augmented;
  if (!o.augmented.empty()) augmented = load_triples(g, o.augmented);
  const std::string variant = !o.variant.empty() ? o.variant : (augmented.empty() ? "baseline" : "nnmfaug");

  std::string records;
  std::vector<RankingMetrics> runs;
  const auto seeds = o.seed_list();
  for (auto seed : seeds) {
    const auto cfg = o.run.with_seed(seed);
    const auto result = train_and_evaluate(g, augmented, cfg);
    write_run(seeds.size() > 1 ? seed_dir(o.out, seed) : o.out, result);
    records += metrics_record(variant, cfg, seed, result.metrics) + '\n';
    runs.push_back(result.metrics);
    std::cout << "seed " << seed << ": " << metrics_json(result.metrics) << '\n';
  }
  if (runs.size() > 1) records += aggregate_records(variant, o.run, runs);
  io::atomic_write(o.out / "metrics.jsonl", records);
  return 0;
}

int cmd_evaluate(const Options& o) {
  if (o.checkpoint.empty()) throw Error("--checkpoint is required");
  const auto g = load(o);
  const auto model = parse_model(io::read_file(o.checkpoint));
  if (model.num_entities() != g.num_entities() || model.num_relations() != g.num_relations())
    throw Error("checkpoint dictionary sizes do not match the dataset");
  TripleSet known;
  if (o.run.eval_mode == RankMode::Filtered) known = known_triples(g);
  const auto ranks = collect_ranks(model, g.test, o.run.eval_mode,
                                   o.run.eval_mode == RankMode::Filtered ? &known : nullptr, o.run.threads);
  const auto metrics = metrics_from_ranks(ranks);
  io::atomic_write(o.out / "metrics.json", metrics_json(metrics) + '\n');
  if (o.dump_ranks) io::atomic_write(o.out / "ranks.csv", ranks_csv(ranks));
  std::cout << metrics_table(metrics);
  return 0;
}

int cmd_pipeline(const Options& o) {
  const auto g = load(o);
  std::string records;
  std::vector<RankingMetrics> aug_runs, base_runs;
  const auto seeds = o.seed_list();
  for (auto seed : seeds) {
    const auto cfg = o.run.with_seed(seed);
    const auto dir = seed_dir(o.out, seed);
    AugmentedSet set;
    if (cfg.sampler.target_count > 0) {
      const auto clusters = fit_entity_clusters(g, cfg);
      set = augment_graph(g, clusters, cfg);
      report_augmentation(set, cfg.sampler);
      write_augmentation(dir, g, &clusters, set, cfg, false);
    }
    if (o.with_baseline) {
      const auto base = train_and_evaluate(g, {}, cfg);
      write_run(dir / "baseline", base);
      records += metrics_record("baseline", cfg, seed, base.metrics) + '\n';
      base_runs.push_back(base.metrics);
    }
    const auto aug = train_and_evaluate(g, set.triples, cfg);
    write_run(dir / "nnmfaug", aug);
    records += metrics_record("nnmfaug", cfg, seed, aug.metrics) + '\n';
    aug_runs.push_back(aug.metrics);
    std::cout << "seed " << seed << " nnmfaug: " << metrics_json(aug.metrics) << '\n';
  }
  if (seeds.size() > 1) {
    if (o.with_baseline) records += aggregate_records("baseline", o.run, base_runs);
    records += aggregate_records("nnmfaug", o.run, aug_runs);
  }
  io::atomic_write(o.out / "metrics.jsonl", records);
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto axis = parse_sweep_axis(o.axis);
  const auto g = load(o);
  const auto rows = run_sweep(g, o.run, axis, o.values, o.seed_list());
  const auto csv = sweep_csv(axis, rows);
  io::atomic_write(o.out / "sweep.csv", csv);
  std::cout << csv;
  return 0;
}

// `--config FILE` is expanded into flags placed before the user's own, so the
// user's flags override it.
std::vector<std::string> expand_args(int argc, char** argv) {
  std::vector<std::string> user(argv + 1, argv + argc);
  std::vector<std::string> config, rest;
  for (std::size_t i = 0; i < user.size(); ++i) {
    if (user[i] == "--config" && i + 1 < user.size()) {
      auto extra = config_file_args(user[++i]);
      config.insert(config.end(), extra.begin(), extra.end());
    } else if (user[i].rfind("--config=", 0) == 0) {
      auto extra = config_file_args(user[i].substr(9));
      config.insert(config.end(), extra.begin(), extra.end());
    } else {
      rest.push_back(user[i]);
    }
  }
  config.insert(config.end(), rest.begin(), rest.end());
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph augmentation by factorized triple sampling, with TransE/RotatE link prediction"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Options o;
  o.run.threads = thread_budget();
  add_options(app, o);
  std::string config_placeholder;
  app.add_option("--config", config_placeholder, "Sectioned key=value config file");

  auto* prepare = app.add_subcommand("prepare", "Load a dataset, write dictionaries and statistics");
  auto* augment = app.add_subcommand("augment", "Fit co-occurrence factors and clusters, sample augmented triples");
  augment->add_flag("--dump-matrices", o.dump_matrices, "Also write A, B and C in coordinate format");
  auto* train_cmd = app.add_subcommand("train", "Train a link predictor and evaluate it on the test split");
  train_cmd->add_option("--augmented", o.augmented, "Augmented triple file from `augment`");
  train_cmd->add_option("--variant", o.variant, "Label for the metrics records");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Rank the test split with a saved model");
  evaluate_cmd->add_option("--checkpoint", o.checkpoint, "Model checkpoint from `train`")->required();
  evaluate_cmd->add_flag("--dump-ranks", o.dump_ranks, "Write per-triple ranks");
  auto* pipeline = app.add_subcommand("pipeline", "augment + train + evaluate for every seed");
  pipeline->add_flag("--with-baseline", o.with_baseline, "Also train an unaugmented baseline per seed");
  auto* sweep = app.add_subcommand("sweep", "Sweep one axis and emit a CSV of metrics");
  sweep->add_option("--axis", o.axis, "num-aug, exponent-k or cluster-algo")->required();
  sweep->add_option("--values", o.values, "Comma-separated axis values")->delimiter(',')->required();

  try {
    auto args = expand_args(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    finalize(o);
    if (*prepare) return cmd_prepare(o);
    if (*augment) return cmd_augment(o);
    if (*train_cmd) return cmd_train(o);
    if (*evaluate_cmd) return cmd_evaluate(o);
    if (*pipeline) return cmd_pipeline(o);
    if (*sweep) return cmd_sweep(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
