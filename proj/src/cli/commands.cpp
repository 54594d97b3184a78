#include "growl/cli.hpp"

#include <chrono>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "growl/config_json.hpp"
#include "growl/error.hpp"
#include "growl/graph.hpp"
#include "growl/io_util.hpp"
#include "growl/pipeline.hpp"
#include "growl/projection.hpp"
#include "growl/render.hpp"
#include "growl/synth.hpp"
#include "growl/trainer.hpp"

namespace growl::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::string config_path;
  std::string out_dir = ".";
  unsigned threads = 1;
};

// Flags shared by the commands that train a model.
struct ModelFlags {
  std::optional<std::size_t> embed_dim;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> mlp_hidden;
  std::optional<double> learning_rate;
  std::optional<std::string> aggregator;
  std::optional<double> positive_weight;
  bool no_orientation = false;
  bool no_negative_injection = false;
  bool edge_features = false;
  bool no_order_augmentation = false;
};

struct EvalFlags {
  std::optional<double> tolerance;
  std::optional<std::string> matching;
  bool restrict_universe = false;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--embed-dim", f.embed_dim, "Node embedding size (default 20)");
  cmd->add_option("--epochs", f.epochs, "Training epochs (default 100)");
  cmd->add_option("--mlp-hidden", f.mlp_hidden, "Hidden width of the edge classifier (default 32)");
  cmd->add_option("--lr", f.learning_rate, "Adam learning rate (default 0.01)");
  cmd->add_option("--aggregator", f.aggregator, "self_and_neighbor_mean | mean_with_self");
  cmd->add_option("--positive-weight", f.positive_weight, "Loss weight of positive edges (default 1)");
  cmd->add_flag("--no-orientation", f.no_orientation, "Position-only node features");
  cmd->add_flag("--no-negative-injection", f.no_negative_injection, "Train on positive edges only");
  cmd->add_flag("--edge-features", f.edge_features, "Append effort angle and distance to the classifier input");
  cmd->add_flag("--no-order-augmentation", f.no_order_augmentation, "Train each edge in one order only");
}

void add_eval_flags(CLI::App* cmd, EvalFlags& f) {
  cmd->add_option("--tolerance", f.tolerance, "Group matching tolerance T (default 2/3)");
  cmd->add_option("--matching", f.matching, "greedy | optimal");
  cmd->add_flag("--restrict-universe-to-detected", f.restrict_universe,
                "Drop ground-truth members that were not detected");
}

json load_config(const GlobalOptions& g) {
  if (g.config_path.empty()) return json::object();
  try {
    json j = json::parse(read_file(g.config_path));
    if (!j.is_object()) throw ConfigError(g.config_path + ": config must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError(g.config_path + ": " + e.what());
  }
}

const json* section(const json& cfg, const char* key) {
  auto it = cfg.find(key);
  return it == cfg.end() ? nullptr : &*it;
}

struct Resolved {
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
  double threshold = 0.5;
};

Resolved resolve(const GlobalOptions& g, const json& cfg, const ModelFlags* mf, const EvalFlags* ef) {
  Resolved r;
  if (auto s = section(cfg, "model")) update_from_json(r.model, *s);
  if (auto s = section(cfg, "train")) update_from_json(r.train, *s);
  if (auto s = section(cfg, "eval")) update_from_json(r.eval, *s);
  if (auto s = section(cfg, "threshold")) r.threshold = s->get<double>();
  if (mf) {
    if (mf->embed_dim) r.model.embed_dim = *mf->embed_dim;
    if (mf->mlp_hidden) r.model.mlp_hidden = *mf->mlp_hidden;
    if (mf->aggregator) r.model.aggregator = parse_aggregator(*mf->aggregator);
    if (mf->no_orientation) r.model.feature_mode = FeatureMode::position_only;
    if (mf->edge_features) r.model.use_edge_features = true;
    if (mf->epochs) r.train.epochs = *mf->epochs;
    if (mf->learning_rate) r.train.learning_rate = *mf->learning_rate;
    if (mf->positive_weight) r.train.positive_weight = *mf->positive_weight;
    if (mf->no_negative_injection) r.train.negative_injection = false;
    if (mf->no_order_augmentation) r.train.order_augmentation = false;
  }
  if (ef) {
    if (ef->tolerance) r.eval.tolerance = *ef->tolerance;
    if (ef->matching) {
      if (*ef->matching != "greedy" && *ef->matching != "optimal")
        throw ConfigError("--matching must be 'greedy' or 'optimal'");
      r.eval.matching = *ef->matching == "greedy" ? Matching::greedy : Matching::optimal;
    }
    if (ef->restrict_universe) r.eval.restrict_universe_to_detected = true;
  }
  if (g.seed_opt->count() > 0) r.train.seed = g.seed;
  r.model.validate();
  r.train.validate();
  r.eval.validate();
  if (!(r.threshold > 0.0 && r.threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  return r;
}

Dataset read_dataset(const std::string& path) {
  const fs::path p(path);
  const auto ext = p.extension().string();
  return load_dataset(p, ext == ".csv" ? DatasetFormat::csv : DatasetFormat::json);
}

// Collects the outputs of one command and writes the run manifest last.
class Run {
 public:
  Run(std::string command, const GlobalOptions& g)
      : command_(std::move(command)), dir_(g.out_dir), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
    manifest_["command"] = command_;
    manifest_["version"] = GROWL_VERSION;
    manifest_["seed"] = g.seed;
    manifest_["threads"] = g.threads;
    manifest_["inputs"] = json::object();
    manifest_["config"] = json::object();
    manifest_["outputs"] = json::array();
  }

  fs::path write(const std::string& name, std::string_view contents) {
    const fs::path p = dir_ / name;
    write_file_atomic(p, contents);
    manifest_["outputs"].push_back(p.string());
    return p;
  }

  json& inputs() { return manifest_["inputs"]; }
  json& config() { return manifest_["config"]; }

  void finish() {
    manifest_["duration_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_file_atomic(dir_ / "manifest.json", manifest_.dump(1) + "\n");
  }

 private:
  std::string command_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  json manifest_;
};

void record(Run& run, const Resolved& r, bool with_model = true) {
  if (with_model) {
    run.config()["model"] = to_json(r.model);
    run.config()["train"] = to_json(r.train);
  }
  run.config()["eval"] = to_json(r.eval);
  run.config()["threshold"] = r.threshold;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"growl: interaction-group detection with graph link prediction"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  g.seed_opt = app.add_option("--seed", g.seed, "Seed for every random choice of the command");
  app.add_option("--config", g.config_path, "JSON config with optional model/train/eval/synth sections");
  app.add_option("--out", g.out_dir, "Output directory (default .)");
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic F-formation dataset");
  std::optional<std::size_t> n_scenes;
  bool hard = false;
  synth->add_option("--n-scenes", n_scenes, "Number of scenes (default 500)");
  synth->add_flag("--hard", hard, "Adjacent group pairs separable only by orientation");

  // project
  auto* project = app.add_subcommand("project", "Project egocentric detections to a top-down dataset");
  std::string detections_path, depth_dir, mode = "normalized";
  double hfov = ProjectionOptions{}.hfov_rad;
  int window = ProjectionOptions{}.window;
  std::string dataset_name = "projected";
  project->add_option("--detections", detections_path, "Sidecar JSON file or directory of sidecars")->required();
  project->add_option("--depth-dir", depth_dir, "Directory of <frame_id>.pgm depth images")->required();
  project->add_option("--mode", mode, "normalized | pinhole");
  project->add_option("--hfov", hfov, "Horizontal field of view in radians (pinhole mode)");
  project->add_option("--window", window, "Odd depth sampling window; 1 reads a single pixel");
  project->add_option("--name", dataset_name, "Dataset name");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model on a labeled dataset");
  std::string data_path;
  double train_fraction = 0.6;
  ModelFlags train_flags;
  train_cmd->add_option("--data", data_path, "Dataset (.json or .csv)")->required();
  train_cmd->add_option("--train-fraction", train_fraction, "Training share; 1 trains on everything");
  add_model_flags(train_cmd, train_flags);

  // predict
  auto* predict = app.add_subcommand("predict", "Predict groups for every scene of a dataset");
  std::string model_path;
  std::optional<double> threshold, baseline_radius;
  predict->add_option("--data", data_path, "Dataset (.json or .csv)")->required();
  predict->add_option("--model", model_path, "Checkpoint written by train");
  predict->add_option("--threshold", threshold, "Edge probability threshold (default 0.5)");
  predict->add_option("--baseline-radius", baseline_radius, "Use distance clustering instead of a model");

  // eval
  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  std::string predictions_path;
  EvalFlags eval_flags;
  eval->add_option("--data", data_path, "Ground-truth dataset")->required();
  eval->add_option("--predictions", predictions_path, "predictions.json written by predict")->required();
  add_eval_flags(eval, eval_flags);

  // gridsearch
  auto* grid_cmd = app.add_subcommand("gridsearch", "Cross-validated search over embedding size and epochs");
  ModelFlags grid_flags;
  EvalFlags grid_eval;
  std::vector<std::size_t> embed_sizes, epoch_grid;
  std::size_t folds = 10, repeats = 3;
  grid_cmd->add_option("--data", data_path, "Dataset (.json or .csv)")->required();
  grid_cmd->add_option("--train-fraction", train_fraction, "Share used for the search; 1 uses everything");
  grid_cmd->add_option("--embed-sizes", embed_sizes, "Embedding sizes (default 2..20)")->delimiter(',');
  grid_cmd->add_option("--epoch-grid", epoch_grid, "Epoch counts (default 10..50 step 5, 100..250 step 50)")
      ->delimiter(',');
  grid_cmd->add_option("--folds", folds, "Cross-validation folds (default 10)");
  grid_cmd->add_option("--repeats", repeats, "Reshuffled repetitions (default 3)");
  add_model_flags(grid_cmd, grid_flags);
  add_eval_flags(grid_cmd, grid_eval);

  // repeat
  auto* repeat = app.add_subcommand("repeat", "Repeated random-split train/test experiment");
  ModelFlags repeat_flags;
  EvalFlags repeat_eval;
  std::size_t runs = 30;
  repeat->add_option("--data", data_path, "Dataset (.json or .csv)")->required();
  repeat->add_option("--runs", runs, "Number of runs (default 30)");
  repeat->add_option("--train-fraction", train_fraction, "Training share per run (default 0.6)");
  add_model_flags(repeat, repeat_flags);
  add_eval_flags(repeat, repeat_eval);

  // render
  auto* render = app.add_subcommand("render", "Render one frame as SVG");
  std::string frame_id;
  render->add_option("--data", data_path, "Dataset (.json or .csv)")->required();
  render->add_option("--predictions", predictions_path, "Optional predictions.json");
  render->add_option("--frame", frame_id, "frame_id to render")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const json cfg = load_config(g);

    if (*synth) {
      SynthConfig sc;
      if (auto s = section(cfg, "synth"))
        update_from_json(sc, *s);
      else if (!cfg.empty())
        update_from_json(sc, cfg);
      if (n_scenes) sc.n_scenes = *n_scenes;
      if (g.seed_opt->count() > 0) sc.seed = g.seed;
      sc.validate();
      Run run("synth", g);
      run.config()["synth"] = to_json(sc);
      run.config()["hard"] = hard;
      const Dataset d = hard ? generate_hard_corpus(sc) : generate_corpus(sc);
      run.write("dataset.json", dataset_to_json(d));
      run.finish();
      out << "wrote " << d.scenes.size() << " scenes to " << (fs::path(g.out_dir) / "dataset.json").string() << "\n";
      return 0;
    }

    if (*project) {
      ProjectionOptions opts;
      if (mode == "normalized")
        opts.mode = ProjectionMode::normalized;
      else if (mode == "pinhole")
        opts.mode = ProjectionMode::pinhole;
      else
        throw ConfigError("--mode must be 'normalized' or 'pinhole'");
      opts.hfov_rad = hfov;
      opts.window = window;
      if (window < 1 || window % 2 == 0) throw ConfigError("--window must be an odd integer >= 1");

      std::vector<fs::path> sidecars;
      if (fs::is_directory(detections_path)) {
        for (const auto& entry : fs::directory_iterator(detections_path))
          if (entry.path().extension() == ".json") sidecars.push_back(entry.path());
        std::sort(sidecars.begin(), sidecars.end());
      } else {
        if (!fs::exists(detections_path)) throw IoError("detections not found: " + detections_path);
        sidecars.emplace_back(detections_path);
      }
      Run run("project", g);
      run.inputs()["detections"] = detections_path;
      run.inputs()["depth_dir"] = depth_dir;
      run.config()["mode"] = mode;
      run.config()["hfov_rad"] = hfov;
      run.config()["window"] = window;
      Dataset d{dataset_name, opts.mode == ProjectionMode::normalized ? "normalized" : "meters", {}};
      json skipped = json::array();
      bool missing_orientation = false;
      for (const auto& path : sidecars) {
        const DetectionFrame frame = parse_detection_frame(read_file(path), path.string());
        const fs::path depth_path = fs::path(depth_dir) / (frame.frame_id + ".pgm");
        if (!fs::exists(depth_path)) throw IoError("depth image not found: " + depth_path.string());
        const DepthImage depth = read_depth_pgm(depth_path, frame.max_range_mm);
        for (const auto& det : frame.detections) missing_orientation = missing_orientation || !det.theta;
        try {
          d.scenes.push_back(project_frame(frame, depth, opts));
        } catch (const NoValidDepth& e) {
          err << "warning: skipping frame '" << frame.frame_id << "': " << e.what() << "\n";
          skipped.push_back({{"frame_id", frame.frame_id}, {"reason", e.what()}});
        }
      }
      if (missing_orientation)
        err << "warning: some detections carry no orientation; theta was set to 0, train with --no-orientation\n";
      run.config()["skipped_frames"] = skipped;
      run.write("dataset.json", dataset_to_json(d));
      run.finish();
      out << "projected " << d.scenes.size() << " frames (" << skipped.size() << " skipped)\n";
      return 0;
    }

    if (*train_cmd) {
      const Resolved r = resolve(g, cfg, &train_flags, nullptr);
      const Dataset all = read_dataset(data_path);
      Run run("train", g);
      run.inputs()["data"] = data_path;
      run.config()["train_fraction"] = train_fraction;
      record(run, r);
      Dataset train_part = all;
      if (train_fraction < 1.0) {
        auto [tr, te] = split_dataset(all, train_fraction, mix_seed(r.train.seed, 100));
        train_part = std::move(tr);
        run.write("train_split.json", dataset_to_json(train_part));
        run.write("heldout.json", dataset_to_json(te));
      } else if (train_fraction != 1.0) {
        throw ConfigError("--train-fraction must lie in (0, 1]");
      }
      const auto graphs = build_training_graphs(train_part, r.model.feature_mode, r.train.negative_injection);
      const auto stats = sample_stats(graphs);
      const auto result = train(graphs, r.train, r.model);
      run.write("model.json", model_to_json(result.model));
      run.write("train_log.jsonl", epoch_log_jsonl(result.epoch_loss));
      run.config()["sample_stats"] = {{"positives", stats.positives}, {"negatives", stats.negatives},
                                      {"positive_ratio", stats.ratio}};
      run.finish();
      out << "trained on " << train_part.scenes.size() << " scenes; final mean loss "
          << (result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back()) << "\n";
      return 0;
    }

    if (*predict) {
      Resolved r = resolve(g, cfg, nullptr, nullptr);
      if (threshold) r.threshold = *threshold;
      if (!(r.threshold > 0.0 && r.threshold < 1.0)) throw ConfigError("--threshold must lie in (0, 1)");
      const Dataset d = read_dataset(data_path);
      Run run("predict", g);
      run.inputs()["data"] = data_path;
      std::vector<ScenePrediction> preds;
      if (baseline_radius) {
        run.config()["baseline_radius"] = *baseline_radius;
        for (const auto& s : d.scenes) preds.push_back({s.frame_id, baseline_distance_clustering(s, *baseline_radius), {}});
      } else {
        if (model_path.empty()) throw ConfigError("predict needs --model or --baseline-radius");
        run.inputs()["model"] = model_path;
        const GrowlModel model = load_model(model_path);
        run.config()["model"] = to_json(model.config);
        run.config()["threshold"] = r.threshold;
        preds = predict_dataset(d, model, r.threshold, g.threads);
      }
      run.write("predictions.json", predictions_to_json(preds));
      run.finish();
      out << "predicted " << preds.size() << " frames; edge-positive rate " << edge_positive_rate(preds) << "\n";
      return 0;
    }

    if (*eval) {
      const Resolved r = resolve(g, cfg, nullptr, &eval_flags);
      const Dataset d = read_dataset(data_path);
      const auto preds = predictions_from_json(read_file(predictions_path), predictions_path);
      Run run("eval", g);
      run.inputs()["data"] = data_path;
      run.inputs()["predictions"] = predictions_path;
      record(run, r, false);
      const EvalReport report = evaluate(to_frame_predictions(preds), d, r.eval);
      run.write("report.csv", report_csv(report));
      run.write("summary.json", report_summary_json(report));
      run.finish();
      out << "mean_f1 " << report.mean_f1 << " std_f1 " << report.std_f1 << " over " << report.per_frame.size()
          << " frames\n";
      return 0;
    }

    if (*grid_cmd) {
      const Resolved r = resolve(g, cfg, &grid_flags, &grid_eval);
      const Dataset all = read_dataset(data_path);
      GridSearchConfig gs;
      if (!embed_sizes.empty()) gs.embed_sizes = embed_sizes;
      if (!epoch_grid.empty()) gs.epoch_grid = epoch_grid;
      gs.folds = folds;
      gs.repeats = repeats;
      gs.seed = r.train.seed;
      gs.threads = g.threads;
      gs.threshold = r.threshold;
      gs.eval = r.eval;
      Dataset search_set = all;
      if (train_fraction < 1.0) search_set = split_dataset(all, train_fraction, mix_seed(r.train.seed, 100)).first;
      Run run("gridsearch", g);
      run.inputs()["data"] = data_path;
      record(run, r);
      run.config()["train_fraction"] = train_fraction;
      run.config()["embed_sizes"] = gs.embed_sizes;
      run.config()["epoch_grid"] = gs.epoch_grid;
      run.config()["folds"] = gs.folds;
      run.config()["repeats"] = gs.repeats;
      const auto result = grid_search(search_set, gs, r.train, r.model);
      run.write("gridsearch.csv", grid_search_csv(result));
      run.write("best.json", json{{"embed_dim", result.best.embed_dim},
                                  {"epochs", result.best.epochs},
                                  {"mean_f1", result.best.mean_f1},
                                  {"std_f1", result.best.std_f1}}
                                     .dump(1) +
                                 "\n");
      run.finish();
      out << "best embed_dim " << result.best.embed_dim << " epochs " << result.best.epochs << " mean_f1 "
          << result.best.mean_f1 << "\n";
      return 0;
    }

    if (*repeat) {
      const Resolved r = resolve(g, cfg, &repeat_flags, &repeat_eval);
      const Dataset all = read_dataset(data_path);
      RepeatConfig rc;
      rc.n_runs = runs;
      rc.train_fraction = train_fraction;
      rc.seed = r.train.seed;
      rc.threads = g.threads;
      rc.threshold = r.threshold;
      rc.eval = r.eval;
      Run run("repeat", g);
      run.inputs()["data"] = data_path;
      record(run, r);
      run.config()["runs"] = runs;
      run.config()["train_fraction"] = train_fraction;
      const auto result = repeat_experiment(all, rc, r.train, r.model);
      run.write("repeat.csv", repeat_csv(result));
      run.write("summary.json", json{{"runs", result.runs.size()},
                                     {"mean_f1", result.mean_f1},
                                     {"std_f1", result.std_f1}}
                                        .dump(1) +
                                    "\n");
      run.finish();
      out << "mean_f1 " << result.mean_f1 << " std_f1 " << result.std_f1 << " over " << result.runs.size()
          << " runs\n";
      return 0;
    }

    if (*render) {
      const Dataset d = read_dataset(data_path);
      const Scene* scene = d.find(frame_id);
      if (!scene) throw UnknownFrame("frame '" + frame_id + "' is not in " + data_path);
      std::optional<ScenePrediction> pred;
      if (!predictions_path.empty()) {
        for (auto& p : predictions_from_json(read_file(predictions_path), predictions_path))
          if (p.frame_id == frame_id) pred = std::move(p);
        if (!pred) throw UnknownFrame("frame '" + frame_id + "' is not in " + predictions_path);
      }
      Run run("render", g);
      run.inputs()["data"] = data_path;
      if (!predictions_path.empty()) run.inputs()["predictions"] = predictions_path;
      run.config()["frame"] = frame_id;
      const auto path = run.write(frame_id + ".svg", render_scene_svg(*scene, pred ? &*pred : nullptr));
      run.finish();
      out << "wrote " << path.string() << "\n";
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace growl::cli
