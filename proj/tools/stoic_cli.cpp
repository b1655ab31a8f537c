// stoic: command-line entry point for the stoichiometry classification pipeline.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "stoic/dataset.hpp"
#include "stoic/encoding.hpp"
#include "stoic/evaluation.hpp"
#include "stoic/influence.hpp"
#include "stoic/linear_models.hpp"
#include "stoic/pdb_ingest.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw stoic::Error(stoic::ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw stoic::Error(stoic::ErrorCode::Io, "write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw stoic::Error(stoic::ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string pm(const stoic::MetricSummary& m) {
  if (m.defined == 0) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f +- %.4f (n=%zu)", m.mean, m.std, m.defined);
  return buf;
}

struct CvFlags {
  std::uint64_t seed = 0;
  std::size_t outer = 10;
  std::size_t inner = 9;
  std::size_t iterations = 5;
  std::size_t trials = 30;
  double low = 1e-4;
  double high = 1e4;
  unsigned jobs = 1;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--seed", seed, "Base seed; iteration i uses seed+i")->capture_default_str();
    cmd.add_option("--outer-folds", outer)->capture_default_str();
    cmd.add_option("--inner-folds", inner)->capture_default_str();
    cmd.add_option("--iterations", iterations)->capture_default_str();
    cmd.add_option("--trials", trials, "Random-search trials")->capture_default_str();
    cmd.add_option("--search-low", low)->capture_default_str();
    cmd.add_option("--search-high", high)->capture_default_str();
    cmd.add_option("--jobs", jobs, "Worker threads")->capture_default_str();
  }

  stoic::CvConfig config() const {
    stoic::CvConfig cfg;
    cfg.base_seed = seed;
    cfg.outer_folds = outer;
    cfg.inner_folds = inner;
    cfg.iterations = iterations;
    cfg.search_trials = trials;
    cfg.search_low = low;
    cfg.search_high = high;
    cfg.jobs = jobs;
    cfg.validate();
    return cfg;
  }
};

// ---------------------------------------------------------------- ingest

struct IngestFlags {
  bool live = false;
  std::string fixtures;
  std::string csv;
  std::size_t cap = 100;
  std::string out;
  bool no_cache = false;
  std::string symmetry = "Icosahedral";
  unsigned in_flight = 4;
};

int cmd_ingest(const IngestFlags& f) {
  stoic::StoichiometryDataset dataset = [&] {
    if (!f.csv.empty()) return stoic::load_dataset(f.csv, 0);
    std::unique_ptr<stoic::pdb::Transport> transport;
    if (f.live) {
      transport = stoic::pdb::make_http_transport();
      if (!f.no_cache) {
        const char* env = std::getenv("STOIC_CACHE_DIR");
        const fs::path dir = env && *env ? fs::path(env) : fs::path(".stoic-cache");
        transport = std::make_unique<stoic::pdb::CachingTransport>(std::move(transport), dir);
      }
    } else {
      transport = std::make_unique<stoic::pdb::FixtureTransport>(f.fixtures);
    }
    std::vector<stoic::pdb::FetchedEntry> per_class[2];
    const int counts[2] = {60, 180};
    for (int c = 0; c < 2; ++c) {
      const auto query = stoic::pdb::build_search_query(counts[c], f.symmetry);
      const auto ids = stoic::pdb::fetch_entry_ids(query, *transport);
      std::cout << counts[c] << "-mer search: " << ids.size() << " polymer entities\n";
      per_class[c] = stoic::pdb::fetch_sequences(ids, *transport, f.in_flight);
    }
    return stoic::pdb::assemble_corpus(std::move(per_class[0]), std::move(per_class[1]), f.cap);
  }();

  std::cout << "records: " << dataset.size() << " (60-mer " << dataset.count(stoic::StoichiometryClass::Sixty)
            << ", 180-mer " << dataset.count(stoic::StoichiometryClass::OneEighty) << "), longest "
            << dataset.longest_sequence() << "\n";
  std::cout << stoic::format_histogram(stoic::length_histogram(dataset));
  if (!f.out.empty()) write_atomic(f.out, stoic::to_csv(dataset));
  return kOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateFlags {
  std::string data;
  std::string map = "clusters";
  std::string encoding = "onehot";
  std::string model = "ridge";
  std::size_t max_length = 0;
  bool all = false;
  std::string out = "results";
  CvFlags cv;
};

int cmd_evaluate(const EvaluateFlags& f) {
  const auto cfg = f.cv.config();
  const auto dataset = stoic::load_dataset(f.data, f.max_length);
  std::vector<std::string> maps{f.map}, encodings{f.encoding}, models{f.model};
  if (f.all) {
    maps = {"charprotset", "clusters"};
    encodings = {"integer", "onehot"};
    models = {"logistic", "ridge", "svm"};
  }
  std::string runs = stoic::runs_csv_header();
  std::string summary = stoic::summary_csv_header();
  for (const auto& map_name : maps) {
    const auto& map = stoic::encoding_map_by_name(map_name);
    for (const auto& enc_name : encodings) {
      const auto method = stoic::encoding_method_from_string(enc_name);
      const auto x = stoic::encode(dataset, map, method);
      for (const auto& model_name : models) {
        const auto kind = stoic::model_kind_from_string(model_name);
        const auto results = stoic::nested_cv(x, kind, cfg);
        const auto agg = stoic::aggregate(results);
        const stoic::ExperimentTag tag{enc_name, map_name, model_name};
        runs += stoic::runs_csv_rows(tag, results, cfg.outer_folds);
        summary += stoic::summary_csv_row(tag, agg);
        std::cout << map_name << " / " << enc_name << " / " << model_name << " over " << agg.runs << " runs\n"
                  << "  auroc        " << pm(agg.auroc) << "\n"
                  << "  sensitivity  " << pm(agg.sensitivity) << "\n"
                  << "  specificity  " << pm(agg.specificity) << "\n"
                  << "  precision    " << pm(agg.precision) << "\n"
                  << "  npv          " << pm(agg.npv) << "\n";
      }
    }
  }
  write_atomic(fs::path(f.out) / "runs.csv", runs);
  write_atomic(fs::path(f.out) / "summary.csv", summary);
  return kOk;
}

// ---------------------------------------------------------------- ablate

struct AblateFlags {
  std::string data;
  std::string map = "charprotset";
  std::string encoding = "onehot";
  std::string model = "ridge";
  std::string method = "weights";
  std::string grid = "1:40:1";
  std::size_t max_length = 0;
  std::size_t knn = 5;
  double kernel_width = 0.0;
  std::string out = "results";
  CvFlags cv;
};

int cmd_ablate(const AblateFlags& f) {
  const auto grid = stoic::parse_grid(f.grid);
  const auto cfg = f.cv.config();
  std::vector<stoic::SelectionMethod> methods;
  if (f.method == "all") {
    methods = {stoic::SelectionMethod::TruncationPrefix, stoic::SelectionMethod::WeightRanking,
               stoic::SelectionMethod::VarianceRanking, stoic::SelectionMethod::LaplacianScore};
  } else {
    methods.push_back(stoic::selection_method_from_string(f.method));
  }
  const auto dataset = stoic::load_dataset(f.data, f.max_length);
  const auto x = stoic::encode(dataset, stoic::encoding_map_by_name(f.map), stoic::encoding_method_from_string(f.encoding));
  const auto kind = stoic::model_kind_from_string(f.model);
  stoic::AblationOptions opts;
  opts.knn = f.knn;
  opts.kernel_width = f.kernel_width;

  std::string csv = stoic::ablation_csv_header();
  std::vector<stoic::AblationResult> results;
  for (auto method : methods) {
    auto r = stoic::ablation_run(x, kind, method, grid, cfg, opts);
    csv += stoic::ablation_csv_rows(r);
    std::printf("%s: best %g%% (%zu positions) mean AUROC %.4f\n", stoic::to_string(method).c_str(), r.best_percent,
                r.best_positions.size(), r.best_mean_auroc);
    results.push_back(std::move(r));
  }
  write_atomic(fs::path(f.out) / "ablation.csv", csv);
  write_atomic(fs::path(f.out) / "positions.json", stoic::positions_json(results));
  return kOk;
}

// ---------------------------------------------------------------- train / export

struct TrainFlags {
  std::string data;
  std::string map = "charprotset";
  std::string encoding = "onehot";
  std::string model = "ridge";
  std::size_t max_length = 0;
  double regularization = 0.0;
  std::string out = "model.json";
  CvFlags cv;
};

int cmd_train(const TrainFlags& f) {
  const auto cfg = f.cv.config();
  const auto dataset = stoic::load_dataset(f.data, f.max_length);
  const auto x = stoic::encode(dataset, stoic::encoding_map_by_name(f.map), stoic::encoding_method_from_string(f.encoding));
  const auto kind = stoic::model_kind_from_string(f.model);
  stoic::Hyperparams hp{f.regularization, cfg.max_iterations, cfg.tolerance};
  if (f.regularization <= 0.0) {
    hp = stoic::hyperparam_search(x, kind, cfg, cfg.base_seed);
    std::printf("searched regularization: %.6g\n", hp.regularization);
  }
  const auto model = stoic::fit(kind, x, hp);
  if (!model.converged) std::cerr << "stoic: warning: solver stopped before reaching tolerance\n";
  write_atomic(f.out, stoic::model_to_json(model));
  return kOk;
}

int cmd_export_weights(const std::string& model_path, const std::string& out) {
  if (!fs::exists(model_path)) throw stoic::Error(stoic::ErrorCode::Io, "model file '" + model_path + "' not found");
  const auto model = stoic::model_from_json(read_text(model_path));
  write_atomic(fs::path(out) / "weights.csv", stoic::weights_csv(model));
  write_atomic(fs::path(out) / "positional.csv", stoic::positional_csv(stoic::positional_weights(model)));
  std::printf("wrote %zu weights, %zu positions, |w|_1 = %.17g\n", model.layout.features(), model.layout.positions,
              model.weights.lpNorm<1>());
  return kOk;
}

/// Prepends `--key value` pairs from a JSON config so explicit flags, which
/// come later on the command line, take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config_path.empty() || args.empty()) return args;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(config_path));
  } catch (const nlohmann::json::exception& e) {
    throw stoic::Error(stoic::ErrorCode::BadConfig, "config '" + config_path + "': " + e.what());
  }
  if (!j.is_object()) throw stoic::Error(stoic::ErrorCode::BadConfig, "config must be a JSON object");
  std::vector<std::string> from_file;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) from_file.push_back(flag);
    } else if (value.is_string()) {
      from_file.push_back(flag);
      from_file.push_back(value.get<std::string>());
    } else {
      from_file.push_back(flag);
      from_file.push_back(value.dump());
    }
  }
  // args[0] is the subcommand.
  args.insert(args.begin() + 1, from_file.begin(), from_file.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VLP stoichiometry classification with interpretable linear models"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  app.add_option("--config", "JSON file of flag values; explicit flags override it");

  IngestFlags ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Build or inspect the 60/180-mer corpus");
  auto* live_opt = ingest_cmd->add_flag("--live", ingest.live, "Query the live RCSB services");
  auto* fixtures_opt = ingest_cmd->add_option("--fixtures", ingest.fixtures, "Directory of recorded responses");
  auto* csv_opt = ingest_cmd->add_option("--csv", ingest.csv, "Existing corpus CSV to summarize");
  live_opt->excludes(fixtures_opt)->excludes(csv_opt);
  fixtures_opt->excludes(csv_opt);
  ingest_cmd->add_option("--cap", ingest.cap, "Sequences kept per class")->capture_default_str();
  ingest_cmd->add_option("--out", ingest.out, "Corpus CSV to write");
  ingest_cmd->add_flag("--no-cache", ingest.no_cache, "Bypass the response cache (STOIC_CACHE_DIR)");
  ingest_cmd->add_option("--symmetry", ingest.symmetry)->capture_default_str();
  ingest_cmd->add_option("--jobs", ingest.in_flight, "Concurrent sequence fetches")->capture_default_str();

  EvaluateFlags evaluate;
  auto* eval_cmd = app.add_subcommand("evaluate", "Nested cross-validation with random hyperparameter search");
  eval_cmd->add_option("--data", evaluate.data, "Corpus CSV")->required();
  eval_cmd->add_option("--map", evaluate.map, "charprotset|clusters")->capture_default_str();
  eval_cmd->add_option("--encoding", evaluate.encoding, "integer|onehot")->capture_default_str();
  eval_cmd->add_option("--model", evaluate.model, "ridge|logistic|svm")->capture_default_str();
  eval_cmd->add_option("--max-length", evaluate.max_length, "Padding length (0: longest sequence)");
  eval_cmd->add_flag("--all", evaluate.all, "Sweep every map x encoding x model");
  eval_cmd->add_option("--out", evaluate.out, "Output directory")->capture_default_str();
  evaluate.cv.add_to(*eval_cmd);

  AblateFlags ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Positional-influence mask-and-retrain ablation");
  ablate_cmd->add_option("--data", ablate.data, "Corpus CSV")->required();
  ablate_cmd->add_option("--method", ablate.method, "weights|variance|laplacian|prefix|all")->capture_default_str();
  ablate_cmd->add_option("--grid", ablate.grid, "start:stop:step or comma list of percentages")->capture_default_str();
  ablate_cmd->add_option("--map", ablate.map)->capture_default_str();
  ablate_cmd->add_option("--encoding", ablate.encoding)->capture_default_str();
  ablate_cmd->add_option("--model", ablate.model)->capture_default_str();
  ablate_cmd->add_option("--max-length", ablate.max_length);
  ablate_cmd->add_option("--knn", ablate.knn, "Neighbours for the Laplacian graph")->capture_default_str();
  ablate_cmd->add_option("--kernel-width", ablate.kernel_width, "Heat-kernel t (0: mean squared distance)");
  ablate_cmd->add_option("--out", ablate.out)->capture_default_str();
  ablate.cv.add_to(*ablate_cmd);

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "Fit one model on the whole corpus and save it as JSON");
  train_cmd->add_option("--data", train.data, "Corpus CSV")->required();
  train_cmd->add_option("--map", train.map)->capture_default_str();
  train_cmd->add_option("--encoding", train.encoding)->capture_default_str();
  train_cmd->add_option("--model", train.model)->capture_default_str();
  train_cmd->add_option("--max-length", train.max_length);
  train_cmd->add_option("--regularization", train.regularization, "Fixed alpha/C (omit to search)");
  train_cmd->add_option("--out", train.out)->capture_default_str();
  train.cv.add_to(*train_cmd);

  std::string model_path, export_out = "weights";
  auto* export_cmd = app.add_subcommand("export-weights", "Write weight heatmap and positional-score CSVs");
  export_cmd->add_option("--model", model_path, "Model JSON from `train`")->required();
  export_cmd->add_option("--out", export_out, "Output directory")->capture_default_str();

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "stoic: " << e.what() << "\n";
    return kUsageError;
  }

  if (ingest_cmd->parsed() && !ingest.live && ingest.fixtures.empty() && ingest.csv.empty()) {
    std::cerr << "stoic: ingest needs one of --live, --fixtures <dir>, --csv <file>\n";
    return kUsageError;
  }

  try {
    if (ingest_cmd->parsed()) return cmd_ingest(ingest);
    if (eval_cmd->parsed()) return cmd_evaluate(evaluate);
    if (ablate_cmd->parsed()) return cmd_ablate(ablate);
    if (train_cmd->parsed()) return cmd_train(train);
    if (export_cmd->parsed()) return cmd_export_weights(model_path, export_out);
  } catch (const std::exception& e) {
    std::cerr << "stoic: error: " << e.what() << "\n";
    return kDomainError;
  }
  return kUsageError;
}
