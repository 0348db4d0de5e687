#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "llp/bagging.hpp"
#include "llp/io.hpp"
#include "llp/losses.hpp"
#include "llp/metrics.hpp"
#include "llp/theory.hpp"
#include "llp/trainer.hpp"

#ifndef LLP_FORGE_VERSION
#define LLP_FORGE_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace llp;

namespace {

enum Exit : int { kOk = 0, kConfig = 1, kData = 2, kDiverged = 3, kAudit = 4 };

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::InvalidConfig:
    case Errc::InvalidArguments:
    case Errc::NonPositiveAlpha:
    case Errc::KTooLarge:
      return kConfig;
    case Errc::DivergedLoss:
      return kDiverged;
    default:
      return kData;
  }
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

fs::path output_root() {
  const char* env = std::getenv("LLP_FORGE_OUT");
  return env && *env ? fs::path(env) : fs::path("runs");
}

fs::path run_dir(const std::string& out, const std::string& name) {
  return out.empty() ? output_root() / name : fs::path(out);
}

class Manifest {
 public:
  Manifest(fs::path dir, std::string command, std::string invocation)
      : dir_(std::move(dir)), start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["invocation"] = std::move(invocation);
    doc_["version"] = LLP_FORGE_VERSION;
    doc_["status"] = "running";
    doc_["outputs"] = json::object();
  }

  json& operator[](const char* key) { return doc_[key]; }

  void begin() { flush(); }

  void output(const std::string& name, const fs::path& path) { doc_["outputs"][name] = path.string(); }

  int finish(int code, const std::string& message = {}) {
    doc_["status"] = code == kOk ? "ok" : "failed";
    doc_["exit_code"] = code;
    if (!message.empty()) doc_["error"] = message;
    doc_["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    try {
      flush();
    } catch (const Error& e) {
      std::cerr << "llp-forge: " << e.what() << "\n";
    }
    return code;
  }

 private:
  void flush() { write_text_file(dir_ / "manifest.json", doc_.dump(2) + "\n"); }

  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  json doc_;
};

int report_error(const Error& e, Manifest* manifest = nullptr) {
  std::cerr << "llp-forge: " << e.what() << "\n";
  const int code = exit_code_for(e.code());
  return manifest ? manifest->finish(code, e.what()) : code;
}

// Flags that map one-to-one onto TrainConfig settings.
struct SettingFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::string config_file;

  void attach(CLI::App& app) {
    add(app, "--loss", "loss", "dllp|tvstar|combined");
    add(app, "--alpha", "alpha", "TV* exponent, > 0");
    add(app, "--lambda", "lambda", "weight of the contrastive term");
    add(app, "--bag-size", "bag_size", "instances per bag");
    add(app, "--epochs", "epochs", "training epochs");
    add(app, "--lr", "lr", "learning rate");
    add(app, "--optimizer", "optimizer", "sgd|adaptive");
    add(app, "--arch", "arch", "linear|mlp1");
    add(app, "--hidden", "hidden", "hidden width for mlp1");
    add(app, "--seed", "seed", "run seed");
    add(app, "--clip-norm", "clip_norm", "gradient clip (0 disables)");
    app.add_option("--config", config_file, "key = value config file; flags override it");
  }

  TrainConfig resolve() const {
    TrainConfig config;
    if (!config_file.empty()) config = load_config(config_file);
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) apply_setting(config, key, values.at(key));
    }
    config.validate();
    return config;
  }

 private:
  void add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
    options[key] = app.add_option(flag, values[key], help);
  }
};

LabeledDataset load_matching(const std::string& path, const LabeledDataset& reference) {
  auto data = load_dataset(path, reference.num_classes());
  if (data.dim() != reference.dim() || data.num_classes() != reference.num_classes()) {
    throw Error(Errc::DimensionMismatch, "'" + path + "' has " + std::to_string(data.dim()) + " features and " +
                                             std::to_string(data.num_classes()) + " classes, expected " +
                                             std::to_string(reference.dim()) + " and " +
                                             std::to_string(reference.num_classes()));
  }
  return data;
}

LabeledDataset empty_like(const LabeledDataset& d) {
  return LabeledDataset(FeatureMatrix(0, d.dim()), {}, d.num_classes());
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  SettingFlags settings;
  std::string data, val, test, out;
  bool timing = false;
};

int cmd_train(const TrainArgs& args, const std::string& invocation) {
  TrainConfig config;
  try {
    config = args.settings.resolve();
  } catch (const Error& e) {
    return report_error(e);
  }
  const fs::path dir = run_dir(args.out, "train-seed" + std::to_string(config.seed.value));
  Manifest manifest(dir, "train", invocation);
  manifest["seed"] = config.seed.value;
  manifest["config"] = config_to_json(config);
  manifest["inputs"] = {{"data", args.data}, {"val", args.val}, {"test", args.test}};
  try {
    manifest.begin();
    const auto data = load_dataset(args.data);
    const auto val = args.val.empty() ? empty_like(data) : load_matching(args.val, data);
    const auto result = train(data, val, config);

    save_checkpoint(dir / "checkpoint.json", Checkpoint{result.params, config});
    manifest.output("checkpoint", dir / "checkpoint.json");
    std::ostringstream history;
    write_history_csv(history, result.history, args.timing);
    write_text_file(dir / "history.csv", history.str());
    manifest.output("history", dir / "history.csv");

    std::cout << "trained " << result.history.epochs() << " epochs, final train loss "
              << format_double(result.history.train_loss.back()) << "\n";
    if (!args.test.empty()) {
      const auto report = evaluate_model(result.params, load_matching(args.test, data));
      write_text_file(dir / "metrics.json", to_json(report) + "\n");
      manifest.output("metrics", dir / "metrics.json");
      std::cout << to_json(report) << "\n";
    }
    std::cout << "wrote " << dir.string() << "\n";
    return manifest.finish(kOk);
  } catch (const Error& e) {
    return report_error(e, &manifest);
  }
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> checkpoints;
  std::string test, out;
};

int cmd_eval(const EvalArgs& args, const std::string& invocation) {
  const fs::path dir = run_dir(args.out, "eval");
  Manifest manifest(dir, "eval", invocation);
  manifest["inputs"] = {{"checkpoints", args.checkpoints}, {"test", args.test}};
  try {
    manifest.begin();
    json rows = json::array();
    std::ostringstream csv;
    csv << "checkpoint,loss,alpha,lambda," << csv_header() << "\n";
    for (const auto& path : args.checkpoints) {
      const auto ckpt = load_checkpoint(path);
      const auto test = load_dataset(args.test, ckpt.params.num_classes());
      if (test.dim() != ckpt.params.input_dim() || test.num_classes() != ckpt.params.num_classes()) {
        throw Error(Errc::DimensionMismatch, "checkpoint '" + path + "' expects " +
                                                 std::to_string(ckpt.params.input_dim()) + " features and " +
                                                 std::to_string(ckpt.params.num_classes()) + " classes; '" +
                                                 args.test + "' has " + std::to_string(test.dim()) + " and " +
                                                 std::to_string(test.num_classes()));
      }
      const auto report = evaluate_model(ckpt.params, test);
      json row = json::parse(to_json(report));
      row["checkpoint"] = path;
      row["loss"] = to_string(ckpt.config.loss_kind);
      rows.push_back(row);
      csv << path << "," << to_string(ckpt.config.loss_kind) << "," << format_double(ckpt.config.alpha) << ","
          << format_double(ckpt.config.lambda) << "," << to_csv_row(report) << "\n";
    }
    write_text_file(dir / "metrics.json", rows.dump(2) + "\n");
    manifest.output("metrics_json", dir / "metrics.json");
    write_text_file(dir / "metrics.csv", csv.str());
    manifest.output("metrics_csv", dir / "metrics.csv");
    std::cout << rows.dump(2) << "\n";
    return manifest.finish(kOk);
  } catch (const Error& e) {
    return report_error(e, &manifest);
  }
}

// ---- sweep ---------------------------------------------------------------

struct SweepArgs {
  SettingFlags settings;
  std::string data, val, test, out, axis, values;
  std::size_t seeds = 1;
  std::size_t jobs = 1;
};

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw Error(Errc::InvalidConfig, "bad sweep value '" + item + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw Error(Errc::InvalidConfig, "--values is empty");
  return values;
}

int cmd_sweep(const SweepArgs& args, const std::string& invocation) {
  TrainConfig config;
  SweepAxis axis{};
  std::vector<double> values;
  try {
    config = args.settings.resolve();
    axis = parse_sweep_axis(args.axis);
    values = parse_values(args.values);
    if (args.seeds < 1) throw Error(Errc::InvalidConfig, "--seeds must be >= 1");
    for (double v : values) apply_axis(config, axis, v).validate();
  } catch (const Error& e) {
    return report_error(e);
  }
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < args.seeds; ++i) seeds.push_back(config.seed.value + i);

  const fs::path dir = run_dir(args.out, std::string("sweep-") + to_string(axis) + "-seed" + std::to_string(config.seed.value));
  Manifest manifest(dir, "sweep", invocation);
  manifest["seed"] = config.seed.value;
  manifest["config"] = config_to_json(config);
  manifest["axis"] = to_string(axis);
  manifest["values"] = values;
  manifest["seeds"] = seeds;
  try {
    manifest.begin();
    const auto split = [&]() -> DatasetSplit {
      if (args.data.empty()) {
        // Moderately separable synthetic default.
        manifest["inputs"] = {{"synthetic", {{"n_per_class", 500}, {"classes", 2}, {"dim", 2}, {"separation", 2.0}}}};
        return split_dataset(gen_blobs(500, 2, 2, 2.0, config.seed), 0.7, 0.1, derive_seed(config.seed, 1));
      }
      manifest["inputs"] = {{"data", args.data}, {"val", args.val}, {"test", args.test}};
      auto data = load_dataset(args.data);
      if (args.test.empty()) return split_dataset(data, 0.7, 0.1, derive_seed(config.seed, 1));
      auto val = args.val.empty() ? empty_like(data) : load_matching(args.val, data);
      auto test = load_matching(args.test, data);
      return DatasetSplit{std::move(data), std::move(val), std::move(test)};
    }();
    const auto rows = sweep(split.train, split.val, split.test, config, axis, values, seeds, args.jobs);
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    write_text_file(dir / "sweep.csv", csv.str());
    manifest.output("sweep", dir / "sweep.csv");
    for (double v : values) {
      double total = 0.0;
      for (const auto& r : rows) total += r.value == v ? r.scores.f1 : 0.0;
      std::cout << to_string(axis) << "=" << format_double(v)
                << " mean w_f1=" << format_double(total / static_cast<double>(seeds.size())) << "\n";
    }
    std::cout << "wrote " << (dir / "sweep.csv").string() << " (" << rows.size() << " rows)\n";
    return manifest.finish(kOk);
  } catch (const Error& e) {
    return report_error(e, &manifest);
  }
}

// ---- check ---------------------------------------------------------------

struct CheckArgs {
  std::vector<std::string> only;
  bool theorem = false;
  std::size_t m = 1000;
  double delta = 0.05;
  std::size_t trials = 1000;
  std::size_t hypotheses = 200;
  std::uint64_t seed = 0;
  std::string out;
};

const std::vector<std::string> kAudits{"pinsker", "bound", "symmetry", "monotonicity", "lipschitz", "gradcheck", "theorem"};

json audit(const std::string& name, const CheckArgs& args) {
  const RngSeed seed{args.seed};
  const auto stream = static_cast<std::uint64_t>(std::find(kAudits.begin(), kAudits.end(), name) - kAudits.begin());
  Rng rng(derive_seed(seed, stream).value);
  json r;
  if (name == "pinsker") {
    std::size_t violations = 0, trials = 0;
    double slack = std::numeric_limits<double>::infinity();
    for (std::size_t c : {2u, 3u, 5u}) {
      const auto p = theory::pinsker_audit(100000, c, derive_seed(seed, c));
      violations += p.violations;
      trials += p.trials;
      slack = std::min(slack, p.min_slack);
    }
    r = {{"trials", trials}, {"violations", violations}, {"min_slack", slack}, {"pass", violations == 0}};
  } else if (name == "bound") {
    double worst = 0.0;
    for (double alpha : {1.0, 2.0, 3.5}) {
      for (int i = 0; i < 1000000; ++i) {
        const std::size_t c = 2 + static_cast<std::size_t>(i % 4);
        worst = std::max(worst, tv_star_loss(sample_uniform_simplex(rng, c), sample_uniform_simplex(rng, c), alpha));
      }
    }
    r = {{"pairs", 3000000}, {"max_loss", worst}, {"limit", 2.0}, {"pass", worst <= 2.0 + 1e-12}};
  } else if (name == "symmetry") {
    std::size_t asymmetric = 0;
    for (int i = 0; i < 100000; ++i) {
      const std::size_t c = 2 + static_cast<std::size_t>(i % 4);
      const auto p = sample_uniform_simplex(rng, c);
      const auto q = sample_uniform_simplex(rng, c);
      const double alpha = 0.5 + 3.0 * uniform01(rng);
      asymmetric += tv_star_loss(p, q, alpha) != tv_star_loss(q, p, alpha);
    }
    const double kl_gap = kl_proportion_loss(make_simplex({0.9, 0.1}), make_simplex({0.5, 0.5})) -
                          kl_proportion_loss(make_simplex({0.5, 0.5}), make_simplex({0.9, 0.1}));
    r = {{"pairs", 100000}, {"asymmetric", asymmetric}, {"kl_asymmetry_fixture", kl_gap},
         {"pass", asymmetric == 0 && kl_gap != 0.0}};
  } else if (name == "monotonicity") {
    const std::vector<double> alphas{0.33, 0.5, 1.0, 2.0, 2.5, 3.5};
    std::size_t violations = 0;
    for (int i = 0; i < 100000; ++i) {
      const std::size_t c = 2 + static_cast<std::size_t>(i % 4);
      const auto p = sample_uniform_simplex(rng, c);
      const auto q = sample_uniform_simplex(rng, c);
      for (std::size_t k = 0; k + 1 < alphas.size(); ++k)
        violations += tv_star_loss(p, q, alphas[k]) < tv_star_loss(p, q, alphas[k + 1]);
    }
    r = {{"pairs", 100000}, {"alphas", alphas}, {"violations", violations}, {"pass", violations == 0}};
  } else if (name == "lipschitz") {
    bool ok = true;
    json per_alpha = json::array();
    for (double alpha : {1.0, 2.0, 3.5}) {
      const auto p = theory::lipschitz_probe(alpha, 100000, 2, seed);
      const double bound = theory::binary_gradient_norm_bound(alpha);
      const bool finite = std::isfinite(p.max_value_slope) && std::isfinite(p.max_gradient_slope);
      ok = ok && finite && p.max_value_slope <= bound * (1.0 + 1e-3);
      per_alpha.push_back({{"alpha", alpha}, {"max_value_slope", p.max_value_slope},
                           {"max_gradient_slope", p.max_gradient_slope}, {"value_slope_bound", bound}});
    }
    const std::vector<double> eps{1e-2, 1e-4, 1e-6};
    const auto kl = theory::kl_slope_sequence(eps);
    const bool diverges = kl[0] < kl[1] && kl[1] < kl[2] && kl[2] > 100.0;
    r = {{"tv_star", per_alpha}, {"kl_eps", eps}, {"kl_slopes", kl}, {"pass", ok && diverges}};
  } else if (name == "gradcheck") {
    const auto g = theory::gradient_check({0.5, 1.0, 2.0, 3.5}, 50, seed);
    r = {{"configurations", g.configurations}, {"worst_loss_error", g.worst_loss_error},
         {"worst_end_to_end_error", g.worst_end_to_end_error},
         {"pass", g.worst_loss_error <= 1e-5 && g.worst_end_to_end_error <= 1e-4}};
  } else if (name == "theorem") {
    json per_alpha = json::array();
    bool ok = true;
    for (double alpha : {1.0, 2.0}) {
      const auto b = theory::theorem_mc_audit(args.m, args.delta, alpha, args.hypotheses, args.trials, seed);
      ok = ok && b.violation_fraction() <= args.delta;
      per_alpha.push_back({{"alpha", alpha}, {"trials", b.trials}, {"violations", b.violations},
                           {"violation_fraction", b.violation_fraction()}, {"mean_slack", b.mean_slack},
                           {"rhs", b.rhs}});
    }
    r = {{"m", args.m}, {"delta", args.delta}, {"hypotheses", args.hypotheses}, {"reports", per_alpha}, {"pass", ok}};
  } else {
    throw Error(Errc::InvalidConfig, "unknown audit '" + name + "'");
  }
  return r;
}

int cmd_check(const CheckArgs& args, const std::string& invocation) {
  std::vector<std::string> selected = args.only;
  if (args.theorem) selected.push_back("theorem");
  if (selected.empty()) selected = kAudits;
  for (const auto& name : selected) {
    if (std::find(kAudits.begin(), kAudits.end(), name) == kAudits.end()) {
      return report_error(Error(Errc::InvalidConfig, "unknown audit '" + name + "'"));
    }
  }
  if (!(args.delta > 0.0 && args.delta < 1.0) || args.m < 2 || args.trials < 1 || args.hypotheses < 2) {
    return report_error(Error(Errc::InvalidConfig, "need 0 < delta < 1, m >= 2, trials >= 1, hypotheses >= 2"));
  }
  const fs::path dir = run_dir(args.out, "check-seed" + std::to_string(args.seed));
  Manifest manifest(dir, "check", invocation);
  manifest["seed"] = args.seed;
  manifest["audits"] = selected;
  try {
    manifest.begin();
    json report;
    report["audits"] = json::object();
    std::vector<std::string> failed;
    for (const auto& name : selected) {
      report["audits"][name] = audit(name, args);
      if (!report["audits"][name]["pass"].get<bool>()) failed.push_back(name);
    }
    report["pass"] = failed.empty();
    report["failed"] = failed;
    write_text_file(dir / "report.json", report.dump(2) + "\n");
    manifest.output("report", dir / "report.json");
    std::cout << report.dump(2) << "\n";
    if (!failed.empty()) {
      std::string names;
      for (const auto& f : failed) names += (names.empty() ? "" : ", ") + f;
      std::cerr << "llp-forge: audit failed: " << names << "\n";
      return manifest.finish(kAudit, "audit failed: " + names);
    }
    return manifest.finish(kOk);
  } catch (const Error& e) {
    return report_error(e, &manifest);
  }
}

// ---- gen-blobs -----------------------------------------------------------

struct BlobArgs {
  std::size_t n_per_class = 500;
  int classes = 2;
  Eigen::Index dim = 2;
  double separation = 2.0;
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out;
};

int cmd_gen_blobs(const BlobArgs& args, const std::string& invocation) {
  if (args.classes < 2 || args.dim < 1 || args.n_per_class < 1 || !(args.separation >= 0.0)) {
    return report_error(Error(Errc::InvalidConfig, "need classes >= 2, dim >= 1, n-per-class >= 1, separation >= 0"));
  }
  const fs::path dir = run_dir(args.out, "blobs-seed" + std::to_string(args.seed));
  Manifest manifest(dir, "gen-blobs", invocation);
  manifest["seed"] = args.seed;
  manifest["config"] = {{"n_per_class", args.n_per_class}, {"classes", args.classes}, {"dim", args.dim},
                        {"separation", args.separation}, {"split", {0.7, 0.1, 0.2}}};
  try {
    manifest.begin();
    const auto data = gen_blobs(args.n_per_class, args.classes, args.dim, args.separation, RngSeed{args.seed});
    const auto split = split_dataset(data, 0.7, 0.1, derive_seed(RngSeed{args.seed}, 1));
    const std::string ext = "." + args.format;
    for (const auto& [name, part] : {std::pair{"all", &data}, std::pair{"train", &split.train},
                                      std::pair{"val", &split.val}, std::pair{"test", &split.test}}) {
      save_dataset(dir / (std::string(name) + ext), *part);
      manifest.output(name, dir / (std::string(name) + ext));
    }
    std::cout << "wrote " << dir.string() << "\n";
    return manifest.finish(kOk);
  } catch (const Error& e) {
    return report_error(e, &manifest);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning from label proportions: training, evaluation, sweeps and audits", "llp-forge"};
  app.set_version_flag("--version", LLP_FORGE_VERSION);
  app.require_subcommand(1);
  const std::string invocation = join_args(argc, argv);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a model on bag proportions");
  train_args.settings.attach(*train_cmd);
  train_cmd->add_option("--data", train_args.data, "training set (.csv or .jsonl)")->required();
  train_cmd->add_option("--val", train_args.val, "validation set");
  train_cmd->add_option("--test", train_args.test, "test set; writes metrics.json");
  train_cmd->add_option("--out", train_args.out, "output directory");
  train_cmd->add_flag("--timing", train_args.timing, "record per-epoch seconds in history.csv");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "instance-level weighted P/R/F1 of checkpoints");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoints, "checkpoint JSON (repeatable)")->required();
  auto* test_opt = eval_cmd->add_option("--test", eval_args.test, "labelled test set");
  eval_cmd->add_option("--data", eval_args.test, "alias for --test")->excludes(test_opt);
  eval_cmd->add_option("--out", eval_args.out, "output directory");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "one run per value and seed; writes sweep.csv");
  sweep_args.settings.attach(*sweep_cmd);
  sweep_cmd->add_option("--axis", sweep_args.axis, "bag-size|alpha|lambda")->required();
  sweep_cmd->add_option("--values", sweep_args.values, "comma-separated values")->required();
  sweep_cmd->add_option("--seeds", sweep_args.seeds, "number of seeds (seed, seed+1, ...)");
  sweep_cmd->add_option("--jobs", sweep_args.jobs, "concurrent runs")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--data", sweep_args.data, "dataset; synthetic blobs when omitted");
  sweep_cmd->add_option("--val", sweep_args.val, "validation set");
  sweep_cmd->add_option("--test", sweep_args.test, "test set; --data is split 70/10/20 when omitted");
  sweep_cmd->add_option("--out", sweep_args.out, "output directory");

  CheckArgs check_args;
  auto* check_cmd = app.add_subcommand("check", "run the loss and bound audits");
  check_cmd->add_option("--only", check_args.only, "pinsker,bound,symmetry,monotonicity,lipschitz,gradcheck,theorem")
      ->delimiter(',');
  check_cmd->add_flag("--theorem", check_args.theorem, "run the generalization-bound audit");
  check_cmd->add_option("--m", check_args.m, "sample size for the bound audit");
  check_cmd->add_option("--delta", check_args.delta, "confidence parameter");
  check_cmd->add_option("--trials", check_args.trials, "Monte-Carlo trials");
  check_cmd->add_option("--hypotheses", check_args.hypotheses, "threshold grid size");
  check_cmd->add_option("--seed", check_args.seed, "audit seed");
  check_cmd->add_option("--out", check_args.out, "output directory");

  BlobArgs blob_args;
  auto* blob_cmd = app.add_subcommand("gen-blobs", "write a Gaussian-blob dataset with train/val/test splits");
  blob_cmd->add_option("--n-per-class", blob_args.n_per_class, "instances per class");
  blob_cmd->add_option("--classes", blob_args.classes, "number of classes");
  blob_cmd->add_option("--dim", blob_args.dim, "feature dimension");
  blob_cmd->add_option("--separation", blob_args.separation, "distance of each centre from the origin");
  blob_cmd->add_option("--seed", blob_args.seed, "seed");
  blob_cmd->add_option("--format", blob_args.format, "csv|jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  blob_cmd->add_option("--out", blob_args.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*train_cmd) return cmd_train(train_args, invocation);
    if (*eval_cmd) {
      if (eval_args.test.empty()) return report_error(Error(Errc::InvalidConfig, "eval needs --test"));
      return cmd_eval(eval_args, invocation);
    }
    if (*sweep_cmd) return cmd_sweep(sweep_args, invocation);
    if (*check_cmd) return cmd_check(check_args, invocation);
    if (*blob_cmd) return cmd_gen_blobs(blob_args, invocation);
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << "llp-forge: " << e.what() << "\n";
    return kData;
  }
  return kConfig;
}
