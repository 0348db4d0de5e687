#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>

#include "llp/bagging.hpp"
#include "llp/io.hpp"
#include "llp/losses.hpp"
#include "llp/metrics.hpp"
#include "llp/model.hpp"
#include "llp/theory.hpp"
#include "llp/trainer.hpp"

namespace py = pybind11;
using namespace llp;

namespace {

int infer_classes(const std::vector<int>& y, int num_classes) {
  if (num_classes > 0) return num_classes;
  const int top = y.empty() ? 1 : *std::max_element(y.begin(), y.end());
  return std::max(2, top + 1);
}

LabeledDataset dataset(const FeatureMatrix& x, const std::vector<int>& y, int num_classes) {
  return LabeledDataset(x, y, infer_classes(y, num_classes));
}

std::string setting_text(const py::handle& value) {
  if (py::isinstance<py::bool_>(value)) return value.cast<bool>() ? "true" : "false";
  return py::str(value).cast<std::string>();
}

TrainConfig make_config(const py::kwargs& kwargs) {
  TrainConfig config;
  for (const auto& [key, value] : kwargs) {
    if (value.is_none()) continue;
    auto name = key.cast<std::string>();
    if (name == "lambda_") name = "lambda";
    apply_setting(config, name, setting_text(value));
  }
  config.validate();
  return config;
}

py::dict history_dict(const TrainHistory& h) {
  py::dict d;
  d["train_loss"] = h.train_loss;
  d["val_loss"] = h.val_loss;
  d["seconds"] = h.seconds;
  d["max_bag_loss"] = h.max_bag_loss;
  return d;
}

py::dict report_dict(const MetricsReport& r) {
  const int c = r.confusion.num_classes();
  std::vector<std::vector<std::uint64_t>> cm(static_cast<std::size_t>(c), std::vector<std::uint64_t>(static_cast<std::size_t>(c)));
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) cm[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = r.confusion.at(i, j);
  py::dict d;
  d["w_precision"] = r.scores.precision;
  d["w_recall"] = r.scores.recall;
  d["w_f1"] = r.scores.f1;
  d["confusion"] = cm;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Learning from label proportions: losses, bag-level training and audits";

  py::register_exception<Error>(m, "LlpError", PyExc_ValueError);

  // Losses.
  m.def("kl_proportion_loss", [](std::vector<double> rho, std::vector<double> rho_tilde) {
    return kl_proportion_loss(make_simplex(std::move(rho)), make_simplex(std::move(rho_tilde)));
  }, py::arg("rho"), py::arg("rho_tilde"));
  m.def("tv_distance", [](std::vector<double> rho, std::vector<double> rho_tilde) {
    return tv_distance(make_simplex(std::move(rho)), make_simplex(std::move(rho_tilde)));
  }, py::arg("rho"), py::arg("rho_tilde"));
  m.def("tv_star_loss", [](std::vector<double> rho, std::vector<double> rho_tilde, double alpha) {
    return tv_star_loss(make_simplex(std::move(rho)), make_simplex(std::move(rho_tilde)), alpha);
  }, py::arg("rho"), py::arg("rho_tilde"), py::arg("alpha") = 1.0);
  m.def("tv_star_gradient", [](std::vector<double> rho, std::vector<double> rho_tilde, double alpha) {
    return tv_star_gradient(make_simplex(std::move(rho)), make_simplex(std::move(rho_tilde)), alpha);
  }, py::arg("rho"), py::arg("rho_tilde"), py::arg("alpha") = 1.0, "Gradient with respect to rho_tilde.");
  m.def("ssc_loss", [](const EmbeddingMatrix& z) { return ssc_loss(z); }, py::arg("embeddings"));
  m.def("ssc_gradient", [](const EmbeddingMatrix& z) { return ssc_gradient(z); }, py::arg("embeddings"));

  // Data.
  m.def("gen_blobs", [](std::size_t n_per_class, int classes, Eigen::Index dim, double separation, std::uint64_t seed) {
    const auto d = gen_blobs(n_per_class, classes, dim, separation, RngSeed{seed});
    return py::make_tuple(d.features(), d.labels());
  }, py::arg("n_per_class"), py::arg("classes") = 2, py::arg("dim") = 2, py::arg("separation") = 2.0,
     py::arg("seed") = 0, "Returns (X, y).");
  m.def("bag_proportions", [](const std::vector<int>& labels, int num_classes) {
    const auto p = bag_proportions(labels, num_classes);
    return std::vector<double>(p.begin(), p.end());
  }, py::arg("labels"), py::arg("num_classes"));
  m.def("make_bags", [](const std::vector<int>& y, std::size_t bag_size, std::uint64_t seed, int num_classes,
                        bool keep_partial) {
    const LabeledDataset d(FeatureMatrix::Zero(static_cast<Eigen::Index>(y.size()), 1), y, infer_classes(y, num_classes));
    py::list out;
    for (const auto& bag : make_bags(d, BagPlan{bag_size, keep_partial, RngSeed{seed}})) {
      const auto p = bag.proportion.values();
      out.append(py::make_tuple(bag.instance_indices, std::vector<double>(p.begin(), p.end())));
    }
    return out;
  }, py::arg("labels"), py::arg("bag_size"), py::arg("seed") = 0, py::arg("num_classes") = 0,
     py::arg("keep_partial") = true, "List of (indices, proportions) for one shuffled partition.");

  // Configuration and models.
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init(&make_config), "Keyword settings: bag_size, epochs, lr, alpha, lambda, optimizer, seed, loss, "
                                   "arch, hidden, keep_partial, clip_norm.")
      .def_readwrite("bag_size", &TrainConfig::bag_size)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("alpha", &TrainConfig::alpha)
      .def_readwrite("lambda_", &TrainConfig::lambda)
      .def_readwrite("hidden", &TrainConfig::hidden)
      .def_readwrite("keep_partial", &TrainConfig::keep_partial)
      .def_property("seed", [](const TrainConfig& c) { return c.seed.value; },
                    [](TrainConfig& c, std::uint64_t s) { c.seed = RngSeed{s}; })
      .def_property("loss", [](const TrainConfig& c) { return std::string(to_string(c.loss_kind)); },
                    [](TrainConfig& c, const std::string& s) { c.loss_kind = parse_loss_kind(s); })
      .def_property("arch", [](const TrainConfig& c) { return std::string(to_string(c.architecture)); },
                    [](TrainConfig& c, const std::string& s) { c.architecture = parse_architecture(s); })
      .def_property("optimizer", [](const TrainConfig& c) { return std::string(to_string(c.optimizer)); },
                    [](TrainConfig& c, const std::string& s) { c.optimizer = parse_optimizer(s); })
      .def("validate", &TrainConfig::validate)
      .def("to_json", [](const TrainConfig& c) { return config_to_json(c).dump(); })
      .def("__eq__", [](const TrainConfig& a, const TrainConfig& b) { return a == b; })
      .def("__repr__", [](const TrainConfig& c) { return "TrainConfig(" + config_to_json(c).dump() + ")"; });

  py::class_<ModelParams>(m, "Model")
      .def_property_readonly("arch", [](const ModelParams& p) { return std::string(to_string(p.architecture)); })
      .def_property_readonly("input_dim", &ModelParams::input_dim)
      .def_property_readonly("num_classes", &ModelParams::num_classes)
      .def_property_readonly("parameter_count", &ModelParams::parameter_count)
      .def_readonly("w_hidden", &ModelParams::w_hidden)
      .def_readonly("b_hidden", &ModelParams::b_hidden)
      .def_readonly("w_out", &ModelParams::w_out)
      .def_readonly("b_out", &ModelParams::b_out)
      .def("predict", [](const ModelParams& p, const FeatureMatrix& x) { return predict_all(p, x); }, py::arg("X"))
      .def("predict_proba", [](const ModelParams& p, const FeatureMatrix& x) { return predict_proba(p, x); },
           py::arg("X"))
      .def("bag_proportion", [](const ModelParams& p, const FeatureMatrix& x) {
        const auto fw = forward_bag(p, x);
        const auto v = fw.rho_tilde.values();
        return std::vector<double>(v.begin(), v.end());
      }, py::arg("X"), "Mean predicted distribution over the rows of X.")
      .def("__eq__", [](const ModelParams& a, const ModelParams& b) { return a == b; });

  m.def("init_model", [](const std::string& arch, Eigen::Index input_dim, Eigen::Index hidden, int num_classes,
                         std::uint64_t seed) {
    return init_params(parse_architecture(arch), input_dim, hidden, num_classes, RngSeed{seed});
  }, py::arg("arch"), py::arg("input_dim"), py::arg("hidden"), py::arg("num_classes"), py::arg("seed") = 0);

  m.def("bag_loss", [](const ModelParams& p, const FeatureMatrix& x, std::vector<double> rho, const std::string& loss,
                       double alpha, double lambda) {
    const auto r = bag_loss(p, x, make_simplex(std::move(rho)), parse_loss_kind(loss), LossParams{alpha, lambda});
    return py::make_tuple(r.proportion_loss, r.auxiliary_loss, r.total);
  }, py::arg("model"), py::arg("X"), py::arg("rho"), py::arg("loss") = "tvstar", py::arg("alpha") = 1.0,
     py::arg("lambda_") = 0.0, "Returns (proportion_loss, auxiliary_loss, total).");

  // Training and evaluation.
  m.def("train", [](const FeatureMatrix& x, const std::vector<int>& y, const TrainConfig& config,
                    std::optional<FeatureMatrix> x_val, std::optional<std::vector<int>> y_val, int num_classes) {
    const auto train_set = dataset(x, y, num_classes);
    const auto val_set = x_val && y_val ? LabeledDataset(*x_val, *y_val, train_set.num_classes())
                                        : LabeledDataset(FeatureMatrix(0, x.cols()), {}, train_set.num_classes());
    TrainResult result;
    {
      py::gil_scoped_release release;
      result = train(train_set, val_set, config);
    }
    return py::make_tuple(result.params, history_dict(result.history));
  }, py::arg("X"), py::arg("y"), py::arg("config"), py::arg("X_val") = py::none(), py::arg("y_val") = py::none(),
     py::arg("num_classes") = 0, "Bag-level training; y only enters through bag proportions. Returns (model, history).");

  m.def("evaluate", [](const ModelParams& p, const FeatureMatrix& x, const std::vector<int>& y) {
    return report_dict(evaluate_model(p, LabeledDataset(x, y, p.num_classes())));
  }, py::arg("model"), py::arg("X"), py::arg("y"));
  m.def("weighted_prf", [](const std::vector<int>& y_true, const std::vector<int>& y_pred, int num_classes) {
    return report_dict(evaluate_predictions(y_true, y_pred, num_classes));
  }, py::arg("y_true"), py::arg("y_pred"), py::arg("num_classes"));

  m.def("sweep", [](const FeatureMatrix& x, const std::vector<int>& y, const FeatureMatrix& x_test,
                    const std::vector<int>& y_test, const TrainConfig& base, const std::string& axis,
                    const std::vector<double>& values, const std::vector<std::uint64_t>& seeds, std::size_t jobs) {
    const auto train_set = dataset(x, y, 0);
    const LabeledDataset val(FeatureMatrix(0, x.cols()), {}, train_set.num_classes());
    const LabeledDataset test(x_test, y_test, train_set.num_classes());
    std::vector<SweepRow> rows;
    {
      py::gil_scoped_release release;
      rows = sweep(train_set, val, test, base, parse_sweep_axis(axis), values, seeds, jobs);
    }
    py::list out;
    for (const auto& r : rows) {
      py::dict d;
      d["value"] = r.value;
      d["seed"] = r.seed;
      d["w_precision"] = r.scores.precision;
      d["w_recall"] = r.scores.recall;
      d["w_f1"] = r.scores.f1;
      out.append(d);
    }
    return out;
  }, py::arg("X"), py::arg("y"), py::arg("X_test"), py::arg("y_test"), py::arg("config"), py::arg("axis"),
     py::arg("values"), py::arg("seeds"), py::arg("jobs") = 1);

  // Checkpoints.
  m.def("save_checkpoint", [](const std::filesystem::path& path, const ModelParams& p, const TrainConfig& c) {
    save_checkpoint(path, Checkpoint{p, c});
  }, py::arg("path"), py::arg("model"), py::arg("config"));
  m.def("load_checkpoint", [](const std::filesystem::path& path) {
    auto c = load_checkpoint(path);
    return py::make_tuple(c.params, c.config);
  }, py::arg("path"), "Returns (model, config).");

  // Audits.
  auto t = m.def_submodule("theory", "Audits of the loss properties and the generalization bound");
  t.def("kappa", &theory::kappa, py::arg("alpha"));
  t.def("theorem_rhs", &theory::theorem_rhs, py::arg("vc_dim"), py::arg("m"), py::arg("delta"), py::arg("alpha"));
  t.def("pinsker_audit", [](std::size_t n, std::size_t c, std::uint64_t seed) {
    const auto r = theory::pinsker_audit(n, c, RngSeed{seed});
    py::dict d;
    d["trials"] = r.trials;
    d["violations"] = r.violations;
    d["min_slack"] = r.min_slack;
    return d;
  }, py::arg("n_trials"), py::arg("num_classes") = 2, py::arg("seed") = 0);
  t.def("theorem_mc_audit", [](std::size_t m_, double delta, double alpha, std::size_t n_hyp, std::size_t n_trials,
                               std::uint64_t seed) {
    theory::BoundReport r;
    {
      py::gil_scoped_release release;
      r = theory::theorem_mc_audit(m_, delta, alpha, n_hyp, n_trials, RngSeed{seed});
    }
    py::dict d;
    d["trials"] = r.trials;
    d["violations"] = r.violations;
    d["violation_fraction"] = r.violation_fraction();
    d["mean_slack"] = r.mean_slack;
    d["rhs"] = r.rhs;
    return d;
  }, py::arg("m"), py::arg("delta"), py::arg("alpha"), py::arg("n_hypotheses") = 200, py::arg("n_trials") = 1000,
     py::arg("seed") = 0);
  t.def("lipschitz_probe", [](double alpha, std::size_t n_pairs, std::size_t c, std::uint64_t seed) {
    const auto r = theory::lipschitz_probe(alpha, n_pairs, c, RngSeed{seed});
    return py::make_tuple(r.max_value_slope, r.max_gradient_slope);
  }, py::arg("alpha"), py::arg("n_pairs"), py::arg("num_classes") = 2, py::arg("seed") = 0,
     "Returns (max_value_slope, max_gradient_slope).");
  t.def("kl_slope_sequence", &theory::kl_slope_sequence, py::arg("eps_values"));
}
