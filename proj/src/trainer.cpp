#include "llp/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace llp {

namespace {

constexpr std::uint64_t kInitStream = 0x494e4954ULL << 32;  // "INIT"
constexpr std::uint64_t kValStream = 0x56414cULL << 32;     // "VAL"

FeatureMatrix gather(const LabeledDataset& data, std::span<const std::size_t> indices) {
  FeatureMatrix x(static_cast<Eigen::Index>(indices.size()), data.dim());
  for (std::size_t k = 0; k < indices.size(); ++k) x.row(static_cast<Eigen::Index>(k)) = data.row(indices[k]);
  return x;
}

class ParamUpdater {
 public:
  ParamUpdater(const TrainConfig& config, Eigen::Index n)
      : opt_(config.optimizer), lr_(config.learning_rate), m_(Vector::Zero(n)), v_(Vector::Zero(n)) {}

  void step(Vector& theta, const Vector& grad) {
    if (opt_ == Optimizer::Sgd) {
      theta -= lr_ * grad;
      return;
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++t_;
    m_ = beta1 * m_ + (1.0 - beta1) * grad;
    v_ = beta2 * v_ + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    theta.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps);
  }

 private:
  Optimizer opt_;
  double lr_;
  Vector m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace

const char* to_string(Optimizer opt) { return opt == Optimizer::Sgd ? "sgd" : "adaptive"; }

Optimizer parse_optimizer(const std::string& text) {
  if (text == "sgd") return Optimizer::Sgd;
  if (text == "adaptive" || text == "adam") return Optimizer::AdaptiveMoment;
  throw Error(Errc::InvalidConfig, "unknown optimizer '" + text + "' (expected sgd|adaptive)");
}

double TrainConfig::effective_clip_norm() const {
  if (clip_norm) return *clip_norm;
  return loss_kind == LossKind::Dllp ? 10.0 : 0.0;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::InvalidConfig, msg); };
  if (bag_size < 1) fail("bag_size must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("alpha must be > 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be >= 0");
  if (architecture == Architecture::Mlp1 && hidden < 1) fail("hidden must be >= 1");
  if (clip_norm && (!(*clip_norm >= 0.0) || !std::isfinite(*clip_norm))) fail("clip_norm must be >= 0");
}

bool TrainHistory::has_validation() const {
  return !val_loss.empty() && !std::isnan(val_loss.front());
}

double mean_bag_loss(const ModelParams& params, const LabeledDataset& data, const BagPlan& plan, LossKind kind,
                     const LossParams& loss_params) {
  const auto bags = make_bags(data, plan);
  if (bags.empty()) return std::numeric_limits<double>::quiet_NaN();
  // Model selection compares proportion fits, so the auxiliary term is left out.
  const LossKind proportion_kind = kind == LossKind::Dllp ? LossKind::Dllp : LossKind::TvStar;
  double total = 0.0;
  for (const auto& bag : bags) {
    total += bag_loss(params, gather(data, bag.instance_indices), bag.proportion, proportion_kind, loss_params)
                 .proportion_loss;
  }
  return total / static_cast<double>(bags.size());
}

TrainResult train(const LabeledDataset& data, const LabeledDataset& val, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw Error(Errc::EmptyDataset, "training set is empty");
  if (!val.empty() && (val.dim() != data.dim() || val.num_classes() != data.num_classes())) {
    throw Error(Errc::DimensionMismatch, "validation set shape differs from the training set");
  }
  const LossParams lp = config.loss_params();
  const double clip = config.effective_clip_norm();

  TrainResult result{init_params(config.architecture, data.dim(), config.hidden, data.num_classes(),
                                 derive_seed(config.seed, kInitStream)),
                     {}};
  ModelParams& params = result.params;
  Vector theta = flatten(params);
  ParamUpdater updater(config, theta.size());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const BagPlan plan{config.bag_size, config.keep_partial, epoch_seed(config.seed, epoch)};
    const auto bags = make_bags(data, plan);

    double epoch_total = 0.0;
    double epoch_max = 0.0;
    for (const auto& bag : bags) {
      const FeatureMatrix x = gather(data, bag.instance_indices);
      BackwardResult step;
      try {
        step = backward(params, x, bag.proportion, config.loss_kind, lp);
      } catch (const Error& e) {
        if (e.code() != Errc::NonFiniteInput) throw;
        throw Error(Errc::DivergedLoss, "non-finite forward pass at epoch " + std::to_string(epoch));
      }
      const double loss = step.loss.proportion_loss;
      if (std::isnan(loss) || (std::isinf(loss) && config.loss_kind != LossKind::Dllp)) {
        throw Error(Errc::DivergedLoss, "non-finite loss at epoch " + std::to_string(epoch));
      }
      Vector grad = flatten(step.gradient);
      if (!grad.allFinite()) {
        throw Error(Errc::DivergedLoss, "non-finite gradient at epoch " + std::to_string(epoch));
      }
      if (clip > 0.0) {
        const double norm = grad.norm();
        if (norm > clip) grad *= clip / norm;
      }
      updater.step(theta, grad);
      unflatten(theta, params);

      epoch_total += loss;
      epoch_max = std::max(epoch_max, loss);
    }
    if (!theta.allFinite()) throw Error(Errc::DivergedLoss, "parameters became non-finite");

    result.history.train_loss.push_back(epoch_total / static_cast<double>(bags.size()));
    result.history.max_bag_loss.push_back(epoch_max);
    if (val.empty()) {
      result.history.val_loss.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      const BagPlan val_plan{config.bag_size, config.keep_partial, derive_seed(epoch_seed(config.seed, epoch), kValStream)};
      result.history.val_loss.push_back(mean_bag_loss(params, val, val_plan, config.loss_kind, lp));
    }
    result.history.seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  }
  return result;
}

double validation_score(const TrainHistory& history, std::size_t last_k) {
  if (last_k < 1) throw Error(Errc::InvalidArguments, "last_k must be >= 1");
  if (last_k > history.epochs()) {
    throw Error(Errc::KTooLarge, "last_k " + std::to_string(last_k) + " exceeds " +
                                     std::to_string(history.epochs()) + " recorded epochs");
  }
  const bool with_val = history.has_validation();
  double total = 0.0;
  for (std::size_t e = history.epochs() - last_k; e < history.epochs(); ++e) {
    total += history.train_loss[e] + (with_val ? history.val_loss[e] : 0.0);
  }
  return total / static_cast<double>(last_k);
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::BagSize: return "bag-size";
    case SweepAxis::Alpha: return "alpha";
    case SweepAxis::Lambda: return "lambda";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "bag-size" || text == "bag_size") return SweepAxis::BagSize;
  if (text == "alpha") return SweepAxis::Alpha;
  if (text == "lambda") return SweepAxis::Lambda;
  throw Error(Errc::InvalidConfig, "unknown sweep axis '" + text + "' (expected bag-size|alpha|lambda)");
}

TrainConfig apply_axis(TrainConfig config, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::BagSize:
      if (!(value >= 1.0) || value != std::floor(value)) {
        throw Error(Errc::InvalidConfig, "bag sizes must be positive integers");
      }
      config.bag_size = static_cast<std::size_t>(value);
      break;
    case SweepAxis::Alpha: config.alpha = value; break;
    case SweepAxis::Lambda: config.lambda = value; break;
  }
  return config;
}

MetricsReport evaluate_model(const ModelParams& params, const LabeledDataset& test) {
  if (test.num_classes() != params.num_classes()) {
    throw Error(Errc::DimensionMismatch, "test set has " + std::to_string(test.num_classes()) +
                                             " classes, model has " + std::to_string(params.num_classes()));
  }
  const auto predicted = predict_all(params, test.features());
  return evaluate_predictions(test.labels(), predicted, test.num_classes());
}

std::vector<SweepRow> sweep(const LabeledDataset& data, const LabeledDataset& val, const LabeledDataset& test,
                            const TrainConfig& base_config, SweepAxis axis, const std::vector<double>& values,
                            const std::vector<std::uint64_t>& seeds, std::size_t jobs) {
  if (values.empty()) throw Error(Errc::InvalidArguments, "sweep needs at least one value");
  if (seeds.empty()) throw Error(Errc::InvalidArguments, "sweep needs at least one seed");
  for (double v : values) apply_axis(base_config, axis, v).validate();

  const std::size_t n_tasks = values.size() * seeds.size();
  std::vector<SweepRow> rows(n_tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) {
      try {
        const double value = values[task / seeds.size()];
        TrainConfig config = apply_axis(base_config, axis, value);
        config.seed = RngSeed{seeds[task % seeds.size()]};
        const TrainResult run = train(data, val, config);
        const auto report = evaluate_model(run.params, test);
        rows[task] = SweepRow{value, config.seed.value, report.scores,
                              validation_score(run.history, std::min<std::size_t>(3, run.history.epochs()))};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, n_tasks));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace llp
