#include "llp/model.hpp"

#include <algorithm>
#include <cmath>

namespace llp {

const char* to_string(Architecture arch) { return arch == Architecture::Linear ? "linear" : "mlp1"; }

const char* to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Dllp: return "dllp";
    case LossKind::TvStar: return "tvstar";
    case LossKind::Combined: return "combined";
  }
  return "unknown";
}

Architecture parse_architecture(const std::string& text) {
  if (text == "linear") return Architecture::Linear;
  if (text == "mlp1") return Architecture::Mlp1;
  throw Error(Errc::InvalidConfig, "unknown architecture '" + text + "' (expected linear|mlp1)");
}

LossKind parse_loss_kind(const std::string& text) {
  if (text == "dllp") return LossKind::Dllp;
  if (text == "tvstar") return LossKind::TvStar;
  if (text == "combined") return LossKind::Combined;
  throw Error(Errc::InvalidConfig, "unknown loss '" + text + "' (expected dllp|tvstar|combined)");
}

Eigen::Index ModelParams::input_dim() const {
  return architecture == Architecture::Linear ? w_out.cols() : w_hidden.cols();
}

Eigen::Index ModelParams::parameter_count() const {
  return w_hidden.size() + b_hidden.size() + w_out.size() + b_out.size();
}

void ModelParams::validate() const {
  if (w_out.rows() < 2 || w_out.cols() < 1) throw Error(Errc::DimensionMismatch, "output layer must be C x H, C >= 2");
  if (b_out.size() != w_out.rows()) throw Error(Errc::DimensionMismatch, "b_out length differs from class count");
  if (architecture == Architecture::Linear) {
    if (w_hidden.size() != 0 || b_hidden.size() != 0) {
      throw Error(Errc::DimensionMismatch, "linear model carries hidden-layer parameters");
    }
  } else {
    if (w_hidden.rows() != w_out.cols() || w_hidden.cols() < 1) {
      throw Error(Errc::DimensionMismatch, "hidden layer shape does not feed the output layer");
    }
    if (b_hidden.size() != w_hidden.rows()) throw Error(Errc::DimensionMismatch, "b_hidden length mismatch");
  }
  if (!w_hidden.allFinite() || !b_hidden.allFinite() || !w_out.allFinite() || !b_out.allFinite()) {
    throw Error(Errc::NonFiniteInput, "model parameters contain non-finite values");
  }
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.architecture = architecture;
  z.w_hidden = Matrix::Zero(w_hidden.rows(), w_hidden.cols());
  z.b_hidden = Vector::Zero(b_hidden.size());
  z.w_out = Matrix::Zero(w_out.rows(), w_out.cols());
  z.b_out = Vector::Zero(b_out.size());
  return z;
}

bool ModelParams::operator==(const ModelParams& other) const {
  auto same = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
  };
  return architecture == other.architecture && same(w_hidden, other.w_hidden) && same(b_hidden, other.b_hidden) &&
         same(w_out, other.w_out) && same(b_out, other.b_out);
}

ModelParams init_params(Architecture arch, Eigen::Index input_dim, Eigen::Index hidden_dim, int num_classes,
                        RngSeed seed) {
  if (input_dim < 1 || num_classes < 2) throw Error(Errc::InvalidArguments, "need input_dim >= 1 and >= 2 classes");
  if (arch == Architecture::Mlp1 && hidden_dim < 1) throw Error(Errc::InvalidArguments, "hidden_dim must be >= 1");
  Rng rng(seed.value);
  auto fill = [&rng](Matrix& m, Eigen::Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = (2.0 * uniform01(rng) - 1.0) * bound;
  };
  ModelParams p;
  p.architecture = arch;
  Eigen::Index body_out = input_dim;
  if (arch == Architecture::Mlp1) {
    p.w_hidden.resize(hidden_dim, input_dim);
    fill(p.w_hidden, input_dim);
    p.b_hidden = Vector::Zero(hidden_dim);
    body_out = hidden_dim;
  }
  p.w_out.resize(num_classes, body_out);
  fill(p.w_out, body_out);
  p.b_out = Vector::Zero(num_classes);
  return p;
}

Vector flatten(const ModelParams& params) {
  Vector flat(params.parameter_count());
  Eigen::Index at = 0;
  auto put = [&](const double* data, Eigen::Index n) {
    flat.segment(at, n) = Eigen::Map<const Vector>(data, n);
    at += n;
  };
  put(params.w_hidden.data(), params.w_hidden.size());
  put(params.b_hidden.data(), params.b_hidden.size());
  put(params.w_out.data(), params.w_out.size());
  put(params.b_out.data(), params.b_out.size());
  return flat;
}

void unflatten(const Vector& flat, ModelParams& params) {
  if (flat.size() != params.parameter_count()) throw Error(Errc::DimensionMismatch, "flat parameter length mismatch");
  Eigen::Index at = 0;
  auto take = [&](double* data, Eigen::Index n) {
    Eigen::Map<Vector>(data, n) = flat.segment(at, n);
    at += n;
  };
  take(params.w_hidden.data(), params.w_hidden.size());
  take(params.b_hidden.data(), params.b_hidden.size());
  take(params.w_out.data(), params.w_out.size());
  take(params.b_out.data(), params.b_out.size());
}

Vector softmax(const Vector& logits) {
  const double peak = logits.maxCoeff();
  Vector e = (logits.array() - peak).exp();
  return e / e.sum();
}

ForwardTrace forward(const ModelParams& params, const Vector& x) {
  if (x.size() != params.input_dim()) {
    throw Error(Errc::DimensionMismatch, "input has dimension " + std::to_string(x.size()) + ", model expects " +
                                             std::to_string(params.input_dim()));
  }
  if (!x.allFinite()) throw Error(Errc::NonFiniteInput, "input contains non-finite values");
  Vector pre, emb;
  if (params.architecture == Architecture::Mlp1) {
    pre = params.w_hidden * x + params.b_hidden;
    emb = pre.array().tanh();
  } else {
    emb = x;
  }
  Vector logits = params.w_out * emb + params.b_out;
  const Vector p = softmax(logits);
  ForwardTrace t{std::move(pre), std::move(emb), std::move(logits),
                 make_simplex(std::vector<double>(p.data(), p.data() + p.size()))};
  return t;
}

ForwardTrace forward(const ModelParams& params, std::span<const double> x) {
  return forward(params, Vector(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()))));
}

SimplexVector aggregate_predictions(std::span<const ForwardTrace> traces) {
  if (traces.empty()) throw Error(Errc::EmptyBag, "cannot aggregate an empty bag");
  const std::size_t c = traces.front().distribution.size();
  std::vector<double> mean(c, 0.0);
  for (const auto& t : traces) {
    if (t.distribution.size() != c) throw Error(Errc::DimensionMismatch, "traces disagree on class count");
    for (std::size_t k = 0; k < c; ++k) mean[k] += t.distribution[k];
  }
  for (auto& v : mean) v /= static_cast<double>(traces.size());
  return make_simplex(std::move(mean));
}

namespace {

int argmax_lowest(const auto& row) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(row.size()); ++k) {
    if (row[k] > row[best]) best = k;
  }
  return best;
}

void check_batch(const ModelParams& params, const FeatureMatrix& x) {
  if (x.cols() != params.input_dim()) {
    throw Error(Errc::DimensionMismatch, "inputs have dimension " + std::to_string(x.cols()) + ", model expects " +
                                             std::to_string(params.input_dim()));
  }
  if (!x.allFinite()) throw Error(Errc::NonFiniteInput, "inputs contain non-finite values");
}

// Row-wise max-subtracted softmax.
Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double peak = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - peak).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

SimplexVector column_mean(const Matrix& p) {
  Vector mean = p.colwise().sum().transpose() / static_cast<double>(p.rows());
  return make_simplex(std::vector<double>(mean.data(), mean.data() + mean.size()));
}

}  // namespace

int predict(const ModelParams& params, std::span<const double> x) {
  return argmax_lowest(forward(params, x).distribution.values());
}

Matrix predict_proba(const ModelParams& params, const FeatureMatrix& x) {
  check_batch(params, x);
  Matrix body;
  if (params.architecture == Architecture::Mlp1) {
    body = ((x * params.w_hidden.transpose()).rowwise() + params.b_hidden.transpose()).array().tanh();
  } else {
    body = x;
  }
  return softmax_rows((body * params.w_out.transpose()).rowwise() + params.b_out.transpose());
}

std::vector<int> predict_all(const ModelParams& params, const FeatureMatrix& x) {
  const Matrix p = predict_proba(params, x);
  std::vector<int> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) out[static_cast<std::size_t>(i)] = argmax_lowest(p.row(i));
  return out;
}

BagForward forward_bag(const ModelParams& params, const FeatureMatrix& instances) {
  if (instances.rows() < 1) throw Error(Errc::EmptyBag, "bag has no instances");
  check_batch(params, instances);
  Matrix pre, emb;
  if (params.architecture == Architecture::Mlp1) {
    pre = (instances * params.w_hidden.transpose()).rowwise() + params.b_hidden.transpose();
    emb = pre.array().tanh();
  } else {
    emb = instances;
  }
  Matrix prob = softmax_rows((emb * params.w_out.transpose()).rowwise() + params.b_out.transpose());
  SimplexVector rho_tilde = column_mean(prob);
  return BagForward{std::move(pre), std::move(emb), std::move(prob), std::move(rho_tilde)};
}

namespace {

BagObjective evaluate(const BagForward& fw, const SimplexVector& rho, LossKind kind, const LossParams& lp) {
  BagObjective obj;
  obj.proportion_loss = kind == LossKind::Dllp ? kl_proportion_loss(rho, fw.rho_tilde)
                                               : tv_star_loss(rho, fw.rho_tilde, lp.alpha);
  obj.total = obj.proportion_loss;
  if (kind == LossKind::Combined && lp.lambda > 0.0) {
    obj.auxiliary_loss = ssc_loss(fw.embeddings);
    obj.total += lp.lambda * obj.auxiliary_loss;
  }
  return obj;
}

void check_rho(const ModelParams& params, const SimplexVector& rho) {
  if (static_cast<int>(rho.size()) != params.num_classes()) {
    throw Error(Errc::DimensionMismatch, "proportion has " + std::to_string(rho.size()) + " classes, model has " +
                                             std::to_string(params.num_classes()));
  }
}

}  // namespace

BagObjective bag_loss(const ModelParams& params, const FeatureMatrix& instances, const SimplexVector& rho,
                      LossKind kind, const LossParams& loss_params) {
  validate(loss_params);
  check_rho(params, rho);
  return evaluate(forward_bag(params, instances), rho, kind, loss_params);
}

BackwardResult backward(const ModelParams& params, const FeatureMatrix& instances, const SimplexVector& rho,
                        LossKind kind, const LossParams& loss_params) {
  validate(loss_params);
  check_rho(params, rho);
  const BagForward fw = forward_bag(params, instances);
  BackwardResult out{params.zeros_like(), evaluate(fw, rho, kind, loss_params)};

  const std::vector<double> g = kind == LossKind::Dllp ? kl_proportion_gradient(rho, fw.rho_tilde)
                                                       : tv_star_gradient(rho, fw.rho_tilde, loss_params.alpha);
  const auto bag = static_cast<double>(instances.rows());
  const Eigen::RowVectorXd g_instance = Eigen::Map<const Eigen::RowVectorXd>(g.data(), static_cast<Eigen::Index>(g.size())) / bag;

  // Softmax Jacobian: d logits_j = p_j * (g - <p_j, g>).
  Matrix d_logits(fw.probabilities.rows(), fw.probabilities.cols());
  for (Eigen::Index j = 0; j < d_logits.rows(); ++j) {
    const double inner = fw.probabilities.row(j).dot(g_instance);
    d_logits.row(j) = fw.probabilities.row(j).array() * (g_instance.array() - inner);
  }
  out.gradient.w_out = d_logits.transpose() * fw.embeddings;
  out.gradient.b_out = d_logits.colwise().sum().transpose();

  if (params.architecture == Architecture::Mlp1) {
    Matrix d_emb = d_logits * params.w_out;
    if (kind == LossKind::Combined && loss_params.lambda > 0.0) {
      d_emb += loss_params.lambda * ssc_gradient(fw.embeddings);
    }
    const Matrix d_pre = d_emb.array() * (1.0 - fw.embeddings.array().square());
    out.gradient.w_hidden = d_pre.transpose() * instances;
    out.gradient.b_hidden = d_pre.colwise().sum().transpose();
  }
  return out;
}

}  // namespace llp
