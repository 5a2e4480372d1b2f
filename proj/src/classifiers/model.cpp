#include <algorithm>
#include <cctype>
#include <string>

#include "ehg/binary_io.hpp"
#include "ehg/classifiers.hpp"
#include "ehg/errors.hpp"

namespace ehg {

namespace {

constexpr std::string_view kMagic = "EHGM1";

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("model spec: " + what);
}

Eigen::VectorXd linear_response(const LinearState& s, const Eigen::MatrixXd& x) {
  return (x * s.weights).array() + s.bias;
}

Eigen::VectorXd forest_mean(const ForestState& s, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.rows());
  for (const auto& t : s.trees) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) += t.predict(x.row(i));
  }
  return out / static_cast<double>(s.trees.size());
}

Eigen::VectorXd tree_predict(const RegressionTree& t, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = t.predict(x.row(i));
  return out;
}

Eigen::VectorXd apply_sigmoid(Eigen::VectorXd z) {
  for (auto& v : z) v = sigmoid(v);
  return z;
}

bool uses_standardization(ModelKind k) { return k == ModelKind::Lr || k == ModelKind::Svm || k == ModelKind::Mlp; }

}  // namespace

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Qda: return "QDA";
    case ModelKind::Lr: return "LR";
    case ModelKind::Svm: return "SVM";
    case ModelKind::Dt: return "DT";
    case ModelKind::Rf: return "RF";
    case ModelKind::Gb: return "GB";
    case ModelKind::Mlp: return "MLP";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  std::string u(s);
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (auto k : {ModelKind::Qda, ModelKind::Lr, ModelKind::Svm, ModelKind::Dt, ModelKind::Rf, ModelKind::Gb,
                 ModelKind::Mlp}) {
    if (u == to_string(k)) return k;
  }
  if (u == "CB" || u == "CB-SUBSTITUTE") return ModelKind::Gb;
  throw ValidationError("unknown model '" + std::string(s) + "'");
}

void ModelSpec::validate() const {
  require(qda.ridge >= 0.0, "qda ridge must be >= 0");
  require(lr.c > 0.0 && lr.tolerance > 0.0 && lr.max_iterations >= 1, "lr needs c > 0, tolerance > 0, max_iterations >= 1");
  require(svm.c > 0.0 && svm.iterations >= 1, "svm needs c > 0 and iterations >= 1");
  require(dt.max_depth >= 1 && dt.min_samples_split >= 2, "dt needs max_depth >= 1 and min_samples_split >= 2");
  require(rf.n_estimators >= 1 && rf.max_depth >= 1 && rf.min_samples_split >= 2,
          "rf needs n_estimators >= 1, max_depth >= 1, min_samples_split >= 2");
  require(gb.n_estimators >= 1 && gb.max_depth >= 1 && gb.learning_rate > 0.0 && gb.learning_rate <= 1.0,
          "gb needs n_estimators >= 1, max_depth >= 1, 0 < learning_rate <= 1");
  require(mlp.hidden_units >= 1 && mlp.epochs >= 1 && mlp.batch_size >= 1 && mlp.learning_rate > 0.0 &&
              mlp.l2 >= 0.0 && mlp.beta1 >= 0.0 && mlp.beta1 < 1.0 && mlp.beta2 >= 0.0 && mlp.beta2 < 1.0 &&
              mlp.epsilon > 0.0,
          "mlp hyperparameter out of range");
}

ModelSpec default_spec(ModelKind kind, std::string label) {
  ModelSpec s;
  s.kind = kind;
  s.label = std::move(label);
  return s;
}

std::vector<ModelSpec> default_model_suite() {
  std::vector<ModelSpec> out;
  for (auto k : {ModelKind::Qda, ModelKind::Lr, ModelKind::Svm, ModelKind::Dt, ModelKind::Rf, ModelKind::Gb,
                 ModelKind::Mlp}) {
    out.push_back(default_spec(k));
  }
  out.push_back(default_spec(ModelKind::Gb, "CB-substitute"));
  return out;
}

TrainedModel::TrainedModel(ModelKind kind, std::string label, std::size_t n_features, ModelState state,
                           std::optional<Standardizer> standardizer)
    : kind_(kind),
      label_(std::move(label)),
      n_features_(n_features),
      state_(std::move(state)),
      standardizer_(std::move(standardizer)) {}

Eigen::MatrixXd TrainedModel::prepare(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != n_features_) {
    throw ShapeError(label_ + ": expected " + std::to_string(n_features_) + " features, got " + std::to_string(x.cols()));
  }
  return standardizer_ ? standardizer_->apply(x) : x;
}

Eigen::VectorXd TrainedModel::predict_scores(const Eigen::MatrixXd& raw) const {
  const Eigen::MatrixXd x = prepare(raw);
  return std::visit(Overloaded{
                        [&](const QdaState& s) { return apply_sigmoid(models::qda_decision(s, x)); },
                        [&](const LinearState& s) {
                          Eigen::VectorXd z = linear_response(s, x);
                          return kind_ == ModelKind::Svm ? z : apply_sigmoid(std::move(z));
                        },
                        [&](const TreeState& s) { return tree_predict(s.tree, x); },
                        [&](const ForestState& s) { return forest_mean(s, x); },
                        [&](const BoostingState& s) { return apply_sigmoid(models::boosting_logit(s, x)); },
                        [&](const MlpState& s) { return apply_sigmoid(models::mlp_logit(s, x)); },
                    },
                    state_);
}

std::vector<int> TrainedModel::predict_labels(const Eigen::MatrixXd& raw) const {
  const Eigen::MatrixXd x = prepare(raw);
  Eigen::VectorXd response;
  double cut = 0.0;
  std::visit(Overloaded{
                 [&](const QdaState& s) { response = models::qda_decision(s, x); },
                 [&](const LinearState& s) { response = linear_response(s, x); },
                 [&](const TreeState& s) {
                   response = tree_predict(s.tree, x);
                   cut = 0.5;
                 },
                 [&](const ForestState& s) {
                   response = forest_mean(s, x);
                   cut = 0.5;
                 },
                 [&](const BoostingState& s) { response = models::boosting_logit(s, x); },
                 [&](const MlpState& s) { response = models::mlp_logit(s, x); },
             },
             state_);
  std::vector<int> out(static_cast<std::size_t>(response.size()));
  for (Eigen::Index i = 0; i < response.size(); ++i) out[static_cast<std::size_t>(i)] = response(i) > cut ? 1 : 0;
  return out;
}

std::vector<std::uint8_t> TrainedModel::serialize() const {
  ByteWriter w;
  w.bytes(kMagic.data(), kMagic.size());
  w.u8(static_cast<std::uint8_t>(kind_));
  w.str(label_);
  w.u64(n_features_);
  w.u8(standardizer_ ? 1 : 0);
  if (standardizer_) {
    w.vec(standardizer_->mean);
    w.vec(standardizer_->scale);
  }
  std::visit(Overloaded{
                 [&](const QdaState& s) {
                   w.vec(s.log_prior);
                   w.vec(s.log_det);
                   for (std::size_t c = 0; c < 2; ++c) {
                     w.vec(s.mean[c]);
                     w.mat(s.covariance[c]);
                     w.mat(s.chol_l[c]);
                   }
                 },
                 [&](const LinearState& s) {
                   w.vec(s.weights);
                   w.f64(s.bias);
                   w.u64(s.iterations);
                 },
                 [&](const TreeState& s) { s.tree.write(w); },
                 [&](const ForestState& s) {
                   w.u64(s.trees.size());
                   for (const auto& t : s.trees) t.write(w);
                 },
                 [&](const BoostingState& s) {
                   w.f64(s.initial_logit);
                   w.f64(s.learning_rate);
                   w.u64(s.trees.size());
                   for (const auto& t : s.trees) t.write(w);
                   w.vec(Eigen::Map<const Eigen::VectorXd>(s.training_loss.data(),
                                                           static_cast<Eigen::Index>(s.training_loss.size())));
                 },
                 [&](const MlpState& s) {
                   w.mat(s.w1);
                   w.vec(s.b1);
                   w.vec(s.w2);
                   w.f64(s.b2);
                 },
             },
             state_);
  return w.take();
}

TrainedModel TrainedModel::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  char magic[5];
  r.bytes(magic, sizeof magic);
  if (std::string_view(magic, sizeof magic) != kMagic) throw ValidationError("not a model container (bad magic)");
  const auto tag = r.u8();
  if (tag < static_cast<std::uint8_t>(ModelKind::Qda) || tag > static_cast<std::uint8_t>(ModelKind::Mlp)) {
    throw ValidationError("model container: unknown kind tag " + std::to_string(tag));
  }
  const auto kind = static_cast<ModelKind>(tag);
  std::string label = r.str();
  const auto d = static_cast<std::size_t>(r.u64());
  const auto di = static_cast<Eigen::Index>(d);
  auto check = [](bool ok) {
    if (!ok) throw ValidationError("model container: parameter shape mismatch");
  };

  std::optional<Standardizer> std_opt;
  if (r.u8()) {
    Standardizer s{r.vec(), r.vec()};
    check(s.mean.size() == di && s.scale.size() == di);
    std_opt = std::move(s);
  }

  ModelState state;
  switch (kind) {
    case ModelKind::Qda: {
      QdaState s;
      s.log_prior = r.vec();
      s.log_det = r.vec();
      for (std::size_t c = 0; c < 2; ++c) {
        s.mean[c] = r.vec();
        s.covariance[c] = r.mat();
        s.chol_l[c] = r.mat();
        check(s.mean[c].size() == di && s.covariance[c].rows() == di && s.covariance[c].cols() == di &&
              s.chol_l[c].rows() == di && s.chol_l[c].cols() == di);
      }
      state = std::move(s);
      break;
    }
    case ModelKind::Lr:
    case ModelKind::Svm: {
      LinearState s;
      s.weights = r.vec();
      s.bias = r.f64();
      s.iterations = r.u64();
      check(s.weights.size() == di);
      state = std::move(s);
      break;
    }
    case ModelKind::Dt:
      state = TreeState{RegressionTree::read(r, d)};
      break;
    case ModelKind::Rf: {
      ForestState s;
      const auto n = r.count(8);
      check(n > 0);
      for (std::size_t i = 0; i < n; ++i) s.trees.push_back(RegressionTree::read(r, d));
      state = std::move(s);
      break;
    }
    case ModelKind::Gb: {
      BoostingState s;
      s.initial_logit = r.f64();
      s.learning_rate = r.f64();
      const auto n = r.count(8);
      for (std::size_t i = 0; i < n; ++i) s.trees.push_back(RegressionTree::read(r, d));
      const Eigen::VectorXd loss = r.vec();
      s.training_loss.assign(loss.data(), loss.data() + loss.size());
      state = std::move(s);
      break;
    }
    case ModelKind::Mlp: {
      MlpState s;
      s.w1 = r.mat();
      s.b1 = r.vec();
      s.w2 = r.vec();
      s.b2 = r.f64();
      check(s.w1.rows() == di && s.b1.size() == s.w1.cols() && s.w2.size() == s.w1.cols());
      state = std::move(s);
      break;
    }
  }
  if (!r.done()) throw ValidationError("model container: trailing bytes");
  return TrainedModel(kind, std::move(label), d, std::move(state), std::move(std_opt));
}

TrainedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& x_raw, std::span<const int> y) {
  spec.validate();
  if (static_cast<std::size_t>(x_raw.rows()) != y.size()) throw ShapeError("fit: rows and labels disagree");
  if (x_raw.cols() == 0) throw UnfittableError("fit: no features");
  std::size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw ValidationError("fit: labels must be 0 or 1");
    pos += static_cast<std::size_t>(v);
  }
  if (pos < 2 || y.size() - pos < 2) {
    throw UnfittableError("fit: need at least two rows of each class (got " + std::to_string(pos) + " positive, " +
                          std::to_string(y.size() - pos) + " negative)");
  }
  if (!x_raw.allFinite()) throw ValidationError("fit: features contain NaN or Inf");

  std::optional<Standardizer> stdz;
  Eigen::MatrixXd scaled;
  if (uses_standardization(spec.kind)) {
    stdz = fit_standardizer(x_raw);
    scaled = stdz->apply(x_raw);
  }
  const Eigen::MatrixXd& x = stdz ? scaled : x_raw;

  ModelState state;
  switch (spec.kind) {
    case ModelKind::Qda: state = models::fit_qda(x, y, spec.qda); break;
    case ModelKind::Lr: state = models::fit_logistic(x, y, spec.lr); break;
    case ModelKind::Svm: state = models::fit_linear_svm(x, y, spec.svm); break;
    case ModelKind::Dt: state = models::fit_tree(x, y, spec.dt); break;
    case ModelKind::Rf: state = models::fit_forest(x, y, spec.rf, spec.seed); break;
    case ModelKind::Gb: state = models::fit_boosting(x, y, spec.gb); break;
    case ModelKind::Mlp: state = models::fit_mlp(x, y, spec.mlp, spec.seed); break;
  }
  return TrainedModel(spec.kind, spec.display_name(), static_cast<std::size_t>(x_raw.cols()), std::move(state),
                      std::move(stdz));
}

TrainedModel fit(const ModelSpec& spec, const LabeledDataset& data) {
  data.validate();
  return fit(spec, data.x, data.y);
}

}  // namespace ehg
