#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ehg/dataset.hpp"
#include "ehg/tree.hpp"

namespace ehg {

enum class ModelKind : std::uint8_t { Qda = 1, Lr, Svm, Dt, Rf, Gb, Mlp };

std::string_view to_string(ModelKind k);
/// Case-insensitive. "CB" is accepted and maps to the gradient-boosting substitute.
ModelKind parse_model_kind(std::string_view s);

struct QdaParams {
  double ridge = 1e-6;  // multiplies trace(cov)/d
};

struct LogisticParams {
  double c = 1.0;
  double tolerance = 1e-6;  // gradient norm
  std::size_t max_iterations = 5000;
};

struct SvmParams {
  double c = 1.0;
  std::size_t iterations = 5000;
};

struct TreeParams {
  std::size_t max_depth = 100;
  std::size_t min_samples_split = 2;
};

struct ForestParams {
  std::size_t n_estimators = 100;
  std::size_t max_depth = 10;
  std::size_t min_samples_split = 2;
};

struct BoostingParams {
  std::size_t n_estimators = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
};

struct MlpParams {
  std::size_t hidden_units = 100;
  double learning_rate = 1e-3;
  std::size_t epochs = 200;
  std::size_t batch_size = 200;
  double l2 = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct ModelSpec {
  ModelKind kind = ModelKind::Qda;
  std::string label;  // report name; defaults to the kind name
  std::uint64_t seed = 0;
  QdaParams qda;
  LogisticParams lr;
  SvmParams svm;
  TreeParams dt;
  ForestParams rf;
  BoostingParams gb;
  MlpParams mlp;

  std::string display_name() const { return label.empty() ? std::string(to_string(kind)) : label; }
  void validate() const;
};

ModelSpec default_spec(ModelKind kind, std::string label = {});

/// QDA, LR, SVM, DT, RF, GB, MLP and the boosting substitute labelled "CB-substitute".
std::vector<ModelSpec> default_model_suite();

struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 0 marks a pass-through column

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

Standardizer fit_standardizer(const Eigen::MatrixXd& x_train);

struct StandardizedPair {
  Eigen::MatrixXd train;
  Eigen::MatrixXd eval;
  Standardizer stats;
};

/// Statistics come from the training rows only; population std.
StandardizedPair standardize_fit_apply(const Eigen::MatrixXd& x_train, const Eigen::MatrixXd& x_eval);

/// Logistic function that is strictly above 0.5 exactly when z > 0, so thresholding
/// the probability agrees with the sign of the logit.
double sigmoid(double z);

struct QdaState {
  Eigen::Vector2d log_prior;
  std::array<Eigen::VectorXd, 2> mean;
  std::array<Eigen::MatrixXd, 2> covariance;  // ridge included
  std::array<Eigen::MatrixXd, 2> chol_l;      // lower Cholesky factor of covariance
  Eigen::Vector2d log_det;
};

struct LinearState {
  Eigen::VectorXd weights;
  double bias = 0.0;
  std::size_t iterations = 0;
};

struct TreeState {
  RegressionTree tree;
};

struct ForestState {
  std::vector<RegressionTree> trees;
};

struct BoostingState {
  double initial_logit = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  std::vector<double> training_loss;  // mean logistic loss before round 1 and after each round
};

struct MlpState {
  Eigen::MatrixXd w1;  // features x hidden
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;  // hidden
  double b2 = 0.0;
};

using ModelState = std::variant<QdaState, LinearState, TreeState, ForestState, BoostingState, MlpState>;

namespace models {
QdaState fit_qda(const Eigen::MatrixXd& x, std::span<const int> y, const QdaParams& p);
Eigen::VectorXd qda_decision(const QdaState& s, const Eigen::MatrixXd& x);  // delta_1 - delta_0

LinearState fit_logistic(const Eigen::MatrixXd& x, std::span<const int> y, const LogisticParams& p);
LinearState fit_linear_svm(const Eigen::MatrixXd& x, std::span<const int> y, const SvmParams& p);

TreeState fit_tree(const Eigen::MatrixXd& x, std::span<const int> y, const TreeParams& p);
ForestState fit_forest(const Eigen::MatrixXd& x, std::span<const int> y, const ForestParams& p, std::uint64_t seed);
BoostingState fit_boosting(const Eigen::MatrixXd& x, std::span<const int> y, const BoostingParams& p);
Eigen::VectorXd boosting_logit(const BoostingState& s, const Eigen::MatrixXd& x);

MlpState fit_mlp(const Eigen::MatrixXd& x, std::span<const int> y, const MlpParams& p, std::uint64_t seed);
Eigen::VectorXd mlp_logit(const MlpState& s, const Eigen::MatrixXd& x);
}  // namespace models

class TrainedModel {
 public:
  TrainedModel(ModelKind kind, std::string label, std::size_t n_features, ModelState state,
               std::optional<Standardizer> standardizer);

  ModelKind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  std::size_t n_features() const { return n_features_; }
  const ModelState& state() const { return state_; }
  const std::optional<Standardizer>& standardizer() const { return standardizer_; }

  /// Probability of class 1 for QDA/LR/RF/GB/MLP, signed margin for SVM, leaf
  /// class-1 fraction for DT.
  Eigen::VectorXd predict_scores(const Eigen::MatrixXd& x) const;
  double decision_threshold() const { return kind_ == ModelKind::Svm ? 0.0 : 0.5; }
  /// Hard labels from each model's own decision rule (logit sign, majority vote, ...).
  std::vector<int> predict_labels(const Eigen::MatrixXd& x) const;

  std::vector<std::uint8_t> serialize() const;
  static TrainedModel deserialize(std::span<const std::uint8_t> bytes);

 private:
  Eigen::MatrixXd prepare(const Eigen::MatrixXd& x) const;

  ModelKind kind_;
  std::string label_;
  std::size_t n_features_;
  ModelState state_;
  std::optional<Standardizer> standardizer_;
};

/// Errors: UnfittableError when either class has fewer than two rows or there are no
/// features.
TrainedModel fit(const ModelSpec& spec, const LabeledDataset& data);
TrainedModel fit(const ModelSpec& spec, const Eigen::MatrixXd& x, std::span<const int> y);

}  // namespace ehg
