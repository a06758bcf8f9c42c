#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace timbre {

// Feature rows with integer labels indexing `classes`.
struct TrainingSet {
  std::vector<std::string> classes;
  std::vector<std::vector<double>> features;
  std::vector<std::size_t> labels;
  std::uint64_t config_hash = 0;
  std::string feature_config;  // canonical config text, carried into the model

  std::size_t size() const { return features.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features.front().size(); }
};

inline constexpr double kScalerStdFloor = 1e-8;

struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> std;

  std::vector<double> apply(std::span<const double> x) const;
};

// Per-dimension mean and population std, std clamped below by 1e-8.
FeatureScaler fit_scaler(std::span<const std::vector<double>> rows);

// w_t = 1 / N_t for every class index in [0, n_classes).
std::vector<double> class_weights(std::span<const std::size_t> labels,
                                  std::span<const std::string> classes);

struct SvmParams {
  double C = 10.0;
  std::size_t max_epochs = 2000;
  double tol = 1e-10;  // projected-gradient spread that ends dual coordinate descent
  std::uint64_t seed = 7;
  unsigned threads = 1;  // pairwise training workers; results do not depend on it
};

struct LinearSvm {
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t class_pos = 0;
  std::size_t class_neg = 0;

  double decision(std::span<const double> x) const;
};

// Minimizes 1/2 (|w|^2 + b^2) + C * sum_j s_j * max(0, 1 - y_j (w.x_j + b)),
// s_j = w_pos for positives and w_neg for negatives, by dual coordinate
// descent with a seeded visiting order. The bias is folded in as a constant
// feature, hence the b^2 term.
LinearSvm train_binary(std::span<const std::vector<double>> pos,
                       std::span<const std::vector<double>> neg, double w_pos, double w_neg,
                       const SvmParams& params);

// Primal objective of the problem train_binary() solves.
double binary_objective(const LinearSvm& svm, std::span<const std::vector<double>> pos,
                        std::span<const std::vector<double>> neg, double w_pos, double w_neg,
                        double C);

struct MulticlassModel {
  std::vector<std::string> classes;
  std::vector<LinearSvm> svms;  // (0,1), (0,2), ..., (k-2,k-1)
  FeatureScaler scaler;
  std::vector<double> class_weights;
  std::uint64_t config_hash = 0;
  std::string feature_config;

  std::size_t dim() const { return scaler.mean.size(); }
};

constexpr std::size_t pair_count(std::size_t k) { return k * (k - 1) / 2; }

MulticlassModel train_all_pairs(const TrainingSet& train, const SvmParams& params);

struct Prediction {
  std::size_t label = 0;
  std::vector<int> votes;
  std::vector<double> margin_sum;  // sum of |d| over the matches each class won
};

// Round robin over all pairs on the scaled vector. A match goes to class_pos
// when d > 0, otherwise to class_neg. Ties on votes fall to the larger
// margin_sum, then to the lower class index.
Prediction predict(const MulticlassModel& model, std::span<const double> x);

// Throws ConfigError unless the model was trained on features from `hash`.
void require_config(const MulticlassModel& model, std::uint64_t hash);

// Binary model file; layout documented in model_io.cpp.
inline constexpr std::uint8_t kModelFormatVersion = 1;
std::vector<std::uint8_t> save_model(const MulticlassModel& model);
MulticlassModel load_model(std::span<const std::uint8_t> bytes);
void save_model_file(const MulticlassModel& model, const std::filesystem::path& path);
MulticlassModel load_model_file(const std::filesystem::path& path);

}  // namespace timbre
