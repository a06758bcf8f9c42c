#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "timbre/feature_config.hpp"
#include "timbre/features.hpp"
#include "timbre/svm.hpp"

namespace timbre {

struct SourceId {
  std::string file;  // path relative to the corpus root, '/' separated
  std::size_t frame = 0;

  auto operator<=>(const SourceId&) const = default;
};

struct LabeledEntry {
  FeatureVector features;
  std::size_t label = 0;
  SourceId source;
};

struct LabeledDataset {
  std::vector<std::string> classes;
  std::vector<LabeledEntry> entries;
  std::uint64_t config_hash = 0;
  std::string feature_config;
  std::vector<std::string> warnings;

  std::size_t size() const { return entries.size(); }
  std::vector<std::size_t> class_counts() const;
};

struct BuildOptions {
  unsigned threads = 1;  // per-file extraction workers
};

// Layout root/<class>/*.wav, classes and files visited in sorted order.
// Unreadable or too-short files and empty class directories are skipped
// with a warning; a root without any usable class throws DataError.
LabeledDataset build_dataset(const std::filesystem::path& root, const FeatureConfig& cfg,
                             const BuildOptions& opts = {});

// Per class, entries are ranked by a hash of (seed, source id) and the first
// floor(N_t / 2) go to train. Independent of entry order.
std::pair<LabeledDataset, LabeledDataset> split_half(const LabeledDataset& data,
                                                     std::uint64_t seed);

// Masked-out dimensions are zeroed.
TrainingSet to_training_set(const LabeledDataset& data, const AblationConfig& mask = {});

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> classes);

  void add(std::size_t truth, std::size_t predicted);
  std::size_t at(std::size_t truth, std::size_t predicted) const;
  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t total() const;
  std::size_t correct() const;
  double accuracy() const;

  // Header row and first column carry class names; cells are integer counts.
  std::string to_csv() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> classes_;
  std::vector<std::size_t> counts_;
};

struct Evaluation {
  ConfusionMatrix matrix;
  std::vector<std::size_t> truth;      // model class index per entry
  std::vector<std::size_t> predicted;  // model class index per entry
};

// Rows of the matrix follow the model's class order; every test class must
// exist in the model. Throws ConfigError on a config hash mismatch.
Evaluation evaluate(const MulticlassModel& model, const LabeledDataset& test,
                    const AblationConfig& mask = {});

struct CrossValidation {
  MulticlassModel model;
  Evaluation train;
  Evaluation test;
};

CrossValidation cross_validate(const LabeledDataset& data, std::uint64_t split_seed,
                               const SvmParams& params, const AblationConfig& mask = {});

struct AblationRow {
  AblationConfig mask;
  std::string name;
  std::size_t live_dims = 0;
  double accuracy = 0.0;
};

std::vector<AblationRow> ablation_run(const LabeledDataset& data,
                                      const std::vector<AblationConfig>& masks,
                                      std::uint64_t split_seed, const SvmParams& params);

// `mask,accuracy` header then one row per mask.
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace timbre
