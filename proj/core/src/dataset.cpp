#include "timbre/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "timbre/error.hpp"
#include "timbre/wav.hpp"

namespace timbre {

namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool is_wav(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return ext == ".wav";
}

struct FileJob {
  fs::path path;
  std::string relative;
  std::size_t label;
};

struct FileResult {
  std::vector<LabeledEntry> entries;
  std::vector<std::string> warnings;
};

class ExtractorCache {
 public:
  explicit ExtractorCache(const FeatureConfig& cfg) : cfg_(cfg) {}

  const FeatureExtractor& get(int fs) {
    std::lock_guard lock(mu_);
    auto it = cache_.find(fs);
    if (it == cache_.end())
      it = cache_.emplace(fs, std::make_unique<FeatureExtractor>(cfg_, fs)).first;
    return *it->second;
  }

 private:
  FeatureConfig cfg_;
  std::mutex mu_;
  std::map<int, std::unique_ptr<FeatureExtractor>> cache_;
};

FileResult process_file(const FileJob& job, const FeatureConfig& cfg, ExtractorCache& cache) {
  FileResult out;
  AudioClip clip;
  try {
    clip = load_wav(job.path);
  } catch (const Error& e) {
    out.warnings.push_back("skipping " + job.relative + ": " + e.what());
    return out;
  }
  std::vector<Frame> frames;
  try {
    frames = frame_signal(clip, cfg.window_seconds, cfg.hop_seconds);
  } catch (const DataError& e) {
    out.warnings.push_back("skipping " + job.relative + ": " + e.what());
    return out;
  }
  const auto& extractor = cache.get(clip.sample_rate);
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    LabeledEntry e;
    e.features = extractor.extract(frames[i]);
    e.label = job.label;
    e.source = {job.relative, i};
    degenerate += e.features.degenerate_lpc ? 1 : 0;
    out.entries.push_back(std::move(e));
  }
  if (degenerate > 0)
    out.warnings.push_back(job.relative + ": " + std::to_string(degenerate) +
                           " silent frame(s), lpc features zero-filled");
  return out;
}

std::size_t class_index(const std::vector<std::string>& classes, const std::string& name) {
  const auto it = std::find(classes.begin(), classes.end(), name);
  if (it == classes.end()) throw DataError("class '" + name + "' is not known to the model");
  return static_cast<std::size_t>(it - classes.begin());
}

LabeledDataset empty_like(const LabeledDataset& d) {
  LabeledDataset out;
  out.classes = d.classes;
  out.config_hash = d.config_hash;
  out.feature_config = d.feature_config;
  return out;
}

}  // namespace

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(classes.size(), 0);
  for (const auto& e : entries) ++counts[e.label];
  return counts;
}

LabeledDataset build_dataset(const fs::path& root, const FeatureConfig& cfg,
                             const BuildOptions& opts) {
  cfg.validate();
  if (!fs::is_directory(root)) throw DataError("corpus root " + root.string() + " is not a directory");

  LabeledDataset data;
  data.config_hash = config_hash(cfg);
  data.feature_config = to_config_text(cfg);

  std::vector<fs::path> class_dirs;
  for (const auto& de : fs::directory_iterator(root))
    if (de.is_directory()) class_dirs.push_back(de.path());
  std::sort(class_dirs.begin(), class_dirs.end());

  std::vector<std::vector<FileJob>> jobs_by_class;
  std::vector<std::string> names;
  for (const auto& dir : class_dirs) {
    std::vector<fs::path> files;
    for (const auto& de : fs::directory_iterator(dir))
      if (de.is_regular_file() && is_wav(de.path())) files.push_back(de.path());
    std::sort(files.begin(), files.end());
    const std::string name = dir.filename().string();
    if (files.empty()) {
      data.warnings.push_back("class directory '" + name + "' has no wav files; excluded");
      continue;
    }
    std::vector<FileJob> jobs;
    for (const auto& f : files)
      jobs.push_back({f, name + "/" + f.filename().string(), 0});
    jobs_by_class.push_back(std::move(jobs));
    names.push_back(name);
  }

  std::vector<FileJob> jobs;
  for (const auto& js : jobs_by_class) jobs.insert(jobs.end(), js.begin(), js.end());
  // provisional labels index `names`; remapped once empty classes are known
  {
    std::size_t at = 0;
    for (std::size_t c = 0; c < jobs_by_class.size(); ++c)
      for (std::size_t i = 0; i < jobs_by_class[c].size(); ++i) jobs[at++].label = c;
  }

  ExtractorCache cache(cfg);
  std::vector<FileResult> results(jobs.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(opts.threads, jobs.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = process_file(jobs[i], cfg, cache);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++)
          results[i] = process_file(jobs[i], cfg, cache);
      });
  }

  std::vector<std::size_t> per_class(names.size(), 0);
  for (std::size_t i = 0; i < jobs.size(); ++i) per_class[jobs[i].label] += results[i].entries.size();
  std::vector<std::size_t> remap(names.size(), 0);
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (per_class[c] == 0) {
      data.warnings.push_back("class '" + names[c] + "' produced no frames; excluded");
      continue;
    }
    remap[c] = data.classes.size();
    data.classes.push_back(names[c]);
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& r = results[i];
    data.warnings.insert(data.warnings.end(), r.warnings.begin(), r.warnings.end());
    for (auto& e : r.entries) {
      e.label = remap[e.label];
      data.entries.push_back(std::move(e));
    }
  }
  if (data.classes.empty()) throw DataError("no usable classes under " + root.string());
  return data;
}

std::pair<LabeledDataset, LabeledDataset> split_half(const LabeledDataset& data,
                                                     std::uint64_t seed) {
  const auto counts = data.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] < 2)
      throw DataError("class '" + data.classes[c] + "' has " + std::to_string(counts[c]) +
                      " entries; the split needs at least 2");

  struct Keyed {
    std::uint64_t key;
    const LabeledEntry* entry;
  };
  std::vector<std::vector<Keyed>> by_class(data.classes.size());
  for (const auto& e : data.entries) {
    const std::uint64_t h =
        splitmix64(fnv1a(e.source.file, splitmix64(seed)) ^ splitmix64(e.source.frame + 1));
    by_class[e.label].push_back({h, &e});
  }

  auto train = empty_like(data);
  auto test = empty_like(data);
  for (auto& group : by_class) {
    std::sort(group.begin(), group.end(), [](const Keyed& a, const Keyed& b) {
      if (a.key != b.key) return a.key < b.key;
      return a.entry->source < b.entry->source;
    });
    const std::size_t n_train = group.size() / 2;
    for (std::size_t i = 0; i < group.size(); ++i)
      (i < n_train ? train : test).entries.push_back(*group[i].entry);
  }
  return {std::move(train), std::move(test)};
}

TrainingSet to_training_set(const LabeledDataset& data, const AblationConfig& mask) {
  const auto live = feature_mask(mask);
  std::vector<bool> keep(layout::kDim, false);
  for (auto i : live) keep[i] = true;

  TrainingSet ts;
  ts.classes = data.classes;
  ts.config_hash = data.config_hash;
  ts.feature_config = data.feature_config;
  ts.features.reserve(data.size());
  ts.labels.reserve(data.size());
  for (const auto& e : data.entries) {
    std::vector<double> row(layout::kDim, 0.0);
    for (std::size_t i = 0; i < layout::kDim; ++i)
      if (keep[i]) row[i] = e.features.values[i];
    ts.features.push_back(std::move(row));
    ts.labels.push_back(e.label);
  }
  return ts;
}

// -------------------------------------------------------------- confusion

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes)
    : classes_(std::move(classes)), counts_(classes_.size() * classes_.size(), 0) {}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  if (truth >= classes_.size() || predicted >= classes_.size())
    throw DataError("confusion matrix index out of range");
  ++counts_[truth * classes_.size() + predicted];
}

std::size_t ConfusionMatrix::at(std::size_t truth, std::size_t predicted) const {
  return counts_.at(truth * classes_.size() + predicted);
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < classes_.size(); ++i) t += at(i, i);
  return t;
}

double ConfusionMatrix::accuracy() const {
  const auto t = total();
  return t == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(t);
}

std::string ConfusionMatrix::to_csv() const {
  std::string s = "true\\predicted";
  for (const auto& c : classes_) s += "," + c;
  s += "\n";
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    s += classes_[i];
    for (std::size_t j = 0; j < classes_.size(); ++j) s += "," + std::to_string(at(i, j));
    s += "\n";
  }
  return s;
}

// ------------------------------------------------------------- evaluation

Evaluation evaluate(const MulticlassModel& model, const LabeledDataset& test,
                    const AblationConfig& mask) {
  require_config(model, test.config_hash);
  if (test.entries.empty()) throw DataError("cannot evaluate an empty test set");

  std::vector<std::size_t> to_model(test.classes.size());
  for (std::size_t c = 0; c < test.classes.size(); ++c)
    to_model[c] = class_index(model.classes, test.classes[c]);

  const auto ts = to_training_set(test, mask);
  Evaluation ev{ConfusionMatrix(model.classes), {}, {}};
  ev.truth.reserve(ts.size());
  ev.predicted.reserve(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const std::size_t truth = to_model[ts.labels[i]];
    const std::size_t pred = predict(model, ts.features[i]).label;
    ev.truth.push_back(truth);
    ev.predicted.push_back(pred);
    ev.matrix.add(truth, pred);
  }
  return ev;
}

CrossValidation cross_validate(const LabeledDataset& data, std::uint64_t split_seed,
                               const SvmParams& params, const AblationConfig& mask) {
  auto [train, test] = split_half(data, split_seed);
  auto model = train_all_pairs(to_training_set(train, mask), params);
  auto train_eval = evaluate(model, train, mask);
  auto test_eval = evaluate(model, test, mask);
  return {std::move(model), std::move(train_eval), std::move(test_eval)};
}

std::vector<AblationRow> ablation_run(const LabeledDataset& data,
                                      const std::vector<AblationConfig>& masks,
                                      std::uint64_t split_seed, const SvmParams& params) {
  for (const auto& m : masks) (void)feature_mask(m);
  auto [train, test] = split_half(data, split_seed);
  std::vector<AblationRow> rows;
  for (const auto& m : masks) {
    const auto model = train_all_pairs(to_training_set(train, m), params);
    const auto ev = evaluate(model, test, m);
    rows.push_back({m, mask_name(m), feature_mask(m).size(), ev.matrix.accuracy()});
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string s = "mask,accuracy\n";
  for (const auto& r : rows) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, r.accuracy, std::chars_format::fixed, 6);
    s += r.name + "," + std::string(buf, res.ptr) + "\n";
  }
  return s;
}

}  // namespace timbre
