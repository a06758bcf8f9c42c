#include "timbre/svm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "timbre/error.hpp"

namespace timbre {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Fisher-Yates over mt19937_64 output; std::shuffle's draw sequence is
// implementation defined.
void seeded_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

void check_rows(std::span<const std::vector<double>> rows, std::size_t dim) {
  for (const auto& r : rows) {
    if (r.size() != dim) throw DataError("feature rows have inconsistent dimensions");
    for (double v : r)
      if (!std::isfinite(v)) throw DataError("non-finite feature value");
  }
}

}  // namespace

std::vector<double> FeatureScaler::apply(std::span<const double> x) const {
  if (x.size() != mean.size())
    throw DataError("vector has " + std::to_string(x.size()) + " dims, scaler expects " +
                    std::to_string(mean.size()));
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / std[i];
  return out;
}

FeatureScaler fit_scaler(std::span<const std::vector<double>> rows) {
  if (rows.size() < 2) throw DataError("scaler needs at least 2 training samples");
  const std::size_t d = rows.front().size();
  check_rows(rows, d);
  FeatureScaler s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 0.0);
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows)
    for (std::size_t i = 0; i < d; ++i) s.mean[i] += r[i];
  for (auto& m : s.mean) m /= n;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < d; ++i) s.std[i] += (r[i] - s.mean[i]) * (r[i] - s.mean[i]);
  for (auto& v : s.std) v = std::max(std::sqrt(v / n), kScalerStdFloor);
  return s;
}

std::vector<double> class_weights(std::span<const std::size_t> labels,
                                  std::span<const std::string> classes) {
  std::vector<std::size_t> counts(classes.size(), 0);
  for (auto l : labels) {
    if (l >= classes.size()) throw DataError("label index out of range");
    ++counts[l];
  }
  std::vector<double> w(classes.size());
  for (std::size_t t = 0; t < classes.size(); ++t) {
    if (counts[t] == 0) throw DataError("class '" + classes[t] + "' has no samples");
    w[t] = 1.0 / static_cast<double>(counts[t]);
  }
  return w;
}

double LinearSvm::decision(std::span<const double> x) const { return dot(weights, x) + bias; }

LinearSvm train_binary(std::span<const std::vector<double>> pos,
                       std::span<const std::vector<double>> neg, double w_pos, double w_neg,
                       const SvmParams& params) {
  if (pos.empty() || neg.empty()) throw DataError("binary training needs both classes");
  if (!(params.C > 0.0)) throw ConfigError("C must be positive");
  if (!(w_pos > 0.0) || !(w_neg > 0.0)) throw ConfigError("class weights must be positive");
  const std::size_t d = pos.front().size();
  check_rows(pos, d);
  check_rows(neg, d);

  const std::size_t n = pos.size() + neg.size();
  auto row = [&](std::size_t j) -> const std::vector<double>& {
    return j < pos.size() ? pos[j] : neg[j - pos.size()];
  };
  std::vector<double> y(n), upper(n), qdiag(n), alpha(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const bool is_pos = j < pos.size();
    y[j] = is_pos ? 1.0 : -1.0;
    upper[j] = params.C * (is_pos ? w_pos : w_neg);
    qdiag[j] = dot(row(j), row(j)) + 1.0;
  }

  LinearSvm svm;
  svm.weights.assign(d, 0.0);
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < n; ++j) order[j] = j;
  std::mt19937_64 rng(params.seed);

  for (std::size_t epoch = 0; epoch < params.max_epochs; ++epoch) {
    seeded_shuffle(order, rng);
    double pg_max = -HUGE_VAL, pg_min = HUGE_VAL;
    for (std::size_t j : order) {
      const auto& x = row(j);
      const double g = y[j] * svm.decision(x) - 1.0;
      double pg = g;
      if (alpha[j] <= 0.0) pg = std::min(g, 0.0);
      else if (alpha[j] >= upper[j]) pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (pg == 0.0) continue;

      const double old = alpha[j];
      alpha[j] = std::clamp(old - g / qdiag[j], 0.0, upper[j]);
      const double delta = (alpha[j] - old) * y[j];
      if (delta == 0.0) continue;
      for (std::size_t i = 0; i < d; ++i) svm.weights[i] += delta * x[i];
      svm.bias += delta;
    }
    if (pg_max - pg_min < params.tol) break;
  }
  return svm;
}

double binary_objective(const LinearSvm& svm, std::span<const std::vector<double>> pos,
                        std::span<const std::vector<double>> neg, double w_pos, double w_neg,
                        double C) {
  double obj = 0.5 * (dot(svm.weights, svm.weights) + svm.bias * svm.bias);
  for (const auto& x : pos) obj += C * w_pos * std::max(0.0, 1.0 - svm.decision(x));
  for (const auto& x : neg) obj += C * w_neg * std::max(0.0, 1.0 + svm.decision(x));
  return obj;
}

MulticlassModel train_all_pairs(const TrainingSet& train, const SvmParams& params) {
  const std::size_t k = train.classes.size();
  if (k < 2) throw DataError("training needs at least 2 classes");
  if (train.labels.size() != train.features.size())
    throw DataError("label count does not match feature count");

  MulticlassModel model;
  model.classes = train.classes;
  model.config_hash = train.config_hash;
  model.feature_config = train.feature_config;
  model.class_weights = class_weights(train.labels, train.classes);
  model.scaler = fit_scaler(train.features);

  std::vector<std::vector<std::vector<double>>> by_class(k);
  for (std::size_t i = 0; i < train.size(); ++i)
    by_class[train.labels[i]].push_back(model.scaler.apply(train.features[i]));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) pairs.emplace_back(a, b);
  model.svms.resize(pairs.size());

  auto fit = [&](std::size_t p) {
    const auto [a, b] = pairs[p];
    SvmParams hp = params;
    hp.seed = params.seed + p;
    auto svm = train_binary(by_class[a], by_class[b], model.class_weights[a],
                            model.class_weights[b], hp);
    svm.class_pos = a;
    svm.class_neg = b;
    model.svms[p] = std::move(svm);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(params.threads, pairs.size()));
  if (workers == 1) {
    for (std::size_t p = 0; p < pairs.size(); ++p) fit(p);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
          for (std::size_t p = next++; p < pairs.size(); p = next++) {
            try {
              fit(p);
            } catch (...) {
              if (!failed.exchange(true)) failure = std::current_exception();
            }
          }
        });
    }
    if (failure) std::rethrow_exception(failure);
  }
  return model;
}

Prediction predict(const MulticlassModel& model, std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  const auto z = model.scaler.apply(x);
  const std::size_t k = model.classes.size();
  Prediction p;
  p.votes.assign(k, 0);
  p.margin_sum.assign(k, 0.0);
  for (const auto& svm : model.svms) {
    const double d = svm.decision(z);
    const std::size_t winner = d > 0.0 ? svm.class_pos : svm.class_neg;
    ++p.votes[winner];
    p.margin_sum[winner] += std::abs(d);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (p.votes[c] > p.votes[best] ||
        (p.votes[c] == p.votes[best] && p.margin_sum[c] > p.margin_sum[best]))
      best = c;
  }
  p.label = best;
  return p;
}

void require_config(const MulticlassModel& model, std::uint64_t hash) {
  if (model.config_hash != hash)
    throw ConfigError("feature config hash mismatch: model expects " +
                      std::to_string(model.config_hash) + ", features come from " +
                      std::to_string(hash));
}

}  // namespace timbre
