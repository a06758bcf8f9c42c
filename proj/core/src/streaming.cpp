#include "timbre/streaming.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "timbre/error.hpp"

namespace timbre {

std::size_t majority(std::span<const std::size_t> ring) {
  if (ring.empty()) throw DataError("majority of an empty ring");
  std::size_t best = ring.back();
  std::size_t best_count = 0;
  // Walking newest to oldest, the first label reaching a count is the most
  // recent among those with that count.
  for (std::size_t i = ring.size(); i-- > 0;) {
    const std::size_t label = ring[i];
    if (std::find(ring.begin() + static_cast<std::ptrdiff_t>(i) + 1, ring.end(), label) !=
        ring.end())
      continue;  // already counted from a more recent position
    const auto count = static_cast<std::size_t>(std::count(ring.begin(), ring.end(), label));
    if (count > best_count) {
      best = label;
      best_count = count;
    }
  }
  return best;
}

std::string format_event(const StreamEvent& ev, std::span<const std::string> classes) {
  char t[32];
  std::snprintf(t, sizeof t, "%.3f", ev.t_seconds);
  return std::string(t) + "\t" + classes[ev.window_label] + "\t" + classes[ev.smoothed_label];
}

StreamPredictor::StreamPredictor(std::shared_ptr<const MulticlassModel> model, FeatureConfig cfg,
                                 int sample_rate)
    : model_(std::move(model)),
      extractor_(cfg, sample_rate),
      ring_capacity_(static_cast<std::size_t>(std::ceil(1.0 / cfg.hop_seconds - 1e-9))) {
  if (!model_) throw ConfigError("stream predictor needs a model");
  require_config(*model_, config_hash(cfg));
  ring_capacity_ = std::max<std::size_t>(1, ring_capacity_);
}

std::vector<StreamEvent> StreamPredictor::push_samples(std::span<const double> samples) {
  pending_.insert(pending_.end(), samples.begin(), samples.end());
  const std::size_t win = extractor_.window_samples();
  const std::size_t hop = extractor_.hop_samples();
  const double fs = extractor_.sample_rate();

  std::vector<StreamEvent> events;
  while (pending_.size() - head_ >= win) {
    const std::span<const double> window(pending_.data() + head_, win);
    const auto fv = extractor_.extract(window);

    StreamEvent ev;
    ev.prediction = predict(*model_, fv.values);
    ev.window_label = ev.prediction.label;
    ring_.push_back(ev.window_label);
    if (ring_.size() > ring_capacity_) ring_.pop_front();
    const std::vector<std::size_t> snapshot(ring_.begin(), ring_.end());
    ev.smoothed_label = majority(snapshot);
    ev.t_seconds = static_cast<double>(emitted_ * hop + win) / fs;
    ++emitted_;
    events.push_back(std::move(ev));
    head_ += hop;
  }
  if (head_ > 0 && head_ >= pending_.size() / 2) {
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(head_));
    head_ = 0;
  }
  return events;
}

}  // namespace timbre
