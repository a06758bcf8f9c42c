#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "timbre/feature_config.hpp"
#include "timbre/features.hpp"
#include "timbre/svm.hpp"

namespace timbre {

// Modal label; among tied labels the one seen most recently wins.
// `ring` is ordered oldest first. Throws DataError when empty.
std::size_t majority(std::span<const std::size_t> ring);

struct StreamEvent {
  double t_seconds = 0.0;  // end of the analysed window
  std::size_t window_label = 0;
  std::size_t smoothed_label = 0;
  Prediction prediction;
};

// `<t>\t<window_label>\t<smoothed_label>` with t printed to the millisecond.
std::string format_event(const StreamEvent& ev, std::span<const std::string> classes);

// Re-buffers arbitrary sample chunks into analysis windows, classifies each
// window and smooths over the trailing second. Single owner; movable.
class StreamPredictor {
 public:
  StreamPredictor(std::shared_ptr<const MulticlassModel> model, FeatureConfig cfg,
                  int sample_rate);

  std::vector<StreamEvent> push_samples(std::span<const double> samples);

  std::size_t ring_capacity() const { return ring_capacity_; }
  const std::deque<std::size_t>& ring() const { return ring_; }
  std::size_t emitted() const { return emitted_; }
  const MulticlassModel& model() const { return *model_; }

 private:
  std::shared_ptr<const MulticlassModel> model_;
  FeatureExtractor extractor_;
  std::size_t ring_capacity_;
  std::vector<double> pending_;
  std::size_t head_ = 0;  // first unconsumed sample in pending_
  std::deque<std::size_t> ring_;
  std::size_t emitted_ = 0;
};

}  // namespace timbre
