#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "timbre/error.hpp"
#include "timbre/streaming.hpp"
#include "timbre/synth.hpp"

using namespace timbre;

namespace {

constexpr int kFs = 16000;

SynthProfile profile(const std::string& name) {
  for (auto& p : default_profiles())
    if (p.name == name) return p;
  throw std::logic_error("no profile " + name);
}

std::vector<double> note(const std::string& name, double pitch, double seconds, std::uint64_t seed) {
  return synth_note(profile(name), pitch, kFs, seconds, seed).samples;
}

// Two-class model (flute = 0, trumpet = 1) trained on framed notes.
std::shared_ptr<const MulticlassModel> flute_trumpet_model() {
  const FeatureConfig cfg;
  const FeatureExtractor fx(cfg, kFs);
  TrainingSet ts;
  ts.classes = {"flute", "trumpet"};
  ts.config_hash = config_hash(cfg);
  ts.feature_config = to_config_text(cfg);
  std::uint64_t seed = 100;
  for (std::size_t c = 0; c < 2; ++c)
    for (double pitch : {220.0, 330.0, 440.0}) {
      const auto x = note(ts.classes[c], pitch, 1.0, seed++);
      for (std::size_t off = 0; off + 1600 <= x.size(); off += 1600) {
        const auto v = fx.extract(std::span<const double>(x.data() + off, 1600));
        ts.features.emplace_back(v.values.begin(), v.values.end());
        ts.labels.push_back(c);
      }
    }
  return std::make_shared<const MulticlassModel>(train_all_pairs(ts, {}));
}

}  // namespace

TEST_CASE("majority") {
  using V = std::vector<std::size_t>;
  CHECK(majority(V{0}) == 0);
  CHECK(majority(V{0, 1}) == 1);
  CHECK(majority(V{1, 0}) == 0);
  CHECK(majority(V{0, 0, 1, 0, 1, 1, 1, 0, 1, 1}) == 1);
  CHECK(majority(V{2, 2, 1, 1, 0}) == 1);
  CHECK_THROWS_AS(majority(V{}), DataError);

  std::mt19937_64 rng(11);
  for (int t = 0; t < 2000; ++t) {
    V ring(1 + rng() % 10);
    for (auto& l : ring) l = rng() % 4;
    REQUIRE(majority(ring) == oracle::majority_count(ring));
  }
}

TEST_CASE("smoothing dynamics") {
  // Ring of R = 10 full of label 0, then a switch to unanimous 1s.
  const std::size_t R = 10;
  std::deque<std::size_t> ring(R, 0);
  std::size_t switched_after = 0;
  for (std::size_t w = 1; w <= R; ++w) {
    ring.pop_front();
    ring.push_back(1);
    const std::vector<std::size_t> v(ring.begin(), ring.end());
    if (majority(v) == 1 && switched_after == 0) switched_after = w;
  }
  CHECK(switched_after == 5);
  CHECK(switched_after <= (R + 1) / 2 + 1);
}

TEST_CASE("StreamPredictor") {
  const auto model = flute_trumpet_model();
  const FeatureConfig cfg;

  SUBCASE("one second gives ten events") {
    StreamPredictor sp(model, cfg, kFs);
    CHECK(sp.ring_capacity() == 10);
    const auto x = note("flute", 262.0, 1.0, 7);
    const auto ev = sp.push_samples(x);
    REQUIRE(ev.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(ev[i].t_seconds == doctest::Approx(0.1 * (i + 1)));
    CHECK(sp.emitted() == 10);
    CHECK(sp.ring().size() == 10);
    CHECK(format_event(ev[0], model->classes).rfind("0.100\t", 0) == 0);
  }
  SUBCASE("chunking does not change the events") {
    const auto x = note("trumpet", 294.0, 1.0, 8);
    StreamPredictor whole(model, cfg, kFs), pieces(model, cfg, kFs);
    const auto a = whole.push_samples(x);

    std::mt19937_64 rng(3);
    std::vector<std::size_t> cuts;
    for (int i = 0; i < 36; ++i) cuts.push_back(rng() % x.size());
    cuts.push_back(0);
    cuts.push_back(x.size());
    std::sort(cuts.begin(), cuts.end());
    std::vector<StreamEvent> b;
    std::size_t chunks = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const auto got = pieces.push_samples(std::span<const double>(x.data() + cuts[i], cuts[i + 1] - cuts[i]));
      b.insert(b.end(), got.begin(), got.end());
      ++chunks;
    }
    CHECK(chunks == 37);
    REQUIRE(b.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].t_seconds == b[i].t_seconds);
      CHECK(a[i].window_label == b[i].window_label);
      CHECK(a[i].smoothed_label == b[i].smoothed_label);
      CHECK(a[i].prediction.votes == b[i].prediction.votes);
    }
  }
  SUBCASE("partial audio is held back") {
    StreamPredictor sp(model, cfg, kFs);
    CHECK(sp.push_samples(std::vector<double>(1599, 0.01)).empty());
    CHECK(sp.push_samples(std::vector<double>(1, 0.01)).size() == 1);
    CHECK(sp.push_samples(std::vector<double>{}).empty());
  }
  SUBCASE("adapts to an instrument change within the latency bound") {
    StreamPredictor sp(model, cfg, kFs);
    const auto a = sp.push_samples(note("flute", 392.0, 2.0, 21));
    const auto b = sp.push_samples(note("trumpet", 392.0, 2.0, 22));
    for (const auto& e : a) REQUIRE(e.window_label == 0);
    for (const auto& e : b) REQUIRE(e.window_label == 1);
    CHECK(a.back().smoothed_label == 0);
    std::size_t first = b.size();
    for (std::size_t i = 0; i < b.size(); ++i)
      if (b[i].smoothed_label == 1) {
        first = i + 1;
        break;
      }
    CHECK(first <= (sp.ring_capacity() + 1) / 2 + 1);
    for (std::size_t i = first - 1; i < b.size(); ++i) CHECK(b[i].smoothed_label == 1);
    CHECK(b.back().smoothed_label == 1);
  }
  SUBCASE("ring follows the hop") {
    FeatureConfig fast = cfg;
    fast.hop_seconds = 0.05;
    auto m = std::make_shared<MulticlassModel>(*model);
    m->config_hash = config_hash(fast);
    StreamPredictor sp(m, fast, kFs);
    CHECK(sp.ring_capacity() == 20);
    CHECK(sp.push_samples(std::vector<double>(16000, 0.0)).size() == 19);
  }
  SUBCASE("config mismatch is refused") {
    FeatureConfig other = cfg;
    other.keep_coeffs = 20;
    CHECK_THROWS_AS(StreamPredictor(model, other, kFs), ConfigError);
  }
}
