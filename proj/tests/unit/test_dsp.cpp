#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "timbre/dsp.hpp"
#include "timbre/error.hpp"

using namespace timbre;

namespace {

AudioClip tone_clip(double seconds, int fs = 16000) {
  AudioClip c;
  c.sample_rate = fs;
  c.samples.resize(seconds_to_samples(seconds, fs));
  for (std::size_t i = 0; i < c.samples.size(); ++i)
    c.samples[i] = 0.5 * std::sin(2.0 * std::numbers::pi * 440.0 * i / fs);
  return c;
}

Frame frame_of(std::vector<double> x, int fs = 16000) {
  Frame f;
  f.samples = std::move(x);
  f.sample_rate = fs;
  return f;
}

}  // namespace

TEST_CASE("frame_signal counts and offsets") {
  SUBCASE("non-overlapping second") {
    const auto frames = frame_signal(tone_clip(1.0), 0.1, 0.1);
    REQUIRE(frames.size() == 10);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      CHECK(frames[i].samples.size() == 1600);
      CHECK(frames[i].start_offset == i * 1600);
    }
  }
  SUBCASE("half hop") { CHECK(frame_signal(tone_clip(1.0), 0.1, 0.05).size() == 19); }
  SUBCASE("too short") {
    try {
      frame_signal(tone_clip(0.05), 0.1, 0.1);
      FAIL("expected an error");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("clip too short") != std::string::npos);
      CHECK(msg.find("1600") != std::string::npos);
      CHECK(msg.find("800") != std::string::npos);
    }
  }
  SUBCASE("bad hop") {
    CHECK_THROWS_AS(frame_signal(tone_clip(1.0), 0.1, 0.2), ConfigError);
    CHECK_THROWS_AS(frame_signal(tone_clip(1.0), 0.1, 0.0), ConfigError);
  }
}

TEST_CASE("non-overlapping frames tile the clip prefix") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    AudioClip c;
    c.sample_rate = 8000;
    c.samples = oracle::uniform_noise(8000 + 123 * seed, seed);
    const auto frames = frame_signal(c, 0.1, 0.1);
    std::vector<double> joined;
    for (const auto& f : frames) joined.insert(joined.end(), f.samples.begin(), f.samples.end());
    REQUIRE(joined.size() == frames.size() * 800);
    CHECK(std::equal(joined.begin(), joined.end(), c.samples.begin()));
  }
}

TEST_CASE("apply_window") {
  SUBCASE("rectangular is identity") {
    const auto f = apply_window(frame_of(std::vector<double>(64, 1.0)), WindowKind::rectangular);
    CHECK(std::all_of(f.samples.begin(), f.samples.end(), [](double v) { return v == 1.0; }));
  }
  SUBCASE("hamming of ones is the symmetric taper") {
    for (std::size_t n : {2u, 15u, 64u, 1600u}) {
      const auto f = apply_window(frame_of(std::vector<double>(n, 1.0)), WindowKind::hamming);
      REQUIRE(f.samples.size() == n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(f.samples[i] - f.samples[n - 1 - i]) < 1e-12);
      CHECK(f.samples.front() == doctest::Approx(0.08).epsilon(1e-12));
    }
  }
  SUBCASE("hamming peak is one at the centre of an odd frame") {
    auto x = oracle::uniform_noise(101, 3);
    const auto f = apply_window(frame_of(x), WindowKind::hamming);
    CHECK(f.samples[50] == doctest::Approx(x[50]).epsilon(1e-12));
  }
  SUBCASE("empty frame") { CHECK_THROWS_AS(apply_window(Frame{}, WindowKind::hamming), DataError); }
}

TEST_CASE("power_spectrum") {
  SUBCASE("bin-aligned sine peaks at its bin") {
    const std::size_t n = 256, k = 19;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * k * i / n);
    const auto s = power_spectrum(frame_of(x), n);
    const auto it = std::max_element(s.bins.begin(), s.bins.end());
    CHECK(static_cast<std::size_t>(it - s.bins.begin()) == k);
    double rest = 0.0;
    for (std::size_t b = 0; b < s.bins.size(); ++b)
      if (b != k) rest += s.bins[b];
    CHECK(rest < 1e-12 * *it);
  }
  SUBCASE("zero frame") {
    const auto s = power_spectrum(frame_of(std::vector<double>(100, 0.0)), 128);
    CHECK(s.bins.size() == 65);
    CHECK(std::all_of(s.bins.begin(), s.bins.end(), [](double v) { return v == 0.0; }));
    CHECK(s.bin_hz == doctest::Approx(16000.0 / 128));
  }
  SUBCASE("agrees with a naive DFT") {
    for (std::size_t len : {1u, 2u, 3u, 17u, 64u, 100u, 200u, 256u}) {
      const auto x = oracle::uniform_noise(len, len);
      const std::size_t n = next_pow2(len);
      const auto s = power_spectrum(frame_of(x), n);
      const auto ref = oracle::naive_dft_power(x, n);
      double scale = 0.0;
      for (double v : ref) scale = std::max(scale, v);
      for (std::size_t b = 0; b < ref.size(); ++b)
        CHECK(std::abs(s.bins[b] - ref[b]) <= 1e-9 * std::max(scale, 1e-300));
    }
  }
  SUBCASE("configuration errors") {
    CHECK_THROWS_AS(power_spectrum(frame_of(std::vector<double>(100, 0.1)), 64), ConfigError);
    CHECK_THROWS_AS(power_spectrum(frame_of(std::vector<double>(100, 0.1)), 200), ConfigError);
  }
}

TEST_CASE("Parseval with the documented unnormalized convention") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t len = 50 + 37 * seed;
    const auto x = oracle::uniform_noise(len, seed);
    const std::size_t n = next_pow2(len) * (seed % 2 ? 1 : 2);
    const auto s = power_spectrum(frame_of(x), n);
    double spec = s.bins.front() + s.bins.back();
    for (std::size_t k = 1; k + 1 < s.bins.size(); ++k) spec += 2.0 * s.bins[k];
    double time = 0.0;
    for (double v : x) time += v * v;
    CHECK(std::abs(spec - n * time) <= 1e-6 * n * time);
  }
}

TEST_CASE("log_spectrum") {
  Spectrum s;
  s.bins.assign(9, 0.0);
  SUBCASE("floor clamp") {
    const auto l = log_spectrum(s, 1e-10);
    for (double v : l) CHECK(v == doctest::Approx(std::log(1e-10)));
  }
  SUBCASE("ones") {
    s.bins.assign(9, 1.0);
    for (double v : log_spectrum(s)) CHECK(v == 0.0);
  }
  SUBCASE("doubling shifts by log 2") {
    s.bins = oracle::uniform_noise(9, 4, 1.0);
    for (auto& v : s.bins) v = std::abs(v) + 0.1;
    const auto a = log_spectrum(s);
    for (auto& v : s.bins) v *= 2.0;
    const auto b = log_spectrum(s);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] - a[i] == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("non-positive floor") { CHECK_THROWS_AS(log_spectrum(s, 0.0), ConfigError); }
}

TEST_CASE("orthonormal DCT-II") {
  SUBCASE("constant vector") {
    const std::vector<double> c(10, 2.5);
    const auto d = dct_ii(c);
    CHECK(d[0] == doctest::Approx(2.5 * std::sqrt(10.0)).epsilon(1e-12));
    for (std::size_t k = 1; k < d.size(); ++k) CHECK(std::abs(d[k]) < 1e-12);
  }
  SUBCASE("matches direct summation at length 8") {
    const auto x = oracle::uniform_noise(8, 8);
    const auto d = dct_ii(x);
    const auto ref = oracle::direct_dct_ii(x);
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(d[k] - ref[k]) < 1e-9);
  }
  SUBCASE("round trip for every length 1..512") {
    for (std::size_t n = 1; n <= 512; ++n) {
      const auto x = oracle::uniform_noise(n, 1000 + n, 3.0);
      const auto y = dct_iii(dct_ii(x));
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
      REQUIRE(worst < 1e-9);
    }
  }
  SUBCASE("empty input") { CHECK_THROWS_AS(dct_ii(std::vector<double>{}), DataError); }
}

TEST_CASE("spectral_envelope") {
  const std::size_t n = 1025;
  const auto x = oracle::uniform_noise(n, 77, 5.0);

  SUBCASE("keeping every coefficient reconstructs the input") {
    const auto e = spectral_envelope(x, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(e[i] - x[i]) < 1e-9);
  }
  SUBCASE("DC only gives the mean") {
    const auto e = spectral_envelope(x, 1);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    for (double v : e) CHECK(v == doctest::Approx(mean).epsilon(1e-12));
  }
  SUBCASE("smooth ramp survives, ripple is removed") {
    std::vector<double> ramp(n), noisy(n);
    for (std::size_t i = 0; i < n; ++i) {
      ramp[i] = -10.0 * static_cast<double>(i) / (n - 1) - 3.0;
      noisy[i] = ramp[i] + 0.8 * std::cos(2.0 * std::numbers::pi * i / 4.0);
    }
    const auto e = spectral_envelope(noisy, 30);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err += (e[i] - ramp[i]) * (e[i] - ramp[i]);
      ref += ramp[i] * ramp[i];
    }
    CHECK(std::sqrt(err / ref) < 0.05);
  }
  SUBCASE("idempotent") {
    for (std::size_t keep : {1u, 5u, 30u, 200u}) {
      const auto once = spectral_envelope(x, keep);
      const auto twice = spectral_envelope(once, keep);
      for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(once[i] - twice[i]) < 1e-9);
    }
  }
  SUBCASE("truncated path equals full transform with zeroed tail") {
    auto c = dct_ii(x);
    std::fill(c.begin() + 30, c.end(), 0.0);
    const auto ref = dct_iii(c);
    const auto e = spectral_envelope(x, 30);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(e[i] - ref[i]) < 1e-9);
  }
  SUBCASE("keep out of range") {
    CHECK_THROWS_AS(spectral_envelope(x, 0), ConfigError);
    CHECK_THROWS_AS(spectral_envelope(x, n + 1), ConfigError);
  }
}

TEST_CASE("real_cepstrum") {
  const int fs = 16000;
  const std::size_t len = 1600, nfft = 2048;

  SUBCASE("white noise has no strong structure beyond 2 ms") {
    // Largest ratio over these seeds measured at 0.020; 0.25 is the contract.
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto c = real_cepstrum(frame_of(oracle::uniform_noise(len, seed), fs), nfft);
      REQUIRE(c.coefficients.size() == nfft);
      double peak = 0.0;
      for (std::size_t i = 32; i <= nfft / 2; ++i) peak = std::max(peak, std::abs(c.coefficients[i]));
      CHECK(peak < 0.25 * std::abs(c.coefficients[0]));
    }
  }
  SUBCASE("pulse train peaks at its period") {
    for (std::size_t period : {40u, 64u, 100u, 160u}) {
      std::vector<double> x(len, 0.0);
      for (std::size_t i = 0; i < len; i += period) x[i] = 1.0;
      const auto c = real_cepstrum(frame_of(x, fs), nfft);
      const auto begin = c.coefficients.begin() + 16;
      const auto it = std::max_element(begin, c.coefficients.begin() + nfft / 2);
      CHECK(static_cast<std::size_t>(it - c.coefficients.begin()) == period);
    }
  }
  SUBCASE("silence is finite and flat") {
    const auto c = real_cepstrum(frame_of(std::vector<double>(len, 0.0), fs), nfft);
    CHECK(c.coefficients[0] == doctest::Approx(0.5 * std::log(kDefaultSpectralFloor)));
    for (std::size_t i = 1; i < nfft; ++i) REQUIRE(std::abs(c.coefficients[i]) < 1e-12);
  }
  SUBCASE("errors as power_spectrum") {
    CHECK_THROWS_AS(real_cepstrum(frame_of(std::vector<double>(len, 0.1), fs), 1024), ConfigError);
  }
}
