#include "timbre/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "timbre/error.hpp"

namespace timbre {

namespace {

// Per-thread memo of size-keyed tables; a handful of sizes are live at once.
template <class T, class Make>
const std::vector<T>& cached_table(std::size_t n, Make make) {
  thread_local std::map<std::size_t, std::vector<T>> cache;
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  if (cache.size() >= 16) cache.clear();
  return cache.emplace(n, make(n)).first->second;
}

// cos(pi * m / (2N)) for m in [0, 4N); DCT kernels index it with
// (2n + 1) * k mod 4N so no trig call sits in the inner loop.
const std::vector<double>& quarter_cos_table(std::size_t n) {
  return cached_table<double>(n, [](std::size_t len) {
    std::vector<double> table(4 * len);
    for (std::size_t m = 0; m < table.size(); ++m)
      table[m] = std::cos(std::numbers::pi * static_cast<double>(m) / (2.0 * len));
    return table;
  });
}

// exp(-2 pi i k / N) for k < N/2, each computed directly.
const std::vector<std::complex<double>>& fft_twiddles(std::size_t n) {
  return cached_table<std::complex<double>>(n, [](std::size_t len) {
    std::vector<std::complex<double>> tw(len / 2);
    for (std::size_t k = 0; k < tw.size(); ++k)
      tw[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len));
    return tw;
  });
}

std::vector<std::complex<double>> padded_copy(std::span<const double> x,
                                              std::size_t n) {
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = x[i];
  return buf;
}

void check_fft_size(std::size_t frame_length, std::size_t fft_size) {
  if (!is_pow2(fft_size))
    throw ConfigError("fft size " + std::to_string(fft_size) +
                      " is not a power of two");
  if (fft_size < frame_length)
    throw ConfigError("fft size " + std::to_string(fft_size) +
                      " is smaller than frame length " +
                      std::to_string(frame_length));
}

}  // namespace

std::size_t seconds_to_samples(double seconds, int sample_rate) {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<Frame> frame_signal(const AudioClip& clip, double window_seconds,
                                double hop_seconds) {
  if (clip.sample_rate <= 0) throw DataError("sample rate must be positive");
  if (!(hop_seconds > 0.0) || hop_seconds > window_seconds)
    throw ConfigError("hop must satisfy 0 < hop <= window");
  const std::size_t win = seconds_to_samples(window_seconds, clip.sample_rate);
  const std::size_t hop =
      std::max<std::size_t>(1, seconds_to_samples(hop_seconds, clip.sample_rate));
  if (win == 0) throw ConfigError("window shorter than one sample");
  if (clip.samples.size() < win)
    throw DataError("clip too short: need " + std::to_string(win) +
                    " samples for one window, got " +
                    std::to_string(clip.samples.size()));

  const std::size_t count = (clip.samples.size() - win) / hop + 1;
  std::vector<Frame> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t off = i * hop;
    Frame f;
    f.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(off),
                     clip.samples.begin() + static_cast<std::ptrdiff_t>(off + win));
    f.sample_rate = clip.sample_rate;
    f.start_offset = off;
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<double> window_taper(WindowKind kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::hamming && length > 1) {
    const double denom = static_cast<double>(length - 1);
    for (std::size_t n = 0; n < length; ++n)
      w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / denom);
    // exact symmetry
    for (std::size_t n = 0; n < length / 2; ++n) w[length - 1 - n] = w[n];
  }
  return w;
}

Frame apply_window(const Frame& frame, WindowKind kind) {
  if (frame.samples.empty()) throw DataError("cannot window an empty frame");
  Frame out = frame;
  const auto taper = window_taper(kind, frame.samples.size());
  for (std::size_t i = 0; i < taper.size(); ++i) out.samples[i] *= taper[i];
  return out;
}

void fft_inplace(std::span<std::complex<double>> data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_pow2(n)) throw ConfigError("fft length must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  const auto& tw = fft_twiddles(n);
  const double conj = inverse ? -1.0 : 1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const double wr = tw[k * stride].real();
        const double wi = conj * tw[k * stride].imag();
        // spelled out: operator* on std::complex goes through the NaN-safe libcall
        const auto u = data[i + k];
        const auto x = data[i + k + half];
        const std::complex<double> v(x.real() * wr - x.imag() * wi, x.real() * wi + x.imag() * wr);
        data[i + k] = u + v;
        data[i + k + half] = u - v;
      }
    }
  }
}

Spectrum power_spectrum(const Frame& frame, std::size_t fft_size) {
  check_fft_size(frame.samples.size(), fft_size);
  auto buf = padded_copy(frame.samples, fft_size);
  fft_inplace(buf);

  Spectrum spec;
  spec.fs = frame.sample_rate;
  spec.bin_hz = static_cast<double>(frame.sample_rate) / static_cast<double>(fft_size);
  spec.bins.resize(fft_size / 2 + 1);
  for (std::size_t k = 0; k < spec.bins.size(); ++k) spec.bins[k] = std::norm(buf[k]);
  return spec;
}

std::vector<double> log_spectrum(const Spectrum& spec, double floor) {
  if (!(floor > 0.0)) throw ConfigError("spectral floor must be positive");
  std::vector<double> out(spec.bins.size());
  std::transform(spec.bins.begin(), spec.bins.end(), out.begin(),
                 [floor](double b) { return std::log(std::max(b, floor)); });
  return out;
}

std::vector<double> dct_ii(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw DataError("dct of an empty sequence");
  const auto& table = quarter_cos_table(n);
  const std::size_t period = 4 * n;
  const double s0 = std::sqrt(1.0 / n);
  const double sk = std::sqrt(2.0 / n);

  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    std::size_t m = k % period;  // (2i + 1) * k advanced by 2k per step
    const std::size_t step = (2 * k) % period;
    for (std::size_t i = 0; i < n; ++i) {
      acc += values[i] * table[m];
      m += step;
      if (m >= period) m -= period;
    }
    out[k] = acc * (k == 0 ? s0 : sk);
  }
  return out;
}

std::vector<double> dct_iii(std::span<const double> coefficients) {
  const std::size_t n = coefficients.size();
  if (n == 0) throw DataError("dct of an empty sequence");
  const auto& table = quarter_cos_table(n);
  const std::size_t period = 4 * n;
  const double s0 = std::sqrt(1.0 / n);
  const double sk = std::sqrt(2.0 / n);

  std::vector<double> out(n, coefficients[0] * s0);
  for (std::size_t k = 1; k < n; ++k) {
    const double ck = coefficients[k] * sk;
    if (ck == 0.0) continue;
    std::size_t m = k % period;
    const std::size_t step = (2 * k) % period;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] += ck * table[m];
      m += step;
      if (m >= period) m -= period;
    }
  }
  return out;
}

std::vector<double> spectral_envelope(std::span<const double> log_spec,
                                      std::size_t keep_coeffs) {
  const std::size_t n = log_spec.size();
  if (keep_coeffs < 1 || keep_coeffs > n)
    throw ConfigError("keep_coeffs must lie in [1, " + std::to_string(n) + "]");
  if (keep_coeffs == n) {
    const auto c = dct_ii(log_spec);
    return dct_iii(c);
  }

  // Only the retained coefficients are ever needed, so both directions run
  // in O(n * keep_coeffs).
  const auto& table = quarter_cos_table(n);
  const std::size_t period = 4 * n;
  const double s0 = std::sqrt(1.0 / n);
  const double sk = std::sqrt(2.0 / n);

  std::vector<double> coeffs(keep_coeffs);
  for (std::size_t k = 0; k < keep_coeffs; ++k) {
    double acc = 0.0;
    std::size_t m = k % period;
    const std::size_t step = (2 * k) % period;
    for (std::size_t i = 0; i < n; ++i) {
      acc += log_spec[i] * table[m];
      m += step;
      if (m >= period) m -= period;
    }
    coeffs[k] = acc * (k == 0 ? s0 : sk);
  }

  std::vector<double> out(n, coeffs[0] * s0);
  for (std::size_t k = 1; k < keep_coeffs; ++k) {
    const double ck = coeffs[k] * sk;
    std::size_t m = k % period;
    const std::size_t step = (2 * k) % period;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] += ck * table[m];
      m += step;
      if (m >= period) m -= period;
    }
  }
  return out;
}

Cepstrum real_cepstrum(const Frame& frame, std::size_t fft_size, double floor) {
  check_fft_size(frame.samples.size(), fft_size);
  if (!(floor > 0.0)) throw ConfigError("spectral floor must be positive");
  auto buf = padded_copy(frame.samples, fft_size);
  fft_inplace(buf);
  for (auto& z : buf) z = 0.5 * std::log(std::max(std::norm(z), floor));
  fft_inplace(buf, /*inverse=*/true);

  Cepstrum c;
  c.fs = frame.sample_rate;
  c.coefficients.resize(fft_size);
  const double scale = 1.0 / static_cast<double>(fft_size);
  for (std::size_t i = 0; i < fft_size; ++i) c.coefficients[i] = buf[i].real() * scale;
  return c;
}

}  // namespace timbre
