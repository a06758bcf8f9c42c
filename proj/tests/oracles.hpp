#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library's DSP, feature or SVM code paths.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace oracle {

inline std::vector<double> naive_dft_power(std::span<const double> x, std::size_t n) {
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    long double re = 0, im = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
      const long double ang = -2.0L * std::numbers::pi_v<long double> * k * t / n;
      re += x[t] * std::cos(ang);
      im += x[t] * std::sin(ang);
    }
    out[k] = static_cast<double>(re * re + im * im);
  }
  return out;
}

inline std::vector<double> direct_dct_ii(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double acc = 0;
    for (std::size_t i = 0; i < n; ++i)
      acc += x[i] * std::cos(std::numbers::pi_v<long double> * (i + 0.5L) * k / n);
    out[k] = static_cast<double>(acc * std::sqrt((k == 0 ? 1.0L : 2.0L) / n));
  }
  return out;
}

struct LpcSolution {
  std::vector<double> filter;  // [1, c1..cp] so that sum_i c_i x[n-i] ~ 0
  double error = 0.0;          // minimum mean squared residual
};

// Levinson-Durbin recursion on autocorrelation r[0..p].
inline LpcSolution levinson_durbin(std::span<const double> r, std::size_t p) {
  std::vector<double> a(p + 1, 0.0);
  a[0] = 1.0;
  double err = r[0];
  for (std::size_t i = 1; i <= p; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / err;
    std::vector<double> prev = a;
    for (std::size_t j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    err *= (1.0 - k * k);
  }
  return {a, err};
}

inline std::vector<double> biased_autocorr(std::span<const double> x, std::size_t p) {
  std::vector<double> r(p + 1, 0.0);
  for (std::size_t lag = 0; lag <= p; ++lag) {
    long double acc = 0;
    for (std::size_t n = lag; n < x.size(); ++n) acc += static_cast<long double>(x[n]) * x[n - lag];
    r[lag] = static_cast<double>(acc / x.size());
  }
  return r;
}

// Textbook MFCC: naive DFT power, triangular mel filters from the edge
// formula, natural log with floor, orthonormal DCT-II by direct sum, c0 dropped.
inline std::vector<double> textbook_mfcc(std::span<const double> windowed, int fs,
                                         std::size_t nfft, std::size_t n_filters,
                                         std::size_t n_coeffs, double floor) {
  const auto power = naive_dft_power(windowed, nfft);
  auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto imel = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const double top = mel(fs / 2.0);
  std::vector<double> logs(n_filters);
  for (std::size_t j = 0; j < n_filters; ++j) {
    const double lo = imel(top * j / (n_filters + 1));
    const double c = imel(top * (j + 1) / (n_filters + 1));
    const double hi = imel(top * (j + 2) / (n_filters + 1));
    long double e = 0;
    for (std::size_t k = 0; k < power.size(); ++k) {
      const double f = static_cast<double>(k) * fs / nfft;
      double w = 0.0;
      if (f > lo && f <= c) w = (f - lo) / (c - lo);
      if (f > c && f < hi) w = (hi - f) / (hi - c);
      e += w * power[k];
    }
    logs[j] = std::log(std::max(static_cast<double>(e), floor));
  }
  const auto d = direct_dct_ii(logs);
  return {d.begin() + 1, d.begin() + 1 + static_cast<std::ptrdiff_t>(n_coeffs)};
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, rms = 0.0;
};

// Normal equations on raw (uncentred) sums in long double.
inline LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  long double n = x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double det = n * sxx - sx * sx;
  const long double a = (n * sxy - sx * sy) / det;
  const long double b = (sy * sxx - sx * sxy) / det;
  long double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double r = y[i] - a * x[i] - b;
    ssr += r * r;
  }
  return {static_cast<double>(a), static_cast<double>(b), static_cast<double>(std::sqrt(ssr / n))};
}

// First `count` strict local maxima at index >= start, scanning below `end`.
inline std::vector<double> peak_scan(std::span<const double> c, std::size_t start,
                                     std::size_t end, std::size_t count) {
  std::vector<double> out;
  for (std::size_t i = std::max<std::size_t>(start, 1); i < end && i + 1 < c.size(); ++i) {
    if (out.size() == count) break;
    if (c[i - 1] < c[i] && c[i + 1] < c[i]) out.push_back(c[i]);
  }
  while (out.size() < count) out.push_back(0.0);
  return out;
}

// Majority by explicit counting; ties go to the label whose last occurrence
// is latest.
inline std::size_t majority_count(std::span<const std::size_t> ring) {
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> stats;  // label -> (count, last)
  for (std::size_t i = 0; i < ring.size(); ++i) {
    auto& s = stats[ring[i]];
    ++s.first;
    s.second = i;
  }
  std::size_t best = ring.front();
  std::pair<std::size_t, std::size_t> best_stat{0, 0};
  for (const auto& [label, s] : stats)
    if (s > best_stat) {
      best = label;
      best_stat = s;
    }
  return best;
}

inline std::vector<double> uniform_noise(std::size_t n, std::uint64_t seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = amp * (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0);
  return x;
}

inline std::vector<double> gaussian_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = nd(rng);
  return x;
}

// x[n] = sum_i phi_i x[n-i] + e[n], with burn-in discarded.
inline std::vector<double> ar_process(std::span<const double> phi, std::size_t n,
                                      std::uint64_t seed) {
  const std::size_t burn = 500;
  const auto e = gaussian_noise(n + burn, seed);
  std::vector<double> x(n + burn, 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    double v = e[t];
    for (std::size_t i = 0; i < phi.size(); ++i)
      if (t > i) v += phi[i] * x[t - 1 - i];
    x[t] = v;
  }
  return {x.begin() + burn, x.end()};
}

}  // namespace oracle
