#include "timbre/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "timbre/error.hpp"

namespace timbre {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// --------------------------------------------------------------- mel bank

MelFilterbank::MelFilterbank(int fs, std::size_t n_filters, std::size_t fft_size)
    : fs_(fs), fft_size_(fft_size), n_bins_(fft_size / 2 + 1) {
  if (fs <= 0) throw ConfigError("sample rate must be positive");
  if (n_filters < 13) throw ConfigError("mel filterbank needs at least 13 filters");
  if (!is_pow2(fft_size)) throw ConfigError("fft size must be a power of two");

  const double mel_hi = hz_to_mel(fs / 2.0);
  std::vector<double> edges(n_filters + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_hi * static_cast<double>(i) / static_cast<double>(n_filters + 1));

  const double bin_hz = static_cast<double>(fs) / static_cast<double>(fft_size);
  centers_hz_.assign(edges.begin() + 1, edges.end() - 1);
  weights_.assign(n_filters * n_bins_, 0.0);
  for (std::size_t j = 0; j < n_filters; ++j) {
    const double lo = edges[j], mid = edges[j + 1], hi = edges[j + 2];
    double* row = weights_.data() + j * n_bins_;
    bool any = false;
    for (std::size_t k = 0; k < n_bins_; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > lo && f <= mid)
        w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi)
        w = (hi - f) / (hi - mid);
      row[k] = w;
      any = any || w > 0.0;
    }
    if (!any)
      throw ConfigError("mel filter " + std::to_string(j) + " covers no fft bin; " +
                        std::to_string(n_filters) + " filters is too many for fft size " +
                        std::to_string(fft_size));
  }
}

std::span<const double> MelFilterbank::weights(std::size_t filter) const {
  return {weights_.data() + filter * n_bins_, n_bins_};
}

std::vector<double> MelFilterbank::energies(const Spectrum& spec) const {
  if (spec.bins.size() != n_bins_)
    throw ConfigError("spectrum has " + std::to_string(spec.bins.size()) +
                      " bins, filterbank expects " + std::to_string(n_bins_));
  std::vector<double> e(size());
  for (std::size_t j = 0; j < size(); ++j) {
    const auto w = weights(j);
    e[j] = std::inner_product(w.begin(), w.end(), spec.bins.begin(), 0.0);
  }
  return e;
}

MelFilterbank build_mel_filterbank(int fs, std::size_t n_filters, std::size_t fft_size) {
  return MelFilterbank(fs, n_filters, fft_size);
}

// ------------------------------------------------------------------- MFCC

std::vector<double> mfcc_from_spectrum(const Spectrum& spec, const MelFilterbank& bank,
                                       std::size_t n_coeffs, double floor) {
  if (n_coeffs + 1 > bank.size())
    throw ConfigError("more cepstral coefficients requested than mel filters");
  auto e = bank.energies(spec);
  for (auto& v : e) v = std::log(std::max(v, floor));
  const auto c = dct_ii(e);
  return {c.begin() + 1, c.begin() + 1 + static_cast<std::ptrdiff_t>(n_coeffs)};
}

std::vector<double> mfcc(const Frame& frame, const MelFilterbank& bank, std::size_t n_coeffs,
                         double floor) {
  return mfcc_from_spectrum(power_spectrum(frame, bank.fft_size()), bank, n_coeffs, floor);
}

// -------------------------------------------------------------------- LPC

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  if (x.empty()) return r;
  for (std::size_t lag = 0; lag <= max_lag && lag < x.size(); ++lag) {
    double acc = 0.0;
    for (std::size_t n = lag; n < x.size(); ++n) acc += x[n] * x[n - lag];
    r[lag] = acc / static_cast<double>(x.size());
  }
  return r;
}

double lpc_residual(std::span<const double> r, std::span<const double> coefficients) {
  const std::size_t p = coefficients.size();
  double e = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < p; ++j)
      row += r[i > j ? i - j : j - i] * coefficients[j];
    e += coefficients[i] * row;
  }
  return e;
}

NormalizedLpc normalize_lpc(std::span<const double> coefficients) {
  NormalizedLpc out;
  const std::size_t n = coefficients.size();
  out.normalized.assign(n, 0.0);
  if (n == 0) {
    out.degenerate = true;
    return out;
  }
  const double mean = std::accumulate(coefficients.begin(), coefficients.end(), 0.0) / n;
  double ss = 0.0;
  for (double c : coefficients) ss += (c - mean) * (c - mean);
  const double sigma = std::sqrt(ss / static_cast<double>(n));
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    out.degenerate = true;
    return out;
  }
  out.magnitude = sigma;
  for (std::size_t i = 0; i < n; ++i) out.normalized[i] = coefficients[i] / sigma;
  return out;
}

LpcResult lpc_steepest_descent(std::span<const double> frame, const LpcOptions& opts) {
  const std::size_t p = opts.order;
  if (p == 0) throw ConfigError("lpc order must be positive");
  if (frame.size() <= p)
    throw DataError("frame of " + std::to_string(frame.size()) +
                    " samples is too short for lpc order " + std::to_string(p));
  if (!(opts.step_scale > 0.0 && opts.step_scale < 2.0))
    throw ConfigError("lpc step scale must lie in (0, 2)");

  LpcResult res;
  res.coefficients.assign(p + 1, 0.0);
  res.coefficients[0] = 1.0;

  const auto r = autocorrelation(frame, p);
  const double energy = r[0];
  if (!(energy > 0.0)) {
    res.normalized.assign(p + 1, 0.0);
    res.degenerate = true;
    return res;
  }

  // E(c) = r0 + 2 c.r + c^T R c over the free taps c1..cp.
  std::span<double> c(res.coefficients.data() + 1, p);
  std::vector<double> grad(p), hg(p);
  double e = lpc_residual(r, res.coefficients);
  if (opts.record_trace) res.trace.push_back(e);

  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    // grad_i = 2 (r_i + sum_j R_ij c_j), indices 1-based in r
    double gg = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      double acc = r[i + 1];
      for (std::size_t j = 0; j < p; ++j) acc += r[i > j ? i - j : j - i] * c[j];
      grad[i] = 2.0 * acc;
      gg += grad[i] * grad[i];
    }
    if (gg == 0.0) break;
    double ghg = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < p; ++j) acc += r[i > j ? i - j : j - i] * grad[j];
      hg[i] = acc;
      ghg += grad[i] * acc;
    }
    if (!(ghg > 0.0)) break;

    const double step = opts.step_scale * gg / (2.0 * ghg);
    for (std::size_t i = 0; i < p; ++i) c[i] -= step * grad[i];

    const double next = lpc_residual(r, res.coefficients);
    res.iterations = it + 1;
    if (opts.record_trace) res.trace.push_back(next);
    const double delta = std::abs(e - next);
    e = next;
    if (delta < opts.tol * energy) break;
  }
  res.residual = e;

  auto norm = normalize_lpc(res.coefficients);
  res.normalized = std::move(norm.normalized);
  res.magnitude = norm.magnitude;
  res.degenerate = norm.degenerate;
  return res;
}

// ---------------------------------------------------------- outline/ceps

std::size_t first_envelope_peak(std::span<const double> envelope) {
  const std::size_t n = envelope.size();
  if (n >= 2 && envelope[0] > envelope[1]) return 0;
  for (std::size_t k = 1; k + 1 < n; ++k)
    if (envelope[k] > envelope[k - 1] && envelope[k] > envelope[k + 1]) return k;
  return 0;
}

OutlineFeatures outline_regression(std::span<const double> envelope, double bin_hz, int fs,
                                   double span_hz) {
  if (envelope.size() < 3) throw DataError("envelope needs at least 3 bins");
  if (!(bin_hz > 0.0) || fs <= 0) throw ConfigError("invalid frequency resolution");

  OutlineFeatures out;
  out.first_bin = first_envelope_peak(envelope);
  out.anchor_hz = static_cast<double>(out.first_bin) * bin_hz;
  const double hi_hz = std::min(out.anchor_hz + span_hz, fs / 2.0);
  const double eps = 1e-9 * bin_hz;

  std::size_t last = out.first_bin;
  while (last + 1 < envelope.size() &&
         static_cast<double>(last + 1) * bin_hz <= hi_hz + eps)
    ++last;
  out.last_bin = last;
  const std::size_t n = last - out.first_bin + 1;
  if (n < 2) throw DataError("degenerate regression band: fewer than 2 bins");

  // Least squares on centred frequencies.
  double mean_w = 0.0, mean_e = 0.0;
  for (std::size_t k = out.first_bin; k <= last; ++k) {
    mean_w += static_cast<double>(k) * bin_hz;
    mean_e += envelope[k];
  }
  mean_w /= static_cast<double>(n);
  mean_e /= static_cast<double>(n);
  double sww = 0.0, swe = 0.0;
  for (std::size_t k = out.first_bin; k <= last; ++k) {
    const double dw = static_cast<double>(k) * bin_hz - mean_w;
    sww += dw * dw;
    swe += dw * (envelope[k] - mean_e);
  }
  out.slope = swe / sww;
  out.intercept = mean_e - out.slope * mean_w;

  double ssr = 0.0;
  for (std::size_t k = out.first_bin; k <= last; ++k) {
    const double res =
        envelope[k] - out.slope * static_cast<double>(k) * bin_hz - out.intercept;
    ssr += res * res;
  }
  out.rms = std::sqrt(ssr / static_cast<double>(n));
  return out;
}

std::vector<double> cepstrum_peaks(const Cepstrum& ceps, std::size_t n_peaks,
                                   double min_quefrency) {
  std::vector<double> peaks;
  peaks.reserve(n_peaks);
  const auto& c = ceps.coefficients;
  const std::size_t half = c.size() / 2;
  const auto start = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(min_quefrency * ceps.fs - 1e-9)));
  for (std::size_t i = start; i + 1 <= half && peaks.size() < n_peaks; ++i)
    if (c[i] > c[i - 1] && c[i] > c[i + 1]) peaks.push_back(c[i]);
  peaks.resize(n_peaks, 0.0);
  return peaks;
}

// -------------------------------------------------------------- extractor

FeatureExtractor::FeatureExtractor(FeatureConfig cfg, int sample_rate)
    : cfg_(std::move(cfg)),
      fs_(sample_rate),
      fft_size_(cfg_.resolved_fft_size(sample_rate)),
      window_samples_(seconds_to_samples(cfg_.window_seconds, sample_rate)),
      hop_samples_(std::max<std::size_t>(1, seconds_to_samples(cfg_.hop_seconds, sample_rate))),
      taper_(window_taper(cfg_.window, window_samples_)),
      bank_(sample_rate, cfg_.n_filters, fft_size_) {
  cfg_.validate();
  if (cfg_.n_mfcc != 12 || cfg_.lpc_order != 12 || cfg_.n_cepstrum_peaks != 4)
    throw ConfigError("the 32-slot layout fixes 12 MFCC, LPC order 12 and 4 cepstrum peaks");
  if (window_samples_ <= cfg_.lpc_order)
    throw ConfigError("window too short for the lpc order");
}

FeatureVector FeatureExtractor::extract(std::span<const double> samples) const {
  if (samples.size() != window_samples_)
    throw DataError("frame has " + std::to_string(samples.size()) + " samples, expected " +
                    std::to_string(window_samples_));

  Frame frame;
  frame.sample_rate = fs_;
  frame.samples.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) frame.samples[i] = samples[i] * taper_[i];

  FeatureVector fv;
  auto& v = fv.values;

  const Spectrum spec = power_spectrum(frame, fft_size_);
  const auto mf = mfcc_from_spectrum(spec, bank_, cfg_.n_mfcc, cfg_.spectral_floor);
  std::copy(mf.begin(), mf.end(), v.begin() + layout::kMfccBegin);

  LpcOptions lo;
  lo.order = cfg_.lpc_order;
  lo.step_scale = cfg_.lpc_step_scale;
  lo.max_iters = cfg_.lpc_max_iters;
  lo.tol = cfg_.lpc_tol;
  const auto lpc = lpc_steepest_descent(frame.samples, lo);
  fv.degenerate_lpc = lpc.degenerate;
  if (!lpc.degenerate) {
    std::copy(lpc.normalized.begin(), lpc.normalized.end(), v.begin() + layout::kLpcBegin);
    v[layout::kLpcMagnitude] = lpc.magnitude;
  }

  const auto logspec = log_spectrum(spec, cfg_.spectral_floor);
  const auto env = spectral_envelope(logspec, std::min(cfg_.keep_coeffs, logspec.size()));
  const auto outline = outline_regression(env, spec.bin_hz, fs_, cfg_.outline_span_hz);
  v[layout::kSlope] = outline.slope;
  v[layout::kOutlineRms] = outline.rms;

  const auto ceps = real_cepstrum(frame, fft_size_, cfg_.spectral_floor);
  const auto peaks = cepstrum_peaks(ceps, cfg_.n_cepstrum_peaks, cfg_.min_quefrency);
  std::copy(peaks.begin(), peaks.end(), v.begin() + layout::kCepstrumBegin);

  for (auto& x : v)
    if (!std::isfinite(x)) x = 0.0;
  return fv;
}

FeatureVector extract_features(const Frame& frame, const FeatureConfig& cfg) {
  return FeatureExtractor(cfg, frame.sample_rate).extract(frame.samples);
}

// --------------------------------------------------------------- ablation

std::vector<std::size_t> feature_mask(const AblationConfig& cfg) {
  if (!cfg.mfcc && !cfg.lpc && !cfg.so_cp)
    throw ConfigError("feature mask enables no feature group");
  std::vector<std::size_t> idx;
  auto add = [&idx](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) idx.push_back(i);
  };
  if (cfg.mfcc) add(layout::kMfccBegin, layout::kLpcBegin);
  if (cfg.lpc) add(layout::kLpcBegin, layout::kSlope);
  if (cfg.so_cp) add(layout::kSlope, layout::kDim);
  return idx;
}

std::string mask_name(const AblationConfig& cfg) {
  std::string name;
  auto add = [&name](const char* part) {
    if (!name.empty()) name += '+';
    name += part;
  };
  if (cfg.mfcc) add("mfcc");
  if (cfg.lpc) add("lpc");
  if (cfg.so_cp) add("so_cp");
  return name.empty() ? "none" : name;
}

std::vector<AblationConfig> all_ablation_masks() {
  return {{true, true, true},  {true, true, false},  {true, false, true},
          {false, true, true}, {true, false, false}, {false, true, false},
          {false, false, true}};
}

}  // namespace timbre
