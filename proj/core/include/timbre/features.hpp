#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "timbre/dsp.hpp"
#include "timbre/feature_config.hpp"

namespace timbre {

// Frozen 32-slot layout of a timbre feature vector.
namespace layout {
inline constexpr std::size_t kMfccBegin = 0;       // 12 MFCC
inline constexpr std::size_t kLpcBegin = 12;       // 13 normalized LPC c'0..c'12
inline constexpr std::size_t kLpcMagnitude = 25;   // sigma_c
inline constexpr std::size_t kSlope = 26;          // outline regression slope
inline constexpr std::size_t kOutlineRms = 27;     // outline regression residual
inline constexpr std::size_t kCepstrumBegin = 28;  // 4 cepstrum peak values
inline constexpr std::size_t kDim = 32;
}  // namespace layout

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters, equally spaced on the mel scale over [0, fs/2].
// Weights are evaluated at exact bin frequencies, so neighbouring filters
// form a partition of unity between the first and last centre.
class MelFilterbank {
 public:
  MelFilterbank(int fs, std::size_t n_filters, std::size_t fft_size);

  std::size_t size() const { return centers_hz_.size(); }
  int fs() const { return fs_; }
  std::size_t fft_size() const { return fft_size_; }
  const std::vector<double>& centers_hz() const { return centers_hz_; }
  // Row-major weights, one row of fft_size/2 + 1 bins per filter.
  std::span<const double> weights(std::size_t filter) const;

  std::vector<double> energies(const Spectrum& spec) const;

 private:
  int fs_;
  std::size_t fft_size_;
  std::size_t n_bins_;
  std::vector<double> centers_hz_;
  std::vector<double> weights_;
};

MelFilterbank build_mel_filterbank(int fs, std::size_t n_filters, std::size_t fft_size);

// MFCC 1..n_coeffs (coefficient 0 dropped) from an already-windowed frame.
std::vector<double> mfcc(const Frame& frame, const MelFilterbank& bank,
                         std::size_t n_coeffs = 12,
                         double floor = kDefaultSpectralFloor);
std::vector<double> mfcc_from_spectrum(const Spectrum& spec, const MelFilterbank& bank,
                                       std::size_t n_coeffs = 12,
                                       double floor = kDefaultSpectralFloor);

struct LpcOptions {
  std::size_t order = 12;
  double step_scale = 1.0;
  std::size_t max_iters = 5000;
  double tol = 1e-14;
  bool record_trace = false;
};

struct LpcResult {
  std::vector<double> coefficients;  // c0 = 1, then c1..c_order
  std::vector<double> normalized;    // c_i / sigma_c
  double magnitude = 0.0;            // sigma_c
  double residual = 0.0;             // final mean squared prediction error
  std::size_t iterations = 0;
  bool degenerate = false;
  std::vector<double> trace;         // residual per iteration, when requested
};

// Autocorrelation r[0..max_lag] of x, divided by x.size().
std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag);

// Mean squared prediction residual of the filter [1, c1..cp] over the
// zero-extended frame, i.e. c^T R c with R the Toeplitz autocorrelation.
double lpc_residual(std::span<const double> r, std::span<const double> coefficients);

// Steepest descent on c1..cp from zero with c0 pinned to 1. The residual is a
// quadratic in c, so each step uses the exact line-search length along the
// negative gradient (scaled by step_scale in (0, 2)).
LpcResult lpc_steepest_descent(std::span<const double> frame, const LpcOptions& opts = {});

struct NormalizedLpc {
  std::vector<double> normalized;
  double magnitude = 0.0;
  bool degenerate = false;
};

// sigma_c = population standard deviation of the coefficients; each
// coefficient is divided by it. Zero spread is reported as degenerate.
NormalizedLpc normalize_lpc(std::span<const double> coefficients);

struct OutlineFeatures {
  double slope = 0.0;      // log-power per Hz
  double intercept = 0.0;
  double rms = 0.0;        // root-mean-square regression residual
  double anchor_hz = 0.0;  // first envelope peak
  std::size_t first_bin = 0;
  std::size_t last_bin = 0;  // inclusive
};

// Index of the first strict local maximum (bin 0 counts if above bin 1);
// 0 when the envelope has none.
std::size_t first_envelope_peak(std::span<const double> envelope);

OutlineFeatures outline_regression(std::span<const double> envelope, double bin_hz, int fs,
                                   double span_hz = 10000.0);

// Values of the first n_peaks strict local maxima at quefrency >= min_quefrency,
// scanning upward through the first half of the cepstrum. Zero padded.
std::vector<double> cepstrum_peaks(const Cepstrum& ceps, std::size_t n_peaks = 4,
                                   double min_quefrency = 0.001);

struct FeatureVector {
  std::array<double, layout::kDim> values{};
  bool degenerate_lpc = false;
};

// Stateful only in the cached filterbank; safe to share once constructed.
class FeatureExtractor {
 public:
  FeatureExtractor(FeatureConfig cfg, int sample_rate);

  const FeatureConfig& config() const { return cfg_; }
  int sample_rate() const { return fs_; }
  std::size_t fft_size() const { return fft_size_; }
  std::size_t window_samples() const { return window_samples_; }
  std::size_t hop_samples() const { return hop_samples_; }

  // Raw (unwindowed) frame in; 32 finite values out.
  FeatureVector extract(std::span<const double> samples) const;
  FeatureVector extract(const Frame& frame) const { return extract(frame.samples); }

 private:
  FeatureConfig cfg_;
  int fs_;
  std::size_t fft_size_;
  std::size_t window_samples_;
  std::size_t hop_samples_;
  std::vector<double> taper_;
  MelFilterbank bank_;
};

FeatureVector extract_features(const Frame& frame, const FeatureConfig& cfg);

struct AblationConfig {
  bool mfcc = true;
  bool lpc = true;
  bool so_cp = true;
};

// Sorted indices of the enabled groups. Throws ConfigError when none is.
std::vector<std::size_t> feature_mask(const AblationConfig& cfg);
std::string mask_name(const AblationConfig& cfg);
// The seven non-empty combinations, all-features first.
std::vector<AblationConfig> all_ablation_masks();

}  // namespace timbre
