#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "timbre/dsp.hpp"

namespace timbre {

// Every knob that changes what extract_features() produces. Two extractors
// with equal config_hash() produce identical feature layouts and values.
struct FeatureConfig {
  double window_seconds = 0.1;
  double hop_seconds = 0.1;
  std::size_t fft_size = 0;  // 0: smallest power of two >= window length
  WindowKind window = WindowKind::hamming;
  double spectral_floor = kDefaultSpectralFloor;

  std::size_t n_filters = 26;
  std::size_t n_mfcc = 12;

  std::size_t lpc_order = 12;
  double lpc_step_scale = 1.0;     // multiplier on the exact line-search step
  std::size_t lpc_max_iters = 5000;
  double lpc_tol = 1e-14;          // relative change in residual energy

  std::size_t keep_coeffs = 30;
  double outline_span_hz = 10000.0;

  std::size_t n_cepstrum_peaks = 4;
  double min_quefrency = 0.001;  // seconds

  std::size_t resolved_fft_size(int sample_rate) const;
  void validate() const;
};

// Key-value text, one `key = value` per line; `#` starts a comment.
// Unknown keys and malformed values throw ParseError.
FeatureConfig parse_feature_config(std::string_view text);
FeatureConfig load_feature_config(const std::filesystem::path& path);

// Canonical text: every key in fixed order, doubles printed round-trip exact.
std::string to_config_text(const FeatureConfig& cfg);

// 64-bit FNV-1a over to_config_text().
std::uint64_t config_hash(const FeatureConfig& cfg);

std::string_view to_string(WindowKind kind);

}  // namespace timbre
