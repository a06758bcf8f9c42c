#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace timbre {

struct AudioClip {
  std::vector<double> samples;  // normalized to [-1, 1]
  int sample_rate = 0;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

struct Frame {
  std::vector<double> samples;
  int sample_rate = 0;
  std::size_t start_offset = 0;
};

// Power spectrum over bins 0..fft_size/2 inclusive.
struct Spectrum {
  std::vector<double> bins;
  double bin_hz = 0.0;
  int fs = 0;

  std::size_t fft_size() const { return bins.empty() ? 0 : 2 * (bins.size() - 1); }
};

// Real cepstrum; coefficient n sits at quefrency n / fs seconds.
struct Cepstrum {
  std::vector<double> coefficients;
  int fs = 0;
};

enum class WindowKind { rectangular, hamming };

inline constexpr double kDefaultSpectralFloor = 1e-10;

// Number of samples spanned by `seconds` at `sample_rate`, rounded to nearest.
std::size_t seconds_to_samples(double seconds, int sample_rate);

std::size_t next_pow2(std::size_t n);
bool is_pow2(std::size_t n);

// Frames at offsets 0, hop, 2*hop, ...; a trailing partial window is dropped.
// Throws DataError when the clip is shorter than one window.
std::vector<Frame> frame_signal(const AudioClip& clip, double window_seconds,
                                double hop_seconds);

std::vector<double> window_taper(WindowKind kind, std::size_t length);
Frame apply_window(const Frame& frame, WindowKind kind);

// In-place iterative radix-2 FFT. `data.size()` must be a power of two.
// The inverse transform is unscaled (caller divides by N).
void fft_inplace(std::span<std::complex<double>> data, bool inverse = false);

// |DFT|^2 of the zero-padded frame, unnormalized. With N = fft_size,
//   bins[0] + bins[N/2] + 2 * sum(bins[1..N/2-1]) == N * sum_n x_n^2.
// Throws ConfigError unless fft_size is a power of two >= frame length.
Spectrum power_spectrum(const Frame& frame, std::size_t fft_size);

// Natural log of max(bin, floor). `floor` is in linear power units.
std::vector<double> log_spectrum(const Spectrum& spec,
                                 double floor = kDefaultSpectralFloor);

// Orthonormal DCT-II and its inverse (orthonormal DCT-III).
std::vector<double> dct_ii(std::span<const double> values);
std::vector<double> dct_iii(std::span<const double> coefficients);

// Low-quefrency smoothing: DCT-II, zero coefficients >= keep_coeffs, invert.
std::vector<double> spectral_envelope(std::span<const double> log_spec,
                                      std::size_t keep_coeffs);

// Inverse transform of the log-magnitude spectrum of the zero-padded frame.
// Result has fft_size coefficients.
Cepstrum real_cepstrum(const Frame& frame, std::size_t fft_size,
                       double floor = kDefaultSpectralFloor);

}  // namespace timbre
