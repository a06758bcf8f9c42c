#include "timbre/feature_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "timbre/error.hpp"

namespace timbre {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(std::string_view key, std::string_view v, std::size_t line) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ParseError("line " + std::to_string(line) + ": '" + std::string(key) +
                     "' expects a number, got '" + std::string(v) + "'");
  return out;
}

std::size_t parse_count(std::string_view key, std::string_view v, std::size_t line) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ParseError("line " + std::to_string(line) + ": '" + std::string(key) +
                     "' expects a non-negative integer, got '" + std::string(v) + "'");
  return out;
}

}  // namespace

std::string_view to_string(WindowKind kind) {
  return kind == WindowKind::hamming ? "hamming" : "rectangular";
}

std::size_t FeatureConfig::resolved_fft_size(int sample_rate) const {
  return fft_size != 0 ? fft_size : next_pow2(seconds_to_samples(window_seconds, sample_rate));
}

void FeatureConfig::validate() const {
  if (!(window_seconds > 0.0)) throw ConfigError("window_seconds must be positive");
  if (!(hop_seconds > 0.0) || hop_seconds > window_seconds)
    throw ConfigError("hop_seconds must satisfy 0 < hop <= window");
  if (fft_size != 0 && !is_pow2(fft_size)) throw ConfigError("fft_size must be a power of two");
  if (!(spectral_floor > 0.0)) throw ConfigError("spectral_floor must be positive");
  if (n_filters < 13) throw ConfigError("n_filters must be at least 13");
  if (n_mfcc == 0 || n_mfcc >= n_filters) throw ConfigError("n_mfcc must lie in [1, n_filters)");
  if (lpc_order == 0) throw ConfigError("lpc_order must be positive");
  if (!(lpc_step_scale > 0.0 && lpc_step_scale < 2.0))
    throw ConfigError("lpc_step_scale must lie in (0, 2)");
  if (lpc_max_iters == 0) throw ConfigError("lpc_max_iters must be positive");
  if (!(lpc_tol >= 0.0)) throw ConfigError("lpc_tol must be non-negative");
  if (keep_coeffs == 0) throw ConfigError("keep_coeffs must be positive");
  if (!(outline_span_hz > 0.0)) throw ConfigError("outline_span_hz must be positive");
  if (n_cepstrum_peaks == 0) throw ConfigError("n_cepstrum_peaks must be positive");
  if (!(min_quefrency >= 0.0)) throw ConfigError("min_quefrency must be non-negative");
}

FeatureConfig parse_feature_config(std::string_view text) {
  FeatureConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto val = trim(line.substr(eq + 1));

    if (key == "window_seconds") cfg.window_seconds = parse_double(key, val, line_no);
    else if (key == "hop_seconds") cfg.hop_seconds = parse_double(key, val, line_no);
    else if (key == "fft_size") cfg.fft_size = val == "auto" ? 0 : parse_count(key, val, line_no);
    else if (key == "window") {
      if (val == "hamming") cfg.window = WindowKind::hamming;
      else if (val == "rectangular") cfg.window = WindowKind::rectangular;
      else throw ParseError("line " + std::to_string(line_no) + ": unknown window '" +
                            std::string(val) + "'");
    }
    else if (key == "spectral_floor") cfg.spectral_floor = parse_double(key, val, line_no);
    else if (key == "n_filters") cfg.n_filters = parse_count(key, val, line_no);
    else if (key == "n_mfcc") cfg.n_mfcc = parse_count(key, val, line_no);
    else if (key == "lpc_order") cfg.lpc_order = parse_count(key, val, line_no);
    else if (key == "lpc_step_scale") cfg.lpc_step_scale = parse_double(key, val, line_no);
    else if (key == "lpc_max_iters") cfg.lpc_max_iters = parse_count(key, val, line_no);
    else if (key == "lpc_tol") cfg.lpc_tol = parse_double(key, val, line_no);
    else if (key == "keep_coeffs") cfg.keep_coeffs = parse_count(key, val, line_no);
    else if (key == "outline_span_hz") cfg.outline_span_hz = parse_double(key, val, line_no);
    else if (key == "n_cepstrum_peaks") cfg.n_cepstrum_peaks = parse_count(key, val, line_no);
    else if (key == "min_quefrency") cfg.min_quefrency = parse_double(key, val, line_no);
    else
      throw ParseError("line " + std::to_string(line_no) + ": unknown key '" +
                       std::string(key) + "'");
  }
  cfg.validate();
  return cfg;
}

FeatureConfig load_feature_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_feature_config(ss.str());
}

std::string to_config_text(const FeatureConfig& cfg) {
  std::string s;
  auto put = [&s](std::string_view k, const std::string& v) {
    s.append(k).append(" = ").append(v).append("\n");
  };
  put("window_seconds", fmt_double(cfg.window_seconds));
  put("hop_seconds", fmt_double(cfg.hop_seconds));
  put("fft_size", cfg.fft_size == 0 ? "auto" : std::to_string(cfg.fft_size));
  put("window", std::string(to_string(cfg.window)));
  put("spectral_floor", fmt_double(cfg.spectral_floor));
  put("n_filters", std::to_string(cfg.n_filters));
  put("n_mfcc", std::to_string(cfg.n_mfcc));
  put("lpc_order", std::to_string(cfg.lpc_order));
  put("lpc_step_scale", fmt_double(cfg.lpc_step_scale));
  put("lpc_max_iters", std::to_string(cfg.lpc_max_iters));
  put("lpc_tol", fmt_double(cfg.lpc_tol));
  put("keep_coeffs", std::to_string(cfg.keep_coeffs));
  put("outline_span_hz", fmt_double(cfg.outline_span_hz));
  put("n_cepstrum_peaks", std::to_string(cfg.n_cepstrum_peaks));
  put("min_quefrency", fmt_double(cfg.min_quefrency));
  return s;
}

std::uint64_t config_hash(const FeatureConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_config_text(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace timbre
