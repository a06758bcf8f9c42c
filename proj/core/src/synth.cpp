#include "timbre/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>

#include "timbre/error.hpp"
#include "timbre/wav.hpp"

namespace timbre {

namespace {

// Portable draws from mt19937_64; the std distributions are implementation
// defined and would break byte-identical corpora across toolchains.
class NoteRng {
 public:
  explicit NoteRng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> sawtooth_weights(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = 1.0 / static_cast<double>(k + 1);
  return w;
}

}  // namespace

void SynthProfile::validate() const {
  if (name.empty()) throw ConfigError("synth profile needs a name");
  if (harmonic_amplitudes.empty() ||
      std::none_of(harmonic_amplitudes.begin(), harmonic_amplitudes.end(),
                   [](double a) { return a > 0.0; }))
    throw ConfigError("profile '" + name + "' needs at least one positive partial");
  if (std::any_of(harmonic_amplitudes.begin(), harmonic_amplitudes.end(),
                  [](double a) { return !(a >= 0.0); }))
    throw ConfigError("profile '" + name + "' has a negative partial weight");
  if (!(attack >= 0.0) || !(decay >= 0.0))
    throw ConfigError("profile '" + name + "' has a negative envelope time");
  if (!(vibrato_rate >= 0.0) || !(vibrato_depth >= 0.0) || !(noise_floor >= 0.0))
    throw ConfigError("profile '" + name + "' has a negative modulation or noise level");
}

std::vector<SynthProfile> default_profiles() {
  std::vector<SynthProfile> p;

  // plucked string: comb from a pluck at 1/5 of the length, fast decay
  SynthProfile guitar{"guitar", {}, 4.0, 0.003, 0.35, 0.0, 0.0, 0.003};
  for (int k = 1; k <= 16; ++k)
    guitar.harmonic_amplitudes.push_back(std::abs(std::sin(std::numbers::pi * k / 5.0)) /
                                         (k * 0.6 + 0.4));
  p.push_back(guitar);

  p.push_back({"sax",
               {1.0, 0.85, 0.75, 0.7, 0.55, 0.5, 0.42, 0.35, 0.28, 0.22, 0.17, 0.13, 0.1, 0.08},
               3.0, 0.04, 0.0, 5.2, 14.0, 0.012});

  p.push_back({"flute", {1.0, 0.22, 0.1, 0.045, 0.02}, 10.0, 0.07, 0.0, 4.8, 10.0, 0.03});

  p.push_back({"piano", {1.0, 0.55, 0.3, 0.22, 0.12, 0.09, 0.05, 0.035, 0.02}, 5.0, 0.004, 0.6,
               0.0, 0.0, 0.002});

  p.push_back({"trumpet",
               {0.45, 0.75, 1.0, 0.95, 0.85, 0.72, 0.6, 0.5, 0.42, 0.34, 0.28, 0.22, 0.18, 0.14},
               2.0, 0.025, 0.0, 0.0, 0.0, 0.004});

  p.push_back({"violin", sawtooth_weights(24), 1.5, 0.06, 0.0, 6.0, 22.0, 0.008});
  return p;
}

std::vector<double> default_pitches() {
  std::vector<double> p;
  for (int i = 0; i < 12; ++i) p.push_back(196.0 * std::pow(2.0, 2.0 * i / 12.0));
  return p;
}

AudioClip synth_note(const SynthProfile& profile, double pitch_hz, int sample_rate,
                     double seconds, std::uint64_t seed) {
  profile.validate();
  if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
  if (!(pitch_hz > 0.0) || pitch_hz >= sample_rate / 2.0)
    throw ConfigError("pitch " + std::to_string(pitch_hz) + " Hz is outside (0, fs/2 = " +
                      std::to_string(sample_rate / 2.0) + ")");

  NoteRng rng(seed);
  const double gain = rng.uniform(0.45, 0.9);
  const double detune = std::pow(2.0, rng.uniform(-8.0, 8.0) / 1200.0);
  const double vib_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double f0 = pitch_hz * detune;
  const double nyquist = sample_rate / 2.0;

  struct Partial {
    double mult, amp, phase;
  };
  std::vector<Partial> partials;
  for (std::size_t k = 0; k < profile.harmonic_amplitudes.size(); ++k) {
    const double mult = static_cast<double>(k + 1);
    const double tilt =
        std::pow(10.0, -profile.rolloff_db_per_octave * std::log2(mult) / 20.0);
    const double jitter = std::pow(10.0, rng.uniform(-1.5, 1.5) / 20.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    // leave headroom for vibrato excursions
    if (f0 * mult * std::pow(2.0, profile.vibrato_depth / 1200.0) >= 0.98 * nyquist) continue;
    partials.push_back({mult, profile.harmonic_amplitudes[k] * tilt * jitter, phase});
  }
  if (partials.empty()) throw ConfigError("no partial of " + profile.name + " fits below fs/2");

  const std::size_t n = seconds_to_samples(seconds, sample_rate);
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.assign(n, 0.0);

  const double dt = 1.0 / sample_rate;
  double base_phase = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double cents =
        profile.vibrato_depth * std::sin(2.0 * std::numbers::pi * profile.vibrato_rate * t + vib_phase);
    base_phase += 2.0 * std::numbers::pi * f0 * std::pow(2.0, cents / 1200.0) * dt;

    double env = profile.attack > 0.0 ? std::min(1.0, t / profile.attack) : 1.0;
    if (profile.decay > 0.0 && t > profile.attack) env *= std::exp(-(t - profile.attack) / profile.decay);

    double s = 0.0;
    for (const auto& p : partials) s += p.amp * std::sin(p.mult * base_phase + p.phase);
    clip.samples[i] = env * s;
    peak = std::max(peak, std::abs(clip.samples[i]));
  }
  for (auto& x : clip.samples) x = x / peak + profile.noise_floor * rng.gaussian();
  double peak2 = 0.0;
  for (double x : clip.samples) peak2 = std::max(peak2, std::abs(x));
  for (auto& x : clip.samples) x *= gain / peak2;
  return clip;
}

std::vector<std::filesystem::path> synth_corpus(const std::vector<SynthProfile>& profiles,
                                                const SynthOptions& opts,
                                                const std::filesystem::path& out) {
  if (profiles.empty()) throw ConfigError("no synth profiles given");
  if (opts.pitches.empty()) throw ConfigError("no pitches given");
  if (opts.per_pitch == 0) throw ConfigError("per_pitch must be positive");
  std::set<std::string> names;
  for (const auto& p : profiles) {
    p.validate();
    if (!names.insert(p.name).second) throw ConfigError("duplicate profile '" + p.name + "'");
  }
  for (double f : opts.pitches)
    if (!(f > 0.0) || f >= opts.sample_rate / 2.0)
      throw ConfigError("pitch " + std::to_string(f) + " Hz is above the Nyquist frequency " +
                        std::to_string(opts.sample_rate / 2.0) + " Hz");

  std::vector<std::filesystem::path> written;
  for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
    const auto& prof = profiles[pi];
    const auto dir = out / prof.name;
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < opts.pitches.size(); ++k) {
      for (std::size_t r = 0; r < opts.per_pitch; ++r) {
        const std::uint64_t note_seed = mix(mix(mix(opts.seed, pi), k), r);
        const auto clip =
            synth_note(prof, opts.pitches[k], opts.sample_rate, opts.note_seconds, note_seed);
        char name[64];
        std::snprintf(name, sizeof name, "%s_p%02zu_n%zu.wav", prof.name.c_str(), k, r);
        const auto path = dir / name;
        write_wav(path, clip);
        written.push_back(path);
      }
    }
  }
  return written;
}

}  // namespace timbre
