#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "timbre/dsp.hpp"

namespace timbre {

// Additive-synthesis recipe for one synthetic instrument.
struct SynthProfile {
  std::string name;
  std::vector<double> harmonic_amplitudes;  // partial k+1 gets entry k
  double rolloff_db_per_octave = 0.0;       // extra tilt on top of the partial weights
  double attack = 0.01;                     // seconds, linear ramp
  double decay = 0.0;                       // seconds, exponential time constant; 0 sustains
  double vibrato_rate = 0.0;                // Hz
  double vibrato_depth = 0.0;               // cents
  double noise_floor = 0.0;                 // white-noise level relative to the note peak

  void validate() const;
};

// Six stand-ins for guitar, alto sax, flute, piano, trumpet and violin notes.
std::vector<SynthProfile> default_profiles();

// Twelve pitches, whole tones upward from G3 (196 Hz).
std::vector<double> default_pitches();

struct SynthOptions {
  std::vector<double> pitches = default_pitches();
  std::size_t per_pitch = 3;
  int sample_rate = 16000;
  double note_seconds = 1.0;
  std::uint64_t seed = 2017;
};

// One note; `seed` drives the per-note variation (gain, detune, partial
// phases, vibrato phase, noise).
AudioClip synth_note(const SynthProfile& profile, double pitch_hz, int sample_rate,
                     double seconds, std::uint64_t seed);

// Writes <out>/<profile>/<profile>_pPP_nN.wav for every pitch and repetition.
// Returns the written paths. Byte-identical for identical arguments.
std::vector<std::filesystem::path> synth_corpus(const std::vector<SynthProfile>& profiles,
                                                const SynthOptions& opts,
                                                const std::filesystem::path& out);

}  // namespace timbre
