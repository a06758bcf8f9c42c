#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "timbre/dsp.hpp"

namespace timbre {

// RIFF/WAVE decoding: PCM 16-bit or IEEE float 32-bit (plain or
// WAVE_FORMAT_EXTENSIBLE), mono or stereo. Stereo is averaged to mono,
// 16-bit samples are scaled by 1/32768 and float samples clamped to [-1, 1].
AudioClip decode_wav(std::span<const std::uint8_t> bytes);
AudioClip load_wav(const std::filesystem::path& path);

// 16-bit PCM RIFF image of interleaved samples.
std::vector<std::uint8_t> encode_wav_pcm16(std::span<const std::int16_t> interleaved,
                                           int sample_rate, int channels = 1);
std::vector<std::uint8_t> encode_wav_float32(std::span<const float> interleaved,
                                             int sample_rate, int channels = 1);

std::int16_t to_pcm16(double sample);

// Mono 16-bit file, written to a temporary name and renamed into place.
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

}  // namespace timbre
