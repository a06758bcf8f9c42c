#include "timbre/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "timbre/error.hpp"
#include "timbre/io.hpp"

namespace timbre {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t rd16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}
std::uint32_t rd32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}
bool tag_is(std::span<const std::uint8_t> b, std::size_t off, const char* tag) {
  return std::memcmp(b.data() + off, tag, 4) == 0;
}

void put16(std::vector<std::uint8_t>& o, std::uint16_t v) {
  o.push_back(static_cast<std::uint8_t>(v));
  o.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(std::vector<std::uint8_t>& o, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) o.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_tag(std::vector<std::uint8_t>& o, const char* tag) { o.insert(o.end(), tag, tag + 4); }

std::vector<std::uint8_t> riff_image(std::uint16_t format, int sample_rate, int channels,
                                     int bits, std::span<const std::uint8_t> payload) {
  std::vector<std::uint8_t> o;
  const auto block = static_cast<std::uint16_t>(channels * bits / 8);
  const std::uint32_t data_size = static_cast<std::uint32_t>(payload.size());
  put_tag(o, "RIFF");
  put32(o, 36 + data_size + (data_size & 1));
  put_tag(o, "WAVE");
  put_tag(o, "fmt ");
  put32(o, 16);
  put16(o, format);
  put16(o, static_cast<std::uint16_t>(channels));
  put32(o, static_cast<std::uint32_t>(sample_rate));
  put32(o, static_cast<std::uint32_t>(sample_rate) * block);
  put16(o, block);
  put16(o, static_cast<std::uint16_t>(bits));
  put_tag(o, "data");
  put32(o, data_size);
  o.insert(o.end(), payload.begin(), payload.end());
  if (data_size & 1) o.push_back(0);
  return o;
}

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> b) {
  if (b.size() < 12) throw ParseError("wav: file is " + std::to_string(b.size()) +
                                      " bytes, shorter than the 12-byte RIFF header");
  if (!tag_is(b, 0, "RIFF")) throw ParseError("wav: missing RIFF tag at byte 0");
  if (!tag_is(b, 8, "WAVE")) throw ParseError("wav: missing WAVE tag at byte 8");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0, block = 0;
  std::uint32_t rate = 0;

  std::size_t off = 12;
  while (off + 8 <= b.size()) {
    const std::size_t body = off + 8;
    const std::uint32_t size = rd32(b, off + 4);
    const std::string id(reinterpret_cast<const char*>(b.data() + off), 4);

    if (id == "fmt ") {
      if (size < 16 || b.size() - body < size)
        throw ParseError("wav: truncated fmt chunk at byte " + std::to_string(off));
      format = rd16(b, body);
      channels = rd16(b, body + 2);
      rate = rd32(b, body + 4);
      block = rd16(b, body + 12);
      bits = rd16(b, body + 14);
      if (format == kFormatExtensible) {
        if (size < 40)
          throw ParseError("wav: extensible fmt chunk at byte " + std::to_string(off) +
                           " is shorter than 40 bytes");
        format = rd16(b, body + 24);  // first two bytes of the subformat GUID
      }
      if (format != kFormatPcm && format != kFormatFloat)
        throw ParseError("wav: unsupported codec " + std::to_string(format) +
                         " in fmt chunk at byte " + std::to_string(off));
      if ((format == kFormatPcm && bits != 16) || (format == kFormatFloat && bits != 32))
        throw ParseError("wav: unsupported " + std::to_string(bits) +
                         "-bit samples in fmt chunk at byte " + std::to_string(off));
      if (channels != 1 && channels != 2)
        throw ParseError("wav: " + std::to_string(channels) +
                         " channels in fmt chunk at byte " + std::to_string(off) +
                         "; only mono and stereo are supported");
      if (rate == 0)
        throw ParseError("wav: zero sample rate in fmt chunk at byte " + std::to_string(off));
      if (block != channels * bits / 8)
        throw ParseError("wav: inconsistent block align in fmt chunk at byte " +
                         std::to_string(off));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt)
        throw ParseError("wav: data chunk at byte " + std::to_string(off) +
                         " precedes the fmt chunk");
      if (b.size() - body < size)
        throw ParseError("wav: truncated data chunk at byte " + std::to_string(off) +
                         ": declares " + std::to_string(size) + " bytes, " +
                         std::to_string(b.size() - body) + " present");
      if (size % block != 0)
        throw ParseError("wav: data chunk at byte " + std::to_string(off) +
                         " is not a whole number of frames");

      AudioClip clip;
      clip.sample_rate = static_cast<int>(rate);
      const std::size_t frames = size / block;
      clip.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
          const std::size_t at = body + i * block + c * (bits / 8);
          if (format == kFormatPcm) {
            acc += static_cast<std::int16_t>(rd16(b, at)) / 32768.0;
          } else {
            const float f = std::bit_cast<float>(rd32(b, at));
            acc += std::isfinite(f) ? std::clamp(static_cast<double>(f), -1.0, 1.0) : 0.0;
          }
        }
        clip.samples[i] = channels == 2 ? acc / 2.0 : acc;
      }
      return clip;
    }
    off = body + size + (size & 1);
  }
  if (!have_fmt) throw ParseError("wav: no fmt chunk found");
  throw ParseError("wav: no data chunk found");
}

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("wav: cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav_pcm16(std::span<const std::int16_t> interleaved,
                                           int sample_rate, int channels) {
  std::vector<std::uint8_t> payload;
  payload.reserve(interleaved.size() * 2);
  for (auto s : interleaved) put16(payload, static_cast<std::uint16_t>(s));
  return riff_image(kFormatPcm, sample_rate, channels, 16, payload);
}

std::vector<std::uint8_t> encode_wav_float32(std::span<const float> interleaved,
                                             int sample_rate, int channels) {
  std::vector<std::uint8_t> payload;
  payload.reserve(interleaved.size() * 4);
  for (auto s : interleaved) put32(payload, std::bit_cast<std::uint32_t>(s));
  return riff_image(kFormatFloat, sample_rate, channels, 32, payload);
}

std::int16_t to_pcm16(double sample) {
  const double v = std::round(std::clamp(sample, -1.0, 1.0) * 32768.0);
  return static_cast<std::int16_t>(std::clamp(v, -32768.0, 32767.0));
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  std::vector<std::int16_t> pcm(clip.samples.size());
  std::transform(clip.samples.begin(), clip.samples.end(), pcm.begin(), to_pcm16);
  write_file_atomic(path, encode_wav_pcm16(pcm, clip.sample_rate, 1));
}

}  // namespace timbre
