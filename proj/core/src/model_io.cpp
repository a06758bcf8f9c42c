// Model file layout, version 1. All integers and floats little-endian.
//
//   offset  field
//   0       magic "TMBR"
//   4       u8   format version
//   5       u32  k (number of classes)
//   9       u32  dim (feature dimension)
//   13      u64  feature config hash
//   21      u32 + bytes  canonical feature config text
//           k x (u32 + bytes)  class names, in class-index order
//           dim x f64  scaler mean
//           dim x f64  scaler std
//           k x f64    class weights
//           u32        number of pairwise SVMs, must equal k(k-1)/2
//           per SVM: u32 pos, u32 neg, dim x f64 weights, f64 bias
//
// The file must end exactly after the last SVM.

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "timbre/error.hpp"
#include "timbre/io.hpp"
#include "timbre/svm.hpp"

namespace timbre {

namespace {

constexpr char kMagic[4] = {'T', 'M', 'B', 'R'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == in_.size(); }

  void need(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n)
      throw ParseError("model file truncated at byte " + std::to_string(pos_) +
                       " while reading " + what);
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return in_[pos_++];
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::string str(const char* what) {
    const auto n = u32(what);
    need(n, what);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::vector<double> f64s(std::size_t n, const char* what) {
    need(n * 8, what);
    std::vector<double> v(n);
    for (auto& x : v) x = f64(what);
    return v;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> save_model(const MulticlassModel& model) {
  const std::size_t k = model.classes.size();
  const std::size_t d = model.dim();
  if (model.scaler.std.size() != d || model.class_weights.size() != k ||
      model.svms.size() != pair_count(k))
    throw DataError("model is internally inconsistent");

  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u8(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(k));
  w.u32(static_cast<std::uint32_t>(d));
  w.u64(model.config_hash);
  w.str(model.feature_config);
  for (const auto& c : model.classes) w.str(c);
  for (double v : model.scaler.mean) w.f64(v);
  for (double v : model.scaler.std) w.f64(v);
  for (double v : model.class_weights) w.f64(v);
  w.u32(static_cast<std::uint32_t>(model.svms.size()));
  for (const auto& s : model.svms) {
    if (s.weights.size() != d) throw DataError("svm weight dimension mismatch");
    w.u32(static_cast<std::uint32_t>(s.class_pos));
    w.u32(static_cast<std::uint32_t>(s.class_neg));
    for (double v : s.weights) w.f64(v);
    w.f64(s.bias);
  }
  return w.take();
}

MulticlassModel load_model(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.need(sizeof kMagic, "magic");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw ParseError("not a timbre model file (bad magic at byte 0)");
  for (std::size_t i = 0; i < sizeof kMagic; ++i) r.u8("magic");
  const auto version = r.u8("version");
  if (version != kModelFormatVersion)
    throw ParseError("unsupported version " + std::to_string(version) +
                     " (this build reads version " + std::to_string(kModelFormatVersion) + ")");

  MulticlassModel m;
  const std::size_t k = r.u32("class count");
  const std::size_t d = r.u32("dimension");
  if (k < 2) throw ParseError("model declares fewer than 2 classes");
  m.config_hash = r.u64("config hash");
  m.feature_config = r.str("feature config");
  for (std::size_t i = 0; i < k; ++i) m.classes.push_back(r.str("class name"));
  m.scaler.mean = r.f64s(d, "scaler mean");
  m.scaler.std = r.f64s(d, "scaler std");
  m.class_weights = r.f64s(k, "class weights");
  const std::size_t n_svms = r.u32("svm count");
  if (n_svms != pair_count(k))
    throw ParseError("model has " + std::to_string(n_svms) + " svms, expected " +
                     std::to_string(pair_count(k)));
  m.svms.resize(n_svms);
  for (auto& s : m.svms) {
    s.class_pos = r.u32("svm class");
    s.class_neg = r.u32("svm class");
    if (s.class_pos >= k || s.class_neg >= k || s.class_pos == s.class_neg)
      throw ParseError("svm class index out of range near byte " + std::to_string(r.offset()));
    s.weights = r.f64s(d, "svm weights");
    s.bias = r.f64("svm bias");
  }
  if (!r.at_end())
    throw ParseError("trailing bytes after model body at byte " + std::to_string(r.offset()));
  return m;
}

void save_model_file(const MulticlassModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, save_model(model));
}

MulticlassModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return load_model(bytes);
}

}  // namespace timbre
