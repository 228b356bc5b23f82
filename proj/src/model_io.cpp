#include "homoglyph/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "homoglyph/errors.hpp"

namespace homoglyph {

namespace le {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_bytes(std::vector<std::uint8_t>& out, const void* data, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  out.insert(out.end(), p, p + n);
}

void Cursor::need(std::size_t n) const {
  if (pos_ + n > bytes_.size()) throw FormatError("unexpected end of file");
}

std::uint32_t Cursor::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t Cursor::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

std::int32_t Cursor::i32() { return static_cast<std::int32_t>(u32()); }

double Cursor::f64() { return std::bit_cast<double>(u64()); }

std::string Cursor::bytes(std::size_t n) {
  need(n);
  std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
  pos_ += n;
  return s;
}

}  // namespace le

namespace {

using A = Architecture;

constexpr std::uint32_t kArchConstants[] = {A::in_height,     A::in_width,      A::kernel,
                                            A::pool,          A::conv1_filters, A::conv2_filters,
                                            A::feature_dim};
constexpr const char* kArchNames[] = {"in_height",     "in_width",      "kernel",     "pool",
                                      "conv1_filters", "conv2_filters", "feature_dim"};

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& model) {
  std::vector<std::uint8_t> out;
  out.reserve(64 + 8 * A::param_count);
  le::put_bytes(out, kModelMagic, sizeof(kModelMagic));
  le::put_u32(out, kModelFormatVersion);
  for (std::uint32_t c : kArchConstants) le::put_u32(out, c);
  le::put_u64(out, A::param_count);
  le::put_f64(out, model.leaky_slope);
  for (double v : model.weights.values()) le::put_f64(out, v);
  return out;
}

Model deserialize_model(const std::vector<std::uint8_t>& bytes) {
  le::Cursor in(bytes);
  if (in.bytes(sizeof(kModelMagic)) != std::string(kModelMagic, sizeof(kModelMagic))) {
    throw FormatError("not a model file (bad magic)");
  }
  const std::uint32_t version = in.u32();
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  for (std::size_t i = 0; i < std::size(kArchConstants); ++i) {
    const std::uint32_t v = in.u32();
    if (v != kArchConstants[i]) {
      throw FormatError(std::string("model architecture mismatch: ") + kArchNames[i] + " is " +
                        std::to_string(v) + ", expected " + std::to_string(kArchConstants[i]));
    }
  }
  const std::uint64_t count = in.u64();
  if (count != A::param_count) {
    throw FormatError("model parameter count " + std::to_string(count) + " does not match " +
                      std::to_string(A::param_count));
  }
  Model model;
  model.leaky_slope = in.f64();
  for (double& v : model.weights.values()) v = in.f64();
  if (!in.at_end()) throw FormatError("trailing bytes after model parameters");
  if (!model.weights.all_finite()) throw FormatError("model contains non-finite parameters");
  return model;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

void save_model(const std::filesystem::path& path, const Model& model) {
  write_file_bytes(path, serialize_model(model));
}

Model load_model(const std::filesystem::path& path) { return deserialize_model(read_file_bytes(path)); }

}  // namespace homoglyph
