#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "homoglyph/net.hpp"

namespace homoglyph {

/// Trained embedder: weights plus the activation slope they were trained with.
struct Model {
  WeightSet weights;
  double leaky_slope = kDefaultLeakySlope;

  FeatureVector embed(const RenderedImage& img) const { return forward(weights, img, leaky_slope); }
};

// Model file layout (all integers and floats little-endian):
//   char[8]  magic "HGSIAMNN"
//   u32      format version (1)
//   u32 x 7  in_height, in_width, kernel, pool, conv1_filters, conv2_filters, feature_dim
//   u64      parameter count
//   f64      leaky ReLU slope
//   f64 x N  parameters in WeightSet order
inline constexpr char kModelMagic[8] = {'H', 'G', 'S', 'I', 'A', 'M', 'N', 'N'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const Model& model);
Model deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const std::filesystem::path& path, const Model& model);
/// Throws FormatError on bad magic, version, or architecture constants.
Model load_model(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

// Little-endian encoding helpers shared by the binary file formats.
namespace le {
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
void put_i32(std::vector<std::uint8_t>& out, std::int32_t v);
void put_f64(std::vector<std::uint8_t>& out, double v);
void put_bytes(std::vector<std::uint8_t>& out, const void* data, std::size_t n);

class Cursor {
 public:
  explicit Cursor(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32();
  double f64();
  std::string bytes(std::size_t n);
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const;
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};
}  // namespace le

}  // namespace homoglyph
