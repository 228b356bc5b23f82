#pragma once

#include <string>
#include <vector>

namespace homoglyph {

inline constexpr int kLabelSpoof = 0;
inline constexpr int kLabelBenign = 1;

/// A labelled string pair; strings are UTF-8. label 0 = spoof/similar,
/// 1 = dissimilar.
struct PairExample {
  std::string s1;
  std::string s2;
  int label = kLabelBenign;

  bool operator==(const PairExample&) const = default;
};

using PairList = std::vector<PairExample>;

}  // namespace homoglyph
