#pragma once

// MNIST-style IDX files: big-endian magic, u32 dimension sizes, then unsigned bytes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "igprune/data.hpp"
#include "igprune/error.hpp"

namespace igprune {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// IDX parse failure with a machine-checkable reason.
class IdxError : public FormatError {
 public:
  enum class Reason { unreadable, wrong_magic, truncated, count_mismatch };

  IdxError(Reason reason, const std::string& what) : FormatError("idx: " + what), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IdxError(IdxError::Reason::unreadable, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t at, const std::string& what) {
  if (at + 4 > b.size()) throw IdxError(IdxError::Reason::truncated, what + " truncated in header");
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

inline std::string hex32(std::uint32_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s = "0x";
  for (int shift = 28; shift >= 0; shift -= 4) s += kDigits[(v >> shift) & 0xF];
  return s;
}

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

}  // namespace detail

/// Parses in-memory IDX images + labels. Pixels are scaled to [0, 1] by /255.
inline Dataset decode_idx(const std::vector<std::uint8_t>& images, const std::vector<std::uint8_t>& labels) {
  if (const auto m = detail::be32(images, 0, "images"); m != kIdxImagesMagic) {
    throw IdxError(IdxError::Reason::wrong_magic, "images file has wrong magic " + detail::hex32(m));
  }
  if (const auto m = detail::be32(labels, 0, "labels"); m != kIdxLabelsMagic) {
    throw IdxError(IdxError::Reason::wrong_magic, "labels file has wrong magic " + detail::hex32(m));
  }
  const std::size_t n = detail::be32(images, 4, "images");
  const std::size_t rows = detail::be32(images, 8, "images");
  const std::size_t cols = detail::be32(images, 12, "images");
  const std::size_t n_labels = detail::be32(labels, 4, "labels");
  if (n != n_labels) {
    throw IdxError(IdxError::Reason::count_mismatch,
                   std::to_string(n) + " images but " + std::to_string(n_labels) + " labels");
  }
  if (images.size() != 16 + n * rows * cols) throw IdxError(IdxError::Reason::truncated, "images payload size mismatch");
  if (labels.size() != 8 + n) throw IdxError(IdxError::Reason::truncated, "labels payload size mismatch");

  Dataset ds{Tensor({n, rows, cols, 1}), {}, 0, Split::train};
  std::transform(images.begin() + 16, images.end(), ds.inputs.data(),
                 [](std::uint8_t v) { return static_cast<double>(v) / 255.0; });
  ds.labels.assign(labels.begin() + 8, labels.end());
  ds.n_classes = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  return ds;
}

inline Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  return decode_idx(detail::read_file(images_path), detail::read_file(labels_path));
}

/// Inverse of decode_idx; pixels are rounded back to bytes.
inline std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> encode_idx(const Dataset& ds) {
  if (ds.inputs.rank() != 4 || ds.inputs.dim(3) != 1) throw DimensionError("idx: need N x H x W x 1 images");
  std::vector<std::uint8_t> img, lab;
  detail::put_be32(img, kIdxImagesMagic);
  detail::put_be32(img, static_cast<std::uint32_t>(ds.size()));
  detail::put_be32(img, static_cast<std::uint32_t>(ds.inputs.dim(1)));
  detail::put_be32(img, static_cast<std::uint32_t>(ds.inputs.dim(2)));
  for (double v : ds.inputs.values()) {
    img.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L)));
  }
  detail::put_be32(lab, kIdxLabelsMagic);
  detail::put_be32(lab, static_cast<std::uint32_t>(ds.size()));
  for (std::size_t y : ds.labels) {
    if (y > 255) throw DimensionError("idx: label does not fit in a byte");
    lab.push_back(static_cast<std::uint8_t>(y));
  }
  return {img, lab};
}

}  // namespace igprune
