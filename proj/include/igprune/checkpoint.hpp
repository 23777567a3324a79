#pragma once

// SNGE checkpoint files.
//
//   magic    "SNGE"
//   u32      version (1)
//   u32      layer count
//   per layer:
//     u8     tag = kind | (activation << 4)
//     u32[]  dense: n_in n_out      conv2d: k k c_in c_out in_h in_w
//     f64[]  weights, row-major
//     f64[]  biases
//
// All integers and floats are little-endian.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "igprune/error.hpp"
#include "igprune/network.hpp"

namespace igprune {

inline constexpr std::array<char, 4> kCheckpointMagic{'S', 'N', 'G', 'E'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64(std::vector<std::uint8_t>& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return std::bit_cast<double>(v);
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("checkpoint: truncated at byte " + std::to_string(pos_));
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> encode_checkpoint(const Network& net) {
  std::vector<std::uint8_t> out(kCheckpointMagic.begin(), kCheckpointMagic.end());
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(net.depth()));
  for (const auto& l : net.layers()) {
    out.push_back(static_cast<std::uint8_t>(static_cast<unsigned>(l.kind) |
                                            (static_cast<unsigned>(l.activation) << 4)));
    if (l.kind == LayerKind::dense) {
      detail::put_u32(out, static_cast<std::uint32_t>(l.fan_in()));
      detail::put_u32(out, static_cast<std::uint32_t>(l.units()));
    } else {
      for (std::size_t d : l.weights.shape()) detail::put_u32(out, static_cast<std::uint32_t>(d));
      detail::put_u32(out, static_cast<std::uint32_t>(l.in_h));
      detail::put_u32(out, static_cast<std::uint32_t>(l.in_w));
    }
    for (double w : l.weights.values()) detail::put_f64(out, w);
    for (double b : l.bias.values()) detail::put_f64(out, b);
  }
  return out;
}

inline Network decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || !std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), bytes.begin())) {
    throw FormatError("checkpoint: bad magic");
  }
  detail::ByteReader in(bytes);
  for (int i = 0; i < 4; ++i) in.u8();
  if (const auto v = in.u32(); v != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(v));
  }
  const std::uint32_t count = in.u32();
  if (count == 0) throw FormatError("checkpoint: no layers");
  std::vector<Layer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint8_t tag = in.u8();
    const unsigned kind = tag & 0x0F, act = tag >> 4;
    if (kind > 1 || act > 2) throw FormatError("checkpoint: bad layer tag " + std::to_string(tag));
    const auto activation = static_cast<Activation>(act);
    Layer l;
    if (kind == 0) {
      const auto n_in = in.u32(), n_out = in.u32();
      l = Layer::dense(n_in, n_out, activation);
    } else {
      const auto k = in.u32(), k2 = in.u32(), c_in = in.u32(), c_out = in.u32();
      const auto h = in.u32(), w = in.u32();
      if (k != k2) throw FormatError("checkpoint: non-square kernel");
      l = Layer::conv2d(h, w, c_in, c_out, k, activation);
    }
    for (double& w : l.weights.values()) w = in.f64();
    for (double& b : l.bias.values()) b = in.f64();
    layers.push_back(std::move(l));
  }
  if (!in.done()) throw FormatError("checkpoint: trailing bytes");
  const Layer& first = layers.front();
  std::vector<std::size_t> input_shape =
      first.kind == LayerKind::conv2d
          ? std::vector<std::size_t>{first.in_h, first.in_w, first.in_channels()}
          : std::vector<std::size_t>{first.fan_in()};
  try {
    return Network(std::move(input_shape), std::move(layers));
  } catch (const DimensionError& e) {
    throw FormatError(std::string("checkpoint: inconsistent layers: ") + e.what());
  }
}

inline void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(net);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("checkpoint: cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("checkpoint: write failed for " + path.string());
}

inline Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("checkpoint: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace igprune
