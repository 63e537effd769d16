#include "manikey/regressor.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace manikey {

std::pair<Eigen::MatrixX3f, Eigen::MatrixXf> subsample(const Eigen::MatrixX3f& points,
                                                       const Eigen::MatrixXf& targets, int n_out,
                                                       Rng& rng) {
  const Index n = points.rows();
  if (targets.rows() != n)
    throw ShapeMismatch("subsample points " + std::to_string(n) + " vs targets " +
                        std::to_string(targets.rows()));
  if (n < 1 || n_out < 1) throw DataError("subsample needs nonempty input and n_out >= 1");

  std::vector<int> pick(static_cast<std::size_t>(n_out));
  if (n >= n_out) {
    // partial Fisher-Yates
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < n_out; ++i) {
      const int j = i + rng.uniform_int(static_cast<int>(n) - i);
      std::swap(order[i], order[j]);
      pick[i] = order[i];
    }
  } else {
    for (Index i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = static_cast<int>(i);
    for (int i = static_cast<int>(n); i < n_out; ++i)
      pick[static_cast<std::size_t>(i)] = rng.uniform_int(static_cast<int>(n));
  }

  Eigen::MatrixX3f out_points(n_out, 3);
  Eigen::MatrixXf out_targets(n_out, targets.cols());
  for (int i = 0; i < n_out; ++i) {
    out_points.row(i) = points.row(pick[static_cast<std::size_t>(i)]);
    out_targets.row(i) = targets.row(pick[static_cast<std::size_t>(i)]);
  }
  return {std::move(out_points), std::move(out_targets)};
}

namespace {

constexpr char kMagic[4] = {'M', 'K', 'R', 'W'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

void put_f32(std::ostream& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(std::istream& in, const std::string& file) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ParseError(file, "unexpected end of file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

float get_f32(std::istream& in, const std::string& file) {
  return std::bit_cast<float>(get_u32(in, file));
}

}  // namespace

void save_params(const std::filesystem::path& file, const RegressorParams& params) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + file.string() + "'");
  out.write(kMagic, 4);
  // layers are (W, b) pairs: encoder 1, encoder 2, combiner, head
  put_u32(out, 4);
  auto tensors = params.tensors();
  for (std::size_t layer = 0; layer < 4; ++layer) {
    const auto& w = *tensors[layer * 2];
    const auto& b = *tensors[layer * 2 + 1];
    put_u32(out, static_cast<std::uint32_t>(w.rows()));
    put_u32(out, static_cast<std::uint32_t>(w.cols()));
    for (Index r = 0; r < w.rows(); ++r)
      for (Index c = 0; c < w.cols(); ++c) put_f32(out, w(r, c));
    for (Index c = 0; c < b.cols(); ++c) put_f32(out, b(0, c));
  }
  if (!out) throw DataError("short write to '" + file.string() + "'");
}

RegressorParams load_params(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError(file.string(), "cannot open file");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4))
    throw ParseError(file.string(), "bad magic, expected MKRW");
  const std::uint32_t layers = get_u32(in, file.string());
  if (layers != 4)
    throw ParseError(file.string(), "expected 4 layers, found " + std::to_string(layers));

  RegressorParams params;
  auto tensors = params.tensors();
  for (std::size_t layer = 0; layer < 4; ++layer) {
    const std::uint32_t rows = get_u32(in, file.string());
    const std::uint32_t cols = get_u32(in, file.string());
    if (rows == 0 || cols == 0 || static_cast<std::uint64_t>(rows) * cols > (1u << 28))
      throw ParseError(file.string(), "implausible layer shape " + std::to_string(rows) + "x" +
                                          std::to_string(cols));
    auto& w = *tensors[layer * 2];
    auto& b = *tensors[layer * 2 + 1];
    w.resize(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c) w(r, c) = get_f32(in, file.string());
    b.resize(1, cols);
    for (std::uint32_t c = 0; c < cols; ++c) b(0, c) = get_f32(in, file.string());
  }
  // shape chain: encoder input is xyz, combiner consumes local+global features
  if (params.enc1_w.rows() != 3 || params.enc2_w.rows() != params.enc1_w.cols() ||
      params.comb_w.rows() != 2 * params.enc2_w.cols() ||
      params.head_w.rows() != params.comb_w.cols())
    throw ParseError(file.string(), "inconsistent layer shape chain");
  if (!params.all_finite()) throw ParseError(file.string(), "non-finite weights");
  return params;
}

}  // namespace manikey
