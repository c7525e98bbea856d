#pragma once
// Instance files.
//
// CNT1 binary, all fields little-endian:
//   "CNT1"                      4 bytes
//   m, n                        u64, u64
//   A                           m*n f64, column-major
//   flag                        u64, 1 if a ground-truth signal follows, else 0
//   y                           m f64
//   [flag == 1] k               u64
//               k x (index, value)  u64, f64; indices strictly increasing
//   [optional]  noise_level, seed   f64, u64 (present iff 16 bytes remain)
//
// CSV: a header row "y,a0,a1,...,a{n-1}" followed by one row per measurement
// holding y_i and then row i of A.

#include "cnt/dense.hpp"
#include "cnt/probgen.hpp"
#include "cnt/thresholding.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnt::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string raw(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError("CNT1: truncated file");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline std::string encode_cnt1(const Instance& inst) {
  const Index m = inst.A.rows();
  const Index n = inst.A.cols();
  std::string out = "CNT1";
  detail::put_u64(out, static_cast<std::uint64_t>(m));
  detail::put_u64(out, static_cast<std::uint64_t>(n));
  const Matrix& A = inst.A.data();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) detail::put_f64(out, A(i, j));
  }
  detail::put_u64(out, inst.truth ? 1 : 0);
  for (Index i = 0; i < m; ++i) detail::put_f64(out, inst.y[i]);
  if (inst.truth) {
    const SparseVector& x = *inst.truth;
    detail::put_u64(out, static_cast<std::uint64_t>(x.nnz()));
    for (Index i : x.support) {
      detail::put_u64(out, static_cast<std::uint64_t>(i));
      detail::put_f64(out, x.entries[i]);
    }
  }
  if (inst.gen) {
    detail::put_f64(out, inst.gen->noise_level);
    detail::put_u64(out, inst.gen->seed);
  }
  return out;
}

inline Instance decode_cnt1(const std::string& bytes) {
  detail::Reader rd(bytes);
  if (bytes.size() < 4 || rd.raw(4) != "CNT1") throw FormatError("CNT1: bad magic");
  const std::uint64_t m = rd.u64();
  const std::uint64_t n = rd.u64();
  if (m < 1 || n < 1) throw FormatError("CNT1: m and n must be >= 1");
  if (m > (1ULL << 32) || n > (1ULL << 32) || m * n > rd.remaining() / 8) {
    throw FormatError("CNT1: matrix size exceeds file size");
  }
  Matrix A(static_cast<Index>(m), static_cast<Index>(n));
  for (Index j = 0; j < A.cols(); ++j) {
    for (Index i = 0; i < A.rows(); ++i) A(i, j) = rd.f64();
  }
  const std::uint64_t flag = rd.u64();
  if (flag > 1) throw FormatError("CNT1: flag must be 0 or 1");

  Instance inst;
  try {
    inst.A = SensingMatrix(std::move(A));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("CNT1: ") + e.what());
  }
  inst.y.resize(static_cast<Index>(m));
  for (Index i = 0; i < inst.y.size(); ++i) inst.y[i] = rd.f64();
  if (!inst.y.allFinite()) throw FormatError("CNT1: y must be finite");

  if (flag == 1) {
    const std::uint64_t k = rd.u64();
    if (k > n) throw FormatError("CNT1: truth has more entries than n");
    Vector x = Vector::Zero(static_cast<Index>(n));
    std::int64_t prev = -1;
    for (std::uint64_t e = 0; e < k; ++e) {
      const std::uint64_t idx = rd.u64();
      const double val = rd.f64();
      if (idx >= n || static_cast<std::int64_t>(idx) <= prev) {
        throw FormatError("CNT1: truth indices must be strictly increasing and < n");
      }
      if (!std::isfinite(val)) throw FormatError("CNT1: truth values must be finite");
      prev = static_cast<std::int64_t>(idx);
      x[static_cast<Index>(idx)] = val;
    }
    inst.truth = SparseVector(std::move(x));
  }

  if (rd.remaining() == 16) {
    GenSpec g;
    g.m = static_cast<Index>(m);
    g.n = static_cast<Index>(n);
    g.k = inst.truth ? inst.truth->nnz() : 0;
    g.noise_level = rd.f64();
    g.seed = rd.u64();
    inst.gen = g;
  } else if (rd.remaining() != 0) {
    throw FormatError("CNT1: unexpected trailing bytes");
  }
  return inst;
}

inline void write_cnt1(const std::string& path, const Instance& inst) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::string bytes = encode_cnt1(inst);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline Instance read_cnt1(const std::string& path) { return decode_cnt1(detail::slurp(path)); }

inline std::string encode_csv(const SensingMatrix& A, const Vector& y) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "y";
  for (Index j = 0; j < A.cols(); ++j) out << ",a" << j;
  out << "\n";
  for (Index i = 0; i < A.rows(); ++i) {
    out << y[i];
    for (Index j = 0; j < A.cols(); ++j) out << "," << A.data()(i, j);
    out << "\n";
  }
  return out.str();
}

inline Instance decode_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "y") {
    throw FormatError("CSV: header must be y,a0,a1,...");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j] != "a" + std::to_string(j - 1)) {
      throw FormatError("CSV: header column " + std::to_string(j) + " must be a" +
                        std::to_string(j - 1));
    }
  }
  const std::size_t n = header.size() - 1;

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw FormatError("CSV: bad number on line " + std::to_string(lineno));
      }
      row.push_back(v);
    }
    if (row.size() != n + 1) {
      throw FormatError("CSV: wrong column count on line " + std::to_string(lineno));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("CSV: no data rows");

  const auto m = static_cast<Index>(rows.size());
  Matrix A(m, static_cast<Index>(n));
  Vector y(m);
  for (Index i = 0; i < m; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    y[i] = row[0];
    for (std::size_t j = 0; j < n; ++j) A(i, static_cast<Index>(j)) = row[j + 1];
  }
  Instance inst;
  inst.A = SensingMatrix(std::move(A));
  inst.y = std::move(y);
  return inst;
}

inline Instance read_csv(const std::string& path) { return decode_csv(detail::slurp(path)); }

/// Dispatches on the leading magic bytes.
inline Instance read_instance(const std::string& path) {
  const std::string bytes = detail::slurp(path);
  if (bytes.size() >= 4 && bytes.compare(0, 4, "CNT1") == 0) return decode_cnt1(bytes);
  return decode_csv(bytes);
}

}  // namespace cnt::io
