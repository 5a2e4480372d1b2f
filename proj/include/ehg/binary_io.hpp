#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ehg/errors.hpp"

namespace ehg {

static_assert(std::endian::native == std::endian::little, "model container assumes a little-endian host");

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void i32(std::int32_t v) { bytes(&v, sizeof v); }
  void str(std::string_view s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void vec(const Eigen::VectorXd& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    bytes(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  void mat(const Eigen::MatrixXd& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    bytes(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  void bytes(void* p, std::size_t n) {
    if (n > data_.size() - pos_) throw ValidationError("model container truncated");
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, sizeof v);
    return v;
  }
  std::int32_t i32() {
    std::int32_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::string str() {
    const auto n = count(1);
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  Eigen::VectorXd vec() {
    const auto n = count(sizeof(double));
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    bytes(v.data(), n * sizeof(double));
    return v;
  }
  Eigen::MatrixXd mat() {
    const auto r = u64();
    const auto c = u64();
    if (c != 0 && r > (data_.size() - pos_) / sizeof(double) / c) throw ValidationError("model container truncated");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    bytes(m.data(), r * c * sizeof(double));
    return m;
  }
  /// Reads a length prefix and checks that many elements of `elem` bytes remain.
  std::size_t count(std::size_t elem) {
    const auto n = u64();
    if (n > (data_.size() - pos_) / elem) throw ValidationError("model container truncated");
    return static_cast<std::size_t>(n);
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace ehg
