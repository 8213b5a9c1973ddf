#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>

namespace palmtrack {

/// FNV-1a accumulator over raw value bits. Used to derive content-addressed
/// cache keys and Monte-Carlo substream seeds that do not depend on
/// evaluation order.
class ContentHasher {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ull;
    }
  }

  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    bytes(&bits, sizeof(bits));
  }

  void i64(std::int64_t v) { bytes(&v, sizeof(v)); }

  void vec(const Eigen::VectorXd& v) {
    i64(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
  }

  void mat(const Eigen::MatrixXd& m) {
    i64(m.rows());
    i64(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) f64(m(i, j));
  }

  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

}  // namespace palmtrack
