#pragma once

#include <cstddef>
#include <vector>

namespace qio {

/// Dense rank-4 tensor over spatial-orbital indices, row-major (p,q,r,s).
/// Desk-scale storage: M^4 doubles, no symmetry packing.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(std::size_t m) : m_(m), data_(m * m * m * m, 0.0) {}

  std::size_t dim() const { return m_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t p, std::size_t q, std::size_t r, std::size_t s) {
    return data_[((p * m_ + q) * m_ + r) * m_ + s];
  }
  double operator()(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const {
    return data_[((p * m_ + q) * m_ + r) * m_ + s];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  void setZero() { std::fill(data_.begin(), data_.end(), 0.0); }

 private:
  std::size_t m_ = 0;
  std::vector<double> data_;
};

}  // namespace qio
