#ifndef SMAE_TENSOR_HPP
#define SMAE_TENSOR_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "smae/common.hpp"

namespace smae {

template <typename Scalar>
using MatrixX =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::string dims_to_string(const std::vector<index_t>& dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << 'x';
    os << dims[i];
  }
  os << ']';
  return os.str();
}

// Dense row-major array of `Scalar`. Rank 0 (empty dims) is a scalar holding
// one element. Values and gradients throughout the library are Tensor<float>;
// the finite-difference harness instantiates Tensor<double>.
template <typename Scalar>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<index_t> dims)
      : dims_(std::move(dims)), data_(checked_size(dims_), Scalar(0)) {}

  static Tensor zeros(std::vector<index_t> dims) {
    return Tensor(std::move(dims));
  }

  static Tensor full(std::vector<index_t> dims, Scalar v) {
    Tensor t(std::move(dims));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  static Tensor scalar(Scalar v) {
    Tensor t{std::vector<index_t>{}};
    t.data_[0] = v;
    return t;
  }

  static Tensor from_data(std::vector<index_t> dims, std::vector<Scalar> data) {
    Tensor t;
    t.dims_ = std::move(dims);
    if (checked_size(t.dims_) != static_cast<index_t>(data.size())) {
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match dims " + dims_to_string(t.dims_));
    }
    t.data_ = std::move(data);
    return t;
  }

  template <typename Other>
  Tensor<Other> cast() const {
    std::vector<Other> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) {
      out[i] = static_cast<Other>(data_[i]);
    }
    return Tensor<Other>::from_data(dims_, std::move(out));
  }

  const std::vector<index_t>& dims() const { return dims_; }
  index_t rank() const { return static_cast<index_t>(dims_.size()); }
  index_t size() const { return static_cast<index_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  index_t rows() const {
    if (rank() != 2) throw ShapeError("rows() on non-matrix " + dims_to_string(dims_));
    return dims_[0];
  }
  index_t cols() const {
    if (rank() != 2) throw ShapeError("cols() on non-matrix " + dims_to_string(dims_));
    return dims_[1];
  }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }
  std::vector<Scalar>& storage() { return data_; }
  const std::vector<Scalar>& storage() const { return data_; }

  Scalar& operator[](index_t i) { return data_[static_cast<std::size_t>(i)]; }
  Scalar operator[](index_t i) const { return data_[static_cast<std::size_t>(i)]; }

  Scalar& operator()(index_t r, index_t c) { return data_[static_cast<std::size_t>(r * cols_unchecked() + c)]; }
  Scalar operator()(index_t r, index_t c) const { return data_[static_cast<std::size_t>(r * cols_unchecked() + c)]; }

  Scalar item() const {
    if (size() != 1) throw ContractError("item() on tensor with " + std::to_string(size()) + " elements");
    return data_[0];
  }

  void fill(Scalar v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_dims(const Tensor& other) const { return dims_ == other.dims_; }

  bool all_finite() const {
    for (Scalar v : data_) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  void ensure_finite(const std::string& what) const {
    if (!all_finite()) throw NumericError("non-finite values in " + what);
  }

  // Eigen views over the flat storage. Rank-2 tensors map as-is; rank-1 maps
  // to a single row so bias vectors compose with matrix expressions.
  Eigen::Map<MatrixX<Scalar>> mat() {
    auto [r, c] = mat_dims();
    return Eigen::Map<MatrixX<Scalar>>(data_.data(), r, c);
  }
  Eigen::Map<const MatrixX<Scalar>> mat() const {
    auto [r, c] = mat_dims();
    return Eigen::Map<const MatrixX<Scalar>>(data_.data(), r, c);
  }

 private:
  static index_t checked_size(const std::vector<index_t>& dims) {
    index_t n = 1;
    for (index_t d : dims) {
      if (d <= 0) throw ShapeError("non-positive extent in dims " + dims_to_string(dims));
      n *= d;
    }
    return n;
  }

  index_t cols_unchecked() const { return dims_.size() == 2 ? dims_[1] : size(); }

  std::pair<index_t, index_t> mat_dims() const {
    if (rank() == 2) return {dims_[0], dims_[1]};
    if (rank() <= 1) return {1, size()};
    throw ShapeError("mat() on rank-" + std::to_string(rank()) + " tensor");
  }

  std::vector<index_t> dims_;
  std::vector<Scalar> data_;
};

template <typename Scalar>
void check_same_dims(const Tensor<Scalar>& a, const Tensor<Scalar>& b,
                     const char* op) {
  if (!a.same_dims(b)) {
    throw ShapeError(std::string(op) + ": dims " + dims_to_string(a.dims()) +
                     " vs " + dims_to_string(b.dims()));
  }
}

}  // namespace smae

#endif  // SMAE_TENSOR_HPP
