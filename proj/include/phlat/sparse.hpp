#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <vector>

#include "phlat/common.hpp"

namespace phlat {

struct Triplet {
  int r = 0, c = 0;
  cx v{0.0, 0.0};
};

/// Compressed sparse row operator on a finite basis.  Built from a
/// coordinate list that is canonicalized (row-major sort, duplicates summed,
/// exact zeros dropped) so equal operators have equal storage.
class SparseOperator {
 public:
  SparseOperator() = default;

  static SparseOperator from_triplets(int dim, std::vector<Triplet> ts) {
    if (dim < 0) throw config_error("SparseOperator: negative dimension");
    for (const auto& t : ts)
      if (t.r < 0 || t.r >= dim || t.c < 0 || t.c >= dim)
        throw config_error("SparseOperator: triplet out of range");
    std::sort(ts.begin(), ts.end(), [](const Triplet& a, const Triplet& b) {
      return a.r != b.r ? a.r < b.r : a.c < b.c;
    });
    SparseOperator op;
    op.dim_ = dim;
    op.row_ptr_.assign(std::size_t(dim) + 1, 0);
    op.col_.reserve(ts.size());
    op.val_.reserve(ts.size());
    std::size_t i = 0;
    for (int r = 0; r < dim; ++r) {
      while (i < ts.size() && ts[i].r == r) {
        cx v = ts[i].v;
        const int c = ts[i].c;
        ++i;
        while (i < ts.size() && ts[i].r == r && ts[i].c == c) v += ts[i++].v;
        if (v != cx(0.0, 0.0)) {
          op.col_.push_back(c);
          op.val_.push_back(v);
        }
      }
      op.row_ptr_[std::size_t(r) + 1] = int(op.col_.size());
    }
    return op;
  }

  static SparseOperator identity(int dim, cx scale = cx(1.0, 0.0)) {
    std::vector<Triplet> ts;
    ts.reserve(std::size_t(dim));
    for (int i = 0; i < dim; ++i) ts.push_back({i, i, scale});
    return from_triplets(dim, ts);
  }

  static SparseOperator diagonal(const Eigen::VectorXd& d) {
    std::vector<Triplet> ts;
    ts.reserve(std::size_t(d.size()));
    for (int i = 0; i < d.size(); ++i) ts.push_back({i, i, cx(d[i], 0.0)});
    return from_triplets(int(d.size()), ts);
  }

  int dim() const { return dim_; }
  std::int64_t nnz() const { return std::int64_t(val_.size()); }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return col_; }
  const std::vector<cx>& values() const { return val_; }
  std::vector<cx>& values() { return val_; }

  void apply(const cx* x, cx* y) const {
    for (int r = 0; r < dim_; ++r) {
      cx acc(0.0, 0.0);
      const int e = row_ptr_[std::size_t(r) + 1];
      for (int k = row_ptr_[std::size_t(r)]; k < e; ++k)
        acc += val_[std::size_t(k)] * x[col_[std::size_t(k)]];
      y[r] = acc;
    }
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
    if (int(x.size()) != dim_) throw config_error("SparseOperator::apply: size mismatch");
    Eigen::VectorXcd y(dim_);
    apply(x.data(), y.data());
    return y;
  }

  /// y += a * (A x)
  void apply_add(cx a, const cx* x, cx* y) const {
    for (int r = 0; r < dim_; ++r) {
      cx acc(0.0, 0.0);
      const int e = row_ptr_[std::size_t(r) + 1];
      for (int k = row_ptr_[std::size_t(r)]; k < e; ++k)
        acc += val_[std::size_t(k)] * x[col_[std::size_t(k)]];
      y[r] += a * acc;
    }
  }

  Eigen::MatrixXcd to_dense() const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim_, dim_);
    for (int r = 0; r < dim_; ++r)
      for (int k = row_ptr_[std::size_t(r)]; k < row_ptr_[std::size_t(r) + 1]; ++k)
        m(r, col_[std::size_t(k)]) = val_[std::size_t(k)];
    return m;
  }

  SparseOperator adjoint() const {
    std::vector<Triplet> ts;
    ts.reserve(val_.size());
    for (int r = 0; r < dim_; ++r)
      for (int k = row_ptr_[std::size_t(r)]; k < row_ptr_[std::size_t(r) + 1]; ++k)
        ts.push_back({col_[std::size_t(k)], r, std::conj(val_[std::size_t(k)])});
    return from_triplets(dim_, std::move(ts));
  }

  /// max |A - A^dagger| entry; 0 for exactly Hermitian storage.
  double hermiticity_violation() const {
    const SparseOperator diff = axpby(cx(1, 0), *this, cx(-1, 0), adjoint());
    return diff.max_abs();
  }

  bool is_hermitian(double tol = 1e-12) const { return hermiticity_violation() <= tol; }

  double max_abs() const {
    double m = 0.0;
    for (const cx& v : val_) m = std::max(m, std::abs(v));
    return m;
  }

  cx trace() const {
    cx t(0.0, 0.0);
    for (int r = 0; r < dim_; ++r)
      for (int k = row_ptr_[std::size_t(r)]; k < row_ptr_[std::size_t(r) + 1]; ++k)
        if (col_[std::size_t(k)] == r) t += val_[std::size_t(k)];
    return t;
  }

  std::vector<Triplet> to_triplets() const {
    std::vector<Triplet> ts;
    ts.reserve(val_.size());
    for (int r = 0; r < dim_; ++r)
      for (int k = row_ptr_[std::size_t(r)]; k < row_ptr_[std::size_t(r) + 1]; ++k)
        ts.push_back({r, col_[std::size_t(k)], val_[std::size_t(k)]});
    return ts;
  }

  /// a*A + b*B with matching dimensions.
  static SparseOperator axpby(cx a, const SparseOperator& A, cx b, const SparseOperator& B) {
    if (A.dim() != B.dim()) throw config_error("SparseOperator::axpby: dim mismatch");
    std::vector<Triplet> ts;
    ts.reserve(A.val_.size() + B.val_.size());
    for (auto& t : A.to_triplets()) ts.push_back({t.r, t.c, a * t.v});
    for (auto& t : B.to_triplets()) ts.push_back({t.r, t.c, b * t.v});
    return from_triplets(A.dim(), std::move(ts));
  }

  static SparseOperator multiply(const SparseOperator& A, const SparseOperator& B) {
    if (A.dim() != B.dim()) throw config_error("SparseOperator::multiply: dim mismatch");
    std::vector<Triplet> ts;
    std::vector<cx> acc(std::size_t(A.dim()), cx(0, 0));
    std::vector<int> touched;
    for (int r = 0; r < A.dim_; ++r) {
      touched.clear();
      for (int k = A.row_ptr_[std::size_t(r)]; k < A.row_ptr_[std::size_t(r) + 1]; ++k) {
        const int m = A.col_[std::size_t(k)];
        const cx av = A.val_[std::size_t(k)];
        for (int l = B.row_ptr_[std::size_t(m)]; l < B.row_ptr_[std::size_t(m) + 1]; ++l) {
          const int c = B.col_[std::size_t(l)];
          if (acc[std::size_t(c)] == cx(0, 0)) touched.push_back(c);
          acc[std::size_t(c)] += av * B.val_[std::size_t(l)];
        }
      }
      for (int c : touched) {
        ts.push_back({r, c, acc[std::size_t(c)]});
        acc[std::size_t(c)] = cx(0, 0);
      }
    }
    return from_triplets(A.dim(), std::move(ts));
  }

 private:
  int dim_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_;
  std::vector<cx> val_;
};

}  // namespace phlat
