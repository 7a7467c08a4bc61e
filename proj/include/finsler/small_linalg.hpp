#pragma once

// Fixed-size vectors and matrices over an arbitrary scalar (double or jet).

#include <array>
#include <cmath>
#include <utility>

#include <Eigen/Core>

#include "finsler/jet.hpp"

namespace finsler {

template <class T, int M>
using Vec = std::array<T, M>;

template <class T, int M>
using Mat = std::array<std::array<T, M>, M>;

template <class T, int M>
Vec<T, M> zero_vec() {
  Vec<T, M> v;
  v.fill(T(0.0));
  return v;
}

template <class T, int M>
Mat<T, M> zero_mat() {
  Mat<T, M> a;
  for (auto& row : a) row.fill(T(0.0));
  return a;
}

template <class T, int M>
Mat<T, M> identity_mat() {
  Mat<T, M> a = zero_mat<T, M>();
  for (int i = 0; i < M; ++i) a[i][i] = T(1.0);
  return a;
}

template <class T, int M>
T dot(const Vec<T, M>& a, const Vec<T, M>& b) {
  T s = a[0] * b[0];
  for (int i = 1; i < M; ++i) s += a[i] * b[i];
  return s;
}

/// a * v, where the matrix scalar may be coarser than the vector scalar.
template <class A, class V, int M>
Vec<V, M> matvec(const Mat<A, M>& a, const Vec<V, M>& v) {
  Vec<V, M> r;
  for (int i = 0; i < M; ++i) {
    r[i] = a[i][0] * v[0];
    for (int j = 1; j < M; ++j) r[i] += a[i][j] * v[j];
  }
  return r;
}

template <class A, class V, int M>
Vec<V, M> matvec_transposed(const Mat<A, M>& a, const Vec<V, M>& v) {
  Vec<V, M> r;
  for (int i = 0; i < M; ++i) {
    r[i] = a[0][i] * v[0];
    for (int j = 1; j < M; ++j) r[i] += a[j][i] * v[j];
  }
  return r;
}

template <class T, int M>
Mat<T, M> matmul(const Mat<T, M>& a, const Mat<T, M>& b) {
  Mat<T, M> r;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      r[i][j] = a[i][0] * b[0][j];
      for (int k = 1; k < M; ++k) r[i][j] += a[i][k] * b[k][j];
    }
  return r;
}

/// Gauss-Jordan inverse, pivoting on the magnitude of the base value.
template <class T, int M>
Mat<T, M> inverse(Mat<T, M> a) {
  using ad::recip;
  using ad::scalar;
  Mat<T, M> inv = identity_mat<T, M>();
  for (int col = 0; col < M; ++col) {
    int pivot = col;
    for (int r = col + 1; r < M; ++r)
      if (std::abs(scalar(a[r][col])) > std::abs(scalar(a[pivot][col]))) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const T p = recip(a[col][col]);
    for (int j = 0; j < M; ++j) {
      a[col][j] = a[col][j] * p;
      inv[col][j] = inv[col][j] * p;
    }
    for (int r = 0; r < M; ++r) {
      if (r == col) continue;
      const T f = a[r][col];
      for (int j = 0; j < M; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

template <class T, int M>
T determinant(const Mat<T, M>& a) {
  if constexpr (M == 1) {
    return a[0][0];
  } else if constexpr (M == 2) {
    return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  } else if constexpr (M == 3) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  } else {
    static_assert(M <= 3, "determinant implemented for M <= 3");
  }
}

template <int M>
Vec<double, M> to_array(const Eigen::VectorXd& v) {
  Vec<double, M> r;
  for (int i = 0; i < M; ++i) r[i] = v[i];
  return r;
}

template <int M>
Eigen::VectorXd to_eigen(const Vec<double, M>& v) {
  Eigen::VectorXd r(M);
  for (int i = 0; i < M; ++i) r[i] = v[i];
  return r;
}

template <int M>
Eigen::MatrixXd to_eigen(const Mat<double, M>& a) {
  Eigen::MatrixXd r(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) r(i, j) = a[i][j];
  return r;
}

template <int M>
Mat<double, M> to_array(const Eigen::MatrixXd& a) {
  Mat<double, M> r;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) r[i][j] = a(i, j);
  return r;
}

/// Lift a vector into a coarser-to-finer scalar type (e.g. double -> jet).
template <class To, class From, int M>
Vec<To, M> lift(const Vec<From, M>& v) {
  Vec<To, M> r;
  for (int i = 0; i < M; ++i) r[i] = To(v[i]);
  return r;
}

}  // namespace finsler
