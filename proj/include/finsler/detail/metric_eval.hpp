#pragma once

// Templated evaluation of F and F^2 for every metric kind, over any scalar
// type (double or jet). Point and direction share one scalar type; callers
// lift constants with finsler::lift.

#include <cmath>

#include "finsler/metric.hpp"
#include "finsler/small_linalg.hpp"

namespace finsler::detail {

template <int M, class T>
T quadratic_form(const Mat<T, M>& a, const Vec<T, M>& v) {
  return dot<T, M>(v, matvec<T, T, M>(a, v));
}

template <int M, class T>
T quadratic_form(const Matrix& a, const Vec<T, M>& v) {
  T s = T(0.0);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) s += v[i] * v[j] * a(i, j);
  return s;
}

template <int M, class T>
T norm(const MetricSpec& spec, const Vec<T, M>& x, const Vec<T, M>& v);

/// F^2, evaluated without a square root where the kind allows it.
template <int M, class T>
T norm_sq(const MetricSpec& spec, const Vec<T, M>& x, const Vec<T, M>& v) {
  using std::sqrt;
  return std::visit(
      overloaded{
          [&](const MetricSpec::Euclidean&) { return dot<T, M>(v, v); },
          [&](const MetricSpec::Riemannian& r) { return quadratic_form<M, T>(r.a.evaluate<M>(x), v); },
          [&](const MetricSpec::Randers& r) {
            const T f = sqrt(quadratic_form<M, T>(r.a.evaluate<M>(x), v)) + dot<T, M>(r.b.evaluate<M>(x), v);
            return f * f;
          },
          [&](const MetricSpec::LocallyMinkowski& n) {
            T beta = T(0.0);
            for (int i = 0; i < M; ++i) beta += v[i] * n.b[i];
            const T f = sqrt(quadratic_form<M, T>(n.a, v)) + beta;
            return f * f;
          },
          [&](const MetricSpec::Pullback& p) {
            const Vec<T, M> y = p.diffeo.forward<M>(x);
            const Vec<T, M> w = matvec<T, T, M>(p.diffeo.jacobian<M>(x), v);
            return norm_sq<M, T>(*p.inner, y, w);
          },
      },
      spec.kind());
}

template <int M, class T>
T norm(const MetricSpec& spec, const Vec<T, M>& x, const Vec<T, M>& v) {
  using std::sqrt;
  return std::visit(
      overloaded{
          [&](const MetricSpec::Euclidean&) { return sqrt(dot<T, M>(v, v)); },
          [&](const MetricSpec::Riemannian& r) { return sqrt(quadratic_form<M, T>(r.a.evaluate<M>(x), v)); },
          [&](const MetricSpec::Randers& r) {
            return sqrt(quadratic_form<M, T>(r.a.evaluate<M>(x), v)) + dot<T, M>(r.b.evaluate<M>(x), v);
          },
          [&](const MetricSpec::LocallyMinkowski& n) {
            T beta = T(0.0);
            for (int i = 0; i < M; ++i) beta += v[i] * n.b[i];
            return sqrt(quadratic_form<M, T>(n.a, v)) + beta;
          },
          [&](const MetricSpec::Pullback& p) {
            const Vec<T, M> y = p.diffeo.forward<M>(x);
            const Vec<T, M> w = matvec<T, T, M>(p.diffeo.jacobian<M>(x), v);
            return norm<M, T>(*p.inner, y, w);
          },
      },
      spec.kind());
}

/// True when F does not depend on the base point.
inline bool is_x_independent(const MetricSpec& spec) {
  return std::visit(overloaded{
                        [](const MetricSpec::Euclidean&) { return true; },
                        [](const MetricSpec::Riemannian& r) { return r.a.is_constant(); },
                        [](const MetricSpec::Randers& r) { return r.a.is_constant() && r.b.is_constant(); },
                        [](const MetricSpec::LocallyMinkowski&) { return true; },
                        [](const MetricSpec::Pullback& p) {
                          const bool linear = std::holds_alternative<DiffeoSpec::Identity>(p.diffeo.variant()) ||
                                              std::holds_alternative<DiffeoSpec::Affine>(p.diffeo.variant());
                          return linear && is_x_independent(*p.inner);
                        },
                    },
                    spec.kind());
}

}  // namespace finsler::detail
