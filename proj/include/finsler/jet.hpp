#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A Jet<T, N, K> holds the Taylor coefficients of a function of N variables
// up to total degree K around some base point. Arithmetic on jets is exact
// polynomial arithmetic modulo degree K+1, so evaluating any smooth
// expression on jets yields every partial derivative up to order K with no
// truncation error. The coefficient type T may itself be a jet, which gives
// nested (mixed-order) differentiation.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <type_traits>
#include <vector>

namespace finsler::ad {

constexpr int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

/// Monomial bookkeeping for N variables truncated at degree K.
///
/// Monomials are enumerated by degree, and within a degree in descending
/// lexicographic order of their exponent vectors. The enumeration does not
/// depend on K, so the layout for K-1 is a prefix of the layout for K.
template <int N, int K>
class JetTables {
 public:
  static constexpr int size = binomial(N + K, K);
  using Exponents = std::array<int, N>;

  struct Product {
    std::uint16_t lhs, rhs, out;
  };

  static const JetTables& instance() {
    static const JetTables tables;
    return tables;
  }

  const Exponents& exponents(int index) const { return exponents_[index]; }
  int degree(int index) const { return degree_[index]; }
  const std::vector<Product>& products() const { return products_; }

  int find(const Exponents& e) const {
    auto it = lookup_.find(e);
    return it == lookup_.end() ? -1 : it->second;
  }

  /// For d/dx_var: entry j gives the source coefficient in this layout that
  /// lands on coefficient j of the degree K-1 layout, and its factor.
  const std::vector<std::pair<int, double>>& derivative(int var) const {
    return derivative_[var];
  }

 private:
  JetTables() {
    for (int d = 0; d <= K; ++d) {
      Exponents e{};
      enumerate(d, 0, e);
    }
    for (int i = 0; i < size; ++i) lookup_.emplace(exponents_[i], i);

    for (int a = 0; a < size; ++a) {
      for (int b = 0; b < size; ++b) {
        if (degree_[a] + degree_[b] > K) continue;
        Exponents e{};
        for (int v = 0; v < N; ++v) e[v] = exponents_[a][v] + exponents_[b][v];
        products_.push_back({static_cast<std::uint16_t>(a), static_cast<std::uint16_t>(b),
                             static_cast<std::uint16_t>(lookup_.at(e))});
      }
    }

    if constexpr (K >= 1) {
      const int lower = binomial(N + K - 1, K - 1);
      for (int v = 0; v < N; ++v) {
        auto& map = derivative_[v];
        map.reserve(lower);
        for (int j = 0; j < lower; ++j) {
          Exponents e = exponents_[j];
          e[v] += 1;
          map.emplace_back(lookup_.at(e), static_cast<double>(e[v]));
        }
      }
    }
  }

  void enumerate(int remaining, int var, Exponents& e) {
    if (var == N - 1) {
      e[var] = remaining;
      exponents_.push_back(e);
      int deg = 0;
      for (int x : e) deg += x;
      degree_.push_back(deg);
      return;
    }
    for (int p = remaining; p >= 0; --p) {
      e[var] = p;
      enumerate(remaining - p, var + 1, e);
    }
    e[var] = 0;
  }

  std::vector<Exponents> exponents_;
  std::vector<int> degree_;
  std::map<Exponents, int> lookup_;
  std::vector<Product> products_;
  std::array<std::vector<std::pair<int, double>>, N> derivative_;
};

template <class T, int N, int K>
class Jet;

template <class T>
struct is_jet : std::false_type {};
template <class T, int N, int K>
struct is_jet<Jet<T, N, K>> : std::true_type {};
template <class T>
inline constexpr bool is_jet_v = is_jet<T>::value;

inline double scalar(double x) { return x; }
inline void mul_add(double& acc, double a, double b) { acc += a * b; }
inline double recip(double x) { return 1.0 / x; }

template <class T, int N, int K>
class Jet {
 public:
  static_assert(N >= 1 && K >= 0);
  using Tables = JetTables<N, K>;
  using value_type = T;
  static constexpr int variables = N;
  static constexpr int order = K;
  static constexpr int size = Tables::size;

  Jet() = default;

  template <class S>
    requires std::is_arithmetic_v<S>
  Jet(S s) {  // NOLINT(google-explicit-constructor)
    c_[0] = T(static_cast<double>(s));
  }

  Jet(const T& s)  // NOLINT(google-explicit-constructor)
    requires(!std::is_arithmetic_v<T>)
  {
    c_[0] = s;
  }

  /// The jet of the coordinate function x_var around `value`.
  static Jet variable(const T& value, int var) {
    Jet j;
    j.c_[0] = value;
    if constexpr (K >= 1) j.c_[1 + var] = T(1.0);
    return j;
  }

  const T& value() const { return c_[0]; }
  T& operator[](int i) { return c_[i]; }
  const T& operator[](int i) const { return c_[i]; }

  /// Partial derivative d^|e| f / dx^e at the base point.
  T partial(const typename Tables::Exponents& e) const {
    const int idx = Tables::instance().find(e);
    if (idx < 0) return T(0.0);
    double factorial = 1.0;
    for (int p : e)
      for (int k = 2; k <= p; ++k) factorial *= k;
    return c_[idx] * factorial;
  }

  /// First derivative with respect to x_var.
  T d(int var) const {
    if constexpr (K >= 1) return c_[1 + var];
    return T(0.0);
  }

  /// Second derivative with respect to x_a, x_b.
  T d(int a, int b) const {
    typename Tables::Exponents e{};
    e[a] += 1;
    e[b] += 1;
    return partial(e);
  }

  Jet& operator+=(const Jet& o) {
    for (int i = 0; i < size; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int i = 0; i < size; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator+=(const T& s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator-=(const T& s) {
    c_[0] -= s;
    return *this;
  }
  Jet& operator*=(const T& s) {
    for (auto& c : c_) c *= s;
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }

  Jet operator-() const {
    Jet r;
    for (int i = 0; i < size; ++i) r.c_[i] = -c_[i];
    return r;
  }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (const auto& p : Tables::instance().products()) mul_add(r.c_[p.out], a.c_[p.lhs], b.c_[p.rhs]);
    return r;
  }

  friend void mul_add(Jet& acc, const Jet& a, const Jet& b) {
    for (const auto& p : Tables::instance().products()) mul_add(acc.c_[p.out], a.c_[p.lhs], b.c_[p.rhs]);
  }

  friend Jet recip(const Jet& x) {
    const T inv = recip(x.value());
    std::array<T, K + 1> d;
    T p = inv;
    for (int k = 0; k <= K; ++k) {
      d[k] = (k % 2 == 0) ? p : -p;
      p = p * inv;
    }
    return compose(x, d);
  }

  /// sum_k d[k] (x - x0)^k, the Taylor series of a unary function at x0.
  friend Jet compose(const Jet& x, const std::array<T, K + 1>& d) {
    Jet h = x;
    h.c_[0] = T(0.0);
    Jet r(d[K]);
    for (int k = K - 1; k >= 0; --k) {
      r = r * h;
      r.c_[0] += d[k];
    }
    return r;
  }

 private:
  std::array<T, size> c_{};
};

template <class T>
using id_t = std::type_identity_t<T>;

// jet (op) jet
template <class T, int N, int K>
Jet<T, N, K> operator+(Jet<T, N, K> a, const Jet<T, N, K>& b) { return a += b; }
template <class T, int N, int K>
Jet<T, N, K> operator-(Jet<T, N, K> a, const Jet<T, N, K>& b) { return a -= b; }
template <class T, int N, int K>
Jet<T, N, K> operator/(const Jet<T, N, K>& a, const Jet<T, N, K>& b) { return a * recip(b); }

// jet (op) coefficient
template <class T, int N, int K>
Jet<T, N, K> operator+(Jet<T, N, K> a, const id_t<T>& s) { return a += s; }
template <class T, int N, int K>
Jet<T, N, K> operator+(const id_t<T>& s, Jet<T, N, K> a) { return a += s; }
template <class T, int N, int K>
Jet<T, N, K> operator-(Jet<T, N, K> a, const id_t<T>& s) { return a -= s; }
template <class T, int N, int K>
Jet<T, N, K> operator-(const id_t<T>& s, const Jet<T, N, K>& a) { return (-a) += s; }
template <class T, int N, int K>
Jet<T, N, K> operator*(Jet<T, N, K> a, const id_t<T>& s) { return a *= s; }
template <class T, int N, int K>
Jet<T, N, K> operator*(const id_t<T>& s, Jet<T, N, K> a) { return a *= s; }
template <class T, int N, int K>
Jet<T, N, K> operator/(Jet<T, N, K> a, const id_t<T>& s) { return a *= recip(s); }
template <class T, int N, int K>
Jet<T, N, K> operator/(const id_t<T>& s, const Jet<T, N, K>& a) { return recip(a) *= s; }

// jet (op) double, when the coefficient type is itself a jet
template <class T, int N, int K>
  requires(!std::is_arithmetic_v<T>)
Jet<T, N, K> operator+(Jet<T, N, K> a, double s) { return a += T(s); }
template <class T, int N, int K>
  requires(!std::is_arithmetic_v<T>)
Jet<T, N, K> operator+(double s, Jet<T, N, K> a) { return a += T(s); }
template <class T, int N, int K>
  requires(!std::is_arithmetic_v<T>)
Jet<T, N, K> operator-(Jet<T, N, K> a, double s) { return a -= T(s); }
template <class T, int N, int K>
  requires(!std::is_arithmetic_v<T>)
Jet<T, N, K> operator-(double s, const Jet<T, N, K>& a) { return (-a) += T(s); }
template <class T, int N, int K>
  requires(!std::is_arithmetic_v<T>)
Jet<T, N, K> operator*(Jet<T, N, K> a, double s) { return a *= T(s); }
template <class T, int N, int K>
  requires(!std::is_arithmetic_v<T>)
Jet<T, N, K> operator*(double s, Jet<T, N, K> a) { return a *= T(s); }
template <class T, int N, int K>
  requires(!std::is_arithmetic_v<T>)
Jet<T, N, K> operator/(Jet<T, N, K> a, double s) { return a *= T(1.0 / s); }
template <class T, int N, int K>
  requires(!std::is_arithmetic_v<T>)
Jet<T, N, K> operator/(double s, const Jet<T, N, K>& a) { return recip(a) *= T(s); }

template <class T, int N, int K>
double scalar(const Jet<T, N, K>& j) {
  return scalar(j.value());
}

template <class T, int N, int K>
Jet<T, N, K> sqrt(const Jet<T, N, K>& x) {
  using std::sqrt;
  const T s = sqrt(x.value());
  const T inv = recip(x.value());
  std::array<T, K + 1> d;
  d[0] = s;
  T p = s;
  double binom = 1.0;
  for (int k = 1; k <= K; ++k) {
    binom *= (0.5 - (k - 1)) / k;
    p = p * inv;
    d[k] = p * binom;
  }
  return compose(x, d);
}

template <class T, int N, int K>
Jet<T, N, K> exp(const Jet<T, N, K>& x) {
  using std::exp;
  const T e = exp(x.value());
  std::array<T, K + 1> d;
  double fact = 1.0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) fact *= k;
    d[k] = e * (1.0 / fact);
  }
  return compose(x, d);
}

template <class T, int N, int K>
Jet<T, N, K> log(const Jet<T, N, K>& x) {
  using std::log;
  const T inv = recip(x.value());
  std::array<T, K + 1> d;
  d[0] = log(x.value());
  T p = T(1.0);
  for (int k = 1; k <= K; ++k) {
    p = p * inv;
    d[k] = p * ((k % 2 == 1 ? 1.0 : -1.0) / k);
  }
  return compose(x, d);
}

template <class T, int N, int K>
Jet<T, N, K> sin(const Jet<T, N, K>& x) {
  using std::cos;
  using std::sin;
  const T s = sin(x.value());
  const T c = cos(x.value());
  std::array<T, K + 1> d;
  double fact = 1.0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) fact *= k;
    const T& base = (k % 2 == 0) ? s : c;
    const double sign = (k % 4 < 2) ? 1.0 : -1.0;
    d[k] = base * (sign / fact);
  }
  return compose(x, d);
}

template <class T, int N, int K>
Jet<T, N, K> cos(const Jet<T, N, K>& x) {
  using std::cos;
  using std::sin;
  const T s = sin(x.value());
  const T c = cos(x.value());
  std::array<T, K + 1> d;
  double fact = 1.0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) fact *= k;
    const T& base = (k % 2 == 0) ? c : s;
    const double sign = (k % 4 == 0 || k % 4 == 3) ? 1.0 : -1.0;
    d[k] = base * (sign / fact);
  }
  return compose(x, d);
}

/// d/dx_var, lowering the truncation order by one.
template <class T, int N, int K>
  requires(K >= 1)
Jet<T, N, K - 1> derivative(const Jet<T, N, K>& x, int var) {
  Jet<T, N, K - 1> r;
  const auto& map = JetTables<N, K>::instance().derivative(var);
  for (int j = 0; j < Jet<T, N, K - 1>::size; ++j) r[j] = x[map[j].first] * map[j].second;
  return r;
}

template <int K2, class T, int N, int K>
  requires(K2 <= K)
Jet<T, N, K2> truncate(const Jet<T, N, K>& x) {
  Jet<T, N, K2> r;
  for (int j = 0; j < Jet<T, N, K2>::size; ++j) r[j] = x[j];
  return r;
}

/// Integer power by repeated multiplication (valid at a zero base).
template <class T>
T ipow(const T& x, int p) {
  T r = T(1.0);
  for (int i = 0; i < p; ++i) r = r * x;
  return r;
}

}  // namespace finsler::ad
