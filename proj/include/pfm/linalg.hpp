#pragma once
// Small fixed-size vectors, matrices and third-order tensors used for
// per-particle state. Dimension is a template parameter; only D = 2 is
// instantiated by the solver.

#include <array>
#include <cmath>
#include <cstddef>

namespace pfm {

template <int D>
struct Vec {
  std::array<double, D> c{};

  constexpr double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  constexpr double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  constexpr Vec& operator+=(const Vec& o) {
    for (int i = 0; i < D; ++i) (*this)[i] += o[i];
    return *this;
  }
  constexpr Vec& operator-=(const Vec& o) {
    for (int i = 0; i < D; ++i) (*this)[i] -= o[i];
    return *this;
  }
  constexpr Vec& operator*=(double s) {
    for (int i = 0; i < D; ++i) (*this)[i] *= s;
    return *this;
  }
  friend constexpr Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend constexpr Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend constexpr Vec operator*(Vec a, double s) { return a *= s; }
  friend constexpr Vec operator*(double s, Vec a) { return a *= s; }
  friend constexpr Vec operator-(Vec a) { return a *= -1.0; }
  friend constexpr bool operator==(const Vec&, const Vec&) = default;
};

/// Row-major D x D matrix; (r, c) is row r, column c.
template <int D>
struct Mat {
  std::array<double, D * D> a{};

  static constexpr Mat identity() {
    Mat m;
    for (int i = 0; i < D; ++i) m(i, i) = 1.0;
    return m;
  }
  static constexpr Mat zero() { return Mat{}; }

  constexpr double& operator()(int r, int c) { return a[static_cast<std::size_t>(r * D + c)]; }
  constexpr double operator()(int r, int c) const { return a[static_cast<std::size_t>(r * D + c)]; }

  constexpr Mat& operator+=(const Mat& o) {
    for (int i = 0; i < D * D; ++i) a[i] += o.a[i];
    return *this;
  }
  constexpr Mat& operator-=(const Mat& o) {
    for (int i = 0; i < D * D; ++i) a[i] -= o.a[i];
    return *this;
  }
  constexpr Mat& operator*=(double s) {
    for (auto& x : a) x *= s;
    return *this;
  }
  friend constexpr Mat operator+(Mat x, const Mat& y) { return x += y; }
  friend constexpr Mat operator-(Mat x, const Mat& y) { return x -= y; }
  friend constexpr Mat operator*(Mat x, double s) { return x *= s; }
  friend constexpr Mat operator*(double s, Mat x) { return x *= s; }
  friend constexpr bool operator==(const Mat&, const Mat&) = default;

  friend constexpr Mat operator*(const Mat& x, const Mat& y) {
    Mat r;
    for (int i = 0; i < D; ++i)
      for (int k = 0; k < D; ++k) {
        const double xik = x(i, k);
        for (int j = 0; j < D; ++j) r(i, j) += xik * y(k, j);
      }
    return r;
  }
  friend constexpr Vec<D> operator*(const Mat& x, const Vec<D>& v) {
    Vec<D> r;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) r[i] += x(i, j) * v[j];
    return r;
  }
};

/// Third-order tensor t(i, j, k), used for the spatial derivative of a
/// Jacobian: t(i, j, k) = d M_ij / d x_k.
template <int D>
struct Tensor3 {
  std::array<double, D * D * D> a{};

  constexpr double& operator()(int i, int j, int k) {
    return a[static_cast<std::size_t>((i * D + j) * D + k)];
  }
  constexpr double operator()(int i, int j, int k) const {
    return a[static_cast<std::size_t>((i * D + j) * D + k)];
  }
  friend constexpr bool operator==(const Tensor3&, const Tensor3&) = default;
};

using Vec2 = Vec<2>;
using Mat2 = Mat<2>;
using Tensor2 = Tensor3<2>;

template <int D>
constexpr Mat<D> transpose(const Mat<D>& m) {
  Mat<D> t;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) t(i, j) = m(j, i);
  return t;
}

/// Returns M^T v without forming the transpose.
template <int D>
constexpr Vec<D> transpose_times(const Mat<D>& m, const Vec<D>& v) {
  Vec<D> r;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) r[i] += m(j, i) * v[j];
  return r;
}

template <int D>
constexpr double dot(const Vec<D>& a, const Vec<D>& b) {
  double s = 0.0;
  for (int i = 0; i < D; ++i) s += a[i] * b[i];
  return s;
}

template <int D>
double norm(const Vec<D>& a) {
  return std::sqrt(dot(a, a));
}

template <int D>
double frobenius(const Mat<D>& m) {
  double s = 0.0;
  for (double x : m.a) s += x * x;
  return std::sqrt(s);
}

template <int D>
constexpr Mat<D> outer(const Vec<D>& a, const Vec<D>& b) {
  Mat<D> m;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) m(i, j) = a[i] * b[j];
  return m;
}

constexpr double determinant(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

inline Mat2 inverse(const Mat2& m) {
  const double inv_det = 1.0 / determinant(m);
  Mat2 r;
  r(0, 0) = m(1, 1) * inv_det;
  r(0, 1) = -m(0, 1) * inv_det;
  r(1, 0) = -m(1, 0) * inv_det;
  r(1, 1) = m(0, 0) * inv_det;
  return r;
}

constexpr Vec2 vec2(double x, double y) { return Vec2{{x, y}}; }

constexpr Mat2 mat2(double a00, double a01, double a10, double a11) {
  return Mat2{{a00, a01, a10, a11}};
}

}  // namespace pfm
