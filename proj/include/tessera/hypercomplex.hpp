#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace tessera {

using Complex = std::complex<double>;

/// Tessarine a + b*i + c*j + d*k with i^2 = -1, j^2 = +1, k^2 = -1 and
/// commutative multiplication (ij = ji = k, jk = kj = i, ki = ik = -j).
struct Tessarine
{
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  constexpr Tessarine() = default;
  constexpr Tessarine(double a_, double b_ = 0.0, double c_ = 0.0, double d_ = 0.0)
    : a(a_)
    , b(b_)
    , c(c_)
    , d(d_)
  {
  }

  static constexpr Tessarine one() { return { 1.0, 0.0, 0.0, 0.0 }; }
  static constexpr Tessarine i() { return { 0.0, 1.0, 0.0, 0.0 }; }
  static constexpr Tessarine j() { return { 0.0, 0.0, 1.0, 0.0 }; }
  static constexpr Tessarine k() { return { 0.0, 0.0, 0.0, 1.0 }; }

  double norm() const { return std::sqrt(a * a + b * b + c * c + d * d); }

  friend constexpr bool operator==(const Tessarine&, const Tessarine&) = default;

  friend constexpr Tessarine operator+(const Tessarine& s, const Tessarine& t)
  {
    return { s.a + t.a, s.b + t.b, s.c + t.c, s.d + t.d };
  }
  friend constexpr Tessarine operator-(const Tessarine& s, const Tessarine& t)
  {
    return { s.a - t.a, s.b - t.b, s.c - t.c, s.d - t.d };
  }
  friend constexpr Tessarine operator-(const Tessarine& t) { return { -t.a, -t.b, -t.c, -t.d }; }
  friend constexpr Tessarine operator*(double x, const Tessarine& t)
  {
    return { x * t.a, x * t.b, x * t.c, x * t.d };
  }
  friend constexpr Tessarine operator*(const Tessarine& t, double x) { return x * t; }
};

/// Hamilton quaternion a + b*i + c*j + d*k. Only multiplication is provided.
struct Quaternion
{
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;
};

/// The two eigenvalues of the 2x2 complex-matrix form (a+bi)I + (c+di)J.
/// plus belongs to eigenvector (1, 1), minus to (1, -1).
struct Eigenchannels
{
  Complex plus;  ///< (a + c) + i(b + d)
  Complex minus; ///< (a - c) + i(b - d)
};

Eigenchannels channels(const Tessarine& t);
Tessarine from_channels(Complex plus, Complex minus);

Tessarine tess_mul(const Tessarine& s, const Tessarine& t);
Tessarine tess_pow(const Tessarine& t, unsigned power);
double tess_real_pow(const Tessarine& t, unsigned power);
Tessarine tess_exp(const Tessarine& t);

/// Throws ZeroDivisor when an eigenchannel has magnitude below 1e-12 * (1 + |t|).
Tessarine tess_reciprocal(const Tessarine& t);

/// Re{G(t)} for the expit G(x) = 1 / (1 + exp(-x)). Throws SingularExpit at the
/// poles of G in either channel.
double expit_real(const Tessarine& t);

/// Re{G(t) s}.
double expit_mul_real(const Tessarine& t, const Tessarine& s);

/// Re{K(t)} for the logistic kernel K(x) = 1 / (2 + e^x + e^-x), i.e. the real
/// part of the [1,1] entry of (2I + exp(T) + exp(-T))^-1. Throws SingularKernel.
double logistic_kernel_real(const Tessarine& t);

/// Lifts a scalar analytic function to the tessarines through the eigenchannels:
/// f(T) = V diag(f(z+), f(z-)) V^-1.
template<class F>
Tessarine tess_apply(F&& f, const Tessarine& t)
{
  const auto ch = channels(t);
  return from_channels(f(ch.plus), f(ch.minus));
}

Quaternion quat_mul(const Quaternion& p, const Quaternion& q);

/// Dense 2x2 complex matrix, kept as the reference representation of a tessarine.
class ComplexMatrix2
{
public:
  ComplexMatrix2() = default;
  ComplexMatrix2(Complex m00, Complex m01, Complex m10, Complex m11)
    : m_{ m00, m01, m10, m11 }
  {
  }

  static ComplexMatrix2 identity() { return { 1.0, 0.0, 0.0, 1.0 }; }
  /// (a+bi) I2 + (c+di) J2.
  static ComplexMatrix2 from_tessarine(const Tessarine& t);

  /// Reads a, b from the diagonal and c, d from the off-diagonal; throws
  /// DomainError when the matrix is not of tessarine form (within tol).
  Tessarine to_tessarine(double tol = 1e-12) const;

  Complex operator()(int row, int col) const { return m_[2 * row + col]; }
  Complex& operator()(int row, int col) { return m_[2 * row + col]; }

  Complex det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }
  ComplexMatrix2 inverse() const;

  /// Truncated power series sum_{l < terms} M^l / l!.
  ComplexMatrix2 exp_series(int terms = 50) const;

  friend ComplexMatrix2 operator*(const ComplexMatrix2& x, const ComplexMatrix2& y);
  friend ComplexMatrix2 operator+(const ComplexMatrix2& x, const ComplexMatrix2& y);
  friend ComplexMatrix2 operator*(Complex s, const ComplexMatrix2& x);

  double max_abs_diff(const ComplexMatrix2& other) const;

private:
  std::array<Complex, 4> m_{};
};

} // namespace tessera
