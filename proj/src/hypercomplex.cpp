#include "tessera/hypercomplex.hpp"

#include "tessera/errors.hpp"

#include <algorithm>
#include <sstream>

namespace tessera {

namespace {

constexpr double kSingularTol = 1e-12;

Complex ipow(Complex z, unsigned n)
{
  Complex result{ 1.0, 0.0 };
  while (n > 0) {
    if (n & 1U)
      result *= z;
    z *= z;
    n >>= 1U;
  }
  return result;
}

// G(z) = 1 / (1 + e^-z), evaluated on the side that cannot overflow.
// Returns false at a pole.
bool expit_channel(Complex z, Complex& out)
{
  if (z.real() >= 0.0) {
    const Complex e = std::exp(-z);
    const Complex den = 1.0 + e;
    if (std::abs(den) < kSingularTol * (1.0 + std::abs(e)))
      return false;
    out = 1.0 / den;
  } else {
    const Complex e = std::exp(z);
    const Complex den = 1.0 + e;
    if (std::abs(den) < kSingularTol * (1.0 + std::abs(e)))
      return false;
    out = e / den;
  }
  return true;
}

// K(z) = 1 / (2 + e^z + e^-z) = e^-z / (1 + e^-z)^2 for Re z >= 0.
bool kernel_channel(Complex z, Complex& out)
{
  const Complex e = z.real() >= 0.0 ? std::exp(-z) : std::exp(z);
  const Complex den = 1.0 + e;
  if (std::abs(den) < kSingularTol * (1.0 + std::abs(e)))
    return false;
  out = e / (den * den);
  return true;
}

std::string describe(const Tessarine& t)
{
  std::ostringstream os;
  os << "(" << t.a << ", " << t.b << ", " << t.c << ", " << t.d << ")";
  return os.str();
}

} // namespace

Eigenchannels channels(const Tessarine& t)
{
  return { Complex(t.a + t.c, t.b + t.d), Complex(t.a - t.c, t.b - t.d) };
}

Tessarine from_channels(Complex plus, Complex minus)
{
  const Complex diag = 0.5 * (plus + minus);
  const Complex off = 0.5 * (plus - minus);
  return { diag.real(), diag.imag(), off.real(), off.imag() };
}

// Pairs are grouped so that swapping s and t permutes terms only inside each
// two-term sum, which keeps the product bitwise commutative.
Tessarine tess_mul(const Tessarine& s, const Tessarine& t)
{
  return {
    (s.a * t.a + s.c * t.c) - (s.b * t.b + s.d * t.d),
    (s.a * t.b + s.b * t.a) + (s.c * t.d + s.d * t.c),
    (s.a * t.c + s.c * t.a) - (s.b * t.d + s.d * t.b),
    (s.a * t.d + s.d * t.a) + (s.b * t.c + s.c * t.b),
  };
}

Tessarine tess_pow(const Tessarine& t, unsigned power)
{
  if (power == 0)
    return Tessarine::one();
  if (power == 1)
    return t;
  const auto ch = channels(t);
  return from_channels(ipow(ch.plus, power), ipow(ch.minus, power));
}

double tess_real_pow(const Tessarine& t, unsigned power)
{
  if (power == 0)
    return 1.0;
  if (power == 1)
    return t.a;
  const auto ch = channels(t);
  const double l = static_cast<double>(power);
  const auto term = [l](Complex z) {
    return std::pow(std::abs(z), l) * std::cos(l * std::arg(z));
  };
  return 0.5 * (term(ch.minus) + term(ch.plus));
}

Tessarine tess_exp(const Tessarine& t)
{
  const Complex p(t.a, t.b);
  const Complex q(t.c, t.d);
  const Complex ep = std::exp(p);
  const Complex diag = ep * std::cosh(q);
  const Complex off = ep * std::sinh(q);
  return { diag.real(), diag.imag(), off.real(), off.imag() };
}

Tessarine tess_reciprocal(const Tessarine& t)
{
  const auto ch = channels(t);
  const double tol = kSingularTol * (1.0 + t.norm());
  if (std::abs(ch.plus) < tol)
    throw ZeroDivisor(ZeroDivisor::Channel::Plus,
                      "tessarine " + describe(t) + " is a zero divisor: (a+c)+i(b+d) vanishes");
  if (std::abs(ch.minus) < tol)
    throw ZeroDivisor(ZeroDivisor::Channel::Minus,
                      "tessarine " + describe(t) + " is a zero divisor: (a-c)+i(b-d) vanishes");
  return from_channels(1.0 / ch.plus, 1.0 / ch.minus);
}

double expit_real(const Tessarine& t)
{
  const auto ch = channels(t);
  Complex gp, gm;
  if (!expit_channel(ch.plus, gp) || !expit_channel(ch.minus, gm))
    throw SingularExpit("expit is singular at tessarine " + describe(t));
  return 0.5 * (gp.real() + gm.real());
}

double expit_mul_real(const Tessarine& t, const Tessarine& s)
{
  const auto ch = channels(t);
  Complex gp, gm;
  if (!expit_channel(ch.plus, gp) || !expit_channel(ch.minus, gm))
    throw SingularExpit("expit is singular at tessarine " + describe(t));
  const auto sc = channels(s);
  return 0.5 * ((gp * sc.plus).real() + (gm * sc.minus).real());
}

double logistic_kernel_real(const Tessarine& t)
{
  const auto ch = channels(t);
  Complex kp, km;
  if (!kernel_channel(ch.plus, kp) || !kernel_channel(ch.minus, km))
    throw SingularKernel("logistic kernel is singular at tessarine " + describe(t));
  return 0.5 * (kp.real() + km.real());
}

Quaternion quat_mul(const Quaternion& p, const Quaternion& q)
{
  return {
    p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
    p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
    p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
    p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
  };
}

ComplexMatrix2 ComplexMatrix2::from_tessarine(const Tessarine& t)
{
  const Complex diag(t.a, t.b);
  const Complex off(t.c, t.d);
  return { diag, off, off, diag };
}

Tessarine ComplexMatrix2::to_tessarine(double tol) const
{
  const double scale = 1.0 + std::max({ std::abs(m_[0]), std::abs(m_[1]), std::abs(m_[2]),
                                        std::abs(m_[3]) });
  if (std::abs(m_[0] - m_[3]) > tol * scale || std::abs(m_[1] - m_[2]) > tol * scale)
    throw DomainError("matrix is not of the form (a+bi)I + (c+di)J");
  const Complex diag = 0.5 * (m_[0] + m_[3]);
  const Complex off = 0.5 * (m_[1] + m_[2]);
  return { diag.real(), diag.imag(), off.real(), off.imag() };
}

ComplexMatrix2 ComplexMatrix2::inverse() const
{
  const Complex det_ = det();
  if (det_ == Complex(0.0, 0.0))
    throw DomainError("singular 2x2 complex matrix");
  return { m_[3] / det_, -m_[1] / det_, -m_[2] / det_, m_[0] / det_ };
}

ComplexMatrix2 ComplexMatrix2::exp_series(int terms) const
{
  ComplexMatrix2 sum = identity();
  ComplexMatrix2 term = identity();
  for (int l = 1; l < terms; ++l) {
    term = Complex(1.0 / l, 0.0) * (term * *this);
    sum = sum + term;
  }
  return sum;
}

ComplexMatrix2 operator*(const ComplexMatrix2& x, const ComplexMatrix2& y)
{
  return {
    x(0, 0) * y(0, 0) + x(0, 1) * y(1, 0),
    x(0, 0) * y(0, 1) + x(0, 1) * y(1, 1),
    x(1, 0) * y(0, 0) + x(1, 1) * y(1, 0),
    x(1, 0) * y(0, 1) + x(1, 1) * y(1, 1),
  };
}

ComplexMatrix2 operator+(const ComplexMatrix2& x, const ComplexMatrix2& y)
{
  return { x(0, 0) + y(0, 0), x(0, 1) + y(0, 1), x(1, 0) + y(1, 0), x(1, 1) + y(1, 1) };
}

ComplexMatrix2 operator*(Complex s, const ComplexMatrix2& x)
{
  return { s * x(0, 0), s * x(0, 1), s * x(1, 0), s * x(1, 1) };
}

double ComplexMatrix2::max_abs_diff(const ComplexMatrix2& other) const
{
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    worst = std::max(worst, std::abs(m_[i] - other.m_[i]));
  return worst;
}

} // namespace tessera
