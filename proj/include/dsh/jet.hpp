#pragma once
// Truncated multivariate Taylor arithmetic ("jets") in the 4 chart parameters.
//
// A Jet stores the Taylor coefficients (derivative / multi-factorial) of a
// complex-valued function at a point, for all monomials of total degree <= deg,
// deg <= 4. Degree 4 is enough for the quartic Casimir; every operator
// application consumes one degree. Products truncate exactly, so all derivative
// extraction below is exact up to roundoff -- no step-size tuning involved.

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dsh {

using cplx = std::complex<double>;

namespace jet_detail {

constexpr int kVars = 4;
constexpr int kMaxDeg = 4;
constexpr int kTerms = 70;  // C(4+4,4): multi-indices in 4 vars, total degree <= 4

struct Tables {
  std::array<std::array<std::uint8_t, kVars>, kTerms> expo{};  // monomial exponents
  std::array<std::uint8_t, kTerms> tdeg{};                     // total degree
  std::array<int, kMaxDeg + 2> deg_begin{};                    // graded layout offsets
  std::array<std::array<int, kTerms>, kTerms> prod{};          // index of monomial product, -1 if deg>4
  std::array<std::array<int, kVars>, kTerms> shift_down{};     // index of alpha - e_k, -1 if alpha_k==0

  Tables() {
    int n = 0;
    for (int d = 0; d <= kMaxDeg; ++d) {
      deg_begin[d] = n;
      for (int e0 = d; e0 >= 0; --e0)
        for (int e1 = d - e0; e1 >= 0; --e1)
          for (int e2 = d - e0 - e1; e2 >= 0; --e2) {
            int e3 = d - e0 - e1 - e2;
            expo[n] = {std::uint8_t(e0), std::uint8_t(e1), std::uint8_t(e2), std::uint8_t(e3)};
            tdeg[n] = std::uint8_t(d);
            ++n;
          }
    }
    deg_begin[kMaxDeg + 1] = n;

    auto find = [&](std::array<int, kVars> e) {
      int d = e[0] + e[1] + e[2] + e[3];
      if (d > kMaxDeg) return -1;
      for (int i = deg_begin[d]; i < deg_begin[d + 1]; ++i)
        if (expo[i][0] == e[0] && expo[i][1] == e[1] && expo[i][2] == e[2] && expo[i][3] == e[3])
          return i;
      return -1;
    };

    for (int i = 0; i < kTerms; ++i)
      for (int j = 0; j < kTerms; ++j)
        prod[i][j] = find({expo[i][0] + expo[j][0], expo[i][1] + expo[j][1],
                           expo[i][2] + expo[j][2], expo[i][3] + expo[j][3]});

    for (int i = 0; i < kTerms; ++i)
      for (int k = 0; k < kVars; ++k) {
        if (expo[i][k] == 0) { shift_down[i][k] = -1; continue; }
        std::array<int, kVars> e{int(expo[i][0]), int(expo[i][1]), int(expo[i][2]), int(expo[i][3])};
        e[k] -= 1;
        shift_down[i][k] = find(e);
      }
  }
};

inline const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace jet_detail

class Jet {
 public:
  static constexpr int kVars = jet_detail::kVars;
  static constexpr int kMaxDeg = jet_detail::kMaxDeg;

  Jet() : deg_(0) { c_.fill(cplx(0.0)); }

  static Jet constant(cplx v, int deg) {
    Jet j;
    j.deg_ = check_deg(deg);
    j.c_[0] = v;
    return j;
  }

  // The seed for chart parameter k: value x0, unit first derivative.
  static Jet variable(int k, cplx x0, int deg) {
    Jet j = constant(x0, deg);
    if (deg >= 1) j.c_[1 + k] = cplx(1.0);
    return j;
  }

  int degree() const { return deg_; }
  cplx value() const { return c_[0]; }

  // First partial w.r.t. variable k (valid for deg >= 1).
  cplx d1(int k) const { return c_[1 + k]; }

  cplx coeff(int idx) const { return c_[idx]; }
  cplx& coeff(int idx) { return c_[idx]; }
  static int terms(int deg) { return jet_detail::tables().deg_begin[deg + 1]; }

  Jet truncated(int deg) const {
    Jet r = *this;
    r.deg_ = check_deg(deg);
    for (int i = terms(r.deg_); i < jet_detail::kTerms; ++i) r.c_[i] = cplx(0.0);
    return r;
  }

  friend Jet operator+(const Jet& a, const Jet& b) {
    Jet r;
    r.deg_ = std::min(a.deg_, b.deg_);
    for (int i = 0; i < terms(r.deg_); ++i) r.c_[i] = a.c_[i] + b.c_[i];
    return r;
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    Jet r;
    r.deg_ = std::min(a.deg_, b.deg_);
    for (int i = 0; i < terms(r.deg_); ++i) r.c_[i] = a.c_[i] - b.c_[i];
    return r;
  }
  Jet operator-() const {
    Jet r = *this;
    for (int i = 0; i < terms(deg_); ++i) r.c_[i] = -r.c_[i];
    return r;
  }
  friend Jet operator+(const Jet& a, cplx s) { Jet r = a; r.c_[0] += s; return r; }
  friend Jet operator+(cplx s, const Jet& a) { return a + s; }
  friend Jet operator-(const Jet& a, cplx s) { Jet r = a; r.c_[0] -= s; return r; }
  friend Jet operator-(cplx s, const Jet& a) { return (-a) + s; }
  friend Jet operator*(const Jet& a, cplx s) {
    Jet r = a;
    for (int i = 0; i < terms(r.deg_); ++i) r.c_[i] *= s;
    return r;
  }
  friend Jet operator*(cplx s, const Jet& a) { return a * s; }
  friend Jet operator/(const Jet& a, cplx s) { return a * (cplx(1.0) / s); }

  friend Jet operator*(const Jet& a, const Jet& b) {
    const auto& T = jet_detail::tables();
    Jet r;
    r.deg_ = std::min(a.deg_, b.deg_);
    const int na = terms(r.deg_);
    for (int i = 0; i < na; ++i) {
      if (a.c_[i] == cplx(0.0)) continue;
      const int rem = r.deg_ - T.tdeg[i];
      const int nb = terms(rem);
      for (int j = 0; j < nb; ++j) {
        if (b.c_[j] == cplx(0.0)) continue;
        r.c_[T.prod[i][j]] += a.c_[i] * b.c_[j];
      }
    }
    return r;
  }

  // d/dx_k as a jet of one lower degree.
  Jet derivative(int k) const {
    const auto& T = jet_detail::tables();
    Jet r;
    r.deg_ = deg_ > 0 ? deg_ - 1 : 0;
    for (int i = 0; i < terms(deg_); ++i) {
      int j = T.shift_down[i][k];
      if (j >= 0) r.c_[j] += double(T.expo[i][k]) * c_[i];
    }
    return r;
  }

  // f(u) where f has Taylor coefficients coef[m] = f^(m)(u.value())/m! .
  // Exact through degree deg because (u - u0) has no constant term.
  static Jet compose(const Jet& u, const cplx* coef, int ncoef) {
    Jet du = u;
    du.c_[0] = cplx(0.0);
    int last = std::min(ncoef - 1, u.deg_);
    Jet r = constant(coef[last], u.deg_);
    for (int m = last - 1; m >= 0; --m) r = r * du + coef[m];
    return r;
  }

 private:
  static int check_deg(int d) {
    if (d < 0 || d > kMaxDeg) throw std::invalid_argument("jet degree out of range");
    return d;
  }
  std::array<cplx, jet_detail::kTerms> c_;
  int deg_;
};

// --- elementary functions via univariate Taylor composition ----------------

namespace jet_detail {

// coef[m] = f^(m)(u0)/m! for the listed functions, m <= kMaxDeg.
inline void taylor_exp(cplx u0, cplx* c) {
  cplx e = std::exp(u0);
  double f = 1.0;
  for (int m = 0; m <= kMaxDeg; ++m) { c[m] = e / f; f *= (m + 1); }
}
inline void taylor_log(cplx u0, cplx* c) {
  c[0] = std::log(u0);
  cplx iu = cplx(1.0) / u0, p = iu;
  for (int m = 1; m <= kMaxDeg; ++m) {
    c[m] = (m % 2 ? p : -p) / double(m);
    p *= iu;
  }
}
inline void taylor_pow(cplx u0, cplx a, cplx* c) {  // u^a, principal branch
  c[0] = std::pow(u0, a);
  for (int m = 1; m <= kMaxDeg; ++m) c[m] = c[m - 1] * (a - double(m - 1)) / (double(m) * u0);
}
inline void taylor_sin_cos(cplx u0, cplx* cs, cplx* cc) {
  cplx s = std::sin(u0), co = std::cos(u0);
  const cplx d[4] = {s, co, -s, -co};
  double f = 1.0;
  for (int m = 0; m <= kMaxDeg; ++m) {
    cs[m] = d[m % 4] / f;
    cc[m] = d[(m + 1) % 4] / f;
    f *= (m + 1);
  }
}
inline void taylor_sinh_cosh(cplx u0, cplx* cs, cplx* cc) {
  cplx s = std::sinh(u0), co = std::cosh(u0);
  double f = 1.0;
  for (int m = 0; m <= kMaxDeg; ++m) {
    cs[m] = (m % 2 ? co : s) / f;
    cc[m] = (m % 2 ? s : co) / f;
    f *= (m + 1);
  }
}

}  // namespace jet_detail

inline Jet exp(const Jet& u)  { cplx c[5]; jet_detail::taylor_exp(u.value(), c);  return Jet::compose(u, c, 5); }
inline Jet log(const Jet& u)  { cplx c[5]; jet_detail::taylor_log(u.value(), c);  return Jet::compose(u, c, 5); }
inline Jet pow(const Jet& u, cplx a) { cplx c[5]; jet_detail::taylor_pow(u.value(), a, c); return Jet::compose(u, c, 5); }
inline Jet sqrt(const Jet& u) { return pow(u, cplx(0.5)); }
inline Jet inv(const Jet& u)  { return pow(u, cplx(-1.0)); }
inline Jet sin(const Jet& u)  { cplx s[5], c[5]; jet_detail::taylor_sin_cos(u.value(), s, c); return Jet::compose(u, s, 5); }
inline Jet cos(const Jet& u)  { cplx s[5], c[5]; jet_detail::taylor_sin_cos(u.value(), s, c); return Jet::compose(u, c, 5); }
inline Jet sinh(const Jet& u) { cplx s[5], c[5]; jet_detail::taylor_sinh_cosh(u.value(), s, c); return Jet::compose(u, s, 5); }
inline Jet cosh(const Jet& u) { cplx s[5], c[5]; jet_detail::taylor_sinh_cosh(u.value(), s, c); return Jet::compose(u, c, 5); }
inline Jet tan(const Jet& u)  { return sin(u) * inv(cos(u)); }
inline Jet tanh(const Jet& u) { return sinh(u) * inv(cosh(u)); }
inline Jet coth(const Jet& u) { return cosh(u) * inv(sinh(u)); }

inline Jet operator/(const Jet& a, const Jet& b) { return a * inv(b); }
inline Jet operator/(cplx s, const Jet& b) { return inv(b) * s; }

// Solve the n x n jet-valued linear system A c = rhs in place (n <= 5).
// Jets form a commutative ring; pivoting is on the value part. Used for
// pushing generator vector fields through chart maps.
inline void jet_solve(std::vector<std::vector<Jet>>& A, std::vector<Jet>& rhs) {
  const int n = static_cast<int>(rhs.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(A[col][col].value());
    for (int r = col + 1; r < n; ++r) {
      double m = std::abs(A[r][col].value());
      if (m > best) { best = m; piv = r; }
    }
    if (best < 1e-13) throw std::runtime_error("jet_solve: singular system");
    std::swap(A[piv], A[col]);
    std::swap(rhs[piv], rhs[col]);
    Jet ipiv = inv(A[col][col]);
    for (int r = col + 1; r < n; ++r) {
      Jet f = A[r][col] * ipiv;
      for (int c2 = col; c2 < n; ++c2) A[r][c2] = A[r][c2] - f * A[col][c2];
      rhs[r] = rhs[r] - f * rhs[col];
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    Jet s = rhs[col];
    for (int c2 = col + 1; c2 < n; ++c2) s = s - A[col][c2] * rhs[c2];
    rhs[col] = s * inv(A[col][col]);
  }
}

}  // namespace dsh
