#pragma once
// Special functions needed by the harmonic-analysis kernels:
//   * Gamma on C (Lanczos + reflection), log-Gamma, |Gamma|
//   * Gauss hypergeometric 2F1 for complex parameters and real argument,
//     with the z/(z-1) and 1-z connection formulas and a double-double
//     series fallback for the near-degenerate corner
//   * Associated Legendre P^mu_nu on the cut (-1,1) and on the real axis x>1
//     for the complex orders/degrees the eigenfunction families use
//   * Integer Ferrers functions P_l^m (stable normalized recurrence)
//   * Bessel J_nu (real nu >= -3/2)
//   * Macdonald K_{i rho}(x) of imaginary order
//   * Orthonormal spherical harmonics on S^2 and S^3
// plus Taylor-coefficient providers (value + ODE extension) so jets can
// differentiate through every factor exactly.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "dsh/jet.hpp"

namespace dsh {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct AccuracyReport {
  cplx value;
  double abs_err;  // coarse upper bound
};

// ---------------------------------------------------------------------------
// Gamma
// ---------------------------------------------------------------------------

namespace detail {

// Godfrey's 15-term Lanczos set, g = 607/128. ~15 significant digits on the
// half-plane Re z > 0.
inline constexpr double kLanczosG = 4.7421875;
inline constexpr double kLanczos[15] = {
    0.99999999999999709182,     57.156235665862923517,     -59.597960355475491248,
    14.136097974741747174,     -0.49191381609762019978,    0.33994649984811888699e-4,
    0.46523628927048575665e-4, -0.98374475304879564677e-4, 0.15808870322491248884e-3,
    -0.21026444172410488319e-3, 0.21743961811521264320e-3, -0.16431810653676389022e-3,
    0.84418223983852743293e-4, -0.26190838401581408670e-4, 0.36899182659531622704e-5};

inline cplx lanczos_lgamma_pos(cplx z) {  // requires Re z >= 0.5
  cplx zm1 = z - 1.0;
  cplx s = kLanczos[0];
  for (int k = 1; k < 15; ++k) s += kLanczos[k] / (zm1 + double(k));
  cplx t = zm1 + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (zm1 + 0.5) * std::log(t) - t + std::log(s);
}

// log(sin(pi z)) stable for large |Im z|.
inline cplx log_sin_pi(cplx z) {
  if (std::abs(z.imag()) < 20.0) return std::log(std::sin(kPi * z));
  const cplx i(0.0, 1.0);
  if (z.imag() > 0.0) {  // sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z})
    return std::log(cplx(0.0, 0.5)) - i * kPi * z + std::log(1.0 - std::exp(2.0 * i * kPi * z));
  }
  return std::log(cplx(0.0, -0.5)) + i * kPi * z + std::log(1.0 - std::exp(-2.0 * i * kPi * z));
}

}  // namespace detail

// A logarithm of Gamma(z); exp(lgamma_complex(z)) == gamma_complex(z).
inline cplx lgamma_complex(cplx z) {
  if (z.real() >= 0.5) return detail::lanczos_lgamma_pos(z);
  // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
  return std::log(cplx(kPi)) - detail::log_sin_pi(z) - detail::lanczos_lgamma_pos(1.0 - z);
}

inline cplx gamma_complex(cplx z) {
  if (z.real() >= 0.5) return std::exp(detail::lanczos_lgamma_pos(z));
  cplx s = std::sin(kPi * z);
  if (s == cplx(0.0)) throw std::domain_error("gamma_complex: pole at nonpositive integer");
  if (std::abs(z.imag()) < 20.0) return kPi / (s * std::exp(detail::lanczos_lgamma_pos(1.0 - z)));
  return std::exp(std::log(cplx(kPi)) - detail::log_sin_pi(z) -
                  detail::lanczos_lgamma_pos(1.0 - z));
}

inline double lgamma_abs(cplx z) { return lgamma_complex(z).real(); }
inline double gamma_abs(cplx z) { return std::exp(lgamma_abs(z)); }

// Gamma(num)/Gamma(den) through log space; safe when both are large or tiny.
inline cplx gamma_ratio(cplx num, cplx den) {
  return std::exp(lgamma_complex(num) - lgamma_complex(den));
}

inline AccuracyReport gamma_complex_acc(cplx z) {
  cplx v = gamma_complex(z);
  double rel = 5e-15 * (1.0 + 0.05 * std::abs(z));
  if (z.real() < 0.5) rel *= 10.0;  // reflection conditioning
  return {v, std::abs(v) * rel};
}

// ---------------------------------------------------------------------------
// Double-double helpers (series fallback only)
// ---------------------------------------------------------------------------

namespace detail {

struct DD {
  double hi = 0.0, lo = 0.0;
};

inline DD dd_two_sum(double a, double b) {
  double s = a + b, bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}
inline DD dd_add(DD a, DD b) {
  DD s = dd_two_sum(a.hi, b.hi);
  double lo = s.lo + a.lo + b.lo;
  DD r = dd_two_sum(s.hi, lo);
  return r;
}
inline DD dd_mul(DD a, DD b) {
  double p = a.hi * b.hi;
  double e = std::fma(a.hi, b.hi, -p);
  e += a.hi * b.lo + a.lo * b.hi;
  DD r = dd_two_sum(p, e);
  return r;
}
inline DD dd_from(double x) { return {x, 0.0}; }
inline DD dd_div(DD a, DD b) {
  double q1 = a.hi / b.hi;
  double p = q1 * b.hi;
  double e = std::fma(q1, b.hi, -p);
  DD r = dd_add(a, {-p, -(e + q1 * b.lo)});
  double q2 = (r.hi + r.lo) / b.hi;
  DD q = dd_two_sum(q1, q2);
  return q;
}

struct DDC {
  DD re, im;
};
inline DDC ddc_from(cplx z) { return {dd_from(z.real()), dd_from(z.imag())}; }
inline DDC ddc_add(DDC a, DDC b) { return {dd_add(a.re, b.re), dd_add(a.im, b.im)}; }
inline DDC ddc_mul(DDC a, DDC b) {
  DD re = dd_add(dd_mul(a.re, b.re), dd_mul(dd_mul(a.im, b.im), dd_from(-1.0)));
  DD im = dd_add(dd_mul(a.re, b.im), dd_mul(a.im, b.re));
  return {re, im};
}
inline DDC ddc_div(DDC a, DDC b) {
  DD n = dd_add(dd_mul(b.re, b.re), dd_mul(b.im, b.im));
  DDC conj{b.re, dd_mul(b.im, dd_from(-1.0))};
  DDC p = ddc_mul(a, conj);
  return {dd_div(p.re, n), dd_div(p.im, n)};
}
inline cplx ddc_value(DDC a) { return {a.re.hi + a.re.lo, a.im.hi + a.im.lo}; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Gauss 2F1
// ---------------------------------------------------------------------------

namespace detail {

inline bool near_nonpos_int(cplx c, double tol = 1e-12) {
  double r = std::round(c.real());
  return r <= 0.0 && std::abs(c.real() - r) < tol && std::abs(c.imag()) < tol;
}

// Direct series; requires |z| < 1 (practically |z| <= ~0.6 for full accuracy
// in double). amp_out receives sum(|t_n|)/|F|, the cancellation amplification.
inline cplx hyp2f1_series(cplx a, cplx b, cplx c, double z, double* amp_out = nullptr) {
  if (near_nonpos_int(c)) {
    // allowed only if the series terminates first through a or b
    double ra = std::round(a.real()), rb = std::round(b.real());
    bool poly = (near_nonpos_int(a) && ra >= c.real() - 0.5) || (near_nonpos_int(b) && rb >= c.real() - 0.5);
    if (!poly) throw std::domain_error("gauss_2f1: c at nonpositive integer");
  }
  cplx sum = 1.0, term = 1.0, comp = 0.0;
  double abs_sum = 1.0;
  for (int n = 0; n < 4000; ++n) {
    term *= (a + double(n)) * (b + double(n)) * z / ((c + double(n)) * double(n + 1));
    // Kahan update
    cplx y = term - comp;
    cplx t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    abs_sum += std::abs(term);
    if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) {
      if (amp_out) *amp_out = abs_sum / (std::abs(sum) + 1e-300);
      return sum;
    }
  }
  throw std::runtime_error("gauss_2f1: series did not converge");
}

inline cplx hyp2f1_series_dd(cplx a, cplx b, cplx c, double z) {
  DDC sum = ddc_from(1.0), term = ddc_from(1.0);
  for (int n = 0; n < 40000; ++n) {
    DDC num = ddc_mul(ddc_from(a + double(n)), ddc_from(b + double(n)));
    num = ddc_mul(num, ddc_from(z));
    DDC den = ddc_mul(ddc_from(c + double(n)), ddc_from(double(n + 1)));
    term = ddc_div(ddc_mul(term, num), den);
    sum = ddc_add(sum, term);
    if (std::abs(ddc_value(term)) < 1e-26 * (std::abs(ddc_value(sum)) + 1e-300))
      return ddc_value(sum);
  }
  throw std::runtime_error("gauss_2f1: dd series did not converge");
}

inline cplx hyp2f1_impl(cplx a, cplx b, cplx c, double z, double* amp);

// 1-z connection, generic parameters (c-a-b not an integer).
inline cplx hyp2f1_connect_1mz(cplx a, cplx b, cplx c, double z, double* amp) {
  cplx cab = c - a - b;
  // Denominator gamma at a pole kills the whole term (limit of the formula).
  auto coef = [](cplx p, cplx q, cplx d1, cplx d2) -> cplx {
    auto pole = [](cplx w) {
      return w.imag() == 0.0 && w.real() <= 0.5 &&
             std::abs(w.real() - std::round(w.real())) < 1e-12;
    };
    if (pole(d1) || pole(d2)) return 0.0;
    return std::exp(lgamma_complex(p) + lgamma_complex(q) - lgamma_complex(d1) -
                    lgamma_complex(d2));
  };
  cplx g1 = coef(c, cab, c - a, c - b);
  cplx g2 = coef(c, -cab, a, b);
  double amp1 = 1.0, amp2 = 1.0;
  cplx f1 = g1 == 0.0 ? cplx(0.0) : hyp2f1_impl(a, b, a + b - c + 1.0, 1.0 - z, &amp1);
  cplx f2 = g2 == 0.0 ? cplx(0.0) : hyp2f1_impl(c - a, c - b, cab + 1.0, 1.0 - z, &amp2);
  cplx t1 = g1 * f1;
  cplx t2 = g2 * std::pow(cplx(1.0 - z), cab) * f2;
  cplx r = t1 + t2;
  if (amp) *amp = (std::abs(t1) * amp1 + std::abs(t2) * amp2) / (std::abs(r) + 1e-300);
  return r;
}

inline cplx hyp2f1_impl(cplx a, cplx b, cplx c, double z, double* amp) {
  if (amp) *amp = 1.0;
  if (z == 0.0) return 1.0;
  if (z >= 1.0) throw std::domain_error("gauss_2f1: z >= 1 unsupported");
  if (z <= -1e8) throw std::domain_error("gauss_2f1: z too negative");
  if (std::abs(z) <= 0.55) return hyp2f1_series(a, b, c, z, amp);
  if (z < 0.0) {  // Pfaff z -> z/(z-1) in (0,1)
    double w = z / (z - 1.0);
    cplx f = hyp2f1_impl(a, c - b, c, w, amp);
    return std::pow(cplx(1.0 - z), -a) * f;
  }
  // 0.55 < z < 1
  cplx cab = c - a - b;
  double dist = std::abs(cab - std::round(cab.real()));
  if (dist < 1e-4) {  // connection formula degenerates; extended-precision series
    // A terminating series is a polynomial, valid arbitrarily close to z=1.
    if (near_nonpos_int(a) || near_nonpos_int(b) || z <= 0.997)
      return hyp2f1_series_dd(a, b, c, z);
    throw std::domain_error("gauss_2f1: degenerate c-a-b too close to z=1");
  }
  double amp_conn = 1.0;
  cplx r = hyp2f1_connect_1mz(a, b, c, z, &amp_conn);
  if (amp_conn > 1e4 && z <= 0.997) {
    // the two connection terms cancel heavily (large imaginary parameters);
    // the direct series in double-double stays accurate there
    if (amp) *amp = 1.0;
    return hyp2f1_series_dd(a, b, c, z);
  }
  if (amp) *amp = amp_conn;
  return r;
}

}  // namespace detail

inline cplx gauss_2f1(cplx a, cplx b, cplx c, double z) {
  return detail::hyp2f1_impl(a, b, c, z, nullptr);
}

inline AccuracyReport gauss_2f1_acc(cplx a, cplx b, cplx c, double z) {
  double amp = 1.0;
  cplx v = detail::hyp2f1_impl(a, b, c, z, &amp);
  return {v, std::abs(v) * 1e-16 * std::max(1.0, amp) * 4.0 + 1e-300};
}

// d/dz 2F1(a,b;c;z) = (ab/c) 2F1(a+1,b+1;c+1;z)
inline cplx gauss_2f1_deriv(cplx a, cplx b, cplx c, double z) {
  return a * b / c * gauss_2f1(a + 1.0, b + 1.0, c + 1.0, z);
}

// ---------------------------------------------------------------------------
// Taylor extension of linear 2nd-order ODE solutions
// ---------------------------------------------------------------------------

namespace detail {

// y'' = p y' + q y. p, q supplied as axis-0 jets at the expansion point;
// returns Taylor coefficients c[0..4] of y given y(x0), y'(x0).
inline std::array<cplx, 5> ode2_taylor(const Jet& p, const Jet& q, cplx y0, cplx dy0) {
  // axis-0 pure power x0^k has index deg_begin[k] (first monomial of its degree)
  auto c_of = [](const Jet& j, int k) {
    static const int idx[5] = {0, 1, 5, 15, 35};
    return j.coeff(idx[k]);
  };
  std::array<cplx, 5> c{y0, dy0, 0.0, 0.0, 0.0};
  for (int k = 0; k + 2 <= 4; ++k) {
    cplx s = 0.0;
    for (int i = 0; i <= k; ++i)
      s += double(i + 1) * c[i + 1] * c_of(p, k - i) + c[i] * c_of(q, k - i);
    c[k + 2] = s / double((k + 1) * (k + 2));
  }
  return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Associated Legendre, complex order/degree
// ---------------------------------------------------------------------------

namespace detail {

// Ferrers branch, -1 < x < 1:
//   P^mu_nu(x) = ((1+x)/(1-x))^{mu/2} / Gamma(1-mu) * F(-nu, nu+1; 1-mu; (1-x)/2)
// For integer mu >= 1 the rep degenerates; use the integer-order relation.
inline cplx legendre_cut(cplx mu, cplx nu, double x) {
  double mur = std::round(mu.real());
  if (std::abs(mu.imag()) < 1e-13 && std::abs(mu.real() - mur) < 1e-13 && mur >= 1.0) {
    // Ferrers P^{-m}_nu = (-1)^m Gamma(nu-m+1)/Gamma(nu+m+1) P^m_nu
    int m = int(mur);
    cplx pneg = legendre_cut(cplx(-double(m)), nu, x);
    cplx ratio = std::exp(lgamma_complex(nu + double(m) + 1.0) - lgamma_complex(nu - double(m) + 1.0));
    return double(m % 2 ? -1 : 1) * ratio * pneg;
  }
  cplx f = gauss_2f1(-nu, nu + 1.0, 1.0 - mu, 0.5 * (1.0 - x));
  cplx pref = std::pow(cplx((1.0 + x) / (1.0 - x)), 0.5 * mu) *
              std::exp(-lgamma_complex(1.0 - mu));
  return pref * f;
}

// Real-axis branch, x > 1, moderate x:
//   P^mu_nu(x) = ((x+1)/(x-1))^{mu/2} / Gamma(1-mu) * F(-nu, nu+1; 1-mu; (1-x)/2)
inline cplx legendre_axis_near(cplx mu, cplx nu, double x) {
  double mur = std::round(mu.real());
  if (std::abs(mu.imag()) < 1e-13 && std::abs(mu.real() - mur) < 1e-13 && mur >= 1.0) {
    // real-axis P^{-m}_nu = Gamma(nu-m+1)/Gamma(nu+m+1) P^m_nu (no sign)
    int m = int(mur);
    cplx pneg = legendre_axis_near(cplx(-double(m)), nu, x);
    cplx ratio = std::exp(lgamma_complex(nu + double(m) + 1.0) - lgamma_complex(nu - double(m) + 1.0));
    return ratio * pneg;
  }
  cplx f = gauss_2f1(-nu, nu + 1.0, 1.0 - mu, 0.5 * (1.0 - x));
  cplx pref = std::pow(cplx((x + 1.0) / (x - 1.0)), 0.5 * mu) *
              std::exp(-lgamma_complex(1.0 - mu));
  return pref * f;
}

// Real-axis branch, large x: connection at infinity (needs 2nu+1 not integer),
//   P^mu_nu(x) = (x^2-1)^{mu/2} [ 2^nu x^{nu-mu} Gamma(nu+1/2)/(sqrt(pi) Gamma(nu-mu+1))
//                                   * F((mu-nu)/2, (mu-nu+1)/2; 1/2-nu; x^{-2})
//                               + (nu -> -nu-1 term) ]
inline cplx legendre_axis_far(cplx mu, cplx nu, double x) {
  cplx two_nu_p1 = 2.0 * nu + 1.0;
  if (std::abs(two_nu_p1.imag()) < 1e-6 &&
      std::abs(two_nu_p1.real() - std::round(two_nu_p1.real())) < 1e-6)
    throw std::domain_error("legendre_p: degree too close to half-integer for x >= 3");
  double iz2 = 1.0 / (x * x);
  cplx f1 = gauss_2f1(0.5 * (mu - nu), 0.5 * (mu - nu + 1.0), 0.5 - nu, iz2);
  cplx f2 = gauss_2f1(0.5 * (mu + nu + 1.0), 0.5 * (mu + nu + 2.0), nu + 1.5, iz2);
  const double ln2 = std::log(2.0), lnx = std::log(x);
  const double lnx2m1 = std::log(x * x - 1.0), half_lnpi = 0.5 * std::log(kPi);
  cplx lg1 = nu * ln2 + (nu - mu) * lnx + 0.5 * mu * lnx2m1 + lgamma_complex(nu + 0.5) -
             lgamma_complex(nu - mu + 1.0) - half_lnpi;
  cplx lg2 = -(nu + 1.0) * ln2 - (nu + mu + 1.0) * lnx + 0.5 * mu * lnx2m1 +
             lgamma_complex(-nu - 0.5) - lgamma_complex(-nu - mu) - half_lnpi;
  return std::exp(lg1) * f1 + std::exp(lg2) * f2;
}

}  // namespace detail

// Branch chosen by x: Ferrers on (-1,1), real-axis function for x > 1.
inline cplx legendre_p(cplx mu, cplx nu, double x) {
  if (x > -1.0 && x < 1.0) return detail::legendre_cut(mu, nu, x);
  if (x > 1.0) {
    if (x < 3.0) return detail::legendre_axis_near(mu, nu, x);
    return detail::legendre_axis_far(mu, nu, x);
  }
  throw std::domain_error("legendre_p: x must lie in (-1,1) or (1,inf)");
}

// dP/dx from the degree-raising relation; valid on both branches.
inline cplx legendre_p_deriv(cplx mu, cplx nu, double x) {
  cplx p0 = legendre_p(mu, nu, x);
  cplx p1 = legendre_p(mu, nu + 1.0, x);
  if (x > -1.0 && x < 1.0) return ((mu - nu - 1.0) * p1 + (nu + 1.0) * x * p0) / (1.0 - x * x);
  return ((nu - mu + 1.0) * p1 - (nu + 1.0) * x * p0) / (x * x - 1.0);
}

// Taylor coefficients around x0 via the Legendre ODE
//   y'' = 2x/(1-x^2) y' - [nu(nu+1) - mu^2/(1-x^2)]/(1-x^2) y
inline std::array<cplx, 5> legendre_p_taylor(cplx mu, cplx nu, double x0) {
  Jet x = Jet::variable(0, x0, 4);
  Jet omx2 = cplx(1.0) - x * x;
  Jet p = cplx(2.0) * x * inv(omx2);
  Jet q = -(nu * (nu + 1.0) - mu * mu * inv(omx2)) * inv(omx2);
  return detail::ode2_taylor(p, q, legendre_p(mu, nu, x0), legendre_p_deriv(mu, nu, x0));
}

inline AccuracyReport legendre_p_acc(cplx mu, cplx nu, double x) {
  cplx v = legendre_p(mu, nu, x);
  double scale = std::abs(v) + std::exp(std::abs(nu.imag()) * 0.0);  // O(|v|) + O(1) floor
  return {v, scale * 2e-13};
}

// ---------------------------------------------------------------------------
// Integer Ferrers P_l^m and spherical harmonics
// ---------------------------------------------------------------------------

// Fully normalized associated Legendre
//   Pbar_l^m = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_l^m   (m >= 0)
// via the standard stable recurrence; Condon-Shortley phase included.
inline double legendre_pbar(int l, int m, double x) {
  if (l < 0 || std::abs(m) > l) return 0.0;
  bool neg = m < 0;
  m = std::abs(m);
  double pmm = 1.0 / std::sqrt(4.0 * kPi);
  if (m > 0) {
    double s2 = (1.0 - x) * (1.0 + x);
    double s = s2 > 0.0 ? std::sqrt(s2) : 0.0;
    for (int k = 1; k <= m; ++k) pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
  }
  if (l == m) return neg ? (m % 2 ? -pmm : pmm) : pmm;
  double pm1 = x * std::sqrt(2.0 * m + 3.0) * pmm;
  if (l == m + 1) return neg ? (m % 2 ? -pm1 : pm1) : pm1;
  double p = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    double a = std::sqrt((4.0 * ll * ll - 1.0) / (double(ll) * ll - double(m) * m));
    double b = std::sqrt(((ll - 1.0) * (ll - 1.0) - double(m) * m) / (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
    p = a * (x * pm1 - b * pmm);
    pmm = pm1;
    pm1 = p;
  }
  // Pbar_l^{-m} = (-1)^m Pbar_l^m
  return neg ? (m % 2 ? -p : p) : p;
}

// Unnormalized Ferrers P_l^m (Condon-Shortley), any |m| <= l (moderate l).
inline double legendre_p_int(int l, int m, double x) {
  if (l < 0 || std::abs(m) > l) return 0.0;
  int am = std::abs(m);
  double norm = std::exp(0.5 * (std::lgamma(l + am + 1.0) - std::lgamma(l - am + 1.0)));
  double v = legendre_pbar(l, am, x) / std::sqrt((2.0 * l + 1.0) / (4.0 * kPi)) * norm;
  if (m < 0) {
    // P_l^{-m} = (-1)^m (l-m)!/(l+m)! P_l^m
    v *= (am % 2 ? -1.0 : 1.0) *
         std::exp(std::lgamma(l - am + 1.0) - std::lgamma(l + am + 1.0));
  }
  return v;
}

// Orthonormal Y_lm = sqrt((2l+1)/(4pi) (l-m)!/(l+m)!) P_l^m(cos th) e^{i m ph}
inline cplx sph_harm(int l, int m, double theta, double phi) {
  if (l < 0 || std::abs(m) > l) return 0.0;
  double plm = legendre_pbar(l, m, std::cos(theta));
  return plm * std::exp(cplx(0.0, m * phi));
}

// Theta part only (the e^{i m phi} factor split off), used by separable sums.
inline double sph_harm_theta(int l, int m, double theta) {
  return legendre_pbar(l, m, std::cos(theta));
}

// S^3 harmonic beta factor:
//   B_jl(beta) = [(j+1) Gamma(j+l+2)/Gamma(j-l+1)]^{1/2} (sin beta)^{-1/2}
//                  * P^{-l-1/2}_{j+1/2}(cos beta)
inline double sph_harm_3_beta(int j, int l, double beta) {
  if (j < 0 || l < 0 || l > j) return 0.0;
  double norm = std::sqrt(j + 1.0) *
                std::exp(0.5 * (std::lgamma(j + l + 2.0) - std::lgamma(j - l + 1.0)));
  cplx p = legendre_p(cplx(-l - 0.5), cplx(j + 0.5), std::cos(beta));
  return norm * p.real() / std::sqrt(std::sin(beta));
}

// Orthonormal S^3 harmonic, measure sin^2(beta) sin(theta) d beta d theta d phi.
inline cplx sph_harm_3(int j, int l, int m, double beta, double theta, double phi) {
  if (j < 0 || l < 0 || l > j || std::abs(m) > l) return 0.0;
  return sph_harm_3_beta(j, l, beta) * sph_harm(l, m, theta, phi);
}

// ---------------------------------------------------------------------------
// Bessel J_nu, real nu >= -3/2
// ---------------------------------------------------------------------------

namespace detail {

inline double bessel_j_series(double nu, double x) {
  // sum_k (-1)^k (x/2)^{nu+2k}/(k! Gamma(nu+k+1)); fine for x <= ~12
  double q = 0.25 * x * x;
  double lead;
  double g = std::tgamma(nu + 1.0);
  if (std::isfinite(g) && g != 0.0)
    lead = std::pow(0.5 * x, nu) / g;
  else
    lead = 0.0;  // nu at negative integer: leading term vanishes
  double sum = 0.0, term = lead;
  if (lead == 0.0) {  // start the series at the first nonvanishing k
    int k0 = int(std::ceil(-nu));
    term = (k0 % 2 ? -1.0 : 1.0) * std::pow(0.5 * x, nu + 2.0 * k0) /
           (std::tgamma(k0 + 1.0) * std::tgamma(nu + k0 + 1.0));
    sum = 0.0;
    for (int k = k0;; ++k) {
      sum += term;
      term *= -q / ((k + 1.0) * (nu + k + 1.0));
      if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300) && k > k0 + 4) return sum;
      if (k > 600) throw std::runtime_error("bessel_j: series stall");
    }
  }
  for (int k = 0;; ++k) {
    sum += term;
    term *= -q / ((k + 1.0) * (nu + k + 1.0));
    if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300) && k > 4) return sum;
    if (k > 600) throw std::runtime_error("bessel_j: series stall");
  }
}

// Hankel asymptotic expansion; accurate for x >= 12 and small order.
inline double bessel_j_asym(double nu, double x) {
  double mu = 4.0 * nu * nu;
  double p = 1.0, q = 0.0, term = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * x);
    if (k % 2 == 1)
      q += (k % 4 == 1 ? term : -term);
    else
      p += (k % 4 == 2 ? -term : term);
    if (std::abs(term) < 1e-17) break;
  }
  double w = x - (0.5 * nu + 0.25) * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(w) - q * std::sin(w));
}

}  // namespace detail

inline double bessel_j(double nu, double x) {
  if (x < 0.0 || nu < -1.5) throw std::domain_error("bessel_j: x >= 0, nu >= -3/2 required");
  if (x == 0.0) return nu == 0.0 ? 1.0 : (nu > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  if (x <= 12.0) return detail::bessel_j_series(nu, x);
  // split nu = f + n with f in [0,1)
  double f = nu - std::floor(nu);
  int n = int(std::floor(nu));
  double j0 = detail::bessel_j_asym(f, x);
  double j1 = detail::bessel_j_asym(f + 1.0, x);
  if (n < 0) {  // at most 2 downward steps (nu >= -3/2)
    double jm = 0.0, ja = j0, jb = j1;  // jb = J_{f+1}, ja = J_f
    for (int k = 0; k > n; --k) {
      jm = (2.0 * (f + k) / x) * ja - jb;
      jb = ja;
      ja = jm;
    }
    return ja;
  }
  if (nu <= x) {  // upward recurrence is stable while order <= argument
    if (n == 0) return j0;
    double jm1 = j0, j = j1;
    for (int k = 1; k < n; ++k) {  // j ends at J_{f+n}
      double jp = (2.0 * (f + k) / x) * j - jm1;
      jm1 = j;
      j = jp;
    }
    return j;
  }
  // nu > x > 12: Miller downward recurrence normalized against J_f, J_{f+1}
  int top = n + 2 + int(0.5 * x) + 40;
  double pp = 0.0, pc = 1e-30, target = 0.0;
  for (int k = top; k >= 1; --k) {
    double pm = (2.0 * (f + k) / x) * pc - pp;
    pp = pc;
    pc = pm;
    if (k - 1 == n) target = pc;  // unnormalized J_{f+n}
    if (std::abs(pc) > 1e250) {  // rescale
      pp /= 1e250;
      pc /= 1e250;
      target /= 1e250;
    }
  }
  // pc ~ C*J_f, pp ~ C*J_{f+1}
  double scale = std::abs(j0) > std::abs(j1) ? j0 / pc : j1 / pp;
  return target * scale;
}

inline double bessel_j_deriv(double nu, double x) {
  if (nu == 0.0) return -bessel_j(1.0, x);
  return 0.5 * (bessel_j(nu - 1.0, x) - bessel_j(nu + 1.0, x));
}

// Taylor around x0 > 0 via x^2 y'' + x y' + (x^2 - nu^2) y = 0.
inline std::array<cplx, 5> bessel_j_taylor(double nu, double x0) {
  Jet x = Jet::variable(0, x0, 4);
  Jet p = -inv(x);
  Jet q = cplx(nu * nu) * inv(x * x) - cplx(1.0);
  return detail::ode2_taylor(p, q, bessel_j(nu, x0), bessel_j_deriv(nu, x0));
}

inline AccuracyReport bessel_j_acc(double nu, double x) {
  double v = bessel_j(nu, x);
  double amp = x <= 12.0 ? std::exp(x) / std::max(1.0, std::sqrt(2.0 * kPi * x)) : 10.0;
  return {cplx(v), std::max(std::abs(v), 0.1) * 1e-16 * std::max(4.0, amp)};
}

// ---------------------------------------------------------------------------
// Macdonald function of imaginary order K_{i rho}(x)
// ---------------------------------------------------------------------------

namespace detail {

// K_{i rho}(x) = int_0^inf e^{-x cosh t} cos(rho t) dt. The integrand decays
// double-exponentially, so the equal-step trapezoid is the double-exponential
// scheme for this integral; the step controls the e^{rho v} strip growth.
// Returns e^{x} K (scaled) to postpone underflow; K via scale * e^{-x}.
inline double macdonald_scaled(double rho, double x, double step_scale = 1.0) {
  double h = std::min(0.05, 2.0 * kPi / (std::abs(rho) + 48.0)) * step_scale;
  double T = std::acosh(1.0 + 46.0 / x);
  int n = int(T / h) + 1;
  double sum = 0.5;  // t = 0 term: e^{-x(cosh 0 - 1)} cos(0) = 1, half weight
  for (int k = 1; k <= n; ++k) {
    double t = k * h;
    double e = std::exp(-x * (std::cosh(t) - 1.0));
    sum += e * std::cos(rho * t);
    if (e < 1e-19) break;
  }
  return sum * h;
}

inline double macdonald_deriv_scaled(double rho, double x) {
  double h = std::min(0.05, 2.0 * kPi / (std::abs(rho) + 48.0));
  double T = std::acosh(1.0 + 46.0 / x);
  int n = int(T / h) + 1;
  double sum = -0.5;
  for (int k = 1; k <= n; ++k) {
    double t = k * h;
    double e = std::exp(-x * (std::cosh(t) - 1.0));
    sum -= std::cosh(t) * e * std::cos(rho * t);
    if (e < 1e-19) break;
  }
  return sum * h;
}

}  // namespace detail

inline double macdonald_k_imag(double rho, double x) {
  if (x <= 0.0) throw std::domain_error("macdonald_k_imag: x > 0 required");
  if (x > 700.0) return 0.0;  // below double underflow after e^{-x}
  return std::exp(-x) * detail::macdonald_scaled(rho, x);
}

inline double macdonald_k_imag_deriv(double rho, double x) {
  if (x <= 0.0) throw std::domain_error("macdonald_k_imag: x > 0 required");
  if (x > 700.0) return 0.0;
  return std::exp(-x) * detail::macdonald_deriv_scaled(rho, x);
}

// Taylor around x0 via x^2 y'' + x y' - (x^2 - rho^2) y = 0.
inline std::array<cplx, 5> macdonald_k_imag_taylor(double rho, double x0) {
  Jet x = Jet::variable(0, x0, 4);
  Jet p = -inv(x);
  Jet q = cplx(1.0) - cplx(rho * rho) * inv(x * x);
  return detail::ode2_taylor(p, q, macdonald_k_imag(rho, x0), macdonald_k_imag_deriv(rho, x0));
}

inline AccuracyReport macdonald_k_imag_acc(double rho, double x) {
  double v = macdonald_k_imag(rho, x);
  double v2 = x > 700.0 ? 0.0 : std::exp(-x) * detail::macdonald_scaled(rho, x, 0.7071067811865476);
  return {cplx(v), std::abs(v - v2) * 4.0 + 4e-17 * std::exp(-x)};
}

}  // namespace dsh
