#pragma once
// Normalized eigenfunction families on the hyperboloid, one per chart,
// and the corresponding delta-normed families on the cone. A family
// member is identified by a SpectralLabel; evaluation assembles the
// closed-form product of radial and angular factors as a jet in the
// chart parameters, so a single code path serves scalar values
// (degree 0) and the differential-operator certificates (degree <= 4).
// Special-function factors enter through their ODE Taylor coefficients
// composed with the jet of the inner argument.

#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsh/charts.hpp"
#include "dsh/generators.hpp"
#include "dsh/jet.hpp"
#include "dsh/specfn.hpp"

namespace dsh {

// Cone families carry Gamma(+-i rho) factors; keep rho off the pole.
inline constexpr double kRhoMin = 1e-3;

enum class BasisSide { HyperboloidNormed, ConeDeltaNormed };
enum class ConeBranch { Plus, Minus, Both };

inline const char* to_string(BasisSide s) {
  return s == BasisSide::HyperboloidNormed ? "hyperboloid-normed" : "cone-delta-normed";
}
inline const char* to_string(ConeBranch b) {
  switch (b) {
    case ConeBranch::Plus: return "plus";
    case ConeBranch::Minus: return "minus";
    case ConeBranch::Both: return "both";
  }
  return "?";
}

// Label of one family member. rho parametrizes the continuous spectrum
// in every chart (sigma = i rho - 3/2); the other fields are read per
// chart as documented on the factory functions below.
struct SpectralLabel {
  ChartId chart = ChartId::S;
  double rho = 1.0;

  int j = 0;                                  // S
  int l = 0;                                  // S, H, O, C
  int m = 0;                                  // every chart except OT
  double nu = 1.0;                            // H
  int eps = +1;                               // H: sign multiplying tanh a
  double kappa = 1.0;                         // O
  double eta = 1.0;                           // OC
  double q = 0.0;                             // OC
  std::array<double, 3> kvec{1.0, 0.0, 0.0};  // OT
  double tau = 0.0;                           // C
  double omega = 1.0;                         // SH
  int mprime = 0;                             // SH: Phi-phase index

  cplx sigma() const { return cplx(-1.5, rho); }

  // Macdonald argument scale for the three horospherical families.
  double wavenumber() const {
    switch (chart) {
      case ChartId::O: return kappa;
      case ChartId::OC: return std::hypot(eta, q);
      case ChartId::OT:
        return std::sqrt(kvec[0] * kvec[0] + kvec[1] * kvec[1] + kvec[2] * kvec[2]);
      default: throw std::logic_error("wavenumber: label has no Macdonald factor");
    }
  }

  void validate() const {
    auto bad = [](const std::string& what) {
      throw std::invalid_argument("spectral label: " + what);
    };
    if (!std::isfinite(rho) || rho < 0.0) bad("rho must be finite and >= 0");
    switch (chart) {
      case ChartId::S:
        if (j < 0) bad("j must be >= 0 in the S family");
        if (l < 0 || l > j) bad("l must lie in 0..j in the S family");
        if (std::abs(m) > l) bad("|m| must be <= l in the S family");
        break;
      case ChartId::H:
        if (!std::isfinite(nu) || nu < 0.0) bad("nu must be finite and >= 0 in the H family");
        if (l < 0) bad("l must be >= 0 in the H family");
        if (std::abs(m) > l) bad("|m| must be <= l in the H family");
        if (eps != 1 && eps != -1) bad("eps must be +1 or -1 in the H family");
        break;
      case ChartId::O:
        if (!std::isfinite(kappa) || kappa <= 0.0) bad("kappa must be finite and > 0 in the O family");
        if (l < 0) bad("l must be >= 0 in the O family");
        if (std::abs(m) > l) bad("|m| must be <= l in the O family");
        break;
      case ChartId::OC:
        if (!std::isfinite(eta) || eta < 0.0) bad("eta must be finite and >= 0 in the OC family");
        if (!std::isfinite(q)) bad("q must be finite in the OC family");
        if (eta == 0.0 && q == 0.0) bad("eta and q cannot both vanish in the OC family");
        break;
      case ChartId::OT:
        for (double k : kvec)
          if (!std::isfinite(k)) bad("kvec must be finite in the OT family");
        if (kvec[0] == 0.0 && kvec[1] == 0.0 && kvec[2] == 0.0)
          bad("kvec must be nonzero in the OT family");
        break;
      case ChartId::C:
        if (l < 0) bad("l must be >= 0 in the C family");
        if (std::abs(m) > l) bad("|m| must be <= l in the C family");
        if (!std::isfinite(tau)) bad("tau must be finite in the C family");
        break;
      case ChartId::SH:
        if (!std::isfinite(omega) || omega < 0.0)
          bad("omega must be finite and >= 0 in the SH family");
        break;
    }
  }
};

inline SpectralLabel label_s(double rho, int j, int l, int m) {
  SpectralLabel L;
  L.chart = ChartId::S;
  L.rho = rho; L.j = j; L.l = l; L.m = m;
  L.validate();
  return L;
}
inline SpectralLabel label_h(double rho, double nu, int l, int m, int eps = +1) {
  SpectralLabel L;
  L.chart = ChartId::H;
  L.rho = rho; L.nu = nu; L.l = l; L.m = m; L.eps = eps;
  L.validate();
  return L;
}
inline SpectralLabel label_o(double rho, double kappa, int l, int m) {
  SpectralLabel L;
  L.chart = ChartId::O;
  L.rho = rho; L.kappa = kappa; L.l = l; L.m = m;
  L.validate();
  return L;
}
inline SpectralLabel label_oc(double rho, double eta, double q, int m) {
  SpectralLabel L;
  L.chart = ChartId::OC;
  L.rho = rho; L.eta = eta; L.q = q; L.m = m;
  L.validate();
  return L;
}
inline SpectralLabel label_ot(double rho, const std::array<double, 3>& kvec) {
  SpectralLabel L;
  L.chart = ChartId::OT;
  L.rho = rho; L.kvec = kvec;
  L.validate();
  return L;
}
inline SpectralLabel label_c(double rho, double tau, int l, int m) {
  SpectralLabel L;
  L.chart = ChartId::C;
  L.rho = rho; L.tau = tau; L.l = l; L.m = m;
  L.validate();
  return L;
}
inline SpectralLabel label_sh(double rho, double omega, int mprime, int m) {
  SpectralLabel L;
  L.chart = ChartId::SH;
  L.rho = rho; L.omega = omega; L.mprime = mprime; L.m = m;
  L.validate();
  return L;
}

namespace basis_detail {

// |Gamma(z)| through the log so rho, nu up to ~50 stay in range.
inline double gamma_mod(cplx z) { return std::exp(lgamma_complex(z).real()); }

// exp(sum log|Gamma(num)| - sum log|Gamma(den)|)
inline double mod_ratio(std::initializer_list<cplx> num, std::initializer_list<cplx> den) {
  double s = 0.0;
  for (cplx z : num) s += lgamma_complex(z).real();
  for (cplx z : den) s -= lgamma_complex(z).real();
  return std::exp(s);
}

inline Jet compose5(const Jet& u, const std::array<cplx, 5>& c) {
  return Jet::compose(u, c.data(), 5);
}
inline Jet legendre_jet(cplx mu, cplx nu, const Jet& u) {
  return compose5(u, legendre_p_taylor(mu, nu, u.value().real()));
}
inline Jet bessel_jet(double nu, const Jet& u) {
  return compose5(u, bessel_j_taylor(nu, u.value().real()));
}
inline Jet macdonald_jet(double rho, const Jet& u) {
  return compose5(u, macdonald_k_imag_taylor(rho, u.value().real()));
}

// Gauss 2F1 as a jet of its last argument, via the hypergeometric ODE
//   w(1-w) y'' + [c - (a+b+1) w] y' - a b y = 0.
inline Jet gauss_2f1_jet(cplx a, cplx b, cplx c, const Jet& w) {
  const double w0 = w.value().real();
  Jet x = Jet::variable(0, w0, Jet::kMaxDeg);
  Jet s = inv(x * (cplx(1.0) - x));
  Jet p = ((a + b + 1.0) * x - c) * s;
  Jet q = (a * b) * s;
  auto coef = detail::ode2_taylor(p, q, gauss_2f1(a, b, c, w0), gauss_2f1_deriv(a, b, c, w0));
  return compose5(w, coef);
}

// Integer power by repeated multiplication; pow() would log a zero base.
inline Jet ipow(const Jet& u, int n) {
  Jet r = Jet::constant(1.0, u.degree());
  for (int k = 0; k < n; ++k) r = r * u;
  return r;
}

// J_m for any integer order via the reflection J_{-m} = (-1)^m J_m.
inline Jet bessel_int_jet(int m, const Jet& u) {
  Jet v = bessel_jet(double(std::abs(m)), u);
  return (m < 0 && (m & 1)) ? -v : v;
}

// Orthonormal spherical harmonic as a jet in (theta, phi); agrees with
// sph_harm at degree 0. Built on the order -|m| Legendre function, whose
// Taylor data is regular for every integer m.
inline Jet ylm_jet(int l, int m, const Jet& th, const Jet& ph) {
  const int am = std::abs(m);
  double c = std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) *
                       std::exp(std::lgamma(l + am + 1.0) - std::lgamma(l - am + 1.0)));
  if (m >= 0 && (am % 2)) c = -c;
  return legendre_jet(cplx(-double(am)), cplx(double(l)), cos(th)) *
         exp(ph * cplx(0.0, double(m))) * c;
}

// Orthonormal S^3 harmonic as a jet in (beta, theta, phi); agrees with
// sph_harm_3 at degree 0.
inline Jet yjlm_jet(int j, int l, int m, const Jet& be, const Jet& th, const Jet& ph) {
  double norm = std::sqrt(j + 1.0) *
                std::exp(0.5 * (std::lgamma(j + l + 2.0) - std::lgamma(j - l + 1.0)));
  Jet bfac = legendre_jet(cplx(-double(l) - 0.5), cplx(double(j) + 0.5), cos(be)) *
             inv(sqrt(sin(be)));
  return bfac * ylm_jet(l, m, th, ph) * norm;
}

// Pseudospherical angular factor shared by the H families on both
// surfaces, as a jet in (b, theta, phi).
inline Jet v_nulm_jet(double nu, int l, int m, const Jet& b, const Jet& th, const Jet& ph) {
  const cplx inu(0.0, nu);
  double norm = mod_ratio({inu}, {inu - double(l)});
  Jet rad = legendre_jet(cplx(-double(l) - 0.5), inu - 0.5, cosh(b)) * inv(sqrt(sinh(b)));
  return rad * ylm_jet(l, m, th, ph) * norm;
}

// Horospherical Macdonald factor e^{-3a/2} K_{i rho}(kappa e^{-a}).
inline Jet horo_radial_jet(double rho, double kappa, const Jet& a) {
  return exp(a * cplx(-1.5)) * macdonald_jet(rho, exp(a * cplx(-1.0)) * kappa);
}

inline Jet hyperboloid_jet(const SpectralLabel& L, const std::array<Jet, 4>& P) {
  const cplx irho(0.0, L.rho);
  switch (L.chart) {
    case ChartId::S: {
      double norm = mod_ratio({irho - 0.5}, {irho - double(L.j) - 0.5});
      Jet rad = legendre_jet(cplx(-double(L.j) - 1.0), irho - 0.5, cosh(P[0])) * inv(sinh(P[0]));
      return rad * yjlm_jet(L.j, L.l, L.m, P[1], P[2], P[3]) * norm;
    }
    case ChartId::H: {
      if (L.nu == 0.0)
        throw std::domain_error("basis: nu = 0 degenerates the H-family normalization");
      const cplx inu(0.0, L.nu);
      double norm = mod_ratio({irho + inu + 0.5, irho - inu + 0.5}, {irho + 1.5}) /
                    std::sqrt(kTwoPi);
      Jet rad = pow(cosh(P[0]), cplx(-1.5)) *
                legendre_jet(-irho, inu - 0.5, tanh(P[0]) * double(L.eps));
      return rad * v_nulm_jet(L.nu, L.l, L.m, P[1], P[2], P[3]) * norm;
    }
    case ChartId::O: {
      double norm = std::sqrt(2.0 / kPi) / gamma_mod(irho + 1.5);
      Jet arg = P[1] * L.kappa;
      Jet ang = bessel_jet(double(L.l) + 0.5, arg) * inv(sqrt(arg)) *
                ylm_jet(L.l, L.m, P[2], P[3]);
      return horo_radial_jet(L.rho, L.kappa, P[0]) * ang * norm;
    }
    case ChartId::OC: {
      double norm = 1.0 / (kPi * std::sqrt(kTwoPi) * gamma_mod(irho + 1.5));
      const int deg = P[0].degree();
      Jet bes = L.eta == 0.0 ? Jet::constant(L.m == 0 ? 1.0 : 0.0, deg)
                             : bessel_int_jet(L.m, P[1] * L.eta);
      Jet ang = bes * exp(P[2] * cplx(0.0, L.q)) * exp(P[3] * cplx(0.0, double(L.m)));
      return horo_radial_jet(L.rho, L.wavenumber(), P[0]) * ang * norm;
    }
    case ChartId::OT: {
      double norm = 1.0 / (2.0 * kPi * kPi * gamma_mod(irho + 1.5));
      Jet ang = exp(P[1] * cplx(0.0, L.kvec[0]) + P[2] * cplx(0.0, L.kvec[1]) +
                    P[3] * cplx(0.0, L.kvec[2]));
      return horo_radial_jet(L.rho, L.wavenumber(), P[0]) * ang * norm;
    }
    case ChartId::C: {
      const cplx itau(0.0, L.tau);
      const cplx A = (irho + itau + double(L.l) + 1.5) * 0.5;
      const cplx B = (irho - itau + double(L.l) + 1.5) * 0.5;
      double norm = mod_ratio({A, B}, {irho + 1.5}) /
                    (kTwoPi * std::tgamma(double(L.l) + 1.5));
      Jet t = tanh(P[0]);
      Jet rad = pow(cosh(P[0]), -irho - 1.5) * ipow(t, L.l) *
                gauss_2f1_jet(A, B, cplx(double(L.l) + 1.5), t * t);
      Jet ang = exp(P[1] * cplx(0.0, L.tau)) * ylm_jet(L.l, L.m, P[2], P[3]);
      return rad * ang * norm;
    }
    case ChartId::SH: {
      // The Phi-phase index keeps its sign; radial factors see |mprime|.
      const int mt = std::abs(L.mprime);
      const cplx iw(0.0, L.omega);
      const cplx A = (irho + iw + double(mt) + 1.0) * 0.5;
      const cplx B = (irho - iw + double(mt) + 1.0) * 0.5;
      double norm = std::pow(kTwoPi, -1.5) *
                    mod_ratio({A, B, iw + 0.5}, {irho + 1.5, iw + double(L.m) + 0.5}) /
                    std::tgamma(double(mt) + 1.0);
      Jet t = tanh(P[0]);
      Jet rad = ipow(t, mt) * pow(cosh(P[0]), -irho - 1.5) *
                gauss_2f1_jet(A, B, cplx(double(mt) + 1.0), t * t);
      Jet bfac = legendre_jet(cplx(double(L.m)), iw - 0.5, cosh(P[1]));
      Jet phase = exp(P[2] * cplx(0.0, double(L.m)) + P[3] * cplx(0.0, double(L.mprime)));
      return rad * bfac * phase * norm;
    }
  }
  throw std::logic_error("hyperboloid_jet: unreachable");
}

// The pair (C+, C-) multiplying e^{(-3/2 + i rho) a} and
// e^{(-3/2 - i rho) a} in the cone family of the label's chart.
// Unit-modulus Gamma ratios are assembled in log space.
inline std::pair<cplx, cplx> cone_constants(const SpectralLabel& L) {
  const cplx irho(0.0, L.rho);
  const double lg32 = lgamma_complex(irho + 1.5).real();
  const double s2pi = std::sqrt(2.0 / kPi);
  switch (L.chart) {
    case ChartId::S: {
      const cplx j32 = cplx(double(L.j) + 1.5);
      const double r = lgamma_complex(irho + j32).real() - lg32;
      cplx cp = s2pi * std::exp(r + lgamma_complex(irho) - lgamma_complex(irho + j32));
      cplx cm = s2pi * std::exp(r + lgamma_complex(-irho) - lgamma_complex(-irho + j32));
      return {cp, cm};
    }
    case ChartId::H: {
      const cplx ga = irho + cplx(0.0, L.nu) + 0.5;
      const cplx gb = irho - cplx(0.0, L.nu) + 0.5;
      const double r = lgamma_complex(ga).real() + lgamma_complex(gb).real() - lg32;
      cplx cp = s2pi * std::exp(r + lgamma_complex(irho) - lgamma_complex(ga) - lgamma_complex(gb));
      cplx cm = s2pi * std::exp(cplx(r)) *
                (std::cosh(kPi * L.rho) / kPi * gamma_complex(-irho) +
                 double(L.eps) * std::exp(-lgamma_complex(irho + 1.0)));
      return {cp, cm};
    }
    case ChartId::O:
    case ChartId::OC:
    case ChartId::OT: {
      const double lnk2 = std::log(L.wavenumber() / 2.0);
      cplx cp = std::exp(lgamma_complex(irho) - lg32 - irho * lnk2) / (2.0 * std::sqrt(kPi));
      cplx cm = std::exp(lgamma_complex(-irho) - lg32 + irho * lnk2) / (2.0 * std::sqrt(kPi));
      return {cp, cm};
    }
    case ChartId::C:
    case ChartId::SH: {
      // Same shape in both charts: (tau, l+3/2) vs (omega, |mprime|+1).
      const cplx ix = L.chart == ChartId::C ? cplx(0.0, L.tau) : cplx(0.0, L.omega);
      const double off =
          L.chart == ChartId::C ? double(L.l) + 1.5 : double(std::abs(L.mprime)) + 1.0;
      const cplx A = (irho + ix + off) * 0.5;
      const cplx B = (irho - ix + off) * 0.5;
      const double r = lgamma_complex(A).real() + lgamma_complex(B).real() - lg32;
      const double ln2 = std::log(2.0);
      cplx cp = s2pi * std::exp(r + lgamma_complex(irho) - irho * ln2 -
                                lgamma_complex(A) - lgamma_complex(B));
      cplx cm = s2pi * std::exp(r + lgamma_complex(-irho) + irho * ln2 -
                                lgamma_complex((-irho + ix + off) * 0.5) -
                                lgamma_complex((-irho - ix + off) * 0.5));
      return {cp, cm};
    }
  }
  throw std::logic_error("cone_constants: unreachable");
}

inline Jet cone_jet(const SpectralLabel& L, const std::array<Jet, 4>& P, ConeBranch branch) {
  const auto [cpls, cmns] = cone_constants(L);
  const cplx irho(0.0, L.rho);
  Jet rad = Jet::constant(0.0, P[0].degree());
  if (branch != ConeBranch::Minus) rad = rad + exp(P[0] * (irho - 1.5)) * cpls;
  if (branch != ConeBranch::Plus) rad = rad + exp(P[0] * (-irho - 1.5)) * cmns;

  switch (L.chart) {
    case ChartId::S:
      return rad * yjlm_jet(L.j, L.l, L.m, P[1], P[2], P[3]);
    case ChartId::H:
      if (L.nu == 0.0)
        throw std::domain_error("basis: nu = 0 degenerates the H-family normalization");
      return rad * v_nulm_jet(L.nu, L.l, L.m, P[1], P[2], P[3]);
    case ChartId::O: {
      Jet arg = P[1] * L.kappa;
      return rad * bessel_jet(double(L.l) + 0.5, arg) * inv(sqrt(arg)) *
             ylm_jet(L.l, L.m, P[2], P[3]);
    }
    case ChartId::OC: {
      const int deg = P[0].degree();
      Jet bes = L.eta == 0.0 ? Jet::constant(L.m == 0 ? 1.0 : 0.0, deg)
                             : bessel_int_jet(L.m, P[1] * L.eta);
      return rad * bes * exp(P[2] * cplx(0.0, L.q)) * exp(P[3] * cplx(0.0, double(L.m))) *
             (1.0 / kTwoPi);
    }
    case ChartId::OT:
      return rad *
             exp(P[1] * cplx(0.0, L.kvec[0]) + P[2] * cplx(0.0, L.kvec[1]) +
                 P[3] * cplx(0.0, L.kvec[2])) *
             std::pow(kTwoPi, -1.5);
    case ChartId::C:
      return rad * exp(P[1] * cplx(0.0, L.tau)) * ylm_jet(L.l, L.m, P[2], P[3]) *
             (1.0 / std::sqrt(kTwoPi));
    case ChartId::SH: {
      const cplx iw(0.0, L.omega);
      double norm = mod_ratio({iw + 0.5}, {iw + double(L.m) + 0.5}) / kTwoPi;
      Jet bfac = legendre_jet(cplx(double(L.m)), iw - 0.5, cosh(P[1]));
      Jet phase = exp(P[2] * cplx(0.0, double(L.m)) + P[3] * cplx(0.0, double(L.mprime)));
      return rad * bfac * phase * norm;
    }
  }
  throw std::logic_error("cone_jet: unreachable");
}

inline void check_point(const SpectralLabel& L, const ChartPoint& p, Surface want,
                        const char* who) {
  L.validate();
  if (p.chart != L.chart)
    throw std::invalid_argument(std::string(who) + ": point chart " + to_string(p.chart) +
                                " differs from label chart " + to_string(L.chart));
  if (p.surface != want)
    throw std::invalid_argument(std::string(who) + ": point must lie on the " +
                                to_string(want));
  require_regular(p);
}

}  // namespace basis_detail

// Normalized family member on the hyperboloid.
inline cplx basis_h4(const SpectralLabel& label, const ChartPoint& p) {
  basis_detail::check_point(label, p, Surface::Hyperboloid, "basis_h4");
  return basis_detail::hyperboloid_jet(label, param_jets(p, 0)).value();
}

// Delta-normed family member on the cone; `branch` selects one
// homogeneous component or their sum.
inline cplx basis_c4(const SpectralLabel& label, const ChartPoint& p,
                     ConeBranch branch = ConeBranch::Both) {
  basis_detail::check_point(label, p, Surface::Cone, "basis_c4");
  if (label.rho < kRhoMin)
    throw std::domain_error("basis_c4: rho below kRhoMin hits the Gamma(+-i rho) pole");
  return basis_detail::cone_jet(label, param_jets(p, 0), branch).value();
}

// Field views for the operator certificates.
inline ScalarField basis_h4_field(const SpectralLabel& label) {
  label.validate();
  return make_field(label.chart, Surface::Hyperboloid, [label](const std::array<Jet, 4>& P) {
    return basis_detail::hyperboloid_jet(label, P);
  });
}
inline ScalarField basis_c4_field(const SpectralLabel& label,
                                  ConeBranch branch = ConeBranch::Both) {
  label.validate();
  if (label.rho < kRhoMin)
    throw std::domain_error("basis_c4_field: rho below kRhoMin hits the Gamma(+-i rho) pole");
  return make_field(label.chart, Surface::Cone, [label, branch](const std::array<Jet, 4>& P) {
    return basis_detail::cone_jet(label, P, branch);
  });
}

// Spectral density multiplying |coefficient|^2 in the Plancherel
// integral: common factor rho (rho^2 + 1/4) tanh(pi rho), times the
// per-chart continuous-label density.
inline double plancherel_weight(const SpectralLabel& label) {
  label.validate();
  const double common = label.rho * (label.rho * label.rho + 0.25) * std::tanh(kPi * label.rho);
  switch (label.chart) {
    case ChartId::S:
    case ChartId::OT:
    case ChartId::C: return common;
    case ChartId::H: return common * label.nu * label.nu;
    case ChartId::O: return common * label.kappa * label.kappa;
    case ChartId::OC: return common * label.eta;
    case ChartId::SH: return common * label.omega * std::tanh(kPi * label.omega);
  }
  throw std::logic_error("plancherel_weight: unreachable");
}

// Eigenvalues of the chart's commuting invariant set on this family.
struct InvariantEigenvalue {
  InvariantName name;
  double value;
};

inline std::vector<InvariantEigenvalue> subgroup_spectrum(const SpectralLabel& L) {
  L.validate();
  const double ll1 = double(L.l) * (double(L.l) + 1.0);
  switch (L.chart) {
    case ChartId::S:
      return {{InvariantName::J2, double(L.j) * (double(L.j) + 2.0)},
              {InvariantName::M2, ll1},
              {InvariantName::M3, double(L.m)}};
    case ChartId::H:
      return {{InvariantName::NM2, L.nu * L.nu + 1.0},
              {InvariantName::M2, ll1},
              {InvariantName::M3, double(L.m)}};
    case ChartId::O:
      return {{InvariantName::E2, L.kappa * L.kappa},
              {InvariantName::M2, ll1},
              {InvariantName::M3, double(L.m)}};
    case ChartId::OC:
      return {{InvariantName::E2, L.eta * L.eta + L.q * L.q},
              {InvariantName::Etilde2, L.eta * L.eta},
              {InvariantName::E3, L.q},
              {InvariantName::M3, double(L.m)}};
    case ChartId::OT:
      return {{InvariantName::E2, L.wavenumber() * L.wavenumber()},
              {InvariantName::E3, L.kvec[2]}};
    case ChartId::C:
      return {{InvariantName::P0, L.tau},
              {InvariantName::M2, ll1},
              {InvariantName::M3, double(L.m)}};
    case ChartId::SH:
      return {{InvariantName::H2, -(L.omega * L.omega + 0.25)},
              {InvariantName::P3, double(L.mprime)},
              {InvariantName::M3, double(L.m)}};
  }
  throw std::logic_error("subgroup_spectrum: unreachable");
}

// Hyperboloid S-family value and the matching cone combination at the
// same chart coordinates; the relative gap closes as a grows. The
// hyperboloid family approaches sqrt(2) times the delta-normed cone
// family, so the returned cone value carries that factor.
struct ConeLimitPair {
  cplx hyperboloid_value;
  cplx cone_value;
};

inline ConeLimitPair cone_limit_match(const SpectralLabel& label, double a) {
  if (label.chart != ChartId::S)
    throw std::invalid_argument("cone_limit_match: S-chart label required");
  if (!(a >= 5.0)) throw std::invalid_argument("cone_limit_match: a >= 5 required");
  const std::array<double, 4> coords{a, 1.0, 1.1, 0.7};  // generic angles
  ChartPoint hp{ChartId::S, Surface::Hyperboloid, coords};
  ChartPoint cp{ChartId::S, Surface::Cone, coords};
  return {basis_h4(label, hp), std::sqrt(2.0) * basis_c4(label, cp, ConeBranch::Both)};
}

}  // namespace dsh
