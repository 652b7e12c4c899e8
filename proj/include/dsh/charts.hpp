#pragma once
// The seven coordinate systems on the de Sitter hyperboloid
//   H4+ : x0^2 - x1^2 - x2^2 - x3^2 - x4^2 = 1,  x0 >= 1
// and on its asymptotic cone
//   C4+ : x0^2 - x1^2 - x2^2 - x3^2 - x4^2 = 0,  x0 > 0.
//
// Each chart maps 4 parameters to the homogeneous coordinates (x0..x4).
// chart_embedding is templated so the same formulas evaluate on plain
// doubles and on truncated jets; everything downstream that needs
// derivatives of the embedding (measure certification, generator
// pushforwards) reuses the one definition.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dsh/jet.hpp"

namespace dsh {

enum class Surface { Hyperboloid, Cone };
enum class ChartId { S, H, O, OC, OT, C, SH };

inline const char* to_string(Surface s) {
  return s == Surface::Hyperboloid ? "hyperboloid" : "cone";
}
inline const char* to_string(ChartId c) {
  switch (c) {
    case ChartId::S: return "S";
    case ChartId::H: return "H";
    case ChartId::O: return "O";
    case ChartId::OC: return "OC";
    case ChartId::OT: return "OT";
    case ChartId::C: return "C";
    case ChartId::SH: return "SH";
  }
  return "?";
}

inline Surface surface_from_string(const std::string& s) {
  if (s == "hyperboloid") return Surface::Hyperboloid;
  if (s == "cone") return Surface::Cone;
  throw std::invalid_argument("unknown surface: " + s);
}
inline ChartId chart_from_string(const std::string& s) {
  if (s == "S") return ChartId::S;
  if (s == "H") return ChartId::H;
  if (s == "O") return ChartId::O;
  if (s == "OC") return ChartId::OC;
  if (s == "OT") return ChartId::OT;
  if (s == "C") return ChartId::C;
  if (s == "SH") return ChartId::SH;
  throw std::invalid_argument("unknown chart: " + s);
}

constexpr std::array<ChartId, 7> kAllCharts = {ChartId::S, ChartId::H,  ChartId::O, ChartId::OC,
                                               ChartId::OT, ChartId::C, ChartId::SH};

// Parameter names in storage order, for diagnostics and CLI output.
inline const std::array<const char*, 4>& param_names(ChartId c) {
  static const std::array<const char*, 4> s{"a", "beta", "theta", "phi"};
  static const std::array<const char*, 4> h{"a", "b", "theta", "phi"};
  static const std::array<const char*, 4> o{"a", "r", "theta", "phi"};
  static const std::array<const char*, 4> oc{"a", "xi", "z", "phi"};
  static const std::array<const char*, 4> ot{"a", "y1", "y2", "y3"};
  static const std::array<const char*, 4> sh{"a", "b", "phi", "Phi"};
  switch (c) {
    case ChartId::S: return s;
    case ChartId::O: return o;
    case ChartId::OC: return oc;
    case ChartId::OT: return ot;
    case ChartId::SH: return sh;
    default: return h;  // H and C share names
  }
}

// [x,y] = x0 y0 - x1 y1 - x2 y2 - x3 y3 - x4 y4
inline double minkowski(const std::array<double, 5>& x, const std::array<double, 5>& y) {
  return x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3] - x[4] * y[4];
}

struct HomogeneousPoint {
  std::array<double, 5> x{1.0, 0.0, 0.0, 0.0, 0.0};
  Surface surface = Surface::Hyperboloid;
};

inline double surface_residual(const std::array<double, 5>& x, Surface s) {
  double q = minkowski(x, x);
  return s == Surface::Hyperboloid ? q - 1.0 : q;
}

// Validating constructor; tolerance scales with the squared point size.
inline HomogeneousPoint make_homogeneous(const std::array<double, 5>& x, Surface s) {
  double n2 = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw std::domain_error("homogeneous point: non-finite component");
    n2 += v * v;
  }
  if (std::abs(surface_residual(x, s)) > 1e-12 * (1.0 + n2))
    throw std::domain_error("homogeneous point: not on the surface");
  if (s == Surface::Hyperboloid && x[0] < 1.0 - 1e-12)
    throw std::domain_error("homogeneous point: x0 < 1 on the hyperboloid");
  if (s == Surface::Cone && x[0] <= 0.0)
    throw std::domain_error("homogeneous point: x0 <= 0 on the cone");
  return HomogeneousPoint{x, s};
}

struct ChartPoint {
  ChartId chart = ChartId::S;
  Surface surface = Surface::Hyperboloid;
  std::array<double, 4> p{};
  int eps = +1;             // cone H-system only: sign of x4
  bool degenerate = false;  // set by from_homogeneous at singular loci
};

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Throws on parameters outside the chart's domain. Angular upper boundaries
// are accepted closed: the embedding stays well defined there and
// from_homogeneous only produces them (flagged) at singular loci.
inline void validate(const ChartPoint& cp) {
  for (double v : cp.p)
    if (!std::isfinite(v)) throw std::domain_error("chart point: non-finite parameter");
  const double a = cp.p[0], p1 = cp.p[1], p2 = cp.p[2], p3 = cp.p[3];
  const bool hyp = cp.surface == Surface::Hyperboloid;
  auto fail = [&](const char* what) {
    throw std::domain_error(std::string("chart point out of range: ") + what);
  };
  const double pi = kTwoPi / 2.0;
  switch (cp.chart) {
    case ChartId::S:
      if (hyp && a < 0.0) fail("a < 0 in S");
      if (p1 < 0.0 || p1 > pi) fail("beta in S");
      if (p2 < 0.0 || p2 > pi) fail("theta in S");
      if (p3 < 0.0 || p3 > kTwoPi) fail("phi in S");
      break;
    case ChartId::H:
      if (p1 < 0.0) fail("b < 0 in H");
      if (p2 < 0.0 || p2 > pi) fail("theta in H");
      if (p3 < 0.0 || p3 > kTwoPi) fail("phi in H");
      if (!hyp && cp.eps != 1 && cp.eps != -1) fail("eps in cone H");
      break;
    case ChartId::O:
      if (p1 < 0.0) fail("r < 0 in O");
      if (p2 < 0.0 || p2 > pi) fail("theta in O");
      if (p3 < 0.0 || p3 > kTwoPi) fail("phi in O");
      break;
    case ChartId::OC:
      if (p1 < 0.0) fail("xi < 0 in OC");
      if (p3 < 0.0 || p3 > kTwoPi) fail("phi in OC");
      break;
    case ChartId::OT:
      break;
    case ChartId::C:
      if (hyp && a < 0.0) fail("a < 0 in C");
      if (p2 < 0.0 || p2 > pi) fail("theta in C");
      if (p3 < 0.0 || p3 > kTwoPi) fail("phi in C");
      break;
    case ChartId::SH:
      if (hyp && a < 0.0) fail("a < 0 in SH");
      if (p1 < 0.0) fail("b < 0 in SH");
      if (p2 < 0.0 || p2 > kTwoPi) fail("phi in SH");
      if (p3 < 0.0 || p3 > kTwoPi) fail("Phi in SH");
      break;
  }
}

// The chart maps. T is double or Jet; literals enter through scalar
// multiplication so both instantiations share one set of formulas.
template <typename T>
std::array<T, 5> chart_embedding(ChartId chart, Surface surf, const std::array<T, 4>& p,
                                 int eps = +1) {
  using std::cos;
  using std::cosh;
  using std::exp;
  using std::sin;
  using std::sinh;
  const bool hyp = surf == Surface::Hyperboloid;
  switch (chart) {
    case ChartId::S: {
      T sb = sin(p[1]), cb = cos(p[1]), st = sin(p[2]), ct = cos(p[2]);
      T sp = sin(p[3]), cp = cos(p[3]);
      if (hyp) {
        T sa = sinh(p[0]);
        return {cosh(p[0]), sa * sb * st * cp, sa * sb * st * sp, sa * sb * ct, sa * cb};
      }
      T u = exp(p[0]) * 0.5;
      return {u, u * sb * st * cp, u * sb * st * sp, u * sb * ct, u * cb};
    }
    case ChartId::H: {
      T sb = sinh(p[1]), st = sin(p[2]), ct = cos(p[2]), sp = sin(p[3]), cp = cos(p[3]);
      if (hyp) {
        T ca = cosh(p[0]);
        return {ca * cosh(p[1]), ca * sb * st * cp, ca * sb * st * sp, ca * sb * ct, sinh(p[0])};
      }
      T u = exp(p[0]) * 0.5;
      return {u * cosh(p[1]), u * sb * st * cp, u * sb * st * sp, u * sb * ct, u * double(eps)};
    }
    case ChartId::O: {
      T ea = exp(p[0]);
      T st = sin(p[2]), ct = cos(p[2]), sp = sin(p[3]), cp = cos(p[3]);
      T rad = ea * p[1];
      T q = p[1] * p[1];
      if (hyp) {
        // x0 - x4 = e^a, x0 + x4 = e^-a + r^2 e^a
        T s = exp(-p[0]) + q * ea;
        return {(s + ea) * 0.5, rad * st * cp, rad * st * sp, rad * ct, (s - ea) * 0.5};
      }
      return {ea * (q + 1.0) * 0.5, rad * st * cp, rad * st * sp, rad * ct, ea * (q - 1.0) * 0.5};
    }
    case ChartId::OC: {
      T ea = exp(p[0]);
      T sp = sin(p[3]), cp = cos(p[3]);
      T q = p[1] * p[1] + p[2] * p[2];
      // x3 = e^a z (the only form consistent with the quadratic constraint)
      if (hyp) {
        T s = exp(-p[0]) + q * ea;
        return {(s + ea) * 0.5, ea * p[1] * cp, ea * p[1] * sp, ea * p[2], (s - ea) * 0.5};
      }
      return {ea * (q + 1.0) * 0.5, ea * p[1] * cp, ea * p[1] * sp, ea * p[2],
              ea * (q - 1.0) * 0.5};
    }
    case ChartId::OT: {
      T ea = exp(p[0]);
      T q = p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
      if (hyp) {
        T s = exp(-p[0]) + q * ea;
        return {(s + ea) * 0.5, ea * p[1], ea * p[2], ea * p[3], (s - ea) * 0.5};
      }
      return {ea * (q + 1.0) * 0.5, ea * p[1], ea * p[2], ea * p[3], ea * (q - 1.0) * 0.5};
    }
    case ChartId::C: {
      T st = sin(p[2]), ct = cos(p[2]), sp = sin(p[3]), cp = cos(p[3]);
      if (hyp) {
        T sa = sinh(p[0]);
        return {cosh(p[0]) * cosh(p[1]), sa * st * cp, sa * st * sp, sa * ct,
                cosh(p[0]) * sinh(p[1])};
      }
      T u = exp(p[0]) * 0.5;
      return {u * cosh(p[1]), u * st * cp, u * st * sp, u * ct, u * sinh(p[1])};
    }
    case ChartId::SH: {
      T sp = sin(p[2]), cp = cos(p[2]), sP = sin(p[3]), cP = cos(p[3]);
      T sb = sinh(p[1]);
      if (hyp) {
        T ca = cosh(p[0]), sa = sinh(p[0]);
        return {ca * cosh(p[1]), ca * sb * cp, ca * sb * sp, sa * cP, sa * sP};
      }
      T u = exp(p[0]) * 0.5;
      return {u * cosh(p[1]), u * sb * cp, u * sb * sp, u * cP, u * sP};
    }
  }
  throw std::logic_error("chart_embedding: unreachable");
}

inline HomogeneousPoint to_homogeneous(const ChartPoint& cp) {
  validate(cp);
  return HomogeneousPoint{chart_embedding(cp.chart, cp.surface, cp.p, cp.eps), cp.surface};
}

namespace detail {

inline double wrap_azimuth(double phi) { return phi < 0.0 ? phi + kTwoPi : phi; }

}  // namespace detail

// Inverts the chart map. At singular loci the undetermined parameters are
// canonicalized to 0 and the degenerate flag is set. Throws when the chart
// cannot represent the point at all.
inline ChartPoint from_homogeneous(const HomogeneousPoint& hp, ChartId chart) {
  const auto& x = hp.x;
  double n2 = 0.0;
  for (double v : x) n2 += v * v;
  if (std::abs(surface_residual(x, hp.surface)) > 1e-10 * (1.0 + n2))
    throw std::domain_error("from_homogeneous: point not on its surface");

  ChartPoint cp;
  cp.chart = chart;
  cp.surface = hp.surface;
  const bool hyp = hp.surface == Surface::Hyperboloid;
  const double r2 = std::hypot(x[1], x[2]);            // distance from the x1-x2 axis pair
  const double r3 = std::hypot(r2, x[3]);              // |(x1,x2,x3)|
  const double theta = std::atan2(r2, x[3]);
  const double phi = detail::wrap_azimuth(std::atan2(x[2], x[1]));

  switch (chart) {
    case ChartId::S: {
      if (hyp) {
        double r4 = std::hypot(r3, x[4]);  // sinh a
        cp.p[0] = std::asinh(r4);
        if (r4 == 0.0) { cp.degenerate = true; break; }
        cp.p[1] = std::atan2(r3, x[4]);
      } else {
        cp.p[0] = std::log(2.0 * x[0]);
        cp.p[1] = std::atan2(r3, x[4]);
      }
      if (r3 == 0.0) { cp.degenerate = true; break; }
      cp.p[2] = theta;
      if (r2 == 0.0) { cp.degenerate = true; break; }
      cp.p[3] = phi;
      break;
    }
    case ChartId::H: {
      double scale;  // cosh a, or e^a/2 on the cone
      if (hyp) {
        cp.p[0] = std::asinh(x[4]);
        scale = std::cosh(cp.p[0]);
      } else {
        if (x[4] == 0.0) throw std::domain_error("cone H-chart cannot represent x4 = 0");
        cp.eps = x[4] > 0.0 ? +1 : -1;
        scale = std::abs(x[4]);
        cp.p[0] = std::log(2.0 * scale);
      }
      cp.p[1] = std::asinh(r3 / scale);
      if (r3 == 0.0) { cp.degenerate = true; break; }
      cp.p[2] = theta;
      if (r2 == 0.0) { cp.degenerate = true; break; }
      cp.p[3] = phi;
      break;
    }
    case ChartId::O:
    case ChartId::OC:
    case ChartId::OT: {
      double d = x[0] - x[4];  // e^a
      if (d <= 0.0) throw std::domain_error("orispherical charts require x0 - x4 > 0");
      cp.p[0] = std::log(d);
      double inv = 1.0 / d;
      if (chart == ChartId::OT) {
        cp.p[1] = x[1] * inv;
        cp.p[2] = x[2] * inv;
        cp.p[3] = x[3] * inv;
      } else if (chart == ChartId::O) {
        cp.p[1] = r3 * inv;
        if (r3 == 0.0) { cp.degenerate = true; break; }
        cp.p[2] = theta;
        if (r2 == 0.0) { cp.degenerate = true; break; }
        cp.p[3] = phi;
      } else {
        cp.p[1] = r2 * inv;
        cp.p[2] = x[3] * inv;
        if (r2 == 0.0) { cp.degenerate = true; break; }
        cp.p[3] = phi;
      }
      break;
    }
    case ChartId::C: {
      if (hyp) {
        cp.p[0] = std::asinh(r3);  // |x123| = sinh a
        double ca = std::cosh(cp.p[0]);
        cp.p[1] = std::asinh(x[4] / ca);
        if (r3 == 0.0) { cp.degenerate = true; break; }
      } else {
        if (r3 == 0.0) throw std::domain_error("cone C-chart cannot represent |x123| = 0");
        cp.p[0] = std::log(2.0 * r3);  // |x123| = e^a/2
        cp.p[1] = std::asinh(x[4] / r3);
      }
      cp.p[2] = theta;
      if (r2 == 0.0) { cp.degenerate = true; break; }
      cp.p[3] = phi;
      break;
    }
    case ChartId::SH: {
      double s = std::hypot(x[3], x[4]);  // sinh a, or e^a/2 on the cone
      double scale;
      if (hyp) {
        cp.p[0] = std::asinh(s);
        scale = std::cosh(cp.p[0]);
      } else {
        if (s == 0.0) throw std::domain_error("cone SH-chart cannot represent x3 = x4 = 0");
        cp.p[0] = std::log(2.0 * s);
        scale = s;
      }
      cp.p[1] = std::asinh(r2 / scale);
      bool no_phi = r2 == 0.0, no_Phi = s == 0.0;
      if (!no_phi) cp.p[2] = phi;
      if (!no_Phi) cp.p[3] = detail::wrap_azimuth(std::atan2(x[4], x[3]));
      cp.degenerate = no_phi || no_Phi;
      break;
    }
  }
  return cp;
}

// Density of the invariant measure d^4x / x0 in the chart parameters.
// Vanishes (and only vanishes) on the charts' singular loci.
inline double measure_density(const ChartPoint& cp) {
  validate(cp);
  const double a = cp.p[0];
  const bool hyp = cp.surface == Surface::Hyperboloid;
  const double e3a = std::exp(3.0 * a);
  switch (cp.chart) {
    case ChartId::S: {
      double ang = std::sin(cp.p[1]) * std::sin(cp.p[1]) * std::sin(cp.p[2]);
      if (hyp) {
        double sa = std::sinh(a);
        return sa * sa * sa * ang;
      }
      return 0.125 * e3a * ang;
    }
    case ChartId::H: {
      double sb = std::sinh(cp.p[1]);
      double ang = sb * sb * std::sin(cp.p[2]);
      if (hyp) {
        double ca = std::cosh(a);
        return ca * ca * ca * ang;
      }
      return 0.125 * e3a * ang;
    }
    case ChartId::O:
      return e3a * cp.p[1] * cp.p[1] * std::sin(cp.p[2]);
    case ChartId::OC:
      return e3a * cp.p[1];
    case ChartId::OT:
      return e3a;
    case ChartId::C: {
      if (hyp) {
        double sa = std::sinh(a);
        return std::cosh(a) * sa * sa * std::sin(cp.p[2]);
      }
      return 0.125 * e3a * std::sin(cp.p[2]);
    }
    case ChartId::SH: {
      if (hyp) {
        double ca = std::cosh(a);
        return ca * ca * std::sinh(a) * std::sinh(cp.p[1]);
      }
      return 0.125 * e3a * std::sinh(cp.p[1]);
    }
  }
  throw std::logic_error("measure_density: unreachable");
}

}  // namespace dsh
