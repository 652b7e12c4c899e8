#pragma once
// Tensor-product quadrature grids realizing the invariant measure d^4x/x0
// in every chart, on both surfaces. Compact angle factors carry Gauss rules,
// azimuthal factors the (trigonometrically exact) midpoint rule, unbounded
// radial factors a tanh-mapped Gauss rule truncated where measure density
// times a reference envelope drops below 1e-14. The orispherical transverse
// axes (r | xi,z | y) keep a unit base rule rescaled per a-slice, because
// their envelope-supported radius varies with a by orders of magnitude.
//
// Grids are stored per axis and never materialize the tensor product; nodes
// and weights are composed on demand. Sums over nodes reduce in a fixed
// 256-block order, so results do not depend on DESITTER_THREADS.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dsh/charts.hpp"
#include "dsh/generators.hpp"
#include "dsh/quadrature.hpp"

namespace dsh {

// Discretization of the spectral side plus grid controls. Zero-valued grid
// fields are derived from the caps and the envelope rate; tests pin them
// explicitly where an invariant is sensitive to resolution.
struct TruncationSpec {
  double rho_max = 8.0;
  int n_rho = 16;

  int j_max = 4;       // S chain
  int l_max = 4;       // orbital cap (S uses min(l, j); OC reuses it for m)
  int mprime_max = 3;  // SH Phi-phase cap

  double nu_max = 6.0;
  int n_nu = 8;  // H
  double kappa_max = 5.0;
  int n_kappa = 8;  // O and OT radial
  double eta_max = 5.0;
  int n_eta = 6;  // OC
  double q_max = 5.0;
  int n_q = 8;  // OC
  int n_kdir = 4;  // OT sphere: n_kdir polar x 2 n_kdir azimuthal nodes
  double tau_max = 8.0;
  int n_tau = 24;  // C
  double omega_max = 6.0;
  int n_omega = 8;  // SH

  // Reference ambient decay exp(-rate (x0-1)) fixing truncation radii.
  double envelope_rate = 2.0;
  double a_max = 0.0;
  int n_a = 0;
  double b_max = 0.0;  // second radial axis (b, r, xi/z, y); >0 fixes the box
  int n_b = 0;
  int n_angle = 0;  // polar-type axes
  int n_phi = 0;    // azimuthal axes

  void validate() const {
    auto bad = [](const std::string& what) {
      throw std::invalid_argument("truncation spec: " + what);
    };
    if (!(rho_max > 0.0) || !std::isfinite(rho_max)) bad("rho_max must be positive");
    if (n_rho < 8) bad("n_rho must be >= 8");
    if (j_max < 0 || l_max < 0 || mprime_max < 0) bad("discrete caps must be >= 0");
    if (!(nu_max > 0.0) || !(kappa_max > 0.0) || !(eta_max > 0.0) || !(q_max > 0.0) ||
        !(tau_max > 0.0) || !(omega_max > 0.0))
      bad("continuous caps must be positive");
    if (n_nu < 1 || n_kappa < 1 || n_eta < 1 || n_q < 1 || n_kdir < 1 || n_tau < 1 ||
        n_omega < 1)
      bad("continuous-label node counts must be >= 1");
    if (!(envelope_rate > 0.0)) bad("envelope_rate must be positive");
    if (a_max < 0.0 || b_max < 0.0 || n_a < 0 || n_b < 0 || n_angle < 0 || n_phi < 0)
      bad("grid overrides must be >= 0");
  }
};

namespace transform_detail {

inline int thread_budget() {
  static const int n = [] {
    if (const char* s = std::getenv("DESITTER_THREADS")) {
      int v = std::atoi(s);
      if (v >= 1) return std::min(v, 64);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(std::min(hc, 16u)) : 1;
  }();
  return n;
}

// fn(i) over [0,n) on the thread budget; outputs must be disjoint per index.
template <typename F>
inline void parallel_for(std::size_t n, F&& fn) {
  const int want = thread_budget();
  if (want <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int nt = static_cast<int>(std::min<std::size_t>(want, n));
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t lo = n * t / nt, hi = n * (t + 1) / nt;
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

// Deterministic parallel reduction: 256 partials in fixed index blocks,
// combined in block order regardless of the thread count.
template <typename F>
inline cplx block_sum(std::size_t n, F&& term) {
  constexpr std::size_t kBlocks = 256;
  const std::size_t nb = std::min<std::size_t>(kBlocks, n ? n : 1);
  std::vector<cplx> part(nb, cplx(0.0));
  parallel_for(nb, [&](std::size_t b) {
    const std::size_t lo = n * b / nb, hi = n * (b + 1) / nb;
    cplx s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    part[b] = s;
  });
  cplx total = 0.0;
  for (const cplx& s : part) total += s;
  return total;
}

// Largest x0 where measure growth (2 x0)^3 still loses against the envelope
// exp(-rate (x0-1)) by `decades` orders of magnitude.
inline double envelope_x0(double rate, double decades = 14.0) {
  const double cut = decades * std::log(10.0);
  double x = 8.0;
  for (int it = 0; it < 6; ++it) x = 1.0 + (cut + 3.0 * std::log(2.0 * x)) / rate;
  return x;
}

inline int auto_nodes(double len, double freq) {
  const int n = 2 * static_cast<int>(std::ceil(0.44 * std::max(freq, 1.0) * len)) + 20;
  return std::max(64, n);
}

}  // namespace transform_detail

struct GridAxis {
  std::vector<double> x;  // nodes
  std::vector<double> w;  // rule weight times this axis's measure factor
};

namespace transform_detail {

inline GridAxis midpoint_axis(int n) {
  GridAxis ax;
  ax.x.resize(n);
  ax.w.assign(n, kTwoPi / n);
  for (int i = 0; i < n; ++i) ax.x[i] = (i + 0.5) * kTwoPi / n;
  return ax;
}

inline GridAxis gauss_axis(int n, double lo, double hi,
                           const std::function<double(double)>& mfac) {
  Rule1D r = gl_on(n, lo, hi);
  GridAxis ax;
  ax.x = r.x;
  ax.w.resize(n);
  for (int i = 0; i < n; ++i) ax.w[i] = r.w[i] * (mfac ? mfac(r.x[i]) : 1.0);
  return ax;
}

// x = scale * atanh(u) with u Gauss-distributed on (0,1) or (-1,1); the
// anchor percentile node lands on the cut and everything past a cut is
// dropped. Guards nodes against the singular locus at the origin.
inline GridAxis tanh_axis(int n, bool two_sided, double cut_lo, double cut_hi,
                          const std::function<double(double)>& mfac) {
  if (!(cut_hi > 0.0)) throw std::invalid_argument("tanh_axis: empty range");
  const Rule1D& base = gauss_legendre(n);
  std::vector<double> u(n), uw(n);
  for (int i = 0; i < n; ++i) {
    if (two_sided) {
      u[i] = base.x[i];
      uw[i] = base.w[i];
    } else {
      u[i] = 0.5 * (base.x[i] + 1.0);
      uw[i] = 0.5 * base.w[i];
    }
  }
  const double cut = std::max(cut_hi, two_sided ? cut_lo : 0.0);
  const int anchor = std::min(n - 1, std::max(two_sided ? (n + 1) / 2 : 1,
                                              static_cast<int>(0.85 * n)));
  const double scale = cut / std::atanh(u[anchor]);
  GridAxis ax;
  for (int i = 0; i < n; ++i) {
    const double x = scale * std::atanh(u[i]);
    if (x > cut_hi * (1.0 + 1e-12)) continue;
    if (two_sided && x < -cut_lo * (1.0 + 1e-12)) continue;
    if (!two_sided && x < 1e-6) continue;
    ax.x.push_back(x);
    ax.w.push_back(uw[i] * scale / (1.0 - u[i] * u[i]) * (mfac ? mfac(x) : 1.0));
  }
  if (ax.x.empty()) throw std::invalid_argument("tanh_axis: all nodes truncated");
  return ax;
}

}  // namespace transform_detail

struct QuadratureGrid {
  ChartId chart{};
  Surface surface{};
  std::array<GridAxis, 4> axis;
  // Orispherical transverse axes hold unit base rules; axes 1..slice_dims
  // rescale by slice_scale[i0] and the weight by its cube (the transverse
  // block is always 3-homogeneous: r^2 dr, xi dxi dz, d^3y).
  std::vector<double> slice_scale;
  int slice_dims = 0;
  int eps = +1;  // cone H sheet
  std::array<std::array<double, 2>, 4> bounds{};

  std::array<std::size_t, 4> dims() const {
    return {axis[0].x.size(), axis[1].x.size(), axis[2].x.size(), axis[3].x.size()};
  }
  std::size_t size() const {
    auto d = dims();
    return d[0] * d[1] * d[2] * d[3];
  }
  std::array<std::size_t, 4> unravel(std::size_t idx) const {
    auto d = dims();
    std::array<std::size_t, 4> i{};
    i[3] = idx % d[3];
    idx /= d[3];
    i[2] = idx % d[2];
    idx /= d[2];
    i[1] = idx % d[1];
    i[0] = idx / d[1];
    return i;
  }
  ChartPoint point(std::size_t idx) const {
    auto i = unravel(idx);
    const double s = slice_dims ? slice_scale[i[0]] : 1.0;
    ChartPoint cp;
    cp.chart = chart;
    cp.surface = surface;
    cp.eps = eps;
    for (int k = 0; k < 4; ++k) {
      double v = axis[k].x[i[k]];
      if (k >= 1 && k <= slice_dims) v *= s;
      cp.p[k] = v;
    }
    return cp;
  }
  double weight(std::size_t idx) const {
    auto i = unravel(idx);
    double w = axis[0].w[i[0]] * axis[1].w[i[1]] * axis[2].w[i[2]] * axis[3].w[i[3]];
    if (slice_dims) {
      const double s = slice_scale[i[0]];
      w *= s * s * s;
    }
    return w;
  }
  double total_weight() const {
    double s0 = 0.0;
    for (std::size_t i = 0; i < axis[0].x.size(); ++i) {
      double c = slice_dims ? std::pow(slice_scale[i], 3.0) : 1.0;
      s0 += axis[0].w[i] * c;
    }
    double t = s0;
    for (int k = 1; k < 4; ++k) {
      double sk = 0.0;
      for (double w : axis[k].w) sk += w;
      t *= sk;
    }
    return t;
  }
};

namespace transform_detail {

// Envelope-supported transverse radius of the orispherical charts at slice a:
// x0 <= X* bounds r^2 (hyperboloid carries the extra e^{-2a} term).
inline double slice_radius(Surface surf, double a, double xstar) {
  double r2 = 2.0 * xstar * std::exp(-a) - 1.0;
  if (surf == Surface::Hyperboloid) r2 -= std::exp(-2.0 * a);
  // Floor keeps the innermost scaled node clear of the singular locus.
  return std::sqrt(std::max(r2, 4e-4));
}

}  // namespace transform_detail

inline QuadratureGrid build_grid(ChartId chart, Surface surface, const TruncationSpec& spec) {
  using namespace transform_detail;
  spec.validate();

  const double xstar = envelope_x0(spec.envelope_rate);
  const double xeff = envelope_x0(spec.envelope_rate, 4.7);  // where integrands still matter
  const double lcap = std::max(spec.j_max, spec.l_max);
  const double mcap = std::max(spec.l_max, spec.mprime_max);
  const int n_angle = spec.n_angle ? spec.n_angle : std::max(16, 2 * static_cast<int>(lcap) + 12);
  const int n_phi = spec.n_phi ? spec.n_phi : std::max(24, 4 * static_cast<int>(mcap) + 8);
  const bool cone = surface == Surface::Cone;

  QuadratureGrid g;
  g.chart = chart;
  g.surface = surface;

  auto sin1 = [](double t) { return std::sin(t); };
  auto sin2 = [](double t) { return std::sin(t) * std::sin(t); };
  auto e3a = [cone](double a) { return (cone ? 0.125 : 1.0) * std::exp(3.0 * a); };

  // Radial a-axis: [two_sided, cut_lo, cut_hi, measure]
  bool a_two = cone;
  double a_lo = 0.0, a_hi = std::acosh(xstar);
  std::function<double(double)> a_mfac;
  switch (chart) {
    case ChartId::S:
      a_mfac = cone ? std::function<double(double)>(e3a)
                    : [](double a) { return std::pow(std::sinh(a), 3.0); };
      if (cone) {
        a_hi = std::log(xstar) + 0.2;
        a_lo = (14.0 * std::log(10.0) + spec.envelope_rate) / 3.0;
      }
      break;
    case ChartId::H:
      a_two = true;
      a_mfac = cone ? std::function<double(double)>(e3a)
                    : [](double a) { return std::pow(std::cosh(a), 3.0); };
      if (cone) {
        a_hi = std::log(2.0 * xstar);
        a_lo = (14.0 * std::log(10.0) + spec.envelope_rate) / 3.0;
      } else {
        a_lo = a_hi;
      }
      break;
    case ChartId::O:
    case ChartId::OC:
    case ChartId::OT:
      a_two = true;
      a_mfac = [](double a) { return std::exp(3.0 * a); };
      a_hi = std::log(2.0 * xstar);
      // On the cone the slice volume falls like e^{3a/2} toward a -> -inf.
      a_lo = cone ? (14.0 * std::log(10.0) - 1.5 * std::log(2.0 * xstar)) / 1.5 : a_hi;
      break;
    case ChartId::C:
      a_mfac = cone ? std::function<double(double)>(e3a) : [](double a) {
        const double sh = std::sinh(a);
        return std::cosh(a) * sh * sh;
      };
      if (cone) {
        a_hi = std::log(2.0 * xstar);
        a_lo = (14.0 * std::log(10.0) + spec.envelope_rate) / 3.0;
      }
      break;
    case ChartId::SH:
      a_mfac = cone ? std::function<double(double)>(e3a) : [](double a) {
        const double ch = std::cosh(a);
        return ch * ch * std::sinh(a);
      };
      if (cone) {
        a_hi = std::log(2.0 * xstar);
        a_lo = (14.0 * std::log(10.0) + spec.envelope_rate) / 3.0;
      }
      break;
  }
  if (spec.a_max > 0.0) a_lo = a_hi = spec.a_max;
  const int n_a =
      spec.n_a ? spec.n_a : auto_nodes((a_two ? a_lo : 0.0) + a_hi, spec.rho_max);
  g.axis[0] = tanh_axis(n_a, a_two, a_lo, a_hi, a_mfac);

  // Remaining axes per chart.
  const double r_eff = std::sqrt(std::max(xeff * xeff - 1.0, 1.0));
  auto unit_slice = [&](bool two, double freq, const std::function<double(double)>& m) {
    const int n = spec.n_b ? spec.n_b
                           : std::min(96, auto_nodes((two ? 2.0 : 1.0) * r_eff, freq));
    return gauss_axis(n, two ? -1.0 : 0.0, 1.0, m);
  };
  auto second_radial = [&](bool two, double cut, double freq,
                           const std::function<double(double)>& m) {
    const double c = spec.b_max > 0.0 ? spec.b_max : cut;
    const int n = spec.n_b ? spec.n_b : auto_nodes((two ? 2.0 : 1.0) * c, freq);
    return tanh_axis(n, two, c, c, m);
  };

  switch (chart) {
    case ChartId::S:
      g.axis[1] = gauss_axis(n_angle, 0.0, 0.5 * kTwoPi, sin2);
      g.axis[2] = gauss_axis(n_angle, 0.0, 0.5 * kTwoPi, sin1);
      g.axis[3] = midpoint_axis(n_phi);
      break;
    case ChartId::H:
      g.axis[1] = second_radial(false, std::acosh(xstar), spec.nu_max,
                                [](double b) { return std::pow(std::sinh(b), 2.0); });
      g.axis[2] = gauss_axis(n_angle, 0.0, 0.5 * kTwoPi, sin1);
      g.axis[3] = midpoint_axis(n_phi);
      break;
    case ChartId::O:
      g.slice_dims = 1;
      g.axis[1] = unit_slice(false, spec.kappa_max, [](double r) { return r * r; });
      g.axis[2] = gauss_axis(n_angle, 0.0, 0.5 * kTwoPi, sin1);
      g.axis[3] = midpoint_axis(n_phi);
      break;
    case ChartId::OC:
      g.slice_dims = 2;
      g.axis[1] = unit_slice(false, std::max(spec.eta_max, spec.q_max),
                             [](double xi) { return xi; });
      g.axis[2] = unit_slice(true, std::max(spec.eta_max, spec.q_max), nullptr);
      g.axis[3] = midpoint_axis(n_phi);
      break;
    case ChartId::OT:
      g.slice_dims = 3;
      for (int k = 1; k <= 3; ++k) g.axis[k] = unit_slice(true, spec.kappa_max, nullptr);
      break;
    case ChartId::C:
      g.axis[1] = second_radial(true, std::acosh(xstar) + (cone ? 1.0 : 0.0),
                                spec.tau_max, nullptr);
      g.axis[2] = gauss_axis(n_angle, 0.0, 0.5 * kTwoPi, sin1);
      g.axis[3] = midpoint_axis(n_phi);
      break;
    case ChartId::SH:
      g.axis[1] = second_radial(false, std::acosh(xstar) + (cone ? 1.0 : 0.0),
                                spec.omega_max,
                                [](double b) { return std::sinh(b); });
      g.axis[2] = midpoint_axis(n_phi);
      g.axis[3] = midpoint_axis(n_phi);
      break;
  }

  if (g.slice_dims) {
    g.slice_scale.resize(g.axis[0].x.size());
    if (spec.b_max > 0.0)
      std::fill(g.slice_scale.begin(), g.slice_scale.end(), spec.b_max);
    else
      for (std::size_t i = 0; i < g.slice_scale.size(); ++i)
        g.slice_scale[i] = transform_detail::slice_radius(surface, g.axis[0].x[i], xstar);
  }

  for (int k = 0; k < 4; ++k)
    g.bounds[k] = {g.axis[k].x.front(), g.axis[k].x.back()};
  return g;
}

inline std::vector<cplx> eval_on_grid(const ScalarField& f, const QuadratureGrid& grid) {
  if (f.chart != grid.chart || f.surface != grid.surface)
    throw std::invalid_argument("eval_on_grid: field and grid disagree on chart");
  std::vector<cplx> v(grid.size());
  transform_detail::parallel_for(v.size(), [&](std::size_t i) {
    v[i] = f.eval(grid.point(i), 0).value();
  });
  return v;
}

// <f,g> = sum w_i f(p_i) conj(g(p_i)); the grid realizes d^4x/x0.
inline cplx inner_product(const ScalarField& f, const ScalarField& g,
                          const QuadratureGrid& grid) {
  if (f.chart != grid.chart || f.surface != grid.surface || g.chart != grid.chart ||
      g.surface != grid.surface)
    throw std::invalid_argument("inner_product: fields and grid disagree on chart");
  return transform_detail::block_sum(grid.size(), [&](std::size_t i) {
    const ChartPoint p = grid.point(i);
    return grid.weight(i) * f.eval(p, 0).value() * std::conj(g.eval(p, 0).value());
  });
}

// Evaluation detour through the homogeneous coordinates, for integrating a
// field given in one chart against a grid in another. Value-level only.
inline ScalarField pullback_field(const ScalarField& f, ChartId chart) {
  if (f.chart == chart) return f;
  return {chart, f.surface, [f](const ChartPoint& cp, int deg) {
            if (deg != 0)
              throw std::invalid_argument("pullback_field: derivative jets unavailable");
            ChartPoint q = from_homogeneous(to_homogeneous(cp), f.chart);
            return Jet::constant(f.eval(q, 0).value(), 0);
          }};
}

}  // namespace dsh
