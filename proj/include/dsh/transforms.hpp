#pragma once
// Spectral expansions over the normalized families, with Plancherel
// verification; the orispherical (Gelfand-Graev) transform; homogeneity
// components on the cone; transition coefficients between families.
//
// Every family factors per chart axis, so forward coefficients for all
// labels at once reduce to four nested one-axis contractions against
// per-axis factor tables. The tables are scalar twins of the jet factors
// in bases.hpp: both sides seed from the same special-function values, so
// the cascade reproduces basis_h4 / basis_c4 products to roundoff.
//
// Conventions, fixed once and used consistently everywhere:
//   coefficient   c_L    = <f, Phi_L>  (basis conjugated on the right)
//   synthesis     f(x)   = sum_disc int dmu  W(L) c_L Phi_L(x)
//   Parseval      int |f|^2 d^4x/x0 = sum_disc int dmu  W(L) |c_L|^2
// where W is plancherel_weight and dmu the plain Lebesgue measure of the
// continuous labels (spherical d^3kappa in the OT chart). A CoefficientSet
// entry stores its dmu quadrature weight, so both sums are finite re-sums.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dsh/bases.hpp"
#include "dsh/grids.hpp"

namespace dsh {

struct CoefficientEntry {
  SpectralLabel label;
  cplx value = 0.0;
  double label_weight = 0.0;  // dmu quadrature weight of the continuous labels
};

struct CoefficientSet {
  ChartId chart{};
  Surface surface{};
  std::vector<CoefficientEntry> entries;

  // Nearest exact-label lookup; tolerance applies to the continuous labels.
  cplx value_at(const SpectralLabel& want, double tol = 1e-9) const {
    for (const auto& e : entries) {
      const SpectralLabel& L = e.label;
      if (L.chart != want.chart) continue;
      if (std::abs(L.rho - want.rho) > tol) continue;
      if (L.j != want.j || L.l != want.l || L.m != want.m || L.eps != want.eps ||
          L.mprime != want.mprime)
        continue;
      if (std::abs(L.nu - want.nu) > tol || std::abs(L.kappa - want.kappa) > tol ||
          std::abs(L.eta - want.eta) > tol || std::abs(L.q - want.q) > tol ||
          std::abs(L.tau - want.tau) > tol || std::abs(L.omega - want.omega) > tol)
        continue;
      if (std::abs(L.kvec[0] - want.kvec[0]) > tol ||
          std::abs(L.kvec[1] - want.kvec[1]) > tol ||
          std::abs(L.kvec[2] - want.kvec[2]) > tol)
        continue;
      return e.value;
    }
    throw std::invalid_argument("CoefficientSet: no entry at the requested label");
  }
};

namespace transform_detail {

// ---------------------------------------------------------------------------
// Scalar per-axis factors. Products over the four axes equal the jet
// formulas in basis_detail at degree zero; label-global constants sit in
// the a-factor except the SH b-normalization, which rides with its b-factor
// on both surfaces (mirroring cone_jet).

inline cplx azimuth_factor(int m, double phi) {
  return std::exp(cplx(0.0, m * phi));
}

inline cplx theta_factor(int l, int m, double theta) {
  const int am = std::abs(m);
  double c = std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) *
                       std::exp(std::lgamma(l + am + 1.0) - std::lgamma(l - am + 1.0)));
  if (m >= 0 && (am % 2)) c = -c;
  return c * legendre_p(cplx(-double(am)), cplx(double(l)), std::cos(theta));
}

inline cplx beta_factor(int j, int l, double beta) {
  const double norm = std::sqrt(j + 1.0) *
                      std::exp(0.5 * (std::lgamma(j + l + 2.0) - std::lgamma(j - l + 1.0)));
  return norm * legendre_p(cplx(-double(l) - 0.5), cplx(double(j) + 0.5), std::cos(beta)) /
         std::sqrt(std::sin(beta));
}

inline cplx h_b_factor(double nu, int l, double b) {
  const cplx inu(0.0, nu);
  return basis_detail::mod_ratio({inu}, {inu - double(l)}) *
         legendre_p(cplx(-double(l) - 0.5), inu - 0.5, std::cosh(b)) /
         std::sqrt(std::sinh(b));
}

inline cplx sh_b_factor(double omega, int m, double b) {
  const cplx iw(0.0, omega);
  return basis_detail::mod_ratio({iw + 0.5}, {iw + double(m) + 0.5}) *
         legendre_p(cplx(double(m)), iw - 0.5, std::cosh(b));
}

inline cplx o_r_factor(int l, double kappa, double r) {
  const double arg = kappa * r;
  return bessel_j(double(l) + 0.5, arg) / std::sqrt(arg);
}

inline cplx oc_xi_factor(int m, double eta, double xi) {
  if (eta == 0.0) return m == 0 ? 1.0 : 0.0;
  const double v = bessel_j(double(std::abs(m)), eta * xi);
  return (m < 0 && (m & 1)) ? -v : v;
}

inline double ipow_s(double t, int n) {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= t;
  return r;
}

// a-dependent factor of the normalized family member, with the label-global
// constants of the split above folded in.
inline cplx radial_factor(const SpectralLabel& L, Surface surf, double a) {
  const cplx irho(0.0, L.rho);
  if (surf == Surface::Cone) {
    const auto [cp, cm] = basis_detail::cone_constants(L);
    cplx rad = cp * std::exp((irho - 1.5) * a) + cm * std::exp((-irho - 1.5) * a);
    switch (L.chart) {
      case ChartId::S:
      case ChartId::H:
      case ChartId::O: return rad;
      case ChartId::OC: return rad / kTwoPi;
      case ChartId::OT: return rad * std::pow(kTwoPi, -1.5);
      case ChartId::C: return rad / std::sqrt(kTwoPi);
      case ChartId::SH: return rad / kTwoPi;
    }
    throw std::logic_error("radial_factor: unreachable");
  }
  switch (L.chart) {
    case ChartId::S: {
      const double norm =
          basis_detail::mod_ratio({irho - 0.5}, {irho - double(L.j) - 0.5});
      return norm *
             legendre_p(cplx(-double(L.j) - 1.0), irho - 0.5, std::cosh(a)) /
             std::sinh(a);
    }
    case ChartId::H: {
      const cplx inu(0.0, L.nu);
      const double norm =
          basis_detail::mod_ratio({irho + inu + 0.5, irho - inu + 0.5}, {irho + 1.5}) /
          std::sqrt(kTwoPi);
      return norm * std::pow(std::cosh(a), -1.5) *
             legendre_p(-irho, inu - 0.5, std::tanh(a) * double(L.eps));
    }
    case ChartId::O: {
      const double norm = std::sqrt(2.0 / kPi) / basis_detail::gamma_mod(irho + 1.5);
      return norm * std::exp(-1.5 * a) * macdonald_k_imag(L.rho, L.kappa * std::exp(-a));
    }
    case ChartId::OC: {
      const double norm =
          1.0 / (kPi * std::sqrt(kTwoPi) * basis_detail::gamma_mod(irho + 1.5));
      return norm * std::exp(-1.5 * a) *
             macdonald_k_imag(L.rho, L.wavenumber() * std::exp(-a));
    }
    case ChartId::OT: {
      const double norm =
          1.0 / (2.0 * kPi * kPi * basis_detail::gamma_mod(irho + 1.5));
      return norm * std::exp(-1.5 * a) *
             macdonald_k_imag(L.rho, L.wavenumber() * std::exp(-a));
    }
    case ChartId::C: {
      const cplx itau(0.0, L.tau);
      const cplx A = (irho + itau + double(L.l) + 1.5) * 0.5;
      const cplx B = (irho - itau + double(L.l) + 1.5) * 0.5;
      const double norm = basis_detail::mod_ratio({A, B}, {irho + 1.5}) /
                          (kTwoPi * std::tgamma(double(L.l) + 1.5));
      const double t = std::tanh(a);
      return norm * std::exp((-irho - 1.5) * std::log(std::cosh(a))) *
             ipow_s(t, L.l) * gauss_2f1(A, B, cplx(double(L.l) + 1.5), t * t);
    }
    case ChartId::SH: {
      const int mt = std::abs(L.mprime);
      const cplx iw(0.0, L.omega);
      const cplx A = (irho + iw + double(mt) + 1.0) * 0.5;
      const cplx B = (irho - iw + double(mt) + 1.0) * 0.5;
      const double norm = std::pow(kTwoPi, -1.5) *
                          basis_detail::mod_ratio({A, B}, {irho + 1.5}) /
                          std::tgamma(double(mt) + 1.0);
      const double t = std::tanh(a);
      return norm * ipow_s(t, mt) *
             std::exp((-irho - 1.5) * std::log(std::cosh(a))) *
             gauss_2f1(A, B, cplx(double(mt) + 1.0), t * t);
    }
  }
  throw std::logic_error("radial_factor: unreachable");
}

// ---------------------------------------------------------------------------
// Cascade plan. Contracting grid axis k maps label space L_{k+1} to L_k
// (L_4 is the trivial root, L_0 the full label set): each L_k element has a
// parent in L_{k+1} and a row in stage k's factor table. Tables of sliced
// axes carry one block per a-node.

struct Stage {
  std::size_t n_out = 1;
  std::vector<std::size_t> parent;
  std::vector<std::size_t> row;
  std::size_t n_rows = 0;
  std::size_t n_nodes = 0;
  bool per_slice = false;
  std::vector<cplx> table;  // [slice][row][node]

  void shape(std::size_t rows, std::size_t nodes, std::size_t slices) {
    n_rows = rows;
    n_nodes = nodes;
    per_slice = slices > 1;
    table.assign(rows * nodes * (per_slice ? slices : 1), cplx(0.0));
  }
  cplx* block(std::size_t slice) {
    return table.data() + (per_slice ? slice * n_rows * n_nodes : 0);
  }
  const cplx* block(std::size_t slice) const {
    return table.data() + (per_slice ? slice * n_rows * n_nodes : 0);
  }
};

struct CascadePlan {
  ChartId chart{};
  Surface surface{};
  std::array<Stage, 4> stage;
  std::vector<SpectralLabel> labels;  // indexed by L_0
  std::vector<double> label_w;        // dmu weight per label
};

// Shared stage-0 fill: rows keyed by an arbitrary label list.
inline void fill_radial_stage(Stage& st, const std::vector<SpectralLabel>& rows,
                              Surface surf, const GridAxis& ax) {
  st.shape(rows.size(), ax.x.size(), 1);
  parallel_for(rows.size(), [&](std::size_t r) {
    cplx* t = st.block(0) + r * st.n_nodes;
    for (std::size_t i = 0; i < ax.x.size(); ++i)
      t[i] = radial_factor(rows[r], surf, ax.x[i]);
  });
}

inline void fill_phase_stage(Stage& st, const GridAxis& ax, int mcap) {
  st.shape(2 * mcap + 1, ax.x.size(), 1);
  for (int m = -mcap; m <= mcap; ++m) {
    cplx* t = st.block(0) + (m + mcap) * st.n_nodes;
    for (std::size_t i = 0; i < ax.x.size(); ++i) t[i] = azimuth_factor(m, ax.x[i]);
  }
}

inline CascadePlan build_plan(const QuadratureGrid& grid, const TruncationSpec& spec) {
  spec.validate();
  CascadePlan plan;
  plan.chart = grid.chart;
  plan.surface = grid.surface;
  const Surface surf = grid.surface;
  const std::size_t n_slices = grid.slice_dims ? grid.slice_scale.size() : 1;

  const Rule1D rho = gl_on(spec.n_rho, 0.0, spec.rho_max);
  if (surf == Surface::Cone && rho.x.front() < kRhoMin)
    throw std::invalid_argument("build_plan: rho nodes fall below the cone rho floor");

  auto& st = plan.stage;
  switch (grid.chart) {
    case ChartId::S: {
      const int lc = std::min(spec.j_max, spec.l_max);
      fill_phase_stage(st[3], grid.axis[3], lc);
      st[3].n_out = 2 * lc + 1;
      st[3].parent.assign(st[3].n_out, 0);
      st[3].row.resize(st[3].n_out);
      for (std::size_t i = 0; i < st[3].n_out; ++i) st[3].row[i] = i;

      // L2 = (l, m), index l^2 + l + m
      const std::size_t n2 = std::size_t(lc + 1) * (lc + 1);
      st[2].n_out = n2;
      st[2].parent.resize(n2);
      st[2].row.resize(n2);
      st[2].shape(n2, grid.axis[2].x.size(), 1);
      for (int l = 0; l <= lc; ++l)
        for (int m = -l; m <= l; ++m) {
          const std::size_t id = std::size_t(l) * l + l + m;
          st[2].parent[id] = std::size_t(m + lc);
          st[2].row[id] = id;
          cplx* t = st[2].block(0) + id * st[2].n_nodes;
          for (std::size_t i = 0; i < st[2].n_nodes; ++i)
            t[i] = theta_factor(l, m, grid.axis[2].x[i]);
        }

      // L1 = (j, l, m); beta rows keyed by (j, l)
      std::vector<std::array<int, 3>> jlm;
      std::vector<std::array<int, 2>> jl;
      std::vector<std::size_t> jl_row((spec.j_max + 1) * (lc + 1), 0);
      for (int j = 0; j <= spec.j_max; ++j)
        for (int l = 0; l <= std::min(j, lc); ++l) {
          jl_row[std::size_t(j) * (lc + 1) + l] = jl.size();
          jl.push_back({j, l});
          for (int m = -l; m <= l; ++m) jlm.push_back({j, l, m});
        }
      st[1].n_out = jlm.size();
      st[1].parent.resize(jlm.size());
      st[1].row.resize(jlm.size());
      for (std::size_t i = 0; i < jlm.size(); ++i) {
        auto [j, l, m] = jlm[i];
        st[1].parent[i] = std::size_t(l) * l + l + m;
        st[1].row[i] = jl_row[std::size_t(j) * (lc + 1) + l];
      }
      st[1].shape(jl.size(), grid.axis[1].x.size(), 1);
      parallel_for(jl.size(), [&](std::size_t r) {
        cplx* t = st[1].block(0) + r * st[1].n_nodes;
        for (std::size_t i = 0; i < st[1].n_nodes; ++i)
          t[i] = beta_factor(jl[r][0], jl[r][1], grid.axis[1].x[i]);
      });

      // L0 = (rho, j, l, m); radial rows keyed by (rho, j)
      std::vector<SpectralLabel> rows;
      for (int k = 0; k < spec.n_rho; ++k)
        for (int j = 0; j <= spec.j_max; ++j) rows.push_back(label_s(rho.x[k], j, 0, 0));
      st[0].n_out = std::size_t(spec.n_rho) * jlm.size();
      st[0].parent.resize(st[0].n_out);
      st[0].row.resize(st[0].n_out);
      plan.labels.reserve(st[0].n_out);
      plan.label_w.reserve(st[0].n_out);
      for (int k = 0; k < spec.n_rho; ++k)
        for (std::size_t i = 0; i < jlm.size(); ++i) {
          const std::size_t id = std::size_t(k) * jlm.size() + i;
          st[0].parent[id] = i;
          st[0].row[id] = std::size_t(k) * (spec.j_max + 1) + jlm[i][0];
          plan.labels.push_back(label_s(rho.x[k], jlm[i][0], jlm[i][1], jlm[i][2]));
          plan.label_w.push_back(rho.w[k]);
        }
      fill_radial_stage(st[0], rows, surf, grid.axis[0]);
      break;
    }

    case ChartId::H: {
      const int lc = spec.l_max;
      fill_phase_stage(st[3], grid.axis[3], lc);
      st[3].n_out = 2 * lc + 1;
      st[3].parent.assign(st[3].n_out, 0);
      st[3].row.resize(st[3].n_out);
      for (std::size_t i = 0; i < st[3].n_out; ++i) st[3].row[i] = i;

      const std::size_t n2 = std::size_t(lc + 1) * (lc + 1);
      st[2].n_out = n2;
      st[2].parent.resize(n2);
      st[2].row.resize(n2);
      st[2].shape(n2, grid.axis[2].x.size(), 1);
      for (int l = 0; l <= lc; ++l)
        for (int m = -l; m <= l; ++m) {
          const std::size_t id = std::size_t(l) * l + l + m;
          st[2].parent[id] = std::size_t(m + lc);
          st[2].row[id] = id;
          cplx* t = st[2].block(0) + id * st[2].n_nodes;
          for (std::size_t i = 0; i < st[2].n_nodes; ++i)
            t[i] = theta_factor(l, m, grid.axis[2].x[i]);
        }

      const Rule1D nu = gl_on(spec.n_nu, 0.0, spec.nu_max);
      // L1 = (nu, l, m); b rows keyed by (nu, l)
      st[1].n_out = std::size_t(spec.n_nu) * n2;
      st[1].parent.resize(st[1].n_out);
      st[1].row.resize(st[1].n_out);
      st[1].shape(std::size_t(spec.n_nu) * (lc + 1), grid.axis[1].x.size(), 1);
      for (int kn = 0; kn < spec.n_nu; ++kn)
        for (int l = 0; l <= lc; ++l)
          for (int m = -l; m <= l; ++m) {
            const std::size_t i2 = std::size_t(l) * l + l + m;
            const std::size_t id = std::size_t(kn) * n2 + i2;
            st[1].parent[id] = i2;
            st[1].row[id] = std::size_t(kn) * (lc + 1) + l;
          }
      parallel_for(st[1].n_rows, [&](std::size_t r) {
        const int kn = int(r) / (lc + 1), l = int(r) % (lc + 1);
        cplx* t = st[1].block(0) + r * st[1].n_nodes;
        for (std::size_t i = 0; i < st[1].n_nodes; ++i)
          t[i] = h_b_factor(nu.x[kn], l, grid.axis[1].x[i]);
      });

      // L0 = (rho, eps, nu, l, m); radial rows keyed by (rho, eps, nu)
      std::vector<SpectralLabel> rows;
      for (int k = 0; k < spec.n_rho; ++k)
        for (int e = 0; e < 2; ++e)
          for (int kn = 0; kn < spec.n_nu; ++kn)
            rows.push_back(label_h(rho.x[k], nu.x[kn], 0, 0, e ? -1 : +1));
      st[0].n_out = std::size_t(2 * spec.n_rho) * st[1].n_out;
      st[0].parent.resize(st[0].n_out);
      st[0].row.resize(st[0].n_out);
      plan.labels.reserve(st[0].n_out);
      plan.label_w.reserve(st[0].n_out);
      std::size_t id = 0;
      for (int k = 0; k < spec.n_rho; ++k)
        for (int e = 0; e < 2; ++e)
          for (int kn = 0; kn < spec.n_nu; ++kn)
            for (int l = 0; l <= lc; ++l)
              for (int m = -l; m <= l; ++m, ++id) {
                st[0].parent[id] = std::size_t(kn) * n2 + std::size_t(l) * l + l + m;
                st[0].row[id] = (std::size_t(k) * 2 + e) * spec.n_nu + kn;
                plan.labels.push_back(
                    label_h(rho.x[k], nu.x[kn], l, m, e ? -1 : +1));
                plan.label_w.push_back(rho.w[k] * nu.w[kn]);
              }
      fill_radial_stage(st[0], rows, surf, grid.axis[0]);
      break;
    }

    case ChartId::O: {
      const int lc = spec.l_max;
      fill_phase_stage(st[3], grid.axis[3], lc);
      st[3].n_out = 2 * lc + 1;
      st[3].parent.assign(st[3].n_out, 0);
      st[3].row.resize(st[3].n_out);
      for (std::size_t i = 0; i < st[3].n_out; ++i) st[3].row[i] = i;

      const std::size_t n2 = std::size_t(lc + 1) * (lc + 1);
      st[2].n_out = n2;
      st[2].parent.resize(n2);
      st[2].row.resize(n2);
      st[2].shape(n2, grid.axis[2].x.size(), 1);
      for (int l = 0; l <= lc; ++l)
        for (int m = -l; m <= l; ++m) {
          const std::size_t id = std::size_t(l) * l + l + m;
          st[2].parent[id] = std::size_t(m + lc);
          st[2].row[id] = id;
          cplx* t = st[2].block(0) + id * st[2].n_nodes;
          for (std::size_t i = 0; i < st[2].n_nodes; ++i)
            t[i] = theta_factor(l, m, grid.axis[2].x[i]);
        }

      const Rule1D kap = gl_on(spec.n_kappa, 0.0, spec.kappa_max);
      // L1 = (kappa, l, m); r rows keyed by (kappa, l), sliced
      st[1].n_out = std::size_t(spec.n_kappa) * n2;
      st[1].parent.resize(st[1].n_out);
      st[1].row.resize(st[1].n_out);
      for (int kk = 0; kk < spec.n_kappa; ++kk)
        for (int l = 0; l <= lc; ++l)
          for (int m = -l; m <= l; ++m) {
            const std::size_t i2 = std::size_t(l) * l + l + m;
            const std::size_t id = std::size_t(kk) * n2 + i2;
            st[1].parent[id] = i2;
            st[1].row[id] = std::size_t(kk) * (lc + 1) + l;
          }
      st[1].shape(std::size_t(spec.n_kappa) * (lc + 1), grid.axis[1].x.size(), n_slices);
      parallel_for(n_slices, [&](std::size_t s) {
        const double sc = grid.slice_dims ? grid.slice_scale[s] : 1.0;
        cplx* blk = st[1].block(s);
        for (std::size_t r = 0; r < st[1].n_rows; ++r) {
          const int kk = int(r) / (lc + 1), l = int(r) % (lc + 1);
          for (std::size_t i = 0; i < st[1].n_nodes; ++i)
            blk[r * st[1].n_nodes + i] = o_r_factor(l, kap.x[kk], sc * grid.axis[1].x[i]);
        }
      });

      std::vector<SpectralLabel> rows;
      for (int k = 0; k < spec.n_rho; ++k)
        for (int kk = 0; kk < spec.n_kappa; ++kk)
          rows.push_back(label_o(rho.x[k], kap.x[kk], 0, 0));
      st[0].n_out = std::size_t(spec.n_rho) * st[1].n_out;
      st[0].parent.resize(st[0].n_out);
      st[0].row.resize(st[0].n_out);
      plan.labels.reserve(st[0].n_out);
      plan.label_w.reserve(st[0].n_out);
      std::size_t id = 0;
      for (int k = 0; k < spec.n_rho; ++k)
        for (int kk = 0; kk < spec.n_kappa; ++kk)
          for (int l = 0; l <= lc; ++l)
            for (int m = -l; m <= l; ++m, ++id) {
              st[0].parent[id] = std::size_t(kk) * n2 + std::size_t(l) * l + l + m;
              st[0].row[id] = std::size_t(k) * spec.n_kappa + kk;
              plan.labels.push_back(label_o(rho.x[k], kap.x[kk], l, m));
              plan.label_w.push_back(rho.w[k] * kap.w[kk]);
            }
      fill_radial_stage(st[0], rows, surf, grid.axis[0]);
      break;
    }

    case ChartId::OC: {
      const int mc = spec.l_max;
      fill_phase_stage(st[3], grid.axis[3], mc);
      st[3].n_out = 2 * mc + 1;
      st[3].parent.assign(st[3].n_out, 0);
      st[3].row.resize(st[3].n_out);
      for (std::size_t i = 0; i < st[3].n_out; ++i) st[3].row[i] = i;

      const Rule1D qr = gl_on(spec.n_q, -spec.q_max, spec.q_max);
      const Rule1D eta = gl_on(spec.n_eta, 0.0, spec.eta_max);
      const std::size_t nm = std::size_t(2 * mc + 1);

      // L2 = (q, m); z rows keyed by q, sliced
      st[2].n_out = std::size_t(spec.n_q) * nm;
      st[2].parent.resize(st[2].n_out);
      st[2].row.resize(st[2].n_out);
      for (int kq = 0; kq < spec.n_q; ++kq)
        for (std::size_t im = 0; im < nm; ++im) {
          const std::size_t id = std::size_t(kq) * nm + im;
          st[2].parent[id] = im;
          st[2].row[id] = std::size_t(kq);
        }
      st[2].shape(spec.n_q, grid.axis[2].x.size(), n_slices);
      parallel_for(n_slices, [&](std::size_t s) {
        const double sc = grid.slice_scale[s];
        cplx* blk = st[2].block(s);
        for (int kq = 0; kq < spec.n_q; ++kq)
          for (std::size_t i = 0; i < st[2].n_nodes; ++i)
            blk[std::size_t(kq) * st[2].n_nodes + i] =
                std::exp(cplx(0.0, qr.x[kq] * sc * grid.axis[2].x[i]));
      });

      // L1 = (eta, q, m); xi rows keyed by (eta, m), sliced
      st[1].n_out = std::size_t(spec.n_eta) * st[2].n_out;
      st[1].parent.resize(st[1].n_out);
      st[1].row.resize(st[1].n_out);
      for (int ke = 0; ke < spec.n_eta; ++ke)
        for (int kq = 0; kq < spec.n_q; ++kq)
          for (std::size_t im = 0; im < nm; ++im) {
            const std::size_t id =
                (std::size_t(ke) * spec.n_q + kq) * nm + im;
            st[1].parent[id] = std::size_t(kq) * nm + im;
            st[1].row[id] = std::size_t(ke) * nm + im;
          }
      st[1].shape(std::size_t(spec.n_eta) * nm, grid.axis[1].x.size(), n_slices);
      parallel_for(n_slices, [&](std::size_t s) {
        const double sc = grid.slice_scale[s];
        cplx* blk = st[1].block(s);
        for (std::size_t r = 0; r < st[1].n_rows; ++r) {
          const int ke = int(r / nm), m = int(r % nm) - mc;
          for (std::size_t i = 0; i < st[1].n_nodes; ++i)
            blk[r * st[1].n_nodes + i] =
                oc_xi_factor(m, eta.x[ke], sc * grid.axis[1].x[i]);
        }
      });

      std::vector<SpectralLabel> rows;
      for (int k = 0; k < spec.n_rho; ++k)
        for (int ke = 0; ke < spec.n_eta; ++ke)
          for (int kq = 0; kq < spec.n_q; ++kq)
            rows.push_back(label_oc(rho.x[k], eta.x[ke], qr.x[kq], 0));
      st[0].n_out = std::size_t(spec.n_rho) * st[1].n_out;
      st[0].parent.resize(st[0].n_out);
      st[0].row.resize(st[0].n_out);
      plan.labels.reserve(st[0].n_out);
      plan.label_w.reserve(st[0].n_out);
      std::size_t id = 0;
      for (int k = 0; k < spec.n_rho; ++k)
        for (int ke = 0; ke < spec.n_eta; ++ke)
          for (int kq = 0; kq < spec.n_q; ++kq)
            for (std::size_t im = 0; im < nm; ++im, ++id) {
              st[0].parent[id] = (std::size_t(ke) * spec.n_q + kq) * nm + im;
              st[0].row[id] = (std::size_t(k) * spec.n_eta + ke) * spec.n_q + kq;
              plan.labels.push_back(
                  label_oc(rho.x[k], eta.x[ke], qr.x[kq], int(im) - mc));
              plan.label_w.push_back(rho.w[k] * eta.w[ke] * qr.w[kq]);
            }
      fill_radial_stage(st[0], rows, surf, grid.axis[0]);
      break;
    }

    case ChartId::OT: {
      const Rule1D kap = gl_on(spec.n_kappa, 0.0, spec.kappa_max);
      const Rule1D thk = gl_on(spec.n_kdir, 0.0, kPi);
      const int nph = 2 * spec.n_kdir;
      const std::size_t npair = std::size_t(spec.n_kappa) * spec.n_kdir;
      const std::size_t ntr = npair * nph;
      auto kvec_of = [&](std::size_t it) {
        const std::size_t ip = it / nph;
        const int iph = int(it % nph);
        const double kappa = kap.x[ip / spec.n_kdir];
        const double th = thk.x[ip % spec.n_kdir];
        const double ph = (iph + 0.5) * kTwoPi / nph;
        return std::array<double, 3>{kappa * std::sin(th) * std::cos(ph),
                                     kappa * std::sin(th) * std::sin(ph),
                                     kappa * std::cos(th)};
      };

      // L3 = (kappa, theta_k) pairs against y3; L2 = full triples against y2;
      // L1 keeps the triples against y1. All three tables are sliced.
      st[3].n_out = npair;
      st[3].parent.assign(npair, 0);
      st[3].row.resize(npair);
      for (std::size_t i = 0; i < npair; ++i) st[3].row[i] = i;
      st[2].n_out = ntr;
      st[2].parent.resize(ntr);
      st[2].row.resize(ntr);
      st[1].n_out = ntr;
      st[1].parent.resize(ntr);
      st[1].row.resize(ntr);
      for (std::size_t it = 0; it < ntr; ++it) {
        st[2].parent[it] = it / nph;
        st[2].row[it] = it;
        st[1].parent[it] = it;
        st[1].row[it] = it;
      }
      st[3].shape(npair, grid.axis[3].x.size(), n_slices);
      st[2].shape(ntr, grid.axis[2].x.size(), n_slices);
      st[1].shape(ntr, grid.axis[1].x.size(), n_slices);
      parallel_for(n_slices, [&](std::size_t s) {
        const double sc = grid.slice_scale[s];
        for (std::size_t ip = 0; ip < npair; ++ip) {
          const double k3 = kap.x[ip / spec.n_kdir] * std::cos(thk.x[ip % spec.n_kdir]);
          cplx* t = st[3].block(s) + ip * st[3].n_nodes;
          for (std::size_t i = 0; i < st[3].n_nodes; ++i)
            t[i] = std::exp(cplx(0.0, k3 * sc * grid.axis[3].x[i]));
        }
        for (std::size_t it = 0; it < ntr; ++it) {
          const auto kv = kvec_of(it);
          cplx* t2 = st[2].block(s) + it * st[2].n_nodes;
          for (std::size_t i = 0; i < st[2].n_nodes; ++i)
            t2[i] = std::exp(cplx(0.0, kv[1] * sc * grid.axis[2].x[i]));
          cplx* t1 = st[1].block(s) + it * st[1].n_nodes;
          for (std::size_t i = 0; i < st[1].n_nodes; ++i)
            t1[i] = std::exp(cplx(0.0, kv[0] * sc * grid.axis[1].x[i]));
        }
      });

      std::vector<SpectralLabel> rows;
      for (int k = 0; k < spec.n_rho; ++k)
        for (int kk = 0; kk < spec.n_kappa; ++kk)
          rows.push_back(label_ot(rho.x[k], {0.0, 0.0, kap.x[kk]}));
      st[0].n_out = std::size_t(spec.n_rho) * ntr;
      st[0].parent.resize(st[0].n_out);
      st[0].row.resize(st[0].n_out);
      plan.labels.reserve(st[0].n_out);
      plan.label_w.reserve(st[0].n_out);
      std::size_t id = 0;
      for (int k = 0; k < spec.n_rho; ++k)
        for (std::size_t it = 0; it < ntr; ++it, ++id) {
          st[0].parent[id] = it;
          st[0].row[id] = std::size_t(k) * spec.n_kappa + it / (nph * spec.n_kdir);
          plan.labels.push_back(label_ot(rho.x[k], kvec_of(it)));
          const std::size_t ikap = it / (nph * spec.n_kdir);
          const std::size_t ith = (it / nph) % spec.n_kdir;
          const double kappa = kap.x[ikap];
          plan.label_w.push_back(rho.w[k] * kap.w[ikap] * kappa * kappa *
                                 thk.w[ith] * std::sin(thk.x[ith]) * kTwoPi / nph);
        }
      fill_radial_stage(st[0], rows, surf, grid.axis[0]);
      break;
    }

    case ChartId::C: {
      const int lc = spec.l_max;
      fill_phase_stage(st[3], grid.axis[3], lc);
      st[3].n_out = 2 * lc + 1;
      st[3].parent.assign(st[3].n_out, 0);
      st[3].row.resize(st[3].n_out);
      for (std::size_t i = 0; i < st[3].n_out; ++i) st[3].row[i] = i;

      const std::size_t n2 = std::size_t(lc + 1) * (lc + 1);
      st[2].n_out = n2;
      st[2].parent.resize(n2);
      st[2].row.resize(n2);
      st[2].shape(n2, grid.axis[2].x.size(), 1);
      for (int l = 0; l <= lc; ++l)
        for (int m = -l; m <= l; ++m) {
          const std::size_t id = std::size_t(l) * l + l + m;
          st[2].parent[id] = std::size_t(m + lc);
          st[2].row[id] = id;
          cplx* t = st[2].block(0) + id * st[2].n_nodes;
          for (std::size_t i = 0; i < st[2].n_nodes; ++i)
            t[i] = theta_factor(l, m, grid.axis[2].x[i]);
        }

      const Rule1D tau = gl_on(spec.n_tau, -spec.tau_max, spec.tau_max);
      // L1 = (tau, l, m); b rows keyed by tau
      st[1].n_out = std::size_t(spec.n_tau) * n2;
      st[1].parent.resize(st[1].n_out);
      st[1].row.resize(st[1].n_out);
      for (int kt = 0; kt < spec.n_tau; ++kt)
        for (std::size_t i2 = 0; i2 < n2; ++i2) {
          const std::size_t id = std::size_t(kt) * n2 + i2;
          st[1].parent[id] = i2;
          st[1].row[id] = std::size_t(kt);
        }
      st[1].shape(spec.n_tau, grid.axis[1].x.size(), 1);
      for (int kt = 0; kt < spec.n_tau; ++kt) {
        cplx* t = st[1].block(0) + std::size_t(kt) * st[1].n_nodes;
        for (std::size_t i = 0; i < st[1].n_nodes; ++i)
          t[i] = std::exp(cplx(0.0, tau.x[kt] * grid.axis[1].x[i]));
      }

      std::vector<SpectralLabel> rows;
      for (int k = 0; k < spec.n_rho; ++k)
        for (int kt = 0; kt < spec.n_tau; ++kt)
          for (int l = 0; l <= lc; ++l)
            rows.push_back(label_c(rho.x[k], tau.x[kt], l, 0));
      st[0].n_out = std::size_t(spec.n_rho) * st[1].n_out;
      st[0].parent.resize(st[0].n_out);
      st[0].row.resize(st[0].n_out);
      plan.labels.reserve(st[0].n_out);
      plan.label_w.reserve(st[0].n_out);
      std::size_t id = 0;
      for (int k = 0; k < spec.n_rho; ++k)
        for (int kt = 0; kt < spec.n_tau; ++kt)
          for (int l = 0; l <= lc; ++l)
            for (int m = -l; m <= l; ++m, ++id) {
              st[0].parent[id] = std::size_t(kt) * n2 + std::size_t(l) * l + l + m;
              st[0].row[id] = (std::size_t(k) * spec.n_tau + kt) * (lc + 1) + l;
              plan.labels.push_back(label_c(rho.x[k], tau.x[kt], l, m));
              plan.label_w.push_back(rho.w[k] * tau.w[kt]);
            }
      fill_radial_stage(st[0], rows, surf, grid.axis[0]);
      break;
    }

    case ChartId::SH: {
      const int mp = spec.mprime_max, mc = spec.l_max;
      fill_phase_stage(st[3], grid.axis[3], mp);
      st[3].n_out = 2 * mp + 1;
      st[3].parent.assign(st[3].n_out, 0);
      st[3].row.resize(st[3].n_out);
      for (std::size_t i = 0; i < st[3].n_out; ++i) st[3].row[i] = i;

      const std::size_t nmp = std::size_t(2 * mp + 1), nmm = std::size_t(2 * mc + 1);
      // L2 = (m, m'); phi rows keyed by m
      st[2].n_out = nmm * nmp;
      st[2].parent.resize(st[2].n_out);
      st[2].row.resize(st[2].n_out);
      for (std::size_t im = 0; im < nmm; ++im)
        for (std::size_t ip = 0; ip < nmp; ++ip) {
          const std::size_t id = im * nmp + ip;
          st[2].parent[id] = ip;
          st[2].row[id] = im;
        }
      fill_phase_stage(st[2], grid.axis[2], mc);

      const Rule1D om = gl_on(spec.n_omega, 0.0, spec.omega_max);
      // L1 = (omega, m, m'); b rows keyed by (omega, m)
      st[1].n_out = std::size_t(spec.n_omega) * st[2].n_out;
      st[1].parent.resize(st[1].n_out);
      st[1].row.resize(st[1].n_out);
      for (int ko = 0; ko < spec.n_omega; ++ko)
        for (std::size_t im = 0; im < nmm; ++im)
          for (std::size_t ip = 0; ip < nmp; ++ip) {
            const std::size_t id = (std::size_t(ko) * nmm + im) * nmp + ip;
            st[1].parent[id] = im * nmp + ip;
            st[1].row[id] = std::size_t(ko) * nmm + im;
          }
      st[1].shape(std::size_t(spec.n_omega) * nmm, grid.axis[1].x.size(), 1);
      parallel_for(st[1].n_rows, [&](std::size_t r) {
        const int ko = int(r / nmm), m = int(r % nmm) - mc;
        cplx* t = st[1].block(0) + r * st[1].n_nodes;
        for (std::size_t i = 0; i < st[1].n_nodes; ++i)
          t[i] = sh_b_factor(om.x[ko], m, grid.axis[1].x[i]);
      });

      std::vector<SpectralLabel> rows;
      for (int k = 0; k < spec.n_rho; ++k)
        for (int ko = 0; ko < spec.n_omega; ++ko)
          for (int amp = 0; amp <= mp; ++amp)
            rows.push_back(label_sh(rho.x[k], om.x[ko], amp, 0));
      st[0].n_out = std::size_t(spec.n_rho) * st[1].n_out;
      st[0].parent.resize(st[0].n_out);
      st[0].row.resize(st[0].n_out);
      plan.labels.reserve(st[0].n_out);
      plan.label_w.reserve(st[0].n_out);
      std::size_t id = 0;
      for (int k = 0; k < spec.n_rho; ++k)
        for (int ko = 0; ko < spec.n_omega; ++ko)
          for (std::size_t im = 0; im < nmm; ++im)
            for (std::size_t ip = 0; ip < nmp; ++ip, ++id) {
              const int mprime = int(ip) - mp;
              st[0].parent[id] = (std::size_t(ko) * nmm + im) * nmp + ip;
              st[0].row[id] =
                  (std::size_t(k) * spec.n_omega + ko) * (mp + 1) + std::abs(mprime);
              plan.labels.push_back(
                  label_sh(rho.x[k], om.x[ko], mprime, int(im) - mc));
              plan.label_w.push_back(rho.w[k] * om.w[ko]);
            }
      fill_radial_stage(st[0], rows, surf, grid.axis[0]);
      break;
    }
  }
  return plan;
}

// Forward pass: fold node weights into the values, then contract axes 3..0.
inline std::vector<cplx> analyze_pass(const QuadratureGrid& grid, const CascadePlan& plan,
                                      std::vector<cplx> cur) {
  const auto d = grid.dims();
  for (int k = 3; k >= 0; --k) {
    const Stage& st = plan.stage[k];
    std::size_t outer = 1;
    for (int j = 0; j < k; ++j) outer *= d[j];
    std::size_t slice_div = 1;
    for (int j = 1; j < k; ++j) slice_div *= d[j];
    const std::size_t inner = (k == 3) ? 1 : plan.stage[k + 1].n_out;
    std::vector<cplx> nxt(outer * st.n_out);
    parallel_for(outer, [&](std::size_t o) {
      const cplx* blk = st.block(st.per_slice ? o / slice_div : 0);
      const cplx* in = cur.data() + o * d[k] * inner;
      cplx* out = nxt.data() + o * st.n_out;
      for (std::size_t L = 0; L < st.n_out; ++L) {
        const cplx* tab = blk + st.row[L] * st.n_nodes;
        const std::size_t pi = st.parent[L];
        cplx s = 0.0;
        for (std::size_t ik = 0; ik < d[k]; ++ik)
          s += in[ik * inner + pi] * std::conj(tab[ik]);
        out[L] = s;
      }
    });
    cur.swap(nxt);
  }
  return cur;
}

// Transpose of analyze_pass: expand L_0 amplitudes back to node values.
inline std::vector<cplx> synth_pass(const QuadratureGrid& grid, const CascadePlan& plan,
                                    std::vector<cplx> cur) {
  const auto d = grid.dims();
  for (int k = 0; k < 4; ++k) {
    const Stage& st = plan.stage[k];
    std::size_t outer = 1;
    for (int j = 0; j < k; ++j) outer *= d[j];
    std::size_t slice_div = 1;
    for (int j = 1; j < k; ++j) slice_div *= d[j];
    const std::size_t inner = (k == 3) ? 1 : plan.stage[k + 1].n_out;
    std::vector<cplx> nxt(outer * d[k] * inner, cplx(0.0));
    parallel_for(outer, [&](std::size_t o) {
      const cplx* blk = st.block(st.per_slice ? o / slice_div : 0);
      const cplx* in = cur.data() + o * st.n_out;
      cplx* out = nxt.data() + o * d[k] * inner;
      for (std::size_t L = 0; L < st.n_out; ++L) {
        const cplx v = in[L];
        if (v == cplx(0.0)) continue;
        const cplx* tab = blk + st.row[L] * st.n_nodes;
        const std::size_t pi = st.parent[L];
        for (std::size_t ik = 0; ik < d[k]; ++ik) out[ik * inner + pi] += v * tab[ik];
      }
    });
    cur.swap(nxt);
  }
  return cur;
}

inline CoefficientSet coefficients_from_weighted(const QuadratureGrid& grid,
                                                 const CascadePlan& plan,
                                                 std::vector<cplx> weighted) {
  std::vector<cplx> c0 = analyze_pass(grid, plan, std::move(weighted));
  CoefficientSet out;
  out.chart = grid.chart;
  out.surface = grid.surface;
  out.entries.resize(c0.size());
  for (std::size_t i = 0; i < c0.size(); ++i)
    out.entries[i] = {plan.labels[i], c0[i], plan.label_w[i]};
  return out;
}

inline bool same_label(const SpectralLabel& a, const SpectralLabel& b) {
  return a.chart == b.chart && a.j == b.j && a.l == b.l && a.m == b.m &&
         a.eps == b.eps && a.mprime == b.mprime && a.rho == b.rho && a.nu == b.nu &&
         a.kappa == b.kappa && a.eta == b.eta && a.q == b.q && a.tau == b.tau &&
         a.omega == b.omega && a.kvec == b.kvec;
}

}  // namespace transform_detail

// ---------------------------------------------------------------------------
// Forward and inverse expansions.

// Coefficients of f against the chart's normalized family on the grid
// implied by `spec`. A field given in another chart is pulled back through
// the homogeneous coordinates first.
inline CoefficientSet analyze(const ScalarField& f, ChartId chart,
                              const TruncationSpec& spec) {
  const ScalarField g = pullback_field(f, chart);
  const QuadratureGrid grid = build_grid(chart, f.surface, spec);
  const auto plan = transform_detail::build_plan(grid, spec);
  std::vector<cplx> wv(grid.size());
  transform_detail::parallel_for(wv.size(), [&](std::size_t i) {
    wv[i] = g.eval(grid.point(i), 0).value() * grid.weight(i);
  });
  return transform_detail::coefficients_from_weighted(grid, plan, std::move(wv));
}

// Same contraction for values already sampled on the grid (CSV-table input).
inline CoefficientSet analyze_grid_values(const std::vector<cplx>& values,
                                          const QuadratureGrid& grid,
                                          const TruncationSpec& spec) {
  if (values.size() != grid.size())
    throw std::invalid_argument("analyze_grid_values: value count does not match grid");
  const auto plan = transform_detail::build_plan(grid, spec);
  std::vector<cplx> wv(values.size());
  transform_detail::parallel_for(wv.size(), [&](std::size_t i) {
    wv[i] = values[i] * grid.weight(i);
  });
  return transform_detail::coefficients_from_weighted(grid, plan, std::move(wv));
}

// Pointwise synthesis sum_L W(L) w_L c_L Phi_L(p).
inline cplx synthesize(const CoefficientSet& coeffs, const ChartPoint& p) {
  cplx s = 0.0;
  for (const auto& e : coeffs.entries) {
    if (e.value == cplx(0.0)) continue;
    const double lam = plancherel_weight(e.label) * e.label_weight;
    const cplx phi = coeffs.surface == Surface::Hyperboloid ? basis_h4(e.label, p)
                                                            : basis_c4(e.label, p);
    s += lam * e.value * phi;
  }
  return s;
}

// Grid-wide synthesis through the factored cascade; coefficient entries must
// be in the label order analyze produces for this grid and spec.
inline std::vector<cplx> synthesize_on_grid(const CoefficientSet& coeffs,
                                            const QuadratureGrid& grid,
                                            const TruncationSpec& spec) {
  const auto plan = transform_detail::build_plan(grid, spec);
  if (coeffs.entries.size() != plan.labels.size())
    throw std::invalid_argument("synthesize_on_grid: coefficient set does not match spec");
  std::vector<cplx> c0(plan.labels.size());
  for (std::size_t i = 0; i < c0.size(); ++i) {
    if (!transform_detail::same_label(coeffs.entries[i].label, plan.labels[i]))
      throw std::invalid_argument("synthesize_on_grid: label order mismatch");
    c0[i] = plancherel_weight(plan.labels[i]) * plan.label_w[i] * coeffs.entries[i].value;
  }
  return transform_detail::synth_pass(grid, plan, std::move(c0));
}

// lhs = int |f|^2 d^4x/x0 over the grid; rhs = the spectral-side resum.
inline std::pair<double, double> plancherel_check(const ScalarField& f,
                                                  const CoefficientSet& coeffs,
                                                  const QuadratureGrid& grid) {
  const cplx lhs = transform_detail::block_sum(grid.size(), [&](std::size_t i) {
    const cplx v = f.eval(grid.point(i), 0).value();
    return cplx(grid.weight(i) * std::norm(v), 0.0);
  });
  double rhs = 0.0;
  for (const auto& e : coeffs.entries)
    rhs += plancherel_weight(e.label) * e.label_weight * std::norm(e.value);
  return {lhs.real(), rhs};
}

// ---------------------------------------------------------------------------
// Wave packets: Gaussian windows over rho regularizing the delta-normalized
// continuum. The secondary continuous labels stay at their label values.

struct WavePacket {
  double center = 1.0;
  double width = 0.2;
  void validate() const {
    if (!(width > 0.0) || !std::isfinite(center))
      throw std::invalid_argument("wave packet: width must be positive");
  }
};

// F(x) = sum_k alpha_k Phi_{rho_k}(x) with alpha_k the Gauss-rule samples of
// a unit-peak Gaussian; in the continuum limit <F, Phi_rho0> = g(rho0)/W.
inline ScalarField wave_packet_field(const SpectralLabel& base, const WavePacket& w,
                                     Surface surface) {
  w.validate();
  base.validate();
  const double lo = std::max(w.center - 5.0 * w.width, kRhoMin * (1.0 + 1e-9));
  const double hi = w.center + 5.0 * w.width;
  if (!(lo < hi)) throw std::invalid_argument("wave packet: window below the rho floor");
  const Rule1D r = gl_on(17, lo, hi);
  std::vector<SpectralLabel> labels(r.x.size(), base);
  std::vector<double> alpha(r.x.size());
  for (std::size_t k = 0; k < r.x.size(); ++k) {
    labels[k].rho = r.x[k];
    const double d = r.x[k] - w.center;
    alpha[k] = r.w[k] * std::exp(-d * d / (2.0 * w.width * w.width));
  }
  return {base.chart, surface, [labels, alpha, surface](const ChartPoint& p, int deg) {
            const auto P = param_jets(p, deg);
            Jet s = Jet::constant(0.0, deg);
            for (std::size_t k = 0; k < labels.size(); ++k) {
              const Jet phi = surface == Surface::Hyperboloid
                                  ? basis_detail::hyperboloid_jet(labels[k], P)
                                  : basis_detail::cone_jet(labels[k], P, ConeBranch::Both);
              s = s + phi * alpha[k];
            }
            return s;
          }};
}

// Grid inner product of two wave packets, computed per axis (the tensor
// structure of both families makes the full 4D sum a product of 1D sums).
// Packets smear rho and the chart's secondary continuous label; supported
// for the non-sliced charts S, H, C, SH.
inline cplx packet_overlap(const SpectralLabel& la, const SpectralLabel& lb, double width,
                           const QuadratureGrid& grid) {
  if (la.chart != grid.chart || lb.chart != grid.chart)
    throw std::invalid_argument("packet_overlap: labels must match the grid chart");
  if (grid.slice_dims)
    throw std::invalid_argument(
        "packet_overlap: sliced charts couple the axes; use S, H, C or SH");
  const Surface surf = grid.surface;

  struct Window {
    std::vector<double> x, alpha;
  };
  auto window = [&](double c, double floor) {
    const double lo = std::max(c - 5.0 * width, floor);
    const Rule1D r = gl_on(17, lo, c + 5.0 * width);
    Window w;
    w.x = r.x;
    w.alpha.resize(r.x.size());
    for (std::size_t k = 0; k < r.x.size(); ++k) {
      const double d = r.x[k] - c;
      w.alpha[k] = r.w[k] * std::exp(-d * d / (2.0 * width * width));
    }
    return w;
  };
  const double rho_floor = kRhoMin * (1.0 + 1e-9);

  // Secondary continuous label per chart (none in S).
  auto aux_center = [](const SpectralLabel& L) {
    switch (L.chart) {
      case ChartId::H: return L.nu;
      case ChartId::C: return L.tau;
      case ChartId::SH: return L.omega;
      default: return 0.0;
    }
  };
  const bool has_aux = grid.chart != ChartId::S;
  const double aux_floor = grid.chart == ChartId::C ? -1e30 : 1e-3;

  const Window ra = window(la.rho, rho_floor), rb = window(lb.rho, rho_floor);
  Window xa, xb;
  if (has_aux) {
    xa = window(aux_center(la), aux_floor);
    xb = window(aux_center(lb), aux_floor);
  } else {
    xa = {{0.0}, {1.0}};
    xb = {{0.0}, {1.0}};
  }

  auto with = [](SpectralLabel L, double rho, double aux) {
    L.rho = rho;
    switch (L.chart) {
      case ChartId::H: L.nu = aux; break;
      case ChartId::C: L.tau = aux; break;
      case ChartId::SH: L.omega = aux; break;
      default: break;
    }
    return L;
  };

  // Axis-0 cross sums over all (rho, aux) row pairs.
  const std::size_t na = ra.x.size() * xa.x.size(), nb = rb.x.size() * xb.x.size();
  const GridAxis& ax0 = grid.axis[0];
  std::vector<cplx> fa(na * ax0.x.size()), fb(nb * ax0.x.size());
  transform_detail::parallel_for(na, [&](std::size_t r) {
    const SpectralLabel L = with(la, ra.x[r / xa.x.size()], xa.x[r % xa.x.size()]);
    for (std::size_t i = 0; i < ax0.x.size(); ++i)
      fa[r * ax0.x.size() + i] = transform_detail::radial_factor(L, surf, ax0.x[i]);
  });
  transform_detail::parallel_for(nb, [&](std::size_t r) {
    const SpectralLabel L = with(lb, rb.x[r / xb.x.size()], xb.x[r % xb.x.size()]);
    for (std::size_t i = 0; i < ax0.x.size(); ++i)
      fb[r * ax0.x.size() + i] = transform_detail::radial_factor(L, surf, ax0.x[i]);
  });
  std::vector<cplx> m0(na * nb);
  transform_detail::parallel_for(na, [&](std::size_t rA) {
    for (std::size_t rB = 0; rB < nb; ++rB) {
      cplx s = 0.0;
      for (std::size_t i = 0; i < ax0.x.size(); ++i)
        s += ax0.w[i] * fa[rA * ax0.x.size() + i] * std::conj(fb[rB * ax0.x.size() + i]);
      m0[rA * nb + rB] = s;
    }
  });

  // Axis-1 cross sums; rows depend on the aux node (H, SH) or on it only
  // through the tau phase (C). S has a single (j, l) row per side.
  const GridAxis& ax1 = grid.axis[1];
  auto fac1 = [&](const SpectralLabel& L, double aux, double x) -> cplx {
    switch (grid.chart) {
      case ChartId::S: return transform_detail::beta_factor(L.j, L.l, x);
      case ChartId::H: return transform_detail::h_b_factor(aux, L.l, x);
      case ChartId::C: return std::exp(cplx(0.0, aux * x));
      case ChartId::SH: return transform_detail::sh_b_factor(aux, L.m, x);
      default: throw std::logic_error("packet_overlap: unreachable");
    }
  };
  std::vector<cplx> ga(xa.x.size() * ax1.x.size()), gb(xb.x.size() * ax1.x.size());
  for (std::size_t r = 0; r < xa.x.size(); ++r)
    for (std::size_t i = 0; i < ax1.x.size(); ++i)
      ga[r * ax1.x.size() + i] = fac1(la, xa.x[r], ax1.x[i]);
  for (std::size_t r = 0; r < xb.x.size(); ++r)
    for (std::size_t i = 0; i < ax1.x.size(); ++i)
      gb[r * ax1.x.size() + i] = fac1(lb, xb.x[r], ax1.x[i]);
  std::vector<cplx> m1(xa.x.size() * xb.x.size());
  for (std::size_t rA = 0; rA < xa.x.size(); ++rA)
    for (std::size_t rB = 0; rB < xb.x.size(); ++rB) {
      cplx s = 0.0;
      for (std::size_t i = 0; i < ax1.x.size(); ++i)
        s += ax1.w[i] * ga[rA * ax1.x.size() + i] * std::conj(gb[rB * ax1.x.size() + i]);
      m1[rA * xb.x.size() + rB] = s;
    }

  // Remaining angle/azimuth axes are label-independent cross sums.
  auto fac23 = [&](const SpectralLabel& L, int axisk, double x) -> cplx {
    switch (grid.chart) {
      case ChartId::S:
      case ChartId::H:
      case ChartId::C:
        return axisk == 2 ? transform_detail::theta_factor(L.l, L.m, x)
                          : transform_detail::azimuth_factor(L.m, x);
      case ChartId::SH:
        return axisk == 2 ? transform_detail::azimuth_factor(L.m, x)
                          : transform_detail::azimuth_factor(L.mprime, x);
      default: throw std::logic_error("packet_overlap: unreachable");
    }
  };
  cplx m23 = 1.0;
  for (int k = 2; k <= 3; ++k) {
    const GridAxis& ax = grid.axis[k];
    cplx s = 0.0;
    for (std::size_t i = 0; i < ax.x.size(); ++i)
      s += ax.w[i] * fac23(la, k, ax.x[i]) * std::conj(fac23(lb, k, ax.x[i]));
    m23 *= s;
  }

  cplx total = 0.0;
  for (std::size_t kA = 0; kA < ra.x.size(); ++kA)
    for (std::size_t jA = 0; jA < xa.x.size(); ++jA) {
      const double wA = ra.alpha[kA] * xa.alpha[jA];
      const std::size_t rA = kA * xa.x.size() + jA;
      for (std::size_t kB = 0; kB < rb.x.size(); ++kB)
        for (std::size_t jB = 0; jB < xb.x.size(); ++jB) {
          const double wB = rb.alpha[kB] * xb.alpha[jB];
          total += wA * wB * m0[rA * nb + kB * xb.x.size() + jB] *
                   m1[jA * xb.x.size() + jB];
        }
    }
  return total * m23;
}

// ---------------------------------------------------------------------------
// Orispherical (Gelfand-Graev) transform h(k) = int psi delta([x,k]-1).
//
// The cone point is rotated to the reference generator (t,0,0,0,t); in that
// frame the orisphere is the O-chart leaf a = -ln t, and the delta integral
// reduces to t^{-3} times the flat integral over (r, theta, phi). The
// aligning SO(4) rotation is exact; a quarter turn in the (1,4)-plane first
// handles directions antipodal to e4.

inline cplx gg_transform(const ScalarField& psi, const HomogeneousPoint& k,
                         const TruncationSpec& spec = {}) {
  if (psi.surface != Surface::Hyperboloid)
    throw std::invalid_argument("gg_transform: psi must live on the hyperboloid");
  if (k.surface != Surface::Cone)
    throw std::invalid_argument("gg_transform: k must lie on the cone");
  const double t = k.x[0];
  if (!(t > 0.0)) throw std::domain_error("gg_transform: k is off the forward cone");

  std::array<double, 4> u{k.x[1] / t, k.x[2] / t, k.x[3] / t, k.x[4] / t};
  const bool swap14 = u[3] < -0.99;
  if (swap14) {
    const double u0 = u[0];
    u[0] = u[3];
    u[3] = -u0;
  }
  // R v = e4 for unit v: reflection pair I - (v+e4)(v+e4)^T/(1+v4) + 2 e4 v^T.
  std::array<std::array<double, 4>, 4> R{};
  {
    std::array<double, 4> s{u[0], u[1], u[2], u[3] + 1.0};
    const double denom = 1.0 + u[3];
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        R[i][j] = (i == j ? 1.0 : 0.0) - s[i] * s[j] / denom + 2.0 * (i == 3 ? u[j] : 0.0);
  }
  // D maps the reference frame back to k's frame: D = (R Q)^T with the
  // optional quarter turn Q folded in.
  auto apply_d = [&](const std::array<double, 4>& y) {
    std::array<double, 4> v{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) v[i] += R[j][i] * y[j];
    if (swap14) {
      const double v0 = v[0];
      v[0] = -v[3];
      v[3] = v0;
    }
    return v;
  };

  const double xstar = transform_detail::envelope_x0(spec.envelope_rate);
  const double rmax2 = 2.0 * xstar * t - t * t - 1.0;
  if (rmax2 <= 0.0) return 0.0;
  const double rmax = std::sqrt(rmax2);
  const int n_r = spec.n_b ? spec.n_b : 48;
  const int n_th = spec.n_angle ? spec.n_angle : 24;
  const int n_ph = spec.n_phi ? spec.n_phi : 32;
  const Rule1D rr = gl_on(n_r, 0.0, rmax);
  const Rule1D th = gl_on(n_th, 0.0, kPi);
  const double a0 = -std::log(t);
  const double ea = 1.0 / t, eai = t;  // e^{a0}, e^{-a0}

  const std::size_t n_nodes = std::size_t(n_r) * n_th * n_ph;
  const cplx sum = transform_detail::block_sum(n_nodes, [&](std::size_t idx) {
    const int iph = int(idx % n_ph);
    const int ith = int((idx / n_ph) % n_th);
    const int ir = int(idx / (std::size_t(n_ph) * n_th));
    const double r = rr.x[ir], theta = th.x[ith];
    const double phi = (iph + 0.5) * kTwoPi / n_ph;
    const double sth = std::sin(theta);
    const std::array<double, 3> n{sth * std::cos(phi), sth * std::sin(phi),
                                  std::cos(theta)};
    // O-chart embedding at a = a0 in the rotated frame.
    const double x0 = 0.5 * (eai + (1.0 + r * r) * ea);
    const std::array<double, 4> y{r * ea * n[0], r * ea * n[1], r * ea * n[2],
                                  0.5 * (-eai + (1.0 - r * r) * ea) * -1.0};
    const auto v = apply_d(y);
    HomogeneousPoint hp;
    hp.surface = Surface::Hyperboloid;
    hp.x = {x0, v[0], v[1], v[2], v[3]};
    const ChartPoint cp = from_homogeneous(hp, psi.chart);
    const double w = rr.w[ir] * th.w[ith] * (kTwoPi / n_ph) * r * r * sth;
    return w * psi.eval(cp, 0).value();
  });
  return sum / (t * t * t);
}

// ---------------------------------------------------------------------------
// Homogeneity components on the cone.

using ConeFunction = std::function<cplx(const HomogeneousPoint&)>;

inline HomogeneousPoint scale_cone_point(const HomogeneousPoint& k, double s) {
  if (k.surface != Surface::Cone)
    throw std::invalid_argument("scale_cone_point: not a cone point");
  HomogeneousPoint r = k;
  for (double& c : r.x) c *= s;
  return r;
}

// Psi(k, sigma) = int_0^inf h(t k) t^{-sigma-1} dt, via u = ln t with an
// expanding window; the strip of convergence is probed, not assumed.
inline cplx homogeneous_component(const ConeFunction& h, cplx sigma,
                                  const HomogeneousPoint& kdir) {
  auto g = [&](double u) {
    return h(scale_cone_point(kdir, std::exp(u))) * std::exp(-sigma * u);
  };
  double lo = -4.0, hi = 4.0;
  cplx total = adaptive_integrate(g, lo, hi, 1e-12);
  double last_inc = std::abs(total) + 1.0;
  int calm = 0, growing = 0;
  while (true) {
    const cplx dl = adaptive_integrate(g, lo - 4.0, lo, 1e-13);
    const cplx dr = adaptive_integrate(g, hi, hi + 4.0, 1e-13);
    lo -= 4.0;
    hi += 4.0;
    total += dl + dr;
    const double inc = std::abs(dl) + std::abs(dr);
    if (inc < 1e-10 * (std::abs(total) + 1e-30)) {
      if (++calm >= 2) return total;
    } else {
      calm = 0;
    }
    growing = inc > last_inc ? growing + 1 : 0;
    last_inc = inc;
    if (growing >= 3 || hi > 48.0)
      throw std::domain_error(
          "homogeneous_component: integral does not converge at this sigma");
  }
}

// ---------------------------------------------------------------------------
// Transition coefficients <gamma|mu> = int conj(Phi_a) Phi_b d^4x/x0 at
// shared rho, with the a-side delta regularized by a width-0.2 rho packet:
// the continuum limit of W(rho) <conj packet, Phi_b> as the window narrows.

inline cplx transition_coefficients(const SpectralLabel& label_a,
                                    const SpectralLabel& label_b, Surface surface,
                                    const QuadratureGrid& grid) {
  if (std::abs(label_a.rho - label_b.rho) > 1e-12)
    throw std::invalid_argument("transition_coefficients: labels must share rho");
  if (grid.chart != label_b.chart || grid.surface != surface)
    throw std::invalid_argument("transition_coefficients: grid must carry label_b's chart");
  const WavePacket w{label_a.rho, 0.2};
  const ScalarField fa =
      pullback_field(wave_packet_field(label_a, w, surface), label_b.chart);
  const double wgt = plancherel_weight(label_a);
  const cplx s = transform_detail::block_sum(grid.size(), [&](std::size_t i) {
    const ChartPoint p = grid.point(i);
    const cplx phib = surface == Surface::Hyperboloid
                          ? basis_detail::hyperboloid_jet(label_b, param_jets(p, 0)).value()
                          : basis_detail::cone_jet(label_b, param_jets(p, 0),
                                                   ConeBranch::Both)
                                .value();
    return grid.weight(i) * std::conj(fa.eval(p, 0).value()) * phib;
  });
  return wgt * s;
}

// One unitarity row: the packet side is evaluated once on the grid, then
// contracted against every b-label. Returns values in label order.
inline std::vector<cplx> transition_row(const SpectralLabel& label_a,
                                        const std::vector<SpectralLabel>& labels_b,
                                        Surface surface, const QuadratureGrid& grid) {
  for (const auto& lb : labels_b)
    if (std::abs(label_a.rho - lb.rho) > 1e-12 || lb.chart != grid.chart)
      throw std::invalid_argument("transition_row: b-labels must share rho and chart");
  const WavePacket w{label_a.rho, 0.2};
  const ScalarField fa =
      pullback_field(wave_packet_field(label_a, w, surface),
                     labels_b.empty() ? label_a.chart : labels_b.front().chart);
  std::vector<cplx> packet(grid.size());
  transform_detail::parallel_for(grid.size(), [&](std::size_t i) {
    packet[i] = std::conj(fa.eval(grid.point(i), 0).value()) * grid.weight(i);
  });
  const double wgt = plancherel_weight(label_a);
  std::vector<cplx> out(labels_b.size());
  for (std::size_t j = 0; j < labels_b.size(); ++j) {
    const SpectralLabel lb = labels_b[j];
    out[j] = wgt * transform_detail::block_sum(grid.size(), [&](std::size_t i) {
      const ChartPoint p = grid.point(i);
      const cplx phib = surface == Surface::Hyperboloid
                            ? basis_detail::hyperboloid_jet(lb, param_jets(p, 0)).value()
                            : basis_detail::cone_jet(lb, param_jets(p, 0),
                                                     ConeBranch::Both)
                                  .value();
      return packet[i] * phib;
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in smooth bumps for expansions and CLI work, defined through the
// ambient coordinates so one name means the same function in every chart.

inline ScalarField builtin_field(const std::string& name, ChartId chart, Surface surface) {
  if (name == "gauss")
    return ambient_field(chart, surface, [](const std::array<Jet, 5>& x) {
      return exp((x[0] - 1.0) * -2.0);
    });
  if (name == "gauss-x1")
    return ambient_field(chart, surface, [](const std::array<Jet, 5>& x) {
      return x[1] * exp((x[0] - 1.0) * -2.0);
    });
  if (name == "gauss-x3x4")
    return ambient_field(chart, surface, [](const std::array<Jet, 5>& x) {
      return (x[3] * x[4] + x[2] * 0.3 + x[1] * cplx(0.0, 0.2)) *
             exp((x[0] - 1.0) * -1.8);
    });
  throw std::invalid_argument("builtin_field: unknown name '" + name +
                              "' (known: gauss, gauss-x1, gauss-x3x4)");
}

}  // namespace dsh
