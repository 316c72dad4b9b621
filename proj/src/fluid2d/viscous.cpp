#include "fsplab/fluid2d.hpp"

#include "fsplab/error.hpp"
#include "fsplab/reduce.hpp"

#include <cmath>

namespace fsp {

double FluidConfig::eps_for(const GridSpec& grid) const {
  return eps_reg ? *eps_reg : grid.min_spacing();
}

void FluidConfig::validate() const {
  params.validate(false);
  if (params.dim != 2) throw InvalidArgument("the fluid solver is two-dimensional");
  if (eps_reg && !(*eps_reg >= 0.0)) throw InvalidArgument("eps_reg must be >= 0");
  if (!(safety > 0.0 && safety <= 1.0)) throw InvalidArgument("safety factor must lie in (0, 1]");
  if (!(dt_max > 0.0)) throw InvalidArgument("dt_max must be > 0");
}

namespace {

// Faces as in FaceEnergy: axis-0 face f = i + fpl*j joins (i,j),(i+1,j);
// axis-1 face f = i + nx*j joins (i,j),(i,j+1).
struct FaceLayout {
  int nx, ny;
  bool per[2];
  int fpl[2];
  std::size_t count[2];
  double h[2];

  explicit FaceLayout(const GridSpec& g) {
    if (g.dim() != 2) throw InvalidArgument("vector face operators need a 2D grid");
    nx = g.nodes(0);
    ny = g.nodes(1);
    for (int a = 0; a < 2; ++a) {
      per[a] = g.axis(a).bc == Boundary::periodic;
      const int n = a == 0 ? nx : ny;
      if (n < 2) throw InvalidArgument("vector face operators need at least 2 nodes per axis");
      fpl[a] = per[a] ? n : n - 1;
      h[a] = g.spacing(a);
    }
    count[0] = static_cast<std::size_t>(fpl[0]) * static_cast<std::size_t>(ny);
    count[1] = static_cast<std::size_t>(nx) * static_cast<std::size_t>(fpl[1]);
  }
  std::size_t node(int a, std::size_t f, bool plus) const {
    if (a == 0) {
      const int i = static_cast<int>(f % static_cast<std::size_t>(fpl[0]));
      const int j = static_cast<int>(f / static_cast<std::size_t>(fpl[0]));
      return static_cast<std::size_t>(plus ? (i + 1) % nx : i) + static_cast<std::size_t>(nx) * static_cast<std::size_t>(j);
    }
    const int i = static_cast<int>(f % static_cast<std::size_t>(nx));
    const int j = static_cast<int>(f / static_cast<std::size_t>(nx));
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * static_cast<std::size_t>(plus ? (j + 1) % ny : j);
  }
};

double transverse_weight(const GridSpec& g, int a, std::size_t node) {
  const auto ij = g.unflatten(node);
  return g.axis(1 - a).weight(ij[static_cast<std::size_t>(1 - a)]);
}

bool is_fixed(const GridSpec& g, std::size_t n) {
  const auto ij = g.unflatten(n);
  for (int a = 0; a < 2; ++a) {
    const Axis& ax = g.axis(a);
    const int k = ij[static_cast<std::size_t>(a)];
    if (ax.bc == Boundary::dirichlet_zero && (k == 0 || k == ax.cells)) return true;
  }
  return false;
}

// Face gradients G[k][b] of both components on every face, then the fluxes
// c·Du_{k,a} (normal) and c·Du_{k,t} (tangential) with c = vol·D(|Du|).
class VectorFaceEnergy {
public:
  VectorFaceEnergy(const GridSpec& grid, const FluidConfig& cfg)
      : grid_(grid), L_(grid), mu_(cfg.params.mu1), p_(cfg.params.p), e2_(std::pow(cfg.eps_for(grid), 2)) {
    const std::size_t n = grid.node_count();
    for (int k = 0; k < 2; ++k)
      for (int a = 0; a < 2; ++a) {
        dnode_[k][a].resize(n);
        fn_[k][a].resize(L_.count[a]);
        ft_[k][a].resize(L_.count[a]);
      }
    q_.resize(n);
    r_.resize(n);
    s0_.resize(n);
    s1_.resize(n);
  }

  double diffusivity(double d2) const {
    if (p_ == 2.0) return mu_;
    if (p_ == 3.0) return mu_ * std::sqrt(d2 + e2_);
    return mu_ * std::pow(d2 + e2_, 0.5 * (p_ - 2.0));
  }

  // Du at face f of axis a into d00, d11, d01
  template <class Fn>
  void for_faces(const VectorField& v, int a, Fn&& fn) {
    const int t = 1 - a;
    const double invh = 1.0 / L_.h[a];
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t fi = 0; fi < static_cast<std::ptrdiff_t>(L_.count[a]); ++fi) {
      const std::size_t f = static_cast<std::size_t>(fi);
      const std::size_t n0 = L_.node(a, f, false), n1 = L_.node(a, f, true);
      double G[2][2];
      for (int k = 0; k < 2; ++k) {
        const auto u = v.component(k);
        G[k][a] = (u[n1] - u[n0]) * invh;
        G[k][t] = 0.5 * (dnode_[k][t][n0] + dnode_[k][t][n1]);
      }
      const double d00 = G[0][0], d11 = G[1][1], d01 = 0.5 * (G[0][1] + G[1][0]);
      fn(f, n0, d00, d11, d01);
    }
  }

  void node_derivatives(const VectorField& v) {
    for (int k = 0; k < 2; ++k)
      for (int a = 0; a < 2; ++a) derivative(grid_, a, v.component(k), dnode_[k][a]);
  }

  double energy(const VectorField& v) {
    node_derivatives(v);
    double total = 0.0;
    for (int a = 0; a < 2; ++a) {
      std::vector<double> e(L_.count[a]);
      for_faces(v, a, [&](std::size_t f, std::size_t n0, double d00, double d11, double d01) {
        const double d2 = d00 * d00 + d11 * d11 + 2.0 * d01 * d01;
        e[f] = 0.5 * L_.h[a] * transverse_weight(grid_, a, n0) * (mu_ / p_) * std::pow(d2 + e2_, 0.5 * p_);
      });
      total += pairwise_sum(e);
    }
    return total;
  }

  double max_diffusivity(const VectorField& v) {
    node_derivatives(v);
    double best = 0.0;
    for (int a = 0; a < 2; ++a) {
      std::vector<double> e(L_.count[a]);
      for_faces(v, a, [&](std::size_t f, std::size_t, double d00, double d11, double d01) {
        e[f] = diffusivity(d00 * d00 + d11 * d11 + 2.0 * d01 * d01);
      });
      for (double x : e) best = std::max(best, x);
    }
    return best;
  }

  VectorField force(const VectorField& v) {
    node_derivatives(v);
    for (int a = 0; a < 2; ++a) {
      const int t = 1 - a;
      for_faces(v, a, [&](std::size_t f, std::size_t n0, double d00, double d11, double d01) {
        const double c = 0.5 * L_.h[a] * transverse_weight(grid_, a, n0) * diffusivity(d00 * d00 + d11 * d11 + 2.0 * d01 * d01);
        const double Du[2][2] = {{d00, d01}, {d01, d11}};
        for (int k = 0; k < 2; ++k) {
          fn_[k][a][f] = c * Du[k][a];
          ft_[k][a][f] = c * Du[k][t];
        }
      });
    }
    VectorField out(grid_);
    for (int k = 0; k < 2; ++k) {
      auto o = out.component(k);
      scatter(k, o);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(o.size()); ++n) {
        const std::size_t m = static_cast<std::size_t>(n);
        o[m] = is_fixed(grid_, m) ? 0.0 : -o[m] / grid_.weight(m);
      }
    }
    return out;
  }

private:
  // ∂E/∂u_k from the face fluxes of component k
  void scatter(int k, std::span<double> out) {
    const int nx = L_.nx, ny = L_.ny;
    const auto& fx = fn_[k][0];
    const auto& fy = fn_[k][1];
    const auto& tx = ft_[k][0];
    const auto& ty = ft_[k][1];
    const std::size_t fpl0 = static_cast<std::size_t>(L_.fpl[0]);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::size_t n = grid_.index(i, j);
        const bool hr = L_.per[0] || i + 1 < nx, hl = L_.per[0] || i > 0;
        const bool ht = L_.per[1] || j + 1 < ny, hb = L_.per[1] || j > 0;
        const std::size_t r = static_cast<std::size_t>(i) + fpl0 * static_cast<std::size_t>(j);
        const std::size_t l = static_cast<std::size_t>(i > 0 ? i - 1 : nx - 1) + fpl0 * static_cast<std::size_t>(j);
        const std::size_t t = n;
        const std::size_t b = static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * static_cast<std::size_t>(j > 0 ? j - 1 : ny - 1);
        out[n] = ((hl ? fx[l] : 0.0) - (hr ? fx[r] : 0.0)) / L_.h[0] + ((hb ? fy[b] : 0.0) - (ht ? fy[t] : 0.0)) / L_.h[1];
        q_[n] = (hl ? tx[l] : 0.0) + (hr ? tx[r] : 0.0);
        r_[n] = (hb ? ty[b] : 0.0) + (ht ? ty[t] : 0.0);
      }
    derivative_transpose(grid_, 1, q_, s1_);
    derivative_transpose(grid_, 0, r_, s0_);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(out.size()); ++n) {
      const std::size_t m = static_cast<std::size_t>(n);
      out[m] += 0.5 * (s1_[m] + s0_[m]);
    }
  }

  GridSpec grid_;
  FaceLayout L_;
  double mu_, p_, e2_;
  std::vector<double> dnode_[2][2];
  std::vector<double> fn_[2][2], ft_[2][2];
  std::vector<double> q_, r_, s0_, s1_;
};

} // namespace

VectorField viscous_term(const VectorField& v, const FluidConfig& cfg) {
  VectorFaceEnergy e(v.grid(), cfg);
  return e.force(v);
}

double viscous_energy(const VectorField& v, const FluidConfig& cfg) {
  VectorFaceEnergy e(v.grid(), cfg);
  return e.energy(v);
}

double fluid_max_diffusivity(const VectorField& v, const FluidConfig& cfg) {
  VectorFaceEnergy e(v.grid(), cfg);
  return e.max_diffusivity(v);
}

namespace reference {

namespace {

std::vector<std::pair<int, double>> stencil(const Axis& ax, int i) {
  const int n = ax.nodes();
  const double h = ax.spacing();
  if (ax.bc == Boundary::periodic) return {{(i + 1) % n, 0.5 / h}, {(i - 1 + n) % n, -0.5 / h}};
  if (n == 2) return {{1, 1.0 / h}, {0, -1.0 / h}};
  if (i == 0) return {{0, -1.5 / h}, {1, 2.0 / h}, {2, -0.5 / h}};
  if (i == n - 1) return {{n - 1, 1.5 / h}, {n - 2, -2.0 / h}, {n - 3, 0.5 / h}};
  return {{i + 1, 0.5 / h}, {i - 1, -0.5 / h}};
}

} // namespace

VectorField viscous_term(const VectorField& v, const FluidConfig& cfg) {
  const GridSpec& g = v.grid();
  if (g.dim() != 2) throw InvalidArgument("vector face operators need a 2D grid");
  const double p = cfg.params.p, mu = cfg.params.mu1;
  const double e2 = std::pow(cfg.eps_for(g), 2);
  std::vector<double> dE[2] = {std::vector<double>(g.node_count(), 0.0), std::vector<double>(g.node_count(), 0.0)};
  auto tangential = [&](int k, int t, std::array<int, 2> ij) {
    double s = 0.0;
    for (const auto& [m, c] : stencil(g.axis(t), ij[static_cast<std::size_t>(t)])) {
      auto q = ij;
      q[static_cast<std::size_t>(t)] = m;
      s += c * v.component(k)[g.index(q[0], q[1])];
    }
    return s;
  };
  for (int a = 0; a < 2; ++a) {
    const Axis& ax = g.axis(a);
    const int t = 1 - a;
    for (int j = 0; j < g.nodes(1); ++j)
      for (int i = 0; i < g.nodes(0); ++i) {
        std::array<int, 2> ij0{i, j}, ij1{i, j};
        const int kk = ij0[static_cast<std::size_t>(a)];
        if (ax.bc != Boundary::periodic && kk + 1 >= ax.nodes()) continue;
        ij1[static_cast<std::size_t>(a)] = (kk + 1) % ax.nodes();
        const std::size_t n0 = g.index(ij0[0], ij0[1]), n1 = g.index(ij1[0], ij1[1]);
        const double h = ax.spacing();
        double G[2][2];
        for (int k = 0; k < 2; ++k) {
          G[k][a] = (v.component(k)[n1] - v.component(k)[n0]) / h;
          G[k][t] = 0.5 * (tangential(k, t, ij0) + tangential(k, t, ij1));
        }
        const double Du[2][2] = {{G[0][0], 0.5 * (G[0][1] + G[1][0])}, {0.5 * (G[0][1] + G[1][0]), G[1][1]}};
        const double d2 = Du[0][0] * Du[0][0] + Du[1][1] * Du[1][1] + 2 * Du[0][1] * Du[0][1];
        const double vol = 0.5 * h * g.axis(t).weight(ij0[static_cast<std::size_t>(t)]);
        const double c = vol * mu * std::pow(d2 + e2, 0.5 * (p - 2.0));
        for (int k = 0; k < 2; ++k) {
          const double fn = c * Du[k][a];
          dE[k][n1] += fn / h;
          dE[k][n0] -= fn / h;
          const double ft = 0.5 * c * Du[k][t];
          for (const auto* ij : {&ij0, &ij1})
            for (const auto& [m, cc] : stencil(g.axis(t), (*ij)[static_cast<std::size_t>(t)])) {
              auto q = *ij;
              q[static_cast<std::size_t>(t)] = m;
              dE[k][g.index(q[0], q[1])] += cc * ft;
            }
        }
      }
  }
  VectorField out(g);
  for (int k = 0; k < 2; ++k)
    for (std::size_t n = 0; n < g.node_count(); ++n)
      out.component(k)[n] = is_fixed(g, n) ? 0.0 : -dE[k][n] / g.weight(n);
  return out;
}

} // namespace reference

} // namespace fsp
