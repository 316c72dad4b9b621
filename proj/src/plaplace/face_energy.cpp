#include "fsplab/plaplace.hpp"

#include "fsplab/error.hpp"
#include "fsplab/reduce.hpp"

#include <cmath>

namespace fsp {

namespace {

// dual length of the face's transverse extent (1 in 1D)
double transverse_weight(const GridSpec& grid, int axis, std::size_t node) {
  if (grid.dim() == 1) return 1.0;
  const auto ij = grid.unflatten(node);
  const int other = 1 - axis;
  return grid.axis(other).weight(ij[static_cast<std::size_t>(other)]);
}

} // namespace

FaceEnergy::FaceEnergy(const GridSpec& grid, const SolverConfig& cfg) : grid_(grid), cfg_(cfg) {
  const int d = grid_.dim();
  const std::size_t count = grid_.node_count();
  for (int a = 0; a < d; ++a) {
    const Axis& ax = grid_.axis(a);
    if (ax.nodes() < 2) throw InvalidArgument("p-Laplacian operator needs at least 2 nodes per axis");
    AxisFaces af;
    af.axis = a;
    af.faces_per_line = ax.bc == Boundary::periodic ? ax.nodes() : ax.nodes() - 1;
    af.count = count / static_cast<std::size_t>(ax.nodes()) * static_cast<std::size_t>(af.faces_per_line);
    af.h = ax.spacing();
    af.vol = d == 1 ? af.h : 0.5 * af.h;
    axes_.push_back(af);
  }
  weight_.resize(count);
  fixed_.assign(count, 0);
  for (std::size_t n = 0; n < count; ++n) {
    weight_[n] = grid_.weight(n);
    const auto ij = grid_.unflatten(n);
    for (int a = 0; a < d; ++a) {
      const Axis& ax = grid_.axis(a);
      if (ax.bc == Boundary::dirichlet_zero && (ij[static_cast<std::size_t>(a)] == 0 || ij[static_cast<std::size_t>(a)] == ax.cells))
        fixed_[n] = 1;
    }
  }
  const std::size_t na = static_cast<std::size_t>(d);
  dnode_.assign(d == 2 ? 2 : 0, std::vector<double>(count));
  gn_.resize(na);
  gt_.resize(na);
  fn_.resize(na);
  ft_.resize(na);
  hnn_.resize(na);
  hnt_.resize(na);
  htt_.resize(na);
  for (std::size_t a = 0; a < na; ++a) {
    gn_[a].resize(axes_[a].count);
    fn_[a].resize(axes_[a].count);
    hnn_[a].resize(axes_[a].count);
    if (d == 2) {
      gt_[a].resize(axes_[a].count);
      ft_[a].resize(axes_[a].count);
      hnt_[a].resize(axes_[a].count);
      htt_[a].resize(axes_[a].count);
    }
  }
  q_.resize(count);
  tmp_.resize(count);
  n0_.resize(na);
  n1_.resize(na);
  cvol_.resize(na);
  for (std::size_t a = 0; a < na; ++a) {
    const AxisFaces& af = axes_[a];
    n0_[a].resize(af.count);
    n1_[a].resize(af.count);
    cvol_[a].resize(af.count);
    for (std::size_t f = 0; f < af.count; ++f) {
      n0_[a][f] = face_node(af, f, false);
      n1_[a][f] = face_node(af, f, true);
      cvol_[a][f] = af.vol * transverse_weight(grid_, af.axis, n0_[a][f]);
    }
  }
}

// Face f of axis 0 is (i, j) -> (i+1, j) with f = i + fpl*j; axis 1 faces
// are (i, j) -> (i, j+1) with f = i + nx*j.
std::size_t FaceEnergy::face_node(const AxisFaces& af, std::size_t f, bool plus) const {
  if (af.axis == 0) {
    const std::size_t fpl = static_cast<std::size_t>(af.faces_per_line);
    const int i = static_cast<int>(f % fpl);
    const int j = static_cast<int>(f / fpl);
    return grid_.index(plus ? (i + 1) % grid_.nodes(0) : i, j);
  }
  const std::size_t nx = static_cast<std::size_t>(grid_.nodes(0));
  const int i = static_cast<int>(f % nx);
  const int j = static_cast<int>(f / nx);
  return grid_.index(i, plus ? (j + 1) % grid_.nodes(1) : j);
}

double FaceEnergy::diffusivity(double g2) const {
  const double p = cfg_.params.p;
  const double mu = cfg_.params.mu1;
  if (p == 2.0) return mu;
  const double e2 = cfg_.eps_reg * cfg_.eps_reg;
  if (p == 3.0) return mu * std::sqrt(g2 + e2);
  if (p == 4.0) return mu * (g2 + e2);
  return mu * std::pow(g2 + e2, 0.5 * (p - 2.0));
}

double FaceEnergy::phi(double g2) const {
  const double p = cfg_.params.p;
  const double e2 = cfg_.eps_reg * cfg_.eps_reg;
  return (cfg_.params.mu1 / p) * std::pow(g2 + e2, 0.5 * p);
}

void FaceEnergy::face_gradients(std::span<const double> u) {
  const int d = grid_.dim();
  if (d == 2) {
    derivative(grid_, 0, u, dnode_[0]);
    derivative(grid_, 1, u, dnode_[1]);
  }
  for (const AxisFaces& af : axes_) {
    const std::size_t a = static_cast<std::size_t>(af.axis);
    const double invh = 1.0 / af.h;
    const double* x = u.data();
    const std::size_t* i0 = n0_[a].data();
    const std::size_t* i1 = n1_[a].data();
    double* gn = gn_[a].data();
    double* gt = d == 2 ? gt_[a].data() : nullptr;
    const double* tang = d == 2 ? dnode_[1 - a].data() : nullptr;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t fi = 0; fi < static_cast<std::ptrdiff_t>(af.count); ++fi) {
      const std::size_t f = static_cast<std::size_t>(fi);
      gn[f] = (x[i1[f]] - x[i0[f]]) * invh;
      if (tang) gt[f] = 0.5 * (tang[i0[f]] + tang[i1[f]]);
    }
  }
}

void FaceEnergy::scatter_transpose(std::span<double> out) {
  const int d = grid_.dim();
  const int nx = grid_.nodes(0);
  const int ny = d == 2 ? grid_.nodes(1) : 1;
  const bool per0 = grid_.axis(0).bc == Boundary::periodic;
  const bool per1 = d == 2 && grid_.axis(1).bc == Boundary::periodic;
  const std::size_t fpl0 = static_cast<std::size_t>(axes_[0].faces_per_line);
  const double invh0 = 1.0 / axes_[0].h;
  const double invh1 = d == 2 ? 1.0 / axes_[1].h : 0.0;
  const double* fx = fn_[0].data();
  const double* fy = d == 2 ? fn_[1].data() : nullptr;
  const double* tx = d == 2 ? ft_[0].data() : nullptr;
  const double* ty = d == 2 ? ft_[1].data() : nullptr;
  double* q = q_.data();
  double* tmp = tmp_.data();
  double* o = out.data();
  const std::size_t snx = static_cast<std::size_t>(nx);

#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = snx * static_cast<std::size_t>(j);
    const std::size_t frow = fpl0 * static_cast<std::size_t>(j);
    const bool ha = per1 || j + 1 < ny;
    const bool hb = per1 || j > 0;
    const std::size_t brow = snx * static_cast<std::size_t>(j > 0 ? j - 1 : ny - 1);
    for (int i = 0; i < nx; ++i) {
      const std::size_t n = row + static_cast<std::size_t>(i);
      const bool hr = per0 || i + 1 < nx;
      const bool hl = per0 || i > 0;
      const std::size_t r = frow + static_cast<std::size_t>(i);
      const std::size_t l = frow + static_cast<std::size_t>(i > 0 ? i - 1 : nx - 1);
      double acc = ((hl ? fx[l] : 0.0) - (hr ? fx[r] : 0.0)) * invh0;
      if (fy) {
        q[n] = (hl ? tx[l] : 0.0) + (hr ? tx[r] : 0.0);
        const std::size_t t = n;
        const std::size_t b = brow + static_cast<std::size_t>(i);
        acc += ((hb ? fy[b] : 0.0) - (ha ? fy[t] : 0.0)) * invh1;
        tmp[n] = (hb ? ty[b] : 0.0) + (ha ? ty[t] : 0.0);
      }
      o[n] = acc;
    }
  }
  if (d == 2) {
    // x-face tangential parts differentiate along y and vice versa
    derivative_transpose(grid_, 1, q_, dnode_[1]);
    derivative_transpose(grid_, 0, tmp_, dnode_[0]);
    const double* d0 = dnode_[0].data();
    const double* d1 = dnode_[1].data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(out.size()); ++n) {
      const std::size_t k = static_cast<std::size_t>(n);
      o[k] += 0.5 * (d1[k] + d0[k]);
    }
  }
}

double FaceEnergy::energy(std::span<const double> u) {
  face_gradients(u);
  const bool two = grid_.dim() == 2;
  double total = 0.0;
  for (const AxisFaces& af : axes_) {
    const std::size_t a = static_cast<std::size_t>(af.axis);
    total += deterministic_sum(af.count, [&](std::size_t f) {
      double g2 = gn_[a][f] * gn_[a][f];
      if (two) g2 += gt_[a][f] * gt_[a][f];
      return cvol_[a][f] * phi(g2);
    });
  }
  return total;
}

void FaceEnergy::gradient_1d(std::span<const double> u, std::span<double> out) {
  const AxisFaces& af = axes_[0];
  const std::size_t nf = af.count;
  const std::size_t n = out.size();
  const double invh = 1.0 / af.h;
  const double mu = cfg_.params.mu1;
  const double p = cfg_.params.p;
  const double e2 = cfg_.eps_reg * cfg_.eps_reg;
  double* F = fn_[0].data();
  const double* x = u.data();
  double dmax = 0.0;
  if (p == 3.0 && e2 == 0.0) {
#pragma omp parallel for schedule(static) reduction(max : dmax)
    for (std::size_t f = 0; f < nf; ++f) {
      const double g = (x[f + 1 == n ? 0 : f + 1] - x[f]) * invh;
      const double D = mu * std::abs(g);
      dmax = D > dmax ? D : dmax;
      F[f] = af.vol * D * g;
    }
  } else {
#pragma omp parallel for schedule(static) reduction(max : dmax)
    for (std::size_t f = 0; f < nf; ++f) {
      const double g = (x[f + 1 == n ? 0 : f + 1] - x[f]) * invh;
      const double D = diffusivity(g * g);
      dmax = D > dmax ? D : dmax;
      F[f] = af.vol * D * g;
    }
  }
  last_dmax_ = dmax;
  const bool periodic = nf == n;
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? F[i - 1] : (periodic ? F[nf - 1] : 0.0);
    const double right = i < nf ? F[i] : 0.0;
    out[i] = (left - right) * invh;
  }
  (void)mu;
}

void FaceEnergy::gradient(std::span<const double> u, std::span<double> out) {
  if (grid_.dim() == 1) {
    gradient_1d(u, out);
    return;
  }
  face_gradients(u);
  double dmax = 0.0;
  const bool two = grid_.dim() == 2;
  const double mu = cfg_.params.mu1;
  const bool cubic = cfg_.params.p == 3.0 && cfg_.eps_reg == 0.0;
  for (const AxisFaces& af : axes_) {
    const std::size_t a = static_cast<std::size_t>(af.axis);
    const double* gn = gn_[a].data();
    const double* gt = two ? gt_[a].data() : nullptr;
    const double* cv = cvol_[a].data();
    double* fn = fn_[a].data();
    double* ft = two ? ft_[a].data() : nullptr;
#pragma omp parallel for schedule(static) reduction(max : dmax)
    for (std::ptrdiff_t fi = 0; fi < static_cast<std::ptrdiff_t>(af.count); ++fi) {
      const std::size_t f = static_cast<std::size_t>(fi);
      const double g2 = gn[f] * gn[f] + (gt ? gt[f] * gt[f] : 0.0);
      const double D = cubic ? mu * std::sqrt(g2) : diffusivity(g2);
      dmax = D > dmax ? D : dmax;
      const double c = cv[f] * D;
      fn[f] = c * gn[f];
      if (ft) ft[f] = c * gt[f];
    }
  }
  last_dmax_ = dmax;
  scatter_transpose(out);
}

void FaceEnergy::apply(std::span<const double> u, std::span<double> out) {
  gradient(u, out);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(out.size()); ++n) {
    const std::size_t k = static_cast<std::size_t>(n);
    out[k] = fixed_[k] ? 0.0 : -out[k] / weight_[k];
  }
}

double FaceEnergy::max_diffusivity(std::span<const double> u) {
  face_gradients(u);
  const bool two = grid_.dim() == 2;
  double best = 0.0;
  for (const AxisFaces& af : axes_) {
    const std::size_t a = static_cast<std::size_t>(af.axis);
    best = std::max(best, parallel_max(af.count, [&](std::size_t f) {
      double g2 = gn_[a][f] * gn_[a][f];
      if (two) g2 += gt_[a][f] * gt_[a][f];
      return diffusivity(g2);
    }));
  }
  return best;
}

void FaceEnergy::hessian_setup(std::span<const double> u) {
  face_gradients(u);
  const bool two = grid_.dim() == 2;
  const double p = cfg_.params.p;
  const double e2 = cfg_.eps_reg * cfg_.eps_reg;
  for (const AxisFaces& af : axes_) {
    const std::size_t a = static_cast<std::size_t>(af.axis);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t fi = 0; fi < static_cast<std::ptrdiff_t>(af.count); ++fi) {
      const std::size_t f = static_cast<std::size_t>(fi);
      const double gn = gn_[a][f];
      const double gt = two ? gt_[a][f] : 0.0;
      const double g2 = gn * gn + gt * gt;
      const double D = cvol_[a][f] * diffusivity(g2);
      const double c = (p != 2.0 && g2 + e2 > 0.0) ? (p - 2.0) / (g2 + e2) : 0.0;
      hnn_[a][f] = D * (1.0 + c * gn * gn);
      if (two) {
        hnt_[a][f] = D * c * gn * gt;
        htt_[a][f] = D * (1.0 + c * gt * gt);
      }
    }
  }
}

void FaceEnergy::hessian_apply(std::span<const double> w, std::span<double> out) {
  face_gradients(w);
  const bool two = grid_.dim() == 2;
  for (const AxisFaces& af : axes_) {
    const std::size_t a = static_cast<std::size_t>(af.axis);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t fi = 0; fi < static_cast<std::ptrdiff_t>(af.count); ++fi) {
      const std::size_t f = static_cast<std::size_t>(fi);
      if (two) {
        fn_[a][f] = hnn_[a][f] * gn_[a][f] + hnt_[a][f] * gt_[a][f];
        ft_[a][f] = hnt_[a][f] * gn_[a][f] + htt_[a][f] * gt_[a][f];
      } else {
        fn_[a][f] = hnn_[a][f] * gn_[a][f];
      }
    }
  }
  scatter_transpose(out);
}

void FaceEnergy::hessian_diagonal(std::span<double> diag) const {
  std::fill(diag.begin(), diag.end(), 0.0);
  for (const AxisFaces& af : axes_) {
    const std::size_t a = static_cast<std::size_t>(af.axis);
    const double s = 1.0 / (af.h * af.h);
    for (std::size_t f = 0; f < af.count; ++f) {
      const double v = hnn_[a][f] * s;
      diag[n0_[a][f]] += v;
      diag[n1_[a][f]] += v;
    }
  }
}

void FaceEnergy::hessian_offdiag_1d(std::span<double> upper) const {
  if (grid_.dim() != 1) throw InvalidArgument("hessian_offdiag_1d is one-dimensional");
  const AxisFaces& af = axes_[0];
  const double s = 1.0 / (af.h * af.h);
  for (std::size_t f = 0; f < af.count; ++f) upper[f] = -hnn_[0][f] * s;
}

} // namespace fsp
