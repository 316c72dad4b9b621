// Serial scatter-form evaluation of the face-energy operator. Written
// independently of FaceEnergy so the two can be cross-checked.
#include "fsplab/plaplace.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace fsp::reference {

namespace {

using Stencil = std::vector<std::pair<int, double>>;

// coefficients of the centered derivative at index i on an axis
Stencil derivative_stencil(const Axis& ax, int i) {
  const int n = ax.nodes();
  const double h = ax.spacing();
  if (ax.bc == Boundary::periodic)
    return {{(i + 1) % n, 0.5 / h}, {(i - 1 + n) % n, -0.5 / h}};
  if (n == 2) return {{1, 1.0 / h}, {0, -1.0 / h}};
  if (i == 0) return {{0, -1.5 / h}, {1, 2.0 / h}, {2, -0.5 / h}};
  if (i == n - 1) return {{n - 1, 1.5 / h}, {n - 2, -2.0 / h}, {n - 3, 0.5 / h}};
  return {{i + 1, 0.5 / h}, {i - 1, -0.5 / h}};
}

struct Face {
  std::size_t n0, n1;
  int axis;
  std::array<int, 2> ij0, ij1;
  double vol;
};

std::vector<Face> faces(const GridSpec& grid) {
  std::vector<Face> out;
  const int d = grid.dim();
  const int nx = grid.nodes(0);
  const int ny = d == 2 ? grid.nodes(1) : 1;
  for (int a = 0; a < d; ++a) {
    const Axis& ax = grid.axis(a);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        std::array<int, 2> ij0{i, j}, ij1{i, j};
        const int k = ij0[static_cast<std::size_t>(a)];
        if (ax.bc != Boundary::periodic && k + 1 >= ax.nodes()) continue;
        ij1[static_cast<std::size_t>(a)] = (k + 1) % ax.nodes();
        double vol = ax.spacing();
        if (d == 2) vol *= 0.5 * grid.axis(1 - a).weight(ij0[static_cast<std::size_t>(1 - a)]);
        out.push_back({grid.index(ij0[0], ij0[1]), grid.index(ij1[0], ij1[1]), a, ij0, ij1, vol});
      }
  }
  return out;
}

double tangential_derivative(const GridSpec& grid, std::span<const double> u, int axis, const std::array<int, 2>& ij) {
  const Axis& ax = grid.axis(axis);
  double s = 0.0;
  for (const auto& [k, c] : derivative_stencil(ax, ij[static_cast<std::size_t>(axis)])) {
    std::array<int, 2> m = ij;
    m[static_cast<std::size_t>(axis)] = k;
    s += c * u[grid.index(m[0], m[1])];
  }
  return s;
}

} // namespace

ScalarField apply_operator(const ScalarField& field, const SolverConfig& cfg) {
  const GridSpec& grid = field.grid();
  const auto u = field.values();
  const double p = cfg.params.p;
  const double e2 = cfg.eps_reg * cfg.eps_reg;
  std::vector<double> dE(u.size(), 0.0);
  for (const Face& f : faces(grid)) {
    const double h = grid.spacing(f.axis);
    const double gn = (u[f.n1] - u[f.n0]) / h;
    double gt = 0.0;
    const int t = 1 - f.axis;
    if (grid.dim() == 2)
      gt = 0.5 * (tangential_derivative(grid, u, t, f.ij0) + tangential_derivative(grid, u, t, f.ij1));
    const double D = cfg.params.mu1 * std::pow(gn * gn + gt * gt + e2, 0.5 * (p - 2.0));
    const double fn = f.vol * D * gn;
    dE[f.n1] += fn / h;
    dE[f.n0] -= fn / h;
    if (grid.dim() == 2) {
      const double ft = 0.5 * f.vol * D * gt;
      for (const auto* ij : {&f.ij0, &f.ij1})
        for (const auto& [k, c] : derivative_stencil(grid.axis(t), (*ij)[static_cast<std::size_t>(t)])) {
          std::array<int, 2> m = *ij;
          m[static_cast<std::size_t>(t)] = k;
          dE[grid.index(m[0], m[1])] += c * ft;
        }
    }
  }
  ScalarField out(grid);
  for (std::size_t n = 0; n < u.size(); ++n) {
    const auto ij = grid.unflatten(n);
    bool fixed = false;
    for (int a = 0; a < grid.dim(); ++a) {
      const Axis& ax = grid.axis(a);
      const int k = ij[static_cast<std::size_t>(a)];
      fixed = fixed || (ax.bc == Boundary::dirichlet_zero && (k == 0 || k == ax.cells));
    }
    out[n] = fixed ? 0.0 : -dE[n] / grid.weight(n);
  }
  return out;
}

double dirichlet_energy(const ScalarField& field, const SolverConfig& cfg) {
  const GridSpec& grid = field.grid();
  const auto u = field.values();
  const double p = cfg.params.p;
  const double e2 = cfg.eps_reg * cfg.eps_reg;
  double total = 0.0;
  for (const Face& f : faces(grid)) {
    const double gn = (u[f.n1] - u[f.n0]) / grid.spacing(f.axis);
    double gt = 0.0;
    if (grid.dim() == 2) {
      const int t = 1 - f.axis;
      gt = 0.5 * (tangential_derivative(grid, u, t, f.ij0) + tangential_derivative(grid, u, t, f.ij1));
    }
    total += f.vol * (cfg.params.mu1 / p) * std::pow(gn * gn + gt * gt + e2, 0.5 * p);
  }
  return total;
}

} // namespace fsp::reference
