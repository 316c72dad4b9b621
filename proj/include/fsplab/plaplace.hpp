#pragma once

#include "fsplab/field.hpp"
#include "fsplab/ops.hpp"
#include "fsplab/trajectory.hpp"

#include <functional>
#include <span>
#include <vector>

namespace fsp {

enum class Stepper { explicit_euler, implicit_proximal };
enum class DtPolicy { fixed, adaptive };

/// Aborts a run whose support comes within `margin_fraction` of the box
/// length of either end of a guarded axis.
struct SentinelConfig {
  bool enabled = true;
  double margin_fraction = 0.1;
  /// |u| above this counts as support; 0 means any nonzero value.
  double threshold = 0.0;
  /// bit a set: axis a is guarded
  unsigned axis_mask = 0b11;
};

/// Throws BoundarySentinelError when a supported node lies in the guard band.
void check_sentinel(const ScalarField& u, const SentinelConfig& cfg);
void check_sentinel(const VectorField& u, const SentinelConfig& cfg);

struct SolverConfig {
  ModelParams params;
  double eps_reg = 0.0;
  Stepper stepper = Stepper::explicit_euler;
  DtPolicy dt_policy = DtPolicy::adaptive;
  double dt = 1e-4;       ///< step for DtPolicy::fixed
  double safety = 0.9;    ///< CFL safety factor in (0, 1]
  double dt_min = 1e-14;
  double dt_max = 1.0;
  /// adaptive implicit steps take implicit_dt_multiplier * cfl_dt
  double implicit_dt_multiplier = 100.0;
  double tol = 1e-10;     ///< proximal optimality residual, relative to max|u|
  int max_inner = 100;
  SentinelConfig sentinel;

  void validate() const;
};

/// μ₁ (g² + ε²)^{(p-2)/2}
double flux_diffusivity(double g, const SolverConfig& cfg);

/// Face-quadrature Dirichlet energy and its derivatives.
///
/// Each face between a node and its +axis neighbour carries the gradient
/// G = (normal difference, average of the centered tangential derivative
/// at the two nodes). E(u) = Σ_faces vol · (μ₁/p)(|G|²+ε²)^{p/2}; in 2D the
/// x- and y-face sums are averaged. The evolution operator is
/// A(u) = -W⁻¹ ∂E/∂u (W = nodal weights), zero at dirichlet end nodes, so
/// explicit and proximal steps discretize the same conservative flux form.
class FaceEnergy {
public:
  FaceEnergy(const GridSpec& grid, const SolverConfig& cfg);

  const GridSpec& grid() const { return grid_; }
  double energy(std::span<const double> u);
  /// ∂E/∂u into `out`.
  void gradient(std::span<const double> u, std::span<double> out);
  /// A(u) into `out`.
  void apply(std::span<const double> u, std::span<double> out);
  /// max over faces of flux_diffusivity(|G|)
  double max_diffusivity(std::span<const double> u);
  /// max face diffusivity seen by the last gradient/apply call
  double last_max_diffusivity() const { return last_dmax_; }

  /// Freeze the Hessian of E at u; hessian_apply then computes ∇²E · w.
  void hessian_setup(std::span<const double> u);
  void hessian_apply(std::span<const double> w, std::span<double> out);
  /// Diagonal of ∇²E (normal contributions only in 2D; used as a preconditioner
  /// there, exact in 1D) and, in 1D, the off-diagonal coupling to the +1 neighbour.
  void hessian_diagonal(std::span<double> diag) const;
  void hessian_offdiag_1d(std::span<double> upper) const;

  /// true for nodes that are held fixed (dirichlet end nodes)
  bool fixed(std::size_t n) const { return fixed_[n] != 0; }
  double weight(std::size_t n) const { return weight_[n]; }

private:
  struct AxisFaces {
    int axis;
    int faces_per_line;
    std::size_t count;
    double h;
    double vol;
  };

  std::size_t face_node(const AxisFaces& af, std::size_t f, bool plus) const;
  void face_gradients(std::span<const double> u);
  void gradient_1d(std::span<const double> u, std::span<double> out);
  void scatter_transpose(std::span<double> out);
  double phi(double g2) const;
  double diffusivity(double g2) const;

  GridSpec grid_;
  SolverConfig cfg_;
  std::vector<AxisFaces> axes_;
  std::vector<double> weight_;
  std::vector<char> fixed_;
  // per face: end nodes and vol times transverse dual length
  std::vector<std::vector<std::size_t>> n0_, n1_;
  std::vector<std::vector<double>> cvol_;
  // scratch: tangential node derivatives, per-face gradients and fluxes
  std::vector<std::vector<double>> dnode_;
  std::vector<std::vector<double>> gn_, gt_, fn_, ft_;
  std::vector<std::vector<double>> hnn_, hnt_, htt_;
  std::vector<double> q_, tmp_;
  double last_dmax_ = 0.0;
};

/// Evolution operator A(u) (OpenMP kernel).
ScalarField apply_operator(const ScalarField& u, const SolverConfig& cfg);
/// Stored energy E(u) = (μ₁/p)∫(|∇u|²+ε²)^{p/2} on the face quadrature.
double dirichlet_energy(const ScalarField& u, const SolverConfig& cfg);

namespace reference {
/// Serial scatter-form evaluation of the same operator, kept for testing.
ScalarField apply_operator(const ScalarField& u, const SolverConfig& cfg);
double dirichlet_energy(const ScalarField& u, const SolverConfig& cfg);
} // namespace reference

/// u + dt · A(u); throws NumericalFailure naming the first non-finite node.
ScalarField step_explicit(const ScalarField& u, const SolverConfig& cfg, double dt);

struct ProximalResult {
  ScalarField field;
  double residual = 0.0;      ///< ‖v - u - dt A(v)‖_∞ / max|u|
  int iterations = 0;
  double objective_start = 0; ///< J(u) = E(u)
  double objective_end = 0;   ///< J(v) = E(v) + ‖v-u‖²/(2dt)
};

/// argmin_v ‖v-u‖²_W/(2dt) + E(v) by damped Newton with a monotone line
/// search on the objective. Throws IterationLimitError past max_inner.
ProximalResult step_implicit_proximal(const ScalarField& u, const SolverConfig& cfg, double dt);

/// safety · h_min² / (2N · max diffusivity · (p-1)), clamped to [dt_min, dt_max];
/// dt_max when the diffusivity vanishes everywhere.
double cfl_dt(const ScalarField& u, const SolverConfig& cfg);

struct StepInfo {
  std::size_t step = 0;
  double t = 0;   ///< time after the step
  double dt = 0;
  const ScalarField* before = nullptr;
  const ScalarField* after = nullptr;
  int inner_iterations = 0;
  double inner_residual = 0;
};
using StepObserver = std::function<void(const StepInfo&)>;

/// Integrates from t = 0 to T, storing u₀ at t = 0, a snapshot at every
/// schedule time in (0, T] and the state at T.
ScalarTrajectory simulate(const ScalarField& u0, const SolverConfig& cfg, double T,
                          std::span<const double> schedule, const StepObserver& observer = {});

} // namespace fsp
