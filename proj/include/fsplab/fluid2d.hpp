#pragma once

#include "fsplab/field.hpp"
#include "fsplab/ops.hpp"
#include "fsplab/plaplace.hpp"
#include "fsplab/trajectory.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <utility>

namespace fsp {

enum class Advection { upwind, central };

struct FluidConfig {
  ModelParams params{3.0, 1.0, 2};
  /// regularization of |Du|; unset means eps_reg = h
  std::optional<double> eps_reg;
  Advection advection = Advection::upwind;
  /// advective CFL: max|u| dt <= safety h
  double safety = 0.5;
  double dt_max = 1e-2;
  SentinelConfig sentinel{false, 0.1, 0.0, 0b11};

  double eps_for(const GridSpec& grid) const;
  void validate() const;
};

struct FluidState {
  VectorField velocity;
  ScalarField pressure;
  double t = 0.0;
};

/// μ₁ div((|Du|²+ε²)^{(p-2)/2} Du) as -W⁻¹∂E/∂u of the face energy
/// E = Σ_faces vol (μ₁/p)(|Du_f|²+ε²)^{p/2}. Zero at dirichlet end nodes.
VectorField viscous_term(const VectorField& v, const FluidConfig& cfg);
/// E(v) above, the stored energy dissipated by the viscous term.
double viscous_energy(const VectorField& v, const FluidConfig& cfg);
/// max over faces of μ₁(|Du_f|²+ε²)^{(p-2)/2}
double fluid_max_diffusivity(const VectorField& v, const FluidConfig& cfg);

namespace reference {
/// Serial scatter-form viscous term, kept for testing.
VectorField viscous_term(const VectorField& v, const FluidConfig& cfg);
} // namespace reference

/// -div(u⊗u) in flux form (equal to -(u·∇)u for divergence-free u).
VectorField advection_term(const VectorField& v, Advection scheme);
/// v + dt·advection_term(v); InvalidArgument if max|u| dt > safety h.
VectorField advect(const VectorField& v, double dt, const FluidConfig& cfg);

/// Spectral projection on a periodic box using the symbol of the centered
/// difference, so divergence(result) vanishes to roundoff. Holds FFTW plans.
class Projector {
public:
  explicit Projector(const GridSpec& grid);
  ~Projector();
  Projector(const Projector&) = delete;
  Projector& operator=(const Projector&) = delete;

  /// Returns (v - ∇φ, φ) with Δ_h φ = div_h v.
  std::pair<VectorField, ScalarField> project(const VectorField& v);

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::pair<VectorField, ScalarField> project(const VectorField& v);

/// Largest stable step: advective CFL and the explicit viscous bound.
double fluid_dt(const VectorField& v, const FluidConfig& cfg);

/// advect, then add dt·viscous_term, then project; pressure = φ/dt.
FluidState fluid_step(const FluidState& state, const FluidConfig& cfg, double dt);

struct FluidStepInfo {
  std::size_t step = 0;
  double t = 0;
  double dt = 0;
  double max_divergence = 0;
  const FluidState* before = nullptr;
  const FluidState* after = nullptr;
};
using FluidObserver = std::function<void(const FluidStepInfo&)>;

/// Runs from t = 0 to T with steps of at most `dt` (clipped to fluid_dt and to
/// schedule times); snapshots at t = 0, each schedule time and T.
VectorTrajectory simulate_fluid(const VectorField& u0, const FluidConfig& cfg, double T,
                                std::span<const double> schedule, double dt, const FluidObserver& observer = {});

/// Discrete curl (∂_y ψ, -∂_x ψ) with the centered stencils; exactly
/// divergence-free under `divergence` on a periodic grid.
VectorField curl_of_stream(const ScalarField& psi);
/// Random compactly supported polynomial stream function: a sum of a few
/// bumps (1 - ρ²)^4 placed at least their radius away from the box edges.
ScalarField random_stream_function(const GridSpec& grid, unsigned seed);

/// Signed space-time pairing of the integral identity over the interior
/// snapshots (centered u_t):
///   Σ_n Δt_n ∫ [u_t·φ + (u·∇)u·φ + μ₁ (|Du|²+ε²)^{(p-2)/2} Du : Dφ].
/// Throws InvalidArgument if φ is not divergence-free to 1e-10.
double weak_residual_signed(const VectorTrajectory& traj, const VectorField& phi, const FluidConfig& cfg);
double weak_residual(const VectorTrajectory& traj, const VectorField& phi, const FluidConfig& cfg);

/// ½∫|u|²
double kinetic_energy(const VectorField& v);

} // namespace fsp
