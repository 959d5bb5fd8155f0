#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "t3i/physics.hpp"
#include "t3i/propagator.hpp"
#include "t3i/sequence.hpp"

namespace t3i {

// Grid-based reference solver. Everything below Grid up to run_sequence_numeric
// works in natural units hbar = m = 1; run_sequence_numeric and
// fringe_scan_numeric accept physical inputs and rescale them first.

/// Uniform periodic grid z_i = z_min + i dz, i < n.
struct Grid {
  double z_min = -1.0;
  double z_max = 1.0;
  std::size_t n = 256;

  double dz() const { return (z_max - z_min) / static_cast<double>(n); }
  double z(std::size_t i) const { return z_min + static_cast<double>(i) * dz(); }
  /// FFT wavenumber of bin i.
  double k(std::size_t i) const;
  double k_max() const;
  /// Throws std::invalid_argument unless n >= 256 is a power of two and z_max > z_min.
  void validate() const;
};

struct GridWavefunction {
  Grid grid;
  std::vector<std::complex<double>> g1;
  std::vector<std::complex<double>> g2;
  double time = 0.0;

  double population(InternalLabel label) const;
  double norm() const { return population(InternalLabel::g1) + population(InternalLabel::g2); }
  /// Position mean and standard deviation of one component.
  std::pair<double, double> moments(InternalLabel label) const;
};

/// Time, length and momentum units of the natural-unit frame.
struct NaturalScales {
  double time = 1.0;    // s
  double length = 1.0;  // m
  double mass = 1.0;    // kg
  double hbar = 1.0;

  static NaturalScales from(double time_unit, double mass, const PhysicalConstants& consts);
  double velocity() const { return length / time; }
  double acceleration() const { return length / (time * time); }

  GaussianPacket to_natural(const GaussianPacket& p) const;
  InterferometerSequence to_natural(const InterferometerSequence& seq) const;
};

/// Samples the packet on the grid into one component. Throws DomainError when
/// the packet amplitude at either edge exceeds 1e-12 of its peak.
GridWavefunction init_gaussian(const Grid& grid, const GaussianPacket& packet, InternalLabel internal);

/// Strang split-step evolution; component g1 feels a1 and g2 feels a2.
/// Throws DomainError when a component comes within 5 widths of an edge.
GridWavefunction evolve_linear(GridWavefunction psi, double a1, double a2, double duration, std::size_t steps);

/// Steps for one segment: the potential phase change across the grid per step
/// stays below pi/4, and the splitting error a^2 t^3 / (24 n^2) below phase_tol.
std::size_t steps_for(const Grid& grid, double a_max, double duration, double phase_tol = 1e-5,
                      std::size_t min_steps = 1);

/// Pointwise Raman pulse on every grid point.
GridWavefunction apply_pulse(GridWavefunction psi, double area, double laser_phase);

/// Grid operations on a single component (natural units).
void apply_free_evolution(std::vector<std::complex<double>>& psi, const Grid& grid, double t);
void apply_displacement(std::vector<std::complex<double>>& psi, const Grid& grid, double Z, double P);
void apply_normal_form(std::vector<std::complex<double>>& psi, const Grid& grid, const OperatorNormalForm& op);
/// Single-component split-step evolution under acceleration a.
void evolve_component(std::vector<std::complex<double>>& psi, const Grid& grid, double a, double duration,
                      std::size_t steps);

double l2_distance(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b, double dz);
std::complex<double> inner_product(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b,
                                   double dz);

/// Grid spanning the classical envelope of both branches +- 10 packet widths
/// and resolving momenta up to the largest branch momentum + 10 / width.
Grid auto_grid(const InterferometerSequence& natural_seq, const GaussianPacket& natural_packet,
               std::size_t min_points = 4096);

struct OracleOptions {
  std::size_t min_points = 4096;
  std::optional<Grid> grid;  // SI metres; replaces the automatic grid
  double phase_tolerance = 1e-5;
  std::size_t min_steps = 16;
  bool branch_overlap = true;
  InternalLabel initial = InternalLabel::g1;
};

struct OracleResult {
  double P_g1 = 0.0;
  double P_g2 = 0.0;
  std::complex<double> overlap;  // <psi_u|psi_l> of the branch-tagged copies
  double contrast = 0.0;
  double phase = 0.0;            // arg(overlap)
  double norm_drift = 0.0;
  Grid grid;                     // natural units
  std::size_t steps = 0;
};

/// Full two-component propagation of a pulse sequence. The packet is taken at
/// the first pulse. Physical inputs are rescaled with the first pulse separation.
OracleResult run_sequence_numeric(const InterferometerSequence& seq, const GaussianPacket& packet,
                                  const PhysicalConstants& consts = PhysicalConstants::codata(),
                                  const OracleOptions& options = {});

struct FringePoint {
  double laser_phase;  // total laser phase of the sequence
  double P_g1;
  double P_g2;
};

/// Exit populations as the total laser phase takes each value in
/// laser_totals; only the phase of the last pulse is varied.
std::vector<FringePoint> fringe_scan_numeric(const InterferometerSequence& seq, const GaussianPacket& packet,
                                             std::span<const double> laser_totals,
                                             const PhysicalConstants& consts = PhysicalConstants::codata(),
                                             const OracleOptions& options = {});

struct FringeFit {
  double phase = 0.0;  // wrapped to (-pi, pi]
  double visibility = 0.0;
  double offset = 0.0;
  double amplitude = 0.0;
  double rms_residual = 0.0;
  bool degenerate = false;
};

/// Least-squares fit of y = A + B cos(x + phi). Needs >= 8 points spanning
/// at least 2 pi; degenerate when B / A < 1e-6.
FringeFit extract_phase_from_fringe(std::span<const double> x, std::span<const double> y);

/// Integral of G(z_f, t | z_i, 0) psi0(z_i) over [z_lo, z_hi] by adaptive
/// Simpson quadrature, with N(t) = sqrt(m / (2 pi hbar t)) e^{-i pi / 4}.
std::complex<double> huygens_integral(const std::function<std::complex<double>(double)>& psi0, double z_lo,
                                      double z_hi, const LinearPotential& pot, double t, double z_f,
                                      const PhysicalConstants& consts = PhysicalConstants::codata(),
                                      double rel_tol = 1e-12);

}  // namespace t3i
