#pragma once

#include <complex>
#include <vector>

#include "t3i/physics.hpp"

namespace t3i {

/// V(z) = -force * z acting on a particle of the given mass.
struct LinearPotential {
  double force = 0.0;  // N
  double mass = 1.0;   // kg
};

/// Gaussian wave packet in a linear potential.
///
/// Width convention: `width` is the waist Delta z0 of
///   psi ~ exp(-(z - center)^2 / (2 Delta z0^2)),
/// i.e. the 1/sqrt(e) point of the amplitude, so that |psi|^2 has variance
/// Delta z0^2 / 2. The packet has been spreading freely for `elapsed` seconds
/// since its waist; its current width is current_width().
///
/// `global_phase` is the phase of the wavefunction at the lab origin z = 0.
/// With the amplitude real and positive there, the full wavefunction reads
///   psi(z) = A exp(-(z-c)^2 / (2 W^2)
///                  + i [global_phase + p z / hbar + s ((z-c)^2 - c^2) / (2 W^2)])
/// with c = center, p = mass * velocity, W = current_width(), s = elapsed / t_s.
struct GaussianPacket {
  double center = 0.0;        // m
  double velocity = 0.0;      // m/s
  double width = 1.0;         // m, waist Delta z0
  double global_phase = 0.0;  // rad
  double time = 0.0;          // s
  double elapsed = 0.0;       // s since the waist

  double spreading_time(double mass, double hbar) const { return mass * width * width / hbar; }
  double current_width(double mass, double hbar) const;
  std::complex<double> evaluate(double z, double mass, double hbar) const;
};

struct PhasePoint {
  double z;  // m
  double v;  // m/s
};

/// S_cl = m (zf-zi)^2 / (2 dt) + F (zf+zi) dt / 2 - F^2 dt^3 / (24 m).
/// Throws std::invalid_argument when t_f <= t_i.
double classical_action(double z_i, double t_i, double z_f, double t_f, const LinearPotential& pot);

/// Position and velocity on the classical path joining (z_i, t_i) and (z_f, t_f).
PhasePoint classical_trajectory(double z_i, double t_i, double z_f, double t_f,
                                const LinearPotential& pot, double t);

/// Position-independent propagator phase -F^2 t^3 / (24 hbar m).
double cubic_phase(const LinearPotential& pot, double t,
                   const PhysicalConstants& consts = PhysicalConstants::codata());

/// Exact evolution of a Gaussian packet from initial.time to t_f.
GaussianPacket propagate_gaussian(const GaussianPacket& initial, const LinearPotential& pot, double t_f,
                                  const PhysicalConstants& consts = PhysicalConstants::codata());

/// (tau^2 + 4) / (24 (tau^2 + 1)): 1/6 for plane waves, 1/24 for point sources.
double alpha_factor(double tau);

/// -alpha(t/t_s) F^2 t^3 / (hbar m) for a packet of waist width0 released at rest.
double total_global_phase(const LinearPotential& pot, double width0, double t,
                          const PhysicalConstants& consts = PhysicalConstants::codata());

struct AlphaSample {
  double tau;
  double alpha;
};

/// Log-spaced samples of alpha_factor over [tau_min, tau_max]. A zero lower
/// bound contributes one sample at tau = 0; the remaining samples then start
/// at 1e-4 * tau_max.
std::vector<AlphaSample> alpha_curve(double tau_min, double tau_max, int n_points);

/// <phi|D(Z,P)|phi> for a centred Gaussian of waist `width` that has spread
/// freely for `elapsed`. Real and in (0, 1].
double centred_displacement_overlap(double width, double elapsed, double Z, double P, double mass,
                                    double hbar);

/// Applies the phase-space displacement D(Z, P) = exp(-i (Z p - P z) / hbar).
GaussianPacket displace_packet(const GaussianPacket& packet, double Z, double P, double mass, double hbar);

/// <a|b> for two packets sharing waist, elapsed time and mass.
std::complex<double> packet_overlap(const GaussianPacket& a, const GaussianPacket& b, double mass,
                                    double hbar);

}  // namespace t3i
