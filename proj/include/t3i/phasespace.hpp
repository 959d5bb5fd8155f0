#pragma once

#include <array>
#include <vector>

#include "t3i/physics.hpp"
#include "t3i/sequence.hpp"

namespace t3i {

struct PhaseSpaceVector {
  double R = 0.0;  // m
  double P = 0.0;  // kg m/s
};

/// Row-major 2x2 matrix acting on (R, P).
struct TransitionMatrix {
  std::array<double, 4> m{1.0, 0.0, 0.0, 1.0};

  PhaseSpaceVector apply(const PhaseSpaceVector& v) const { return {m[0] * v.R + m[1] * v.P, m[2] * v.R + m[3] * v.P}; }
  TransitionMatrix operator*(const TransitionMatrix& o) const;
  double determinant() const { return m[0] * m[3] - m[1] * m[2]; }
  /// max |M^T J M - J| <= tol.
  bool is_symplectic(double tol = 1e-12) const;
};

/// J (R, P) pairing: a^T J b = a.R b.P - a.P b.R.
double symplectic_product(const PhaseSpaceVector& a, const PhaseSpaceVector& b);

/// [[1, (t - t') / m], [0, 1]]. Throws std::invalid_argument for t < t_prime.
TransitionMatrix free_transition(double t, double t_prime, double mass);

/// Piecewise-constant acceleration and internal energy along one branch.
/// Segment i covers [times[i], times[i+1]].
struct BranchForceProfile {
  std::vector<double> times;
  std::vector<double> accel;            // m/s^2
  std::vector<double> internal_energy;  // J, V0 on each segment
  std::vector<InternalLabel> state;

  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }
  /// Throws std::invalid_argument on inconsistent sizes or non-increasing times.
  void validate() const;
  /// Segment index containing t (right-continuous, last segment closed).
  std::size_t segment(double t) const;

  /// Schedule of one branch of a pulse sequence; the energies are the rest
  /// energies of g1 and g2.
  static BranchForceProfile from_sequence(const InterferometerSequence& seq, Branch branch, double energy_g1 = 0.0,
                                          double energy_g2 = 0.0);
};

/// (a_l + a_u) / 2 and a_l - a_u at time t.
double mean_acceleration(const BranchForceProfile& upper, const BranchForceProfile& lower, double t);
double difference_acceleration(const BranchForceProfile& upper, const BranchForceProfile& lower, double t);

/// T(t, t0) chi0 plus the retarded convolution of G = (0, m a(t)), in closed form.
/// Throws std::invalid_argument for t outside the profile.
PhaseSpaceVector classical_solution(const PhaseSpaceVector& chi0, const BranchForceProfile& profile, double t,
                                    double mass);

/// Integral of f(t') (t' - t0)^2 over the sequence, f = +1 while the lower
/// branch is in g1 and -1 otherwise.
double switch_weighted_moment(const InterferometerSequence& seq);

struct PhaseShiftResult {
  double phase = 0.0;         // rad, total delta Phi
  double force_term = 0.0;    // rad, double integral of delta g and g-bar
  double energy_term = 0.0;   // rad, -(1/hbar) integral of delta V0
  double open_term = 0.0;     // rad, -(1/hbar) delta chi^T J T chi0
  bool closed = false;
  bool equal_dwell = false;
  PhaseSpaceVector residual;  // delta chi = chi_l - chi_u at the end
};

/// All terms of the branch phase difference for arbitrary (open or closed)
/// branch pairs without momentum kicks.
PhaseShiftResult phase_shift_general(const BranchForceProfile& upper, const BranchForceProfile& lower,
                                     double laser_total, double mass, const PhaseSpaceVector& chi0 = {},
                                     const PhysicalConstants& consts = PhysicalConstants::codata());

/// laser_total + (m/hbar) * double integral. Throws DomainError when the
/// branches do not close or the dwell times in each state differ.
double phase_shift(const BranchForceProfile& upper, const BranchForceProfile& lower, double laser_total, double mass,
                   const PhysicalConstants& consts = PhysicalConstants::codata());

/// Sequence overload: profiles and laser phase built from the sequence.
double phase_shift(const InterferometerSequence& seq, const PhysicalConstants& consts = PhysicalConstants::codata());

}  // namespace t3i
