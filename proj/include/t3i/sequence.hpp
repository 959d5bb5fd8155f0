#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "t3i/physics.hpp"
#include "t3i/propagator.hpp"

namespace t3i {

struct PulseEvent {
  double time = 0.0;         // s
  double area = 0.0;         // rad, pulse area theta
  double laser_phase = 0.0;  // rad, phi_L at the pulse
};

/// Time-ordered instantaneous Raman pulses separated by free fall with the
/// state-dependent accelerations a1 (state g1) and a2 (state g2).
struct InterferometerSequence {
  std::vector<PulseEvent> pulses;
  double a1 = 0.0;    // m/s^2
  double a2 = 0.0;    // m/s^2
  double mass = 1.0;  // kg

  double t0() const { return pulses.empty() ? 0.0 : pulses.front().time; }

  /// Throws std::invalid_argument for non-increasing times, areas outside
  /// (0, 2 pi], a non-positive mass or fewer than two pulses.
  void validate() const;

  /// True for the pi/2 - pi - pi - pi/2 area pattern (any timing).
  bool has_canonical_areas() const;
  /// True for the canonical areas at t0, t0+T, t0+3T, t0+4T (relative tolerance).
  bool is_canonical(double rel_tol = 1e-12) const;

  /// The pi/2 - pi - pi - pi/2 sequence at t0 + (0, T, 3T, 4T).
  static InterferometerSequence canonical(double T, double a1, double a2, double mass, double t0 = 0.0,
                                          std::array<double, 4> laser_phases = {0.0, 0.0, 0.0, 0.0});
};

/// e^{i phase} D(disp_Z, disp_P) U_0(free_time).
struct OperatorNormalForm {
  double phase = 0.0;      // rad
  double disp_Z = 0.0;     // m
  double disp_P = 0.0;     // kg m/s
  double free_time = 0.0;  // s
};

enum class Branch { upper, lower };

struct BranchResult {
  std::optional<double> contrast;  // known when closed or when a packet is supplied
  double interferometer_phase = 0.0;
  double laser_phase_total = 0.0;
  bool closed = false;
  double residual_Z = 0.0;  // lower minus upper, at the final pulse
  double residual_P = 0.0;
};

/// Internal-state amplitudes (c1 for g1, c2 for g2).
struct Amplitudes {
  std::complex<double> c1;
  std::complex<double> c2;
};

/// Diagnostics sink for non-fatal conditions; defaults to stderr.
void set_warning_handler(std::function<void(std::string_view)> handler);

/// cos(theta/2) on the diagonal, -i e^{+-i phi_L} sin(theta/2) off it. Areas
/// that are exact multiples of pi/2 use exact trigonometric values.
Amplitudes pulse_unitary_action(double area, double laser_phase, const Amplitudes& in);

/// theta = (1 / 2 Delta) * integral of Omega_1 Omega_2 dt by the trapezoidal
/// rule on the supplied samples. Envelopes must vanish at both ends.
double pulse_area_from_envelopes(std::span<const double> times, std::span<const double> rabi1,
                                 std::span<const double> rabi2, double detuning);

OperatorNormalForm linear_evolution_normal_form(double a, double T, double mass,
                                                const PhysicalConstants& consts = PhysicalConstants::codata());

/// Normal form of left * right (right acts first).
OperatorNormalForm compose_normal_forms(const OperatorNormalForm& left, const OperatorNormalForm& right,
                                        double mass,
                                        const PhysicalConstants& consts = PhysicalConstants::codata());

/// Applies a normal form to a Gaussian packet.
GaussianPacket apply_normal_form(const OperatorNormalForm& op, const GaussianPacket& packet, double mass,
                                 const PhysicalConstants& consts = PhysicalConstants::codata());

/// Accelerations felt by one branch on each free segment. The lower branch
/// starts in g1 and the upper in g2; every interior pulse swaps them.
std::vector<double> branch_accelerations(const InterferometerSequence& seq, Branch branch);

OperatorNormalForm branch_operator(const InterferometerSequence& seq, Branch branch,
                                   const PhysicalConstants& consts = PhysicalConstants::codata());

/// Laser phase coefficients (1, -2, +2, ..., +-1) that combine the pulse
/// phases into the total laser phase of an n-pulse sequence.
std::vector<double> laser_phase_weights(std::size_t n_pulses);

/// +1 when P_g2 = (1 + C cos(phi_i + phi_L)) / 2, -1 when the sign flips
/// (three-pulse sequences).
int exit_port_sign(std::size_t n_pulses);

/// Phase and closure of U_u^dagger U_l. With a packet the contrast and the
/// phase are those of <psi_0|U_u^dagger U_l|psi_0>; without one the contrast
/// is known only for closed sequences.
BranchResult interferometer_phase(const InterferometerSequence& seq,
                                  const PhysicalConstants& consts = PhysicalConstants::codata(),
                                  const std::optional<GaussianPacket>& packet = std::nullopt);

/// -(mu_B/hbar) g_L m grad_Bz (2 g + (mu_B/m) g_L m grad_Bz) T^3.
double interferometer_phase_from_fields(const AtomConfig& atom, const FieldConfig& field,
                                        const PhysicalConstants& consts, double T);

/// phi_0 - 2 phi_1 + 2 phi_2 - phi_3. Throws unless exactly four phases are given.
double total_laser_phase(std::span<const double> pulse_phases);
double total_laser_phase(const InterferometerSequence& seq);

struct ClosureTimings {
  double t21;
  double t32;
};

/// Pulse separations closing the interferometer in position and velocity.
/// Throws DomainError when a1 == a2 and std::invalid_argument for t10 <= 0.
ClosureTimings solve_closure(double a1, double a2, double t10);

enum class InternalLabel { g1, g2 };

struct PortComponent {
  std::complex<double> amplitude;
  GaussianPacket packet;
};

struct StateSequenceResult {
  double P_g1 = 0.0;
  double P_g2 = 0.0;
  std::vector<PortComponent> port_g1;
  std::vector<PortComponent> port_g2;
};

/// Threads internal amplitudes and analytic Gaussian packets through the
/// four-pulse sequence. Requires the pi/2 - pi - pi - pi/2 area pattern.
StateSequenceResult run_state_sequence(const InterferometerSequence& seq, InternalLabel initial,
                                       const GaussianPacket& packet,
                                       const PhysicalConstants& consts = PhysicalConstants::codata());

/// |<psi_0|U_u^dagger U_l|psi_0>|; exactly 1 for closed sequences.
double gaussian_contrast(const InterferometerSequence& seq, const GaussianPacket& packet,
                         const PhysicalConstants& consts = PhysicalConstants::codata());

struct KasevichChuPhase {
  double phase;           // (k1 + k2) g T^2
  int probability_sign;   // -1: P_g2 = (1 - cos) / 2
};

KasevichChuPhase kasevich_chu_phase(double k1, double k2, double g, double T);

/// phi_0 - 2 phi_1 + phi_2.
double kasevich_chu_laser_phase(std::span<const double> pulse_phases);

}  // namespace t3i
