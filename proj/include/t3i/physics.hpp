#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace t3i {

/// Fundamental constants used by every engine. SI by default; the natural
/// set (hbar = 1, mu_B = 1) backs dimensionless test fixtures.
struct PhysicalConstants {
  double hbar;   // J s
  double mu_B;   // J/T
  double g_std;  // m/s^2

  static constexpr PhysicalConstants codata() { return {1.054571817e-34, 9.2740100783e-24, 9.81}; }
  static constexpr PhysicalConstants natural() { return {1.0, 1.0, 9.81}; }

  /// Throws std::invalid_argument unless all values are finite and positive.
  void validate() const;
};

struct InternalState {
  std::string label;
  double lande_g = 0.0;
  int m_quantum = 0;
  double rest_energy_offset = 0.0;  // J

  bool magnetically_insensitive() const noexcept { return m_quantum == 0; }
};

struct AtomConfig {
  double mass = 0.0;  // kg
  std::vector<InternalState> states;

  /// Throws std::invalid_argument if the label is not declared.
  const InternalState& state(std::string_view label) const;
  void validate() const;
};

/// Local field model B(z) = (B0 + z * grad_Bz) e_z together with gravity.
struct FieldConfig {
  double g = 9.81;       // m/s^2, magnitude of the downward acceleration
  double B0 = 0.0;       // T
  double grad_Bz = 0.0;  // T/m

  /// L |grad_Bz| / |B0| for an interferometer of length L; the linear field
  /// model needs this to be small. Infinite when B0 == 0 and grad_Bz != 0.
  double validity_ratio(double length) const;
  bool valid_for_length(double length, double max_ratio = 0.1) const {
    return validity_ratio(length) <= max_ratio;
  }
};

struct Accelerations {
  double a1;  // m/s^2, magnetically insensitive state g1
  double a2;  // m/s^2, state g2
};

/// Linear Zeeman energy mu_B g m (B0 + z grad_Bz). Exactly zero for m = 0.
double zeeman_shift(const InternalState& state, const FieldConfig& field, double z,
                    const PhysicalConstants& consts = PhysicalConstants::codata());

/// Centre-of-mass accelerations of the states labelled "g1" and "g2" with the
/// z axis pointing up: a1 = -g, a2 = -g - (mu_B/m) g_L m_g2 grad_Bz.
/// Throws std::invalid_argument if g1 is magnetically sensitive or a label is missing.
Accelerations accelerations(const AtomConfig& atom, const FieldConfig& field,
                            const PhysicalConstants& consts = PhysicalConstants::codata());

/// omega_0 = mu_B g_L m_g2 B0 / hbar (rad/s) for the state labelled "g2".
double frequency_offset_omega0(const AtomConfig& atom, const FieldConfig& field,
                               const PhysicalConstants& consts = PhysicalConstants::codata());

namespace rb85 {
inline constexpr double mass = 1.40999e-25;  // kg
}

}  // namespace t3i
