#include "t3i/physics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace t3i {

namespace {
bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }
}  // namespace

void PhysicalConstants::validate() const {
  if (!positive_finite(hbar) || !positive_finite(mu_B) || !positive_finite(g_std))
    throw std::invalid_argument("physical constants must be finite and positive");
}

const InternalState& AtomConfig::state(std::string_view label) const {
  for (const auto& s : states)
    if (s.label == label) return s;
  throw std::invalid_argument("atom has no internal state labelled '" + std::string(label) + "'");
}

void AtomConfig::validate() const {
  if (!positive_finite(mass)) throw std::invalid_argument("atom mass must be positive");
  const auto& g1 = state("g1");
  state("g2");
  if (!g1.magnetically_insensitive())
    throw std::invalid_argument("state g1 must be magnetically insensitive (m = 0)");
}

double FieldConfig::validity_ratio(double length) const {
  const double num = std::abs(length * grad_Bz);
  if (num == 0.0) return 0.0;
  if (B0 == 0.0) return std::numeric_limits<double>::infinity();
  return num / std::abs(B0);
}

double zeeman_shift(const InternalState& state, const FieldConfig& field, double z,
                    const PhysicalConstants& consts) {
  if (state.m_quantum == 0) return 0.0;
  return consts.mu_B * state.lande_g * state.m_quantum * (field.B0 + z * field.grad_Bz);
}

Accelerations accelerations(const AtomConfig& atom, const FieldConfig& field,
                            const PhysicalConstants& consts) {
  atom.validate();
  const auto& g2 = atom.state("g2");
  const double a1 = -field.g;
  const double a2 = -field.g - consts.mu_B / atom.mass * g2.lande_g * g2.m_quantum * field.grad_Bz;
  return {a1, a2};
}

double frequency_offset_omega0(const AtomConfig& atom, const FieldConfig& field,
                               const PhysicalConstants& consts) {
  const auto& g2 = atom.state("g2");
  return consts.mu_B * g2.lande_g * g2.m_quantum * field.B0 / consts.hbar;
}

}  // namespace t3i
