#pragma once

#include <optional>
#include <span>
#include <vector>

#include "t3i/physics.hpp"

namespace t3i {

/// |F1, mF1> -> |F2, mF2> Raman transition between two hyperfine levels.
struct RamanTransition {
  int F1 = 2;
  int mF1 = 0;
  int F2 = 3;
  int mF2 = 0;
  double gF1 = -1.0 / 3.0;
  double gF2 = 1.0 / 3.0;

  /// gF2 mF2 - gF1 mF1.
  double sensitivity() const { return gF2 * mF2 - gF1 * mF1; }
  /// Throws DomainError for |mF2 - mF1| > 1 and std::invalid_argument for
  /// magnetic numbers outside [-F, F].
  void validate() const;

  /// m = 1 -> 1 between F = 2 and F = 3 of Rb-85, the "+2" line.
  static RamanTransition plus_two() { return {2, 1, 3, 1, -1.0 / 3.0, 1.0 / 3.0}; }
};

/// Every |2, m1> -> |3, m2> transition of Rb-85 with |m2 - m1| <= 1.
std::vector<RamanTransition> rb85_f2_to_f3_transitions();

struct SpectrumSample {
  double detuning;    // rad/s
  double population;  // in [0, 1]
};

struct FieldMapPoint {
  double z;  // m
  double B;  // T
  std::optional<double> uncertainty;  // T
};

/// (mu_B / hbar) (gF2 mF2 - gF1 mF1) B in rad/s.
double zeeman_detuning(const RamanTransition& tr, double B,
                       const PhysicalConstants& consts = PhysicalConstants::codata());

/// Inverse of zeeman_detuning. Throws DomainError for insensitive transitions.
double field_from_detuning(const RamanTransition& tr, double detuning,
                           const PhysicalConstants& consts = PhysicalConstants::codata());

struct Peak {
  double detuning;  // rad/s, refined by a parabola through the top three samples
  double height;
  double prominence;
};

/// Local maxima whose topographic prominence reaches min_prominence, sorted by
/// detuning. Needs >= 16 samples in increasing detuning order.
std::vector<Peak> find_peaks(std::span<const SpectrumSample> spectrum, double min_prominence);

/// Peak positions relative to the peak closest to zero detuning (the clock
/// line), which removes a common drift of the spectrum.
std::vector<double> clock_referenced(std::span<const Peak> peaks);

/// Sum of Lorentzians of half width `linewidth` (rad/s) centred on the
/// detunings of `lines` at field B, shifted by `drift`, sampled at n points.
std::vector<SpectrumSample> synthetic_spectrum(std::span<const RamanTransition> lines, double B, double det_min,
                                               double det_max, std::size_t n, double linewidth,
                                               double amplitude = 0.5, double drift = 0.0,
                                               const PhysicalConstants& consts = PhysicalConstants::codata());

struct GradientFit {
  double B0 = 0.0;        // T, intercept at z = 0
  double gradient = 0.0;  // T/m
  double B0_stderr = 0.0;
  double gradient_stderr = 0.0;
  std::vector<double> residuals;  // T, data minus fit
};

/// Ordinary least squares B(z) = B0 + gradient z. Throws std::invalid_argument
/// for fewer than two points or coincident z values.
GradientFit fit_gradient(std::span<const FieldMapPoint> points);

/// Pulse separation T giving |phi_i| = target_phase for the field gradient.
/// Throws DomainError when the phase coefficient vanishes.
double required_T_for_phase(const AtomConfig& atom, const FieldConfig& field, const PhysicalConstants& consts,
                            double target_phase);

}  // namespace t3i
