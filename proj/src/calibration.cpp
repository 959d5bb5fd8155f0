#include "t3i/calibration.hpp"

#include <gsl/gsl_fit.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "t3i/errors.hpp"

namespace t3i {

void RamanTransition::validate() const {
  if (std::abs(mF1) > F1 || std::abs(mF2) > F2)
    throw std::invalid_argument("magnetic quantum number outside [-F, F]");
  if (std::abs(mF2 - mF1) > 1) throw DomainError("Raman transitions with |delta mF| = 2 are suppressed");
}

std::vector<RamanTransition> rb85_f2_to_f3_transitions() {
  std::vector<RamanTransition> out;
  for (int m1 = -2; m1 <= 2; ++m1)
    for (int m2 = m1 - 1; m2 <= m1 + 1; ++m2) out.push_back({2, m1, 3, m2, -1.0 / 3.0, 1.0 / 3.0});
  return out;
}

double zeeman_detuning(const RamanTransition& tr, double B, const PhysicalConstants& consts) {
  return consts.mu_B / consts.hbar * tr.sensitivity() * B;
}

double field_from_detuning(const RamanTransition& tr, double detuning, const PhysicalConstants& consts) {
  const double s = tr.sensitivity();
  if (s == 0.0) throw DomainError("transition is magnetically insensitive");
  return detuning * consts.hbar / (consts.mu_B * s);
}

std::vector<Peak> find_peaks(std::span<const SpectrumSample> spectrum, double min_prominence) {
  const std::size_t n = spectrum.size();
  if (n < 16) throw std::invalid_argument("peak search needs at least 16 samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(spectrum[i].detuning > spectrum[i - 1].detuning))
      throw std::invalid_argument("spectrum must be sorted by increasing detuning");

  auto y = [&](std::size_t i) { return spectrum[i].population; };
  std::vector<Peak> peaks;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(y(i) > y(i - 1))) {
      ++i;
      continue;
    }
    // plateau handling: the peak sits in the middle of equal samples
    std::size_t j = i;
    while (j + 1 < n && y(j + 1) == y(i)) ++j;
    if (j + 1 >= n || !(y(j + 1) < y(i))) {
      i = j + 1;
      continue;
    }
    const std::size_t top = (i + j) / 2;
    const double h = y(top);

    double left_min = h;
    for (std::size_t k = i; k-- > 0;) {
      if (y(k) > h) break;
      left_min = std::min(left_min, y(k));
    }
    double right_min = h;
    for (std::size_t k = j + 1; k < n; ++k) {
      if (y(k) > h) break;
      right_min = std::min(right_min, y(k));
    }
    const double prominence = h - std::max(left_min, right_min);
    if (prominence >= min_prominence && prominence > 0.0) {
      double x = spectrum[top].detuning;
      if (i == j) {
        const double y0 = y(top - 1), y1 = h, y2 = y(top + 1);
        const double denom = y0 - 2 * y1 + y2;
        if (denom < 0.0) {
          const double shift = 0.5 * (y0 - y2) / denom;
          x += shift * (spectrum[top + 1].detuning - spectrum[top - 1].detuning) / 2;
        }
      }
      peaks.push_back({x, h, prominence});
    }
    i = j + 1;
  }
  return peaks;
}

std::vector<double> clock_referenced(std::span<const Peak> peaks) {
  if (peaks.empty()) throw std::invalid_argument("no peaks to reference");
  const auto clock = std::min_element(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    return std::abs(a.detuning) < std::abs(b.detuning);
  });
  std::vector<double> out;
  for (const auto& p : peaks) out.push_back(p.detuning - clock->detuning);
  return out;
}

std::vector<SpectrumSample> synthetic_spectrum(std::span<const RamanTransition> lines, double B, double det_min,
                                               double det_max, std::size_t n, double linewidth, double amplitude,
                                               double drift, const PhysicalConstants& consts) {
  if (n < 2 || !(det_max > det_min)) throw std::invalid_argument("synthetic spectrum needs a valid detuning range");
  if (!(linewidth > 0.0)) throw std::invalid_argument("linewidth must be positive");
  std::vector<double> centres;
  for (const auto& tr : lines) {
    tr.validate();
    const double c = zeeman_detuning(tr, B, consts) + drift;
    // degenerate lines merge into one resonance
    if (std::none_of(centres.begin(), centres.end(), [&](double x) { return std::abs(x - c) <= 1e-9 * linewidth; }))
      centres.push_back(c);
  }
  std::vector<SpectrumSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = det_min + (det_max - det_min) * static_cast<double>(i) / static_cast<double>(n - 1);
    double p = 0.0;
    for (double c : centres) {
      const double x = (d - c) / linewidth;
      p += amplitude / (1.0 + x * x);
    }
    out[i] = {d, std::min(p, 1.0)};
  }
  return out;
}

GradientFit fit_gradient(std::span<const FieldMapPoint> points) {
  const std::size_t n = points.size();
  if (n < 2) throw std::invalid_argument("gradient fit needs at least two points");
  std::vector<double> z(n), B(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = points[i].z, B[i] = points[i].B;
  if (std::all_of(z.begin(), z.end(), [&](double v) { return v == z[0]; }))
    throw std::invalid_argument("gradient fit needs distinct z values");

  GradientFit fit;
  double cov00 = 0, cov01 = 0, cov11 = 0, sumsq = 0;
  gsl_fit_linear(z.data(), 1, B.data(), 1, n, &fit.B0, &fit.gradient, &cov00, &cov01, &cov11, &sumsq);
  for (std::size_t i = 0; i < n; ++i) fit.residuals.push_back(B[i] - (fit.B0 + fit.gradient * z[i]));
  if (n > 2) {
    fit.B0_stderr = std::sqrt(cov00);
    fit.gradient_stderr = std::sqrt(cov11);
  }
  return fit;
}

double required_T_for_phase(const AtomConfig& atom, const FieldConfig& field, const PhysicalConstants& consts,
                            double target_phase) {
  if (!(target_phase > 0.0)) throw std::invalid_argument("target phase must be positive");
  const auto& g2 = atom.state("g2");
  const double coupling = consts.mu_B * g2.lande_g * g2.m_quantum * field.grad_Bz;
  const double coefficient = std::abs(coupling / consts.hbar * (2.0 * field.g + coupling / atom.mass));
  if (coefficient == 0.0) throw DomainError("no T^3 phase: the field gradient coupling vanishes");
  return std::cbrt(target_phase / coefficient);
}

}  // namespace t3i
