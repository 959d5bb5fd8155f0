#include "t3i/phasespace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "t3i/errors.hpp"

namespace t3i {

namespace {

constexpr double closure_rel_tol = 1e-12;

void require_same_domain(const BranchForceProfile& a, const BranchForceProfile& b) {
  a.validate();
  b.validate();
  if (a.t_begin() != b.t_begin() || a.t_end() != b.t_end())
    throw std::invalid_argument("branch profiles must span the same time interval");
}

// Union of both breakpoint sets.
std::vector<double> merged_times(const BranchForceProfile& a, const BranchForceProfile& b) {
  std::vector<double> t(a.times);
  t.insert(t.end(), b.times.begin(), b.times.end());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

}  // namespace

TransitionMatrix TransitionMatrix::operator*(const TransitionMatrix& o) const {
  return {{m[0] * o.m[0] + m[1] * o.m[2], m[0] * o.m[1] + m[1] * o.m[3], m[2] * o.m[0] + m[3] * o.m[2],
           m[2] * o.m[1] + m[3] * o.m[3]}};
}

bool TransitionMatrix::is_symplectic(double tol) const {
  // For 2x2 matrices M^T J M = det(M) J.
  return std::abs(determinant() - 1.0) <= tol;
}

double symplectic_product(const PhaseSpaceVector& a, const PhaseSpaceVector& b) { return a.R * b.P - a.P * b.R; }

TransitionMatrix free_transition(double t, double t_prime, double mass) {
  if (t < t_prime) throw std::invalid_argument("free_transition requires t >= t'");
  if (!(mass > 0.0)) throw std::invalid_argument("free_transition requires a positive mass");
  return {{1.0, (t - t_prime) / mass, 0.0, 1.0}};
}

void BranchForceProfile::validate() const {
  if (times.size() < 2) throw std::invalid_argument("force profile needs at least one segment");
  const std::size_t n = times.size() - 1;
  if (accel.size() != n || internal_energy.size() != n || state.size() != n)
    throw std::invalid_argument("force profile arrays must have one entry per segment");
  for (std::size_t i = 0; i < n; ++i)
    if (!(times[i + 1] > times[i])) throw std::invalid_argument("force profile times must increase");
}

std::size_t BranchForceProfile::segment(double t) const {
  if (t < t_begin() || t > t_end()) throw std::invalid_argument("time outside the force profile");
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto idx = static_cast<std::size_t>(it - times.begin());
  return std::min(idx == 0 ? 0 : idx - 1, accel.size() - 1);
}

BranchForceProfile BranchForceProfile::from_sequence(const InterferometerSequence& seq, Branch branch,
                                                     double energy_g1, double energy_g2) {
  seq.validate();
  BranchForceProfile p;
  for (const auto& pulse : seq.pulses) p.times.push_back(pulse.time);
  bool in_g1 = branch == Branch::lower;
  for (std::size_t i = 0; i + 1 < seq.pulses.size(); ++i) {
    p.accel.push_back(in_g1 ? seq.a1 : seq.a2);
    p.internal_energy.push_back(in_g1 ? energy_g1 : energy_g2);
    p.state.push_back(in_g1 ? InternalLabel::g1 : InternalLabel::g2);
    in_g1 = !in_g1;
  }
  return p;
}

double mean_acceleration(const BranchForceProfile& upper, const BranchForceProfile& lower, double t) {
  return 0.5 * (lower.accel[lower.segment(t)] + upper.accel[upper.segment(t)]);
}

double difference_acceleration(const BranchForceProfile& upper, const BranchForceProfile& lower, double t) {
  return lower.accel[lower.segment(t)] - upper.accel[upper.segment(t)];
}

PhaseSpaceVector classical_solution(const PhaseSpaceVector& chi0, const BranchForceProfile& profile, double t,
                                    double mass) {
  profile.validate();
  const std::size_t last = profile.segment(t);
  const double t0 = profile.t_begin();
  PhaseSpaceVector out = free_transition(t, t0, mass).apply(chi0);
  // segment i contributes T(t, e_i) (a tau^2/2, m a tau) plus nothing else
  for (std::size_t i = 0; i <= last; ++i) {
    const double s = profile.times[i];
    const double e = i == last ? t : profile.times[i + 1];
    const double tau = e - s, a = profile.accel[i];
    out.R += 0.5 * a * tau * tau + a * tau * (t - e);
    out.P += mass * a * tau;
  }
  return out;
}

double switch_weighted_moment(const InterferometerSequence& seq) {
  seq.validate();
  const double t0 = seq.t0();
  double sum = 0.0, f = 1.0;
  for (std::size_t i = 0; i + 1 < seq.pulses.size(); ++i) {
    const double s = seq.pulses[i].time - t0, e = seq.pulses[i + 1].time - t0;
    sum += f * (e * e * e - s * s * s) / 3.0;
    f = -f;
  }
  return sum;
}

PhaseShiftResult phase_shift_general(const BranchForceProfile& upper, const BranchForceProfile& lower,
                                     double laser_total, double mass, const PhaseSpaceVector& chi0,
                                     const PhysicalConstants& consts) {
  require_same_domain(upper, lower);
  if (!(mass > 0.0)) throw std::invalid_argument("phase_shift requires a positive mass");
  const auto times = merged_times(upper, lower);
  const long double m = mass, hbar = consts.hbar;

  // x-bar(t): displacement from rest under the mean acceleration.
  long double xbar = 0, vbar = 0, force = 0, energy = 0, dwell_g1_l = 0, dwell_g1_u = 0;
  long double dR = 0, dP = 0;  // delta chi accumulated as in classical_solution with chi0 = 0
  const double t_end = times.back();
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const long double s = times[i], e = times[i + 1], tau = e - s;
    const double mid = 0.5 * (times[i] + times[i + 1]);
    const std::size_t il = lower.segment(mid), iu = upper.segment(mid);
    const long double al = lower.accel[il], au = upper.accel[iu];
    const long double gbar = (al + au) / 2, dg = al - au;
    force += dg * (xbar * tau + vbar * tau * tau / 2 + gbar * tau * tau * tau / 6);
    xbar += vbar * tau + gbar * tau * tau / 2;
    vbar += gbar * tau;
    energy += (static_cast<long double>(lower.internal_energy[il]) - upper.internal_energy[iu]) * tau;
    if (lower.state[il] == InternalLabel::g1) dwell_g1_l += tau;
    if (upper.state[iu] == InternalLabel::g1) dwell_g1_u += tau;
    dR += dg * tau * tau / 2 + dg * tau * (t_end - e);
    dP += m * dg * tau;
  }

  PhaseShiftResult r;
  r.force_term = static_cast<double>(m / hbar * force);
  r.energy_term = static_cast<double>(-energy / hbar);
  r.residual = {static_cast<double>(dR), static_cast<double>(dP)};
  const auto evolved = free_transition(t_end, times.front(), mass).apply(chi0);
  r.open_term = static_cast<double>(-(dR * evolved.P - dP * evolved.R) / hbar);

  double amax = 0.0;
  for (double a : lower.accel) amax = std::max(amax, std::abs(a));
  for (double a : upper.accel) amax = std::max(amax, std::abs(a));
  const double duration = t_end - times.front();
  r.closed = std::abs(r.residual.R) <= closure_rel_tol * amax * duration * duration &&
             std::abs(r.residual.P) <= closure_rel_tol * mass * amax * duration;
  r.equal_dwell = std::abs(static_cast<double>(dwell_g1_l - dwell_g1_u)) <= closure_rel_tol * duration;
  r.phase = laser_total + r.force_term + r.energy_term + r.open_term;
  return r;
}

double phase_shift(const BranchForceProfile& upper, const BranchForceProfile& lower, double laser_total, double mass,
                   const PhysicalConstants& consts) {
  const auto r = phase_shift_general(upper, lower, laser_total, mass, {}, consts);
  if (!r.closed) throw DomainError("phase-space engine: branches do not close");
  if (!r.equal_dwell) throw DomainError("phase-space engine: unequal dwell times in the internal states");
  return laser_total + r.force_term;
}

double phase_shift(const InterferometerSequence& seq, const PhysicalConstants& consts) {
  const auto up = BranchForceProfile::from_sequence(seq, Branch::upper);
  const auto lo = BranchForceProfile::from_sequence(seq, Branch::lower);
  double laser = 0.0;
  const auto w = laser_phase_weights(seq.pulses.size());
  for (std::size_t k = 0; k < w.size(); ++k) laser += w[k] * seq.pulses[k].laser_phase;
  return phase_shift(up, lo, laser, seq.mass, consts);
}

}  // namespace t3i
