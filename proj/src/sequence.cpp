#include "t3i/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "t3i/errors.hpp"

namespace t3i {

namespace {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;
constexpr double closure_rel_tol = 1e-12;

std::mutex warning_mutex;
std::function<void(std::string_view)> warning_handler = [](std::string_view msg) {
  std::cerr << "warning: " << msg << '\n';
};

void warn(std::string_view msg) {
  std::lock_guard lock(warning_mutex);
  if (warning_handler) warning_handler(msg);
}

struct HalfAngle {
  double c;
  double s;
};

// cos(theta/2), sin(theta/2) with exact values on quarter turns of theta.
HalfAngle half_angle(double area) {
  if (area == pi / 2) return {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2};
  if (area == pi) return {0.0, 1.0};
  if (area == 3 * pi / 2) return {-std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2};
  if (area == 2 * pi) return {-1.0, 0.0};
  return {std::cos(area / 2), std::sin(area / 2)};
}

// Extended-precision normal form; the branch phases are large and nearly
// cancel in the interferometer phase.
struct WideForm {
  long double phase = 0, Z = 0, P = 0, t = 0;
};

WideForm wide_branch(const InterferometerSequence& seq, const std::vector<double>& accel, double hbar) {
  const long double m = seq.mass, h = hbar;
  WideForm total;
  for (std::size_t i = 0; i < accel.size(); ++i) {
    const long double a = accel[i];
    const long double dt = static_cast<long double>(seq.pulses[i + 1].time) - seq.pulses[i].time;
    const WideForm seg{m * a * a * dt * dt * dt / (12 * h), a * dt * dt / 2, m * a * dt, dt};
    const long double z2 = total.Z + total.P * seg.t / m;
    total = {seg.phase + total.phase + (seg.P * z2 - total.P * seg.Z) / (2 * h), seg.Z + z2, seg.P + total.P,
             seg.t + total.t};
  }
  return total;
}

bool near(double x, double target, double rel_tol) {
  return std::abs(x - target) <= rel_tol * std::max(std::abs(target), 1e-300);
}

}  // namespace

void set_warning_handler(std::function<void(std::string_view)> handler) {
  std::lock_guard lock(warning_mutex);
  warning_handler = std::move(handler);
}

void InterferometerSequence::validate() const {
  if (pulses.size() < 2) throw std::invalid_argument("a sequence needs at least two pulses");
  if (!(mass > 0.0)) throw std::invalid_argument("sequence mass must be positive");
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    const auto& p = pulses[i];
    if (!(p.area > 0.0 && p.area <= 2 * pi))
      throw std::invalid_argument("pulse area must lie in (0, 2 pi]");
    if (i > 0 && !(p.time > pulses[i - 1].time))
      throw std::invalid_argument("pulse times must be strictly increasing");
  }
}

bool InterferometerSequence::has_canonical_areas() const {
  if (pulses.size() != 4) return false;
  const std::array<double, 4> areas = {pi / 2, pi, pi, pi / 2};
  for (std::size_t i = 0; i < 4; ++i)
    if (!near(pulses[i].area, areas[i], 1e-12)) return false;
  return true;
}

bool InterferometerSequence::is_canonical(double rel_tol) const {
  if (!has_canonical_areas()) return false;
  const double T = pulses[1].time - pulses[0].time;
  if (!(T > 0.0)) return false;
  return std::abs(pulses[2].time - pulses[1].time - 2 * T) <= rel_tol * T &&
         std::abs(pulses[3].time - pulses[2].time - T) <= rel_tol * T;
}

InterferometerSequence InterferometerSequence::canonical(double T, double a1, double a2, double mass, double t0,
                                                         std::array<double, 4> laser_phases) {
  InterferometerSequence seq;
  seq.a1 = a1;
  seq.a2 = a2;
  seq.mass = mass;
  const std::array<double, 4> offsets = {0.0, 1.0, 3.0, 4.0};
  const std::array<double, 4> areas = {pi / 2, pi, pi, pi / 2};
  for (std::size_t i = 0; i < 4; ++i) seq.pulses.push_back({t0 + offsets[i] * T, areas[i], laser_phases[i]});
  return seq;
}

Amplitudes pulse_unitary_action(double area, double laser_phase, const Amplitudes& in) {
  const double norm = std::norm(in.c1) + std::norm(in.c2);
  if (std::abs(norm - 1.0) > 1e-9) warn("pulse applied to amplitudes with norm " + std::to_string(norm));
  const auto [c, s] = half_angle(area);
  const cplx mi{0.0, -1.0};
  const cplx up = mi * std::polar(s, laser_phase);     // -i e^{+i phi} sin
  const cplx down = mi * std::polar(s, -laser_phase);  // -i e^{-i phi} sin
  return {c * in.c1 + up * in.c2, down * in.c1 + c * in.c2};
}

double pulse_area_from_envelopes(std::span<const double> times, std::span<const double> rabi1,
                                 std::span<const double> rabi2, double detuning) {
  if (detuning == 0.0) throw std::invalid_argument("pulse area needs a nonzero detuning");
  if (times.size() != rabi1.size() || times.size() != rabi2.size() || times.size() < 2)
    throw std::invalid_argument("pulse area needs matching sample arrays of length >= 2");
  double peak = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) peak = std::max(peak, std::abs(rabi1[i] * rabi2[i]));
  const std::size_t last = times.size() - 1;
  const double tol = 1e-9 * peak;
  if (std::abs(rabi1[0] * rabi2[0]) > tol || std::abs(rabi1[last] * rabi2[last]) > tol)
    throw std::invalid_argument("Rabi envelopes must vanish at both ends of the pulse");

  double integral = 0.0;
  for (std::size_t i = 0; i < last; ++i) {
    const double dt = times[i + 1] - times[i];
    if (!(dt > 0.0)) throw std::invalid_argument("envelope sample times must increase");
    integral += 0.5 * dt * (rabi1[i] * rabi2[i] + rabi1[i + 1] * rabi2[i + 1]);
  }
  return integral / (2.0 * detuning);
}

OperatorNormalForm linear_evolution_normal_form(double a, double T, double mass, const PhysicalConstants& consts) {
  if (T < 0.0) throw std::invalid_argument("free evolution time must be non-negative");
  return {mass * a * a * T * T * T / (12.0 * consts.hbar), 0.5 * a * T * T, mass * a * T, T};
}

OperatorNormalForm compose_normal_forms(const OperatorNormalForm& left, const OperatorNormalForm& right,
                                        double mass, const PhysicalConstants& consts) {
  // U0(tL) D(ZR, PR) = D(ZR + PR tL / m, PR) U0(tL)
  const double z2 = right.disp_Z + right.disp_P * left.free_time / mass;
  const double fusion = (left.disp_P * z2 - right.disp_P * left.disp_Z) / (2.0 * consts.hbar);
  return {left.phase + right.phase + fusion, left.disp_Z + z2, left.disp_P + right.disp_P,
          left.free_time + right.free_time};
}

GaussianPacket apply_normal_form(const OperatorNormalForm& op, const GaussianPacket& packet, double mass,
                                 const PhysicalConstants& consts) {
  GaussianPacket out = propagate_gaussian(packet, {0.0, mass}, packet.time + op.free_time, consts);
  out = displace_packet(out, op.disp_Z, op.disp_P, mass, consts.hbar);
  out.global_phase += op.phase;
  return out;
}

std::vector<double> branch_accelerations(const InterferometerSequence& seq, Branch branch) {
  std::vector<double> accel;
  const std::size_t segments = seq.pulses.size() - 1;
  bool in_g1 = branch == Branch::lower;
  for (std::size_t i = 0; i < segments; ++i) {
    accel.push_back(in_g1 ? seq.a1 : seq.a2);
    in_g1 = !in_g1;
  }
  return accel;
}

OperatorNormalForm branch_operator(const InterferometerSequence& seq, Branch branch,
                                   const PhysicalConstants& consts) {
  seq.validate();
  const auto accel = branch_accelerations(seq, branch);
  OperatorNormalForm total;
  for (std::size_t i = 0; i < accel.size(); ++i) {
    const double dt = seq.pulses[i + 1].time - seq.pulses[i].time;
    total = compose_normal_forms(linear_evolution_normal_form(accel[i], dt, seq.mass, consts), total, seq.mass,
                                 consts);
  }
  return total;
}

std::vector<double> laser_phase_weights(std::size_t n_pulses) {
  if (n_pulses < 2) throw std::invalid_argument("laser phase weights need at least two pulses");
  std::vector<double> w(n_pulses);
  for (std::size_t k = 0; k < n_pulses; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    w[k] = (k == 0 || k == n_pulses - 1) ? sign : 2.0 * sign;
  }
  return w;
}

int exit_port_sign(std::size_t n_pulses) { return n_pulses % 2 == 0 ? 1 : -1; }

BranchResult interferometer_phase(const InterferometerSequence& seq, const PhysicalConstants& consts,
                                  const std::optional<GaussianPacket>& packet) {
  seq.validate();
  const auto lower = wide_branch(seq, branch_accelerations(seq, Branch::lower), consts.hbar);
  const auto upper = wide_branch(seq, branch_accelerations(seq, Branch::upper), consts.hbar);

  BranchResult r;
  const auto w = laser_phase_weights(seq.pulses.size());
  for (std::size_t k = 0; k < w.size(); ++k) r.laser_phase_total += w[k] * seq.pulses[k].laser_phase;

  r.residual_Z = static_cast<double>(lower.Z - upper.Z);
  r.residual_P = static_cast<double>(lower.P - upper.P);
  const double duration = seq.pulses.back().time - seq.pulses.front().time;
  const double amax = std::max(std::abs(seq.a1), std::abs(seq.a2));
  const double z_scale = amax * duration * duration;
  const double p_scale = seq.mass * amax * duration;
  r.closed = std::abs(r.residual_Z) <= closure_rel_tol * z_scale &&
             std::abs(r.residual_P) <= closure_rel_tol * p_scale;

  // U_u^dagger U_l = e^{i Phi} D(dZ - dP t / m, dP)
  const double phi_op = static_cast<double>(lower.phase - upper.phase +
                                            (lower.P * upper.Z - upper.P * lower.Z) / (2.0L * consts.hbar));
  r.interferometer_phase = phi_op;
  if (r.closed) {
    r.contrast = 1.0;
    return r;
  }
  if (packet) {
    const double dZ = r.residual_Z - r.residual_P * static_cast<double>(lower.t) / seq.mass;
    const auto shifted = displace_packet(*packet, dZ, r.residual_P, seq.mass, consts.hbar);
    const cplx ov = packet_overlap(*packet, shifted, seq.mass, consts.hbar);
    r.contrast = std::abs(ov);
    r.interferometer_phase = phi_op + std::arg(ov);
  }
  return r;
}

double interferometer_phase_from_fields(const AtomConfig& atom, const FieldConfig& field,
                                        const PhysicalConstants& consts, double T) {
  const auto& g2 = atom.state("g2");
  const double coupling = consts.mu_B * g2.lande_g * g2.m_quantum * field.grad_Bz;
  return -(coupling / consts.hbar) * (2.0 * field.g + coupling / atom.mass) * T * T * T;
}

double total_laser_phase(std::span<const double> pulse_phases) {
  if (pulse_phases.size() != 4) throw std::invalid_argument("total laser phase needs exactly four pulse phases");
  return pulse_phases[0] - 2.0 * pulse_phases[1] + 2.0 * pulse_phases[2] - pulse_phases[3];
}

double total_laser_phase(const InterferometerSequence& seq) {
  std::vector<double> phases;
  for (const auto& p : seq.pulses) phases.push_back(p.laser_phase);
  return total_laser_phase(phases);
}

ClosureTimings solve_closure(double a1, double a2, double t10) {
  if (a1 == a2) throw DomainError("closure degenerate: a1 == a2 closes any timing");
  if (!(t10 > 0.0)) throw std::invalid_argument("t10 must be positive");
  // t10 - t21 + t32 = 0 and the position condition reduce to t21 = 2 t10, t32 = t10.
  return {2.0 * t10, t10};
}

StateSequenceResult run_state_sequence(const InterferometerSequence& seq, InternalLabel initial,
                                       const GaussianPacket& packet, const PhysicalConstants& consts) {
  seq.validate();
  if (!seq.has_canonical_areas())
    throw std::invalid_argument("state bookkeeping requires the pi/2 - pi - pi - pi/2 sequence");

  struct Component {
    cplx amp;
    bool g1;
    GaussianPacket packet;
  };
  GaussianPacket start = packet;
  start.time = seq.t0();
  std::vector<Component> comps{{1.0, initial == InternalLabel::g1, start}};

  for (std::size_t k = 0; k < seq.pulses.size(); ++k) {
    const auto& pulse = seq.pulses[k];
    if (k > 0) {
      for (auto& c : comps)
        c.packet = propagate_gaussian(c.packet, {seq.mass * (c.g1 ? seq.a1 : seq.a2), seq.mass}, pulse.time, consts);
    }
    std::vector<Component> next;
    for (const auto& c : comps) {
      const Amplitudes in = c.g1 ? Amplitudes{1.0, 0.0} : Amplitudes{0.0, 1.0};
      const Amplitudes out = pulse_unitary_action(pulse.area, pulse.laser_phase, in);
      if (out.c1 != 0.0) next.push_back({c.amp * out.c1, true, c.packet});
      if (out.c2 != 0.0) next.push_back({c.amp * out.c2, false, c.packet});
    }
    comps = std::move(next);
  }

  StateSequenceResult r;
  for (const auto& c : comps) (c.g1 ? r.port_g1 : r.port_g2).push_back({c.amp, c.packet});
  auto population = [&](const std::vector<PortComponent>& port) {
    cplx total = 0.0;
    for (const auto& a : port)
      for (const auto& b : port)
        total += std::conj(a.amplitude) * b.amplitude * packet_overlap(a.packet, b.packet, seq.mass, consts.hbar);
    return total.real();
  };
  r.P_g1 = population(r.port_g1);
  r.P_g2 = population(r.port_g2);
  return r;
}

double gaussian_contrast(const InterferometerSequence& seq, const GaussianPacket& packet,
                         const PhysicalConstants& consts) {
  const auto r = interferometer_phase(seq, consts, packet);
  return *r.contrast;
}

KasevichChuPhase kasevich_chu_phase(double k1, double k2, double g, double T) {
  return {(k1 + k2) * g * T * T, -1};
}

double kasevich_chu_laser_phase(std::span<const double> pulse_phases) {
  if (pulse_phases.size() != 3) throw std::invalid_argument("Kasevich-Chu laser phase needs three pulse phases");
  return pulse_phases[0] - 2.0 * pulse_phases[1] + pulse_phases[2];
}

}  // namespace t3i
