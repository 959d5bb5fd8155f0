#include "t3i/propagator.hpp"

#include <cmath>
#include <stdexcept>

namespace t3i {

namespace {

// Phase of the displaced-packet form psi = e^{i gamma} D(c, p) phi_s, where
// phi_s is the waist Gaussian freely evolved by `elapsed` (Gouy phase included).
double displaced_form_phase(const GaussianPacket& g, double mass, double hbar) {
  const double W = g.current_width(mass, hbar);
  const double s = g.elapsed / g.spreading_time(mass, hbar);
  const double p = mass * g.velocity;
  return g.global_phase + p * g.center / (2.0 * hbar) + 0.5 * std::atan(s) -
         s * g.center * g.center / (2.0 * W * W);
}

double origin_phase(double gamma, const GaussianPacket& g, double mass, double hbar) {
  const double W = g.current_width(mass, hbar);
  const double s = g.elapsed / g.spreading_time(mass, hbar);
  const double p = mass * g.velocity;
  return gamma - p * g.center / (2.0 * hbar) - 0.5 * std::atan(s) + s * g.center * g.center / (2.0 * W * W);
}

}  // namespace

double GaussianPacket::current_width(double mass, double hbar) const {
  const double s = elapsed / spreading_time(mass, hbar);
  return width * std::sqrt(1.0 + s * s);
}

std::complex<double> GaussianPacket::evaluate(double z, double mass, double hbar) const {
  const double W = current_width(mass, hbar);
  const double s = elapsed / spreading_time(mass, hbar);
  const double x = z - center;
  const double amp = std::exp(-x * x / (2.0 * W * W)) / std::sqrt(std::sqrt(M_PI) * W);
  const double phase =
      global_phase + mass * velocity * z / hbar + s * (x * x - center * center) / (2.0 * W * W);
  return std::polar(amp, phase);
}

double classical_action(double z_i, double t_i, double z_f, double t_f, const LinearPotential& pot) {
  if (!(t_f > t_i)) throw std::invalid_argument("classical_action requires t_f > t_i");
  const double dt = t_f - t_i;
  const double dz = z_f - z_i;
  return pot.mass * dz * dz / (2.0 * dt) + 0.5 * pot.force * (z_f + z_i) * dt -
         pot.force * pot.force * dt * dt * dt / (24.0 * pot.mass);
}

PhasePoint classical_trajectory(double z_i, double t_i, double z_f, double t_f,
                                const LinearPotential& pot, double t) {
  if (!(t_f > t_i)) throw std::invalid_argument("classical_trajectory requires t_f > t_i");
  if (t < t_i || t > t_f) throw std::invalid_argument("classical_trajectory: t outside [t_i, t_f]");
  const double dt = t_f - t_i;
  const double slope = (z_f - z_i) / dt;
  const double accel = pot.force / pot.mass;
  const double v = slope + accel * (t - 0.5 * (t_i + t_f));
  if (t == t_f) return {z_f, v};
  return {z_i + slope * (t - t_i) + 0.5 * accel * (t - t_i) * (t - t_f), v};
}

double cubic_phase(const LinearPotential& pot, double t, const PhysicalConstants& consts) {
  if (t < 0.0) throw std::invalid_argument("cubic_phase requires t >= 0");
  return -pot.force * pot.force * t * t * t / (24.0 * consts.hbar * pot.mass);
}

GaussianPacket propagate_gaussian(const GaussianPacket& initial, const LinearPotential& pot, double t_f,
                                  const PhysicalConstants& consts) {
  if (t_f < initial.time) throw std::invalid_argument("propagate_gaussian requires t_f >= initial time");
  if (!(initial.width > 0.0)) throw std::invalid_argument("packet width must be positive");
  const double tau = t_f - initial.time;
  if (tau == 0.0) return initial;

  const double m = pot.mass;
  const double hbar = consts.hbar;
  const double a = pot.force / m;
  const double p = m * initial.velocity;

  // U_a(tau) = e^{i m a^2 tau^3 / 12 hbar} D(a tau^2/2, m a tau) U_0(tau), then
  // U_0 D(c, p) = D(c + p tau/m, p) U_0 and the displacement fusion phase.
  const double Za = 0.5 * a * tau * tau;
  const double Pa = m * a * tau;
  const double shifted = initial.center + p * tau / m;
  double gamma = displaced_form_phase(initial, m, hbar);
  gamma += m * a * a * tau * tau * tau / (12.0 * hbar) + (Pa * shifted - p * Za) / (2.0 * hbar);

  GaussianPacket out = initial;
  out.center = shifted + Za;
  out.velocity = initial.velocity + a * tau;
  out.time = t_f;
  out.elapsed = initial.elapsed + tau;
  out.global_phase = origin_phase(gamma, out, m, hbar);
  return out;
}

GaussianPacket displace_packet(const GaussianPacket& packet, double Z, double P, double mass, double hbar) {
  // D(Z, P) e^{i gamma} D(c, p) = e^{i gamma} e^{i (P c - p Z) / 2 hbar} D(Z + c, P + p)
  const double p = mass * packet.velocity;
  double gamma = displaced_form_phase(packet, mass, hbar) + (P * packet.center - p * Z) / (2.0 * hbar);
  GaussianPacket out = packet;
  out.center = packet.center + Z;
  out.velocity = (p + P) / mass;
  out.global_phase = origin_phase(gamma, out, mass, hbar);
  return out;
}

double alpha_factor(double tau) {
  if (tau < 0.0) throw std::invalid_argument("alpha_factor requires tau >= 0");
  if (std::isinf(tau)) return 1.0 / 24.0;
  const double t2 = tau * tau;
  return (t2 + 4.0) / (24.0 * (t2 + 1.0));
}

double total_global_phase(const LinearPotential& pot, double width0, double t,
                          const PhysicalConstants& consts) {
  if (!(width0 > 0.0)) throw std::invalid_argument("total_global_phase requires width0 > 0");
  if (t < 0.0) throw std::invalid_argument("total_global_phase requires t >= 0");
  const double ts = pot.mass * width0 * width0 / consts.hbar;
  return -alpha_factor(t / ts) * pot.force * pot.force * t * t * t / (consts.hbar * pot.mass);
}

std::vector<AlphaSample> alpha_curve(double tau_min, double tau_max, int n_points) {
  if (!(tau_min >= 0.0) || !(tau_max > tau_min))
    throw std::invalid_argument("alpha_curve requires 0 <= tau_min < tau_max");
  if (n_points < 2) throw std::invalid_argument("alpha_curve requires at least two points");

  std::vector<AlphaSample> rows;
  rows.reserve(static_cast<std::size_t>(n_points));
  int n_log = n_points;
  double lo = tau_min;
  if (tau_min == 0.0) {
    rows.push_back({0.0, alpha_factor(0.0)});
    --n_log;
    lo = 1e-4 * tau_max;
  }
  if (n_log == 1) {
    rows.push_back({tau_max, alpha_factor(tau_max)});
    return rows;
  }
  const double llo = std::log(lo);
  const double lhi = std::log(tau_max);
  for (int i = 0; i < n_log; ++i) {
    double tau = std::exp(llo + (lhi - llo) * i / (n_log - 1));
    if (i == 0) tau = lo;
    if (i == n_log - 1) tau = tau_max;
    rows.push_back({tau, alpha_factor(tau)});
  }
  return rows;
}

double centred_displacement_overlap(double width, double elapsed, double Z, double P, double mass,
                                    double hbar) {
  const double ts = mass * width * width / hbar;
  const double s = elapsed / ts;
  const double W2 = width * width * (1.0 + s * s);
  const double re_c = 1.0 / (2.0 * W2);
  const double im_c = -s / (2.0 * W2);
  const double k = P / hbar + 2.0 * im_c * Z;
  return std::exp(-re_c * Z * Z / 2.0 - k * k / (8.0 * re_c));
}

std::complex<double> packet_overlap(const GaussianPacket& a, const GaussianPacket& b, double mass,
                                    double hbar) {
  if (a.width != b.width || a.elapsed != b.elapsed)
    throw std::invalid_argument("packet_overlap needs packets with a common waist and spreading time");
  const double ga = displaced_form_phase(a, mass, hbar);
  const double gb = displaced_form_phase(b, mass, hbar);
  const double pa = mass * a.velocity;
  const double pb = mass * b.velocity;
  const double fusion = (pb * a.center - pa * b.center) / (2.0 * hbar);
  const double mag = centred_displacement_overlap(a.width, a.elapsed, b.center - a.center, pb - pa, mass, hbar);
  return std::polar(mag, gb - ga + fusion);
}

}  // namespace t3i
