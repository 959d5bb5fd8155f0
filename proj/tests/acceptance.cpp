// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
#include <fmt/format.h>
#include <gsl/gsl_fit.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "t3i/calibration.hpp"
#include "t3i/commands.hpp"
#include "t3i/oracle.hpp"
#include "t3i/phasespace.hpp"
#include "t3i/propagator.hpp"
#include "t3i/sequence.hpp"

using namespace t3i;

namespace {

constexpr double pi = std::numbers::pi;
const PhysicalConstants nat = PhysicalConstants::natural();

double wrap(double x) { return std::remainder(x, 2 * pi); }

struct Outcome {
  bool pass;
  std::string detail;
};

double fringe_phase(const InterferometerSequence& s, const GaussianPacket& g, const OracleOptions& o = {}) {
  std::vector<double> x(16), y;
  for (int i = 0; i < 16; ++i) x[i] = 2 * pi * i / 16;
  for (const auto& r : fringe_scan_numeric(s, g, x, nat, o)) y.push_back(r.P_g2);
  return extract_phase_from_fringe(x, y).phase;
}

double loglog_slope(const std::vector<double>& T, const std::vector<double>& phi) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < T.size(); ++i) {
    x.push_back(std::log(T[i]));
    y.push_back(std::log(std::abs(phi[i])));
  }
  double c0, c1, cov00, cov01, cov11, sumsq;
  gsl_fit_linear(x.data(), 1, y.data(), 1, x.size(), &c0, &c1, &cov00, &cov01, &cov11, &sumsq);
  return c1;
}

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return v;
}

Outcome tri_engine() {
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> acc(-1.0, 1.0), T(0.5, 1.5), phase(-pi, pi), width(0.5, 2.0);
  double analytic = 0.0, oracle = 0.0;
  OracleOptions o;
  o.min_points = 4096;
  for (int i = 0; i < 20; ++i) {
    auto s = InterferometerSequence::canonical(T(rng), acc(rng), acc(rng), 1.0, 0.0,
                                               {phase(rng), phase(rng), phase(rng), phase(rng)});
    const GaussianPacket g{0, 0, width(rng), 0, 0, 0};
    const double laser = total_laser_phase(s);
    const double op = interferometer_phase(s, nat).interferometer_phase;
    const double ps = phase_shift(s, nat) - laser;
    const double num = fringe_phase(s, g, o);
    analytic = std::max(analytic, std::abs(op - ps));
    oracle = std::max({oracle, std::abs(wrap(op - num)), std::abs(wrap(ps - num))});
  }
  return {analytic <= 1e-12 && oracle <= 1e-3,
          fmt::format("20 configs: operator vs phase-space {:.2e} rad, oracle vs analytic {:.2e} rad", analytic,
                      oracle)};
}

Outcome cubic_scaling() {
  const auto Ta = logspace(1e-2, 10.0, 10);
  std::vector<double> pa;
  for (double T : Ta)
    pa.push_back(interferometer_phase(InterferometerSequence::canonical(T, -1.0, 0.0, 1.0), nat).interferometer_phase);
  const double sa = loglog_slope(Ta, pa);

  // phi = T^3; the oracle phase is unwrapped onto the branch nearest T^3
  const auto To = logspace(5e-3, 5.0, 8);
  std::vector<double> po;
  double worst = 0.0;
  for (double T : To) {
    const double ref = T * T * T;
    OracleOptions o;
    o.phase_tolerance = std::min(1e-5, 1e-4 * ref);
    const double fit = fringe_phase(InterferometerSequence::canonical(T, -1.0, 0.0, 1.0), {0, 0, 1.0, 0, 0, 0}, o);
    const double un = fit + 2 * pi * std::round((ref - fit) / (2 * pi));
    worst = std::max(worst, std::abs(un - ref) / ref);
    po.push_back(un);
  }
  const double so = loglog_slope(To, po);
  return {std::abs(sa - 3.0) <= 1e-6 && std::abs(so - 3.0) <= 0.01,
          fmt::format("analytic exponent {:.9f} (T in [1e-2, 10]), oracle exponent {:.5f} (8 T in [5e-3, 5], "
                      "worst relative phase error {:.1e})",
                      sa, so, worst)};
}

Outcome closure() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0), t(0.1, 3.0);
  bool exact = true;
  double residual = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double a1 = u(rng), a2 = u(rng), t10 = t(rng);
    const auto c = solve_closure(a1, a2, t10);
    exact = exact && c.t21 == 2 * t10 && c.t32 == t10;
    InterferometerSequence s;
    s.a1 = a1;
    s.a2 = a2;
    s.pulses = {{0, pi / 2, 0}, {t10, pi, 0}, {t10 + c.t21, pi, 0}, {t10 + c.t21 + c.t32, pi / 2, 0}};
    const auto r = interferometer_phase(s, nat);
    const double amax = std::max(std::abs(a1), std::abs(a2)), dur = 4 * t10;
    residual = std::max({residual, std::abs(r.residual_Z) / (amax * dur * dur), std::abs(r.residual_P) / (amax * dur)});
  }
  auto s = InterferometerSequence::canonical(1.0, -5.0, 5.0, 1.0);
  const double shift = 0.001 * (s.pulses[2].time - s.pulses[1].time);
  s.pulses[2].time += shift;
  s.pulses[3].time += shift;
  const GaussianPacket g{0, 0, 1.0, 0, 0, 0};
  const double C = gaussian_contrast(s, g, nat);
  const double Cn = run_sequence_numeric(s, g, nat).contrast;
  return {exact && residual <= 1e-12 && C < 1.0 && Cn < 1.0 && std::abs(C - Cn) <= 1e-4,
          fmt::format("closure exact in 100 cases: {}, max relative residual {:.1e}; 0.1% perturbation: "
                      "analytic contrast {:.8f}, oracle {:.8f}",
                      exact ? "yes" : "no", residual, C, Cn)};
}

Outcome initial_state() {
  const auto s = InterferometerSequence::canonical(1.0, -1.0, 0.0, 1.0);
  const double ref = fringe_phase(s, {0, 0, 1.0, 0, 0, 0});
  double worst = 0.0;
  for (double v : {0.1, 1.0, 10.0, 100.0}) {
    worst = std::max(worst, std::abs(wrap(fringe_phase(s, {0, 0, v, 0, 0, 0}) - ref)));
    worst = std::max(worst, std::abs(wrap(fringe_phase(s, {v, 0, 1.0, 0, 0, 0}) - ref)));
    worst = std::max(worst, std::abs(wrap(fringe_phase(s, {0, v, 1.0, 0, 0, 0}) - ref)));
  }
  return {worst < 1e-3, fmt::format("width, centre and velocity each over 1e-1..1e2: max phase change {:.2e} rad", worst)};
}

Outcome alpha_limits() {
  const double a0 = alpha_factor(0.0), ainf = alpha_factor(1e6);
  double worst = 0.0;
  const double t = 1.0;
  for (double tau : logspace(1e-2, 1e2, 10)) {
    const GaussianPacket g{0, 0, 1.0 / std::sqrt(tau), 0, 0, 0};
    auto psi0 = [&](double z) { return g.evaluate(z, 1.0, 1.0); };
    const double c = t * t / 2, W2 = g.width * g.width * (1 + tau * tau);
    const auto h = huygens_integral(psi0, -8 * g.width, 8 * g.width, {1.0, 1.0}, t, c, nat);
    const double global = std::arg(h) - t * c + tau * c * c / (2 * W2) + 0.5 * std::atan(tau);
    worst = std::max(worst, std::abs(wrap(global - total_global_phase({1.0, 1.0}, g.width, t, nat))));
  }
  return {a0 == 1.0 / 6.0 && std::abs(ainf - 1.0 / 24.0) <= 1e-12 && worst <= 1e-4,
          fmt::format("alpha(0) - 1/6 = {:.1e}, alpha(1e6) - 1/24 = {:.1e}, Huygens vs global phase at 10 tau: {:.1e} rad",
                      a0 - 1.0 / 6.0, ainf - 1.0 / 24.0, worst)};
}

Outcome bch() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> a(-1.5, 1.5), T(0.5, 2.0);
  const Grid grid{-40, 40, 4096};
  const GaussianPacket g{0, 0.2, 1.5, 0, 0, 0};
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double ai = a(rng), Ti = T(rng);
    auto direct = init_gaussian(grid, g, InternalLabel::g1).g1;
    auto algebra = direct;
    evolve_component(direct, grid, ai, Ti, 16000);
    apply_normal_form(algebra, grid, linear_evolution_normal_form(ai, Ti, 1.0, nat));
    worst = std::max(worst, l2_distance(direct, algebra, grid.dz()));
  }
  return {worst < 1e-8, fmt::format("5 random (a, T): max L2 distance {:.2e}", worst)};
}

Outcome field_conversion() {
  const double per_kHz = 2 * pi * 1e3 / zeeman_detuning(RamanTransition::plus_two(), 1.0) * 1e6;
  const bool three = std::round(per_kHz * 1000) / 1000 == 0.107;
  const bool two = std::round(per_kHz * 100) / 100 == 0.11;
  return {three && two, fmt::format("+2 line: {:.5f} uT/kHz", per_kHz)};
}

Outcome gradient() {
  std::vector<FieldMapPoint> pts;
  for (int i = 0; i < 10; ++i) {
    const double z = 0.016 * i;
    pts.push_back({z, (83.5 - 587.0 * z) * 1e-6, std::nullopt});
  }
  const auto fit = fit_gradient(pts);
  const double eB = std::abs(fit.B0 - 83.5e-6) / 83.5e-6, eg = std::abs(fit.gradient + 587e-6) / 587e-6;
  MonteCarloOptions mc;  // 83.5 uT, -587 uT/m, 0.5 uT noise, 10 points over 0.1 m
  const auto r = gradient_monte_carlo(mc);
  const bool ci = r.ci_low >= -617e-6 && r.ci_high <= -557e-6;
  return {eB <= 1e-12 && eg <= 1e-12 && ci,
          fmt::format("noiseless relative errors B0 {:.1e}, slope {:.1e}; 1000 noisy maps: 95% interval "
                      "[{:.2f}, {:.2f}] uT/m",
                      eB, eg, r.ci_low * 1e6, r.ci_high * 1e6)};
}

Outcome physical_scale() {
  AtomConfig atom{rb85::mass, {{"g1", -1.0 / 3.0, 0, 0.0}, {"g2", 1.0 / 3.0, 1, 0.0}}};
  const FieldConfig field{9.81, 83.5e-6, 600e-6};
  const double phi = interferometer_phase_from_fields(atom, field, PhysicalConstants::codata(), 1.5e-3);
  const auto acc = accelerations(atom, field);
  const double op =
      interferometer_phase(InterferometerSequence::canonical(1.5e-3, acc.a1, acc.a2, rb85::mass)).interferometer_phase;
  const bool agree = std::abs(op - phi) <= 1e-9 * std::abs(phi);
  return {std::abs(phi) >= 0.8 && std::abs(phi) <= 1.6 && agree,
          fmt::format("Rb-85, 600 uT/m, T = 1.5 ms: |phi_i| = {:.4f} rad (operator engine {:.4f})", std::abs(phi),
                      std::abs(op))};
}

Outcome laser_derivative() {
  const double T = 0.375, c = 1.25;
  const double t4[4] = {0, T, 3 * T, 4 * T};
  const double t3[3] = {0, T, 2 * T};
  auto sample4 = [&](const std::function<double(double)>& f) {
    std::vector<double> v;
    for (double t : t4) v.push_back(f(t));
    return total_laser_phase(v);
  };
  auto sample3 = [&](const std::function<double(double)>& f) {
    std::vector<double> v;
    for (double t : t3) v.push_back(f(t));
    return kasevich_chu_laser_phase(v);
  };
  const bool t3_ok = sample4([&](double) { return c; }) == 0.0 && sample4([&](double t) { return c * t; }) == 0.0 &&
                     sample4([&](double t) { return c * t * t; }) == 0.0 &&
                     sample4([&](double t) { return c * t * t * t; }) == -12 * c * T * T * T;
  const bool kc_ok = sample3([&](double) { return c; }) == 0.0 && sample3([&](double t) { return c * t; }) == 0.0 &&
                     sample3([&](double t) { return c * t * t; }) != 0.0;
  return {t3_ok && kc_ok, fmt::format("four-pulse: constant, linear, quadratic -> 0, cubic -> -12cT^3: {}; "
                                      "three-pulse annihilates up to linear only: {}",
                                      t3_ok ? "yes" : "no", kc_ok ? "yes" : "no")};
}

Outcome properties() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0), area(1e-3, 2 * pi), pos(0.1, 2.0);
  int fail_unitary = 0, fail_norm = 0, fail_assoc = 0, fail_sympl = 0;
  for (int i = 0; i < 1000; ++i) {
    const double th = area(rng), ph = pi * u(rng);
    const auto c1 = pulse_unitary_action(th, ph, {1.0, 0.0});
    const auto c2 = pulse_unitary_action(th, ph, {0.0, 1.0});
    const double col = std::abs(std::norm(c1.c1) + std::norm(c1.c2) - 1) + std::abs(std::norm(c2.c1) + std::norm(c2.c2) - 1);
    const double orth = std::abs(std::conj(c1.c1) * c2.c1 + std::conj(c1.c2) * c2.c2);
    if (col > 1e-14 || orth > 1e-14) ++fail_unitary;
  }
  const Grid grid{-40, 40, 256};
  for (int i = 0; i < 1000; ++i) {
    auto psi = init_gaussian(grid, {2 * u(rng), 0.3 * u(rng), pos(rng) + 0.5, 0, 0, 0},
                             u(rng) > 0 ? InternalLabel::g1 : InternalLabel::g2);
    const double n0 = psi.norm();
    psi = apply_pulse(std::move(psi), area(rng), pi * u(rng));
    psi = evolve_linear(std::move(psi), 0.5 * u(rng), 0.5 * u(rng), pos(rng), 10);
    psi = apply_pulse(std::move(psi), area(rng), pi * u(rng));
    if (std::abs(psi.norm() - n0) > 1e-12) ++fail_norm;
  }
  for (int i = 0; i < 1000; ++i) {
    OperatorNormalForm f[3];
    for (auto& x : f) x = {pi * u(rng), 3 * u(rng), 3 * u(rng), pos(rng)};
    const auto l = compose_normal_forms(compose_normal_forms(f[0], f[1], 1.0, nat), f[2], 1.0, nat);
    const auto r = compose_normal_forms(f[0], compose_normal_forms(f[1], f[2], 1.0, nat), 1.0, nat);
    if (std::abs(wrap(l.phase - r.phase)) > 1e-12 || std::abs(l.disp_Z - r.disp_Z) > 1e-12 ||
        std::abs(l.disp_P - r.disp_P) > 1e-12 || std::abs(l.free_time - r.free_time) > 1e-12)
      ++fail_assoc;
  }
  for (int i = 0; i < 1000; ++i) {
    const double m = pos(rng);
    TransitionMatrix M = free_transition(pos(rng), 0.0, m);
    double t = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double dt = pos(rng);
      M = free_transition(t + dt, t, m) * M;
      t += dt;
    }
    if (!M.is_symplectic(1e-12) || !free_transition(t, 0.0, m).is_symplectic(1e-12)) ++fail_sympl;
  }
  const int total = fail_unitary + fail_norm + fail_assoc + fail_sympl;
  return {total == 0, fmt::format("failures in 1000 cases each: unitarity {}, norm {}, associativity {}, symplecticity {}",
                                  fail_unitary, fail_norm, fail_assoc, fail_sympl)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"tri-engine phase agreement", tri_engine},
      {"cubic scaling", cubic_scaling},
      {"closure", closure},
      {"initial-state independence", initial_state},
      {"alpha limits and Huygens phase", alpha_limits},
      {"normal form vs split-step", bch},
      {"field conversion", field_conversion},
      {"gradient regression", gradient},
      {"physical-scale phase", physical_scale},
      {"laser-phase discrete derivative", laser_derivative},
      {"property suites", properties},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    fmt::print("{} {:2d} {}: {} [{:.1f} s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail, sec);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
