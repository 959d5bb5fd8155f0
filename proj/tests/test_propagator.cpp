#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>

#include "t3i/propagator.hpp"

using namespace t3i;
using cplx = std::complex<double>;

namespace {

const PhysicalConstants nat = PhysicalConstants::natural();

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

cplx simpson_c(const std::function<cplx(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  cplx s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Huygens integral with the linear-potential kernel, hbar = 1.
cplx huygens(const GaussianPacket& g0, double force, double mass, double t, double zf) {
  const double W = g0.current_width(mass, 1.0);
  const cplx norm = std::sqrt(mass / (2.0 * std::numbers::pi * t)) * std::polar(1.0, -std::numbers::pi / 4);
  LinearPotential pot{force, mass};
  auto integrand = [&](double zi) {
    return norm * std::polar(1.0, classical_action(zi, 0.0, zf, t, pot)) * g0.evaluate(zi, mass, 1.0);
  };
  const double lo = g0.center - 10 * W, hi = g0.center + 10 * W;
  const double kmax = std::abs(mass * g0.velocity) + mass * (std::abs(zf) + std::abs(g0.center) + 10 * W) / t +
                      std::abs(force) * t + 10.0 / W;
  const int n = std::max(4000, static_cast<int>(20.0 * kmax * (hi - lo)));
  return simpson_c(integrand, lo, hi, n);
}

}  // namespace

TEST(ClassicalAction, Trivial) {
  EXPECT_EQ(classical_action(0.3, 0.0, 0.3, 2.0, {0.0, 1.0}), 0.0);
  EXPECT_DOUBLE_EQ(classical_action(0.0, 0.0, 1.0, 1.0, {0.0, 1.0}), 0.5);
}

TEST(ClassicalAction, RejectsNonPositiveDuration) {
  EXPECT_THROW(classical_action(0, 1.0, 1, 1.0, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(classical_action(0, 1.0, 1, 0.5, {1.0, 1.0}), std::invalid_argument);
}

TEST(ClassicalAction, MatchesLagrangianQuadrature) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    LinearPotential pot{u(rng), 0.5 + std::abs(u(rng))};
    const double zi = u(rng), zf = u(rng), ti = u(rng), tf = ti + 0.1 + std::abs(u(rng));
    auto lagrangian = [&](double t) {
      // z(t) and v(t) from kinematics, independent of classical_trajectory
      const double a = pot.force / pot.mass, dt = tf - ti;
      const double v0 = (zf - zi) / dt - 0.5 * a * dt;
      const double s = t - ti;
      const double z = zi + v0 * s + 0.5 * a * s * s;
      const double v = v0 + a * s;
      return 0.5 * pot.mass * v * v + pot.force * z;
    };
    const double ref = simpson(lagrangian, ti, tf, 200);
    const double S = classical_action(zi, ti, zf, tf, pot);
    EXPECT_NEAR(S, ref, 1e-10 * std::max(1.0, std::abs(ref)));
  }
}

TEST(ClassicalAction, StationaryUnderBumps) {
  LinearPotential pot{1.3, 0.7};
  const double zi = 0.2, zf = -0.4, ti = 0.0, tf = 1.5;
  auto action_of = [&](double eps) {
    auto L = [&](double t) {
      const auto p = classical_trajectory(zi, ti, zf, tf, pot, t);
      const double w = std::numbers::pi / (tf - ti);
      const double bump = eps * std::sin(w * (t - ti));
      const double dbump = eps * w * std::cos(w * (t - ti));
      const double v = p.v + dbump;
      return 0.5 * pot.mass * v * v + pot.force * (p.z + bump);
    };
    return simpson(L, ti, tf, 2000);
  };
  const double h = 1e-4;
  const double deriv = (action_of(h) - action_of(-h)) / (2 * h);
  EXPECT_LT(std::abs(deriv), 1e-6 * std::abs(action_of(0.0)) + 1e-9);
}

TEST(ClassicalTrajectory, Boundaries) {
  LinearPotential pot{2.0, 1.0};
  EXPECT_EQ(classical_trajectory(0.1, 1.0, 0.7, 2.0, pot, 1.0).z, 0.1);
  EXPECT_EQ(classical_trajectory(0.1, 1.0, 0.7, 2.0, pot, 2.0).z, 0.7);
  EXPECT_THROW(classical_trajectory(0.1, 1.0, 0.7, 2.0, pot, 2.5), std::invalid_argument);
}

TEST(ClassicalTrajectory, FreeIsStraight) {
  LinearPotential pot{0.0, 1.0};
  for (double t = 0.0; t <= 2.0; t += 0.25) {
    auto p = classical_trajectory(-1.0, 0.0, 3.0, 2.0, pot, t);
    EXPECT_NEAR(p.z, -1.0 + 4.0 * t / 2.0, 1e-15);
    EXPECT_DOUBLE_EQ(p.v, 2.0);
  }
}

TEST(CubicPhase, Values) {
  EXPECT_EQ(cubic_phase({0.0, 1.0}, 3.0, nat), 0.0);
  EXPECT_DOUBLE_EQ(cubic_phase({1.0, 1.0}, 1.0, nat), -1.0 / 24.0);
  EXPECT_DOUBLE_EQ(cubic_phase({0.3, 2.0}, 2.4, nat), 8.0 * cubic_phase({0.3, 2.0}, 1.2, nat));
}

TEST(CubicPhase, EqualsActionConstantTerm) {
  LinearPotential pot{0.8, 1.7};
  const double t = 1.3;
  EXPECT_DOUBLE_EQ(cubic_phase(pot, t, nat), classical_action(0.0, 0.0, 0.0, t, pot));
}

TEST(PropagateGaussian, IdentityAtZeroDuration) {
  GaussianPacket g{0.1, 0.2, 0.5, 0.3, 1.0, 0.0};
  auto out = propagate_gaussian(g, {1.0, 1.0}, 1.0, nat);
  EXPECT_EQ(out.center, g.center);
  EXPECT_EQ(out.global_phase, g.global_phase);
}

TEST(PropagateGaussian, WidthAtSpreadingTime) {
  GaussianPacket g{0.0, 0.0, 0.7, 0.0, 0.0, 0.0};
  const double ts = g.spreading_time(1.0, 1.0);
  auto out = propagate_gaussian(g, {0.0, 1.0}, ts, nat);
  EXPECT_NEAR(out.current_width(1.0, 1.0), std::sqrt(2.0) * 0.7, 1e-14);
}

TEST(PropagateGaussian, CenterFollowsForce) {
  GaussianPacket g{0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
  auto out = propagate_gaussian(g, {2.0, 0.5}, 1.5, nat);
  EXPECT_NEAR(out.center, 2.0 * 1.5 * 1.5 / (2 * 0.5), 1e-14);
}

TEST(PropagateGaussian, MatchesHuygensQuadrature) {
  struct Case {
    GaussianPacket g;
    double force, mass, t;
  };
  const Case cases[] = {
      {{0.0, 0.0, 1.0, 0.0, 0.0, 0.0}, 1.0, 1.0, 1.0},
      {{0.0, 0.0, 0.3, 0.0, 0.0, 0.0}, -2.0, 1.0, 0.7},
      {{0.5, -0.4, 0.8, 0.2, 0.0, 0.0}, 1.5, 2.0, 1.1},
      {{-0.3, 0.6, 1.2, -0.5, 0.0, 0.4}, 0.7, 1.0, 0.9},
  };
  for (const auto& c : cases) {
    auto out = propagate_gaussian(c.g, {c.force, c.mass}, c.t, nat);
    const double W = out.current_width(c.mass, 1.0);
    const double peak = std::abs(out.evaluate(out.center, c.mass, 1.0));
    for (double x = -2.5; x <= 2.5; x += 0.5) {
      const double z = out.center + x * W;
      const cplx ref = huygens(c.g, c.force, c.mass, c.t, z);
      const cplx got = out.evaluate(z, c.mass, 1.0);
      EXPECT_LT(std::abs(got - ref), 1e-8 * peak) << "z=" << z;
    }
  }
}

TEST(PropagateGaussian, Semigroup) {
  GaussianPacket g{0.2, -0.1, 0.9, 0.4, 0.0, 0.0};
  LinearPotential pot{1.7, 1.3};
  auto direct = propagate_gaussian(g, pot, 2.0, nat);
  auto split = propagate_gaussian(propagate_gaussian(g, pot, 0.8, nat), pot, 2.0, nat);
  EXPECT_NEAR(split.center, direct.center, 1e-10 * std::abs(direct.center));
  EXPECT_NEAR(split.velocity, direct.velocity, 1e-10 * std::abs(direct.velocity));
  EXPECT_NEAR(split.elapsed, direct.elapsed, 1e-12);
  EXPECT_NEAR(std::remainder(split.global_phase - direct.global_phase, 2 * std::numbers::pi), 0.0, 1e-10);
}

TEST(PropagateGaussian, NormConserved) {
  GaussianPacket g{0.0, 0.3, 0.6, 0.0, 0.0, 0.0};
  for (double t : {0.0, 0.5, 2.0, 5.0}) {
    auto out = propagate_gaussian(g, {1.0, 1.0}, t, nat);
    const double W = out.current_width(1.0, 1.0);
    const double norm = simpson([&](double z) { return std::norm(out.evaluate(z, 1.0, 1.0)); },
                                out.center - 12 * W, out.center + 12 * W, 4000);
    EXPECT_NEAR(norm, 1.0, 1e-9);
  }
}

TEST(AlphaFactor, Values) {
  EXPECT_DOUBLE_EQ(alpha_factor(0.0), 1.0 / 6.0);
  EXPECT_NEAR(alpha_factor(1e6), 1.0 / 24.0, 1e-12);
  EXPECT_DOUBLE_EQ(alpha_factor(1.0), 5.0 / 48.0);
  EXPECT_DOUBLE_EQ(alpha_factor(INFINITY), 1.0 / 24.0);
  EXPECT_THROW(alpha_factor(-1.0), std::invalid_argument);
}

TEST(TotalGlobalPhase, Limits) {
  LinearPotential pot{1.0, 1.0};
  // plane wave: t << t_s
  EXPECT_NEAR(total_global_phase(pot, 1e3, 1.0, nat), -1.0 / 6.0, 1e-6);
  // narrow packet: t >> t_s
  EXPECT_NEAR(total_global_phase(pot, 1e-3, 1.0, nat), -1.0 / 24.0, 1e-6);
}

TEST(TotalGlobalPhase, MatchesHuygensCenterPhase) {
  const double t = 1.0;
  for (double tau : {0.05, 0.5, 1.0, 3.0, 20.0}) {
    GaussianPacket g{0.0, 0.0, 1.0 / std::sqrt(tau), 0.0, 0.0, 0.0};
    const double c = t * t / 2.0, p = t;  // F = m = 1
    const double W2 = g.width * g.width * (1 + tau * tau);
    const cplx psi = huygens(g, 1.0, 1.0, t, c);
    const double global = std::arg(psi) - p * c + tau * c * c / (2.0 * W2) + 0.5 * std::atan(tau);
    EXPECT_NEAR(std::remainder(global - total_global_phase({1.0, 1.0}, g.width, t, nat), 2 * std::numbers::pi),
                0.0, 1e-6)
        << "tau=" << tau;
  }
}

TEST(AlphaCurve, Shape) {
  auto rows = alpha_curve(0.0, 1e6, 50);
  ASSERT_EQ(rows.size(), 50u);
  EXPECT_DOUBLE_EQ(rows.front().alpha, 1.0 / 6.0);
  EXPECT_NEAR(rows.back().alpha, 1.0 / 24.0, 1e-12);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].alpha, rows[i - 1].alpha);
  EXPECT_EQ(alpha_curve(0.1, 10.0, 2).size(), 2u);
  EXPECT_THROW(alpha_curve(1.0, 1.0, 5), std::invalid_argument);
  EXPECT_THROW(alpha_curve(0.0, 1.0, 1), std::invalid_argument);
}

TEST(Overlap, DisplacementByTwoWidths) {
  // |<phi|D(2 dz, 0)|phi>| = exp(-1)
  EXPECT_NEAR(centred_displacement_overlap(0.4, 0.0, 0.8, 0.0, 1.0, 1.0), std::exp(-1.0), 1e-12);
}

TEST(Overlap, MatchesQuadrature) {
  GaussianPacket a{0.1, 0.2, 0.7, 0.3, 0.0, 0.5};
  auto b = displace_packet(a, 0.4, -0.3, 1.3, 1.0);
  b.global_phase += 0.2;
  const cplx ov = packet_overlap(a, b, 1.3, 1.0);
  const cplx ref = simpson_c([&](double z) { return std::conj(a.evaluate(z, 1.3, 1.0)) * b.evaluate(z, 1.3, 1.0); },
                             -10.0, 10.0, 20000);
  EXPECT_LT(std::abs(ov - ref), 1e-10);
}

TEST(Displace, MatchesShiftAndRamp) {
  // D(Z,P) psi(z) = e^{i P (z - Z/2)} psi(z - Z)
  GaussianPacket a{0.1, 0.2, 0.7, 0.3, 0.0, 0.5};
  const double Z = 0.35, P = -0.6;
  auto b = displace_packet(a, Z, P, 1.0, 1.0);
  for (double z = -2.0; z <= 2.0; z += 0.25) {
    const cplx ref = std::polar(1.0, P * (z - Z / 2)) * a.evaluate(z - Z, 1.0, 1.0);
    EXPECT_LT(std::abs(b.evaluate(z, 1.0, 1.0) - ref), 1e-13);
  }
}
