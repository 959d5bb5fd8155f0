#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "t3i/errors.hpp"
#include "t3i/phasespace.hpp"

using namespace t3i;

namespace {
const PhysicalConstants nat = PhysicalConstants::natural();
constexpr double pi = std::numbers::pi;
}  // namespace

TEST(Transition, IdentityAtEqualTimes) {
  auto t = free_transition(2.0, 2.0, 1.3);
  EXPECT_EQ(t.m, (std::array<double, 4>{1, 0, 0, 1}));
  EXPECT_THROW(free_transition(1.0, 2.0, 1.0), std::invalid_argument);
}

TEST(Transition, GroupLawAndSymplectic) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double t0 = u(rng), t1 = t0 + u(rng), t2 = t1 + u(rng), m = 0.1 + u(rng);
    auto prod = free_transition(t2, t1, m) * free_transition(t1, t0, m);
    auto direct = free_transition(t2, t0, m);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(prod.m[k], direct.m[k], 1e-12 * (1 + std::abs(direct.m[k])));
    EXPECT_TRUE(prod.is_symplectic());
    EXPECT_NEAR(direct.determinant(), 1.0, 1e-15);
  }
}

TEST(ClassicalSolution, Ballistic) {
  auto seq = InterferometerSequence::canonical(1.0, 0.0, 0.0, 2.0);
  auto prof = BranchForceProfile::from_sequence(seq, Branch::lower);
  for (double t : {0.0, 0.5, 2.0, 4.0}) {
    auto chi = classical_solution({0.3, 1.0}, prof, t, 2.0);
    EXPECT_NEAR(chi.R, 0.3 + 0.5 * t, 1e-15);
    EXPECT_EQ(chi.P, 1.0);
  }
}

TEST(ClassicalSolution, SingleSegmentKinematics) {
  BranchForceProfile p{{0.0, 1.5}, {2.0}, {0.0}, {InternalLabel::g1}};
  auto chi = classical_solution({0.0, 0.0}, p, 1.5, 3.0);
  EXPECT_DOUBLE_EQ(chi.R, 2.0 * 1.5 * 1.5 / 2);
  EXPECT_DOUBLE_EQ(chi.P, 3.0 * 2.0 * 1.5);
  EXPECT_THROW(classical_solution({}, p, 2.0, 1.0), std::invalid_argument);
}

TEST(ClassicalSolution, CanonicalEndpointsMatchOperatorEngine) {
  const double a1 = 0.6, a2 = -1.1, T = 0.8, m = 1.4;
  auto seq = InterferometerSequence::canonical(T, a1, a2, m, 0.25);
  const PhaseSpaceVector chi0{0.2, -0.3};
  for (auto br : {Branch::lower, Branch::upper}) {
    auto chi = classical_solution(chi0, BranchForceProfile::from_sequence(seq, br), seq.pulses.back().time, m);
    auto nf = branch_operator(seq, br, nat);
    EXPECT_NEAR(chi.R, chi0.R + chi0.P * 4 * T / m + 4 * (a1 + a2) * T * T, 1e-14);
    EXPECT_NEAR(chi.P, chi0.P + 2 * m * (a1 + a2) * T, 1e-14);
    EXPECT_NEAR(chi.R - chi0.R - chi0.P * 4 * T / m, nf.disp_Z, 1e-14);
    EXPECT_NEAR(chi.P - chi0.P, nf.disp_P, 1e-14);
  }
}

TEST(ClassicalSolution, ClosureConsistency) {
  auto c = solve_closure(0.3, 1.7, 0.9);
  InterferometerSequence seq;
  seq.a1 = 0.3, seq.a2 = 1.7, seq.mass = 1.0;
  seq.pulses = {{0, pi / 2, 0}, {0.9, pi, 0}, {0.9 + c.t21, pi, 0}, {0.9 + c.t21 + c.t32, pi / 2, 0}};
  const double tf = seq.pulses.back().time;
  auto u = classical_solution({0.1, 0.2}, BranchForceProfile::from_sequence(seq, Branch::upper), tf, 1.0);
  auto l = classical_solution({0.1, 0.2}, BranchForceProfile::from_sequence(seq, Branch::lower), tf, 1.0);
  EXPECT_NEAR(u.R, l.R, 1e-14);
  EXPECT_NEAR(u.P, l.P, 1e-14);
}

TEST(PhaseShift, EqualAccelerationsGiveLaserPhase) {
  auto seq = InterferometerSequence::canonical(1.0, 0.7, 0.7, 1.0, 0.0, {0.1, 0.2, 0.4, 0.3});
  EXPECT_NEAR(phase_shift(seq, nat), 0.1 - 0.4 + 0.8 - 0.3, 1e-15);
}

TEST(PhaseShift, NaturalUnitsExample) {
  EXPECT_NEAR(phase_shift(InterferometerSequence::canonical(1.0, 1.0, 2.0, 1.0), nat), -3.0, 1e-14);
}

TEST(PhaseShift, SwitchWeightedMoment) {
  for (double T : {0.1, 1.0, 3.3}) {
    auto seq = InterferometerSequence::canonical(T, 0, 1, 1, 5.0);
    EXPECT_NEAR(switch_weighted_moment(seq), 4 * T * T * T, 1e-12 * T * T * T);
  }
}

TEST(PhaseShift, AgreesWithOperatorEngine) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    auto seq = InterferometerSequence::canonical(0.05 + std::abs(u(rng)) / 2, u(rng), u(rng), 0.2 + std::abs(u(rng)),
                                                 u(rng), {u(rng), u(rng), u(rng), u(rng)});
    auto op = interferometer_phase(seq, nat);
    const double ref = op.interferometer_phase + op.laser_phase_total;
    EXPECT_NEAR(phase_shift(seq, nat), ref, 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST(PhaseShift, SIScaleAgreesWithOperatorEngine) {
  auto seq = InterferometerSequence::canonical(1.5e-3, -9.81, -9.81 - 0.013155, rb85::mass);
  const double a = interferometer_phase(seq).interferometer_phase;
  EXPECT_NEAR(phase_shift(seq), a, 1e-12 * std::abs(a));
}

TEST(PhaseShift, OpenGeometryMatchesOperatorOverlapPhase) {
  auto seq = InterferometerSequence::canonical(1.0, 1.0, 2.0, 1.0);
  seq.pulses[2].time += 0.03;
  seq.pulses[3].time += 0.05;
  auto up = BranchForceProfile::from_sequence(seq, Branch::upper);
  auto lo = BranchForceProfile::from_sequence(seq, Branch::lower);
  EXPECT_THROW(phase_shift(up, lo, 0.0, 1.0, nat), DomainError);
  // packet at rest at the origin: operator phase only
  auto r0 = phase_shift_general(up, lo, 0.0, 1.0, {}, nat);
  EXPECT_FALSE(r0.closed);
  EXPECT_NEAR(r0.phase, interferometer_phase(seq, nat).interferometer_phase, 1e-12);
  // displaced, moving packet: the initial-state dependent term appears
  GaussianPacket g{0.4, -0.3, 1.2, 0.0, 0.0, 0.0};
  auto r1 = phase_shift_general(up, lo, 0.0, 1.0, {g.center, g.velocity}, nat);
  auto op = interferometer_phase(seq, nat, g);
  EXPECT_NEAR(std::remainder(r1.phase - op.interferometer_phase, 2 * pi), 0.0, 1e-12);
  EXPECT_NE(r1.open_term, 0.0);
}

TEST(PhaseShift, UnequalDwellRejected) {
  // three pulses: t10 != t21 leaves different times in g1 on both branches
  InterferometerSequence seq;
  seq.a1 = 1.0, seq.a2 = 1.0, seq.mass = 1.0;
  seq.pulses = {{0, pi / 2, 0}, {1.0, pi, 0}, {2.5, pi / 2, 0}};
  auto up = BranchForceProfile::from_sequence(seq, Branch::upper, 0.0, 0.5);
  auto lo = BranchForceProfile::from_sequence(seq, Branch::lower, 0.0, 0.5);
  auto r = phase_shift_general(up, lo, 0.0, 1.0, {}, nat);
  EXPECT_TRUE(r.closed);
  EXPECT_FALSE(r.equal_dwell);
  EXPECT_NEAR(r.energy_term, -(0.0 - 0.5) * 1.0 - (0.5 - 0.0) * 1.5, 1e-15);
  EXPECT_THROW(phase_shift(up, lo, 0.0, 1.0, nat), DomainError);
}

TEST(Profiles, MeanAndDifference) {
  auto seq = InterferometerSequence::canonical(1.0, 0.5, 1.5, 1.0);
  auto up = BranchForceProfile::from_sequence(seq, Branch::upper);
  auto lo = BranchForceProfile::from_sequence(seq, Branch::lower);
  const double f[] = {1, -1, -1, 1};
  const double ts[] = {0.5, 1.5, 2.5, 3.5};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(mean_acceleration(up, lo, ts[i]), 1.0);
    EXPECT_EQ(difference_acceleration(up, lo, ts[i]), f[i] * (0.5 - 1.5));
  }
}
