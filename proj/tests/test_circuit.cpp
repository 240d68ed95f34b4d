#include <gtest/gtest.h>

#include <cmath>

#include "nlc/circuit_model.hpp"

using namespace nlc;

namespace {

const FluxoniumParams kA{3.58, 1.03, 0.54};
const FluxoniumParams kB{3.91, 1.01, 0.52};

// Second-order bus pull for qubit level j with coupling -J N (a^dag - a), J in GHz.
double perturbative_pull(const FluxoniumSpectrum& s, int j, double j_ghz, double f_b) {
  double shift = 0.0;
  for (int k = 0; k < s.energies.size(); ++k) {
    if (k == j) continue;
    const double d = s.energies(j) - s.energies(k);
    const double g2 = std::pow(j_ghz * s.charge(j, k), 2);
    shift += g2 * (1.0 / (d - f_b) + 1.0 / (d + f_b));
  }
  return shift;
}

}  // namespace

TEST(Fluxonium, HarmonicLimit) {
  // E_J -> 0 leaves an oscillator at sqrt(8 E_C E_L).
  const FluxoniumParams p{1e-9, 1.0, 0.5};
  const auto s = fluxonium_spectrum(p, 80, 5);
  for (int n = 1; n < 5; ++n) EXPECT_NEAR(s.energies(n), 2.0 * n, 1e-7);
  EXPECT_NEAR(s.charge_element(0, 1), std::pow(0.5 / 32.0, 0.25), 1e-7);
  EXPECT_NEAR(s.charge_element(0, 2), 0.0, 1e-7);
}

TEST(Fluxonium, ChargeMatrixAntisymmetric) {
  const auto s = fluxonium_spectrum(kA, 120, 6);
  EXPECT_LT((s.charge + s.charge.transpose()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Fluxonium, DeviceTransitions) {
  const auto a = fluxonium_spectrum(kA);
  const auto b = fluxonium_spectrum(kB);
  EXPECT_NEAR(a.f01() * 1e3, 349.0, 0.03 * 349.0);
  EXPECT_NEAR(b.f01() * 1e3, 267.0, 0.03 * 267.0);
  EXPECT_NEAR(a.transition(0, 3), 5.748, 0.01 * 5.748);
  EXPECT_NEAR(b.transition(0, 3), 5.724, 0.01 * 5.724);
}

TEST(Fluxonium, ParityAtSweetSpot) {
  const auto r = charge_parity_check(kA);
  EXPECT_TRUE(r.selection_rule_holds);
  EXPECT_LT(r.n13, 1e-8);
  EXPECT_GT(r.n03, 0.05);
  FluxoniumParams off = kA;
  off.phi_ext = kPi + 0.1;
  EXPECT_THROW(charge_parity_check(off), std::invalid_argument);
}

TEST(Fluxonium, RejectsBadInput) {
  EXPECT_THROW(fluxonium_spectrum({-1.0, 1.0, 0.5}), std::invalid_argument);
  EXPECT_THROW(fluxonium_spectrum(kA, 30), std::invalid_argument);
}

TEST(Fluxonium, ConvergenceGuard) {
  // Tiny E_L spreads the wavefunctions far beyond a 60-state oscillator basis.
  EXPECT_THROW(fluxonium_spectrum({8.0, 0.3, 0.005}, 60, 8), ConvergenceError);
}

TEST(Capacitance, CouplingFormulas) {
  const CapacitanceNetwork net{2.2, 2.2 / 0.11, 2.2 / 0.0037};
  const auto c = couplings_from_capacitance(net);
  const double e = 1.602176634e-19, h = 6.62607015e-34;
  const double unit_mhz = 4.0 * e * e / (h * 1e-15) * 1e-6;
  EXPECT_NEAR(c.j_c, unit_mhz * net.c_c / (net.c_b * net.c_f), 1e-9 * c.j_c);
  EXPECT_NEAR(c.j_ab / c.j_c, net.c_c / net.c_f, 1e-12);
  EXPECT_NEAR(c.j_c, 30.0, 0.15 * 30.0);
  EXPECT_NEAR(c.j_ab, 3.4, 0.15 * 3.4);
  EXPECT_TRUE(net.weak_coupling_ok());
  EXPECT_FALSE((CapacitanceNetwork{2.2, 8.0, 100.0}.weak_coupling_ok()));
}

TEST(Capacitance, BusZeroPointCharge) {
  // n_zpf = sqrt(h f C / 2) / 2e
  const double e = 1.602176634e-19, h = 6.62607015e-34;
  const double expect = std::sqrt(h * 5e9 * 100e-15 / 2.0) / (2.0 * e);
  EXPECT_NEAR(bus_charge_zpf(100.0, 5.0), expect, 1e-12 * expect);
}

TEST(Composite, UncoupledIsAdditive) {
  BusParams bus{5.409, 6, 1.0};
  ChargeCouplings none;
  const auto m = composite_hamiltonian(kA, kB, bus, none, {{4, 4, 6}, 96, 120});
  const auto spec = dressed_spectrum(m);
  const auto d = dispersive_shifts(spec);
  EXPECT_NEAR(d.chi_a, 0.0, 1e-9);
  EXPECT_NEAR(d.chi_b, 0.0, 1e-9);
  EXPECT_NEAR(static_zz(spec), 0.0, 1e-3);
  EXPECT_EQ(spec.unlabeled_count(), 0);
  EXPECT_NEAR(d.quartet[0], 5.409, 1e-12);
}

TEST(Composite, DispersiveShiftMatchesPerturbation) {
  const double j1 = 30.0;  // MHz, weak enough for second order
  BusParams bus{5.409, 8, 1.0};
  ChargeCouplings c;
  c.j1 = j1;
  const auto m = composite_hamiltonian(kA, kB, bus, c, {{8, 2, 8}, 128, 120});
  const auto d = dispersive_shifts(dressed_spectrum(m));
  const auto s = fluxonium_spectrum(kA, 120, 8);
  const double jg = j1 * 1e-3;
  const double chi = 1e3 * (perturbative_pull(s, 1, jg, 5.409) - perturbative_pull(s, 0, jg, 5.409));
  EXPECT_NEAR(d.chi_a, chi, 0.05 * std::abs(chi));
  EXPECT_NEAR(d.chi_b, 0.0, 1e-9);
}

TEST(Composite, DeviceDispersiveShifts) {
  BusParams bus{5.409, 30, 1.0};
  ChargeCouplings c;
  c.j1 = 98.0;
  c.j2 = 94.0;
  const auto spec = dressed_spectrum(composite_hamiltonian(kA, kB, bus, c, {{8, 8, 30}, 800, 120}));
  const auto d = dispersive_shifts(spec);
  EXPECT_NEAR(d.chi_a, 5.4, 0.2 * 5.4);
  EXPECT_NEAR(d.chi_b, 6.9, 0.2 * 6.9);
  EXPECT_LT(std::abs(d.cross_kerr), 0.5);
}

TEST(Composite, StaticZZCancellation) {
  const CapacitanceNetwork net{2.2, 2.2 / 0.11, 2.2 / 0.0037};
  BusParams bus{5.409, 30, bus_charge_zpf(net.c_b, 5.409)};
  ChargeCouplings c;
  c.form = CouplingForm::ChargeCharge;
  c.j_c = 30.0;
  c.j_ab = 3.4;
  const auto r = static_zz_report(kA, kB, bus, c, {{8, 8, 30}, 800, 120});
  EXPECT_LT(std::abs(r.zeta), 50.0);
  EXPECT_GE(r.cancellation_ratio(), 10.0);
  EXPECT_NEAR(r.interference(), r.zeta - r.zeta_bus_only - r.zeta_direct_only, 1e-12);
}

TEST(Composite, RejectsInconsistentOptions) {
  BusParams bus{5.409, 10, 1.0};
  ChargeCouplings c;
  EXPECT_THROW(composite_hamiltonian(kA, kB, bus, c, {{4, 4, 12}, 100, 120}), std::invalid_argument);
  EXPECT_THROW(composite_hamiltonian(kA, kB, bus, c, {{4, 4, 10}, 1000, 120}), std::invalid_argument);
}
