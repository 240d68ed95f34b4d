#include <gtest/gtest.h>

#include <cmath>

#include "nlc/dynamics/fidelity.hpp"
#include "nlc/dynamics/gate.hpp"
#include "nlc/dynamics/open_system.hpp"

using namespace nlc;

namespace {

std::vector<cplx> column(const Eigen::MatrixXcd& m, int c) {
  std::vector<cplx> v(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) v[i] = m(i, c);
  return v;
}

ToySpec linear_toy(int n_max) {
  ToySpec t;
  t.n_max = n_max;
  return t;
}

}  // namespace

TEST(ToyGate, LinearModeFollowsCoherentResponse) {
  const auto sys = toy_dispersive_system(linear_toy(14));
  const double delta_mhz = 8.0;
  const DriveConfig drive{sys.bare_bus_frequency - delta_mhz * 1e-3, seed_cosine(120.0, 100.0), "bus"};
  const auto g = gate_simulate(sys, drive);
  const cplx expect = linear_alpha(drive.envelope, delta_mhz);
  const cplx got = g.trajectory.alpha(g.trajectory.alpha.rows() - 1, 0);
  EXPECT_GT(std::abs(expect), 0.2);
  EXPECT_NEAR(std::abs(got - expect), 0.0, 1e-3);
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(g.residual_photons[c], std::norm(expect), 2e-3);
  EXPECT_NEAR(g.conditional_phase, 0.0, 1e-6);
  EXPECT_LT(g.norm_drift, 1e-8);
  EXPECT_LT(g.leakage, 1e-12);
}

TEST(ToyGate, ClosedLoopPhaseEqualsEnclosedArea) {
  // Detuning 2/T puts a zero of the raised-cosine spectrum on the mode: the loop closes.
  const auto sys = toy_dispersive_system(linear_toy(16));
  const double delta_ghz = 2.0 / 120.0;
  const DriveConfig drive{sys.bare_bus_frequency - delta_ghz, seed_cosine(120.0, 250.0), "bus"};
  const auto g = gate_simulate(sys, drive);
  EXPECT_LT(g.mean_residual_photons, 1e-6);
  const auto sc = semiclassical_phase(g.trajectory.times, column(g.trajectory.alpha, 0), delta_ghz);
  EXPECT_TRUE(sc.closed);
  EXPECT_GT(std::abs(sc.phase), 0.5);
  EXPECT_NEAR(wrap_phase(g.phases[0] - sc.phase), 0.0, 2e-3);
}

TEST(ToyGate, ConditionalPhaseFromBranchAreas) {
  ToySpec t;
  t.chi_a = -0.004;
  t.chi_b = -0.003;
  t.n_max = 12;
  const auto sys = toy_dispersive_system(t);
  const double fd = t.f_bus - 0.020;
  DispersiveShifts sh;
  sh.quartet = {t.f_bus, t.f_bus + t.chi_b, t.f_bus + t.chi_a, t.f_bus + t.chi_a + t.chi_b};
  const auto env = ise_iterate(seed_cosine(120.0, 1.0), notch_targets(sh, fd)).envelope.scaled(250.0);
  const DriveConfig drive{fd, env, "bus"};
  const auto g = gate_simulate(sys, drive);
  EXPECT_LT(g.mean_residual_photons, 1e-2);
  std::array<double, 4> area{};
  for (int c = 0; c < 4; ++c)
    area[c] = semiclassical_phase(g.trajectory.times, column(g.trajectory.alpha, c), sh.quartet[c] - fd).phase;
  const double expect = wrap_phase(area[0] + area[3] - area[1] - area[2]);
  EXPECT_GT(std::abs(expect), 0.5);
  EXPECT_NEAR(wrap_phase(g.conditional_phase - expect), 0.0, 0.02);
}

TEST(ToyGate, LabAndRotatingFramesAgree) {
  ToySpec t;
  t.chi_a = -0.004;
  t.chi_b = -0.003;
  t.n_max = 8;
  const auto sys = toy_dispersive_system(t);
  const DriveConfig drive{t.f_bus - 0.01, seed_cosine(120.0, 80.0), "bus"};
  GateOptions rot, lab;
  lab.propagation.frame = Frame::Lab;
  const auto a = gate_simulate(sys, drive, rot);
  const auto b = gate_simulate(sys, drive, lab);
  EXPECT_NEAR(wrap_phase(a.conditional_phase - b.conditional_phase), 0.0, 2e-3);
  EXPECT_NEAR(a.mean_residual_photons, b.mean_residual_photons, 2e-3);
}

TEST(ToyGate, SubspaceRestriction) {
  const auto sys = toy_dispersive_system(linear_toy(6));
  EXPECT_EQ(sys.dim(), 28);
  EXPECT_EQ(sys.reachable().size(), 28u);
  const auto sub = sys.restricted({0, 1, 7, 8, 14, 15, 21, 22});
  EXPECT_EQ(sub.dim(), 8);
  EXPECT_EQ(sub.computational[3], 6);
  EXPECT_NEAR(sub.lowering(0, 1), 1.0, 1e-15);
}

TEST(Fidelity, IdealAndVirtualZ) {
  const CMatrix cz = ideal_cz();
  EXPECT_NEAR(average_fidelity_36(cz, false).f_three_body, 1.0, 1e-12);
  const CMatrix twisted = virtual_z(0.3, -0.2) * cz;
  EXPECT_LT(average_fidelity_36(twisted, false).f_three_body, 0.99);
  EXPECT_NEAR(average_fidelity_36(twisted, true).f_three_body, 1.0, 1e-7);
}

TEST(Fidelity, IdentityAgainstCz) {
  // Mean over cardinal product states of |1 - 2 p_a p_b| = 5/9.
  const CMatrix id = CMatrix::Identity(4, 4);
  EXPECT_NEAR(average_fidelity_36(id, false).f_three_body, 5.0 / 9.0, 1e-12);
}

TEST(Fidelity, StateFidelityBasics) {
  CVector a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  const CMatrix mixed = 0.5 * CMatrix::Identity(2, 2);
  EXPECT_NEAR(state_fidelity(pure_density(a), pure_density(a)), 1.0, 1e-12);
  EXPECT_NEAR(state_fidelity(pure_density(a), pure_density(b)), 0.0, 1e-6);
  EXPECT_NEAR(state_fidelity(pure_density(a), mixed), std::sqrt(0.5), 1e-12);
  EXPECT_THROW(state_fidelity(pure_density(a), 2.0 * mixed), std::invalid_argument);
}

TEST(Noise, RateConversions) {
  const auto n = NoiseModel::from_bus_times(23.4, 22.2);
  EXPECT_NEAR(n.bus_gamma1, 1.0 / 23.4, 1e-15);
  EXPECT_NEAR(n.bus_gamma_phi, 1.0 / 22.2 - 1.0 / 46.8, 1e-15);
  EXPECT_THROW(NoiseModel::from_bus_times(10.0, 25.0), std::invalid_argument);
  const auto q = QubitCoherence::from_t2(100.0, 200.0);
  EXPECT_TRUE(std::isinf(q.t_phi));
}

TEST(Noise, QubitDecoherenceError) {
  const auto a = QubitCoherence::from_t2(433.0, 99.0);
  const auto b = QubitCoherence::from_t2(113.0, 39.0);
  const double rates = 1 / 433.0 + (1 / 99.0 - 1 / 866.0) + 1 / 113.0 + (1 / 39.0 - 1 / 226.0);
  EXPECT_NEAR(epsilon_q(120.0, a, b), 0.4 * 0.12 * rates, 1e-12);
  EXPECT_NEAR(epsilon_q(120.0, a, b), 0.0021, 0.0002);
}

TEST(Noise, RelaxationFactorForStaticAmplitudes) {
  // Constant alpha_i: |D_ij| = exp(-G1 T |alpha_i - alpha_j|^2 / 2).
  const int n = 101;
  std::vector<double> t(n);
  Eigen::MatrixXcd alpha(n, 4);
  const std::array<cplx, 4> amp{cplx(0.1, 0), cplx(0.5, 0.2), cplx(-0.3, 0.4), cplx(0, -0.6)};
  for (int k = 0; k < n; ++k) {
    t[k] = 1.2 * k;
    for (int c = 0; c < 4; ++c) alpha(k, c) = amp[c];
  }
  const double g1 = 0.05;
  const auto d = relaxation_dephasing_factor(t, alpha, g1);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      EXPECT_NEAR(std::abs(d(i, j)), std::exp(-g1 * 1e-3 * 120.0 * std::norm(amp[i] - amp[j]) / 2), 1e-12);
}

TEST(Noise, BudgetArithmetic) {
  const auto b = error_budget(0.002, 0.9987, 0.9967, 0.0003);
  EXPECT_NEAR(b.bus_incoherent, 0.002, 1e-12);
  EXPECT_NEAR(b.bus_induced, 0.0033, 1e-12);
  EXPECT_NEAR(b.total, 0.0053, 1e-12);
}

class OpenToy : public ::testing::Test {
 protected:
  DressedSystem sys = [] {
    ToySpec t;
    t.chi_a = -0.004;
    t.chi_b = -0.003;
    t.n_max = 4;
    return toy_dispersive_system(t);
  }();
  DriveConfig drive{5.4 - 0.01, seed_cosine(60.0, 60.0), "bus"};
};

TEST_F(OpenToy, NoiselessTrajectoriesAreUnitary) {
  OpenSystemOptions o;
  o.n_traj = 3;
  const auto r = lindblad_evolve(sys, drive, NoiseModel{}, o);
  const auto g = gate_simulate(sys, drive);
  const auto u = average_fidelity_36(outputs_from_blocks(g.photon_blocks), true);
  EXPECT_NEAR(r.fidelity.f_traced, u.f_traced, 1e-8);
  for (double j : r.jump_fraction) EXPECT_EQ(j, 0.0);
}

TEST_F(OpenToy, TrajectoriesMatchMasterEquation) {
  NoiseModel n;
  n.bus_gamma1 = 4.0;
  n.bus_gamma_phi = 2.0;
  OpenSystemOptions m;
  m.method = OpenMethod::Master;
  const auto rm = lindblad_evolve(sys, drive, n, m);
  EXPECT_LT(rm.trace_error, 1e-9);
  OpenSystemOptions t;
  t.n_traj = 400;
  t.seed = 7;
  const auto rt = lindblad_evolve(sys, drive, n, t);
  EXPECT_NEAR(rt.fidelity.f_traced, rm.fidelity.f_traced, 5e-3);
  double diff = 0;
  for (int s = 0; s < 36; ++s) diff = std::max(diff, (rt.outputs.traced[s] - rm.outputs.traced[s]).cwiseAbs().maxCoeff());
  EXPECT_LT(diff, 0.05);
  EXPECT_LT(rm.fidelity.f_traced, 0.999);
}

TEST_F(OpenToy, SeededTrajectoriesAreReproducible) {
  NoiseModel n;
  n.bus_gamma1 = 4.0;
  OpenSystemOptions o;
  o.n_traj = 20;
  o.seed = 3;
  const auto a = lindblad_evolve(sys, drive, n, o);
  const auto b = lindblad_evolve(sys, drive, n, o);
  EXPECT_EQ(a.fidelity.f_traced, b.fidelity.f_traced);
}
