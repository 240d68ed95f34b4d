#include <gtest/gtest.h>

#include <cmath>

#include "nlc/calibration_analysis.hpp"

using namespace nlc::analysis;

TEST(PhotonCal, PoissonInversionRoundTrip) {
  double worst0 = 0.0, worst2 = 0.0;
  for (double a = 0.05; a <= 2.1; a += 0.01) {
    const auto e = alpha_from_p0(poisson_population(a, 0));
    EXPECT_TRUE(e.valid) << a;
    worst0 = std::max(worst0, std::abs(e.alpha - a));
  }
  for (double a = 0.4; a <= 2.8; a += 0.01) {
    const auto e = alpha_from_p2(poisson_population(a, 2), a < std::sqrt(2.0) ? Branch::Low : Branch::High);
    worst2 = std::max(worst2, std::abs(e.alpha - a));
  }
  EXPECT_LT(worst0, 1e-10);
  EXPECT_LT(worst2, 1e-10);
}

TEST(PhotonCal, ValidityWindows) {
  EXPECT_FALSE(alpha_from_p0(poisson_population(2.2, 0)).valid);
  EXPECT_TRUE(alpha_from_p0(poisson_population(2.0, 0)).valid);
  EXPECT_FALSE(alpha_from_p2(poisson_population(2.9, 2), Branch::High).valid);
  EXPECT_FALSE(alpha_from_p2(poisson_population(0.35, 2), Branch::Low).valid);
  EXPECT_TRUE(alpha_from_p2(poisson_population(1.0, 2), Branch::Low).valid);
}

TEST(PhotonCal, SecondFockBranches) {
  const auto r = alpha_from_p2(poisson_population(1.0, 2), Branch::High);
  EXPECT_NEAR(r.alpha_low, 1.0, 1e-10);
  EXPECT_GT(r.alpha_high, std::sqrt(2.0));
  EXPECT_NEAR(poisson_population(r.alpha_high, 2), poisson_population(1.0, 2), 1e-12);
  EXPECT_TRUE(alpha_from_p2(kP2Max * 0.999, Branch::Low).ambiguous);
  EXPECT_THROW(alpha_from_p2(kP2Max * 1.01, Branch::Low), DataError);
}

TEST(PhotonCal, SlopeRecoveredFromSyntheticSweep) {
  std::vector<double> amps;
  for (int i = 1; i <= 40; ++i) amps.push_back(0.01 * i);
  PhotonCalSynth s;
  s.alpha_per_volt = 7.0;
  const auto rec = photon_cal_synthetic(amps, s, 1);
  const double k2 = fock2_scale(rec, 0.2);
  EXPECT_NEAR(k2, s.k2, 1e-9);
  std::vector<double> x, a;
  std::unique_ptr<bool[]> ok(new bool[rec.size()]);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const auto e = alpha_from_p0(fock_population(rec[i], 0));
    x.push_back(rec[i].pump_amplitude);
    a.push_back(e.alpha);
    ok[i] = e.valid;
  }
  const auto fit = fit_alpha_line(x, a, std::span<const bool>(ok.get(), rec.size()));
  EXPECT_NEAR(fit.slope, 7.0, 1e-8);
  EXPECT_GT(fit.points, 20);
  EXPECT_LT(fit.points, 40);
}

TEST(Ramsey, NoiselessFrequencyExact) {
  RamseyTrace tr;
  for (int i = 0; i < 400; ++i) {
    const double t = 10.0 * i;
    tr.times_us.push_back(t);
    tr.signal.push_back(0.5 + 0.5 * std::cos(2 * M_PI * 1e3 * 1e-6 * t));
  }
  const auto f = fit_ramsey(tr);
  EXPECT_NEAR(f.frequency_hz, 1000.0, 1e-6);
  EXPECT_FALSE(f.few_periods);
}

TEST(Ramsey, DecayAndFlags) {
  std::mt19937_64 rng(4);
  RamseySynth c;
  c.noise = 0.005;
  const auto f = fit_ramsey(ramsey_synthetic(c, 0.0, Spectator::G, rng));
  EXPECT_NEAR(f.frequency_hz, 50e3, 5 * f.sigma_frequency_hz);
  EXPECT_NEAR(f.decay_time_us, 72.0, 10.0);
  RamseyTrace short_tr;
  for (int i = 0; i < 50; ++i) {
    short_tr.times_us.push_back(i);
    short_tr.signal.push_back(std::cos(2 * M_PI * 0.02 * i));
  }
  EXPECT_TRUE(fit_ramsey(short_tr).few_periods);
  EXPECT_THROW(fit_ramsey(RamseyTrace{{1, 2}, {0.1, 0.2}}), FitError);
}

TEST(StaticZZ, ConfidenceIntervalCoverage) {
  const auto r = zz_coverage(144.0, 20, RamseySynth{}, 200, 11, 2);
  EXPECT_GE(r.coverage, 0.93);
  EXPECT_NEAR(r.mean_estimate, 144.0, 5.0);
}

TEST(StaticZZ, StudentIntervalByHand) {
  const std::vector<double> g{0, 0, 0, 0}, e{140, 150, 146, 148};
  const auto z = static_zz_estimate(g, e);
  EXPECT_NEAR(z.zeta_hz, 146.0, 1e-12);
  const double sd = std::sqrt((36 + 16 + 0 + 4) / 3.0);
  EXPECT_NEAR(z.stderr_hz, sd / 2.0, 1e-12);
  EXPECT_NEAR(z.ci_high - z.zeta_hz, 3.182446305284263 * sd / 2.0, 1e-9);
  EXPECT_FALSE(static_zz_estimate(std::vector<double>{1}, std::vector<double>{2}).ci_defined);
}

TEST(Benchmarking, RbDecayRecovered) {
  const std::vector<double> m{1, 2, 4, 8, 16, 32, 64, 128, 256};
  const auto y = rb_synthetic(m, 0.75, 0.993, 0.25, 0.0, 1);
  const auto f = fit_rb(m, y);
  EXPECT_NEAR(f.p, 0.993, 1e-9);
  EXPECT_NEAR(f.a, 0.75, 1e-7);
  EXPECT_NEAR(f.error_per_gate, 0.75 * 0.007, 1e-9);
  const auto noisy = fit_rb(m, rb_synthetic(m, 0.75, 0.993, 0.25, 0.002, 3));
  EXPECT_NEAR(noisy.p, 0.993, 3 * noisy.sigma_p);
}

TEST(Benchmarking, QuadraticGeneratorWithinTwoSigma) {
  const std::vector<double> m{1, 2, 3, 4, 5, 6, 8, 10};
  int inside = 0;
  const int trials = 50;
  for (int s = 0; s < trials; ++s) {
    const auto q = fit_quadratic_error(m, quadratic_error_synthetic(m, 0.0052, 0.0011, 0.0005, 100 + s));
    if (std::abs(q.eps1 - 0.0052) <= 2 * q.sigma1 && std::abs(q.eps2 - 0.0011) <= 2 * q.sigma2) ++inside;
  }
  EXPECT_GE(inside, 40);
  const auto exact = fit_quadratic_error(m, quadratic_error_synthetic(m, 0.0052, 0.0011, 0.0, 1));
  EXPECT_NEAR(exact.eps1, 0.0052, 1e-12);
  EXPECT_NEAR(exact.eps2, 0.0011, 1e-12);
  EXPECT_NEAR(exact.eps_at_1, 0.0063, 1e-12);
}

TEST(Readout, ThreeMethodsNearTruth) {
  const auto [d, truth] = readout_synthetic({}, 7);
  const auto b = readout_discriminate(d, Discrimination::Binary);
  const auto h = readout_discriminate(d, Discrimination::Heights);
  EXPECT_NEAR(h.p0_given_g, truth.p0_given_g, 0.005);
  EXPECT_NEAR(h.p1_given_e, truth.p1_given_e, 0.005);
  EXPECT_NEAR(h.p2, truth.p2, 0.003);
  EXPECT_GT(b.fidelity, 0.97);
  ASSERT_TRUE(b.qnd);
  EXPECT_GT(*b.qnd, 0.95);
  EXPECT_FALSE(h.qnd);
}

TEST(Readout, CircularBeatsBinaryOnOverlap) {
  for (double sigma : {0.2, 0.25, 0.3}) {
    ReadoutSynth c;
    c.sigma = {sigma, sigma, sigma};
    const auto [d, truth] = readout_synthetic(c, 8);
    const auto model = fit_blobs(d.points, d.prepared);
    const auto b = readout_discriminate(d, Discrimination::Binary, model);
    const auto r = readout_discriminate(d, Discrimination::Circular, model);
    EXPECT_GE(r.fidelity, b.fidelity) << sigma;
    EXPECT_GT(r.discarded_fraction, 0.0);
  }
}

TEST(Readout, RejectsDegenerateData) {
  SingleShotDataset d;
  d.points = {{0, 0}, {0, 0}, {0, 0}};
  d.prepared = {0, 1, 0};
  EXPECT_THROW(readout_discriminate(d, Discrimination::Binary), std::exception);
}

TEST(Mist, OnsetAndFlag) {
  std::vector<double> n, p;
  for (int i = 0; i <= 30; ++i) {
    n.push_back(0.5 * i);
    p.push_back(i < 20 ? 0.004 : 0.004 + 0.013 * (i - 19));
  }
  const auto r = mist_curve(n, p);
  EXPECT_TRUE(r.monotone_nondecreasing);
  ASSERT_TRUE(r.onset_photons);
  EXPECT_NEAR(*r.onset_photons, 10.5, 1e-12);
  EXPECT_TRUE(r.flagged);
  EXPECT_NEAR(r.population_at_operating, 0.017 + 0.8 * 0.013, 1e-12);
  const std::vector<double> flat(31, 0.01);
  EXPECT_FALSE(mist_curve(n, flat).onset_photons);
  EXPECT_THROW(mist_curve(std::vector<double>{1, 1}, std::vector<double>{0, 0}), DataError);
}
