// Fits for bus photon calibration, Ramsey/ZZ,
// randomized benchmarking, readout blob discrimination and MIST curves, plus
// seeded synthetic data generators for each.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/roots.hpp>

#include "nlc/nelder_mead.hpp"

namespace nlc::analysis {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double poisson_population(double alpha, int n) {
  const double x = alpha * alpha;
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-x + n * std::log(x) - std::lgamma(n + 1.0));
}

// ---------------------------------------------------------------- photon calibration

struct PhotonCalRecord {
  double pump_amplitude{};
  double peak_height_n0{};
  double peak_height_n2{};
  double reference_height{};  // Fock-0 height at zero pump
};

inline constexpr double kP0AlphaLimit = 2.1;
inline constexpr double kP2AlphaHigh = 2.8;
inline constexpr double kP2AlphaLow = 0.4;
inline constexpr double kPopulationFloor = 0.01;

struct AlphaEstimate {
  double alpha{};
  bool valid{};
};

inline AlphaEstimate alpha_from_p0(double p0, double tol = 1e-9) {
  if (!(p0 > 0.0)) throw DataError("Fock-0 population must be positive");
  if (p0 > 1.0 + tol) throw DataError("Fock-0 population above one");
  const double a = std::sqrt(std::max(0.0, -std::log(std::min(p0, 1.0))));
  return {a, p0 >= kPopulationFloor && a <= kP0AlphaLimit};
}

inline constexpr double kP2Max = 2.0 / (M_E * M_E);  // x^2 e^-x / 2 at x = 2

enum class Branch { Low, High };

struct P2Inversion {
  double alpha{};        // on the requested branch
  double alpha_low{};
  double alpha_high{};
  bool valid{};
  bool ambiguous{};      // both roots within 5% of each other in |alpha|
};

inline P2Inversion alpha_from_p2(double p2, Branch hint, double tol = 1e-12) {
  if (!(p2 > 0.0)) throw DataError("Fock-2 population must be positive");
  if (p2 > kP2Max * (1.0 + 1e-9)) throw DataError("Fock-2 population above the coherent-state maximum");
  p2 = std::min(p2, kP2Max);
  auto f = [p2](double x) { return 0.5 * x * x * std::exp(-x) - p2; };
  boost::math::tools::eps_tolerance<double> eps(50);
  auto root = [&](double lo, double hi) {
    if (f(lo) * f(hi) > 0) return 2.0;  // p2 at the maximum
    std::uintmax_t it = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, eps, it);
    return 0.5 * (r.first + r.second);
  };
  double hi = 4.0;
  while (f(hi) > 0) hi *= 2.0;
  P2Inversion out;
  out.alpha_low = std::sqrt(root(0.0, 2.0));
  out.alpha_high = std::sqrt(root(2.0, hi));
  out.alpha = hint == Branch::Low ? out.alpha_low : out.alpha_high;
  out.valid = out.alpha >= kP2AlphaLow && out.alpha <= kP2AlphaHigh;
  out.ambiguous = (out.alpha_high - out.alpha_low) < 0.05 * out.alpha_high + tol;
  return out;
}

// Fock-2 heights are scaled by k2 = height_n2 / P2(alpha_0), with alpha_0
// taken from the Fock-0 population of the record closest to the anchor.
inline double fock2_scale(std::span<const PhotonCalRecord> records, double anchor_amplitude) {
  if (records.empty()) throw DataError("no photon calibration records");
  const auto it = std::min_element(records.begin(), records.end(), [&](const auto& a, const auto& b) {
    return std::abs(a.pump_amplitude - anchor_amplitude) < std::abs(b.pump_amplitude - anchor_amplitude);
  });
  const double a0 = alpha_from_p0(it->peak_height_n0 / it->reference_height).alpha;
  const double p2 = poisson_population(a0, 2);
  if (p2 <= 0.0) throw DataError("anchor record has no Fock-2 population");
  return it->peak_height_n2 / p2;
}

inline double fock_population(const PhotonCalRecord& r, int n, double k2 = 1.0, double tol = 1e-6) {
  if (!(r.reference_height > 0.0)) throw DataError("reference height must be positive");
  if (r.peak_height_n0 < 0.0 || r.peak_height_n2 < 0.0) throw DataError("negative peak height");
  double p = 0.0;
  if (n == 0) p = r.peak_height_n0 / r.reference_height;
  else if (n == 2) p = r.peak_height_n2 / k2;
  else throw std::invalid_argument("only Fock 0 and 2 are calibrated");
  if (p > 1.0 + tol) throw DataError("population above one");
  return p;
}

struct LineFit {
  double slope{};
  double stderr_slope{};
  int points{};
};

// Least squares through the origin over the valid points.
inline LineFit fit_alpha_line(std::span<const double> amplitudes, std::span<const double> alphas,
                              std::span<const bool> valid) {
  if (amplitudes.size() != alphas.size() || alphas.size() != valid.size())
    throw std::invalid_argument("fit_alpha_line: length mismatch");
  double sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < alphas.size(); ++i)
    if (valid[i]) {
      sxx += amplitudes[i] * amplitudes[i];
      sxy += amplitudes[i] * alphas[i];
      ++n;
    }
  if (n < 3 || sxx <= 0) throw FitError("need at least 3 valid points");
  LineFit r{sxy / sxx, 0.0, n};
  double ssr = 0;
  for (std::size_t i = 0; i < alphas.size(); ++i)
    if (valid[i]) ssr += std::pow(alphas[i] - r.slope * amplitudes[i], 2);
  r.stderr_slope = std::sqrt(ssr / (n - 1) / sxx);
  return r;
}

struct PhotonCalSynth {
  double alpha_per_volt{9.0};
  double reference_height{1.0};
  double k2{0.8};
  double noise{0.0};
  double floor{0.0};  // additive background; drives saturation at large pump
};

inline std::vector<PhotonCalRecord> photon_cal_synthetic(std::span<const double> amplitudes, const PhotonCalSynth& c,
                                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, c.noise);
  std::vector<PhotonCalRecord> out;
  for (double v : amplitudes) {
    const double a = c.alpha_per_volt * v;
    PhotonCalRecord r;
    r.pump_amplitude = v;
    r.reference_height = c.reference_height;
    r.peak_height_n0 = std::max(0.0, c.reference_height * (poisson_population(a, 0) + c.floor) + gauss(rng));
    r.peak_height_n2 = std::max(0.0, c.k2 * (poisson_population(a, 2) + c.floor) + gauss(rng));
    r.peak_height_n0 = std::min(r.peak_height_n0, c.reference_height);
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------- Ramsey / static ZZ

enum class Spectator { G, E };

struct RamseyTrace {
  std::vector<double> times_us;
  std::vector<double> signal;
  Spectator spectator{Spectator::G};
};

struct RamseyFit {
  double frequency_hz{};
  double sigma_frequency_hz{};
  double decay_time_us{};  // infinity when no decay is resolved
  double amplitude{};
  double phase{};
  double offset{};
  double periods_covered{};
  bool few_periods{};  // fewer than 3 oscillations in the window
};

namespace detail {
struct RamseyLinear {
  Eigen::Vector3d coef;  // a cos + b sin + c
  double ssr;
};

inline RamseyLinear ramsey_linear(std::span<const double> t, std::span<const double> y, double f_hz, double gamma) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = std::exp(-gamma * t[i]);
    const double w = 2.0 * M_PI * f_hz * 1e-6 * t[i];
    a(i, 0) = e * std::cos(w);
    a(i, 1) = e * std::sin(w);
    a(i, 2) = 1.0;
    b(i) = y[i];
  }
  const Eigen::Vector3d x = a.colPivHouseholderQr().solve(b);
  return {x, (a * x - b).squaredNorm()};
}
}  // namespace detail

// y = exp(-g t) (a cos 2pi f t + b sin 2pi f t) + c; (f, g) by a periodogram
// scan then simplex on the projected residual, then Gauss-Newton on all five.
inline RamseyFit fit_ramsey(const RamseyTrace& tr) {
  const auto& t = tr.times_us;
  const auto& y = tr.signal;
  const auto n = t.size();
  if (n != y.size()) throw DataError("Ramsey trace length mismatch");
  if (n < 8) throw FitError("Ramsey trace too short");
  for (std::size_t i = 1; i < n; ++i)
    if (!(t[i] > t[i - 1])) throw DataError("Ramsey times must be increasing");
  const double span = t.back() - t.front();
  double dt_min = span;
  for (std::size_t i = 1; i < n; ++i) dt_min = std::min(dt_min, t[i] - t[i - 1]);
  const double nyquist = 0.5e6 / dt_min;
  const double df = 0.25e6 / span;
  const double g0 = 1.0 / span;

  double best_f = 0, best_ssr = std::numeric_limits<double>::infinity();
  for (double f = df; f < nyquist; f += df) {
    const double s = detail::ramsey_linear(t, y, f, g0).ssr;
    if (s < best_ssr) {
      best_ssr = s;
      best_f = f;
    }
  }
  auto loss = [&](const Eigen::VectorXd& x) {
    if (x(1) < 0) return std::numeric_limits<double>::infinity();
    return detail::ramsey_linear(t, y, x(0), x(1)).ssr;
  };
  const auto nm = nelder_mead(loss, Eigen::Vector2d(best_f, g0), Eigen::Vector2d(df / 2, g0 / 2),
                              {.max_evaluations = 2000, .f_tolerance = 1e-16, .x_tolerance = 1e-12});
  if (!std::isfinite(nm.value)) throw FitError("Ramsey fit did not converge");

  Eigen::VectorXd p(5);
  const auto lin = detail::ramsey_linear(t, y, nm.x(0), nm.x(1));
  p << lin.coef(0), lin.coef(1), lin.coef(2), nm.x(0), nm.x(1);
  auto model = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    r.resize(n);
    jac.resize(n, 5);
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(-q(4) * t[i]);
      const double k = 2.0 * M_PI * 1e-6 * t[i];
      const double c = std::cos(k * q(3)), s = std::sin(k * q(3));
      const double osc = q(0) * c + q(1) * s;
      r(i) = e * osc + q(2) - y[i];
      jac(i, 0) = e * c;
      jac(i, 1) = e * s;
      jac(i, 2) = 1.0;
      jac(i, 3) = e * k * (-q(0) * s + q(1) * c);
      jac(i, 4) = -t[i] * e * osc;
    }
  };
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  model(p, r, jac);
  for (int it = 0; it < 20; ++it) {
    const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-r);
    Eigen::VectorXd q = p + step;
    q(4) = std::max(q(4), 0.0);
    Eigen::VectorXd rq;
    Eigen::MatrixXd jq;
    model(q, rq, jq);
    if (!(rq.squaredNorm() <= r.squaredNorm())) break;
    const bool done = step.cwiseAbs().maxCoeff() < 1e-14 * (1.0 + p.cwiseAbs().maxCoeff());
    p = q;
    r = rq;
    jac = jq;
    if (done) break;
  }

  RamseyFit f;
  f.frequency_hz = p(3);
  f.decay_time_us = p(4) > 0 ? 1.0 / p(4) : std::numeric_limits<double>::infinity();
  f.amplitude = std::hypot(p(0), p(1));
  f.phase = std::atan2(-p(1), p(0));
  f.offset = p(2);
  const double dof = static_cast<double>(n) - 5.0;
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  if (lu.isInvertible()) {
    const Eigen::MatrixXd cov = (r.squaredNorm() / dof) * lu.inverse();
    f.sigma_frequency_hz = std::sqrt(std::max(0.0, cov(3, 3)));
  }
  f.periods_covered = f.frequency_hz * span * 1e-6;
  f.few_periods = f.periods_covered < 3.0;
  return f;
}

struct ZZEstimate {
  double zeta_hz{};
  double stderr_hz{};
  double ci_low{};
  double ci_high{};
  int repeats{};
  bool ci_defined{};
};

// Mean of paired differences (e minus g) with a two-sided t interval.
inline ZZEstimate static_zz_estimate(std::span<const double> freq_g, std::span<const double> freq_e,
                                     double confidence = 0.95) {
  if (freq_g.size() != freq_e.size()) throw DataError("mismatched Ramsey pairs");
  if (freq_g.empty()) throw DataError("no Ramsey pairs");
  const int n = static_cast<int>(freq_g.size());
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = freq_e[i] - freq_g[i];
  ZZEstimate z;
  z.repeats = n;
  z.zeta_hz = std::accumulate(d.begin(), d.end(), 0.0) / n;
  if (n < 2) {
    z.ci_low = z.ci_high = z.zeta_hz;
    return z;
  }
  double ss = 0;
  for (double v : d) ss += (v - z.zeta_hz) * (v - z.zeta_hz);
  z.stderr_hz = std::sqrt(ss / (n - 1) / n);
  const boost::math::students_t dist(n - 1);
  const double q = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence)));
  z.ci_low = z.zeta_hz - q * z.stderr_hz;
  z.ci_high = z.zeta_hz + q * z.stderr_hz;
  z.ci_defined = true;
  return z;
}

struct RamseySynth {
  double detuning_hz{50e3};
  double t2_us{72.0};
  double amplitude{0.5};
  double offset{0.5};
  double noise{0.02};
  double t_max_us{150.0};
  int points{151};
};

inline RamseyTrace ramsey_synthetic(const RamseySynth& c, double extra_hz, Spectator s, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, c.noise);
  RamseyTrace tr;
  tr.spectator = s;
  for (int i = 0; i < c.points; ++i) {
    const double t = c.t_max_us * i / (c.points - 1);
    tr.times_us.push_back(t);
    tr.signal.push_back(c.offset + c.amplitude * std::exp(-t / c.t2_us) *
                                       std::cos(2.0 * M_PI * (c.detuning_hz + extra_hz) * 1e-6 * t) +
                        gauss(rng));
  }
  return tr;
}

// One ZZ experiment: `repeats` pairs of Ramsey traces fitted independently.
inline ZZEstimate zz_experiment(double zeta_hz, int repeats, const RamseySynth& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> fg, fe;
  for (int k = 0; k < repeats; ++k) {
    fg.push_back(fit_ramsey(ramsey_synthetic(c, 0.0, Spectator::G, rng)).frequency_hz);
    fe.push_back(fit_ramsey(ramsey_synthetic(c, zeta_hz, Spectator::E, rng)).frequency_hz);
  }
  return static_zz_estimate(fg, fe);
}

struct CoverageReport {
  double coverage{};
  double mean_estimate{};
  double mean_halfwidth{};
  int experiments{};
};

inline CoverageReport zz_coverage(double zeta_hz, int repeats, const RamseySynth& c, int experiments,
                                  std::uint64_t seed, int threads = 1) {
  std::vector<ZZEstimate> est(experiments);
  threads = std::max(1, std::min(threads, experiments));
  {
    std::vector<std::jthread> pool;
    auto work = [&](int w) {
      for (int e = w; e < experiments; e += threads) est[e] = zz_experiment(zeta_hz, repeats, c, seed + 7919ULL * e);
    };
    for (int w = 1; w < threads; ++w) pool.emplace_back(work, w);
    work(0);
  }
  CoverageReport r;
  r.experiments = experiments;
  int hit = 0;
  for (const auto& z : est) {
    hit += (z.ci_low <= zeta_hz && zeta_hz <= z.ci_high) ? 1 : 0;
    r.mean_estimate += z.zeta_hz / experiments;
    r.mean_halfwidth += 0.5 * (z.ci_high - z.ci_low) / experiments;
  }
  r.coverage = static_cast<double>(hit) / experiments;
  return r;
}

// ---------------------------------------------------------------- randomized benchmarking

struct RBFit {
  double a{}, p{}, b{};
  double sigma_p{};
  double error_per_gate{};  // r = (1 - p)(d - 1)/d, d = 4
  double sigma_error{};
  double fidelity() const { return 1.0 - error_per_gate; }
};

inline constexpr int kTwoQubitDim = 4;

// F(m) = A p^m + B. p by a bounded 1-D search with (A, B) solved linearly.
inline RBFit fit_rb(std::span<const double> lengths, std::span<const double> fidelities) {
  const auto n = lengths.size();
  if (n != fidelities.size()) throw DataError("RB length mismatch");
  if (n < 4) throw FitError("need at least 4 sequence lengths");
  for (std::size_t i = 1; i < n; ++i)
    if (!(lengths[i] > lengths[i - 1])) throw DataError("RB lengths must be strictly increasing");
  const auto [mn, mx] = std::minmax_element(fidelities.begin(), fidelities.end());
  constexpr double d = kTwoQubitDim;
  if (*mx - *mn < 1e-14) return {0.0, 1.0, *mn, 0.0, 0.0, 0.0};

  auto solve = [&](double p) {
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
      a(i, 0) = std::pow(p, lengths[i]);
      a(i, 1) = 1.0;
      y(i) = fidelities[i];
    }
    const Eigen::Vector2d x = a.colPivHouseholderQr().solve(y);
    return std::pair{x, (a * x - y).squaredNorm()};
  };
  // coarse scan in log(1 - p), then golden refinement
  double best_u = -1, best = std::numeric_limits<double>::infinity();
  for (double u = -12.0; u <= 0.0; u += 0.01) {
    const double s = solve(1.0 - std::pow(10.0, u)).second;
    if (s < best) {
      best = s;
      best_u = u;
    }
  }
  double lo = best_u - 0.01, hi = std::min(0.0, best_u + 0.01);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double u1 = hi - g * (hi - lo), u2 = lo + g * (hi - lo);
    if (solve(1.0 - std::pow(10.0, u1)).second < solve(1.0 - std::pow(10.0, u2)).second) hi = u2;
    else lo = u1;
  }
  const double p = 1.0 - std::pow(10.0, 0.5 * (lo + hi));
  if (!(p > 0.0 && p < 1.0)) throw FitError("RB decay parameter outside (0, 1)");
  const auto [x, ssr] = solve(p);

  RBFit r{x(0), p, x(1)};
  r.error_per_gate = (1.0 - p) * (d - 1.0) / d;
  if (n > 3) {
    Eigen::MatrixXd j(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
      j(i, 0) = std::pow(p, lengths[i]);
      j(i, 1) = 1.0;
      j(i, 2) = x(0) * lengths[i] * std::pow(p, lengths[i] - 1.0);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(j.transpose() * j);
    if (lu.isInvertible()) {
      const Eigen::MatrixXd cov = (ssr / (static_cast<double>(n) - 3.0)) * lu.inverse();
      r.sigma_p = std::sqrt(std::max(0.0, cov(2, 2)));
      r.sigma_error = r.sigma_p * (d - 1.0) / d;
    }
  }
  return r;
}

struct QuadraticErrorFit {
  double eps1{}, eps2{};
  double sigma1{}, sigma2{};
  double eps_at_1{}, sigma_at_1{};
};

// eps(m) = eps1 m + eps2 m^2, least squares through the origin.
inline QuadraticErrorFit fit_quadratic_error(std::span<const double> m, std::span<const double> eps) {
  const auto n = m.size();
  if (n != eps.size()) throw DataError("quadratic fit length mismatch");
  if (n < 3) throw FitError("need at least 3 gate counts");
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, 0) = m[i];
    a(i, 1) = m[i] * m[i];
    y(i) = eps[i];
  }
  const auto qr = a.colPivHouseholderQr();
  if (qr.rank() < 2) throw FitError("quadratic design is rank deficient");
  const Eigen::Vector2d x = qr.solve(y);
  QuadraticErrorFit f;
  f.eps1 = x(0);
  f.eps2 = x(1);
  f.eps_at_1 = x(0) + x(1);
  const double ssr = (a * x - y).squaredNorm();
  const Eigen::Matrix2d cov = (ssr / (static_cast<double>(n) - 2.0)) * (a.transpose() * a).inverse();
  f.sigma1 = std::sqrt(cov(0, 0));
  f.sigma2 = std::sqrt(cov(1, 1));
  f.sigma_at_1 = std::sqrt(std::max(0.0, cov(0, 0) + cov(1, 1) + 2 * cov(0, 1)));
  return f;
}

inline std::vector<double> rb_synthetic(std::span<const double> lengths, double a, double p, double b, double noise,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise);
  std::vector<double> out;
  for (double m : lengths) out.push_back(a * std::pow(p, m) + b + (noise > 0 ? gauss(rng) : 0.0));
  return out;
}

inline std::vector<double> quadratic_error_synthetic(std::span<const double> m, double eps1, double eps2,
                                                     double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise);
  std::vector<double> out;
  for (double k : m) out.push_back(eps1 * k + eps2 * k * k + (noise > 0 ? gauss(rng) : 0.0));
  return out;
}

// ---------------------------------------------------------------- readout

using IQ = Eigen::Vector2d;

struct SingleShotDataset {
  std::vector<IQ> points;                   // first readout
  std::vector<int> prepared;                // 0 = g, 1 = e
  std::optional<std::vector<IQ>> second;    // repeated readout, same order
};

struct BlobModel {
  std::array<IQ, 3> mean;
  std::array<Eigen::Matrix2d, 3> cov;
  std::array<double, 3> weight{};
  double sigma(int k) const { return std::sqrt(0.5 * cov[k].trace()); }
};

namespace detail {
inline IQ median_point(const std::vector<IQ>& pts) {
  if (pts.empty()) throw DataError("no points for a blob");
  auto coord = [&](int c) {
    std::vector<double> v;
    for (const auto& p : pts) v.push_back(p(c));
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  return {coord(0), coord(1)};
}

inline double gauss_pdf(const IQ& x, const IQ& m, const Eigen::Matrix2d& c) {
  const double det = c.determinant();
  const IQ d = x - m;
  return std::exp(-0.5 * d.dot(c.inverse() * d)) / (2.0 * M_PI * std::sqrt(det));
}

inline void check_points(const std::vector<IQ>& pts) {
  for (const auto& p : pts)
    if (!p.allFinite()) throw DataError("non-finite IQ point");
}
}  // namespace detail

// EM for a 3-component full-covariance mixture. Components 0 and 1 start at the
// medians of the g- and e-prepared shots; component 2 starts at the median of
// the 1% of shots farthest from both.
inline BlobModel fit_blobs(const std::vector<IQ>& pts, const std::vector<int>& prepared, int max_iter = 500,
                           double tol = 1e-10) {
  detail::check_points(pts);
  if (pts.size() != prepared.size()) throw DataError("tag count mismatch");
  std::vector<IQ> g, e;
  for (std::size_t i = 0; i < pts.size(); ++i) (prepared[i] == 0 ? g : e).push_back(pts[i]);
  BlobModel m;
  m.mean[0] = detail::median_point(g);
  m.mean[1] = detail::median_point(e);
  const double sep = (m.mean[1] - m.mean[0]).norm();
  if (sep <= 0) throw FitError("g and e medians coincide");
  std::vector<std::pair<double, std::size_t>> far;
  for (std::size_t i = 0; i < pts.size(); ++i)
    far.emplace_back(std::min((pts[i] - m.mean[0]).norm(), (pts[i] - m.mean[1]).norm()), i);
  std::sort(far.rbegin(), far.rend());
  std::vector<IQ> tail;
  for (std::size_t k = 0; k < std::max<std::size_t>(3, pts.size() / 100); ++k) tail.push_back(pts[far[k].second]);
  m.mean[2] = detail::median_point(tail);
  const double s0 = 0.25 * sep;
  for (int k = 0; k < 3; ++k) m.cov[k] = Eigen::Matrix2d::Identity() * s0 * s0;
  m.weight = {0.49, 0.49, 0.02};

  const std::size_t n = pts.size();
  Eigen::MatrixXd resp(n, 3);
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    double ll = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double tot = 0;
      for (int k = 0; k < 3; ++k) tot += resp(i, k) = m.weight[k] * detail::gauss_pdf(pts[i], m.mean[k], m.cov[k]);
      tot = std::max(tot, 1e-300);
      resp.row(i) /= tot;
      ll += std::log(tot);
    }
    for (int k = 0; k < 3; ++k) {
      const double nk = resp.col(k).sum();
      if (nk < 1e-9 * n) throw FitError("mixture component collapsed");
      IQ mu = IQ::Zero();
      for (std::size_t i = 0; i < n; ++i) mu += resp(i, k) * pts[i];
      mu /= nk;
      Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
      for (std::size_t i = 0; i < n; ++i) c += resp(i, k) * (pts[i] - mu) * (pts[i] - mu).transpose();
      c /= nk;
      c += Eigen::Matrix2d::Identity() * 1e-12 * sep * sep;
      m.mean[k] = mu;
      m.cov[k] = c;
      m.weight[k] = nk / n;
    }
    if (std::abs(ll - prev) < tol * std::abs(ll)) break;
    prev = ll;
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if ((m.mean[a] - m.mean[b]).norm() < 0.5 * std::min(m.sigma(a), m.sigma(b)))
        throw FitError("mixture components merged");
  return m;
}

// Component weights for a subset with the blob shapes held fixed.
inline std::array<double, 3> blob_weights(const BlobModel& m, const std::vector<IQ>& pts, int iters = 500) {
  std::array<double, 3> w{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::vector<std::array<double, 3>> pdf(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int k = 0; k < 3; ++k) pdf[i][k] = detail::gauss_pdf(pts[i], m.mean[k], m.cov[k]);
  for (int it = 0; it < iters; ++it) {
    std::array<double, 3> acc{};
    for (const auto& p : pdf) {
      const double tot = std::max(w[0] * p[0] + w[1] * p[1] + w[2] * p[2], 1e-300);
      for (int k = 0; k < 3; ++k) acc[k] += w[k] * p[k] / tot;
    }
    double change = 0;
    for (int k = 0; k < 3; ++k) {
      const double nw = acc[k] / pts.size();
      change = std::max(change, std::abs(nw - w[k]));
      w[k] = nw;
    }
    if (change < 1e-12) break;
  }
  return w;
}

enum class Discrimination { Binary, Circular, Heights };

struct ReadoutResult {
  double p0_given_g{};
  double p1_given_e{};
  double p2{};                    // mean |2> share over both preparations
  double fidelity{};
  std::optional<double> qnd;
  double discarded_fraction{};
};

inline constexpr double kCircleRadiusSigmas = 2.0;

inline ReadoutResult readout_discriminate(const SingleShotDataset& data, Discrimination method,
                                          std::optional<BlobModel> model = std::nullopt) {
  const BlobModel m = model ? *model : fit_blobs(data.points, data.prepared);
  const IQ mid = 0.5 * (m.mean[0] + m.mean[1]);
  const IQ axis = (m.mean[1] - m.mean[0]).normalized();
  // -1 means discarded
  auto assign = [&](const IQ& x) -> int {
    if (method == Discrimination::Binary) return (x - mid).dot(axis) < 0 ? 0 : 1;
    int best = -1;
    double best_r = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      const double r = (x - m.mean[k]).norm() / m.sigma(k);
      if (r <= kCircleRadiusSigmas && r < best_r) {
        best = k;
        best_r = r;
      }
    }
    return best;
  };

  ReadoutResult r;
  if (method == Discrimination::Heights) {
    std::vector<IQ> g, e;
    for (std::size_t i = 0; i < data.points.size(); ++i) (data.prepared[i] == 0 ? g : e).push_back(data.points[i]);
    const auto wg = blob_weights(m, g), we = blob_weights(m, e);
    r.p0_given_g = wg[0];
    r.p1_given_e = we[1];
    r.p2 = 0.5 * (wg[2] + we[2]);
    r.fidelity = 0.5 * (r.p0_given_g + r.p1_given_e);
    return r;
  }

  std::array<std::array<double, 3>, 2> count{};
  std::size_t discarded = 0;
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const int k = assign(data.points[i]);
    if (k < 0 || (method == Discrimination::Circular && k == 2)) {
      ++discarded;
      if (k == 2) count[data.prepared[i]][2] += 1;
      continue;
    }
    count[data.prepared[i]][k] += 1;
  }
  const auto& cg = count[0];
  const auto& ce = count[1];
  r.p0_given_g = cg[0] / std::max(1.0, cg[0] + cg[1]);
  r.p1_given_e = ce[1] / std::max(1.0, ce[0] + ce[1]);
  r.p2 = 0.5 * (cg[2] / std::max(1.0, cg[0] + cg[1] + cg[2]) + ce[2] / std::max(1.0, ce[0] + ce[1] + ce[2]));
  r.fidelity = 0.5 * (r.p0_given_g + r.p1_given_e);
  r.discarded_fraction = static_cast<double>(discarded) / static_cast<double>(data.points.size());

  if (data.second) {
    if (data.second->size() != data.points.size()) throw DataError("second readout length mismatch");
    std::array<std::array<double, 2>, 2> rep{};
    for (std::size_t i = 0; i < data.points.size(); ++i) {
      const int a = assign(data.points[i]), b = assign((*data.second)[i]);
      if (a < 0 || b < 0 || a > 1 || b > 1) continue;
      rep[a][b] += 1;
    }
    const double q0 = rep[0][0] / std::max(1.0, rep[0][0] + rep[0][1]);
    const double q1 = rep[1][1] / std::max(1.0, rep[1][0] + rep[1][1]);
    r.qnd = 0.5 * (q0 + q1);
  }
  return r;
}

struct ReadoutSynth {
  std::array<IQ, 3> mean{IQ(0.0, 0.0), IQ(0.0, 1.0), IQ(0.8, 1.4)};
  std::array<double, 3> sigma{0.2, 0.2, 0.2};
  int shots_per_state{20000};
  double p_excited_given_g{0.01};   // initialization error
  double p_ground_given_e{0.015};   // decay before readout
  double p_leak{0.004};             // |2> share in either preparation
  double p_flip_second{0.01};       // state change between repeated readouts
};

struct ReadoutTruth {
  double p0_given_g{};
  double p1_given_e{};
  double p2{};
};

inline std::pair<SingleShotDataset, ReadoutTruth> readout_synthetic(const ReadoutSynth& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SingleShotDataset d;
  d.second.emplace();
  auto draw = [&](int k) { return IQ(c.mean[k](0) + c.sigma[k] * gauss(rng), c.mean[k](1) + c.sigma[k] * gauss(rng)); };
  for (int prep = 0; prep < 2; ++prep)
    for (int s = 0; s < c.shots_per_state; ++s) {
      const double x = u(rng);
      int state;
      if (x < c.p_leak) state = 2;
      else if (prep == 0) state = x < c.p_leak + c.p_excited_given_g ? 1 : 0;
      else state = x < c.p_leak + c.p_ground_given_e ? 0 : 1;
      d.points.push_back(draw(state));
      d.prepared.push_back(prep);
      int after = state;
      if (state < 2 && u(rng) < c.p_flip_second) after = 1 - state;
      d.second->push_back(draw(after));
    }
  ReadoutTruth t{1.0 - c.p_leak - c.p_excited_given_g, 1.0 - c.p_leak - c.p_ground_given_e, c.p_leak};
  return {std::move(d), t};
}

// ---------------------------------------------------------------- MIST

inline constexpr double kReadoutPhotons = 10.4;

struct MistReport {
  double baseline{};
  double max_rise{};
  bool monotone_nondecreasing{};
  bool flagged{};
  std::optional<double> onset_photons;  // first n where the rise exceeds the threshold
  double operating_photons{kReadoutPhotons};
  double population_at_operating{};
  double rise_at_operating{};
};

inline MistReport mist_curve(std::span<const double> photons, std::span<const double> population,
                             double threshold = 0.02, double operating = kReadoutPhotons) {
  if (photons.size() != population.size() || photons.size() < 2) throw DataError("MIST table needs >= 2 rows");
  for (std::size_t i = 1; i < photons.size(); ++i)
    if (!(photons[i] > photons[i - 1])) throw DataError("photon numbers must be increasing");
  MistReport r;
  r.operating_photons = operating;
  r.baseline = population[0];
  r.monotone_nondecreasing = true;
  for (std::size_t i = 0; i < photons.size(); ++i) {
    const double rise = population[i] - r.baseline;
    r.max_rise = std::max(r.max_rise, rise);
    if (i > 0 && population[i] < population[i - 1]) r.monotone_nondecreasing = false;
    if (!r.onset_photons && rise > threshold) r.onset_photons = photons[i];
  }
  r.flagged = r.onset_photons.has_value();
  const auto it = std::lower_bound(photons.begin(), photons.end(), operating);
  if (it == photons.begin()) r.population_at_operating = population.front();
  else if (it == photons.end()) r.population_at_operating = population.back();
  else {
    const auto k = static_cast<std::size_t>(it - photons.begin());
    const double w = (operating - photons[k - 1]) / (photons[k] - photons[k - 1]);
    r.population_at_operating = (1 - w) * population[k - 1] + w * population[k];
  }
  r.rise_at_operating = r.population_at_operating - r.baseline;
  return r;
}

}  // namespace nlc::analysis
