// Complex drive envelopes, linear coherent response and
// iterative spectrum engineering (ISE).
//
// Transform convention (used everywhere in this library):
//   F(f) = dt * sum_k s_k exp(-i 2 pi f t_k),   t_k = k dt,  f in MHz, t in ns.
// Samples s_k are rad/us, so F carries units of rad/us * ns.
//
// Drive convention: the lab-frame drive on the bus quadrature is
//   Re[ Omega(t) exp(+i 2 pi f_d t) ] (a + a^dag)
// (I cos - Q sin up-conversion). In the frame of the drive this gives the
// rotating-wave term (Omega^* a^dag + Omega a)/2 and, for a linear mode with
// detuning Delta = omega_bus - omega_d,
//   alpha(T) = -(i/2) exp(-i Delta T) conj( F(Delta / 2 pi) ),
// so |alpha(T)| = |F(Delta)|/2 and spectral zeros at the detunings return the
// mode to vacuum.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "nlc/circuit_model.hpp"
#include "nlc/units.hpp"

namespace nlc {

struct PulseEnvelope {
  std::vector<cplx> samples;  // rad/us at t_k = k * dt_ns, k = 0..N, t_N = duration
  double dt_ns{0.5};
  double duration_ns{120.0};

  std::size_t size() const { return samples.size(); }
  double time(std::size_t k) const { return static_cast<double>(k) * dt_ns; }

  // Piecewise-linear interpolant on [0, duration], zero outside.
  cplx at(double t_ns) const {
    if (samples.empty() || t_ns < 0.0 || t_ns > duration_ns) return {0.0, 0.0};
    const double x = t_ns / dt_ns;
    const auto last = samples.size() - 1;
    auto i = static_cast<std::size_t>(x);
    if (i >= last) return samples[last];
    const double f = x - static_cast<double>(i);
    return samples[i] * (1.0 - f) + samples[i + 1] * f;
  }

  double peak() const {
    double m = 0.0;
    for (const auto& s : samples) m = std::max(m, std::abs(s));
    return m;
  }
  PulseEnvelope scaled(double factor) const {
    PulseEnvelope p = *this;
    for (auto& s : p.samples) s *= factor;
    return p;
  }
  // sum |s|^2 dt
  double energy() const {
    double e = 0.0;
    for (const auto& s : samples) e += std::norm(s);
    return e * dt_ns;
  }
};

inline PulseEnvelope make_envelope(std::vector<cplx> samples, double dt_ns) {
  if (samples.size() < 2 || !(dt_ns > 0)) throw std::invalid_argument("envelope needs >= 2 samples");
  PulseEnvelope p;
  p.dt_ns = dt_ns;
  p.duration_ns = dt_ns * static_cast<double>(samples.size() - 1);
  p.samples = std::move(samples);
  return p;
}

// A (1 - cos(2 pi t / T)) / 2, real, zero at both ends, peak A at T/2.
inline PulseEnvelope seed_cosine(double duration_ns, double amplitude, double dt_ns = 0.5) {
  if (!(duration_ns > 0) || !(dt_ns > 0)) throw std::invalid_argument("duration must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration_ns / dt_ns));
  if (n < 1 || std::abs(static_cast<double>(n) * dt_ns - duration_ns) > 1e-9 * duration_ns)
    throw std::invalid_argument("duration must be a multiple of dt");
  std::vector<cplx> s(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt_ns;
    s[k] = amplitude * 0.5 * (1.0 - std::cos(kTwoPi * t / duration_ns));
  }
  s.front() = 0.0;
  s.back() = 0.0;
  return make_envelope(std::move(s), dt_ns);
}

// Direct evaluation of F at one frequency (MHz).
inline cplx fourier_at(const PulseEnvelope& env, double f_mhz) {
  const double w = kTwoPi * units::mhz_to_ghz(f_mhz);  // rad/ns
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < env.size(); ++k) acc += env.samples[k] * std::polar(1.0, -w * env.time(k));
  return acc * env.dt_ns;
}

// Final coherent amplitude of a linear mode detuned by delta_mhz from the drive.
inline cplx linear_alpha(const PulseEnvelope& env, double delta_mhz) {
  const double delta = kTwoPi * units::mhz_to_ghz(delta_mhz);  // rad/ns
  const cplx f = fourier_at(env, delta_mhz) * units::per_us_to_per_ns;
  return cplx{0.0, -0.5} * std::polar(1.0, -delta * env.duration_ns) * std::conj(f);
}

struct Spectrum {
  std::vector<double> freq_mhz;  // ascending, centered on zero
  std::vector<cplx> values;      // F(f), rad/us * ns
  double bin_mhz{};

  // sum |F|^2 df, equal to sum |s|^2 dt by Parseval.
  double energy() const {
    double e = 0.0;
    for (const auto& v : values) e += std::norm(v);
    return e * units::mhz_to_ghz(bin_mhz);
  }
  double energy_outside(double band_mhz) const {
    double e = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (std::abs(freq_mhz[i]) > band_mhz) e += std::norm(values[i]);
    return e * units::mhz_to_ghz(bin_mhz);
  }
};

// Smallest power of two whose bin width is at most max_bin_mhz and that pads
// the record at least eightfold.
inline std::size_t default_pad_length(const PulseEnvelope& env, double max_bin_mhz = 0.25) {
  const double need = 1.0 / (units::mhz_to_ghz(max_bin_mhz) * env.dt_ns);
  std::size_t n = 1;
  while (static_cast<double>(n) < need || n < 8 * env.size()) n <<= 1;
  return n;
}

namespace detail {
inline double fft_freq_mhz(std::size_t m, std::size_t n, double dt_ns) {
  const auto sm = static_cast<long long>(m);
  const auto sn = static_cast<long long>(n);
  const long long k = sm < (sn + 1) / 2 ? sm : sm - sn;
  return units::ghz_to_mhz(static_cast<double>(k) / (static_cast<double>(n) * dt_ns));
}
}  // namespace detail

inline Spectrum spectrum(const PulseEnvelope& env, std::size_t pad_length) {
  if (pad_length < env.size()) throw std::invalid_argument("pad_length shorter than the envelope");
  std::vector<cplx> buf(pad_length, cplx{0.0, 0.0});
  std::copy(env.samples.begin(), env.samples.end(), buf.begin());
  Eigen::FFT<double> fft;
  std::vector<cplx> out;
  fft.fwd(out, buf);
  Spectrum s;
  s.bin_mhz = units::ghz_to_mhz(1.0 / (static_cast<double>(pad_length) * env.dt_ns));
  const std::size_t n = pad_length;
  const std::size_t half = n / 2;
  s.freq_mhz.resize(n);
  s.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t m = (i + n - half) % n;  // fftshift
    s.freq_mhz[i] = detail::fft_freq_mhz(m, n, env.dt_ns);
    s.values[i] = out[m] * env.dt_ns;
  }
  return s;
}

inline double to_db(double ratio) { return 20.0 * std::log10(ratio); }

struct SpectralConstraint {
  std::vector<double> zeros;      // MHz
  double notch_halfwidth{0.5};    // MHz
  double guard_band{100.0};       // MHz
  bool guard_enabled{true};

  // Coincident zeros are merged; they describe the same notch.
  std::vector<double> distinct_zeros() const {
    std::vector<double> z = zeros;
    std::sort(z.begin(), z.end());
    z.erase(std::unique(z.begin(), z.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            z.end());
    return z;
  }
  void validate(double nyquist_mhz) const {
    if (!(notch_halfwidth > 0)) throw std::invalid_argument("notch halfwidth must be positive");
    for (double z : zeros) {
      if (!std::isfinite(z)) throw std::invalid_argument("notch frequency must be finite");
      if (std::abs(z) + notch_halfwidth >= nyquist_mhz)
        throw std::invalid_argument("notch outside the resolvable band");
    }
    if (guard_enabled && guard_band >= nyquist_mhz)
      throw std::invalid_argument("guard band beyond Nyquist");
  }
};

struct ISEConfig {
  int iterations{100};
  std::size_t pad_length{0};  // 0 selects default_pad_length
  double max_bin_mhz{0.25};
  double min_suppression_db{20.0};
};

struct IseResult {
  PulseEnvelope envelope;
  std::vector<double> notch_freq_mhz;
  std::vector<double> suppression_db;  // |F_opt(f_i)| / |F_seed(f_i)| in dB, negative is suppressed
  bool converged{};                    // every notch at or below -min_suppression_db
};

// Repeats: transform; negate the spectrum inside each notch window and in the
// guard bands; inverse transform; truncate to [0, T].
inline IseResult ise_iterate(const PulseEnvelope& seed, const SpectralConstraint& constraint,
                             const ISEConfig& config = {}) {
  const std::size_t n = config.pad_length ? config.pad_length : default_pad_length(seed, config.max_bin_mhz);
  if (n < 8 * seed.size()) throw std::invalid_argument("pad_length must be >= 8x the record length");
  const double nyquist = units::ghz_to_mhz(0.5 / seed.dt_ns);
  constraint.validate(nyquist);
  const auto zeros = constraint.distinct_zeros();

  std::vector<char> flip(n, 0);
  for (std::size_t m = 0; m < n; ++m) {
    const double f = detail::fft_freq_mhz(m, n, seed.dt_ns);
    bool hit = constraint.guard_enabled && std::abs(f) > constraint.guard_band;
    for (double z : zeros) hit = hit || std::abs(f - z) <= constraint.notch_halfwidth;
    flip[m] = hit;
  }

  Eigen::FFT<double> fft;
  std::vector<cplx> buf(n), spec(n), back(n);
  std::vector<cplx> pulse = seed.samples;
  for (int it = 0; it < config.iterations; ++it) {
    std::fill(buf.begin(), buf.end(), cplx{0.0, 0.0});
    std::copy(pulse.begin(), pulse.end(), buf.begin());
    fft.fwd(spec, buf);
    for (std::size_t m = 0; m < n; ++m)
      if (flip[m]) spec[m] = -spec[m];
    fft.inv(back, spec);
    std::copy(back.begin(), back.begin() + static_cast<std::ptrdiff_t>(pulse.size()), pulse.begin());
  }

  IseResult r;
  r.envelope = seed;
  r.envelope.samples = std::move(pulse);
  r.converged = true;
  for (double z : zeros) {
    const double before = std::abs(fourier_at(seed, z));
    const double after = std::abs(fourier_at(r.envelope, z));
    const double db = before > 0 ? to_db(std::max(after, 1e-300) / before) : -INFINITY;
    r.notch_freq_mhz.push_back(z);
    r.suppression_db.push_back(db);
    if (!(db <= -config.min_suppression_db)) r.converged = false;
  }
  return r;
}

// Notch centers at the four conditioned bus detunings f_bus|ij - f_drive (MHz).
inline SpectralConstraint notch_targets(const DispersiveShifts& shifts, double f_drive_ghz) {
  SpectralConstraint c;
  for (double f : shifts.quartet) {
    const double delta = units::ghz_to_mhz(f - f_drive_ghz);
    if (std::abs(delta) < 1e-6) throw std::invalid_argument("drive coincides with a quartet line");
    c.zeros.push_back(delta);
  }
  return c;
}

}  // namespace nlc
