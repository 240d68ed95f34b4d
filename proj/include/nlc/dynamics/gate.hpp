// CZ gate simulation, phase bookkeeping and pulse calibration.

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nlc/dynamics/dressed_system.hpp"
#include "nlc/dynamics/propagator.hpp"
#include "nlc/nelder_mead.hpp"
#include "nlc/pulse_shaping.hpp"

namespace nlc {

inline double wrap_phase(double p) {
  p = std::remainder(p, kTwoPi);
  return p <= -kPi ? p + kTwoPi : p;
}

struct GateOptions {
  PropagationOptions propagation{};
  bool restrict_to_reachable{true};
  double leakage_threshold{1e-6};
};

struct GateResult {
  CMatrix u_eff;                      // <ij,0|U|kl,0> with drive-off phases removed
  std::vector<CMatrix> photon_blocks; // <ij,n|U|kl,0>, n = 0, 1, ...
  std::array<double, 4> phases{};     // gg, ge, eg, ee
  double conditional_phase{};
  std::array<double, 4> residual_photons{};
  double mean_residual_photons{};
  double leakage{};                   // max population on non-computational qubit labels
  bool leakage_flagged{};
  double norm_drift{};
  int simulated_dim{};
  Trajectory trajectory;              // columns gg, ge, eg, ee
};

namespace detail {

inline GateResult extract_gate(const DressedSystem& sub, const Propagator& prop, Trajectory tr,
                               double leakage_threshold) {
  const double t = prop.drive().gate_time();
  const CMatrix& y = tr.final_state;
  int n_max = 0;
  for (int k = 0; k < sub.dim(); ++k)
    if (sub.qubit_computational(k)) n_max = std::max(n_max, sub.labels[k].n);

  GateResult g;
  g.photon_blocks.assign(n_max + 1, CMatrix::Zero(4, 4));
  for (int k = 0; k < sub.dim(); ++k) {
    if (!sub.qubit_computational(k)) continue;
    const auto& l = sub.labels[k];
    const int row = 2 * l.a + l.b;
    const double e_ref = sub.energies(sub.computational[row]);
    const cplx ph = std::polar(1.0, -kTwoPi * (sub.energies(k) - e_ref) * t);
    for (int c = 0; c < 4; ++c) g.photon_blocks[l.n](row, c) += y(k, c) * ph;
  }
  g.u_eff = g.photon_blocks[0];
  for (int c = 0; c < 4; ++c) g.phases[c] = std::arg(g.u_eff(c, c));
  g.conditional_phase = wrap_phase(g.phases[0] + g.phases[3] - g.phases[1] - g.phases[2]);

  double mean = 0.0;
  for (int c = 0; c < 4; ++c) {
    g.residual_photons[c] = prop.photons(y.col(c));
    mean += g.residual_photons[c];
    double leak = 0.0;
    for (int k = 0; k < sub.dim(); ++k)
      if (!sub.qubit_computational(k)) leak += std::norm(y(k, c));
    g.leakage = std::max(g.leakage, leak);
  }
  g.mean_residual_photons = mean / 4.0;
  g.leakage_flagged = g.leakage > leakage_threshold;
  g.norm_drift = tr.norm_drift;
  g.simulated_dim = sub.dim();
  g.trajectory = std::move(tr);
  return g;
}

}  // namespace detail

// Dressed states on which a drive acts: everything reachable from the four
// computational states through near-resonant drive matrix elements. The
// selection uses the rotating-frame rules in either frame.
inline std::vector<int> drive_states(const DressedSystem& sys, const DriveConfig& drive, PropagationOptions opt) {
  opt.frame = Frame::Rotating;
  const Propagator full(sys, drive, opt);
  return full.reachable({sys.computational.begin(), sys.computational.end()});
}

inline DressedSystem drive_subspace(const DressedSystem& sys, const DriveConfig& drive,
                                    const PropagationOptions& opt) {
  return sys.restricted(drive_states(sys, drive, opt));
}

inline GateResult gate_simulate(const DressedSystem& sys, const DriveConfig& drive, const GateOptions& opt = {}) {
  const DressedSystem sub = opt.restrict_to_reachable ? drive_subspace(sys, drive, opt.propagation) : sys;
  const Propagator prop(sub, drive, opt.propagation);
  return detail::extract_gate(sub, prop, prop.run(computational_inputs(sub)), opt.leakage_threshold);
}

// Convention constant relating the enclosed phase-space area to the acquired
// phase, fixed against gate_simulate on the low-power benchmark.
inline constexpr double kSemiclassicalSign = 1.0;

// s * [Delta int |alpha|^2 dt + Im int alpha^* d(alpha)], alpha in the frame of
// the drive, Delta = f_bus - f_drive (GHz). A circle of radius r traversed once
// counterclockwise in the resonator frame gives magnitude 2 pi r^2.
struct SemiclassicalPhase {
  double phase{};
  double endpoint{};  // |alpha(T)|
  bool closed{};
};

inline SemiclassicalPhase semiclassical_phase(std::span<const double> t_ns, std::span<const cplx> alpha,
                                              double delta_ghz, double closure_tolerance = 0.1) {
  if (t_ns.size() != alpha.size() || t_ns.size() < 2)
    throw std::invalid_argument("trajectory needs matching time and amplitude samples");
  const double w = kTwoPi * delta_ghz;
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < t_ns.size(); ++k) {
    const double h = t_ns[k + 1] - t_ns[k];
    area += 0.5 * w * h * (std::norm(alpha[k]) + std::norm(alpha[k + 1]));
    const cplx mid = 0.5 * (alpha[k] + alpha[k + 1]);
    area += std::imag(std::conj(mid) * (alpha[k + 1] - alpha[k]));
  }
  SemiclassicalPhase r;
  r.phase = kSemiclassicalSign * area;
  r.endpoint = std::abs(alpha.back());
  r.closed = r.endpoint <= closure_tolerance;
  return r;
}

// ---------------------------------------------------------------- calibration

struct PulseParameters {
  std::array<double, 4> notch_offset_mhz{};  // added to the nominal detunings
  double amplitude{};                         // rad/us, scale on the unit-seed ISE pulse
  double f_drive{};                           // GHz
};

struct CalibrationOptions {
  double gate_time_ns{120.0};
  double dt_ns{0.5};
  ISEConfig ise{};
  double notch_halfwidth{0.5};
  double guard_band{100.0};
  double phase_weight{10.0};  // rad^-2
  int amplitude_presteps{4};
  NelderMeadOptions simplex{.max_evaluations = 300};
  double notch_step_mhz{1.0};
  double amplitude_step{0.05};  // relative
  double drive_step_mhz{1.0};
  double photon_threshold{0.02};
  double phase_threshold{0.01};
  GateOptions gate{};
};

struct CalibrationResult {
  PulseParameters parameters;
  DriveConfig drive;
  GateResult gate;
  double initial_objective{};
  double objective{};
  std::vector<double> trace;
  int evaluations{};
  bool met_thresholds{};
};

inline constexpr double kStartDetuningMhz = 20.0;
inline constexpr double kStartAmplitude = 700.0;  // rad/us

// Drive below the gg line with nominal notches.
inline PulseParameters standard_start(const DispersiveShifts& shifts, double detuning_mhz = kStartDetuningMhz,
                                      double amplitude = kStartAmplitude) {
  PulseParameters p;
  p.amplitude = amplitude;
  p.f_drive = shifts.quartet[0] - units::mhz_to_ghz(detuning_mhz);
  return p;
}

class GateCalibrator {
 public:
  GateCalibrator(const DressedSystem& sys, const DispersiveShifts& shifts, CalibrationOptions opt = {})
      : sys_(sys), shifts_(shifts), opt_(std::move(opt)) {}

  DriveConfig drive_for(const PulseParameters& p) const {
    SpectralConstraint c = notch_targets(shifts_, p.f_drive);
    for (int i = 0; i < 4; ++i) c.zeros[i] += p.notch_offset_mhz[i];
    c.notch_halfwidth = opt_.notch_halfwidth;
    c.guard_band = opt_.guard_band;
    const auto shaped = ise_iterate(seed_cosine(opt_.gate_time_ns, 1.0, opt_.dt_ns), c, opt_.ise);
    return DriveConfig{p.f_drive, shaped.envelope.scaled(p.amplitude), "bus"};
  }

  GateResult simulate(const PulseParameters& p) const { return gate_simulate(sys_, drive_for(p), opt_.gate); }

  double objective(const GateResult& g) const {
    const double dphi = wrap_phase(g.conditional_phase - kPi);
    return g.mean_residual_photons + opt_.phase_weight * dphi * dphi;
  }

  // Rescales the amplitude toward phi_c = pi assuming phi_c ~ amplitude^2.
  PulseParameters tune_amplitude(PulseParameters p) const {
    for (int i = 0; i < opt_.amplitude_presteps; ++i) {
      double phi = simulate(p).conditional_phase;
      if (phi < 0) phi += kTwoPi;
      if (!(phi > 1e-6)) break;
      p.amplitude *= std::sqrt(kPi / phi);
    }
    return p;
  }

  CalibrationResult calibrate(PulseParameters start) const {
    CalibrationResult r;
    r.initial_objective = objective(simulate(start));
    const PulseParameters pre = tune_amplitude(start);

    auto unpack = [&](const Eigen::VectorXd& x) {
      PulseParameters p = pre;
      for (int i = 0; i < 4; ++i) p.notch_offset_mhz[i] = pre.notch_offset_mhz[i] + x(i);
      p.amplitude = pre.amplitude * (1.0 + x(4));
      p.f_drive = pre.f_drive + units::mhz_to_ghz(x(5));
      return p;
    };
    Eigen::VectorXd steps(6);
    steps << opt_.notch_step_mhz, opt_.notch_step_mhz, opt_.notch_step_mhz, opt_.notch_step_mhz,
        opt_.amplitude_step, opt_.drive_step_mhz;
    auto f = [&](const Eigen::VectorXd& x) -> double {
      try {
        return objective(simulate(unpack(x)));
      } catch (const std::invalid_argument&) {
        return INFINITY;
      }
    };
    const auto nm = nelder_mead(f, Eigen::VectorXd::Zero(6), steps, opt_.simplex);

    PulseParameters best = unpack(nm.x);
    double best_value = nm.value;
    if (r.initial_objective < best_value) {
      best = start;
      best_value = r.initial_objective;
    }
    r.parameters = best;
    r.drive = drive_for(best);
    r.gate = gate_simulate(sys_, r.drive, opt_.gate);
    r.objective = best_value;
    r.trace = nm.trace;
    r.evaluations = nm.evaluations + opt_.amplitude_presteps + 1;
    r.met_thresholds = r.gate.mean_residual_photons <= opt_.photon_threshold &&
                       std::abs(wrap_phase(r.gate.conditional_phase - kPi)) <= opt_.phase_threshold;
    return r;
  }

  const CalibrationOptions& options() const { return opt_; }

 private:
  DressedSystem sys_;
  DispersiveShifts shifts_;
  CalibrationOptions opt_;
};

inline CalibrationResult calibrate_gate(const DressedSystem& sys, const DispersiveShifts& shifts,
                                        const PulseParameters& start, const CalibrationOptions& opt = {}) {
  return GateCalibrator(sys, shifts, opt).calibrate(start);
}

}  // namespace nlc
