// Driven evolution of a DressedSystem.
//
// States are carried in the interaction picture of the static dressed
// Hamiltonian: psi_k(t) = exp(-i 2 pi E_k t) y_k(t). The drive
// Re[Omega(t) exp(i 2 pi f_d t)] (a + a^dag) enters as
//   Lab:      H_I = v(t) U X U^dag,  v = Re[Omega exp(i 2 pi f_d t)]
//   Rotating: only matrix elements with |E_k - E_l -/+ f_d| < cutoff are kept,
//             with coefficient Omega^*/2 (upward) or Omega/2 (downward).
// An optional Hermitian decay operator G = sum L^dag L adds -G/2 to the
// generator (non-Hermitian effective Hamiltonian).

#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "nlc/dynamics/dressed_system.hpp"
#include "nlc/pulse_shaping.hpp"
#include "nlc/units.hpp"

namespace nlc {

class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double magnitude)
      : std::runtime_error(format(what, magnitude)), magnitude_(magnitude) {}
  double magnitude() const { return magnitude_; }

 private:
  static std::string format(const std::string& what, double m) {
    std::ostringstream os;
    os << what << " (magnitude " << m << ")";
    return os.str();
  }
  double magnitude_;
};

struct DriveConfig {
  double f_drive{};  // GHz
  PulseEnvelope envelope;
  std::string target{"bus"};

  double gate_time() const { return envelope.duration_ns; }
  void validate() const {
    if (target != "bus") throw std::invalid_argument("only the bus can be driven");
    if (!(f_drive > 0)) throw std::invalid_argument("drive frequency must be positive");
    if (envelope.size() < 2) throw std::invalid_argument("drive envelope is empty");
  }
};

enum class Frame { Lab, Rotating };

struct PropagationOptions {
  Frame frame{Frame::Rotating};
  double steps_per_period{50.0};
  double max_step_ns{0.0};           // 0: automatic
  double element_threshold{1e-6};    // drop |X_kl| below this
  double reach_threshold{0.1};       // subspace selection ignores weaker elements
  double rwa_cutoff_ghz{1.0};
  double sample_interval_ns{1.0};
  double norm_tolerance{1e-8};
  int max_refinements{3};
};

using SparseC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct Trajectory {
  std::vector<double> times;   // ns
  Eigen::MatrixXd photons;     // samples x columns, sum n_k |psi_k|^2 over dressed labels
  Eigen::MatrixXcd alpha;      // samples x columns, <a> in the frame of the drive
  CMatrix final_state;         // interaction-picture amplitudes at T
  double norm_drift{};         // max | |y|^2 - |y0|^2 | over columns
};

class Propagator {
 public:
  Propagator(const DressedSystem& sys, const DriveConfig& drive, PropagationOptions opt = {})
      : sys_(sys), drive_(drive), opt_(opt) {
    drive_.validate();
    const int d = sys_.dim();
    const Eigen::MatrixXd x = sys_.quadrature();
    std::vector<Eigen::Triplet<cplx>> up, down, all;
    double f_max = 0.0;
    for (int k = 0; k < d; ++k) {
      for (int l = 0; l < d; ++l) {
        const double v = x(k, l);
        if (std::abs(v) < opt_.element_threshold) continue;
        const double de = sys_.energies(k) - sys_.energies(l);
        if (opt_.frame == Frame::Lab) {
          all.emplace_back(k, l, v);
          f_max = std::max(f_max, std::abs(de) + drive_.f_drive);
        } else if (std::abs(de - drive_.f_drive) < opt_.rwa_cutoff_ghz) {
          up.emplace_back(k, l, v);
          f_max = std::max(f_max, std::abs(de - drive_.f_drive));
        } else if (std::abs(de + drive_.f_drive) < opt_.rwa_cutoff_ghz) {
          down.emplace_back(k, l, v);
          f_max = std::max(f_max, std::abs(de + drive_.f_drive));
        }
      }
    }
    x_all_ = build(all);
    x_up_ = build(up);
    x_down_ = build(down);

    const Eigen::MatrixXd a = sys_.lowering;
    std::vector<Eigen::Triplet<cplx>> at;
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l)
        if (std::abs(a(k, l)) >= opt_.element_threshold) at.emplace_back(k, l, a(k, l));
    lowering_ = build(at);

    // the envelope is piecewise linear on its own grid; resolve it as well
    f_max = std::max(f_max, 0.5 / drive_.envelope.dt_ns);
    // and the Rabi-like rate of the strongest drive coupling
    const SparseC& xs = opt_.frame == Frame::Lab ? x_all_ : x_up_;
    double row = 0.0;
    for (int k = 0; k < xs.outerSize(); ++k) {
      double r = 0.0;
      for (SparseC::InnerIterator it(xs, k); it; ++it) r += std::abs(it.value());
      row = std::max(row, r);
    }
    f_max = std::max(f_max, drive_.envelope.peak() * units::per_us_to_per_ns * row / kTwoPi);
    f_max_ = f_max;
    double h = 1.0 / (opt_.steps_per_period * f_max);
    if (opt_.max_step_ns > 0) h = std::min(h, opt_.max_step_ns);
    const double t = drive_.gate_time();
    steps_ = std::max(1, static_cast<int>(std::ceil(t / h)));
    h_ = t / steps_;
  }

  // Adds -G/2 with G = sum L^dag L (rates in 1/ns, dressed basis).
  void set_decay(const Eigen::MatrixXd& g) {
    const int d = sys_.dim();
    if (g.rows() != d || g.cols() != d) throw std::invalid_argument("decay operator dimension mismatch");
    std::vector<Eigen::Triplet<cplx>> t;
    const double scale = g.cwiseAbs().maxCoeff();
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        if (std::abs(g(k, l)) < 1e-12 * scale) continue;
        const double de = sys_.energies(k) - sys_.energies(l);
        if (opt_.frame == Frame::Rotating && std::abs(de) >= opt_.rwa_cutoff_ghz) continue;
        t.emplace_back(k, l, g(k, l));
      }
    decay_ = build(t);
    has_decay_ = true;
  }

  double step() const { return h_; }
  int steps() const { return steps_; }
  double max_frequency() const { return f_max_; }
  const DressedSystem& system() const { return sys_; }
  const DriveConfig& drive() const { return drive_; }

  // dy/dt at time t
  void derivative(double t, const CMatrix& y, CMatrix& dy) const {
    const int d = sys_.dim();
    CVector u(d);
    for (int k = 0; k < d; ++k) u(k) = std::polar(1.0, kTwoPi * sys_.energies(k) * t);
    const CMatrix z = u.conjugate().asDiagonal() * y;
    const cplx omega = drive_.envelope.at(t) * units::per_us_to_per_ns;
    CMatrix w;
    if (opt_.frame == Frame::Lab) {
      const double v = std::real(omega * std::polar(1.0, kTwoPi * drive_.f_drive * t));
      w = (x_all_ * z) * cplx{0.0, -v};
    } else {
      const cplx carrier = std::polar(1.0, kTwoPi * drive_.f_drive * t);
      const cplx cu = 0.5 * std::conj(omega) * std::conj(carrier);
      const cplx cd = 0.5 * omega * carrier;
      w = (x_up_ * z) * (cplx{0.0, -1.0} * cu) + (x_down_ * z) * (cplx{0.0, -1.0} * cd);
    }
    if (has_decay_) w -= 0.5 * (decay_ * z);
    dy = u.asDiagonal() * w;
  }

  void rk4(double t, double h, CMatrix& y) const {
    CMatrix k1, k2, k3, k4;
    derivative(t, y, k1);
    derivative(t + 0.5 * h, y + 0.5 * h * k1, k2);
    derivative(t + 0.5 * h, y + 0.5 * h * k2, k3);
    derivative(t + h, y + h * k3, k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  // Schrodinger amplitudes from interaction-picture amplitudes at time t.
  CMatrix schrodinger(double t, const CMatrix& y) const {
    CVector u(sys_.dim());
    for (int k = 0; k < sys_.dim(); ++k) u(k) = std::polar(1.0, -kTwoPi * sys_.energies(k) * t);
    return u.asDiagonal() * y;
  }

  double photons(const CVector& y) const {
    double n = 0.0, norm = 0.0;
    for (int k = 0; k < sys_.dim(); ++k) {
      n += sys_.photons(k) * std::norm(y(k));
      norm += std::norm(y(k));
    }
    return norm > 0 ? n / norm : 0.0;
  }

  cplx alpha(double t, const CVector& y) const {
    const CVector psi = schrodinger(t, y);
    const cplx val = psi.dot(lowering_ * psi) / psi.squaredNorm();
    return val * std::polar(1.0, kTwoPi * drive_.f_drive * t);
  }

  // Integrates over [0, T]. A unitary run whose norm drifts beyond tolerance
  // is repeated with half the step, up to max_refinements times.
  Trajectory run(const CMatrix& y0, bool check_norm = true) const {
    if (y0.rows() != sys_.dim()) throw std::invalid_argument("initial state dimension mismatch");
    const Eigen::VectorXd n0 = y0.colwise().squaredNorm().transpose();
    if (check_norm)
      for (int c = 0; c < n0.size(); ++c)
        if (std::abs(n0(c) - 1.0) > 1e-10) throw std::invalid_argument("initial state not normalized");
    int steps = steps_;
    for (int attempt = 0;; ++attempt, steps *= 2) {
      Trajectory tr = integrate(y0, steps);
      const Eigen::VectorXd n1 = tr.final_state.colwise().squaredNorm().transpose();
      tr.norm_drift = (n1 - n0).cwiseAbs().maxCoeff();
      if (!check_norm || has_decay_ || tr.norm_drift <= opt_.norm_tolerance) return tr;
      if (attempt == opt_.max_refinements)
        throw NumericalError("norm drift exceeds tolerance; reduce the step", tr.norm_drift);
    }
  }

  Trajectory integrate(const CMatrix& y0, int steps) const {
    const double h = drive_.gate_time() / steps;
    const int every = std::max(1, static_cast<int>(std::lround(opt_.sample_interval_ns / h)));
    const int n_samples = steps / every + 1 + (steps % every ? 1 : 0);
    Trajectory tr;
    tr.photons.resize(n_samples, y0.cols());
    tr.alpha.resize(n_samples, y0.cols());
    CMatrix y = y0;
    int s = 0;
    auto record = [&](double t) {
      tr.times.push_back(t);
      for (int c = 0; c < y.cols(); ++c) {
        tr.photons(s, c) = photons(y.col(c));
        tr.alpha(s, c) = alpha(t, y.col(c));
      }
      ++s;
    };
    record(0.0);
    for (int i = 0; i < steps; ++i) {
      rk4(i * h, h, y);
      if ((i + 1) % every == 0 || i + 1 == steps) record((i + 1) * h);
    }
    tr.final_state = y;
    return tr;
  }

  // Dressed states coupled to `seeds` through retained drive elements.
  std::vector<int> reachable(const std::vector<int>& seeds) const {
    const SparseC& a = opt_.frame == Frame::Lab ? x_all_ : x_up_;
    std::vector<std::vector<int>> adj(sys_.dim());
    auto link = [&](const SparseC& m) {
      for (int k = 0; k < m.outerSize(); ++k)
        for (SparseC::InnerIterator it(m, k); it; ++it) {
          if (std::abs(it.value()) < opt_.reach_threshold) continue;
          adj[it.row()].push_back(static_cast<int>(it.col()));
          adj[it.col()].push_back(static_cast<int>(it.row()));
        }
    };
    link(a);
    if (opt_.frame == Frame::Rotating) link(x_down_);
    std::vector<char> seen(sys_.dim(), 0);
    std::deque<int> queue;
    for (int s : seeds) {
      seen[s] = 1;
      queue.push_back(s);
    }
    while (!queue.empty()) {
      const int k = queue.front();
      queue.pop_front();
      for (int l : adj[k])
        if (!seen[l]) {
          seen[l] = 1;
          queue.push_back(l);
        }
    }
    std::vector<int> out;
    for (int k = 0; k < sys_.dim(); ++k)
      if (seen[k]) out.push_back(k);
    return out;
  }

 private:
  SparseC build(const std::vector<Eigen::Triplet<cplx>>& t) const {
    SparseC m(sys_.dim(), sys_.dim());
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
  }

  DressedSystem sys_;
  DriveConfig drive_;
  PropagationOptions opt_;
  SparseC x_all_, x_up_, x_down_, lowering_, decay_;
  bool has_decay_{false};
  double h_{}, f_max_{};
  int steps_{};
};

// Columns of the identity at the four computational dressed states.
inline CMatrix computational_inputs(const DressedSystem& sys) {
  CMatrix y = CMatrix::Zero(sys.dim(), 4);
  for (int c = 0; c < 4; ++c) y(sys.computational[c], c) = 1.0;
  return y;
}

inline Trajectory evolve_unitary(const DressedSystem& sys, const DriveConfig& drive, const CMatrix& psi0,
                                 const PropagationOptions& opt = {}) {
  return Propagator(sys, drive, opt).run(psi0);
}

}  // namespace nlc
