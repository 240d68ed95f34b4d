// Bus photon loss and dephasing, qubit incoherent error and
// the gate error budget.
//
// Collapse operators act on the bus: L1 = sqrt(G1) a, L2 = sqrt(2 Gphi) a^dag a.
// Both unravelings below integrate the same generator in the interaction
// picture used by Propagator: the effective Hamiltonian carries -G/2 with
// G = sum L^dag L, and jumps use the exact interaction-picture operators.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nlc/dynamics/dressed_system.hpp"
#include "nlc/dynamics/fidelity.hpp"
#include "nlc/dynamics/gate.hpp"
#include "nlc/dynamics/propagator.hpp"

namespace nlc {

struct QubitCoherence {
  double t1{INFINITY};    // us
  double t_phi{INFINITY}; // us

  // 1/T_phi = 1/T2 - 1/(2 T1)
  static QubitCoherence from_t2(double t1, double t2) {
    if (!(t1 > 0) || !(t2 > 0)) throw std::invalid_argument("coherence times must be positive");
    if (t2 > 2.0 * t1) throw std::invalid_argument("T2 exceeds 2 T1");
    const double rate = 1.0 / t2 - 0.5 / t1;
    return {t1, rate > 0 ? 1.0 / rate : INFINITY};
  }
};

struct NoiseModel {
  double bus_gamma1{};     // 1/us
  double bus_gamma_phi{};  // 1/us
  QubitCoherence qubit_a{};
  QubitCoherence qubit_b{};

  static NoiseModel from_bus_times(double t1_us, double t2_us) {
    if (!(t1_us > 0) || !(t2_us > 0)) throw std::invalid_argument("bus coherence times must be positive");
    if (t2_us > 2.0 * t1_us) throw std::invalid_argument("bus T2 exceeds 2 T1");
    NoiseModel n;
    n.bus_gamma1 = 1.0 / t1_us;
    n.bus_gamma_phi = 1.0 / t2_us - 0.5 / t1_us;
    return n;
  }
  void validate() const {
    if (bus_gamma1 < 0 || bus_gamma_phi < 0) throw std::invalid_argument("bus rates must be non-negative");
  }
  bool noiseless() const { return bus_gamma1 == 0.0 && bus_gamma_phi == 0.0; }
};

// Collapse operators in the dressed basis of `sys`, rates converted to 1/ns.
// Products are formed before any restriction, so pass the unrestricted system
// and select states afterwards with `keep`.
struct BusCollapse {
  std::vector<Eigen::MatrixXd> jumps;
  Eigen::MatrixXd decay;  // sum L^dag L

  static BusCollapse build(const DressedSystem& sys, const NoiseModel& noise, const std::vector<int>& keep) {
    noise.validate();
    const Eigen::MatrixXd a = sys.lowering;
    const Eigen::MatrixXd n = a.transpose() * a;
    const double g1 = noise.bus_gamma1 * units::per_us_to_per_ns;
    const double gp = noise.bus_gamma_phi * units::per_us_to_per_ns;
    auto pick = [&](const Eigen::MatrixXd& m) {
      Eigen::MatrixXd r(keep.size(), keep.size());
      for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t j = 0; j < keep.size(); ++j) r(i, j) = m(keep[i], keep[j]);
      return r;
    };
    BusCollapse c;
    c.jumps.push_back(std::sqrt(g1) * pick(a));
    c.jumps.push_back(std::sqrt(2.0 * gp) * pick(n));
    c.decay = pick(g1 * n + 2.0 * gp * n * n);
    return c;
  }
};

enum class OpenMethod { Master, Trajectories };

struct OpenSystemOptions {
  OpenMethod method{OpenMethod::Trajectories};
  int n_traj{200};
  std::uint64_t seed{1};
  PropagationOptions propagation{};
  double trace_tolerance{1e-6};
  double boundary_threshold{1e-3};  // population on the highest retained photon label
};

struct OpenSystemResult {
  ChannelOutputs outputs;             // 36 input states
  FidelityReport fidelity;            // virtual Z on
  std::array<double, 36> jump_fraction{};
  double boundary_population{};
  bool boundary_flagged{};
  double trace_error{};               // master method only
  int simulated_dim{};
};

namespace detail {

// Qubit-space blocks of a final interaction-picture state: v[n](ab).
inline std::vector<CVector> qubit_components(const DressedSystem& sub, const CVector& y, double t) {
  int n_max = 0;
  for (int k = 0; k < sub.dim(); ++k)
    if (sub.qubit_computational(k)) n_max = std::max(n_max, sub.labels[k].n);
  std::vector<CVector> v(n_max + 1, CVector::Zero(4));
  for (int k = 0; k < sub.dim(); ++k) {
    if (!sub.qubit_computational(k)) continue;
    const auto& l = sub.labels[k];
    const int row = 2 * l.a + l.b;
    const double e_ref = sub.energies(sub.computational[row]);
    v[l.n](row) += y(k) * std::polar(1.0, -kTwoPi * (sub.energies(k) - e_ref) * t);
  }
  return v;
}

inline CVector embed_input(const DressedSystem& sub, const CVector& s) {
  CVector y = CVector::Zero(sub.dim());
  for (int c = 0; c < 4; ++c) y(sub.computational[c]) = s(c);
  return y;
}

inline double boundary_population(const DressedSystem& sub, const CVector& y) {
  const int top = sub.photons.maxCoeff();
  double p = 0.0;
  for (int k = 0; k < sub.dim(); ++k)
    if (sub.photons(k) == top) p += std::norm(y(k));
  return p / y.squaredNorm();
}

// Exact interaction-picture jump: y -> U L U^dag y, U = diag(exp(i 2 pi E t)).
inline CVector apply_jump(const DressedSystem& sub, const Eigen::MatrixXd& l, const CVector& y, double t) {
  CVector u(sub.dim());
  for (int k = 0; k < sub.dim(); ++k) u(k) = std::polar(1.0, kTwoPi * sub.energies(k) * t);
  return u.cwiseProduct(l.cast<cplx>() * u.conjugate().cwiseProduct(y));
}

}  // namespace detail

// Monte-Carlo wave-function unraveling. The no-jump evolution is linear, so it
// is computed once for the four computational inputs and stored; a trajectory
// draws its threshold, locates its first jump on the stored record, and only
// then is integrated on its own.
inline OpenSystemResult mcwf_evolve(const DressedSystem& sys, const DriveConfig& drive, const NoiseModel& noise,
                                    const OpenSystemOptions& opt) {
  if (opt.n_traj < 1) throw std::invalid_argument("n_traj must be positive");
  const std::vector<int> keep = drive_states(sys, drive, opt.propagation);
  const DressedSystem sub = sys.restricted(keep);
  const BusCollapse col = BusCollapse::build(sys, noise, keep);
  Propagator prop(sub, drive, opt.propagation);
  prop.set_decay(col.decay);

  const int steps = prop.steps();
  const double h = prop.step();
  const double t_gate = drive.gate_time();

  // no-jump record for the basis inputs
  std::vector<CMatrix> record(steps + 1);
  record[0] = computational_inputs(sub);
  for (int i = 0; i < steps; ++i) {
    record[i + 1] = record[i];
    prop.rk4(i * h, h, record[i + 1]);
  }

  const auto inputs = product_inputs();
  OpenSystemResult r;
  r.simulated_dim = sub.dim();
  for (int s = 0; s < 36; ++s) {
    r.outputs.three_body[s] = CMatrix::Zero(4, 4);
    r.outputs.traced[s] = CMatrix::Zero(4, 4);
    // norm of the no-jump branch along the record
    std::vector<double> norm(steps + 1);
    for (int i = 0; i <= steps; ++i) norm[i] = (record[i] * inputs[s]).squaredNorm();

    int jumped = 0;
    for (int k = 0; k < opt.n_traj; ++k) {
      std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                        static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(k)};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      double threshold = uni(rng);

      const auto first = std::find_if(norm.begin(), norm.end(), [&](double v) { return v < threshold; });
      bool pending = first != norm.end();
      int i0 = pending ? static_cast<int>(first - norm.begin()) : steps;
      CVector y = record[i0] * inputs[s];
      if (pending) ++jumped;
      while (pending) {
        // jump at t = i0 h
        const double t = i0 * h;
        const CVector psi = y / std::sqrt(y.squaredNorm());
        std::array<double, 2> w{};
        std::array<CVector, 2> cand;
        for (int j = 0; j < 2; ++j) {
          cand[j] = detail::apply_jump(sub, col.jumps[j], psi, t);
          w[j] = cand[j].squaredNorm();
        }
        if (w[0] + w[1] <= 0) throw NumericalError("jump with vanishing rate", w[0] + w[1]);
        const int j = uni(rng) * (w[0] + w[1]) < w[0] ? 0 : 1;
        CMatrix ym = cand[j] / std::sqrt(w[j]);
        threshold = uni(rng);
        pending = false;
        while (i0 < steps) {
          prop.rk4(i0 * h, h, ym);
          ++i0;
          if (ym.squaredNorm() < threshold) {
            pending = true;
            break;
          }
        }
        y = ym.col(0);
      }
      y /= std::sqrt(y.squaredNorm());
      r.boundary_population = std::max(r.boundary_population, detail::boundary_population(sub, y));
      const auto v = detail::qubit_components(sub, y, t_gate);
      r.outputs.three_body[s] += v[0] * v[0].adjoint();
      for (const auto& b : v) r.outputs.traced[s] += b * b.adjoint();
    }
    r.outputs.three_body[s] /= opt.n_traj;
    r.outputs.traced[s] /= opt.n_traj;
    r.jump_fraction[s] = static_cast<double>(jumped) / opt.n_traj;
  }
  r.boundary_flagged = r.boundary_population > opt.boundary_threshold;
  r.fidelity = average_fidelity_36(r.outputs, true);
  return r;
}

// Dense Lindblad integration of an operator-valued initial condition. Intended
// for small systems.
inline CMatrix master_evolve(const DressedSystem& sub, const Propagator& prop, const std::vector<Eigen::MatrixXd>& jumps,
                             const CMatrix& rho0) {
  const int steps = prop.steps();
  const double h = prop.step();
  std::vector<CMatrix> lc;
  for (const auto& l : jumps) lc.push_back(l.cast<cplx>());
  auto rhs = [&](double t, const CMatrix& rho) {
    CMatrix a;
    prop.derivative(t, rho, a);
    CMatrix out = a + a.adjoint();
    CVector u(sub.dim());
    for (int k = 0; k < sub.dim(); ++k) u(k) = std::polar(1.0, kTwoPi * sub.energies(k) * t);
    for (const auto& l : lc) {
      const CMatrix li = u.asDiagonal() * l * u.conjugate().asDiagonal();
      out += li * rho * li.adjoint();
    }
    return out;
  };
  CMatrix rho = rho0;
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    const CMatrix k1 = rhs(t, rho);
    const CMatrix k2 = rhs(t + 0.5 * h, rho + 0.5 * h * k1);
    const CMatrix k3 = rhs(t + 0.5 * h, rho + 0.5 * h * k2);
    const CMatrix k4 = rhs(t + h, rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return rho;
}

inline OpenSystemResult master_equation(const DressedSystem& sys, const DriveConfig& drive, const NoiseModel& noise,
                                        const OpenSystemOptions& opt) {
  const std::vector<int> keep = drive_states(sys, drive, opt.propagation);
  const DressedSystem sub = sys.restricted(keep);
  const BusCollapse col = BusCollapse::build(sys, noise, keep);
  Propagator prop(sub, drive, opt.propagation);
  prop.set_decay(col.decay);

  const auto inputs = product_inputs();
  OpenSystemResult r;
  r.simulated_dim = sub.dim();
  for (int s = 0; s < 36; ++s) {
    const CVector y0 = detail::embed_input(sub, inputs[s]);
    const CMatrix rho = master_evolve(sub, prop, col.jumps, y0 * y0.adjoint());
    r.trace_error = std::max(r.trace_error, std::abs(rho.trace() - cplx{1.0, 0.0}));
    // qubit blocks of rho
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (rho + rho.adjoint()));
    r.outputs.three_body[s] = CMatrix::Zero(4, 4);
    r.outputs.traced[s] = CMatrix::Zero(4, 4);
    for (int e = 0; e < sub.dim(); ++e) {
      const double p = es.eigenvalues()(e);
      if (p <= 0) continue;
      const auto v = detail::qubit_components(sub, es.eigenvectors().col(e), drive.gate_time());
      r.outputs.three_body[s] += p * v[0] * v[0].adjoint();
      for (const auto& b : v) r.outputs.traced[s] += p * b * b.adjoint();
    }
    r.boundary_population = std::max(r.boundary_population, std::real(rho.trace()) > 0 ? [&] {
      const int top = sub.photons.maxCoeff();
      double pb = 0.0;
      for (int k = 0; k < sub.dim(); ++k)
        if (sub.photons(k) == top) pb += std::real(rho(k, k));
      return pb;
    }() : 0.0);
  }
  if (r.trace_error > opt.trace_tolerance)
    throw NumericalError("master equation trace drift exceeds tolerance", r.trace_error);
  r.boundary_flagged = r.boundary_population > opt.boundary_threshold;
  r.fidelity = average_fidelity_36(r.outputs, true);
  return r;
}

inline OpenSystemResult lindblad_evolve(const DressedSystem& sys, const DriveConfig& drive, const NoiseModel& noise,
                                        const OpenSystemOptions& opt = {}) {
  return opt.method == OpenMethod::Master ? master_equation(sys, drive, noise, opt)
                                          : mcwf_evolve(sys, drive, noise, opt);
}

// D_ij = exp[ G1 int (alpha_i alpha_j^* - |alpha_i|^2/2 - |alpha_j|^2/2) dt ]
// for the four computational trajectories (columns gg, ge, eg, ee).
inline CMatrix relaxation_dephasing_factor(std::span<const double> t_ns, const Eigen::MatrixXcd& alpha,
                                           double gamma1_per_us) {
  if (alpha.cols() != 4 || alpha.rows() != static_cast<Eigen::Index>(t_ns.size()))
    throw std::invalid_argument("expected four sampled trajectories");
  const double g = gamma1_per_us * units::per_us_to_per_ns;
  CMatrix d(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cplx acc{0.0, 0.0};
      for (std::size_t k = 0; k + 1 < t_ns.size(); ++k) {
        auto f = [&](std::size_t m) {
          const cplx ai = alpha(m, i), aj = alpha(m, j);
          return ai * std::conj(aj) - 0.5 * std::norm(ai) - 0.5 * std::norm(aj);
        };
        acc += 0.5 * (t_ns[k + 1] - t_ns[k]) * (f(k) + f(k + 1));
      }
      d(i, j) = std::exp(g * acc);
    }
  return d;
}

// Fidelity deficit from damping the unitary outputs' off-diagonals by D.
struct RelaxationDephasing {
  CMatrix factor;
  double error{};
};

inline RelaxationDephasing relaxation_dephasing_error(const GateResult& gate, double gamma1_per_us) {
  RelaxationDephasing r;
  r.factor = relaxation_dephasing_factor(gate.trajectory.times, gate.trajectory.alpha, gamma1_per_us);
  const ChannelOutputs clean = outputs_from_blocks(gate.photon_blocks);
  ChannelOutputs damped = clean;
  for (int s = 0; s < 36; ++s) damped.traced[s] = damped.traced[s].cwiseProduct(r.factor);
  const double f0 = average_fidelity_36(clean, true).f_traced;
  const double f1 = average_fidelity_36(damped, true).f_traced;
  r.error = f0 - f1;
  return r;
}

// (2 t_g / 5)(1/T1a + 1/Tphi_a + 1/T1b + 1/Tphi_b), t_g in ns, times in us.
inline double epsilon_q(double t_g_ns, const QubitCoherence& a, const QubitCoherence& b) {
  for (double t : {a.t1, a.t_phi, b.t1, b.t_phi})
    if (!(t > 0)) throw std::invalid_argument("coherence times must be positive");
  const double rates = 1.0 / a.t1 + 1.0 / a.t_phi + 1.0 / b.t1 + 1.0 / b.t_phi;
  return 0.4 * t_g_ns * units::per_us_to_per_ns * rates;
}

struct ErrorBudget {
  double qubit_decoherence{};   // epsilon_Q
  double coherent{};            // 1 - f_traced of the unitary run
  double bus_incoherent{};      // f_traced(unitary) - f_traced(open)
  double bus_induced{};         // 1 - f_traced(open)
  double relaxation_dephasing{};// closed-form estimate, informational
  double total{};               // qubit_decoherence + bus_induced
};

inline ErrorBudget error_budget(double eps_q, double f_traced_unitary, double f_traced_open,
                                double relaxation_dephasing = 0.0) {
  ErrorBudget b;
  b.qubit_decoherence = eps_q;
  b.coherent = 1.0 - f_traced_unitary;
  b.bus_incoherent = f_traced_unitary - f_traced_open;
  b.bus_induced = 1.0 - f_traced_open;
  b.relaxation_dephasing = relaxation_dephasing;
  b.total = b.qubit_decoherence + b.bus_induced;
  return b;
}

}  // namespace nlc
