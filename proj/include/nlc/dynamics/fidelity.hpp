// Uhlmann state fidelity and the 36 product-state average for
// a CZ gate, with optional virtual-Z correction.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nlc/nelder_mead.hpp"
#include "nlc/units.hpp"

namespace nlc {

namespace detail {
inline void check_density(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("density matrix must be square");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) throw std::invalid_argument("density matrix not Hermitian");
  if (std::abs(m.trace() - cplx{1.0, 0.0}) > tol) throw std::invalid_argument("density matrix trace is not one");
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  if (es.eigenvalues().minCoeff() < -tol) throw std::invalid_argument("density matrix has a negative eigenvalue");
}

inline CMatrix psd_sqrt(const CMatrix& m) {
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}
}  // namespace detail

// F = tr sqrt( sqrt(rho) sigma sqrt(rho) )
inline double state_fidelity(const CMatrix& sigma, const CMatrix& rho, double tol = 1e-8) {
  if (sigma.rows() != rho.rows()) throw std::invalid_argument("state dimension mismatch");
  detail::check_density(sigma, tol);
  detail::check_density(rho, tol);
  const CMatrix s = detail::psd_sqrt(rho);
  const CMatrix m = s * sigma * s;
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
  return std::min(1.0, es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum());
}

inline CMatrix pure_density(const CVector& v) { return v * v.adjoint(); }

// {|0>, |1>, (|0>+|1>)/r2, (|0>-|1>)/r2, (|0>+i|1>)/r2, (|0>-i|1>)/r2}
inline std::array<Eigen::Vector2cd, 6> cardinal_states() {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx i{0.0, 1.0};
  return {Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1), Eigen::Vector2cd(r, r),
          Eigen::Vector2cd(r, -r), Eigen::Vector2cd(r, r * i), Eigen::Vector2cd(r, -r * i)};
}

// 36 two-qubit inputs, basis order |ab> with index 2a + b (qubit A first).
inline std::array<CVector, 36> product_inputs() {
  const auto c = cardinal_states();
  std::array<CVector, 36> out;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) {
      CVector v(4);
      v << c[p](0) * c[q](0), c[p](0) * c[q](1), c[p](1) * c[q](0), c[p](1) * c[q](1);
      out[6 * p + q] = v;
    }
  return out;
}

inline CMatrix ideal_cz() {
  CMatrix cz = CMatrix::Identity(4, 4);
  cz(3, 3) = -1.0;
  return cz;
}

// Z(theta_a) x Z(theta_b), diagonal phases on |ab>.
inline CMatrix virtual_z(double theta_a, double theta_b) {
  CMatrix z = CMatrix::Zero(4, 4);
  z(0, 0) = 1.0;
  z(1, 1) = std::polar(1.0, theta_b);
  z(2, 2) = std::polar(1.0, theta_a);
  z(3, 3) = std::polar(1.0, theta_a + theta_b);
  return z;
}

// Output qubit states for the 36 inputs. Entries may have trace below one
// (population outside the computational subspace is discarded).
struct ChannelOutputs {
  std::array<CMatrix, 36> three_body;  // projected onto bus vacuum
  std::array<CMatrix, 36> traced;      // bus traced out
};

// blocks[n](ij, kl) = <ij, n| U |kl, 0>
inline ChannelOutputs outputs_from_blocks(const std::vector<CMatrix>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("no propagator blocks");
  const auto in = product_inputs();
  ChannelOutputs out;
  for (int s = 0; s < 36; ++s) {
    const CVector v0 = blocks[0] * in[s];
    out.three_body[s] = v0 * v0.adjoint();
    out.traced[s] = out.three_body[s];
    for (std::size_t n = 1; n < blocks.size(); ++n) {
      const CVector v = blocks[n] * in[s];
      out.traced[s] += v * v.adjoint();
    }
  }
  return out;
}

struct FidelityReport {
  double f_three_body{};
  double f_traced{};
  std::array<double, 36> per_state_three_body{};
  std::array<double, 36> per_state_traced{};
  bool virtual_z{};
  std::array<double, 2> z_three_body{};  // (theta_a, theta_b) applied to the target
  std::array<double, 2> z_traced{};
};

namespace detail {
// sqrt(<sigma| rho |sigma>) for a pure target sigma.
inline double pure_target_fidelity(const CVector& sigma, const CMatrix& rho) {
  return std::sqrt(std::max(0.0, std::real(sigma.dot(rho * sigma))));
}

inline double mean_fidelity(const std::array<CMatrix, 36>& rho, const CMatrix& target,
                            std::array<double, 36>* per_state = nullptr) {
  const auto in = product_inputs();
  double sum = 0.0;
  for (int s = 0; s < 36; ++s) {
    const double f = pure_target_fidelity(target * in[s], rho[s]);
    if (per_state) (*per_state)[s] = f;
    sum += f;
  }
  return sum / 36.0;
}

inline std::array<double, 2> best_virtual_z(const std::array<CMatrix, 36>& rho) {
  const CMatrix cz = ideal_cz();
  auto loss = [&](const Eigen::VectorXd& x) { return -mean_fidelity(rho, virtual_z(x(0), x(1)) * cz); };
  constexpr int kGrid = 24;
  Eigen::VectorXd best = Eigen::VectorXd::Zero(2);
  double best_value = loss(best);
  Eigen::VectorXd x(2);
  for (int i = 0; i < kGrid; ++i)
    for (int j = 0; j < kGrid; ++j) {
      x << kTwoPi * i / kGrid, kTwoPi * j / kGrid;
      const double v = loss(x);
      if (v < best_value) {
        best_value = v;
        best = x;
      }
    }
  const double step = kTwoPi / kGrid / 2;
  const auto nm = nelder_mead(loss, best, Eigen::Vector2d(step, step),
                              {.max_evaluations = 400, .f_tolerance = 1e-14, .x_tolerance = 1e-9});
  return {nm.x(0), nm.x(1)};
}
}  // namespace detail

inline FidelityReport average_fidelity_36(const ChannelOutputs& out, bool use_virtual_z) {
  FidelityReport r;
  r.virtual_z = use_virtual_z;
  if (use_virtual_z) {
    r.z_three_body = detail::best_virtual_z(out.three_body);
    r.z_traced = detail::best_virtual_z(out.traced);
  }
  const CMatrix cz = ideal_cz();
  r.f_three_body = detail::mean_fidelity(out.three_body, virtual_z(r.z_three_body[0], r.z_three_body[1]) * cz,
                                         &r.per_state_three_body);
  r.f_traced =
      detail::mean_fidelity(out.traced, virtual_z(r.z_traced[0], r.z_traced[1]) * cz, &r.per_state_traced);
  return r;
}

// Closed computational-subspace operator (no bus).
inline FidelityReport average_fidelity_36(const CMatrix& u, bool use_virtual_z) {
  if (u.rows() != 4 || u.cols() != 4) throw std::invalid_argument("expected a 4x4 operator");
  return average_fidelity_36(outputs_from_blocks({u}), use_virtual_z);
}

}  // namespace nlc
