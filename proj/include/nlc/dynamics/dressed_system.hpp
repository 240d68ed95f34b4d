// The composite model expressed in its dressed eigenbasis.

#pragma once

#include <algorithm>
#include <cmath>
#include <array>
#include <deque>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nlc/circuit_model.hpp"

namespace nlc {

struct DressedSystem {
  Eigen::VectorXd energies;        // GHz, relative to the dressed ground state
  std::vector<BareLabel> labels;   // dominant bare label of each dressed state
  Eigen::VectorXi photons;         // bus label n of each dressed state
  Eigen::MatrixXd lowering;        // bus a in the dressed basis
  std::array<int, 4> computational{};  // |gg0>, |ge0>, |eg0>, |ee0>
  std::vector<int> source_index;   // position in the originating spectrum
  double bare_bus_frequency{};     // GHz

  int dim() const { return static_cast<int>(energies.size()); }
  bool qubit_computational(int k) const { return labels[k].computational(); }

  Eigen::MatrixXd quadrature() const { return lowering + lowering.transpose(); }
  Eigen::MatrixXd number_operator() const { return lowering.transpose() * lowering; }

  // Subsystem on the given dressed states (order preserved as given).
  DressedSystem restricted(const std::vector<int>& keep) const {
    DressedSystem r;
    const auto n = static_cast<int>(keep.size());
    r.energies.resize(n);
    r.photons.resize(n);
    r.lowering.resize(n, n);
    r.labels.resize(n);
    r.source_index.resize(n);
    r.bare_bus_frequency = bare_bus_frequency;
    for (int i = 0; i < n; ++i) {
      r.energies(i) = energies(keep[i]);
      r.photons(i) = photons(keep[i]);
      r.labels[i] = labels[keep[i]];
      r.source_index[i] = source_index[keep[i]];
      for (int j = 0; j < n; ++j) r.lowering(i, j) = lowering(keep[i], keep[j]);
    }
    for (int c = 0; c < 4; ++c) {
      auto it = std::find(keep.begin(), keep.end(), computational[c]);
      if (it == keep.end()) throw std::invalid_argument("restriction drops a computational state");
      r.computational[c] = static_cast<int>(it - keep.begin());
    }
    return r;
  }

  // Dressed states connected to the computational vacuum states through
  // single-photon steps of the bus quadrature with |matrix element| > threshold.
  std::vector<int> reachable(double threshold = 1e-8) const {
    const Eigen::MatrixXd x = quadrature();
    std::vector<char> seen(dim(), 0);
    std::deque<int> queue;
    for (int c : computational) {
      seen[c] = 1;
      queue.push_back(c);
    }
    while (!queue.empty()) {
      const int k = queue.front();
      queue.pop_front();
      for (int l = 0; l < dim(); ++l) {
        if (seen[l] || std::abs(photons(k) - photons(l)) != 1) continue;
        if (std::abs(x(l, k)) > threshold) {
          seen[l] = 1;
          queue.push_back(l);
        }
      }
    }
    std::vector<int> out;
    for (int k = 0; k < dim(); ++k)
      if (seen[k]) out.push_back(k);
    return out;
  }

  static DressedSystem from(const CompositeModel& model, const SpectrumResult& spec) {
    DressedSystem s;
    const int d = spec.dim();
    s.energies = spec.energies.array() - spec.energies(0);
    s.labels = spec.dominant;
    s.photons.resize(d);
    for (int k = 0; k < d; ++k) s.photons(k) = s.labels[k].n;
    s.lowering = spec.vectors.transpose() * model.bus_lowering * spec.vectors;
    s.source_index.resize(d);
    for (int k = 0; k < d; ++k) s.source_index[k] = k;
    for (int c = 0; c < 4; ++c) {
      const auto [a, b] = kComputational[c];
      const int k = spec.index_of({a, b, 0});
      if (k < 0) throw ModelError("computational state not labeled in the dressed spectrum");
      s.computational[c] = k;
    }
    s.bare_bus_frequency = model.bus.f_b;
    return s;
  }
};

// Two two-level qubits dispersively coupled to a Kerr oscillator, already
// diagonal: E = a f_a + b f_b + n (f_bus + chi_a a + chi_b b) + kerr n (n - 1) / 2.
struct ToySpec {
  double f_a{0.35};
  double f_b{0.27};
  double f_bus{5.4};
  double chi_a{0.0};  // GHz
  double chi_b{0.0};  // GHz
  double kerr{0.0};   // GHz
  int n_max{8};
};

inline DressedSystem toy_dispersive_system(const ToySpec& t) {
  if (t.n_max < 1) throw std::invalid_argument("toy oscillator needs at least two levels");
  DressedSystem s;
  const int levels = t.n_max + 1;
  const int d = 4 * levels;
  s.energies.resize(d);
  s.photons.resize(d);
  s.labels.resize(d);
  s.source_index.resize(d);
  s.lowering = Eigen::MatrixXd::Zero(d, d);
  s.bare_bus_frequency = t.f_bus;
  auto idx = [&](int q, int n) { return q * levels + n; };
  for (int q = 0; q < 4; ++q) {
    const int a = q / 2, b = q % 2;
    for (int n = 0; n < levels; ++n) {
      const int k = idx(q, n);
      s.energies(k) = a * t.f_a + b * t.f_b + n * (t.f_bus + t.chi_a * a + t.chi_b * b) + 0.5 * t.kerr * n * (n - 1);
      s.photons(k) = n;
      s.labels[k] = {a, b, n};
      s.source_index[k] = k;
      if (n > 0) s.lowering(idx(q, n - 1), k) = std::sqrt(static_cast<double>(n));
    }
    s.computational[q] = idx(q, 0);
  }
  return s;
}

}  // namespace nlc
