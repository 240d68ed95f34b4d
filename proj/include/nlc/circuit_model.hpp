// Fluxonium, bus and composite Hamiltonians.
//
// Conventions:
//   H_f = 4 E_C n^2 - E_J cos(phi) + E_L (phi - phi_ext)^2 / 2
// diagonalized in the harmonic basis of the (E_C, E_L) oscillator. The charge
// operator is purely imaginary in any real eigenbasis, so it is stored as the
// real antisymmetric matrix N with n = i N.
//
// The bus quadrature used for coupling is i(a^dag - a). Two coupling forms:
//   charge-quadrature:  i J_1 n_A (a^dag - a) + i J_2 n_B (a^dag - a)
//   charge-charge:      J_c n_A n_b + J_c n_B n_b + J_AB n_A n_B,
//                       n_b = n_zpf i(a^dag - a)
// Energies are GHz (h = 1); couplings are given in MHz.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nlc/units.hpp"

namespace nlc {

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double value, double doubled)
      : std::runtime_error(what), value_(value), doubled_(doubled) {}
  double value() const { return value_; }
  double doubled_value() const { return doubled_; }

 private:
  double value_;
  double doubled_;
};

class ModelError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FluxoniumParams {
  double e_j{};             // GHz
  double e_c{};             // GHz
  double e_l{};             // GHz
  double phi_ext{kPi};      // rad; pi is the half-flux sweet spot

  void validate() const {
    if (!(e_j > 0) || !(e_c > 0) || !(e_l > 0))
      throw std::invalid_argument("fluxonium energies must be positive");
    if (!std::isfinite(phi_ext)) throw std::invalid_argument("phi_ext must be finite");
  }
};

struct BusParams {
  double f_b{};        // bare bus frequency, GHz
  int dim{30};         // retained Fock levels
  double n_zpf{1.0};   // charge zero-point amplitude, used by the charge-charge form

  void validate() const {
    if (!(f_b > 0)) throw std::invalid_argument("bus frequency must be positive");
    if (dim < 2) throw std::invalid_argument("bus needs at least 2 levels");
  }
};

enum class CouplingForm { ChargeCharge, ChargeQuadrature };

struct ChargeCouplings {
  double j_c{};    // MHz
  double j_ab{};   // MHz
  double j1{};     // MHz
  double j2{};     // MHz
  CouplingForm form{CouplingForm::ChargeQuadrature};

  void validate() const {
    for (double v : {j_c, j_ab, j1, j2})
      if (!std::isfinite(v)) throw std::invalid_argument("coupling must be finite");
  }
  // Effective qubit-bus strengths (MHz) multiplying N_f (x) (a^dag - a).
  double bus_coupling_a(double n_zpf) const {
    return form == CouplingForm::ChargeQuadrature ? j1 : j_c * n_zpf;
  }
  double bus_coupling_b(double n_zpf) const {
    return form == CouplingForm::ChargeQuadrature ? j2 : j_c * n_zpf;
  }
  double direct_coupling() const { return form == CouplingForm::ChargeCharge ? j_ab : 0.0; }
};

struct CapacitanceNetwork {
  double c_c{};  // fF
  double c_f{};  // fF
  double c_b{};  // fF

  // Leading-order expressions need c_b, c_f >> c_c; second-order terms stay below ~4% at a 5x margin.
  bool weak_coupling_ok() const { return c_c == 0.0 || (c_b / c_c >= 5.0 && c_f / c_c >= 5.0); }
  void validate() const {
    if (c_c < 0 || !(c_f > 0) || !(c_b > 0))
      throw std::invalid_argument("capacitances must be positive (c_c may be zero)");
  }
};

// ---------------------------------------------------------------------------
// Single fluxonium

struct FluxoniumSpectrum {
  Eigen::VectorXd energies;  // GHz, relative to the ground state
  Eigen::MatrixXd charge;    // N with <i|n|j> = i N_ij
  int basis_dim{};

  double transition(int i, int j) const { return energies(j) - energies(i); }
  double f01() const { return transition(0, 1); }
  double charge_element(int i, int j) const { return std::abs(charge(i, j)); }
};

namespace detail {

inline FluxoniumSpectrum diagonalize_fluxonium(const FluxoniumParams& p, int basis_dim, int n_levels) {
  const int n = basis_dim;
  const double phi_zpf = std::pow(8.0 * p.e_c / p.e_l, 0.25);
  const double omega = std::sqrt(8.0 * p.e_c * p.e_l);

  // Position X = (a + a^dag)/sqrt(2); its eigenvectors give the Gauss-Hermite
  // quadrature used to evaluate cos(phi_zpf X + phi_ext).
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);  // (a^dag - a)/sqrt(2)
  for (int k = 0; k + 1 < n; ++k) {
    const double s = std::sqrt((k + 1) / 2.0);
    x(k, k + 1) = x(k + 1, k) = s;
    q(k + 1, k) = s;
    q(k, k + 1) = -s;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> xs(x);
  const Eigen::VectorXd cos_nodes =
      (phi_zpf * xs.eigenvalues().array() + p.phi_ext).cos().matrix();
  Eigen::MatrixXd h = -p.e_j * xs.eigenvectors() * cos_nodes.asDiagonal() *
                      xs.eigenvectors().transpose();
  for (int k = 0; k < n; ++k) h(k, k) += omega * (k + 0.5);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) throw ModelError("fluxonium diagonalization failed");
  const Eigen::MatrixXd v = es.eigenvectors().leftCols(n_levels);

  FluxoniumSpectrum out;
  out.basis_dim = basis_dim;
  out.energies = es.eigenvalues().head(n_levels).array() - es.eigenvalues()(0);
  out.charge = v.transpose() * (q / phi_zpf) * v;
  // Fix eigenvector signs so that the first nonzero charge element in each
  // row below the diagonal is positive: a deterministic gauge.
  for (int i = 1; i < n_levels; ++i) {
    for (int j = 0; j < i; ++j) {
      if (std::abs(out.charge(i, j)) > 1e-9) {
        if (out.charge(i, j) < 0) {
          out.charge.row(i) *= -1.0;
          out.charge.col(i) *= -1.0;
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace detail

inline constexpr double kFluxoniumConvergenceGhz = 1e-6;  // 1 kHz

// Lowest n_levels eigenenergies and charge matrix elements. When
// check_convergence is set the calculation is repeated at twice the basis
// size and every returned level must agree within 1 kHz.
inline FluxoniumSpectrum fluxonium_spectrum(const FluxoniumParams& params, int basis_dim = 120,
                                            int n_levels = 8, bool check_convergence = true) {
  params.validate();
  if (basis_dim < 60) throw std::invalid_argument("fluxonium basis_dim must be >= 60");
  if (n_levels < 2 || n_levels > basis_dim) throw std::invalid_argument("bad n_levels");
  auto spec = detail::diagonalize_fluxonium(params, basis_dim, n_levels);
  if (check_convergence) {
    const auto doubled = detail::diagonalize_fluxonium(params, 2 * basis_dim, n_levels);
    for (int k = 1; k < n_levels; ++k) {
      if (std::abs(doubled.energies(k) - spec.energies(k)) > kFluxoniumConvergenceGhz) {
        std::ostringstream os;
        os << "fluxonium level " << k << " not converged: " << spec.energies(k) << " GHz at basis "
           << basis_dim << " vs " << doubled.energies(k) << " GHz at basis " << 2 * basis_dim;
        throw ConvergenceError(os.str(), spec.energies(k), doubled.energies(k));
      }
    }
  }
  return spec;
}

struct ParityReport {
  double n01{}, n03{}, n13{};
  double ratio_13_to_03{};
  bool selection_rule_holds{};
};

inline ParityReport charge_parity_check(const FluxoniumParams& params, int basis_dim = 120) {
  if (std::abs(std::remainder(params.phi_ext - kPi, kTwoPi)) > 1e-12)
    throw std::invalid_argument("parity check requires phi_ext = pi");
  const auto s = fluxonium_spectrum(params, basis_dim, 4);
  ParityReport r;
  r.n01 = s.charge_element(0, 1);
  r.n03 = s.charge_element(0, 3);
  r.n13 = s.charge_element(1, 3);
  r.ratio_13_to_03 = r.n03 > 0 ? r.n13 / r.n03 : INFINITY;
  r.selection_rule_holds = r.n03 > 0 && r.n01 > 0 && r.n13 < 1e-6 * r.n03;
  if (!r.selection_rule_holds)
    throw ModelError("charge parity selection rule violated at the sweet spot");
  return r;
}

// ---------------------------------------------------------------------------
// Capacitance network

// e^2 / (h * 1 fF) in GHz.
inline double charging_unit_ghz() {
  using namespace constants;
  return elementary_charge * elementary_charge / (planck * units::femto) / units::hz_per_ghz;
}

// J_c = 4e^2 C_c/(C_b C_f), J_AB = 4e^2 C_c^2/(C_b C_f^2), returned in MHz.
inline ChargeCouplings couplings_from_capacitance(const CapacitanceNetwork& net) {
  net.validate();
  ChargeCouplings c;
  c.form = CouplingForm::ChargeCharge;
  const double unit_mhz = 4.0 * charging_unit_ghz() * units::mhz_per_ghz;
  c.j_c = unit_mhz * net.c_c / (net.c_b * net.c_f);
  c.j_ab = c.j_c * net.c_c / net.c_f;
  return c;
}

// Zero-point charge amplitude (Cooper pairs) of a resonator mode.
inline double bus_charge_zpf(double c_b_ff, double f_b_ghz) {
  using namespace constants;
  const double energy = planck * f_b_ghz * units::hz_per_ghz;
  return std::sqrt(energy * c_b_ff * units::femto / 2.0) / (2.0 * elementary_charge);
}

// ---------------------------------------------------------------------------
// Composite model

struct BareLabel {
  int a{}, b{}, n{};
  auto operator<=>(const BareLabel&) const = default;
  bool computational() const { return a <= 1 && b <= 1; }
};

inline std::string to_string(const BareLabel& l) {
  std::ostringstream os;
  os << '|' << l.a << ',' << l.b << ',' << l.n << '>';
  return os.str();
}

struct ModeLevels {
  int qubit_a{8};
  int qubit_b{8};
  int bus{30};
  int product() const { return qubit_a * qubit_b * bus; }
};

// Computational order used everywhere: gg, ge, eg, ee (first letter = qubit A).
inline constexpr std::array<std::array<int, 2>, 4> kComputational{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};

struct CompositeModel {
  FluxoniumSpectrum qubit_a, qubit_b;
  BusParams bus;
  ChargeCouplings couplings;
  ModeLevels levels;
  std::vector<BareLabel> basis;   // retained product states, ascending bare energy
  Eigen::VectorXd bare_energies;  // GHz
  Eigen::MatrixXd hamiltonian;    // GHz, real symmetric
  Eigen::MatrixXd bus_lowering;   // a restricted to the retained states

  int dim() const { return static_cast<int>(basis.size()); }
  int index_of(const BareLabel& l) const {
    auto it = index_.find(l);
    return it == index_.end() ? -1 : it->second;
  }
  void rebuild_index() {
    index_.clear();
    for (int i = 0; i < dim(); ++i) index_[basis[i]] = i;
  }

 private:
  std::map<BareLabel, int> index_;
};

struct CompositeOptions {
  ModeLevels levels{};
  int trunc_dim{800};
  int fluxonium_basis{120};
};

inline CompositeModel composite_hamiltonian(const FluxoniumParams& qa, const FluxoniumParams& qb,
                                            const BusParams& bus, const ChargeCouplings& c,
                                            const CompositeOptions& opt = {}) {
  bus.validate();
  c.validate();
  const auto& lv = opt.levels;
  if (lv.qubit_a < 2 || lv.qubit_b < 2) throw std::invalid_argument("need >= 2 qubit levels");
  if (lv.bus != bus.dim) throw std::invalid_argument("bus levels disagree with BusParams::dim");
  if (opt.trunc_dim < 1 || opt.trunc_dim > lv.product())
    throw std::invalid_argument("trunc_dim must lie in [1, product of retained levels]");

  CompositeModel m;
  m.qubit_a = fluxonium_spectrum(qa, opt.fluxonium_basis, lv.qubit_a);
  m.qubit_b = fluxonium_spectrum(qb, opt.fluxonium_basis, lv.qubit_b);
  m.bus = bus;
  m.couplings = c;
  m.levels = lv;

  std::vector<std::pair<double, BareLabel>> all;
  all.reserve(lv.product());
  for (int a = 0; a < lv.qubit_a; ++a)
    for (int b = 0; b < lv.qubit_b; ++b)
      for (int n = 0; n < lv.bus; ++n)
        all.push_back({m.qubit_a.energies(a) + m.qubit_b.energies(b) + bus.f_b * n, {a, b, n}});
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  all.resize(opt.trunc_dim);
  // Bare energy ties are broken by label so the basis order is deterministic.
  std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    return x.first < y.first || (x.first == y.first && x.second < y.second);
  });

  const int d = opt.trunc_dim;
  m.basis.resize(d);
  m.bare_energies.resize(d);
  for (int i = 0; i < d; ++i) {
    m.basis[i] = all[i].second;
    m.bare_energies(i) = all[i].first;
  }
  m.rebuild_index();

  for (auto [ia, ib] : kComputational)
    for (int n = 0; n <= 1; ++n)
      if (m.index_of({ia, ib, n}) < 0)
        throw ModelError("trunc_dim too small: " + to_string({ia, ib, n}) + " not retained");

  const double ga = units::mhz_to_ghz(c.bus_coupling_a(bus.n_zpf));
  const double gb = units::mhz_to_ghz(c.bus_coupling_b(bus.n_zpf));
  const double jab = units::mhz_to_ghz(c.direct_coupling());
  const auto& na = m.qubit_a.charge;
  const auto& nb = m.qubit_b.charge;

  m.hamiltonian = m.bare_energies.asDiagonal();
  m.bus_lowering = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const auto [a, b, n] = m.basis[i];
    // (a^dag - a)|n> has components sqrt(n+1)|n+1> and -sqrt(n)|n-1>.
    for (int dn : {+1, -1}) {
      const int n2 = n + dn;
      if (n2 < 0 || n2 >= lv.bus) continue;
      const double q = dn > 0 ? std::sqrt(n + 1.0) : -std::sqrt(static_cast<double>(n));
      if (dn < 0) {
        const int j = m.index_of({a, b, n2});
        if (j >= 0) m.bus_lowering(j, i) = std::sqrt(static_cast<double>(n));
      }
      for (int a2 = 0; a2 < lv.qubit_a; ++a2) {
        if (ga == 0.0 || na(a2, a) == 0.0) continue;
        const int j = m.index_of({a2, b, n2});
        if (j >= 0) m.hamiltonian(j, i) += -ga * na(a2, a) * q;
      }
      for (int b2 = 0; b2 < lv.qubit_b; ++b2) {
        if (gb == 0.0 || nb(b2, b) == 0.0) continue;
        const int j = m.index_of({a, b2, n2});
        if (j >= 0) m.hamiltonian(j, i) += -gb * nb(b2, b) * q;
      }
    }
    if (jab != 0.0) {
      for (int a2 = 0; a2 < lv.qubit_a; ++a2)
        for (int b2 = 0; b2 < lv.qubit_b; ++b2) {
          const double v = na(a2, a) * nb(b2, b);
          if (v == 0.0) continue;
          const int j = m.index_of({a2, b2, n});
          if (j >= 0) m.hamiltonian(j, i) += -jab * v;
        }
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Dressed spectrum

inline constexpr double kLabelThreshold = 0.5;

struct SpectrumResult {
  Eigen::VectorXd energies;                 // GHz, ascending, absolute
  Eigen::MatrixXd vectors;                  // columns are dressed states in the bare basis
  std::vector<std::optional<BareLabel>> labels;
  std::vector<BareLabel> dominant;          // max-overlap bare state, even when ambiguous
  Eigen::VectorXd overlaps;                 // squared overlap with the dominant bare state

  int dim() const { return static_cast<int>(energies.size()); }
  int index_of(const BareLabel& l) const {
    auto it = by_label_.find(l);
    return it == by_label_.end() ? -1 : it->second;
  }
  double energy_of(const BareLabel& l) const {
    const int i = index_of(l);
    if (i < 0) throw ModelError("no dressed state labeled " + to_string(l));
    return energies(i);
  }
  int unlabeled_count() const {
    return static_cast<int>(std::count(labels.begin(), labels.end(), std::nullopt));
  }
  void rebuild_index() {
    by_label_.clear();
    for (int i = 0; i < dim(); ++i)
      if (labels[i]) by_label_[*labels[i]] = i;
  }

 private:
  std::map<BareLabel, int> by_label_;
};

// Diagonalizes the model and labels each eigenstate with the bare product
// state of largest squared overlap, greedily in decreasing overlap order.
// States whose best overlap is below one half are left unlabeled.
inline SpectrumResult dressed_spectrum(const CompositeModel& model) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.hamiltonian);
  if (es.info() != Eigen::Success) throw ModelError("composite diagonalization failed");
  SpectrumResult r;
  r.energies = es.eigenvalues();
  r.vectors = es.eigenvectors();
  const int d = model.dim();
  r.labels.assign(d, std::nullopt);
  r.dominant.resize(d);
  r.overlaps.resize(d);

  struct Candidate {
    double overlap;
    int state;
    int bare;
  };
  std::vector<Candidate> candidates;
  for (int s = 0; s < d; ++s) {
    Eigen::Index best = 0;
    const double ov = r.vectors.col(s).cwiseAbs2().maxCoeff(&best);
    r.dominant[s] = model.basis[best];
    r.overlaps(s) = ov;
    // Fix the eigenvector sign: dominant component positive.
    if (r.vectors(best, s) < 0) r.vectors.col(s) *= -1.0;
    for (int b = 0; b < d; ++b) {
      const double o = r.vectors(b, s) * r.vectors(b, s);
      if (o >= kLabelThreshold) candidates.push_back({o, s, b});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& x, const Candidate& y) { return x.overlap > y.overlap; });
  std::vector<char> bare_used(d, 0);
  for (const auto& c : candidates) {
    if (r.labels[c.state] || bare_used[c.bare]) continue;
    r.labels[c.state] = model.basis[c.bare];
    bare_used[c.bare] = 1;
  }
  r.rebuild_index();
  return r;
}

// ---------------------------------------------------------------------------
// Dispersive shifts and static ZZ

struct DispersiveShifts {
  double chi_a{};                    // MHz, f_bus|eg - f_bus|gg
  double chi_b{};                    // MHz, f_bus|ge - f_bus|gg
  std::array<double, 4> quartet{};   // GHz, order gg, ge, eg, ee
  double cross_kerr{};               // MHz, f_ee - f_gg - chi_a - chi_b

  bool additive_within(double tol_mhz) const { return std::abs(cross_kerr) <= tol_mhz; }
};

inline DispersiveShifts dispersive_shifts(const SpectrumResult& spec) {
  DispersiveShifts d;
  for (int k = 0; k < 4; ++k) {
    const auto [a, b] = kComputational[k];
    d.quartet[k] = spec.energy_of({a, b, 1}) - spec.energy_of({a, b, 0});
  }
  d.chi_a = units::ghz_to_mhz(d.quartet[2] - d.quartet[0]);
  d.chi_b = units::ghz_to_mhz(d.quartet[1] - d.quartet[0]);
  d.cross_kerr = units::ghz_to_mhz(d.quartet[3] - d.quartet[0]) - d.chi_a - d.chi_b;
  return d;
}

// zeta = (E_ee - E_eg - E_ge + E_gg)/h in Hz.
inline double static_zz(const SpectrumResult& spec) {
  const double z = spec.energy_of({1, 1, 0}) - spec.energy_of({1, 0, 0}) -
                   spec.energy_of({0, 1, 0}) + spec.energy_of({0, 0, 0});
  return units::ghz_to_hz(z);
}

struct StaticZZReport {
  double zeta{};             // Hz, full couplings
  double zeta_bus_only{};    // Hz, j_ab = 0
  double zeta_direct_only{}; // Hz, j_c = 0
  double interference() const { return zeta - zeta_bus_only - zeta_direct_only; }
  double cancellation_ratio() const {
    return zeta == 0.0 ? INFINITY : std::abs(zeta_bus_only) / std::abs(zeta);
  }
};

// Runs the full model plus the two single-path variants.
inline StaticZZReport static_zz_report(const FluxoniumParams& qa, const FluxoniumParams& qb,
                                       const BusParams& bus, const ChargeCouplings& c,
                                       const CompositeOptions& opt = {}) {
  auto run = [&](const ChargeCouplings& cc) {
    return static_zz(dressed_spectrum(composite_hamiltonian(qa, qb, bus, cc, opt)));
  };
  StaticZZReport r;
  r.zeta = run(c);
  auto bus_only = c;
  bus_only.j_ab = 0.0;
  r.zeta_bus_only = run(bus_only);
  auto direct_only = c;
  direct_only.j_c = direct_only.j1 = direct_only.j2 = 0.0;
  r.zeta_direct_only = run(direct_only);
  return r;
}

}  // namespace nlc
