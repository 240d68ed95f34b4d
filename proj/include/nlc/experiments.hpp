// End-to-end runs built from a Fixture: spectrum summary,
// gate simulation/calibration and the decoherence budget.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlc/circuit_model.hpp"
#include "nlc/dynamics/fidelity.hpp"
#include "nlc/dynamics/gate.hpp"
#include "nlc/dynamics/open_system.hpp"
#include "nlc/fixture.hpp"
#include "nlc/io.hpp"

namespace nlc {

struct SpectrumReport {
  std::array<FluxoniumSpectrum, 2> qubits;
  std::array<ParityReport, 2> parity;
  ChargeCouplings network_couplings;  // from the capacitance network
  double bus_n_zpf{};
  DispersiveShifts shifts;
  int unlabeled{};
  StaticZZReport zz;
};

inline SpectrumReport run_spectrum(const Fixture& f) {
  SpectrumReport r;
  r.qubits = {fluxonium_spectrum(f.qubit_a.params, f.gate_model.fluxonium_basis, 4),
              fluxonium_spectrum(f.qubit_b.params, f.gate_model.fluxonium_basis, 4)};
  r.parity = {charge_parity_check(f.qubit_a.params), charge_parity_check(f.qubit_b.params)};
  r.network_couplings = couplings_from_capacitance(f.network());
  r.bus_n_zpf = f.bus(f.gate_model).n_zpf;
  const auto spec = dressed_spectrum(f.gate_hamiltonian(f.gate_model));
  r.shifts = dispersive_shifts(spec);
  r.unlabeled = spec.unlabeled_count();
  r.zz = static_zz_report(f.qubit_a.params, f.qubit_b.params, f.bus(f.gate_model), f.zz_couplings(),
                          f.gate_model.options());
  return r;
}

inline io::json to_json(const SpectrumReport& r) {
  io::json q = io::json::array();
  for (int k = 0; k < 2; ++k)
    q.push_back({{"qubit", k == 0 ? "A" : "B"},
                 {"f01_mhz", units::ghz_to_mhz(r.qubits[k].f01())},
                 {"f03_ghz", r.qubits[k].transition(0, 3)},
                 {"f13_ghz", r.qubits[k].transition(1, 3)},
                 {"n01", r.parity[k].n01},
                 {"n03", r.parity[k].n03},
                 {"n13", r.parity[k].n13}});
  return {{"qubits", q},
          {"network", {{"j_c_mhz", r.network_couplings.j_c}, {"j_ab_mhz", r.network_couplings.j_ab},
                       {"bus_n_zpf", r.bus_n_zpf}}},
          {"dispersive", {{"chi_a_mhz", r.shifts.chi_a}, {"chi_b_mhz", r.shifts.chi_b},
                          {"quartet_ghz", r.shifts.quartet}, {"cross_kerr_mhz", r.shifts.cross_kerr},
                          {"unlabeled_states", r.unlabeled}}},
          {"static_zz", {{"zeta_hz", r.zz.zeta}, {"zeta_bus_only_hz", r.zz.zeta_bus_only},
                         {"zeta_direct_only_hz", r.zz.zeta_direct_only},
                         {"cancellation_ratio", r.zz.cancellation_ratio()}}}};
}

// Flat rows for CSV export.
inline std::vector<std::pair<std::string, double>> spectrum_rows(const SpectrumReport& r) {
  return {{"f01_a_mhz", units::ghz_to_mhz(r.qubits[0].f01())},
          {"f01_b_mhz", units::ghz_to_mhz(r.qubits[1].f01())},
          {"f03_a_ghz", r.qubits[0].transition(0, 3)},
          {"f03_b_ghz", r.qubits[1].transition(0, 3)},
          {"j_c_mhz", r.network_couplings.j_c},
          {"j_ab_mhz", r.network_couplings.j_ab},
          {"chi_a_mhz", r.shifts.chi_a},
          {"chi_b_mhz", r.shifts.chi_b},
          {"zeta_hz", r.zz.zeta},
          {"zeta_bus_only_hz", r.zz.zeta_bus_only}};
}

// ---------------------------------------------------------------- gate

struct GateRun {
  int model_dim{};
  DispersiveShifts shifts;
  PulseParameters parameters;
  std::optional<CalibrationResult> calibration;
  GateResult gate;
  FidelityReport fidelity;      // virtual Z on
  FidelityReport fidelity_raw;  // virtual Z off
  DressedSystem system;
  DriveConfig drive;
};

struct GateRequest {
  const ModelSpec* model{};
  std::optional<PulseParameters> parameters;  // frozen pulse, or the calibration start
  bool calibrate{};
};

inline GateRun run_gate(const Fixture& f, const GateRequest& req) {
  const ModelSpec& m = req.model ? *req.model : f.gate_model;
  const auto model = f.gate_hamiltonian(m);
  const auto spec = dressed_spectrum(model);
  GateRun r;
  r.model_dim = model.dim();
  r.shifts = dispersive_shifts(spec);
  r.system = DressedSystem::from(model, spec);
  const GateCalibrator cal(r.system, r.shifts, f.calibration_options());
  if (req.calibrate) {
    r.calibration = cal.calibrate(req.parameters ? *req.parameters : f.start(r.shifts));
    r.parameters = r.calibration->parameters;
    r.drive = r.calibration->drive;
    r.gate = r.calibration->gate;
  } else {
    if (!req.parameters) throw io::ConfigError("/calibrated", "no frozen pulse for this model; use --calibrate");
    r.parameters = *req.parameters;
    r.drive = cal.drive_for(r.parameters);
    r.gate = gate_simulate(r.system, r.drive, f.calibration_options().gate);
  }
  const auto outputs = outputs_from_blocks(r.gate.photon_blocks);
  r.fidelity = average_fidelity_36(outputs, true);
  r.fidelity_raw = average_fidelity_36(outputs, false);
  return r;
}

inline io::json to_json(const PulseParameters& p) { return detail::pulse_json(p); }

inline io::json to_json(const GateRun& r) {
  const auto& g = r.gate;
  io::json j = {
      {"model_dim", r.model_dim},
      {"simulated_dim", g.simulated_dim},
      {"pulse", to_json(r.parameters)},
      {"phases_rad", g.phases},
      {"conditional_phase_rad", g.conditional_phase},
      {"residual_photons", g.residual_photons},
      {"mean_residual_photons", g.mean_residual_photons},
      {"leakage", g.leakage},
      {"leakage_flagged", g.leakage_flagged},
      {"norm_drift", g.norm_drift},
      {"fidelity", {{"three_body", r.fidelity.f_three_body}, {"traced", r.fidelity.f_traced},
                    {"virtual_z_three_body_rad", r.fidelity.z_three_body},
                    {"virtual_z_traced_rad", r.fidelity.z_traced}}},
      {"fidelity_without_virtual_z", {{"three_body", r.fidelity_raw.f_three_body},
                                      {"traced", r.fidelity_raw.f_traced}}}};
  if (r.calibration) {
    j["calibration"] = {{"initial_objective", r.calibration->initial_objective},
                        {"objective", r.calibration->objective},
                        {"evaluations", r.calibration->evaluations},
                        {"met_thresholds", r.calibration->met_thresholds},
                        {"trace", r.calibration->trace}};
  }
  return j;
}

// ---------------------------------------------------------------- budget

struct BudgetRun {
  double eps_q{};
  RelaxationDephasing relaxation;
  GateRun unitary;
  OpenSystemResult open;
  ErrorBudget budget;
};

struct BudgetRequest {
  std::optional<PulseParameters> parameters;
  bool calibrate{};
  std::uint64_t seed{1};
  int n_traj{200};
  bool noiseless{};
};

inline BudgetRun run_budget(const Fixture& f, const BudgetRequest& req) {
  BudgetRun b;
  NoiseModel noise = req.noiseless ? NoiseModel{} : f.noise();
  b.eps_q = req.noiseless ? 0.0 : epsilon_q(f.gate_time_ns, noise.qubit_a, noise.qubit_b);
  b.unitary = run_gate(f, {&f.open_model, req.parameters, req.calibrate});
  b.relaxation = relaxation_dephasing_error(b.unitary.gate, noise.bus_gamma1);
  OpenSystemOptions oo;
  oo.n_traj = req.n_traj;
  oo.seed = req.seed;
  b.open = lindblad_evolve(b.unitary.system, b.unitary.drive, noise, oo);
  b.budget = error_budget(b.eps_q, b.unitary.fidelity.f_traced, b.open.fidelity.f_traced, b.relaxation.error);
  return b;
}

inline io::json to_json(const BudgetRun& b) {
  double jumps = 0;
  for (double v : b.open.jump_fraction) jumps += v / 36.0;
  return {{"pulse", to_json(b.unitary.parameters)},
          {"model_dim", b.unitary.model_dim},
          {"simulated_dim", b.open.simulated_dim},
          {"unitary_traced_fidelity", b.unitary.fidelity.f_traced},
          {"open_traced_fidelity", b.open.fidelity.f_traced},
          {"open_three_body_fidelity", b.open.fidelity.f_three_body},
          {"mean_jump_fraction", jumps},
          {"boundary_population", b.open.boundary_population},
          {"budget", {{"qubit_decoherence", b.budget.qubit_decoherence},
                      {"coherent", b.budget.coherent},
                      {"bus_incoherent", b.budget.bus_incoherent},
                      {"bus_induced", b.budget.bus_induced},
                      {"relaxation_dephasing", b.budget.relaxation_dephasing},
                      {"total", b.budget.total}}}};
}

}  // namespace nlc
