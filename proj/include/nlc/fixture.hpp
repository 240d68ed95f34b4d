// Device/experiment description loaded from JSON and the model
// builders that turn it into circuit, pulse and noise objects.

#pragma once

#include <array>
#include <optional>
#include <string>

#include "nlc/circuit_model.hpp"
#include "nlc/dynamics/open_system.hpp"
#include "nlc/io.hpp"

namespace nlc {

struct QubitDevice {
  FluxoniumParams params;
  double t1_us{};
  double t2_ramsey_us{};
  double t2_echo_us{};
};

struct ModelSpec {
  ModeLevels levels;
  int trunc_dim{};
  int fluxonium_basis{120};

  CompositeOptions options() const { return {levels, trunc_dim, fluxonium_basis}; }
};

enum class DephasingSource { Echo, Ramsey };

struct Fixture {
  std::string name;
  QubitDevice qubit_a, qubit_b;
  double bus_f_ghz{};
  double bus_t1_us{};
  double bus_t2_us{};
  double c_c_ff{};
  double c_c_over_c_f{};
  double c_c_over_c_b{};
  double zz_j_c_mhz{};
  double zz_j_ab_mhz{};
  double gate_j1_mhz{};
  double gate_j2_mhz{};
  ModelSpec gate_model;
  ModelSpec open_model;
  double gate_time_ns{120.0};
  double dt_ns{0.5};
  int ise_iterations{100};
  double start_detuning_mhz{kStartDetuningMhz};
  double start_amplitude{kStartAmplitude};
  std::optional<PulseParameters> calibrated_gate;
  std::optional<PulseParameters> calibrated_open;
  int n_traj{200};
  DephasingSource dephasing_source{DephasingSource::Echo};
  std::string hash;  // of the document after overrides

  CapacitanceNetwork network() const { return {c_c_ff, c_c_ff / c_c_over_c_f, c_c_ff / c_c_over_c_b}; }

  BusParams bus(const ModelSpec& spec) const {
    return {bus_f_ghz, spec.levels.bus, bus_charge_zpf(network().c_b, bus_f_ghz)};
  }

  ChargeCouplings zz_couplings() const {
    ChargeCouplings c;
    c.form = CouplingForm::ChargeCharge;
    c.j_c = zz_j_c_mhz;
    c.j_ab = zz_j_ab_mhz;
    return c;
  }

  ChargeCouplings gate_couplings() const {
    ChargeCouplings c;
    c.form = CouplingForm::ChargeQuadrature;
    c.j1 = gate_j1_mhz;
    c.j2 = gate_j2_mhz;
    return c;
  }

  CompositeModel gate_hamiltonian(const ModelSpec& spec) const {
    return composite_hamiltonian(qubit_a.params, qubit_b.params, bus(spec), gate_couplings(), spec.options());
  }

  QubitCoherence coherence(const QubitDevice& q) const {
    return QubitCoherence::from_t2(q.t1_us, dephasing_source == DephasingSource::Echo ? q.t2_echo_us : q.t2_ramsey_us);
  }

  NoiseModel noise() const {
    NoiseModel n = NoiseModel::from_bus_times(bus_t1_us, bus_t2_us);
    n.qubit_a = coherence(qubit_a);
    n.qubit_b = coherence(qubit_b);
    return n;
  }

  CalibrationOptions calibration_options() const {
    CalibrationOptions o;
    o.gate_time_ns = gate_time_ns;
    o.dt_ns = dt_ns;
    o.ise.iterations = ise_iterations;
    return o;
  }

  PulseParameters start(const DispersiveShifts& shifts) const {
    return standard_start(shifts, start_detuning_mhz, start_amplitude);
  }
};

namespace detail {
inline QubitDevice read_qubit(io::Reader r) {
  QubitDevice q;
  q.params.e_j = r.get<double>("e_j_ghz");
  q.params.e_c = r.get<double>("e_c_ghz");
  q.params.e_l = r.get<double>("e_l_ghz");
  q.params.phi_ext = r.get_or<double>("phi_ext_rad", kPi);
  q.t1_us = r.get<double>("t1_us");
  q.t2_ramsey_us = r.get<double>("t2_ramsey_us");
  q.t2_echo_us = r.get<double>("t2_echo_us");
  r.finish();
  try {
    q.params.validate();
  } catch (const std::invalid_argument& e) {
    throw io::ConfigError(r.path(), e.what());
  }
  return q;
}

inline ModelSpec read_model(io::Reader r) {
  ModelSpec m;
  const auto lv = r.get<std::array<int, 3>>("levels");
  m.levels = {lv[0], lv[1], lv[2]};
  m.trunc_dim = r.get<int>("trunc_dim");
  m.fluxonium_basis = r.get_or<int>("fluxonium_basis", 120);
  r.finish();
  if (lv[0] < 2 || lv[1] < 2 || lv[2] < 2) throw io::ConfigError(r.path() + "/levels", "need >= 2 levels per mode");
  if (m.trunc_dim < 4 || m.trunc_dim > m.levels.product())
    throw io::ConfigError(r.path() + "/trunc_dim", "must lie in [4, product of levels]");
  return m;
}

inline PulseParameters read_pulse(io::Reader r) {
  PulseParameters p;
  p.amplitude = r.get<double>("amplitude");
  p.f_drive = r.get<double>("f_drive_ghz");
  p.notch_offset_mhz = r.get<std::array<double, 4>>("notch_offset_mhz");
  r.finish();
  return p;
}

inline io::json pulse_json(const PulseParameters& p) {
  return {{"amplitude", p.amplitude}, {"f_drive_ghz", p.f_drive}, {"notch_offset_mhz", p.notch_offset_mhz}};
}
}  // namespace detail

inline Fixture parse_fixture(const io::json& doc) {
  io::Reader r(doc, "");
  Fixture f;
  f.name = r.get_or<std::string>("name", "fixture");
  f.qubit_a = detail::read_qubit(r.child("fluxonium_a"));
  f.qubit_b = detail::read_qubit(r.child("fluxonium_b"));
  {
    auto b = r.child("bus");
    f.bus_f_ghz = b.get<double>("f_b_ghz");
    f.bus_t1_us = b.get<double>("t1_us");
    f.bus_t2_us = b.get<double>("t2_us");
    b.finish();
    if (!(f.bus_f_ghz > 0)) throw io::ConfigError("/bus/f_b_ghz", "must be positive");
    if (!(f.bus_t1_us > 0) || !(f.bus_t2_us > 0) || f.bus_t2_us > 2 * f.bus_t1_us)
      throw io::ConfigError("/bus", "need 0 < T2 <= 2 T1");
  }
  {
    auto c = r.child("capacitance");
    f.c_c_ff = c.get<double>("c_c_ff");
    f.c_c_over_c_f = c.get<double>("c_c_over_c_f");
    f.c_c_over_c_b = c.get<double>("c_c_over_c_b");
    c.finish();
    if (!(f.c_c_ff > 0) || !(f.c_c_over_c_f > 0) || !(f.c_c_over_c_b > 0))
      throw io::ConfigError("/capacitance", "values must be positive");
  }
  {
    auto z = r.child("zz_couplings");
    f.zz_j_c_mhz = z.get<double>("j_c_mhz");
    f.zz_j_ab_mhz = z.get<double>("j_ab_mhz");
    z.finish();
  }
  {
    auto g = r.child("gate_couplings");
    f.gate_j1_mhz = g.get<double>("j1_mhz");
    f.gate_j2_mhz = g.get<double>("j2_mhz");
    g.finish();
  }
  f.gate_model = detail::read_model(r.child("gate_model"));
  f.open_model = detail::read_model(r.child("open_model"));
  {
    auto p = r.child("pulse");
    f.gate_time_ns = p.get<double>("gate_time_ns");
    f.dt_ns = p.get<double>("dt_ns");
    f.ise_iterations = p.get<int>("ise_iterations");
    f.start_detuning_mhz = p.get_or<double>("start_detuning_mhz", kStartDetuningMhz);
    f.start_amplitude = p.get_or<double>("start_amplitude", kStartAmplitude);
    p.finish();
    if (!(f.gate_time_ns > 0) || !(f.dt_ns > 0) || f.ise_iterations < 0)
      throw io::ConfigError("/pulse", "gate time and step must be positive");
  }
  if (r.has("calibrated")) {
    auto c = r.child("calibrated");
    if (c.has("gate_model")) f.calibrated_gate = detail::read_pulse(c.child("gate_model"));
    if (c.has("open_model")) f.calibrated_open = detail::read_pulse(c.child("open_model"));
    c.finish();
  }
  {
    auto o = r.child("open_system");
    f.n_traj = o.get<int>("n_traj");
    const auto src = o.get_or<std::string>("qubit_dephasing", "echo");
    o.finish();
    if (f.n_traj < 1) throw io::ConfigError("/open_system/n_traj", "must be >= 1");
    if (src == "echo") f.dephasing_source = DephasingSource::Echo;
    else if (src == "ramsey") f.dephasing_source = DephasingSource::Ramsey;
    else throw io::ConfigError("/open_system/qubit_dephasing", "expected echo or ramsey");
  }
  r.finish();
  f.hash = io::hex64(io::fnv1a(doc.dump()));
  return f;
}

inline Fixture load_fixture(const std::filesystem::path& p, const std::vector<std::string>& overrides = {}) {
  io::json doc = io::parse_json(io::read_text(p), p.string());
  for (const auto& o : overrides) io::apply_override(doc, o);
  return parse_fixture(doc);
}

}  // namespace nlc
