// Command-line driver: spectrum, gate, budget, beat, analyze, synth.
// Exit codes: 0 ok, 2 configuration/data error, 3 numerical failure.

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlc/beat_topology.hpp"
#include "nlc/calibration_analysis.hpp"
#include "nlc/experiments.hpp"
#include "nlc/fixture.hpp"
#include "nlc/io.hpp"

namespace fs = std::filesystem;
using nlc::io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string fixture{"fixtures/device.json"};
  std::string manifest;
  std::uint64_t seed{1};
  std::string out{"out"};
  std::vector<std::string> overrides;
  int threads{1};
  std::string command;
};

nlc::io::RunManifest run_manifest(const Common& c) {
  nlc::io::RunManifest m;
  m.experiment = c.command;
  m.fixture_path = c.fixture;
  m.seed = c.seed;
  m.output_dir = c.out;
  m.threads = c.threads;
  for (const auto& o : c.overrides) {
    const auto eq = o.find('=');
    m.overrides[o.substr(0, eq)] = eq == std::string::npos ? "" : o.substr(eq + 1);
  }
  return m;
}

struct Outputs {
  fs::path dir;
  std::map<std::string, std::string> files;

  void add(const std::string& name, std::string text) { files[name] = std::move(text); }
  void add(const std::string& name, const json& j) { files[name] = j.dump(2) + "\n"; }
  void flush() const {
    for (const auto& [name, text] : files) nlc::io::write_text(dir / name, text);
  }
};

std::string rows_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  return os.str();
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

json envelope(const Common& c, const std::string& command, const std::string& fixture_hash, json result) {
  return {{"command", command},
          {"provenance", nlc::io::provenance(fixture_hash, c.seed)},
          {"manifest", run_manifest(c).to_json()},
          {"result", std::move(result)}};
}

nlc::Fixture fixture(const Common& c) { return nlc::load_fixture(c.fixture, c.overrides); }

// ---------------------------------------------------------------- spectrum

int cmd_spectrum(const Common& c) {
  const auto f = fixture(c);
  const auto r = nlc::run_spectrum(f);
  Outputs out{c.out};
  out.add("manifest.json", run_manifest(c).to_json());
  out.add("spectrum.json", envelope(c, "spectrum", f.hash, nlc::to_json(r)));
  std::vector<std::vector<std::string>> rows;
  for (const auto& [k, v] : nlc::spectrum_rows(r)) rows.push_back({k, num(v)});
  out.add("spectrum.csv", rows_csv({"quantity", "value"}, rows));
  out.flush();
  std::cout << "chi_a " << r.shifts.chi_a << " MHz, chi_b " << r.shifts.chi_b << " MHz, zeta " << r.zz.zeta
            << " Hz\n";
  return kExitOk;
}

// ---------------------------------------------------------------- gate

int cmd_gate(const Common& c, bool calibrate, const std::string& which) {
  const auto f = fixture(c);
  const bool open = which == "open";
  const auto frozen = open ? f.calibrated_open : f.calibrated_gate;
  const auto r = nlc::run_gate(f, {open ? &f.open_model : &f.gate_model, calibrate ? std::nullopt : frozen, calibrate});
  Outputs out{c.out};
  out.add("manifest.json", run_manifest(c).to_json());
  out.add("gate.json", envelope(c, "gate", f.hash, nlc::to_json(r)));
  std::vector<std::vector<std::string>> rows;
  const auto& tr = r.gate.trajectory;
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    rows.push_back({num(tr.times[i]), num(tr.photons(i, 0)), num(tr.photons(i, 1)), num(tr.photons(i, 2)),
                    num(tr.photons(i, 3))});
  out.add("gate_photons.csv", rows_csv({"t_ns", "n_gg", "n_ge", "n_eg", "n_ee"}, rows));
  out.flush();
  std::cout << "phi_c " << r.gate.conditional_phase << " rad, photons " << r.gate.mean_residual_photons
            << ", F3 " << r.fidelity.f_three_body << ", Ftr " << r.fidelity.f_traced << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- budget

int cmd_budget(const Common& c, bool calibrate, int n_traj, bool noiseless) {
  const auto f = fixture(c);
  nlc::BudgetRequest req;
  req.parameters = calibrate ? std::nullopt : f.calibrated_open;
  req.calibrate = calibrate;
  req.seed = c.seed;
  req.n_traj = n_traj > 0 ? n_traj : f.n_traj;
  req.noiseless = noiseless;
  const auto b = nlc::run_budget(f, req);
  Outputs out{c.out};
  out.add("manifest.json", run_manifest(c).to_json());
  out.add("budget.json", envelope(c, "budget", f.hash, nlc::to_json(b)));
  out.add("budget.csv", rows_csv({"term", "error"}, {{"qubit_decoherence", num(b.budget.qubit_decoherence)},
                                                      {"bus_induced", num(b.budget.bus_induced)},
                                                      {"total", num(b.budget.total)}}));
  out.flush();
  std::cout << "eps_Q " << b.eps_q << ", open traced F " << b.open.fidelity.f_traced << ", total "
            << b.budget.total << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- beat

nlc::beat::ConnectivityGraph layout(const std::string& kind, int L, int rows) {
  namespace bt = nlc::beat;
  if (kind == "beat") return bt::beat_graph(bt::build_tree(L), true);
  if (kind == "tree") return bt::beat_graph(bt::build_tree(L), false);
  if (kind == "chain") return bt::chain_graph((std::int64_t{1} << L) - 1);
  if (kind == "grid") return bt::build_grid(rows, L);
  throw nlc::io::ConfigError("--layout", "expected beat, tree, chain or grid");
}

int cmd_beat(const Common& c, const std::string& action, const std::string& kind, int l_min, int l_max, int rows,
             std::int64_t from, std::int64_t to) {
  namespace bt = nlc::beat;
  if (l_max < l_min) l_max = l_min;
  if (l_min < 2 || l_max > 16) throw nlc::io::ConfigError("--L", "must lie in [2, 16]");
  Outputs out{c.out};
  out.add("manifest.json", run_manifest(c).to_json());
  const std::string hash = nlc::io::hex64(nlc::io::fnv1a(action + kind));
  if (action == "stats") {
    json arr = json::array();
    std::vector<std::vector<std::string>> csv;
    for (int L = l_min; L <= l_max; ++L) {
      const auto g = layout(kind, L, rows);
      const auto s = bt::distance_stats(g, c.threads, 512, c.seed);
      arr.push_back({{"L", L}, {"qubits", g.alive_count()}, {"layout", kind}, {"mean", s.mean_distance},
                     {"max", s.max_distance}, {"mean_over_log2n", s.mean_distance / L}, {"histogram", s.histogram},
                     {"sampled", s.sampled}, {"sample_size", s.sample_size}});
      csv.push_back({std::to_string(g.alive_count()), kind, num(s.mean_distance), std::to_string(s.max_distance)});
      std::cout << kind << " L=" << L << " mean " << s.mean_distance << " max " << s.max_distance << "\n";
    }
    out.add("beat_stats.json", envelope(c, "beat stats", hash, arr));
    out.add("beat_stats.csv", rows_csv({"N", "layout", "mean", "max"}, csv));
  } else if (action == "route") {
    const auto g = layout(kind, l_min, rows);
    const std::int64_t n = std::int64_t{1} << l_min;
    if (from < 1 || to < 1 || from >= n || to >= n) throw nlc::io::ConfigError("--from/--to", "position outside 1..N-1");
    const int a = g.find(0, from), b = g.find(0, to);
    const auto path = bt::route(a, b, g);
    json j = {{"from", from}, {"to", to}, {"layout", kind}, {"L", l_min}};
    if (kind != "chain") {
      const auto aa = bt::address_of(from, n), bb = bt::address_of(to, n);
      const auto anc = bt::lca(aa, bb);
      j["address_from"] = aa.bits;
      j["address_to"] = bb.bits;
      j["lca"] = anc.bits;
      j["lca_position"] = bt::position_of(anc, n);
      j["tree_distance"] = bt::tree_distance(aa, bb);
    }
    if (path) {
      std::vector<std::int64_t> positions;
      for (int v : *path) positions.push_back(g.vertex(v).position);
      j["path"] = positions;
      j["length"] = static_cast<int>(path->size()) - 1;
      std::cout << "route length " << path->size() - 1 << "\n";
    } else {
      j["path"] = nullptr;
      std::cout << "no route\n";
    }
    out.add("route.json", envelope(c, "beat route", hash, j));
  } else if (action == "grid" || action == "graph") {
    const auto g = action == "grid" ? bt::build_grid(rows, l_min) : layout(kind, l_min, rows);
    out.add("graph.json", envelope(c, "beat " + action, hash, bt::to_json(g)));
    out.add("graph.dot", bt::to_dot(g));
    std::cout << g.alive_count() << " qubits, " << g.edges().size() << " edges\n";
  } else {
    throw nlc::io::ConfigError("action", "expected stats, route, grid or graph");
  }
  out.flush();
  return kExitOk;
}

// ---------------------------------------------------------------- analyze

json analyze_photon_cal(const nlc::io::CsvTable& t, double anchor) {
  namespace an = nlc::analysis;
  const auto amp = t.column("amplitude"), h0 = t.column("height_n0"), h2 = t.column("height_n2"),
             ref = t.column("reference");
  std::vector<an::PhotonCalRecord> rec;
  for (std::size_t i = 0; i < amp.size(); ++i) rec.push_back({amp[i], h0[i], h2[i], ref[i]});
  const double k2 = an::fock2_scale(rec, anchor);
  std::vector<double> a0, x0, a_all, x_all;
  std::vector<char> v0, v_all;  // vector<bool> has no contiguous storage
  std::vector<std::unique_ptr<bool[]>> keep;
  auto flags = [&keep](const std::vector<char>& v) {
    keep.push_back(std::make_unique<bool[]>(v.size()));
    std::copy(v.begin(), v.end(), keep.back().get());
    return std::span<const bool>(keep.back().get(), v.size());
  };
  json rows = json::array();
  for (const auto& r : rec) {
    const double p0 = an::fock_population(r, 0);
    const auto e0 = p0 > 0 ? an::alpha_from_p0(p0) : an::AlphaEstimate{0.0, false};
    x0.push_back(r.pump_amplitude);
    a0.push_back(e0.alpha);
    v0.push_back(e0.valid);
    rows.push_back({{"amplitude", r.pump_amplitude}, {"p0", p0}, {"alpha_p0", e0.alpha}, {"valid_p0", e0.valid}});
  }
  const auto line0 = an::fit_alpha_line(x0, a0, flags(v0));
  for (std::size_t i = 0; i < rec.size(); ++i) {
    x_all.push_back(x0[i]);
    a_all.push_back(a0[i]);
    v_all.push_back(v0[i]);
    const double p2 = an::fock_population(rec[i], 2, k2);
    if (!(p2 > 0) || p2 > an::kP2Max) continue;
    const double guess = line0.slope * rec[i].pump_amplitude;
    const auto e2 = an::alpha_from_p2(p2, guess * guess < 2.0 ? an::Branch::Low : an::Branch::High);
    rows[i]["p2"] = p2;
    rows[i]["alpha_p2"] = e2.alpha;
    rows[i]["valid_p2"] = e2.valid;
    x_all.push_back(x0[i]);
    a_all.push_back(e2.alpha);
    v_all.push_back(e2.valid);
  }
  const auto line = an::fit_alpha_line(x_all, a_all, flags(v_all));
  return {{"k2", k2},
          {"slope_p0_only", {{"value", line0.slope}, {"sigma", line0.stderr_slope}, {"points", line0.points}}},
          {"slope", {{"value", line.slope}, {"sigma", line.stderr_slope}, {"points", line.points}}},
          {"rows", rows}};
}

json analyze(const std::string& pipeline, const nlc::io::CsvTable& t, double anchor) {
  namespace an = nlc::analysis;
  if (pipeline == "photon-cal") return analyze_photon_cal(t, anchor);
  if (pipeline == "ramsey") {
    const auto f = an::fit_ramsey({t.column("time_us"), t.column("signal")});
    return {{"frequency_hz", {{"value", f.frequency_hz}, {"sigma", f.sigma_frequency_hz}}},
            {"decay_time_us", std::isfinite(f.decay_time_us) ? json(f.decay_time_us) : json(nullptr)},
            {"periods_covered", f.periods_covered},
            {"few_periods", f.few_periods}};
  }
  if (pipeline == "zz") {
    const auto z = an::static_zz_estimate(t.column("freq_g_hz"), t.column("freq_e_hz"));
    return {{"zeta_hz", {{"value", z.zeta_hz}, {"sigma", z.stderr_hz}}},
            {"ci95_hz", z.ci_defined ? json{z.ci_low, z.ci_high} : json(nullptr)},
            {"repeats", z.repeats}};
  }
  if (pipeline == "rb") {
    const auto r = an::fit_rb(t.column("m"), t.column("fidelity"));
    return {{"p", {{"value", r.p}, {"sigma", r.sigma_p}}},
            {"a", r.a},
            {"b", r.b},
            {"error_per_gate", {{"value", r.error_per_gate}, {"sigma", r.sigma_error}}},
            {"fidelity", r.fidelity()}};
  }
  if (pipeline == "quadratic") {
    const auto q = an::fit_quadratic_error(t.column("m"), t.column("error"));
    return {{"eps1", {{"value", q.eps1}, {"sigma", q.sigma1}}},
            {"eps2", {{"value", q.eps2}, {"sigma", q.sigma2}}},
            {"eps_at_1", {{"value", q.eps_at_1}, {"sigma", q.sigma_at_1}}}};
  }
  if (pipeline == "readout") {
    an::SingleShotDataset d;
    const auto i1 = t.column("i"), q1 = t.column("q"), prep = t.column("prepared");
    for (std::size_t k = 0; k < i1.size(); ++k) {
      d.points.emplace_back(i1[k], q1[k]);
      d.prepared.push_back(prep[k] > 0.5 ? 1 : 0);
    }
    if (std::find(t.header.begin(), t.header.end(), "i2") != t.header.end()) {
      const auto i2 = t.column("i2"), q2 = t.column("q2");
      d.second.emplace();
      for (std::size_t k = 0; k < i2.size(); ++k) d.second->emplace_back(i2[k], q2[k]);
    }
    const auto model = an::fit_blobs(d.points, d.prepared);
    json j = json::object();
    for (auto [name, m] : {std::pair{"binary", an::Discrimination::Binary},
                           std::pair{"circular", an::Discrimination::Circular},
                           std::pair{"heights", an::Discrimination::Heights}}) {
      const auto r = an::readout_discriminate(d, m, model);
      j[name] = {{"p0_given_g", r.p0_given_g}, {"p1_given_e", r.p1_given_e}, {"p2", r.p2},
                 {"fidelity", r.fidelity}, {"qnd", r.qnd ? json(*r.qnd) : json(nullptr)},
                 {"discarded_fraction", r.discarded_fraction}};
    }
    json blobs = json::array();
    for (int k = 0; k < 3; ++k)
      blobs.push_back({{"mean", {model.mean[k](0), model.mean[k](1)}}, {"sigma", model.sigma(k)},
                       {"weight", model.weight[k]}});
    j["blobs"] = blobs;
    return j;
  }
  if (pipeline == "mist") {
    const auto r = an::mist_curve(t.column("photons"), t.column("population"));
    return {{"baseline", r.baseline},
            {"max_rise", r.max_rise},
            {"monotone", r.monotone_nondecreasing},
            {"flagged", r.flagged},
            {"onset_photons", r.onset_photons ? json(*r.onset_photons) : json(nullptr)},
            {"operating_photons", r.operating_photons},
            {"population_at_operating", r.population_at_operating}};
  }
  throw nlc::io::ConfigError("pipeline", "unknown pipeline " + pipeline);
}

int cmd_analyze(const Common& c, const std::string& pipeline, const std::string& data, double anchor) {
  const std::string text = nlc::io::read_text(data);
  const auto table = nlc::io::parse_csv(text, data);
  const json result = analyze(pipeline, table, anchor);
  Outputs out{c.out};
  out.add("manifest.json", run_manifest(c).to_json());
  out.add("analyze_" + pipeline + ".json",
          envelope(c, "analyze " + pipeline, nlc::io::hex64(nlc::io::fnv1a(text)), result));
  out.flush();
  std::cout << result.dump() .substr(0, 200) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const Common& c, const std::string& pipeline, const std::string& path) {
  namespace an = nlc::analysis;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  std::mt19937_64 rng(c.seed);
  if (pipeline == "quadratic") {
    header = {"m", "error"};
    const std::vector<double> m{1, 2, 3, 4, 5, 6, 8, 10, 12};
    const auto e = an::quadratic_error_synthetic(m, 0.0052, 0.0011, 0.0004, c.seed);
    for (std::size_t i = 0; i < m.size(); ++i) rows.push_back({num(m[i]), num(e[i])});
  } else if (pipeline == "rb") {
    header = {"m", "fidelity"};
    const std::vector<double> m{1, 2, 4, 8, 16, 32, 64, 128};
    const auto y = an::rb_synthetic(m, 0.75, 0.99307, 0.25, 0.002, c.seed);
    for (std::size_t i = 0; i < m.size(); ++i) rows.push_back({num(m[i]), num(y[i])});
  } else if (pipeline == "photon-cal") {
    header = {"amplitude", "height_n0", "height_n2", "reference"};
    std::vector<double> amps;
    for (int i = 1; i <= 40; ++i) amps.push_back(0.01 * i);
    an::PhotonCalSynth s;
    s.noise = 0.002;
    s.floor = 0.005;
    s.alpha_per_volt = 6.0;
    for (const auto& r : an::photon_cal_synthetic(amps, s, c.seed))
      rows.push_back({num(r.pump_amplitude), num(r.peak_height_n0), num(r.peak_height_n2), num(r.reference_height)});
  } else if (pipeline == "ramsey") {
    header = {"time_us", "signal"};
    const auto tr = an::ramsey_synthetic({}, 0.0, an::Spectator::G, rng);
    for (std::size_t i = 0; i < tr.times_us.size(); ++i) rows.push_back({num(tr.times_us[i]), num(tr.signal[i])});
  } else if (pipeline == "zz") {
    header = {"freq_g_hz", "freq_e_hz"};
    for (int k = 0; k < 20; ++k) {
      const double g = an::fit_ramsey(an::ramsey_synthetic({}, 0.0, an::Spectator::G, rng)).frequency_hz;
      const double e = an::fit_ramsey(an::ramsey_synthetic({}, 144.0, an::Spectator::E, rng)).frequency_hz;
      rows.push_back({num(g), num(e)});
    }
  } else if (pipeline == "readout") {
    header = {"i", "q", "prepared", "i2", "q2"};
    an::ReadoutSynth s;
    s.shots_per_state = 5000;
    const auto [d, truth] = an::readout_synthetic(s, c.seed);
    for (std::size_t i = 0; i < d.points.size(); ++i)
      rows.push_back({num(d.points[i](0)), num(d.points[i](1)), std::to_string(d.prepared[i]),
                      num((*d.second)[i](0)), num((*d.second)[i](1))});
  } else if (pipeline == "mist") {
    header = {"photons", "population"};
    for (int i = 0; i <= 30; ++i) {
      const double n = i * 0.5;
      rows.push_back({num(n), num(0.004 + 0.05 / (1.0 + std::exp(-(n - 9.0))))});
    }
  } else {
    throw nlc::io::ConfigError("pipeline", "unknown pipeline " + pipeline);
  }
  nlc::io::write_text(path, rows_csv(header, rows));
  std::cout << "wrote " << path << "\n";
  return kExitOk;
}

void apply_manifest(Common& c) {
  if (c.manifest.empty()) return;
  const auto m = nlc::io::RunManifest::from_json(nlc::io::parse_json(nlc::io::read_text(c.manifest), c.manifest));
  if (!m.fixture_path.empty()) c.fixture = m.fixture_path;
  c.seed = m.seed;
  c.out = m.output_dir;
  c.threads = m.threads;
  for (const auto& [k, v] : m.overrides) c.overrides.push_back(k + "=" + v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-local coupler simulation and analysis driver"};
  app.require_subcommand(1);
  Common c;
  app.add_option("--fixture", c.fixture, "device fixture (JSON)");
  app.add_option("--manifest", c.manifest, "run manifest (JSON); fills the common flags");
  app.add_option("--seed", c.seed, "RNG seed");
  app.add_option("--out", c.out, "output directory");
  app.add_option("--override", c.overrides, "KEY=VALUE fixture override (repeatable)");
  app.add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);

  auto* spectrum = app.add_subcommand("spectrum", "fluxonium spectra, couplings, dispersive shifts and static ZZ");

  auto* gate = app.add_subcommand("gate", "simulate (or calibrate) the CZ gate");
  bool calibrate = false;
  std::string which = "gate";
  gate->add_flag("--calibrate", calibrate, "run the pulse calibration from the standard start");
  gate->add_option("--model", which, "gate (full) or open (reduced) model")->check(CLI::IsMember({"gate", "open"}));

  auto* budget = app.add_subcommand("budget", "decoherence error budget on the reduced model");
  int n_traj = 0;
  bool noiseless = false;
  bool budget_calibrate = false;
  budget->add_option("--n-traj", n_traj, "trajectories (default from fixture)");
  budget->add_flag("--noiseless", noiseless, "zero all decoherence rates");
  budget->add_flag("--calibrate", budget_calibrate, "recalibrate the pulse on the reduced model");

  auto* beat = app.add_subcommand("beat", "BEAT layouts: stats, route, grid, graph");
  std::string action;
  std::string kind = "beat";
  int l_min = 4, l_max = 0, rows = 2;
  std::int64_t from = 0, to = 0;
  beat->add_option("action", action, "stats | route | grid | graph")->required();
  beat->add_option("--layout", kind, "beat | tree | chain | grid");
  beat->add_option("--L", l_min, "depth parameter (N = 2^L)");
  beat->add_option("--L-max", l_max, "sweep up to this L (stats)");
  beat->add_option("--rows", rows, "grid rows");
  beat->add_option("--from", from, "route source position");
  beat->add_option("--to", to, "route target position");

  auto* an = app.add_subcommand("analyze", "fit pipelines on CSV data");
  std::string pipeline, data;
  double anchor = 0.23;
  an->add_option("pipeline", pipeline, "photon-cal | ramsey | zz | rb | quadratic | readout | mist")->required();
  an->add_option("--data", data, "input CSV")->required();
  an->add_option("--anchor", anchor, "Fock-2 cross-calibration pump amplitude");

  auto* synth = app.add_subcommand("synth", "write a synthetic CSV for an analysis pipeline");
  std::string synth_pipeline, synth_path;
  synth->add_option("pipeline", synth_pipeline)->required();
  synth->add_option("--to-file", synth_path, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    apply_manifest(c);
    for (const auto* sub : app.get_subcommands()) c.command = sub->get_name();
    if (*spectrum) return cmd_spectrum(c);
    if (*gate) return cmd_gate(c, calibrate, which);
    if (*budget) return cmd_budget(c, budget_calibrate, n_traj, noiseless);
    if (*beat) return cmd_beat(c, action, kind, l_min, l_max, rows, from, to);
    if (*an) return cmd_analyze(c, pipeline, data, anchor);
    if (*synth) return cmd_synth(c, synth_pipeline, synth_path);
  } catch (const nlc::io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlc::analysis::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
