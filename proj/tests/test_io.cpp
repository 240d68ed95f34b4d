#include <gtest/gtest.h>

#include <filesystem>

#include "nlc/fixture.hpp"
#include "nlc/io.hpp"

using namespace nlc;

namespace {

io::json device_doc() { return io::parse_json(io::read_text(NLC_FIXTURE_PATH), NLC_FIXTURE_PATH); }

}  // namespace

TEST(Csv, ParseAndRoundTrip) {
  const auto t = io::parse_csv("# comment\nm, error\n1,0.5\n2, 0.25\n\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"m", "error"}));
  EXPECT_EQ(t.column("error"), (std::vector<double>{0.5, 0.25}));
  EXPECT_EQ(io::parse_csv(io::to_csv(t)).rows, t.rows);
  EXPECT_THROW(t.column("nope"), io::ConfigError);
  EXPECT_THROW(io::parse_csv("a,b\n1\n"), io::ConfigError);
  EXPECT_THROW(io::parse_csv("a\nxyz\n"), io::ConfigError);
  EXPECT_THROW(io::parse_csv(""), io::ConfigError);
}

TEST(Files, AtomicWriteAndMissingRead) {
  const auto dir = std::filesystem::temp_directory_path() / "nlc_io_test";
  std::filesystem::remove_all(dir);
  io::write_text(dir / "sub" / "a.txt", "hello");
  EXPECT_EQ(io::read_text(dir / "sub" / "a.txt"), "hello");
  EXPECT_FALSE(std::filesystem::exists(dir / "sub" / "a.txt.tmp"));
  EXPECT_THROW(io::read_text(dir / "missing.txt"), io::ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Hash, StableFnv) {
  EXPECT_EQ(io::fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(io::hex64(io::fnv1a("a")), "af63dc4c8601ec8c");
}

TEST(Overrides, ExistingKeysOnly) {
  io::json doc = {{"a", {{"b", 1.0}, {"c", {1, 2, 3}}}}};
  io::apply_override(doc, "a.b=2.5");
  io::apply_override(doc, "a.c.1=7");
  EXPECT_EQ(doc["a"]["b"], 2.5);
  EXPECT_EQ(doc["a"]["c"][1], 7);
  try {
    io::apply_override(doc, "a.zz=1");
    FAIL();
  } catch (const io::ConfigError& e) {
    EXPECT_EQ(e.path(), "/a/zz");
  }
  EXPECT_THROW(io::apply_override(doc, "a.c.9=1"), io::ConfigError);
  EXPECT_THROW(io::apply_override(doc, "novalue"), io::ConfigError);
}

TEST(Manifest, StrictRoundTrip) {
  io::RunManifest m;
  m.experiment = "gate";
  m.fixture_path = "f.json";
  m.seed = 42;
  m.overrides["pulse.dt_ns"] = "0.25";
  const auto back = io::RunManifest::from_json(m.to_json());
  EXPECT_EQ(back.to_json(), m.to_json());
  auto j = m.to_json();
  j["colour"] = "red";
  EXPECT_THROW(io::RunManifest::from_json(j), io::ConfigError);
}

TEST(Fixture, DeviceFixtureLoads) {
  const auto f = parse_fixture(device_doc());
  EXPECT_DOUBLE_EQ(f.qubit_a.params.e_j, 3.58);
  EXPECT_EQ(f.gate_model.trunc_dim, 800);
  EXPECT_EQ(f.open_model.trunc_dim, 280);
  EXPECT_TRUE(f.calibrated_gate.has_value());
  EXPECT_TRUE(f.calibrated_open.has_value());
  EXPECT_EQ(f.n_traj, 200);
  const auto n = f.noise();
  EXPECT_NEAR(n.bus_gamma1, 1.0 / 23.4, 1e-15);
  EXPECT_NEAR(f.network().c_f, 20.0, 1e-12);
  EXPECT_EQ(f.hash.size(), 16u);
}

TEST(Fixture, UnknownKeyRejectedWithPath) {
  auto doc = device_doc();
  doc["bus"]["q_factor"] = 1e4;
  try {
    parse_fixture(doc);
    FAIL();
  } catch (const io::ConfigError& e) {
    EXPECT_EQ(e.path(), "/bus/q_factor");
  }
}

TEST(Fixture, SemanticChecks) {
  auto doc = device_doc();
  doc["bus"]["t2_us"] = 100.0;
  EXPECT_THROW(parse_fixture(doc), io::ConfigError);
  doc = device_doc();
  doc["gate_model"]["trunc_dim"] = 100000;
  EXPECT_THROW(parse_fixture(doc), io::ConfigError);
  doc = device_doc();
  doc["fluxonium_a"]["e_c_ghz"] = "one";
  EXPECT_THROW(parse_fixture(doc), io::ConfigError);
  doc = device_doc();
  doc["open_system"]["qubit_dephasing"] = "spin-echo";
  EXPECT_THROW(parse_fixture(doc), io::ConfigError);
}

TEST(Fixture, OverridesChangeHash) {
  const auto a = load_fixture(NLC_FIXTURE_PATH);
  const auto b = load_fixture(NLC_FIXTURE_PATH, {"pulse.dt_ns=0.25"});
  EXPECT_DOUBLE_EQ(b.dt_ns, 0.25);
  EXPECT_NE(a.hash, b.hash);
  EXPECT_THROW(load_fixture(NLC_FIXTURE_PATH, {"pulse.nope=1"}), io::ConfigError);
}
