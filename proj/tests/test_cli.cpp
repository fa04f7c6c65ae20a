// Copyright 2026 The qsl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "commands.hpp"
#include "qsl/evolve.hpp"
#include "qsl/io.hpp"

namespace qsl {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("qsl_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Manifests go to the scratch dir unless the test passes its own.
  CliRun run(std::vector<std::string> args, bool own_manifest = false) {
    std::vector<std::string> full{"qsl"};
    if (!own_manifest) {
      full.push_back("--manifest");
      full.push_back(path("run.manifest.json"));
    }
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : full) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliRun r;
    r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
  }

  json run_json(std::vector<std::string> args) {
    args.insert(args.begin(), "--json");
    const CliRun r = run(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return json::parse(r.out);
  }

  static json read(const std::string& p) {
    std::ifstream in(p);
    return json::parse(in);
  }

  void write_matrix(const std::string& p, const Mat4& m) { io::write_json(p, io::matrix_to_json(m)); }

  fs::path dir_;
};

TEST_F(CliTest, KakCnotOnDefaultDevice) {
  const json r = run_json({"kak", "CNOT"});
  EXPECT_NEAR(r["t_min_ns"].get<double>(), 71.4, 0.05);
  EXPECT_NEAR(r["t_min_ns"].get<double>(), 71.0, 2.0);
  EXPECT_NEAR(r["lambda"][0].get<double>(), std::numbers::pi / 4, 1e-10);
}

TEST_F(CliTest, KakSwapMatchesTable) {
  const json r = run_json({"kak", "SWAP"});
  EXPECT_NEAR(r["t_min_ns"].get<double>(), 214.3, 0.05);
  EXPECT_NEAR(r["t_min_ns"].get<double>(), 213.0, 2.0);
}

TEST_F(CliTest, KakIdentityMatrixFile) {
  write_matrix(path("id.json"), Mat4::Identity());
  const json r = run_json({"kak", "--matrix", path("id.json")});
  for (int g = 0; g < 3; ++g) EXPECT_NEAR(r["lambda"][g].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(r["t_min_ns"].get<double>(), 0.0, 1e-9);
}

TEST_F(CliTest, KakTextReport) {
  const CliRun r = run({"kak", "SQRT_SWAP"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("t_min_ns: 107.14"), std::string::npos) << r.out;
}

TEST_F(CliTest, KakInputErrors) {
  Mat4 bad = Mat4::Identity();
  bad(0, 0) = 2.0;
  write_matrix(path("bad.json"), bad);
  EXPECT_EQ(run({"kak", "--matrix", path("bad.json")}).code, cli::kExitInvalid);
  EXPECT_EQ(run({"kak", "--matrix", path("missing.json")}).code, cli::kExitInvalid);
  io::write_text(path("garbage.json"), "{not json");
  EXPECT_EQ(run({"kak", "--matrix", path("garbage.json")}).code, cli::kExitInvalid);
  EXPECT_EQ(run({"kak", "NOPE"}).code, cli::kExitInvalid);
  EXPECT_EQ(run({"kak"}).code, cli::kExitInvalid);
  EXPECT_EQ(run({"kak", "CNOT", "--matrix", path("bad.json")}).code, cli::kExitInvalid);
}

TEST_F(CliTest, KakNonIsingNeedsTabulatedGate) {
  DeviceSpec spec = DeviceSpec::ideal(InteractionKind::kXY, mhz_to_angular(1.75), mhz_to_angular(6.0));
  io::write_json(path("xy.json"), io::device_to_json(spec));
  const json swap = run_json({"--device", path("xy.json"), "kak", "SWAP"});
  EXPECT_NEAR(swap["t_min_ns"].get<double>(), 3 * std::numbers::pi / (8 * spec.g), 1e-9);
  const json iswap = run_json({"--device", path("xy.json"), "kak", "ISWAP"});
  EXPECT_TRUE(iswap["t_min_ns"].is_null());
}

TEST_F(CliTest, MissingDeviceFile) {
  const CliRun r = run({"--device", path("nowhere.json"), "kak", "CNOT"});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.err.find("nowhere.json"), std::string::npos);
}

TEST_F(CliTest, ParseErrorsAndHelp) {
  EXPECT_EQ(run({}).code, cli::kExitInvalid);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitInvalid);
  EXPECT_EQ(run({"optimize", "--gate", "CNOT"}).code, cli::kExitInvalid);  // no --t-ns
  EXPECT_EQ(run({"optimize", "--gate", "CNOT", "--t-ns", "abc"}).code, cli::kExitInvalid);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(run({"--version"}).code, cli::kExitOk);
}

TEST_F(CliTest, OptimizeDarkCzReportsClosedForm) {
  // The undriven Ising propagator at pi/(4g) is CZ only up to local z gates.
  const std::string pulse = path("cz.json");
  const CliRun r = run({"--json", "optimize", "--gate", "CZ", "--t-ns", "71.43", "--omega-max-mhz", "0",
                        "--segments", "4", "--restarts", "2", "--out", pulse});
  EXPECT_EQ(r.code, cli::kExitNotConverged);
  const json rep = json::parse(r.out);
  EXPECT_NEAR(rep["fidelity"].get<double>(), 0.2, 1e-6);
  ASSERT_TRUE(fs::exists(pulse));  // partial output still written
  EXPECT_EQ(read(pulse)["segments"].get<int>(), 4);
}

TEST_F(CliTest, OptimizeDarkTargetIsNative) {
  const DeviceSpec spec = DeviceSpec::chip_default();
  write_matrix(path("dark.json"), dark_evolution(spec, 71.43));
  const json rep = run_json({"optimize", "--matrix", path("dark.json"), "--t-ns", "71.43",
                             "--omega-max-mhz", "0", "--segments", "4", "--restarts", "2"});
  EXPECT_NEAR(rep["fidelity"].get<double>(), 1.0, 1e-12);
  EXPECT_TRUE(rep["converged"].get<bool>());
}

TEST_F(CliTest, OptimizeIsDeterministicUnderSeed) {
  const std::vector<std::string> base{"optimize", "--gate", "SQRT_SWAP", "--t-ns", "126", "--omega-max-mhz",
                                      "5", "--segments", "4", "--restarts", "4", "--seed", "11"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a.json")});
  b.insert(b.begin(), {"--threads", "1"});
  b.insert(b.end(), {"--out", path("b.json")});
  const int code = run(a).code;
  EXPECT_TRUE(code == cli::kExitOk || code == cli::kExitNotConverged);
  EXPECT_EQ(run(b).code, code);
  EXPECT_EQ(read(path("a.json")), read(path("b.json")));
}

TEST_F(CliTest, ManifestNextToOutput) {
  const std::string out = path("p.json");
  const CliRun r = run({"optimize", "--gate", "SQRT_SWAP", "--t-ns", "126", "--omega-max-mhz", "5",
                        "--segments", "4", "--restarts", "8", "--seed", "1", "--out", out},
                       true);
  ASSERT_EQ(r.code, 0) << r.err;
  const json m = read(out + ".manifest.json");
  EXPECT_EQ(m["command"], "optimize");
  EXPECT_EQ(m["seed"].get<std::uint64_t>(), 1u);
  EXPECT_EQ(m["outputs"][0], out);
  EXPECT_EQ(m["tool_version"], io::kToolVersion);
  EXPECT_EQ(m["device"], "built-in");
  EXPECT_GE(m["wall_ms"].get<double>(), 0.0);
  EXPECT_EQ(m["exit_code"].get<int>(), 0);
}

TEST_F(CliTest, SpeedLimitFlagConflict) {
  const CliRun r = run({"speedlimit", "--gate", "CNOT", "--omega-max-mhz", "5", "--omega-over-g", "3"});
  EXPECT_EQ(r.code, cli::kExitInvalid);
}

TEST_F(CliTest, SpeedLimitRatioCurve) {
  const std::string csv = path("ratio.csv");
  const CliRun r = run({"speedlimit", "--gate", "CNOT", "--ideal-drives", "--omega-over-g", "6", "--segments",
                        "8", "--restarts", "4", "--csv", csv, "--out", path("ratio.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "omega_over_g,omega_max_mhz,t_min_ns,t_f_ns,ratio,converged");
  const json j = read(path("ratio.json"));
  const double ratio = j["rows"][0]["ratio"].get<double>();
  EXPECT_GE(ratio, 1.0 - 1e-3);
  EXPECT_LT(ratio, 1.5);
  EXPECT_NEAR(j["rows"][0]["omega_max_mhz"].get<double>(), 10.5, 1e-9);
}

TEST_F(CliTest, SpeedLimitUnboundedDriveHasNoBracket) {
  const CliRun r = run({"speedlimit", "--gate", "CNOT", "--omega-max-mhz", "0", "--segments", "2",
                        "--restarts", "1", "--max-iterations", "20", "--out", path("sl.json")});
  EXPECT_EQ(r.code, cli::kExitNotConverged);
  EXPECT_TRUE(read(path("sl.json")).contains("error"));
}

TEST_F(CliTest, SweepSwapReachesTheoryValue) {
  const std::string csv = path("sweep.csv");
  const CliRun r = run({"sweep", "--gate", "SWAP", "--segments", "4", "--omega-max-mhz", "5", "--points", "20",
                        "--t-max-ns", "240", "--restarts", "50", "--epsilon", "1e-5", "--out", csv});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(csv);
  std::stringstream text;
  text << in.rdbuf();
  const auto rows = io::sweep_from_csv(text.str());
  ASSERT_EQ(rows.size(), 20u);
  bool found = false;
  for (const auto& p : rows) {
    if (std::abs(p.t_ns - 216.0) < 1e-9) {
      found = true;
      EXPECT_GE(p.best_fidelity, 0.9999);
    }
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(io::sweep_to_csv(rows), text.str());
}

TEST_F(CliTest, QptSimulateThenReconstruct) {
  ASSERT_EQ(run({"qpt", "simulate", "--gate", "CNOT", "--shots", "500", "--seed", "7", "--out", path("c.json")}).code,
            0);
  ASSERT_EQ(run({"qpt", "simulate", "--gate", "CNOT", "--shots", "500", "--seed", "7", "--out", path("c2.json")}).code,
            0);
  EXPECT_EQ(read(path("c.json")), read(path("c2.json")));
  const json rep = run_json({"qpt", "reconstruct", "--counts", path("c.json"), "--gate", "CNOT", "--out", path("r.json")});
  EXPECT_GT(rep["fidelity"].get<double>(), 0.99);
  const json full = read(path("r.json"));
  EXPECT_EQ(full["normalization"], "quarter-trace");
  const PTM r = io::ptm_from_json(full);
  EXPECT_LT(trace_preservation_error(r), 1e-8);
}

TEST_F(CliTest, QptSpamCorrectionAndErrorBars) {
  ASSERT_EQ(run({"qpt", "simulate", "--gate", "CNOT", "--readout-error", "0.02", "0.03", "--seed", "3", "--out",
                 path("u.json")})
                .code,
            0);
  ASSERT_EQ(run({"qpt", "simulate", "--identity", "--readout-error", "0.02", "0.03", "--seed", "4", "--out",
                 path("i.json")})
                .code,
            0);
  const json rep = run_json({"qpt", "reconstruct", "--counts", path("u.json"), "--identity-counts",
                             path("i.json"), "--gate", "CNOT", "--stat-trials", "4"});
  EXPECT_GT(rep["fidelity"].get<double>(), 0.98);
  EXPECT_NEAR(rep["fidelity_spam_corrected"].get<double>(), rep["fidelity"].get<double>(), 1e-8);
  EXPECT_LT(rep["statistical_error"]["std_fidelity"].get<double>(), 0.01);
}

TEST_F(CliTest, QptInputErrors) {
  EXPECT_EQ(run({"qpt", "simulate", "--out", path("x.json")}).code, cli::kExitInvalid);
  EXPECT_EQ(run({"qpt", "simulate", "--gate", "CNOT", "--identity", "--out", path("x.json")}).code,
            cli::kExitInvalid);
  EXPECT_EQ(run({"qpt", "reconstruct", "--counts", path("missing.json")}).code, cli::kExitInvalid);
  io::write_json(path("short.json"), json{{"shots", 10}, {"n", json::array()}});
  EXPECT_EQ(run({"qpt", "reconstruct", "--counts", path("short.json")}).code, cli::kExitInvalid);
  EXPECT_EQ(run({"qpt"}).code, cli::kExitInvalid);
}

class CliPulseTest : public CliTest {
 protected:
  void SetUp() override {
    CliTest::SetUp();
    pulse_ = path("sqrt_swap.json");
    const CliRun r = run({"optimize", "--gate", "SQRT_SWAP", "--t-ns", "126", "--omega-max-mhz", "5",
                          "--segments", "4", "--restarts", "16", "--epsilon", "1e-4", "--out", pulse_});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  std::string pulse_;
};

TEST_F(CliPulseTest, RobustnessAtOnePercent) {
  const json rep = run_json({"robustness", "--pulse", pulse_, "--sigma", "0.01", "--trials", "100"});
  EXPECT_GT(rep["mean_fidelity"].get<double>(), 0.999);
  EXPECT_EQ(rep["target"], "SQRT_SWAP");
}

TEST_F(CliPulseTest, LeakageWithoutDipoleCrosstalk) {
  const json rep = run_json({"leakage", "--pulse", pulse_, "--crosstalk", "0", "--out", path("leak.json")});
  EXPECT_LT(rep["infidelity"].get<double>(), 0.01);
  EXPECT_GT(rep["fidelity_z_optimized"].get<double>(), rep["fidelity_vs_reference"].get<double>() - 1e-12);
  EXPECT_TRUE(read(path("leak.json")).contains("block"));
}

TEST_F(CliPulseTest, QptOfPulsePropagator) {
  ASSERT_EQ(run({"qpt", "simulate", "--pulse", pulse_, "--shots", "2000", "--out", path("p.json")}).code, 0);
  const json rep = run_json({"qpt", "reconstruct", "--counts", path("p.json"), "--gate", "SQRT_SWAP"});
  EXPECT_GT(rep["fidelity"].get<double>(), 0.99);
}

TEST_F(CliPulseTest, ReplayRejectsTamperedPulse) {
  json doc = read(pulse_);
  doc["channels"][0][0] = 50.0;  // MHz, far above the recorded bound
  io::write_json(path("hot.json"), doc);
  EXPECT_EQ(run({"leakage", "--pulse", path("hot.json")}).code, cli::kExitInvalid);
  doc["channels"][0] = json::array({1.0});
  io::write_json(path("short.json"), doc);
  EXPECT_EQ(run({"robustness", "--pulse", path("short.json")}).code, cli::kExitInvalid);
}

TEST(IoSchemas, DeviceRoundTripAndDefaults) {
  const DeviceSpec chip = DeviceSpec::chip_default();
  const DeviceSpec back = io::device_from_json(io::device_to_json(chip));
  EXPECT_NEAR(back.g, chip.g, 1e-15);
  EXPECT_NEAR(back.qutrit->omega2, chip.qutrit->omega2, 1e-9);
  EXPECT_NEAR(back.qutrit->dt_ns, chip.qutrit->dt_ns, 1e-15);
  const DeviceSpec partial = io::device_from_json(json{{"g_mhz", 2.0}, {"interaction", "xy"}});
  EXPECT_EQ(partial.interaction, InteractionKind::kXY);
  EXPECT_NEAR(partial.g, mhz_to_angular(2.0), 1e-15);
  EXPECT_NEAR(partial.r1, chip.r1, 0.0);
  EXPECT_THROW(io::device_from_json(json{{"interaction", "heisenberg"}}), Error);
  EXPECT_THROW(io::device_from_json(json{{"g_mhz", -1.0}}), Error);
  EXPECT_THROW(io::device_from_json(json{{"g_mhz", "fast"}}), Error);
}

TEST(IoSchemas, PulseAndMatrixRoundTrip) {
  Eigen::MatrixXd amps(3, 4);
  amps << 0.01, -0.02, 0.03, 0.0, 0.001, 0.002, -0.003, 0.004, 0.0, 0.0, 0.01, -0.01;
  const PulseSchedule s(77.5, amps);
  const PulseSchedule back = io::pulse_from_json(io::pulse_to_json(s));
  EXPECT_EQ(back.segments(), 3);
  EXPECT_DOUBLE_EQ(back.t_ns, 77.5);
  EXPECT_LT((back.amplitudes - amps).cwiseAbs().maxCoeff(), 1e-15);

  std::mt19937_64 rng(3);
  const Mat4 u = random_unitary(4, rng);
  EXPECT_LT((io::matrix_from_json(io::matrix_to_json(u)) - u).norm(), 1e-15);
  EXPECT_THROW(io::matrix_from_json(json::array({1, 2, 3})), Error);
}

TEST(IoSchemas, CountsAndPtmRoundTrip) {
  const CountsTensor c = simulate_qpt(ptm_of_unitary(gate_matrix(NamedGate::kCNOT)), ConfusionMatrix::ideal(), 50, 1);
  const json j = io::counts_to_json(c);
  EXPECT_EQ(j["pre_labels"].size(), 36u);
  EXPECT_EQ(j["post_labels"].size(), 9u);
  EXPECT_EQ(io::counts_from_json(j).n, c.n);

  const PTM r = ptm_of_unitary(gate_matrix(NamedGate::kSWAP));
  EXPECT_LT((io::ptm_from_json(io::ptm_to_json(r)).r - r.r).norm(), 1e-15);
  json wrong = io::ptm_to_json(r);
  wrong["normalization"] = "trace";
  EXPECT_THROW(io::ptm_from_json(wrong), Error);
  const ChiMatrix chi = chi_of_ptm(r);
  EXPECT_LT((io::chi_from_json(io::chi_to_json(chi)).chi - chi.chi).norm(), 1e-15);
}

TEST(IoSchemas, SweepCsvRejectsBadInput) {
  EXPECT_THROW(io::sweep_from_csv("t,f\n1,2\n"), Error);
  EXPECT_THROW(io::sweep_from_csv("t_ns,best_fidelity,converged,best_seed,wall_ms\n1,x,0,1,2\n"), Error);
  EXPECT_TRUE(io::sweep_from_csv("t_ns,best_fidelity,converged,best_seed,wall_ms\n").empty());
}

}  // namespace
}  // namespace qsl
