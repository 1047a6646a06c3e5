#include "aifdom/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;
using aifdom::Json;

namespace {

const std::string kCli = AIFDOM_CLI;
const std::string kConfigs = AIFDOM_CONFIG_DIR;
const std::string kData = AIFDOM_DATA_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(AIFDOM_SCRATCH_DIR) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json load(const fs::path& p) { return aifdom::read_json_file(p.string()); }

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Cli, SimulateRegulation) {
  const fs::path out = scratch("simulate");
  ASSERT_EQ(run("simulate --config " + kConfigs + "/fig3_regulation.json --out " + out.string()), 0);
  const Json j = load(out / "attractor.json");
  EXPECT_EQ(j.at("attractor").at("kind"), "equilibrium");
  EXPECT_EQ(j.at("tool"), "aifdom");
  EXPECT_EQ(j.at("config_hash").get<std::string>().size(), 64u);
  EXPECT_TRUE(fs::exists(out / "trajectory.csv"));
}

TEST(Cli, MissingArgumentsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("simulate"), 1);
  EXPECT_EQ(run("simulate --config /nonexistent.json"), 1);
}

TEST(Cli, MalformedConfigExitOne) {
  const fs::path dir = scratch("malformed");
  std::string text = aifdom::read_text_file(kConfigs + "/fig3_regulation.json");
  text.replace(text.find("\"gamma\""), 7, "\"gama\"");
  write(dir / "bad.json", text);
  EXPECT_EQ(run("simulate --config " + (dir / "bad.json").string() + " --out " + dir.string()), 1);
}

TEST(Cli, EmptyRegionExitOne) {
  const fs::path dir = scratch("empty_region");
  write(dir / "cfg.json", R"({"name": "e",
    "model": {"kind": "fop", "controller": {"mu": 2, "eta": 10},
              "plant": {"theta1": 1, "theta2": 1, "k": 1, "gamma": 1}},
    "region": {"vertices": []},
    "analysis": {"lambda": 0}})");
  EXPECT_EQ(run("spectrum --config " + (dir / "cfg.json").string() + " --out " + dir.string()), 1);
}

TEST(Cli, VerifyBundledCertificate) {
  const fs::path out = scratch("verify");
  ASSERT_EQ(run("verify --config " + kConfigs + "/table1_row1_theta2_1_k_1.json --certificate " +
                kData + "/table1_theta2_1_k_1.json --out " + out.string()),
            0);
  const Json j = load(out / "verification.json");
  EXPECT_TRUE(j.at("passed").get<bool>());
  EXPECT_EQ(j.at("p"), 0);
}

TEST(Cli, TamperedCertificateExitThree) {
  const fs::path out = scratch("tampered");
  Json cert = load(kData + "/table1_theta2_1_k_1.json");
  cert["P"][0][1] = 50.0;
  cert["P"][1][0] = 50.0;
  write(out / "cert.json", cert.dump(2));
  EXPECT_EQ(run("verify --config " + kConfigs + "/table1_row1_theta2_1_k_1.json --certificate " +
                (out / "cert.json").string() + " --out " + out.string()),
            3);
  const Json j = load(out / "verification.json");
  EXPECT_FALSE(j.at("passed").get<bool>());
  EXPECT_FALSE(j.at("witness").is_null());
}

TEST(Cli, CertifyOscillatoryRegime) {
  const fs::path out = scratch("certify");
  ASSERT_EQ(run("certify --config " + kConfigs + "/fig4_theta2_4_k_1.json --out " + out.string()), 0);
  const Json j = load(out / "certificate.json");
  EXPECT_EQ(j.at("p"), 2);
  EXPECT_LT(j.at("residual_margin").get<double>(), 0.0);
}

TEST(Cli, OutputsAreDeterministic) {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  const std::string cfg = " --config " + kConfigs + "/fig4_theta2_4_k_1.json --seed 7 --out ";
  for (const char* cmd : {"spectrum", "rootlocus"}) {
    ASSERT_EQ(run(cmd + cfg + a.string()), 0);
    ASSERT_EQ(run(cmd + cfg + b.string()), 0);
  }
  int compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const fs::path other = b / e.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(aifdom::read_text_file(e.path().string()), aifdom::read_text_file(other.string()))
        << e.path().filename();
    ++compared;
  }
  EXPECT_GT(compared, 2);
}
