#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* kWorked = R"([scenario]
r_hat = 10
e_setup = 0
k0 = 1
alpha = 2
[workload]
m0 = 100
dirty_rate = 1
[qos]
delta_tm = 100
delta_dt = 4
beta = 2
[partition]
i_max = 0
)";

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::current_path() / ("cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  int run(const std::string& args) const {
    const std::string cmd = std::string(TCBM_CLI_PATH) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                            " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string stderr_text() const { return read(dir_ / "stderr.txt"); }

  fs::path dir_;
};

std::size_t data_rows(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t rows = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

}  // namespace

TEST_F(Cli, SolveWorkedInstance) {
  const auto cfg = write("worked.ini", kWorked);
  ASSERT_EQ(run("solve --config " + cfg.string() + " --out " + dir_.string()), 0) << stderr_text();
  const std::string csv = read(dir_ / "solve.csv");
  EXPECT_NE(csv.find("round,updated,rate_Mbps,volume_Mb,time_s,energy_J"), std::string::npos);
  EXPECT_NE(csv.find("# [scenario]"), std::string::npos);
  EXPECT_EQ(data_rows(csv), 2u);
}

TEST_F(Cli, OutputIsDeterministic) {
  ASSERT_EQ(run("compare --preset 4g --out " + dir_.string()), 0) << stderr_text();
  const std::string first = read(dir_ / "compare.csv");
  ASSERT_EQ(run("compare --preset 4g --jobs 3 --out " + dir_.string()), 0) << stderr_text();
  const std::string second = read(dir_ / "compare.csv");
  const auto body = [](const std::string& s) { return s.substr(s.find("\nscenario,") + 1); };
  EXPECT_EQ(body(first), body(second));
  EXPECT_EQ(data_rows(first), 3u);
  EXPECT_TRUE(fs::exists(dir_ / "compare.md"));
}

TEST_F(Cli, MissingRequiredKeyExitsOne) {
  std::string text = kWorked;
  text.erase(text.find("m0 = 100\n"), 9);
  const auto cfg = write("broken.ini", text);
  EXPECT_EQ(run("solve --config " + cfg.string() + " --out " + dir_.string()), 1);
  EXPECT_NE(stderr_text().find("workload.m0 required"), std::string::npos) << stderr_text();
  EXPECT_FALSE(fs::exists(dir_ / "solve.csv"));
}

TEST_F(Cli, UnknownKeyExitsOne) {
  const auto cfg = write("typo.ini", std::string(kWorked) + "[qos]\nbeat = 2\n");
  EXPECT_EQ(run("solve --config " + cfg.string() + " --out " + dir_.string()), 1);
  EXPECT_NE(stderr_text().find("unknown key qos.beat"), std::string::npos) << stderr_text();
}

TEST_F(Cli, InfeasibleExitsTwo) {
  const auto cfg = write("wifi.ini", "[scenario]\npreset = wifi\n[workload]\ndirty_rate = 5\n");
  EXPECT_EQ(run("solve --config " + cfg.string() + " --out " + dir_.string()), 2);
  EXPECT_NE(stderr_text().find("speed-up"), std::string::npos) << stderr_text();
}

TEST_F(Cli, TrackWritesFullHorizon) {
  ASSERT_EQ(run("track --profile fig45b --out " + dir_.string()), 0) << stderr_text();
  const std::string csv = read(dir_ / "track.csv");
  EXPECT_NE(csv.find("n,w_bar,k0,E_tot,feasible"), std::string::npos);
  EXPECT_EQ(data_rows(csv), 90u);
}

TEST_F(Cli, SweepCoversAllPresets) {
  ASSERT_EQ(run("sweep --out " + dir_.string()), 0) << stderr_text();
  EXPECT_EQ(data_rows(read(dir_ / "sweep.csv")), 27u);
}

TEST_F(Cli, BadFlagExitsNonZero) {
  EXPECT_NE(run("solve --preset 5g --out " + dir_.string()), 0);
  EXPECT_NE(run("frobnicate"), 0);
}
