#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("csd_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + CSD_BINARY + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
  std::ofstream(dir / name) << text;
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmallScan =
    "[experiment]\nkind = scan\nname = small\n[sequence]\npreset = confocal\n"
    "[nv]\ncount_rate = 50\n[grid]\npitch = 20\nwidth = 15\nheight = 11\n";

}  // namespace

TEST(Cli, SuccessWritesSummary) {
  const auto dir = scratch("ok");
  const auto cfg = write(dir, "c.ini", kSmallScan);
  ASSERT_EQ(run("--config " + cfg.string() + " --out " + (dir / "o").string() + " --quiet"), 0);
  const std::string summary = slurp(dir / "o" / "summary.csv");
  EXPECT_EQ(summary.rfind("metric,value,unit\n", 0), 0u);
  EXPECT_NE(summary.find("peak_counts"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "o" / "scan.pgm"));
}

TEST(Cli, InvalidConfigExitsTwo) {
  const auto dir = scratch("bad");
  const auto cfg = write(dir, "c.ini", "[experiment]\nkind = scan\nbogus = 1\n");
  EXPECT_EQ(run("--config " + cfg.string() + " --out " + (dir / "o").string()), 2);
  EXPECT_EQ(run("--config " + cfg.string() + " --threads -3"), 2);
  EXPECT_EQ(run("--out x"), 2);
}

TEST(Cli, NumericalFailureExitsThree) {
  const auto dir = scratch("num");
  write(dir, "flat.csv", "time_us,value\n0,5\n1,5\n2,5\n3,5\n4,5\n5,5\n");
  const auto cfg = write(dir, "c.ini", "[experiment]\nkind = fit\n[fit]\ninput = flat.csv\nmodel = charge-decay\n");
  EXPECT_EQ(run("--config " + cfg.string() + " --out " + (dir / "o").string()), 3);
}

TEST(Cli, IoFailureExitsFour) {
  const auto dir = scratch("io");
  const auto cfg = write(dir, "c.ini", kSmallScan);
  EXPECT_EQ(run("--config " + (dir / "missing.ini").string()), 4);
  write(dir, "blocker", "x");
  EXPECT_EQ(run("--config " + cfg.string() + " --out " + (dir / "blocker" / "o").string()), 4);
  const auto fit = write(dir, "f.ini", "[experiment]\nkind = fit\n[fit]\ninput = absent.csv\n");
  EXPECT_EQ(run("--config " + fit.string() + " --out " + (dir / "o2").string()), 4);
}

TEST(Cli, SeededRunsAreByteIdenticalAcrossThreadCounts) {
  const auto dir = scratch("det");
  const auto cfg = write(dir, "c.ini", kSmallScan);
  for (const char* t : {"1", "4", "0"}) {
    ASSERT_EQ(run("--config " + cfg.string() + " --seed 9 --threads " + t + " --quiet --out " +
                  (dir / t).string()),
              0);
  }
  for (const char* f : {"scan.pgm", "profile.csv", "summary.csv"}) {
    EXPECT_EQ(slurp(dir / "1" / f), slurp(dir / "4" / f)) << f;
    EXPECT_EQ(slurp(dir / "1" / f), slurp(dir / "0" / f)) << f;
  }
  ASSERT_EQ(run("--config " + cfg.string() + " --seed 10 --quiet --out " + (dir / "s10").string()), 0);
  EXPECT_NE(slurp(dir / "1" / "scan.pgm"), slurp(dir / "s10" / "scan.pgm"));
}

TEST(Cli, EmptySceneGivesZeroImage) {
  const auto dir = scratch("empty");
  const auto cfg = write(dir, "c.ini",
                         "[experiment]\nkind = scan\n[grid]\npitch = 10\nwidth = 5\nheight = 5\n");
  ASSERT_EQ(run("--config " + cfg.string() + " --quiet --out " + (dir / "o").string()), 0);
  std::istringstream pgm(slurp(dir / "o" / "scan.pgm"));
  std::string line;
  int values = 0;
  while (std::getline(pgm, line)) {
    if (line.empty() || line[0] == '#' || line == "P2" || line == "65535") continue;
    if (line == "5 5") continue;
    std::istringstream ls(line);
    int v;
    while (ls >> v) {
      EXPECT_EQ(v, 0);
      ++values;
    }
  }
  EXPECT_EQ(values, 25);
  EXPECT_EQ(slurp(dir / "o" / "summary.csv").find("fwhm"), std::string::npos);
}
