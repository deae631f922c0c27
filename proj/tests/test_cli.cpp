#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct CliRun {
  int status = 0;
  std::string out;
};

CliRun cli(const std::string& args) {
  const std::string cmd = std::string(UCPLAB_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = ::popen(cmd.c_str(), "r");
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p))
    r.out.append(buf.data(), n);
  const int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string line(const std::string& s) { return s.substr(0, s.find('\n')); }

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

struct TempRoot {
  fs::path path = fs::temp_directory_path() / ("ucplab_cli_" + std::to_string(::getpid()));
  TempRoot() { fs::create_directories(path); }
  ~TempRoot() { fs::remove_all(path); }
};

} // namespace

TEST(Cli, VerifyPrintsReportAndExitCode) {
  const CliRun r = cli("verify landis --compact");
  EXPECT_EQ(r.status, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["schema"], "ucplab.verify/1");
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_NE(cli("verify nonsense").status, 0);
}

TEST(Cli, SingleStageChain) {
  TempRoot root;
  const std::string out = "--out " + root.path.string();
  const CliRun gen = cli("gen --lambda 2 --n 32 --seed 4 " + out);
  ASSERT_EQ(gen.status, 0);
  const fs::path g = line(gen.out);
  const json pj = read_json(g / "potential.json");
  EXPECT_EQ(pj["seed"], 4);
  EXPECT_EQ(pj["mode"], "local");
  for (const char* k : {"lambda", "delta", "c0", "eps0"})
    EXPECT_TRUE(pj.contains(k)) << k;

  const CliRun solve = cli("solve --potential " + g.string() + " " + out);
  ASSERT_EQ(solve.status, 0);
  const fs::path s = line(solve.out);
  const CliRun mult = cli("multiplier --potential " + g.string() + " " + out);
  ASSERT_EQ(mult.status, 0);
  const fs::path m = line(mult.out);
  EXPECT_TRUE(read_json(m / "multiplier.json")["log_space"].get<bool>());

  const CliRun stream = cli("stream --u " + (s / "u.ucpf").string() + " --phi " + (m / "log_phi.ucpf").string() +
                         " --delta 0.1 --lambda 2 " + out);
  ASSERT_EQ(stream.status, 0);
  const fs::path st = line(stream.out);
  EXPECT_TRUE(fs::exists(st / "G_21.ucpf"));

  const CliRun bel = cli("beltrami --A " + st.string() + " --delta 0.4 " + out);
  ASSERT_EQ(bel.status, 0);
  const json cert = read_json(fs::path(line(bel.out)) / "certificate.json");
  EXPECT_TRUE(cert.contains("global"));
  EXPECT_EQ(cert["strips"]["i0"], 1);

  // manifests record the inputs by digest
  const json man = read_json(fs::path(line(bel.out)) / "manifest.json");
  EXPECT_EQ(man["inputs"].size(), 4u);
}

TEST(Cli, LandisFlagsAndEnvRoot) {
  TempRoot root;
  const std::string env = "UCPLAB_RUNS=" + root.path.string() + " ";
  const std::string cmd = "env " + env + UCPLAB_CLI + " landis --eps 0.2 --S0 10 --alpha0 2 2>/dev/null";
  FILE* p = ::popen(cmd.c_str(), "r");
  std::array<char, 4096> buf{};
  std::string out;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p))
    out.append(buf.data(), n);
  ASSERT_EQ(::pclose(p), 0);
  const fs::path dir = line(out);
  EXPECT_EQ(dir.parent_path(), root.path);
  EXPECT_EQ(read_json(dir / "landis_certificate.json")["N"], 43);
}

TEST(Cli, BadInputsFail) {
  EXPECT_NE(cli("solve --potential /nonexistent").status, 0);
  EXPECT_NE(cli("landis --eps 0.9 --out /tmp/ucplab_never").status, 0);
  EXPECT_FALSE(fs::exists("/tmp/ucplab_never/landis"));
}
