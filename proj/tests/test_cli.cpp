// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mimo_ae/fronthaul.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(MIMO_AE_CLI) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mimo_ae_cli_" + name);
  fs::remove_all(p);
  return p;
}

const std::string kTiny =
    "--blocks 2 --epochs 20 --snr 0,10 --ndiv 8";

}  // namespace

TEST_CASE("selftest passes") { CHECK(run("selftest") == 0); }

TEST_CASE("usage errors exit 2") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("sweep --blocks 0 --out /dev/null") == 2);
  CHECK(run("sweep --config /nonexistent/file.ini") == 2);
}

TEST_CASE("train writes frames and a manifest") {
  const fs::path dir = scratch("train");
  REQUIRE(run("train " + kTiny + " --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "manifest.csv"));
  for (const char* f : {"block_000000.maef", "block_000001.maef"}) {
    const auto frames = mimo_ae::read_frames(dir / f);
    REQUIRE(frames.size() == 2);
    CHECK(frames[0].kind == mimo_ae::FrameKind::kEncoderPart);
    CHECK(frames[1].kind == mimo_ae::FrameKind::kDecoderPart);
  }
  std::ifstream m(dir / "manifest.csv");
  int lines = 0;
  for (std::string l; std::getline(m, l);) ++lines;
  CHECK(lines == 3);

  const fs::path again = scratch("train2");
  REQUIRE(run("train " + kTiny + " --out " + again.string()) == 0);
  CHECK(slurp(dir / "block_000001.maef") == slurp(again / "block_000001.maef"));
  CHECK(slurp(dir / "manifest.csv") == slurp(again / "manifest.csv"));
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST_CASE("unwritable output exits 2") {
  const fs::path dir = scratch("ro");
  fs::create_directories(dir);
  std::ofstream(dir / "blocker") << "x";
  CHECK(run("train " + kTiny + " --out " + (dir / "blocker" / "sub").string()) == 2);
  CHECK(run("sweep " + kTiny + " --out " + (dir / "blocker" / "s.csv").string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("sweep, report and seeds") {
  const fs::path dir = scratch("sweep");
  fs::create_directories(dir);
  const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string(),
                    c = (dir / "c.csv").string();
  REQUIRE(run("sweep " + kTiny + " --seed 7 --threads 2 --plot --out " + a) == 0);
  REQUIRE(run("sweep " + kTiny + " --seed 7 --threads 1 --out " + b) == 0);
  REQUIRE(run("sweep " + kTiny + " --seed 8 --out " + c) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
  CHECK(fs::exists(dir / "a.report.txt"));
  CHECK(fs::exists(dir / "a.plot.csv"));
  // full_bw, ae/8, array_reduced/8, admm/4 at 2 SNRs
  std::ifstream f(a);
  int lines = 0;
  for (std::string l; std::getline(f, l);) ++lines;
  CHECK(lines == 1 + 4 * 2);

  CHECK(run("report " + a) == 0);
  std::ofstream(dir / "bad.csv") << "scenario,n_div\nae,8\n";
  CHECK(run("report " + (dir / "bad.csv").string()) == 2);
  CHECK(run("report " + (dir / "missing.csv").string()) == 2);
  fs::remove_all(dir);
}
