// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the specrec binary: exit codes, file outputs,
// determinism. Driven through std::system against SPECREC_BIN.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "specrec/dataset.hpp"

using namespace specrec;
namespace fs = std::filesystem;

namespace {

const std::string kBin = SPECREC_BIN;

int run(const std::string& args) {
  const std::string cmd = kBin + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "specrec_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  return std::string(std::istreambuf_iterator<char>(f), {});
}

// small 16x16 scenario so every step is fast
std::string small_cfg() {
  static const fs::path path = [] {
    const fs::path p = work_dir() / "small.cfg";
    std::ofstream f(p);
    f << "[grid]\nrows = 16\ncols = 16\n";
    return p;
  }();
  return path.string();
}

}  // namespace

TEST_CASE("usage errors yield exit code 2") {
  CHECK(run("") == 2);
  CHECK(run("gen-dataset --bogus-flag 1") == 2);
  CHECK(run("no-such-command") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("config and io error codes are distinct") {
  const fs::path bad_cfg = work_dir() / "bad.cfg";
  std::ofstream(bad_cfg) << "[grid]\nrows = banana\n";
  CHECK(run("gen-dataset --config " + bad_cfg.string() + " --count 1 --out-dir " +
            (work_dir() / "x").string()) == 3);
  CHECK(run("render --input " + (work_dir() / "missing.grid").string() + " --out " +
            (work_dir() / "x.bmp").string()) == 4);
  CHECK(run("train --corpus " + (work_dir() / "missing_manifest.txt").string()) == 4);
}

TEST_CASE("gen-dataset produces a loadable, reproducible corpus") {
  const fs::path d1 = work_dir() / "corpus1", d2 = work_dir() / "corpus2";
  const std::string common =
      " --config " + small_cfg() + " --count 3 --seed 5 --with-attacks --set attack.probability=0.4";
  REQUIRE(run("gen-dataset --out-dir " + d1.string() + common) == 0);
  REQUIRE(run("gen-dataset --out-dir " + d2.string() + common) == 0);

  const Manifest m = load_manifest((d1 / "manifest.txt").string());
  CHECK(m.count == 3);
  CHECK(m.rows == 16);
  CHECK(m.with_attacks);
  for (const auto& rec : m.records) {
    CHECK(fs::exists(d1 / rec.clean_path));
    CHECK(fs::exists(d1 / rec.attacked_path));
    CHECK(fs::exists(d1 / rec.mask_path));
  }
  CHECK(slurp(d1 / "clean_000002.grid") == slurp(d2 / "clean_000002.grid"));
  CHECK(slurp(d1 / "manifest.txt") == slurp(d2 / "manifest.txt"));
}

TEST_CASE("attack with p = 0 reproduces the input map bytes") {
  const fs::path dir = work_dir() / "p0";
  REQUIRE(run("gen-dataset --config " + small_cfg() + " --count 1 --seed 2 --out-dir " + dir.string()) == 0);
  const fs::path clean = dir / "clean_000000.grid";
  const fs::path out = dir / "attacked.grid";
  REQUIRE(run("attack --config " + small_cfg() + " --input " + clean.string() + " --p 0 --out " +
              out.string()) == 0);
  CHECK(slurp(clean) == slurp(out));
}

TEST_CASE("render emits a BMP with the scaled dimensions") {
  const fs::path dir = work_dir() / "render";
  REQUIRE(run("gen-dataset --config " + small_cfg() + " --count 1 --seed 3 --out-dir " + dir.string()) == 0);
  const fs::path img = dir / "map.bmp";
  REQUIRE(run("render --config " + small_cfg() + " --input " + (dir / "clean_000000.grid").string() +
              " --out " + img.string() + " --scale 3") == 0);
  const std::string bmp = slurp(img);
  REQUIRE(bmp.size() > 54);
  CHECK(bmp[0] == 'B');
  CHECK(bmp[1] == 'M');
  auto u32 = [&](size_t off) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(bmp[off])) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(bmp[off + 1])) << 8) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(bmp[off + 2])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(bmp[off + 3])) << 24);
  };
  CHECK(u32(18) == 48);  // 16 cells x scale 3
  CHECK(u32(22) == 48);
}

TEST_CASE("train, reconstruct, evaluate round trip") {
  const fs::path dir = work_dir() / "pipeline";
  REQUIRE(run("gen-dataset --config " + small_cfg() + " --count 2 --seed 4 --out-dir " + dir.string()) == 0);
  const std::string manifest = (dir / "manifest.txt").string();
  const std::string ckpt = (dir / "model.ckpt").string();
  REQUIRE(run("train --corpus " + manifest + " --out " + ckpt +
              " --steps 3 --batch 2 --channels 8 --time-dim 32 --seed 6") == 0);
  CHECK(fs::exists(ckpt));
  CHECK(fs::exists(ckpt + ".loss.txt"));

  // attack then reconstruct
  const std::string attacked = (dir / "attacked.grid").string();
  REQUIRE(run("attack --config " + small_cfg() + " --input " + (dir / "clean_000000.grid").string() +
              " --p 0.4 --seed 9 --out " + attacked) == 0);
  const std::string recon = (dir / "recon.grid").string();
  REQUIRE(run("reconstruct --model " + ckpt + " --input " + attacked + " --out " + recon +
              " --t-star 5 --rounds 1 --seed 11") == 0);
  const GridF r = load_grid(recon);
  CHECK(r.rows() == 16);

  SUBCASE("reconstruction is deterministic") {
    const std::string recon2 = (dir / "recon2.grid").string();
    REQUIRE(run("reconstruct --model " + ckpt + " --input " + attacked + " --out " + recon2 +
                " --t-star 5 --rounds 1 --seed 11") == 0);
    CHECK(slurp(recon) == slurp(recon2));
  }

  SUBCASE("evaluate writes a table and csv with the requested rows") {
    const std::string prefix = (dir / "report").string();
    REQUIRE(run("evaluate --model " + ckpt + " --config " + small_cfg() +
                " --scenarios ground:0.3,airborne:0.5 --seeds 1 --t-star 3 --rounds 1 --out " + prefix) ==
            0);
    const std::string csv = slurp(prefix + ".csv");
    CHECK(csv.find("ground,0.3") != std::string::npos);
    CHECK(csv.find("airborne,0.5") != std::string::npos);
    CHECK(fs::exists(prefix + ".txt"));
  }

  SUBCASE("mismatched normalization refused") {
    CHECK(run("reconstruct --model " + ckpt + " --input " + attacked + " --out " +
              (dir / "x.grid").string() + " --config " + small_cfg() +
              " --set normalization.min_dbm=-120 --t-star 2 --rounds 1") == 3);
  }
}
