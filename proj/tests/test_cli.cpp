#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "relbosons/cli.hpp"

namespace fs = std::filesystem;
using relbosons::cli::run;

namespace {

int invoke(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"relbosons"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("relbosons_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

const fs::path kGolden = RELBOSONS_GOLDEN_DIR;

}  // namespace

TEST_CASE("format_number") {
  using relbosons::cli::format_number;
  CHECK(format_number(1.5) == "1.5");
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(2.0 + std::sqrt(5.0) / 2 - 1) == "2.11803399");
  CHECK(format_number(INFINITY) == "inf");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(format_number(NAN) == "nan");
  CHECK(format_number(1e-12) == "1e-12");
}

TEST_CASE("write_atomic replaces and leaves no temporaries") {
  Scratch s;
  const fs::path p = s / "x.txt";
  relbosons::cli::write_atomic(p, "first\n");
  relbosons::cli::write_atomic(p, "second\n");
  CHECK(slurp(p) == "second\n");
  CHECK(std::distance(fs::directory_iterator(s.dir), fs::directory_iterator{}) == 1);
  CHECK_THROWS(relbosons::cli::write_atomic(s.dir / "missing" / "y.txt", "z"));
}

TEST_CASE("exit codes") {
  Scratch s;
  CHECK(invoke({}) == 2);
  CHECK(invoke({"bogus"}) == 2);
  CHECK(invoke({"gamma", "--no-such-flag"}) == 2);
  CHECK(invoke({"gamma", "--d", "abc"}) == 2);
  CHECK(invoke({"gamma", "--d", "-1"}) == 2);
  CHECK(invoke({"gamma", "--format", "xml"}) == 2);
  CHECK(invoke({"potential", "--q", "1:0:0.1"}) == 2);
  CHECK(invoke({"rayleigh"}) == 2);
  CHECK(invoke({"rayleigh", "--case", "spin2"}) == 2);
  CHECK(invoke({"density", "--dr", "0"}) == 2);
  CHECK(invoke({"--help"}) == 0);
  // a grid too short for the decay region fails the point, not the flags
  CHECK(invoke({"gamma", "--d", "1", "--qmax", "2", "--out", s / "g.csv"}) == 1);
  CHECK(invoke({"gamma", "--d", "0", "--n", "2000", "--out", s / "g.csv"}) == 0);
}

TEST_CASE("gamma sweep reproduces the golden levels") {
  Scratch s;
  for (const char* spin : {"0", "1"}) {
    CAPTURE(spin);
    const std::string out = s / "gamma.csv";
    REQUIRE(invoke({"gamma", "--spin", spin, "--d", "0,0.25,0.5,1,2,4,inf", "--out", out}) == 0);
    const auto got = rows(slurp(out));
    const auto want = rows(slurp(kGolden / (std::string("gamma_spin") + spin + ".csv")));
    REQUIRE(got.size() == want.size());
    CHECK(got[0] == want[0]);
    for (std::size_t i = 1; i < got.size(); ++i) {
      CHECK(got[i][0] == want[i][0]);
      CHECK(std::stod(got[i][1]) == doctest::Approx(std::stod(want[i][1])).epsilon(1e-8));
      CHECK(got[i][3] == want[i][3]);
    }
  }
}

TEST_CASE("golden intermediate levels agree at a second resolution") {
  // FD Richardson on twice the nodes and a longer box against the shooting golden values
  Scratch s;
  for (const char* spin : {"0", "1"}) {
    CAPTURE(spin);
    const std::string out = s / "fine.json";
    REQUIRE(invoke({"gamma", "--spin", spin, "--d", "0,0.25,0.5,1,2,4,inf", "--n", "16000", "--qmax", "14",
                    "--format", "json", "--out", out}) == 0);
    const auto fine = nlohmann::json::parse(slurp(out)).at("points");
    const auto golden = rows(slurp(kGolden / (std::string("gamma_spin") + spin + ".csv")));
    REQUIRE(fine.size() + 1 == golden.size());
    for (std::size_t i = 0; i < fine.size(); ++i) {
      CAPTURE(golden[i + 1][0]);
      CHECK(fine[i].at("d").get<std::string>() == golden[i + 1][0]);
      CHECK(std::abs(fine[i].at("gamma_fd").get<double>() - std::stod(golden[i + 1][1])) <= 1e-6);
    }
  }
}

TEST_CASE("level lines meet the exact endpoints") {
  Scratch s;
  const std::string out = s / "g.json";
  REQUIRE(invoke({"gamma", "--spin", "1", "--d", "0,inf", "--format", "json", "--out", out}) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  const auto& pts = j.at("points");
  REQUIRE(pts.size() == 2);
  CHECK(std::abs(pts[0].at("gamma").get<double>() - 2.5) <= 1e-6);
  CHECK(std::abs(pts[1].at("gamma").get<double>() - (1 + std::sqrt(5.0) / 2)) <= 1e-6);
  CHECK(pts[0].at("ok").get<bool>());
}

TEST_CASE("potential output is byte-identical to the golden file") {
  Scratch s;
  const std::string out = s / "w.csv";
  REQUIRE(invoke({"potential", "--spin", "1", "--d", "0,1,inf", "--q", "0.25:3:0.25", "--out", out}) == 0);
  CHECK(slurp(out) == slurp(kGolden / "potential_spin1.csv"));
}

TEST_CASE("repeated runs are byte-identical") {
  Scratch s;
  auto twice = [&](std::initializer_list<std::string> args, const std::string& name) {
    std::vector<std::string> a(args);
    auto go = [&](const std::string& out) {
      std::vector<std::string> full = a;
      full.push_back("--out");
      full.push_back(out);
      std::vector<const char*> argv{"relbosons"};
      for (const auto& x : full) argv.push_back(x.c_str());
      return run(static_cast<int>(argv.size()), argv.data());
    };
    REQUIRE(go(s / (name + ".1")) == 0);
    REQUIRE(go(s / (name + ".2")) == 0);
    CHECK(slurp(s / (name + ".1")) == slurp(s / (name + ".2")));
    CHECK_FALSE(slurp(s / (name + ".1")).empty());
  };
  twice({"gamma", "--spin", "0", "--d", "0.5,2", "--format", "json", "--n", "2000"}, "gamma");
  twice({"rayleigh", "--case", "spin0", "--d", "1", "--n", "500", "--init", "random", "--seed", "9"}, "ray");
  twice({"rayleigh", "--case", "trans-massless", "--step", "0.16", "--init", "random", "--seed", "3"}, "trans");
  twice({"density", "--rmax", "3", "--dr", "0.05", "--format", "json"}, "density");
}

TEST_CASE("density reports the negative shell") {
  Scratch s;
  REQUIRE(invoke({"density", "--rmax", "6", "--dr", "0.02", "--out", s / "rho.csv", "--shells", s / "shells.json",
                  "--map", s / "map.csv", "--map-extent", "2", "--map-step", "0.5"}) == 0);
  const auto csv = rows(slurp(s / "rho.csv"));
  REQUIRE(csv.size() >= 301);
  CHECK(csv[0][0] == "r");
  const auto shells = nlohmann::json::parse(slurp(s / "shells.json"));
  REQUIRE(shells.size() >= 1);
  CHECK(shells[0].at("rho_min").get<double>() < 0.0);
  CHECK(shells[0].at("r_min").get<double>() <= shells[0].at("r_max").get<double>());
  const auto map = rows(slurp(s / "map.csv"));
  // lattice points of the disc of radius 2 at step 1/2
  CHECK(map.size() == 1 + 49);
  for (std::size_t i = 1; i < map.size(); ++i) CHECK(std::hypot(std::stod(map[i][0]), std::stod(map[i][1])) <= 2.0);
}

TEST_CASE("rayleigh JSON") {
  Scratch s;
  REQUIRE(invoke({"rayleigh", "--case", "trans-massless", "--step", "0.16", "--out", s / "r.json", "--samples",
                  s / "f.csv"}) == 0);
  const auto j = nlohmann::json::parse(slurp(s / "r.json"));
  for (const char* key : {"gamma", "delta_q2", "delta_rq2", "iterations"}) CHECK(j.contains(key));
  CHECK(std::abs(j.at("gamma").get<double>() - 2.5) <= 1e-2);
  CHECK(j.at("closed_form_minimizer").contains("magnitude_reading"));
  CHECK(rows(slurp(s / "f.csv")).size() > 100);

  REQUIRE(invoke({"rayleigh", "--case", "long", "--d", "inf", "--n", "1000", "--out", s / "l.json"}) == 0);
  const auto l = nlohmann::json::parse(slurp(s / "l.json"));
  CHECK(std::abs(l.at("gamma").get<double>() - (1 + std::sqrt(5.0) / 2)) <= 1e-3);
}

TEST_CASE("verify passes every check") {
  Scratch s;
  CHECK(invoke({"verify", "--out", s / "v.json"}) == 0);
  const auto j = nlohmann::json::parse(slurp(s / "v.json"));
  REQUIRE(j.size() >= 15);
  for (const auto& c : j) {
    CAPTURE(c.at("name").get<std::string>());
    CHECK(c.at("passed").get<bool>());
  }
}
