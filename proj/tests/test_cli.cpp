#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"
#include "oamfso/ggd.hpp"
#include "oamfso/metrics.hpp"
#include "oamfso/sample_store.hpp"

using namespace oamfso;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const char* env = std::getenv("OAMFSO_TEST_TMP");
  fs::path p = env ? env : "cli_tmp";
  fs::create_directories(p);
  return p;
}

struct Captured {
  int code;
  std::string out;
};

Captured run_cli(const std::vector<std::string>& args) {
  std::ostringstream buf;
  auto* old = std::cout.rdbuf(buf.rdbuf());
  const int code = cli::run(args);
  std::cout.rdbuf(old);
  return {code, buf.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const std::string& name, const std::string& body) {
  const auto p = tmp_dir() / name;
  std::ofstream(p) << body;
  return p;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      const auto b = cell.find_first_not_of(' ');
      f.push_back(b == std::string::npos ? "" : cell.substr(b));
    }
    rows.push_back(f);
  }
  return rows;
}

const char* kSmallCampaign =
    "grid_points = 128\n"
    "grid_spacing = 2.72e-3\n"
    "cn2 = 7e-14\n"
    "tx_modes = 1, 2\n"
    "rx_modes = 1, 2\n"
    "realizations = 60\n"
    "seed = 5\n";

}  // namespace

TEST_CASE("regime command") {
  const auto r = run_cli({"regime", "--cn2", "5e-15"});
  CHECK(r.code == 0);
  CHECK(r.out.find("regime weak") != std::string::npos);
  CHECK(run_cli({"regime", "--cn2", "3e-13"}).out.find("regime saturation") != std::string::npos);
  CHECK(run_cli({"regime"}).code == 2);
  CHECK(run_cli({"regime", "--cn2", "-1"}).code == 2);
  CHECK(run_cli({"no-such-command"}).code == 2);
}

TEST_CASE("configuration errors exit with 2") {
  const auto bad = write_config("bad.cfg", "grid_points = 128\nbogus_key = 1\n");
  CHECK(run_cli({"simulate", bad.string()}).code == 2);
  const auto dup = write_config("dup.cfg", "cn2 = 1e-14\ncn2 = 2e-14\n");
  CHECK(run_cli({"simulate", dup.string()}).code == 2);
  const auto aperture = write_config("aperture.cfg", "grid_points = 64\ntx_modes = 9\nrx_modes = 9\n");
  CHECK(run_cli({"simulate", aperture.string()}).code == 2);
}

TEST_CASE("missing inputs exit with 4") {
  CHECK(run_cli({"fit", (tmp_dir() / "absent.store").string(), "--all"}).code == 4);
  CHECK(run_cli({"metrics", (tmp_dir() / "absent.csv").string()}).code == 4);
}

TEST_CASE("constant channel cannot be fitted") {
  IrradianceSampleSet set("c", {1}, {1});
  for (int k = 0; k < 100; ++k) set.add_value(k, 1, 1, 0.5);
  const auto path = tmp_dir() / "constant.store";
  store::write(path, set);
  CHECK(run_cli({"fit", path.string(), "--m", "1", "--n", "1"}).code == 3);
}

TEST_CASE("campaign pipeline") {
  const auto dir = tmp_dir();
  const auto cfg = write_config("small.cfg", kSmallCampaign);
  const auto s1 = dir / "run1.store", s2 = dir / "run2.store";
  REQUIRE(run_cli({"simulate", cfg.string(), "--out", s1.string()}).code == 0);
  REQUIRE(run_cli({"simulate", cfg.string(), "--out", s2.string(), "--jobs", "2"}).code == 0);
  CHECK(slurp(s1) == slurp(s2));
  CHECK(fs::exists(fs::path(s1.string() + ".manifest")));

  const auto all = dir / "all.csv";
  REQUIRE(run_cli({"fit", s1.string(), "--all", "--out", all.string()}).code == 0);
  std::ifstream in_all(all);
  std::string digest;
  const auto rows = read_fit_table(in_all, &digest);
  CHECK(rows.size() == 4);
  CHECK(digest == store::read(s1).digest());
  for (const auto& row : rows) {
    const auto one = dir / "one.csv";
    REQUIRE(run_cli({"fit", s1.string(), "--m", std::to_string(row.m), "--n", std::to_string(row.n),
                     "--out", one.string()})
                .code == 0);
    std::ifstream in_one(one);
    const auto single = read_fit_table(in_one, nullptr);
    REQUIRE(single.size() == 1);
    CHECK(single[0].report.params.a == row.report.params.a);
    CHECK(single[0].report.params.b == row.report.params.b);
    CHECK(single[0].report.params.c == row.report.params.c);
  }

  SUBCASE("metrics agree with direct calls") {
    const auto curves = dir / "curves.csv";
    REQUIRE(run_cli({"metrics", all.string(), "--m", "1", "--n", "1", "--mu-db", "0:40:10",
                     "--gamma-th-db", "0,5", "--out", curves.string()})
                .code == 0);
    CHECK(run_cli({"metrics", all.string()}).code == 2);  // ambiguous selection
    const auto table = csv_rows(slurp(curves));
    REQUIRE(table.size() == 6);
    CHECK(table[0][2] == "p_out(gamma_th=0dB)");
    const GgdParams p = rows[0].m == 1 && rows[0].n == 1 ? rows[0].report.params : rows[1].report.params;
    double prev_cap = -1.0;
    for (std::size_t i = 1; i < table.size(); ++i) {
      const double mu_db = std::stod(table[i][0]);
      const auto model = SnrModel::from_irradiance(p, db_to_linear(mu_db));
      CHECK(std::abs(std::stod(table[i][2]) - metrics::outage_probability(model, 1.0)) < 1e-12);
      const double cap = std::stod(table[i][1]);
      CHECK(cap > prev_cap);
      prev_cap = cap;
    }
  }

  SUBCASE("mimo and stc outputs") {
    const auto rep = dir / "mimo.csv", corr = dir / "corr.csv", emp = dir / "emp.csv";
    REQUIRE(run_cli({"mimo", s1.string(), "--set", "1", "--set", "1,2", "--mu-db", "0:20:10",
                     "--out", rep.string(), "--correlation-out", corr.string(), "--empirical-out",
                     emp.string(), "--bits-per-sample", "50"})
                .code == 0);
    const auto r = csv_rows(slurp(rep));
    CHECK(r.size() == 7);
    CHECK(r[2][0] == "+1");
    CHECK(r[4][0] == "+1:+2");
    CHECK(csv_rows(slurp(corr)).size() == 3);
    CHECK(csv_rows(slurp(emp))[0][2] == "ber_empirical");

    const auto stc_out = dir / "stc.csv";
    REQUIRE(run_cli({"stc", s1.string(), "--mu-db", "10,20", "--max-codewords", "5000", "--out",
                     stc_out.string()})
                .code == 0);
    const auto s = csv_rows(slurp(stc_out));
    REQUIRE(s.size() == 9);
    CHECK(s[0][4] == "ber_bound");
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i][0] == "alamouti")
        CHECK_FALSE(s[i][4].empty());
      else
        CHECK(s[i][4].empty());
    }
    CHECK(run_cli({"stc", s1.string(), "--code", "fancy:2"}).code == 2);
  }
}

TEST_CASE("append continues the realization sequence") {
  const auto dir = tmp_dir();
  auto body = std::string(kSmallCampaign);
  body.replace(body.find("realizations = 60"), 17, "realizations = 20");
  const auto cfg = write_config("append.cfg", body);
  const auto path = dir / "append.store";
  fs::remove(path);
  REQUIRE(run_cli({"simulate", cfg.string(), "--out", path.string()}).code == 0);
  REQUIRE(run_cli({"simulate", cfg.string(), "--out", path.string(), "--append"}).code == 0);
  const auto set = store::read(path);
  CHECK(set.size() == 40);
  CHECK(set.realization_indices().back() == 39);
  const auto other = write_config("other.cfg", body + "screen_gain = 0.5\n");
  CHECK(run_cli({"simulate", other.string(), "--out", path.string(), "--append"}).code == 2);
}
