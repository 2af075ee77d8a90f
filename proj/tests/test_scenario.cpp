#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dai/scenario.hpp"
#include "doctest.h"

using namespace dai;
namespace fs = std::filesystem;

namespace {

const char* kMiniConfig = R"(# compact size scan
[scenario]
name = mini
kind = diamond_scan

[geometry]
kind = single_diamond
n_list = 2:12:2

[potential]
kind = linear
gradU_Hz_per_d = 324.5

[plan]
seed = 321
phi_points = 12
shots_per_point = 50
)";

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("dai_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Value of the first "key": <number> after `anchor` in a JSON-ish text.
double number_after(const std::string& text, const std::string& anchor,
                    const std::string& key) {
  std::size_t at = text.find(anchor);
  REQUIRE(at != std::string::npos);
  std::size_t k = text.find("\"" + key + "\":", at);
  REQUIRE(k != std::string::npos);
  return std::strtod(text.c_str() + k + key.size() + 3, nullptr);
}

}  // namespace

TEST_CASE("empty config misses scenario.name first") {
  ConfigFile cfg = ConfigFile::parse_text("", "empty", ".");
  try {
    load_scenario(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("scenario.name") != std::string::npos);
  }
}

TEST_CASE("missing plan keys are named") {
  std::string text = "[scenario]\nname = x\nkind = diamond_scan\n[geometry]\nkind = "
                     "single_diamond\nn_list = 2,4\n";
  try {
    load_scenario(ConfigFile::parse_text(text, "t", "."));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("plan.seed") != std::string::npos);
  }
}

TEST_CASE("config syntax errors") {
  CHECK_THROWS_AS(ConfigFile::parse_text("key_without_section = 1\n", "t", "."), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse_text("[a]\nx 1\n", "t", "."), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse_text("[a]\nx = 1\nx = 2\n", "t", "."), ConfigError);
  ConfigFile bad_num = ConfigFile::parse_text("[plan]\nseed = abc\n", "t", ".");
  CHECK_THROWS_AS(bad_num.require_u64("plan.seed"), ConfigError);
}

TEST_CASE("list parsing") {
  ConfigFile cfg = ConfigFile::parse_text("[a]\nr = 2:8:2\nl = 1, 5, 9\n", "t", ".");
  CHECK(cfg.require_int_list("a.r") == std::vector<int>{2, 4, 6, 8});
  CHECK(cfg.require_double_list("a.l") == std::vector<double>{1.0, 5.0, 9.0});
}

TEST_CASE("mini scenario writes deterministic artifacts") {
  Scenario sc = load_scenario(ConfigFile::parse_text(kMiniConfig, "mini", "."));
  CHECK(sc.name == "mini");

  fs::path out1 = fresh_dir("mini1");
  fs::path out4 = fresh_dir("mini4");
  RunOptions opt1{out1, 1, std::nullopt};
  RunOptions opt4{out4, 4, std::nullopt};
  CHECK(run_scenario(sc, opt1) == 0);
  CHECK(run_scenario(sc, opt4) == 0);

  for (const char* name : {"truth.json", "fits.json", "summary.csv"}) {
    CAPTURE(name);
    CHECK(slurp(out1 / name) == slurp(out4 / name));
  }
  for (int i = 0; i < 6; ++i) {
    char label[64];
    std::snprintf(label, sizeof label, "fringes/i%03d_n%02d.csv", i, 2 * (i + 1));
    CHECK(slurp(out1 / label) == slurp(out4 / label));
  }

  std::string truth = slurp(out1 / "truth.json");
  CHECK(number_after(truth, "i005_n12", "phi_rad") == doctest::Approx(2.0552).epsilon(1e-4));
  CHECK(number_after(truth, "i005_n12", "contrast") == doctest::Approx(0.595).epsilon(2e-3));

  std::string summary = slurp(out1 / "summary.csv");
  CHECK(summary.rfind("scenario,n,truth_phi_rad,fit_phi_rad,fit_sigma,contrast_truth,"
                      "contrast_fit\n", 0) == 0);
  CHECK(summary.find("mini,2,") != std::string::npos);

  std::string fits = slurp(out1 / "fits.json");
  CHECK(fits.find("\"gradU_Hz_per_d\"") != std::string::npos);
  double fitted = number_after(fits, "analysis", "gradU_Hz_per_d");
  double sigma = number_after(fits, "analysis", "gradU_sigma_Hz_per_d");
  CHECK(std::abs(fitted - 324.5) < 4.0 * sigma);

  fs::remove_all(out1);
  fs::remove_all(out4);
}

TEST_CASE("seed override changes the draws") {
  Scenario sc = load_scenario(ConfigFile::parse_text(kMiniConfig, "mini", "."));
  fs::path a = fresh_dir("seed_a");
  fs::path b = fresh_dir("seed_b");
  CHECK(run_scenario(sc, {a, 1, std::nullopt}) == 0);
  CHECK(run_scenario(sc, {b, 1, 999}) == 0);
  CHECK(slurp(a / "truth.json") != slurp(b / "truth.json"));  // seed line differs
  CHECK(slurp(a / "fringes/i000_n02.csv") != slurp(b / "fringes/i000_n02.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("noiseless accel scan reports slope ratios") {
  std::string text = R"([scenario]
name = accel_demo
kind = accel_scan
[geometry]
n_list = 4,12,20
accel_list_g = -5:5:1
t_acc_us = 20
[plan]
seed = 7
noiseless = true
)";
  Scenario sc = load_scenario(ConfigFile::parse_text(text, "t", "."));
  fs::path out = fresh_dir("accel");
  CHECK(run_scenario(sc, {out, 2, std::nullopt}) == 0);
  std::string fits = slurp(out / "fits.json");
  std::size_t at = fits.find("\"slope_ratios\": [");
  REQUIRE(at != std::string::npos);
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;
  CHECK(std::sscanf(fits.c_str() + at, "\"slope_ratios\": [%lf,%lf,%lf]", &r1, &r2, &r3) == 3);
  CHECK(r1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r2 == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r3 == doctest::Approx(5.0).epsilon(1e-9));

  std::string truth = slurp(out / "truth.json");
  // n=20 at +5 g sits at the end of the accel sweep.
  CHECK(number_after(truth, "i032_n20", "phi_rad") == doctest::Approx(8.886).epsilon(2e-4));
  fs::remove_all(out);
}

TEST_CASE("single scenario from a DSL file") {
  fs::path dir = fresh_dir("dsl");
  {
    std::ofstream out(dir / "seq.dsl");
    out << "Q(0) S+ P S- S+ P S- Q(0)\n";
  }
  std::string text = R"([scenario]
name = dsl_demo
kind = single
[geometry]
dsl_file = seq.dsl
[potential]
kind = linear
gradU_Hz_per_d = 324.5
[plan]
seed = 11
shots_per_point = 200
)";
  Scenario sc = load_scenario(ConfigFile::parse_text(text, "t", dir));
  fs::path out = fresh_dir("dsl_out");
  CHECK(run_scenario(sc, {out, 1, std::nullopt}) == 0);
  std::string truth = slurp(out / "truth.json");
  CHECK(number_after(truth, "sequences", "n") == 4);
  // Four-shift diamond: bracket 4*(30us) - 2*(12us) = 96 us.
  CHECK(number_after(truth, "sequences", "phi_rad") ==
        doctest::Approx(2.0 * 3.14159265358979 * 324.5 * 96e-6).epsilon(1e-6));
  fs::remove_all(dir);
  fs::remove_all(out);
}

TEST_CASE("guard violations surface as config errors") {
  std::string text = R"([scenario]
name = bad
kind = accel_scan
[geometry]
n_list = 4
accel_list_m_s2 = 60000
t_acc_us = 20
[plan]
seed = 1
noiseless = true
)";
  Scenario sc = load_scenario(ConfigFile::parse_text(text, "t", "."));
  fs::path out = fresh_dir("bad");
  CHECK_THROWS_AS(run_scenario(sc, {out, 1, std::nullopt}), ConfigError);
  fs::remove_all(out);
}
