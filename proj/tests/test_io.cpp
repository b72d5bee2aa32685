#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "msgn/app/commands.hpp"
#include "msgn/io/config.hpp"
#include "msgn/io/csv.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace msgn;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("msgn_test_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name, std::ios::binary) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const char* flat_config =
    "grid.n = 32\n"
    "grid.length = 4\n"
    "time.t_end = 0.2\n"
    "init.kind = flat\n";

}  // namespace

TEST(Config, ParsesValuesAndRatios) {
  io::Config c = io::Config::parse("# comment\nmodel.beta = 2/15  # trailing\n grid.n=64\nlist = 1, 2/4 ,3\nflag = yes\n");
  EXPECT_DOUBLE_EQ(c.get_double("model.beta"), 2.0 / 15.0);
  EXPECT_EQ(c.get_int("grid.n"), 64);
  EXPECT_EQ(c.get_doubles("list"), (std::vector<double>{1.0, 0.5, 3.0}));
  EXPECT_TRUE(c.get_bool("flag", false));
  EXPECT_EQ(c.get_double("missing", 1.5), 1.5);
  EXPECT_EQ(c.resolved().at("missing"), "1.5");
  EXPECT_EQ(c.resolved().at("model.beta"), "2/15");
  EXPECT_NO_THROW(c.reject_unused());
}

TEST(Config, ReportsLineNumbers) {
  auto message = [](const std::string& text) {
    try {
      io::Config::parse(text, "f.cfg");
    } catch (const io::ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_EQ(message("a = 1\nnot a pair\n"), "f.cfg:2: expected 'key = value'");
  EXPECT_EQ(message("a = 1\n\na = 2\n"), "f.cfg:3: duplicate key 'a'");
  EXPECT_EQ(message("bad key = 1\n"), "f.cfg:1: invalid key 'bad key'");
  EXPECT_EQ(message("a =\n"), "f.cfg:1: key 'a' has no value");
}

TEST(Config, TypeErrorsAndUnknownKeys) {
  io::Config c = io::Config::parse("a = x\nb = 1.5\nc = maybe\nd = 1,,2\ne = 1/0\nunused = 3\n", "f.cfg");
  EXPECT_THROW(c.get_double("a"), io::ConfigError);
  EXPECT_THROW(c.get_int("b"), io::ConfigError);
  EXPECT_THROW(c.get_bool("c", true), io::ConfigError);
  EXPECT_THROW(c.get_doubles("d"), io::ConfigError);
  EXPECT_THROW(c.get_double("e"), io::ConfigError);
  EXPECT_THROW(c.get_string("nothing"), io::ConfigError);
  try {
    c.reject_unused();
    FAIL();
  } catch (const io::ConfigError& e) {
    EXPECT_EQ(std::string(e.what()), "f.cfg:6: unknown key 'unused'");
  }
}

TEST(Config, EchoIsSortedAndReparses) {
  io::Config c = io::Config::parse("z = 1\na = 2/3\n");
  c.get_string("z");
  c.get_double("a");
  c.get_int("m", 7);
  EXPECT_EQ(c.echo(), "a = 2/3\nm = 7\nz = 1\n");
  io::Config again = io::Config::parse(c.echo());
  EXPECT_DOUBLE_EQ(again.get_double("a"), 2.0 / 3.0);
}

TEST(Csv, WritesFullPrecision) {
  TempDir dir;
  {
    io::CsvWriter w(dir.path() / "t.csv", {"a", "b"});
    w.row({0.1, 1.0 / 3.0});
    w.row({-2.0, 1e-300});
    EXPECT_EQ(w.rows(), 2u);
    EXPECT_THROW(w.row({1.0}), ShapeError);
  }
  EXPECT_EQ(slurp(dir.path() / "t.csv"),
            "a,b\n0.10000000000000001,0.33333333333333331\n-2,1e-300\n");
  EXPECT_EQ(io::format_double(2.0 / 15.0), "0.13333333333333333");
}

TEST(Commands, RationalParsing) {
  EXPECT_EQ(app::to_rational("2/15"), Rational::make(2, 15));
  EXPECT_EQ(app::to_rational("4/30"), Rational::make(2, 15));
  EXPECT_EQ(app::to_rational("0.25"), Rational::make(1, 4));
  EXPECT_EQ(app::to_rational("3"), Rational::make(3, 1));
  EXPECT_FALSE(app::to_rational("0.1333333333333333333333"));
  EXPECT_FALSE(app::to_rational("abc"));
}

TEST(Commands, ExitCodes) {
  EXPECT_EQ(app::exit_code(Termination::reached_t_end), 0);
  EXPECT_EQ(app::exit_code(Termination::blowup_suspected), 10);
  EXPECT_EQ(app::exit_code(Termination::depth_vanishing), 11);
  EXPECT_EQ(app::exit_code(Termination::dt_underflow), 12);
  EXPECT_EQ(app::exit_code(Termination::instability), 13);
}

TEST(Commands, BoundsJson) {
  std::ostringstream out, err;
  EXPECT_EQ(app::cmd_bounds(0.1, 9.81, 1.0, 2.0 / 15.0, out, err), 0);
  const json j = json::parse(out.str());
  EXPECT_NEAR(j["h_min"].get<double>(), 0.655849077173714377, 1e-15);
  EXPECT_NEAR(j["u_max"].get<double>(), 0.606290956597936749, 1e-15);
  std::ostringstream out2, err2;
  EXPECT_EQ(app::cmd_bounds(0.9, 9.81, 1.0, 2.0 / 15.0, out2, err2), 3);
  EXPECT_NEAR(json::parse(out2.str())["energy_threshold"].get<double>(), 0.8443103694732168, 1e-15);
  EXPECT_FALSE(err2.str().empty());
  std::ostringstream out3, err3;
  EXPECT_EQ(app::cmd_bounds(0.1, 9.81, 1.0, -1.0, out3, err3), 2);
}

TEST(Commands, SimulateFlatWritesOutputs) {
  TempDir dir;
  const fs::path cfg = dir.write("flat.cfg", flat_config);
  std::ostringstream err;
  EXPECT_EQ(app::cmd_simulate(cfg, dir.path() / "run", err), 0);
  EXPECT_TRUE(fs::exists(dir.path() / "run" / "series.csv"));
  EXPECT_TRUE(fs::exists(dir.path() / "run" / "snapshots" / "index.csv"));
  const json m = json::parse(slurp(dir.path() / "run" / "manifest.json"));
  EXPECT_EQ(m["command"], "simulate");
  EXPECT_EQ(m["termination"], "reached_t_end");
  EXPECT_EQ(m["config_echo"]["output.dir"], (dir.path() / "run").string());
  EXPECT_EQ(m["config_echo"]["time.courant"], "0.29999999999999999");
  EXPECT_FALSE(m["outputs"].empty());
}

TEST(Commands, EchoedConfigReproducesBytes) {
  TempDir dir;
  const fs::path cfg =
      dir.write("g.cfg", "grid.n = 64\ngrid.length = 10\ntime.t_end = 0.3\ninit.kind = random\ninit.seed = 3\n");
  std::ostringstream err;
  ASSERT_EQ(app::cmd_simulate(cfg, dir.path() / "a", err), 0);
  const json m = json::parse(slurp(dir.path() / "a" / "manifest.json"));
  std::string echo;
  for (const auto& [k, v] : m["config_echo"].items()) echo += k + " = " + v.get<std::string>() + "\n";
  ASSERT_EQ(app::cmd_simulate(dir.write("echo.cfg", echo), dir.path() / "b", err), 0);
  EXPECT_EQ(slurp(dir.path() / "a" / "series.csv"), slurp(dir.path() / "b" / "series.csv"));
  EXPECT_EQ(slurp(dir.path() / "a" / "snapshots" / "0000.csv"), slurp(dir.path() / "b" / "snapshots" / "0000.csv"));
}

TEST(Commands, MalformedConfigExitsTwo) {
  TempDir dir;
  std::ostringstream err;
  EXPECT_EQ(app::cmd_simulate(dir.write("a.cfg", "grid.n = 32\nthis line is wrong\n"), dir.path() / "o", err), 2);
  EXPECT_NE(err.str().find("a.cfg:2:"), std::string::npos);
  std::ostringstream err2;
  EXPECT_EQ(app::cmd_simulate(dir.write("b.cfg", std::string(flat_config) + "typo.key = 1\n"), dir.path() / "o", err2), 2);
  EXPECT_NE(err2.str().find("unknown key 'typo.key'"), std::string::npos);
  std::ostringstream err3;
  EXPECT_EQ(app::cmd_simulate(dir.write("c.cfg", "grid.n = 31\ntime.t_end = 1\ninit.kind = flat\n"), dir.path() / "o",
                              err3),
            2);
  std::ostringstream err4;
  EXPECT_EQ(app::cmd_simulate(dir.path() / "missing.cfg", dir.path() / "o", err4), 2);
}

TEST(Commands, BlowupCapAtThresholdExitsFour) {
  TempDir dir;
  std::ostringstream err;
  const fs::path cfg = dir.write("b.cfg",
                                 "grid.n = 256\ngrid.length = 0.13\ntime.t_end = 1\nblowup.steepness = 1.6\n"
                                 "blowup.energy_cap = 0.8443103694732168\n");
  EXPECT_EQ(app::cmd_blowup(cfg, dir.path() / "o", err), 4);
  EXPECT_NE(err.str().find("energy_cap"), std::string::npos);
  std::ostringstream err2;
  const fs::path steep = dir.write("s.cfg",
                                   "grid.n = 256\ngrid.length = 0.13\ntime.t_end = 1\nblowup.steepness = 50\n"
                                   "blowup.energy_cap = 1e-4\n");
  EXPECT_EQ(app::cmd_blowup(steep, dir.path() / "o", err2), 4);
  EXPECT_NE(err2.str().find("achievable minimum P0"), std::string::npos);
}

TEST(Commands, DispersionTable) {
  TempDir dir;
  std::ostringstream err;
  const fs::path cfg = dir.write("d.cfg", "model.beta = 2/15, 0.2\nsweep.khbar = 0, 1\n");
  ASSERT_EQ(app::cmd_dispersion(cfg, dir.path() / "o", err), 0);
  std::istringstream table(slurp(dir.path() / "o" / "dispersion.csv"));
  std::string header, row0, row1, row2;
  std::getline(table, header);
  std::getline(table, row0);
  std::getline(table, row1);
  std::getline(table, row2);
  EXPECT_EQ(header, "beta,khbar,msgn,exact,rel_error,c4_model,c4_exact,c4_matches");
  EXPECT_EQ(row1.substr(row1.rfind(',') + 1), "1");
  EXPECT_EQ(row2.substr(row2.rfind(',') + 1), "0");
}

TEST(Commands, ShippedConfigsParse) {
  // Every shipped simulate config must at least load and name a known init kind.
  for (const char* name : {"flat.cfg", "gaussian.cfg", "random.cfg"}) {
    io::Config c = io::Config::load(fs::path(MSGN_CONFIG_DIR) / name);
    EXPECT_TRUE(c.has("init.kind")) << name;
  }
}
