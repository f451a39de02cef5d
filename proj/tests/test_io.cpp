#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "sgidla/aggregation.hpp"
#include "sgidla/errors.hpp"
#include "sgidla/io.hpp"
#include "sgidla/walker.hpp"

using namespace sgidla;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "sgidla_test_io";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

std::string error_of(const std::vector<std::string>& args) {
  try {
    parse_command_line(args);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int run_quietly(const std::vector<std::string>& args, std::string* err_text = nullptr) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_main(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::size_t count_byte(const std::string& pgm, unsigned char value) {
  const std::size_t header = pgm.find("255\n") + 4;
  return static_cast<std::size_t>(
      std::count(pgm.begin() + static_cast<long>(header), pgm.end(), static_cast<char>(value)));
}

}  // namespace

TEST_CASE("flags only") {
  const RunConfig cfg = parse_command_line(
      {"idla", "--graph", "sg2", "--particles", "100", "--seed", "7", "--out", "c.csv"});
  CHECK(cfg.command == Command::Idla);
  CHECK(cfg.graph == GraphFamily::GasketTwoSided);
  CHECK(cfg.particles == 100);
  CHECK(cfg.seed == 7);
  CHECK(cfg.out_path == "c.csv");
  CHECK(cfg.format == OutputFormat::Csv);

  const RunConfig defaults = parse_command_line({"scaling", "--quantity", "volume", "--kmax", "8"});
  CHECK(defaults.out_path == "scaling.csv");
  CHECK(defaults.k_max == 8);
  CHECK(parse_command_line({"abelian-test", "--pause-radius", "3"}).pause_radius == 3);
  CHECK(parse_command_line({"idla", "--seed", "18446744073709551615"}).seed == 18446744073709551615ULL);
}

TEST_CASE("file values are overridden by flags") {
  const fs::path file = scratch_dir() / "cfg.json";
  spit(file, R"({"command": "sandpile", "n": 4, "eps": 0.5, "graph": "carpet", "seed": 3})");
  const RunConfig cfg = parse_command_line({"idla", "--config", file.string(), "--n", "9"});
  CHECK(cfg.command == Command::Idla);
  CHECK(cfg.n == 9);
  CHECK(cfg.eps == 0.5);
  CHECK(cfg.graph == GraphFamily::CarpetQuadrant);
  const auto echo = cfg.to_json();
  CHECK(echo.at("n") == 9);
  CHECK(echo.at("graph") == "carpet");
  CHECK(echo.at("seed") == 3);
}

TEST_CASE("config errors name the key") {
  const fs::path file = scratch_dir() / "typo.json";
  spit(file, R"({"partciles": 10})");
  CHECK(error_of({"idla", "--config", file.string()}).find("partciles") != std::string::npos);
  CHECK(error_of({"idla", "--partciles", "10"}).find("partciles") != std::string::npos);
  CHECK(error_of({"idla", "--n", "eight"}).find("--n") != std::string::npos);
  CHECK(error_of({"fly"}).find("fly") != std::string::npos);
  CHECK(error_of({"idla", "--format", "png"}).find("format") != std::string::npos);
  CHECK(error_of({"render"}).find("'in'") != std::string::npos);

  CHECK_THROWS_WITH_AS(parse_config(nlohmann::json{{"n", 3}}), doctest::Contains("command"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(nlohmann::json{{"command", "idla"}, {"n", "3"}}),
                       doctest::Contains("'n'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(nlohmann::json{{"command", "idla"}, {"eps", true}}),
                       doctest::Contains("'eps'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(nlohmann::json{{"command", "idla"}, {"reps", -2}}),
                       doctest::Contains("'reps'"), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json{{"command", "idla"}, {"eps", 1.5}}), ConfigError);
}

TEST_CASE("exit codes") {
  std::string err;
  CHECK(run_quietly({"idla", "--partciles", "3"}, &err) == 2);
  CHECK(err.find("partciles") != std::string::npos);
  CHECK(run_quietly({"render", "--in", (scratch_dir() / "missing.csv").string(), "--out",
                     (scratch_dir() / "m.pgm").string()}) == 3);
  CHECK(run_quietly({"idla", "--particles", "5", "--out", (scratch_dir() / "ok.csv").string()}) == 0);
  CHECK(run_quietly({"idla", "--config", (scratch_dir() / "nope.json").string()}) == 3);
}

TEST_CASE("output directory variable") {
  ::setenv("SGIDLA_OUTPUT_DIR", "/tmp/out-dir", 1);
  CHECK(resolve_output_path("a.csv") == fs::path("/tmp/out-dir/a.csv"));
  CHECK(resolve_output_path("/abs/a.csv") == fs::path("/abs/a.csv"));
  ::unsetenv("SGIDLA_OUTPUT_DIR");
  CHECK(resolve_output_path("a.csv") == fs::path("a.csv"));
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(3.5) == "3.5");
  for (double x : {1.0 / 3.0, 2.0 / 7.0, 1e-300, 12345.678}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("artifacts are deterministic and embed the config") {
  const fs::path a = scratch_dir() / "c1.csv";
  const fs::path b = scratch_dir() / "c2.csv";
  std::ostringstream log;
  RunConfig cfg = parse_command_line({"idla", "--particles", "100", "--seed", "7", "--out", a.string()});
  run(cfg, log);
  cfg.out_path = b.string();
  run(cfg, log);
  const std::string first = slurp(a);
  std::string second = slurp(b);
  // The echoed output path is the only difference.
  const auto at = second.find(b.string());
  second.replace(at, b.string().size(), a.string());
  CHECK(first == second);
  CHECK(first.rfind("# ", 0) == 0);
  CHECK(first.find("\"seed\":7") != std::string::npos);
  CHECK(first.find("\nu,v\n") != std::string::npos);

  const fs::path j = scratch_dir() / "c.json";
  run(parse_command_line({"idla", "--particles", "10", "--format", "json", "--out", j.string()}), log);
  const auto doc = nlohmann::json::parse(slurp(j));
  CHECK(doc.at("config").at("particles") == 10);
  CHECK(doc.at("sites").size() == 11);
}

TEST_CASE("volume scaling CSV") {
  const fs::path out = scratch_dir() / "scaling.csv";
  std::ostringstream log;
  run(parse_command_line({"scaling", "--quantity", "volume", "--kmax", "8", "--out", out.string()}), log);
  std::istringstream lines(slurp(out));
  std::string line;
  int k = 0;
  bool header = false;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      CHECK(line.rfind("k,radius,value", 0) == 0);
      header = true;
      continue;
    }
    ++k;
    std::istringstream cells(line);
    std::string level, radius, value;
    std::getline(cells, level, ',');
    std::getline(cells, radius, ',');
    std::getline(cells, value, ',');
    CHECK(std::stoi(level) == k);
    CHECK(std::stod(value) == std::pow(3.0, k + 1) + 2.0);
  }
  CHECK(k == 8);
}

TEST_CASE("raster format") {
  const std::vector<Vertex> origin{kOrigin};
  const std::string single = raster_bytes(GraphFamily::GasketTwoSided, origin);
  const std::string header = "P5\n3 3\n255\n";
  REQUIRE(single.size() == header.size() + 9);
  CHECK(single.substr(0, header.size()) == header);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(static_cast<unsigned char>(single[header.size() + i]) == (i == 4 ? 0 : 255));
  }

  const Ball b3 = ball(GraphFamily::GasketTwoSided, kOrigin, 3);
  CHECK(count_byte(raster_bytes(GraphFamily::GasketTwoSided, b3.interior), 0) == 11);

  const std::vector<Vertex> paused{{2, 0}};
  const std::string with_paused = raster_bytes(GraphFamily::GasketTwoSided, origin, paused);
  CHECK(with_paused.rfind("P5\n7 3\n255\n", 0) == 0);
  CHECK(count_byte(with_paused, 128) == 1);

  const std::vector<Vertex> carpet{{0, 0}, {2, 1}};
  CHECK(raster_bytes(GraphFamily::CarpetQuadrant, carpet).rfind("P5\n5 4\n255\n", 0) == 0);
  CHECK_THROWS_AS(raster_bytes(GraphFamily::GasketTwoSided, {}), DomainError);
}

TEST_CASE("carpet rendering regenerates byte-identically") {
  auto image = [] {
    RngStream rng(2024, 0);
    const Cluster c = idla(GraphFamily::CarpetQuadrant, kOrigin, 10'000, rng);
    return raster_bytes(GraphFamily::CarpetQuadrant, c.sites());
  };
  const std::string first = image();
  CHECK(first == image());
  CHECK(count_byte(first, 0) == 10'001);
}

TEST_CASE("render reads cluster CSV files") {
  const fs::path csv = scratch_dir() / "cluster.csv";
  const fs::path pgm = scratch_dir() / "cluster.pgm";
  std::ostringstream log;
  run(parse_command_line({"idla", "--particles", "60", "--seed", "9", "--out", csv.string()}), log);
  run(parse_command_line({"render", "--in", csv.string(), "--out", pgm.string()}), log);
  const SiteTable table = read_sites_csv(csv);
  CHECK(table.sites.size() == 61);
  CHECK(slurp(pgm) == raster_bytes(GraphFamily::GasketTwoSided, table.sites));

  const fs::path mixed = scratch_dir() / "mixed.csv";
  spit(mixed, "# comment\nu,v,paused\n0,0,0\n1,0,0\n2,0,1\n");
  const SiteTable t = read_sites_csv(mixed);
  CHECK(t.sites.size() == 2);
  CHECK(t.paused == std::vector<Vertex>{{2, 0}});

  spit(mixed, "x,y\n0,0\n");
  CHECK_THROWS_AS(read_sites_csv(mixed), IoError);
  spit(mixed, "u,v\n0,zero\n");
  CHECK_THROWS_AS(read_sites_csv(mixed), IoError);
}

TEST_CASE("command-line binary is deterministic") {
  const fs::path a = scratch_dir() / "bin_a.csv";
  const std::string cli = SGIDLA_CLI_PATH;
  const std::string args = " idla --graph sg2 --particles 100 --seed 7 --out ";
  REQUIRE(std::system((cli + args + a.string() + " > /dev/null").c_str()) == 0);
  REQUIRE(std::system((cli + args + a.string() + ".again > /dev/null").c_str()) == 0);
  std::string again = slurp(a.string() + ".again");
  const auto at = again.find(".again");
  again.erase(at, 6);
  CHECK(slurp(a) == again);
  CHECK(std::system((cli + " idla --partciles 3 2> /dev/null").c_str()) != 0);
}
