#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgidla/graph.hpp"

namespace sgidla {

enum class Command { Idla, Sandpile, Rotor, Green, ExitTime, ShapeCheck, Scaling, Render, AbelianTest };
enum class OutputFormat { Csv, Json, Pgm };

std::string_view to_string(Command c);
std::string_view to_string(OutputFormat f);

/// Effective configuration of one CLI run.
struct RunConfig {
  Command command = Command::Idla;
  GraphFamily graph = GraphFamily::GasketTwoSided;
  int n = 8;                    // ball radius
  std::size_t particles = 100;  // IDLA/rotor particles; k for abelian-test
  std::size_t reps = 20;
  double eps = 0.25;
  std::uint64_t seed = 1;
  std::string out_path;  // defaults to <command>.<format>
  OutputFormat format = OutputFormat::Csv;
  double mass = 0.0;  // sandpile initial mass; 0 means |B_o(n)|
  std::string quantity = "volume";
  int k_min = 1;
  int k_max = 8;
  std::string in_path;
  int pause_radius = 2;

  nlohmann::json to_json() const;
};

/// Keys accepted in a config file or as --key flags (dashes map to underscores).
std::span<const std::string_view> config_keys();

/// Builds a config from key/value JSON. Unknown keys, type mismatches and a
/// missing "command" are ConfigErrors naming the offending key.
RunConfig parse_config(const nlohmann::json& values);

/// Reads a key/value JSON object from disk.
nlohmann::json load_config_file(const std::filesystem::path& path);

/// Parses `sgidla <command> [--config file.json] [--key value ...]`. Values
/// given as flags override the file.
RunConfig parse_command_line(const std::vector<std::string>& args);

/// Resolves a relative output path against $SGIDLA_OUTPUT_DIR when it is set.
std::filesystem::path resolve_output_path(const std::string& path);

/// Dispatches one command and writes its artifact. Throws sgidla::Error
/// subclasses on failure.
void run(const RunConfig& config, std::ostream& log);

/// Full CLI entry point: parse, run, map errors to exit codes
/// (0 ok, 2 config, 3 I/O, 4 computation).
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------- formats

/// Shortest text that round-trips exactly: 17 significant digits.
std::string format_double(double x);

/// "# key: value" comment lines embedding the effective config.
std::string csv_config_header(const RunConfig& config);

struct SiteTable {
  std::vector<Vertex> sites;
  std::vector<Vertex> paused;
};

/// Reads a cluster CSV: '#' comment lines, a header starting with "u,v", then
/// rows. An optional "paused" column marks paused particles with 1.
SiteTable read_sites_csv(const std::filesystem::path& path);

/// Binary PGM (P5) raster: header "P5\n<w> <h>\n255\n", then row-major bytes.
/// Occupied sites are 0, paused particles 128, everything else 255. Gasket
/// vertices map to (column 2u + v, row v), carpet cells to (u, v); the image
/// is the bounding box plus a one-pixel margin.
std::string raster_bytes(GraphFamily kind, std::span<const Vertex> sites,
                         std::span<const Vertex> paused = {});

void render_raster(GraphFamily kind, std::span<const Vertex> sites, std::span<const Vertex> paused,
                   const std::filesystem::path& out_path);

}  // namespace sgidla
