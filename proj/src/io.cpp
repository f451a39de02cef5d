#include "sgidla/io.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "sgidla/aggregation.hpp"
#include "sgidla/errors.hpp"
#include "sgidla/experiments.hpp"
#include "sgidla/potential.hpp"
#include "sgidla/walker.hpp"

namespace sgidla {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Command, std::string_view>, 9> kCommands{{
    {Command::Idla, "idla"},
    {Command::Sandpile, "sandpile"},
    {Command::Rotor, "rotor"},
    {Command::Green, "green"},
    {Command::ExitTime, "exit-time"},
    {Command::ShapeCheck, "shape-check"},
    {Command::Scaling, "scaling"},
    {Command::Render, "render"},
    {Command::AbelianTest, "abelian-test"},
}};

constexpr std::array<std::string_view, 16> kKeys{
    "command", "graph", "n",        "particles", "reps", "eps",   "seed", "out",
    "format",  "mass",  "quantity", "kmin",      "kmax", "in",    "pause_radius", "config"};

enum class KeyType { String, Int, Unsigned, Number };

KeyType key_type(std::string_view key) {
  if (key == "n" || key == "kmin" || key == "kmax" || key == "pause_radius") return KeyType::Int;
  if (key == "particles" || key == "reps" || key == "seed") return KeyType::Unsigned;
  if (key == "eps" || key == "mass") return KeyType::Number;
  return KeyType::String;
}

Command parse_command(const std::string& name) {
  for (const auto& [c, s] : kCommands) {
    if (s == name) return c;
  }
  throw ConfigError("unknown command '" + name + "'");
}

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  if (name == "pgm") return OutputFormat::Pgm;
  throw ConfigError("config key 'format' must be csv, json or pgm, got '" + name + "'");
}

void check_type(const std::string& key, const json& value) {
  bool ok = false;
  const char* expected = "";
  switch (key_type(key)) {
    case KeyType::String:
      ok = value.is_string();
      expected = "a string";
      break;
    case KeyType::Int:
      ok = value.is_number_integer();
      expected = "an integer";
      break;
    case KeyType::Unsigned:
      ok = value.is_number_unsigned() || (value.is_number_integer() && value.get<std::int64_t>() >= 0);
      expected = "a nonnegative integer";
      break;
    case KeyType::Number:
      ok = value.is_number();
      expected = "a number";
      break;
  }
  if (!ok) throw ConfigError("config key '" + key + "' must be " + expected + ", got " + value.dump());
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

json vertex_json(const Vertex& x) { return json::array({x.u, x.v}); }

std::string cluster_key(const std::vector<Vertex>& sites) {
  std::string out;
  for (const Vertex& x : sites) {
    if (!out.empty()) out += '|';
    out += std::to_string(x.u) + ' ' + std::to_string(x.v);
  }
  return out;
}

// ---------------------------------------------------------------- commands

std::string cluster_artifact(const RunConfig& cfg, const Cluster& c) {
  switch (cfg.format) {
    case OutputFormat::Pgm:
      return raster_bytes(cfg.graph, c.sites());
    case OutputFormat::Json: {
      json j{{"config", cfg.to_json()},
             {"sites", json::array()},
             {"inner_radius", c.inner_radius()},
             {"outer_radius", c.outer_radius()}};
      for (const Vertex& x : c.sites()) j["sites"].push_back(vertex_json(x));
      return j.dump(2) + "\n";
    }
    case OutputFormat::Csv: {
      std::string s = csv_config_header(cfg);
      s += "# inner_radius: " + std::to_string(c.inner_radius()) + "\n";
      s += "# outer_radius: " + std::to_string(c.outer_radius()) + "\n";
      s += "u,v\n";
      for (const Vertex& x : c.sites()) s += std::to_string(x.u) + "," + std::to_string(x.v) + "\n";
      return s;
    }
  }
  return {};
}

std::string table_artifact(const RunConfig& cfg, const DirichletSolution& sol, const char* what) {
  const auto& verts = sol.domain->vertices();
  if (cfg.format == OutputFormat::Json) {
    json j{{"config", cfg.to_json()}, {"quantity", what}, {"residual", sol.residual}, {"rows", json::array()}};
    for (std::size_t i = 0; i < verts.size(); ++i) {
      j["rows"].push_back({{"u", verts[i].u}, {"v", verts[i].v}, {"value", sol.values[i]}});
    }
    return j.dump(2) + "\n";
  }
  std::string s = csv_config_header(cfg);
  s += std::string("# quantity: ") + what + "\n";
  s += "# residual: " + format_double(sol.residual) + "\n";
  s += "u,v,value\n";
  for (std::size_t i = 0; i < verts.size(); ++i) {
    s += std::to_string(verts[i].u) + "," + std::to_string(verts[i].v) + "," +
         format_double(sol.values[i]) + "\n";
  }
  return s;
}

void require_report_format(const RunConfig& cfg) {
  if (cfg.format == OutputFormat::Pgm) {
    throw ConfigError("command '" + std::string(to_string(cfg.command)) +
                      "' writes a report; format must be csv or json");
  }
}

std::string run_sandpile(const RunConfig& cfg, std::ostream& log) {
  const double mass =
      cfg.mass > 0.0 ? cfg.mass : static_cast<double>(ball_size(cfg.graph, kOrigin, cfg.n));
  const SandpileState s = sandpile(cfg.graph, mass, kOrigin);
  const auto cluster = s.cluster();
  const Radii r = cluster_radii(cfg.graph, cluster, kOrigin);
  log << "sandpile: mass " << format_double(mass) << ", cluster " << cluster.size()
      << " sites, radii (" << r.inner << ", " << r.outer << "), " << s.sweeps << " sweeps\n";
  switch (cfg.format) {
    case OutputFormat::Pgm:
      return raster_bytes(cfg.graph, cluster);
    case OutputFormat::Json: {
      json j{{"config", cfg.to_json()},
             {"initial_mass", mass},
             {"inner_radius", r.inner},
             {"outer_radius", r.outer},
             {"odometer_residual", odometer_residual(s)},
             {"rows", json::array()}};
      for (std::size_t i = 0; i < s.vertices.size(); ++i) {
        j["rows"].push_back({{"u", s.vertices[i].u},
                             {"v", s.vertices[i].v},
                             {"mass", s.mass[i]},
                             {"odometer", s.odometer[i]}});
      }
      return j.dump(2) + "\n";
    }
    case OutputFormat::Csv: {
      std::string out = csv_config_header(cfg);
      out += "# initial_mass: " + format_double(mass) + "\n";
      out += "# inner_radius: " + std::to_string(r.inner) + "\n";
      out += "# outer_radius: " + std::to_string(r.outer) + "\n";
      out += "u,v,mass,odometer\n";
      for (std::size_t i = 0; i < s.vertices.size(); ++i) {
        out += std::to_string(s.vertices[i].u) + "," + std::to_string(s.vertices[i].v) + "," +
               format_double(s.mass[i]) + "," + format_double(s.odometer[i]) + "\n";
      }
      return out;
    }
  }
  return {};
}

std::string run_shape(const RunConfig& cfg, std::ostream& log) {
  require_report_format(cfg);
  const ShapeReport rep = shape_experiment(cfg.n, cfg.eps, cfg.reps, cfg.seed, cfg.graph);
  log << "shape-check: n=" << rep.n << " inner_ok=" << format_double(rep.inner_ok_fraction)
      << " outer_ok=" << format_double(rep.outer_ok_fraction) << "\n";
  if (cfg.format == OutputFormat::Json) {
    json j{{"config", cfg.to_json()},
           {"n", rep.n},
           {"eps", rep.eps},
           {"reps", rep.reps},
           {"particles", rep.particles},
           {"inner_target", rep.inner_target},
           {"outer_target", rep.outer_target},
           {"inner_ok_fraction", rep.inner_ok_fraction},
           {"outer_ok_fraction", rep.outer_ok_fraction},
           {"failed", rep.failed},
           {"failures", rep.failures},
           {"radii", json::array()}};
    for (const Radii& r : rep.radii) j["radii"].push_back({{"inner", r.inner}, {"outer", r.outer}});
    return j.dump(2) + "\n";
  }
  std::string s = csv_config_header(cfg);
  s += "# particles: " + std::to_string(rep.particles) + "\n";
  s += "# inner_ok_fraction: " + format_double(rep.inner_ok_fraction) + "\n";
  s += "# outer_ok_fraction: " + format_double(rep.outer_ok_fraction) + "\n";
  s += "# failed: " + std::to_string(rep.failed) + "\n";
  s += "replicate,inner_radius,outer_radius,inner_ok,outer_ok\n";
  for (std::size_t i = 0; i < rep.radii.size(); ++i) {
    const Radii& r = rep.radii[i];
    s += std::to_string(i) + "," + std::to_string(r.inner) + "," + std::to_string(r.outer) + "," +
         std::to_string(r.inner >= rep.inner_target) + "," +
         std::to_string(r.outer <= rep.outer_target) + "\n";
  }
  return s;
}

std::string run_scaling(const RunConfig& cfg, std::ostream& log) {
  require_report_format(cfg);
  ScalingOptions opt;
  opt.kind = cfg.graph;
  opt.seed = cfg.seed;
  const ScalingReport rep =
      scaling_fit(parse_scaling_quantity(cfg.quantity), cfg.k_min, cfg.k_max, opt);
  log << "scaling " << cfg.quantity << ": fitted exponent " << format_double(rep.fitted_exponent)
      << " (reference " << format_double(rep.reference_exponent) << ")\n";
  if (cfg.format == OutputFormat::Json) {
    json j{{"config", cfg.to_json()},
           {"quantity", cfg.quantity},
           {"levels", rep.levels},
           {"radii", rep.radii},
           {"values", rep.values},
           {"std_errors", rep.std_errors},
           {"ratios", rep.ratios},
           {"fitted_exponent", rep.fitted_exponent},
           {"intercept", rep.intercept},
           {"fit_residuals", rep.fit_residuals},
           {"reference_exponent", rep.reference_exponent}};
    return j.dump(2) + "\n";
  }
  std::string s = csv_config_header(cfg);
  s += "# fitted_exponent: " + format_double(rep.fitted_exponent) + "\n";
  s += "# reference_exponent: " + format_double(rep.reference_exponent) + "\n";
  s += "k,radius,value,std_error,ratio,fit_residual\n";
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    s += std::to_string(rep.levels[i]) + "," + std::to_string(rep.radii[i]) + "," +
         format_double(rep.values[i]) + "," + format_double(rep.std_errors[i]) + "," +
         (i == 0 ? std::string() : format_double(rep.ratios[i - 1])) + "," +
         format_double(rep.fit_residuals[i]) + "\n";
  }
  return s;
}

std::string run_abelian(const RunConfig& cfg, std::ostream& log) {
  require_report_format(cfg);
  const AbelianReport rep =
      abelian_test(cfg.particles, cfg.pause_radius, cfg.reps, cfg.seed, cfg.graph);
  log << "abelian-test: chi2=" << format_double(rep.chi2.statistic) << " dof=" << rep.chi2.dof
      << " p=" << format_double(rep.chi2.p_value) << "\n";
  if (cfg.format == OutputFormat::Json) {
    json j{{"config", cfg.to_json()},
           {"k", rep.k},
           {"pause_radius", rep.pause_radius},
           {"reps", rep.reps},
           {"paused_total", rep.paused_total},
           {"support_match", rep.support_match},
           {"chi2", rep.chi2.statistic},
           {"dof", rep.chi2.dof},
           {"p_value", rep.chi2.p_value},
           {"clusters", json::array()}};
    for (const auto& [sites, p] : rep.exact) {
      auto it = rep.observed.find(sites);
      j["clusters"].push_back({{"cluster", cluster_key(sites)},
                               {"observed", it == rep.observed.end() ? 0 : it->second},
                               {"expected_probability", p}});
    }
    return j.dump(2) + "\n";
  }
  std::string s = csv_config_header(cfg);
  s += "# chi2: " + format_double(rep.chi2.statistic) + "\n";
  s += "# dof: " + std::to_string(rep.chi2.dof) + "\n";
  s += "# p_value: " + format_double(rep.chi2.p_value) + "\n";
  s += "# support_match: " + std::string(rep.support_match ? "true" : "false") + "\n";
  s += "cluster,observed,expected_probability\n";
  for (const auto& [sites, p] : rep.exact) {
    auto it = rep.observed.find(sites);
    s += cluster_key(sites) + "," + std::to_string(it == rep.observed.end() ? 0 : it->second) +
         "," + format_double(p) + "\n";
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------- config

std::string_view to_string(Command c) {
  for (const auto& [cmd, s] : kCommands) {
    if (cmd == c) return s;
  }
  return "?";
}

std::string_view to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::Csv:
      return "csv";
    case OutputFormat::Json:
      return "json";
    case OutputFormat::Pgm:
      return "pgm";
  }
  return "?";
}

json RunConfig::to_json() const {
  return json{{"command", to_string(command)},
              {"graph", to_string(graph)},
              {"n", n},
              {"particles", particles},
              {"reps", reps},
              {"eps", eps},
              {"seed", seed},
              {"out", out_path},
              {"format", to_string(format)},
              {"mass", mass},
              {"quantity", quantity},
              {"kmin", k_min},
              {"kmax", k_max},
              {"in", in_path},
              {"pause_radius", pause_radius}};
}

std::span<const std::string_view> config_keys() { return kKeys; }

RunConfig parse_config(const json& values) {
  if (!values.is_object()) throw ConfigError("config must be a JSON object of key/value pairs");
  for (const auto& [key, value] : values.items()) {
    if (key == "config" || std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
    check_type(key, value);
  }
  if (!values.contains("command")) throw ConfigError("missing required config key 'command'");
  RunConfig cfg;
  cfg.command = parse_command(values.at("command").get<std::string>());
  auto get = [&](const char* key, auto& field) {
    if (values.contains(key)) field = values.at(key).get<std::decay_t<decltype(field)>>();
  };
  if (values.contains("graph")) {
    try {
      cfg.graph = parse_graph_family(values.at("graph").get<std::string>());
    } catch (const DomainError& e) {
      throw ConfigError(std::string("config key 'graph': ") + e.what());
    }
  }
  get("n", cfg.n);
  get("particles", cfg.particles);
  get("reps", cfg.reps);
  get("eps", cfg.eps);
  get("seed", cfg.seed);
  get("out", cfg.out_path);
  get("mass", cfg.mass);
  get("quantity", cfg.quantity);
  get("kmin", cfg.k_min);
  get("kmax", cfg.k_max);
  get("in", cfg.in_path);
  get("pause_radius", cfg.pause_radius);
  if (values.contains("format")) cfg.format = parse_format(values.at("format").get<std::string>());

  if (cfg.command == Command::Render && !values.contains("in")) {
    throw ConfigError("missing required config key 'in' for command 'render'");
  }
  if (cfg.n < 1) throw ConfigError("config key 'n' must be positive");
  if (cfg.reps < 1) throw ConfigError("config key 'reps' must be positive");
  if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw ConfigError("config key 'eps' must lie in (0,1)");
  if (cfg.mass < 0.0) throw ConfigError("config key 'mass' must be nonnegative");
  if (cfg.pause_radius < 1) throw ConfigError("config key 'pause_radius' must be positive");
  if (cfg.k_min < 1 || cfg.k_max <= cfg.k_min) {
    throw ConfigError("config keys 'kmin'/'kmax' need 1 <= kmin < kmax");
  }
  if (cfg.command == Command::Scaling) {
    try {
      parse_scaling_quantity(cfg.quantity);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("config key 'quantity': ") + e.what());
    }
  }
  if (cfg.command == Command::Render) cfg.format = OutputFormat::Pgm;
  if (cfg.out_path.empty()) {
    cfg.out_path = std::string(to_string(cfg.command)) + "." + std::string(to_string(cfg.format));
  }
  return cfg;
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file '" + path.string() + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

RunConfig parse_command_line(const std::vector<std::string>& args) {
  CLI::App app{"Aggregation models and potential theory on fractal graphs", "sgidla"};
  std::string command;
  std::string config_path;
  app.add_option("command", command,
                 "idla | sandpile | rotor | green | exit-time | shape-check | scaling | render | "
                 "abelian-test")
      ->required();
  app.add_option("--config", config_path, "key/value JSON config file; flags override it");

  // Every flag lands in a JSON object only when given, so file values survive.
  std::map<std::string, std::string> raw;
  std::vector<std::pair<std::string, CLI::Option*>> flags;
  for (const std::string_view key : kKeys) {
    if (key == "command" || key == "config") continue;
    std::string flag = "--" + std::string(key);
    std::replace(flag.begin(), flag.end(), '_', '-');
    flags.emplace_back(std::string(key), app.add_option(flag, raw[std::string(key)]));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string("command line: ") + e.what());
  }

  json values = config_path.empty() ? json::object() : load_config_file(config_path);
  if (!values.is_object()) throw ConfigError("config file must hold a JSON object");
  values["command"] = command;
  for (const auto& [key, opt] : flags) {
    if (opt->count() == 0) continue;
    const std::string& text = raw[key];
    try {
      switch (key_type(key)) {
        case KeyType::String:
          values[key] = text;
          break;
        case KeyType::Int: {
          std::size_t used = 0;
          const long long v = std::stoll(text, &used);
          if (used != text.size()) throw std::invalid_argument(text);
          values[key] = v;
          break;
        }
        case KeyType::Unsigned: {
          std::size_t used = 0;
          if (!text.empty() && text[0] == '-') throw std::invalid_argument(text);
          const unsigned long long v = std::stoull(text, &used);
          if (used != text.size()) throw std::invalid_argument(text);
          values[key] = v;
          break;
        }
        case KeyType::Number: {
          std::size_t used = 0;
          const double v = std::stod(text, &used);
          if (used != text.size()) throw std::invalid_argument(text);
          values[key] = v;
          break;
        }
      }
    } catch (const std::logic_error&) {
      throw ConfigError("flag --" + key + " has an invalid value '" + text + "'");
    }
  }
  return parse_config(values);
}

std::filesystem::path resolve_output_path(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("SGIDLA_OUTPUT_DIR"); dir && *dir) {
      return std::filesystem::path(dir) / p;
    }
  }
  return p;
}

// ---------------------------------------------------------------- formats

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_config_header(const RunConfig& config) {
  return "# sgidla " + std::string(to_string(config.command)) + "\n# config: " +
         config.to_json().dump() + "\n";
}

SiteTable read_sites_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open cluster file '" + path.string() + "'");
  SiteTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  int paused_col = -1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (!have_header) {
      if (cells.size() < 2 || cells[0] != "u" || cells[1] != "v") {
        throw IoError(path.string() + ":" + std::to_string(line_no) +
                      ": header must start with columns u,v");
      }
      for (std::size_t i = 2; i < cells.size(); ++i) {
        if (cells[i] == "paused") paused_col = static_cast<int>(i);
      }
      have_header = true;
      continue;
    }
    try {
      if (cells.size() < 2) throw std::invalid_argument(line);
      const Vertex x{std::stoll(cells[0]), std::stoll(cells[1])};
      const bool paused = paused_col >= 0 && static_cast<std::size_t>(paused_col) < cells.size() &&
                          cells[static_cast<std::size_t>(paused_col)] == "1";
      (paused ? table.paused : table.sites).push_back(x);
    } catch (const std::logic_error&) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed row '" + line + "'");
    }
  }
  if (!have_header) throw IoError(path.string() + ": no header line");
  return table;
}

std::string raster_bytes(GraphFamily kind, std::span<const Vertex> sites,
                         std::span<const Vertex> paused) {
  if (sites.empty()) throw DomainError("cannot render an empty cluster");
  const bool gasket = kind != GraphFamily::CarpetQuadrant;
  auto pixel = [&](const Vertex& x) -> std::pair<std::int64_t, std::int64_t> {
    return gasket ? std::pair{2 * x.u + x.v, x.v} : std::pair{x.u, x.v};  // (column, row)
  };
  std::int64_t cmin = std::numeric_limits<std::int64_t>::max();
  std::int64_t rmin = cmin;
  std::int64_t cmax = std::numeric_limits<std::int64_t>::min();
  std::int64_t rmax = cmax;
  for (const auto* list : {&sites, &paused}) {
    for (const Vertex& x : *list) {
      const auto [c, r] = pixel(x);
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
  }
  const std::int64_t width = cmax - cmin + 3;
  const std::int64_t height = rmax - rmin + 3;
  if (width * height > (std::int64_t{1} << 32)) throw CapacityError("raster would exceed 4 GiB");
  std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::string out = header;
  out.append(static_cast<std::size_t>(width * height), static_cast<char>(255));
  auto put = [&](const Vertex& x, unsigned char value) {
    const auto [c, r] = pixel(x);
    const std::int64_t offset = (r - rmin + 1) * width + (c - cmin + 1);
    out[header.size() + static_cast<std::size_t>(offset)] = static_cast<char>(value);
  };
  for (const Vertex& x : paused) put(x, 128);
  for (const Vertex& x : sites) put(x, 0);
  return out;
}

void render_raster(GraphFamily kind, std::span<const Vertex> sites, std::span<const Vertex> paused,
                   const std::filesystem::path& out_path) {
  write_file(out_path, raster_bytes(kind, sites, paused));
}

// ---------------------------------------------------------------- run

void run(const RunConfig& cfg, std::ostream& log) {
  const auto out = resolve_output_path(cfg.out_path);
  std::string artifact;
  switch (cfg.command) {
    case Command::Idla: {
      RngStream rng(cfg.seed, 0);
      const Cluster c = idla(cfg.graph, kOrigin, cfg.particles, rng);
      log << "idla: " << c.size() << " sites, radii (" << c.inner_radius() << ", "
          << c.outer_radius() << ")\n";
      artifact = cluster_artifact(cfg, c);
      break;
    }
    case Command::Rotor: {
      const RotorResult r = rotor_aggregation(cfg.graph, cfg.particles, {}, kOrigin);
      log << "rotor: " << r.cluster.size() << " sites, radii (" << r.cluster.inner_radius() << ", "
          << r.cluster.outer_radius() << ")\n";
      artifact = cluster_artifact(cfg, r.cluster);
      break;
    }
    case Command::Sandpile:
      artifact = run_sandpile(cfg, log);
      break;
    case Command::Green:
    case Command::ExitTime: {
      if (cfg.format == OutputFormat::Pgm) throw ConfigError("tables are written as csv or json");
      const Ball b = ball(cfg.graph, kOrigin, cfg.n);
      if (cfg.command == Command::Green) {
        const GreenTable g = stopped_green(b, kOrigin);
        log << "green: g_n(o,o) = " << format_double(g.diagonal()) << "\n";
        artifact = table_artifact(cfg, g.g, "green");
      } else {
        const DirichletSolution e = expected_exit_time(b);
        log << "exit-time: E_o[tau_n] = " << format_double(e.at(kOrigin)) << "\n";
        artifact = table_artifact(cfg, e, "exit-time");
      }
      break;
    }
    case Command::ShapeCheck:
      artifact = run_shape(cfg, log);
      break;
    case Command::Scaling:
      artifact = run_scaling(cfg, log);
      break;
    case Command::AbelianTest:
      artifact = run_abelian(cfg, log);
      break;
    case Command::Render: {
      const SiteTable t = read_sites_csv(cfg.in_path);
      artifact = raster_bytes(cfg.graph, t.sites, t.paused);
      log << "render: " << t.sites.size() << " sites, " << t.paused.size() << " paused\n";
      break;
    }
  }
  write_file(out, artifact);
  log << "wrote " << out.string() << "\n";
}

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (!args.empty() && (args[0] == "--help" || args[0] == "-h")) {
    out << "usage: sgidla <command> [--config file.json] [--graph sg2|sg1|carpet] [--n N]\n"
           "              [--particles K] [--reps R] [--eps E] [--seed S] [--out PATH]\n"
           "              [--format csv|json|pgm] [--mass M] [--quantity Q] [--kmin K]\n"
           "              [--kmax K] [--in PATH] [--pause-radius R]\n"
           "commands: idla sandpile rotor green exit-time shape-check scaling render abelian-test\n";
    return 0;
  }
  try {
    run(parse_command_line(args), out);
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace sgidla
