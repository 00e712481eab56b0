// mbcg: run throughput-maximization scenarios from a JSON config.
//
//   mbcg run config.json [--baud 25,200] [--solver cg,ksp-ff] [--dump-config]
//   mbcg sweep config.json --format-counts 1,2,4,8 [--both-modes]
//   mbcg compare a.json [b.json] [--b-mode rwba] [--b-formats 1] [--b-transceivers 8000]
//   mbcg validate-instance instance.json
//   mbcg dump-capacity-matrix instance.json [--baud 25] [-o capacity.csv]
//
// Exit status: 0 success, 1 configuration error, 2 every result row failed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mbcg/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mbcg;

namespace {

constexpr int kConfigError = 1;
constexpr int kAllFailed = 2;

struct Overrides {
  std::optional<std::string> mode;
  std::vector<std::string> solvers;
  std::vector<double> bauds;
  std::optional<int> k;
  std::optional<std::string> transceivers;
  std::optional<std::size_t> formats;
  std::optional<int> wavelengths;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<int> workers;
  std::optional<std::string> pricing;
  std::vector<std::string> sets;
  bool dump_config{false};
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--mode", o.mode, "rwa or rwba");
  app->add_option("--solver", o.solvers, "ilp, cg, ksp-ff, ff-ksp")->delimiter(',');
  app->add_option("--baud", o.bauds, "baud rates in GBaud")->delimiter(',');
  app->add_option("-k,--k", o.k, "candidate routes per pair");
  app->add_option("--transceivers", o.transceivers, "transceiver budget A, or inf");
  app->add_option("--formats", o.formats, "number of modulation formats allowed");
  app->add_option("--wavelengths", o.wavelengths, "override the wavelength count W");
  app->add_option("--trials", o.trials, "benchmark trials");
  app->add_option("--seed", o.seed, "base seed");
  app->add_option("-o,--output", o.output, "output directory");
  app->add_option("-j,--workers", o.workers, "baud points solved in parallel");
  app->add_option("--pricing", o.pricing, "greedy, exact or hybrid");
  app->add_option("--set", o.sets, "override any config value, e.g. cg.integer_gap=0 (repeatable)");
  app->add_flag("--dump-config", o.dump_config, "print the effective config and exit");
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

json apply(json j, const Overrides& o) {
  if (o.mode) j["mode"] = *o.mode;
  if (!o.solvers.empty()) {
    j.erase("solver");
    j["solvers"] = o.solvers;
  }
  if (!o.bauds.empty()) j["baud_gbaud"] = o.bauds;
  if (o.k) j["k"] = *o.k;
  if (o.transceivers) j["transceivers"] = parse_value(*o.transceivers);
  if (o.formats) j["formats_allowed"] = *o.formats;
  if (o.wavelengths) j["wavelengths"] = *o.wavelengths;
  if (o.trials) j["trials"] = *o.trials;
  if (o.seed) j["seed"] = *o.seed;
  if (o.output) j["output"] = *o.output;
  if (o.workers) j["workers"] = *o.workers;
  if (o.pricing) j["cg"]["pricing"] = *o.pricing;
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ScenarioError("--set expects key=value, got '" + s + "'");
    json* node = &j;
    std::string path = s.substr(0, eq);
    for (std::size_t dot; (dot = path.find('.')) != std::string::npos; path.erase(0, dot + 1)) {
      node = &(*node)[path.substr(0, dot)];
      if (!node->is_object() && !node->is_null()) throw ScenarioError("--set path crosses a non-object: " + s);
    }
    (*node)[path] = parse_value(s.substr(eq + 1));
  }
  return j;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

Scenario load(const fs::path& path, const Overrides& o) {
  return scenario_from_json(apply(read_json(path), o), path.parent_path());
}

std::string tbps(double bps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", bps / 1e12);
  return buf;
}

void print_rows(const std::vector<ResultRow>& rows) {
  std::printf("%-5s %-7s %8s %6s %5s %-7s %10s %-12s %s\n", "mode", "solver", "baud", "W", "fmt", "seed", "Tb/s",
              "status", "detail");
  for (const auto& r : rows) {
    std::printf("%-5s %-7s %8g %6d %5zu %-7llu %10s %-12s %s\n", std::string(mode_name(r.mode)).c_str(),
                solver_name(r.solver), r.baud_gbaud, r.wavelengths, r.formats_allowed,
                static_cast<unsigned long long>(r.seed), tbps(r.throughput_bps).c_str(), r.status.c_str(),
                r.detail.c_str());
  }
}

int status_of(const std::vector<const ScenarioResult*>& results) {
  for (const auto* r : results) {
    if (!r->all_failed()) return 0;
  }
  return kAllFailed;
}

int cmd_run(const fs::path& config, const Overrides& o) {
  auto s = load(config, o);
  if (o.dump_config) {
    std::cout << to_json(s).dump(2) << '\n';
    return 0;
  }
  auto res = run_scenario(s);
  write_outputs(res);
  print_rows(res.rows);
  std::printf("wrote %s\n", (s.output / "results.csv").string().c_str());
  return status_of({&res});
}

int cmd_sweep(const fs::path& config, const Overrides& o, std::vector<std::size_t> formats, bool both_modes) {
  auto s = load(config, o);
  if (formats.empty()) {
    for (std::size_t f = 1; f <= s.phy.modulation.size(); ++f) formats.push_back(f);
  }
  if (o.dump_config) {
    auto j = to_json(s);
    j["sweep_formats"] = formats;
    j["sweep_both_modes"] = both_modes;
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::vector<ScenarioResult> rwa;
  std::vector<ScenarioResult> main;
  if (both_modes) {
    Scenario a = s;
    a.mode = Mode::rwa;
    rwa = format_sweep(a, formats);
    Scenario b = s;
    b.mode = Mode::rwba;
    main = format_sweep(b, formats, &rwa);
  } else {
    main = format_sweep(s, formats);
  }
  std::vector<const ScenarioResult*> all;
  for (const auto& r : rwa) all.push_back(&r);
  for (const auto& r : main) all.push_back(&r);
  write_outputs(s.output, all);
  std::vector<ResultRow> rows;
  for (const auto* r : all) rows.insert(rows.end(), r->rows.begin(), r->rows.end());
  print_rows(rows);
  std::printf("wrote %s\n", (s.output / "results.csv").string().c_str());
  return status_of(all);
}

int cmd_compare(const fs::path& config_a, const std::optional<fs::path>& config_b, const Overrides& o,
                const std::optional<std::string>& b_mode, const std::optional<std::size_t>& b_formats,
                const std::optional<std::string>& b_transceivers) {
  auto ja = apply(read_json(config_a), o);
  json jb;
  fs::path base_b = config_a.parent_path();
  if (config_b) {
    jb = apply(read_json(*config_b), o);
    base_b = config_b->parent_path();
  } else {
    if (!b_mode && !b_formats && !b_transceivers) {
      throw ScenarioError("compare needs a second config or one of --b-mode, --b-formats, --b-transceivers");
    }
    jb = ja;
  }
  if (b_mode) jb["mode"] = *b_mode;
  if (b_formats) jb["formats_allowed"] = *b_formats;
  if (b_transceivers) jb["transceivers"] = parse_value(*b_transceivers);
  auto a = scenario_from_json(ja, config_a.parent_path());
  auto b = scenario_from_json(jb, base_b);
  check_comparable(a, b);
  if (o.dump_config) {
    std::cout << json{{"a", to_json(a)}, {"b", to_json(b)}}.dump(2) << '\n';
    return 0;
  }
  auto c = compare_modes(a, b);
  write_outputs(a.output, {&c.a, &c.b});
  std::ofstream csv(a.output / "comparison.csv");
  if (!csv) throw ScenarioError("cannot write " + (a.output / "comparison.csv").string());
  write_comparison_csv(csv, c);
  std::printf("a = %s\nb = %s\n", c.label_a.c_str(), c.label_b.c_str());
  std::printf("%8s %-7s %-7s %10s %10s %8s\n", "baud", "solver", "seed", "a Tb/s", "b Tb/s", "b/a");
  for (const auto& r : c.rows) {
    std::printf("%8g %-7s %-7llu %10s %10s %8.4f\n", r.baud_gbaud, solver_name(r.solver),
                static_cast<unsigned long long>(r.seed), tbps(r.throughput_a_bps).c_str(),
                tbps(r.throughput_b_bps).c_str(), r.ratio);
  }
  std::printf("wrote %s\n", (a.output / "comparison.csv").string().c_str());
  return status_of({&c.a, &c.b});
}

bool looks_like_scenario(const json& j) {
  for (const char* key : {"name", "solver", "solvers", "trials", "seed", "seeds", "output", "workers", "cg", "ilp"}) {
    if (j.contains(key)) return true;
  }
  return j.contains("baud_gbaud") && j.at("baud_gbaud").is_array();
}

/// Instance file or scenario config (first baud unless `baud` is given).
Instance load_any_instance(const fs::path& path, const std::optional<double>& baud) {
  auto j = read_json(path);
  if (looks_like_scenario(j)) {
    auto s = scenario_from_json(j, path.parent_path());
    return scenario_instance(s, baud.value_or(s.baud_gbaud.front()));
  }
  if (baud) j["baud_gbaud"] = *baud;
  auto bundle = instance_bundle_from_json(j, path.parent_path());
  return make_instance(bundle.topology, bundle.phy, bundle.spec);
}

int cmd_validate(const fs::path& path, const std::optional<double>& baud) {
  auto inst = load_any_instance(path, baud);
  const auto& topo = inst.topology;
  double lo = 0;
  double hi = 0;
  for (RouteId r = 0; r < static_cast<RouteId>(inst.routes.size()); ++r) {
    for (Band b : kBands) {
      const double c = inst.capacity_of(r, b);
      if (c > 0 && (lo == 0 || c < lo)) lo = c;
      hi = std::max(hi, c);
    }
  }
  std::printf("topology      %s (%d nodes, %zu links)\n", topo.name().c_str(), topo.node_count(),
              topo.links().size());
  std::printf("mode          %s\n", std::string(mode_name(inst.mode)).c_str());
  std::printf("baud          %g GBaud\n", inst.baud_hz / 1e9);
  std::printf("wavelengths   %d (U %d, L %d, C %d)\n", inst.wavelengths, inst.band_budget(Band::U),
              inst.band_budget(Band::L), inst.band_budget(Band::C));
  std::printf("pairs         %zu\n", inst.routes.pair_count());
  std::printf("routes        %zu (K = %d)\n", inst.routes.size(), inst.routes.k());
  std::printf("transceivers  %s\n", inst.transceivers ? std::to_string(*inst.transceivers).c_str() : "inf");
  std::printf("capacity      %.4g .. %.4g Gb/s per lightpath\n", lo / 1e9, hi / 1e9);
  std::printf("ilp variables %zu\n", ilp_variable_count(inst));
  if (hi == 0) std::printf("warning: no route reaches any modulation threshold\n");
  std::printf("ok\n");
  return 0;
}

int cmd_dump_capacity(const fs::path& path, const std::optional<double>& baud, const std::optional<fs::path>& out) {
  auto inst = load_any_instance(path, baud);
  if (!out) {
    write_capacity_csv(std::cout, inst.topology, inst.routes, inst.capacity);
    return 0;
  }
  std::ofstream f(*out);
  if (!f) throw ScenarioError("cannot write " + out->string());
  write_capacity_csv(f, inst.topology, inst.routes, inst.capacity);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Throughput maximization in multi-band optical networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Overrides run_o;
  fs::path run_config;
  auto* run = app.add_subcommand("run", "solve every (baud, solver, seed) row of a scenario");
  run->add_option("config", run_config, "scenario JSON")->required()->check(CLI::ExistingFile);
  add_overrides(run, run_o);

  Overrides sweep_o;
  fs::path sweep_config;
  std::vector<std::size_t> sweep_formats;
  bool both_modes = false;
  auto* sweep = app.add_subcommand("sweep", "run a scenario over a range of modulation format counts");
  sweep->add_option("config", sweep_config, "scenario JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--format-counts", sweep_formats, "format counts to sweep (default 1..all)")->delimiter(',');
  sweep->add_flag("--both-modes", both_modes, "sweep RWA, then RWBA seeded with the RWA results");
  add_overrides(sweep, sweep_o);

  Overrides cmp_o;
  fs::path cmp_a;
  std::optional<fs::path> cmp_b;
  std::optional<std::string> b_mode;
  std::optional<std::size_t> b_formats;
  std::optional<std::string> b_transceivers;
  auto* cmp = app.add_subcommand("compare", "compare two scenarios that differ in mode, A or formats");
  cmp->add_option("a", cmp_a, "reference scenario JSON")->required()->check(CLI::ExistingFile);
  cmp->add_option("b", cmp_b, "second scenario JSON")->check(CLI::ExistingFile);
  cmp->add_option("--b-mode", b_mode, "mode of the second scenario");
  cmp->add_option("--b-formats", b_formats, "formats_allowed of the second scenario");
  cmp->add_option("--b-transceivers", b_transceivers, "transceiver budget of the second scenario");
  add_overrides(cmp, cmp_o);

  fs::path val_path;
  std::optional<double> val_baud;
  auto* val = app.add_subcommand("validate-instance", "load an instance or scenario and print its size");
  val->add_option("file", val_path, "instance or scenario JSON")->required()->check(CLI::ExistingFile);
  val->add_option("--baud", val_baud, "baud rate in GBaud");

  fs::path cap_path;
  std::optional<double> cap_baud;
  std::optional<fs::path> cap_out;
  auto* cap = app.add_subcommand("dump-capacity-matrix", "write s,d,k,band,capacity_bps for an instance");
  cap->add_option("file", cap_path, "instance or scenario JSON")->required()->check(CLI::ExistingFile);
  cap->add_option("--baud", cap_baud, "baud rate in GBaud");
  cap->add_option("-o,--output", cap_out, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return cmd_run(run_config, run_o);
    if (*sweep) return cmd_sweep(sweep_config, sweep_o, sweep_formats, both_modes);
    if (*cmp) return cmd_compare(cmp_a, cmp_b, cmp_o, b_mode, b_formats, b_transceivers);
    if (*val) return cmd_validate(val_path, val_baud);
    if (*cap) return cmd_dump_capacity(cap_path, cap_baud, cap_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  }
  return kConfigError;
}
