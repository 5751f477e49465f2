// Command-line driver: conjugacy limits, witness replay and IRS checks.
//
//   chabauty limit SPEC.json       exit 0 Cauchy match, 2 non-Cauchy, 1 bad input
//   chabauty verify 1.5 .. 1.9     exit 0 iff every bundled witness agrees
//   chabauty irs dirac | so3-example | levi-orbit | levi-escape

#include "chabauty/irs.hpp"
#include "chabauty/limit.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef CHABAUTY_DATA_DIR
#define CHABAUTY_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace chabauty;

namespace {

struct RunConfig {
  MetricConfig metric;
  std::vector<double> schedule{10, 100, 1000, 10000};
  std::uint64_t seed = 1;
  int atoms = 200;
  fs::path out = ".";
  fs::path data = CHABAUTY_DATA_DIR;
};

// Values given on the command line; they override the config file.
struct Overrides {
  std::string config;
  std::optional<double> radius, mesh;
  std::optional<int> sphere_pad, atoms;
  std::optional<std::string> schedule, out, data;
  std::optional<std::uint64_t> seed;
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  if (ss.str().find_first_not_of(" \t\r\n") == std::string::npos) throw InputError(p.string() + ": empty file");
  try {
    return nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

std::vector<double> parse_schedule(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("bad schedule entry '" + item + "'");
    }
  }
  return out;
}

RunConfig resolve(const Overrides& o, const MetricConfig& base) {
  RunConfig c;
  c.metric = base;
  if (!o.config.empty()) {
    const auto j = read_json(o.config);
    try {
      if (j.contains("metric")) {
        const auto& m = j.at("metric");
        c.metric.radius = m.value("radius", c.metric.radius);
        c.metric.mesh = m.value("mesh", c.metric.mesh);
        c.metric.sphere_pad = m.value("sphere_pad", c.metric.sphere_pad);
      }
      if (j.contains("schedule")) c.schedule = j.at("schedule").get<std::vector<double>>();
      c.seed = j.value("seed", c.seed);
      c.atoms = j.value("atoms", c.atoms);
      if (j.contains("out")) c.out = j.at("out").get<std::string>();
      if (j.contains("data")) c.data = j.at("data").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError(o.config + ": " + e.what());
    }
  }
  if (o.radius) c.metric.radius = *o.radius;
  if (o.mesh) c.metric.mesh = *o.mesh;
  if (o.sphere_pad) c.metric.sphere_pad = *o.sphere_pad;
  if (o.schedule) c.schedule = parse_schedule(*o.schedule);
  if (o.seed) c.seed = *o.seed;
  if (o.atoms) c.atoms = *o.atoms;
  if (o.out) c.out = *o.out;
  if (o.data) c.data = *o.data;
  try {
    c.metric.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (c.schedule.size() < 3) throw InputError("schedule needs at least 3 entries");
  for (std::size_t i = 1; i < c.schedule.size(); ++i)
    if (!(c.schedule[i] > c.schedule[i - 1])) throw InputError("schedule must be increasing");
  if (c.atoms < 2) throw InputError("atoms must be >= 2");
  return c;
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string label_of(const std::optional<Match>& m) { return m ? m->descriptor.to_string() : "-"; }

int cmd_limit(const std::string& path, const RunConfig& cfg) {
  SequenceSpec spec;
  try {
    spec = SequenceSpec::from_json(read_json(path));
    spec.validate();
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  if (spec.name.empty()) spec.name = fs::path(path).stem().string();
  LimitConfig lc;
  lc.metric = cfg.metric;
  lc.schedule = cfg.schedule;
  const LimitReport r = estimate_limit(spec, lc);
  write_file(cfg.out / (spec.name + ".json"), r.to_json().dump(2) + "\n");
  write_file(cfg.out / (spec.name + ".csv"), r.curve_csv());

  std::cout << spec.name << ": oracle " << (r.oracle ? r.oracle->limit.to_string() : "none (" + r.oracle_note + ")")
            << ", match " << label_of(r.final_match) << ", cauchy " << (r.cauchy ? "yes" : "no") << " ("
            << r.cauchy_distance << ")";
  if (r.match_to_oracle >= 0) std::cout << ", match-to-oracle " << r.match_to_oracle;
  std::cout << "\n";
  for (const auto& w : r.warnings) std::cout << "WARN " << spec.name << ": " << w << "\n";
  return r.cauchy && r.final_match ? 0 : 2;
}

int cmd_verify(const std::string& id, const RunConfig& cfg) {
  static const std::vector<std::string> ids{"1.5", "1.6", "1.7", "1.8", "1.9"};
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) throw InputError("unknown theorem id '" + id + "'");
  std::vector<SequenceSpec> all;
  try {
    all = load_witnesses(cfg.data / "witnesses");
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  LimitConfig lc;
  lc.metric = cfg.metric;
  lc.schedule = cfg.schedule;

  int total = 0, agree = 0;
  std::printf("%-22s %-34s %-34s %10s %6s %s\n", "witness", "oracle", "numeric", "distance", "comps", "verdict");
  for (const auto& spec : all) {
    if (spec.theorem != id) continue;
    ++total;
    const LimitReport r = estimate_limit(spec, lc);
    const bool ok = r.agrees();
    agree += ok ? 1 : 0;
    const std::string oracle = r.oracle ? r.oracle->limit.to_string() : "none";
    std::printf("%-22s %-34s %-34s %10.4g %6d %s\n", spec.name.c_str(), oracle.c_str(),
                label_of(r.final_match).c_str(), r.match_to_oracle, r.components, ok ? "agree" : "DISAGREE");
    for (const auto& w : r.warnings) std::printf("WARN %s: %s\n", spec.name.c_str(), w.c_str());
    write_file(cfg.out / (spec.name + ".json"), r.to_json().dump(2) + "\n");
  }
  std::printf("%d/%d agree\n", agree, total);
  return total > 0 && agree == total ? 0 : 2;
}

int cmd_irs(const std::string& which, const RunConfig& cfg) {
  const MetricConfig& m = cfg.metric;
  auto emit = [&](const std::string& name, const nlohmann::json& j) {
    write_file(cfg.out / ("irs_" + name + ".json"), j.dump(2) + "\n");
  };
  if (which == "dirac") {
    const auto plane = dirac_plane(cfg.atoms, cfg.seed, m);
    const auto space = dirac_space(cfg.atoms, cfg.seed, m);
    emit("dirac", {{"plane", plane.to_json()}, {"space", space.to_json()}});
    const bool ok = plane.pass && space.pass && plane.statistic <= 1e-9 && space.statistic <= 1e-9;
    std::cout << "dirac R^2: statistic " << plane.statistic << ", dirac R^3: statistic " << space.statistic
              << (ok ? "  pass\n" : "  FAIL\n");
    return ok ? 0 : 2;
  }
  if (which == "so3-example") {
    const auto r = so3_example(cfg.atoms, cfg.seed, m);
    emit("so3_example", r.to_json());
    std::cout << "SO(2) x| R^3 pushforward: statistic " << r.statistic << ", 95% quantile " << r.threshold
              << (r.pass ? "  pass (invariant)\n" : "  FAIL\n");
    return r.pass ? 0 : 2;
  }
  if (which == "levi-orbit") {
    const auto r = levi_orbit(cfg.atoms, 100, cfg.seed, m);
    emit("levi_orbit", r.to_json());
    std::cout << "Levi orbit: statistic " << r.statistic << ", 95% quantile " << r.threshold
              << (r.pass ? "  FAIL (not rejected)\n" : "  rejected as expected\n");
    return r.pass ? 2 : 0;
  }
  if (which == "levi-escape") {
    nlohmann::json j = nlohmann::json::array();
    double prev = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (double T : {10.0, 100.0, 1000.0}) {
      const double d = levi_escape_demo(T, m, 15, cfg.seed);
      std::cout << "T = " << T << "  median distance " << d << "\n";
      ok = ok && d <= prev;
      prev = d;
      j.push_back({{"T", T}, {"median", d}});
    }
    emit("levi_escape", {{"medians", j}, {"seed", cfg.seed}, {"non_increasing", ok}});
    return ok ? 0 : 2;
  }
  throw InputError("unknown irs subcommand '" + which + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chabauty limits of conjugates in SL(2,R) x| R^2"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--radius", o.radius, "ball radius R");
  app.add_option("--mesh", o.mesh, "net mesh eps");
  app.add_option("--sphere-pad", o.sphere_pad, "padding points on the sphere S_R");
  app.add_option("--schedule", o.schedule, "comma-separated n values");
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--atoms", o.atoms, "atoms per empirical measure");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--data", o.data, "data directory holding witnesses/");

  std::string spec_path, theorem, irs_which;
  auto* limit = app.add_subcommand("limit", "estimate lim g_n H g_n^-1 for a sequence spec");
  limit->add_option("spec", spec_path, "sequence spec JSON")->required();
  auto* verify = app.add_subcommand("verify", "replay the bundled witnesses of a theorem");
  verify->add_option("id", theorem, "1.5, 1.6, 1.7, 1.8 or 1.9")->required();
  auto* irs = app.add_subcommand("irs", "invariant random subgroup checks");
  irs->add_option("which", irs_which, "dirac, so3-example, levi-orbit or levi-escape")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  try {
    const RunConfig cfg = resolve(o, irs->parsed() ? irs_metric() : MetricConfig{});
    if (limit->parsed()) return cmd_limit(spec_path, cfg);
    if (verify->parsed()) return cmd_verify(theorem, cfg);
    return cmd_irs(irs_which, cfg);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
