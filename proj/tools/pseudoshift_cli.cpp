#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <pseudoshift/criteria.hpp>
#include <pseudoshift/errors.hpp>
#include <pseudoshift/orbits.hpp>
#include <pseudoshift/periodic.hpp>
#include <pseudoshift/seqspace.hpp>

using namespace pseudoshift;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNoInput = 66;
constexpr int kExitSoftware = 70;

struct MissingFile : Error {
  using Error::Error;
};

struct Session {
  std::optional<SelfMapRule> map;
  std::optional<WeightRule> weights;
  SpaceSpec space = SpaceSpec::lp(2);
  Horizons h;
  bool exact = false;
  json sample = nullptr;
  uint64_t cover = 100;
  double tail_eps = 1e-12;
};

json read_json(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw MissingFile(std::string(what) + " file not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

template <class F>
auto field(const json& cfg, const char* name, F parse) {
  try {
    return parse(cfg.at(name));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("field '") + name + "': " + e.what());
  } catch (const MalformedRule& e) {
    throw ConfigError(std::string("field '") + name + "': " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + name + "': " + e.what());
  }
}

Session load_session(const std::string& path, std::optional<uint64_t> horizon_orbit,
                     std::optional<uint64_t> series_terms, const std::string& mode) {
  json cfg = read_json(path, "config");
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"map", "weights", "space", "horizons", "mode",
                                           "sample_k", "cover", "tail_eps"};
  for (const auto& [key, v] : cfg.items())
    if (!known.count(key)) throw ConfigError("unknown config field '" + key + "'");
  if (!cfg.contains("map")) throw ConfigError("config needs a 'map'");
  Session s;
  s.map = field(cfg, "map", [](const json& j) { return SelfMapRule::from_json(j); });
  if (cfg.contains("weights")) s.weights = field(cfg, "weights", [](const json& j) { return WeightRule::from_json(j); });
  if (cfg.contains("space")) s.space = field(cfg, "space", [](const json& j) { return SpaceSpec::from_json(j); });
  if (cfg.contains("horizons"))
    s.h = field(cfg, "horizons", [](const json& j) { return Horizons::from_json(j); });
  if (cfg.contains("mode")) {
    std::string m = field(cfg, "mode", [](const json& j) { return j.get<std::string>(); });
    if (m != "exact" && m != "float") throw ConfigError("field 'mode': must be \"exact\" or \"float\"");
    s.exact = m == "exact";
  }
  if (cfg.contains("sample_k")) s.sample = cfg.at("sample_k");
  if (cfg.contains("cover")) s.cover = field(cfg, "cover", [](const json& j) {
      if (!j.is_number_integer() || j.get<int64_t>() < 1) throw ConfigError("must be an integer >= 1");
      return j.get<uint64_t>();
    });
  if (cfg.contains("tail_eps")) s.tail_eps = field(cfg, "tail_eps", [](const json& j) {
      if (!j.is_number() || !(j.get<double>() > 0)) throw ConfigError("must be a positive number");
      return j.get<double>();
    });
  if (horizon_orbit) s.h.orbit = *horizon_orbit;
  if (series_terms) s.h.series_terms = *series_terms;
  if (!mode.empty()) s.exact = mode == "exact";
  return s;
}

const WeightRule& weights_of(const Session& s) {
  if (!s.weights) throw ConfigError("this command needs 'weights' in the config");
  return *s.weights;
}

std::vector<uint64_t> sample_of(const Session& s) {
  if (s.sample.is_null()) return default_sample(*s.map, s.h);
  if (s.sample.is_string()) {
    const std::string spec = s.sample.get<std::string>();
    const std::string prefix = "generators:";
    if (spec.rfind(prefix, 0) != 0) throw ConfigError("field 'sample_k': expected a list or \"generators:<cover>\"");
    uint64_t cover = 0;
    try {
      cover = std::stoull(spec.substr(prefix.size()));
    } catch (...) {
      throw ConfigError("field 'sample_k': bad cover in \"" + spec + "\"");
    }
    if (cover == 0) throw ConfigError("field 'sample_k': cover must be >= 1");
    std::vector<uint64_t> out;
    for (const auto& [g, exact] : generator_set(*s.map, 1, cover, s.h.preimage_scan).members)
      if (exact) out.push_back(g);
    if (out.empty()) out.push_back(1);
    return out;
  }
  if (!s.sample.is_array() || s.sample.empty()) throw ConfigError("field 'sample_k': expected a nonempty list");
  std::vector<uint64_t> out;
  for (const auto& v : s.sample) {
    if (!v.is_number_integer() || v.get<int64_t>() < 1) throw ConfigError("field 'sample_k': entries must be >= 1");
    out.push_back(v.get<uint64_t>());
  }
  return out;
}

std::string num(double x) {
  std::ostringstream o;
  o << std::setprecision(17) << x;
  return o.str();
}

std::string cell(double x) { return num(x); }
std::string cell(const mpq_class& q) { return q.get_str(); }

struct Output {
  json report;
  std::vector<std::vector<std::string>> rows;  // csv, first row is the header
  int code = 0;
};

Output cmd_analyze_map(const Session& s) {
  Output out;
  const SelfMapRule& map = *s.map;
  Verdict inj = check_injective(map, s.h.structural);
  Verdict per = check_periodic_points(map, 100, std::min<uint64_t>(s.h.structural, 1000));
  json parts = json::object(), gens = json::object();
  out.rows.push_back({"n", "generator", "exact", "members_in_cover"});
  if (!inj.is(VerdictKind::Refuted) && !per.is(VerdictKind::Refuted)) {
    for (uint64_t n = 1; n <= 3; ++n) {
      try {
        auto groups = partition(map, n, s.cover, s.h.preimage_scan);
        parts[std::to_string(n)] = to_json(groups);
        json g = json::array();
        for (const auto& grp : groups) {
          g.push_back(grp.generator);
          out.rows.push_back({std::to_string(n), std::to_string(grp.generator), grp.exact ? "true" : "false",
                              std::to_string(grp.members.size())});
        }
        gens[std::to_string(n)] = g;
      } catch (const Error& e) {
        parts[std::to_string(n)] = {{"error", e.what()}};
      }
    }
  }
  Verdict overall = combine({inj, per});
  out.report = {{"structural", {{"injective", to_json(inj)}, {"periodic", to_json(per)}}},
                {"cover", s.cover},
                {"partitions", parts},
                {"generator_sets", gens},
                {"overall", to_json(overall)}};
  out.code = exit_code(overall);
  return out;
}

Output from_criterion(const CriterionReport& r) {
  Output out;
  out.report = r.to_json();
  out.rows.push_back({"k", "verdict"});
  for (const auto& smp : r.samples) out.rows.push_back({std::to_string(smp.k), to_string(smp.verdict.kind)});
  out.rows.push_back({"overall", to_string(r.overall.kind)});
  out.code = exit_code(r.overall);
  return out;
}

template <class S>
std::vector<std::vector<std::string>> vector_rows(const FinSeq<S>& x) {
  std::vector<std::vector<std::string>> rows{{"index", "value"}};
  for (const auto& [i, v] : x.entries()) rows.push_back({std::to_string(i), cell(v)});
  return rows;
}

template <class S>
Output cmd_periodic(const Session& s, uint64_t k, uint64_t N, double eps) {
  auto r = build_periodic_point<S>(*s.map, weights_of(s), k, N, s.space, eps, s.h);
  Output out;
  out.report = r.to_json();
  out.report["mode"] = s.exact ? "exact" : "float";
  out.rows = vector_rows(r.vector);
  const bool pass = s.exact ? r.residual == 0.0 : r.relative_residual <= 1e-10;
  out.report["pass"] = pass;
  out.code = pass ? 0 : 1;
  return out;
}

template <class S>
Output cmd_approx(const Session& s, const std::string& target_file, double eps) {
  json tj = read_json(target_file, "target");
  FinSeq<S> y;
  try {
    y = FinSeq<S>::from_json(tj);
  } catch (const ConfigError& e) {
    throw ConfigError(target_file + ": " + e.what());
  }
  auto r = approximate_by_periodic<S>(*s.map, weights_of(s), y, eps, s.space, s.h);
  Output out;
  out.report = r.to_json();
  out.report["eps"] = eps;
  out.rows = vector_rows(r.x);
  out.code = r.achieved < eps ? 0 : 1;
  return out;
}

template <class S>
Output cmd_simulate(const Session& s, const std::string& vector_file, uint64_t steps) {
  json vj = read_json(vector_file, "vector");
  FinSeq<S> x;
  try {
    x = FinSeq<S>::from_json(vj);
  } catch (const ConfigError& e) {
    throw ConfigError(vector_file + ": " + e.what());
  }
  Output out;
  json traj = json::array();
  out.rows.push_back({"j", "norm", "top"});
  for (uint64_t j = 0; j <= steps; ++j) {
    std::vector<std::pair<double, uint64_t>> mags;
    for (const auto& [i, v] : x.entries()) mags.emplace_back(abs_double(v), i);
    std::sort(mags.begin(), mags.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (mags.size() > 5) mags.resize(5);
    json top = json::array();
    std::string top_csv;
    for (const auto& [m, i] : mags) {
      top.push_back({{"index", i}, {"value", scalar_to_json(x.get(i))}});
      top_csv += (top_csv.empty() ? "" : " ") + std::to_string(i) + ":" + cell(x.get(i));
    }
    const double nrm = norm(x, s.space);
    traj.push_back({{"j", j}, {"norm", nrm}, {"top", top}});
    out.rows.push_back({std::to_string(j), num(nrm), top_csv});
    if (j < steps) x = apply_operator(*s.map, weights_of(s), x, 1, s.h.preimage_scan);
  }
  out.report = {{"space", s.space.to_json()}, {"steps", steps}, {"trajectory", traj}};
  return out;
}

std::string csv_escape(const std::string& f) {
  if (f.find_first_of(",\"\n") == std::string::npos) return f;
  std::string q = "\"";
  for (char c : f) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

void emit(const Output& out, const std::string& format, const std::string& path) {
  std::ostringstream body;
  if (format == "csv") {
    for (const auto& row : out.rows) {
      for (size_t i = 0; i < row.size(); ++i) body << (i ? "," : "") << csv_escape(row[i]);
      body << "\n";
    }
  } else {
    body << out.report.dump(2) << "\n";
  }
  if (path.empty() || path == "-") {
    std::cout << body.str();
    return;
  }
  std::ofstream f(path);
  if (!f) throw MissingFile("cannot write output file: " + path);
  f << body.str();
}

int report_error(const std::string& kind, const std::string& message, int code) {
  json e{{"error", kind}, {"message", message}};
  std::cerr << e.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted pseudo-shift analysis"};
  app.require_subcommand(1);
  std::string config, output, format = "json", mode;
  std::optional<uint64_t> horizon_orbit, series_terms;
  app.add_option("--config", config, "session config (JSON)")->required();
  app.add_option("--horizon-orbit", horizon_orbit, "override horizons.orbit")->check(CLI::PositiveNumber);
  app.add_option("--series-terms", series_terms, "override horizons.series_terms")->check(CLI::PositiveNumber);
  app.add_option("--mode", mode, "exact | float")->check(CLI::IsMember({"exact", "float"}));
  app.add_option("--output", output, "output path (default stdout)");
  app.add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  app.fallthrough();

  auto* analyze = app.add_subcommand("analyze-map", "structural checks, partitions and generator sets");
  auto* hyper = app.add_subcommand("check-hypercyclic", "hypercyclicity criterion");
  auto* chaotic = app.add_subcommand("check-chaotic", "chaoticity criterion for the configured space");
  auto* periodic = app.add_subcommand("periodic", "build and verify a periodic vector");
  uint64_t k = 1, N = 1;
  double eps = 1e-12;
  periodic->add_option("--k", k, "orbit index")->check(CLI::PositiveNumber);
  periodic->add_option("--N", N, "period")->check(CLI::PositiveNumber);
  periodic->add_option("--eps", eps, "coefficient cutoff")->check(CLI::PositiveNumber);
  auto* approx = app.add_subcommand("approx", "approximate a target by a periodic vector");
  std::string target;
  double approx_eps = 0.1;
  approx->add_option("--target", target, "target vector (JSON)")->required();
  approx->add_option("--eps", approx_eps, "accuracy")->check(CLI::PositiveNumber);
  auto* simulate = app.add_subcommand("simulate", "iterate the operator on a vector");
  std::string vector_file;
  uint64_t steps = 10;
  simulate->add_option("--vector", vector_file, "start vector (JSON)")->required();
  simulate->add_option("--steps", steps, "iterations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    Session s = load_session(config, horizon_orbit, series_terms, mode);
    Output out;
    if (*analyze) {
      out = cmd_analyze_map(s);
    } else if (*hyper) {
      out = from_criterion(check_hypercyclic(*s.map, weights_of(s), s.space, sample_of(s), s.h));
    } else if (*chaotic) {
      out = from_criterion(check_chaotic(*s.map, weights_of(s), s.space, sample_of(s), s.h));
    } else if (*periodic) {
      out = s.exact ? cmd_periodic<mpq_class>(s, k, N, eps) : cmd_periodic<double>(s, k, N, eps);
    } else if (*approx) {
      out = s.exact ? cmd_approx<mpq_class>(s, target, approx_eps) : cmd_approx<double>(s, target, approx_eps);
    } else if (*simulate) {
      out = s.exact ? cmd_simulate<mpq_class>(s, vector_file, steps) : cmd_simulate<double>(s, vector_file, steps);
    }
    emit(out, format, output);
    return out.code;
  } catch (const MissingFile& e) {
    return report_error("missing_file", e.what(), kExitNoInput);
  } catch (const ConfigError& e) {
    return report_error("config", e.what(), kExitData);
  } catch (const MalformedRule& e) {
    return report_error("config", e.what(), kExitData);
  } catch (const NotInjectiveWitness& e) {
    return report_error("not_injective", e.what(), 1);
  } catch (const PeriodicOrbitDetected& e) {
    return report_error("periodic_orbit", e.what(), 1);
  } catch (const Error& e) {
    return report_error("inconclusive", e.what(), 2);
  } catch (const std::invalid_argument& e) {
    return report_error("usage", e.what(), kExitUsage);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kExitSoftware);
  }
}
