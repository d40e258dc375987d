#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>

#include "furstenberg/errors.hpp"
#include "furstenberg/parallel.hpp"
#include "internal.hpp"

namespace furstenberg::cli {

namespace {

namespace fs = std::filesystem;

[[noreturn]] void usage_fail(const std::string& detail) {
  throw Error("cli", ErrorCode::InvalidArgument, detail);
}

// Raw option values by long name, from the command line or a config file.
using RawOptions = std::map<std::string, std::vector<std::string>>;

struct Outcome {
  json payload;
  std::vector<CsvTable> tables;
  std::vector<std::string> warnings;
  int exit_code = 0;
};

struct Command {
  const char* name;
  const char* help;
  std::vector<const char*> options;
  bool stochastic;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> list{
      {"validate-spec", "check a measure spec", {"spec"}, false},
      {"walk", "run one walk and print snapshots", {"spec", "n", "grid", "side", "mode"}, true},
      {"lyapunov", "estimate the Lyapunov spectrum", {"spec", "n", "replicas"}, true},
      {"gap", "estimate lambda_1 - lambda_2 with a 99% CI", {"spec", "n", "replicas"}, true},
      {"converge", "rate at which two starts merge under the walk",
       {"spec", "grid", "replicas", "level"}, true},
      {"kak-converge", "convergence rate of the right k-frames or left u-frames",
       {"spec", "grid", "replicas", "level", "side"}, true},
      {"u-diverge", "non-convergence of the right u-frames",
       {"spec", "grid", "replicas", "level"}, true},
      {"independence", "decorrelation of the k- and u-components",
       {"spec", "grid", "samples", "level"}, true},
      {"dimension", "hyperplane-mass exponent and correlation dimension",
       {"spec", "n", "count", "eps-grid", "budget"}, true},
      {"certify", "ping-pong certificate for a pair of matrices",
       {"g", "h", "h-rotate", "epsilon"}, false},
      {"word-oracle", "exact search for short relations", {"g", "h", "spec", "L"}, false},
      {"tits", "certified fraction for pairs of independent walks",
       {"spec", "n", "grid", "pairs"}, true},
  };
  return list;
}

const Command* find_command(const std::string& name) {
  for (const auto& c : commands())
    if (name == c.name) return &c;
  return nullptr;
}

std::size_t size_option(const RawOptions& raw, const char* key, std::size_t fallback) {
  const auto it = raw.find(key);
  if (it == raw.end()) return fallback;
  const std::string& s = it->second.back();
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || s.front() == '-')
    usage_fail(std::string("--") + key + " must be a non-negative integer, got '" + s + "'");
  return static_cast<std::size_t>(v);
}

std::optional<double> real_option(const RawOptions& raw, const char* key) {
  const auto it = raw.find(key);
  if (it == raw.end()) return std::nullopt;
  const auto v = parse_real_list(it->second.back());
  if (v.size() != 1) usage_fail(std::string("--") + key + " takes one number");
  return v.front();
}

std::string string_option(const RawOptions& raw, const char* key, const std::string& fallback) {
  const auto it = raw.find(key);
  return it == raw.end() ? fallback : it->second.back();
}

std::string resolve_spec_path(const std::string& path) {
  if (fs::exists(path)) return path;
  const fs::path bundled = fs::path(FURSTENBERG_DATA_DIR) / path;
  if (fs::exists(bundled)) return bundled.string();
  throw Error("cli", ErrorCode::IoError, "spec file '" + path + "' does not exist");
}

Level parse_level(const std::string& s) {
  if (s == "auto") return Level::Auto;
  if (s == "flag") return Level::Flag;
  if (s == "projective") return Level::Projective;
  usage_fail("--level must be auto, flag or projective");
}

struct Defaults {
  std::size_t n;
  const char* grid;
};

Defaults defaults_for(const std::string& cmd) {
  if (cmd == "walk") return {100, ""};
  if (cmd == "lyapunov" || cmd == "gap") return {2000, ""};
  if (cmd == "converge") return {0, "4,8,12,16,20,24"};
  if (cmd == "kak-converge") return {0, "6,10,14,18,22,26,30"};
  if (cmd == "u-diverge") return {0, "6,10,14,18,22,26,30"};
  if (cmd == "independence") return {0, "10,20,30,40,50,60,70,80"};
  if (cmd == "dimension") return {60, ""};
  if (cmd == "tits") return {60, "20,30,40,50,60,70,80"};
  return {0, ""};
}

ExperimentConfig resolve(const std::string& cmd, const RawOptions& raw) {
  const Command& c = *find_command(cmd);
  auto uses = [&](const char* key) {
    for (const char* o : c.options)
      if (std::string(o) == key) return true;
    return false;
  };
  for (const auto& [key, _] : raw) {
    if (key == "seed" || key == "out" || key == "jobs") continue;
    if (!uses(key.c_str())) usage_fail("option --" + key + " does not apply to " + cmd);
  }
  const auto d = defaults_for(cmd);
  ExperimentConfig cfg;
  cfg.subcommand = cmd;
  if (auto it = raw.find("spec"); it != raw.end()) cfg.specs = it->second;
  if (uses("n")) cfg.n = size_option(raw, "n", d.n);
  if (uses("grid")) {
    const std::string g = string_option(raw, "grid", d.grid);
    if (!g.empty()) cfg.grid = parse_grid(g);
  }
  if (uses("replicas")) cfg.replicas = size_option(raw, "replicas", cmd == "lyapunov" || cmd == "gap" ? 16 : 64);
  if (uses("count")) cfg.count = size_option(raw, "count", 4000);
  if (uses("samples")) cfg.samples = size_option(raw, "samples", 2000);
  if (uses("eps-grid")) {
    const std::string e = string_option(raw, "eps-grid", "");
    cfg.eps_grid = e.empty() ? default_eps_grid() : parse_real_list(e);
  }
  if (uses("budget")) cfg.budget = size_option(raw, "budget", 64);
  if (uses("pairs")) cfg.pairs = size_option(raw, "pairs", 100);
  if (uses("L")) cfg.word_length = size_option(raw, "L", 6);
  if (uses("level")) cfg.level = string_option(raw, "level", "auto");
  else cfg.level.clear();
  if (cmd == "walk") {
    cfg.side = string_option(raw, "side", "right");
    cfg.mode = string_option(raw, "mode", "direct");
  } else if (cmd == "kak-converge") {
    cfg.side = string_option(raw, "side", "right-k");
  }
  if (uses("g")) cfg.g = string_option(raw, "g", "");
  if (uses("h")) cfg.h = string_option(raw, "h", "");
  if (uses("h-rotate")) cfg.h_rotate_degrees = real_option(raw, "h-rotate");
  if (uses("epsilon")) cfg.epsilon = real_option(raw, "epsilon");

  if (raw.count("seed")) {
    cfg.seed = size_option(raw, "seed", 0);
  } else if (const char* env = std::getenv("FURSTENBERG_SEED"); env && *env) {
    RawOptions fallback{{"seed", {env}}};
    cfg.seed = size_option(fallback, "seed", 0);
  }
  if (c.stochastic && !cfg.seed)
    usage_fail("a seed is required: pass --seed or set FURSTENBERG_SEED");
  if (cmd == "certify" && !cfg.seed) cfg.seed = 0;
  cfg.out_dir = string_option(raw, "out", "");
  if (raw.count("jobs")) cfg.jobs = size_option(raw, "jobs", 0);
  return cfg;
}

const MeasureSpec& single_spec(const ExperimentConfig& cfg, std::vector<MeasureSpec>& loaded) {
  if (loaded.empty()) usage_fail(cfg.subcommand + " needs --spec");
  if (loaded.size() > 1) usage_fail(cfg.subcommand + " takes a single --spec");
  return loaded.front();
}

json matrix_strings(const RationalMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(m(i, j).get_str());
    rows.push_back(std::move(row));
  }
  return rows;
}

Outcome cmd_validate(const ExperimentConfig& cfg, std::vector<MeasureSpec>& specs) {
  const auto& spec = single_spec(cfg, specs);
  const auto diagnostics = validate(spec);
  Outcome o;
  o.payload = {{"label", spec.label},
               {"dim", spec.dim()},
               {"atoms", spec.atoms.size()},
               {"exact", spec.all_exact()},
               {"diagnostics", diagnostics},
               {"notes", hypothesis_notes(spec)},
               {"valid", diagnostics.empty()}};
  o.exit_code = diagnostics.empty() ? 0 : 2;
  return o;
}

Outcome cmd_walk(const ExperimentConfig& cfg, std::vector<MeasureSpec>& specs) {
  const auto& spec = single_spec(cfg, specs);
  Side side;
  if (cfg.side == "right") side = Side::Right;
  else if (cfg.side == "left") side = Side::Left;
  else usage_fail("--side must be right or left");
  WalkMode mode;
  if (cfg.mode == "direct") mode = WalkMode::Direct;
  else if (cfg.mode == "renormalized") mode = WalkMode::Renormalized;
  else usage_fail("--mode must be direct or renormalized");
  const auto states = run_walk(spec, *cfg.n, *cfg.seed, side, cfg.grid, mode);
  Outcome o;
  json snaps = json::array();
  CsvTable t{"walk", {"n", "replicate", "statistic", "value"}, {}};
  for (const auto& s : states) {
    snaps.push_back(to_json(s));
    const auto& m = mode == WalkMode::Direct ? s.product : s.frame;
    const std::string prefix = mode == WalkMode::Direct ? "x" : "q";
    for (std::size_t i = 0; i < m.dim(); ++i)
      for (std::size_t j = 0; j < m.dim(); ++j)
        t.rows.push_back({std::to_string(s.step), "0",
                          prefix + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                          format_real(m(i, j))});
    if (mode == WalkMode::Renormalized)
      for (std::size_t i = 0; i < s.log_diag.size(); ++i)
        t.rows.push_back({std::to_string(s.step), "0", "log_r[" + std::to_string(i) + "]",
                          format_real(s.log_diag[i])});
  }
  o.payload = {{"label", spec.label}, {"snapshots", std::move(snaps)}};
  o.tables.push_back(std::move(t));
  return o;
}

CsvTable lyapunov_table(const LyapunovEstimate& e, bool with_gap) {
  CsvTable t{with_gap ? "gap" : "lyapunov", {"n", "replicate", "statistic", "value"}, {}};
  for (std::size_t r = 0; r < e.per_replica.size(); ++r) {
    const auto& l = e.per_replica[r];
    for (std::size_t i = 0; i < l.size(); ++i)
      t.rows.push_back({std::to_string(e.n), std::to_string(r), "lambda_" + std::to_string(i + 1),
                        format_real(l[i])});
    if (with_gap && l.size() > 1)
      t.rows.push_back({std::to_string(e.n), std::to_string(r), "gap", format_real(l[0] - l[1])});
  }
  return t;
}

Outcome cmd_lyapunov(const ExperimentConfig& cfg, std::vector<MeasureSpec>& specs) {
  const auto& spec = single_spec(cfg, specs);
  const auto e = lyapunov_spectrum(spec, *cfg.n, *cfg.replicas, *cfg.seed);
  Outcome o;
  o.payload = to_json(e);
  o.payload["label"] = spec.label;
  o.warnings = e.warnings;
  o.tables.push_back(lyapunov_table(e, false));
  return o;
}

Outcome cmd_gap(const ExperimentConfig& cfg, std::vector<MeasureSpec>& specs) {
  const auto& spec = single_spec(cfg, specs);
  const auto g = top_gap(spec, *cfg.n, *cfg.replicas, *cfg.seed);
  Outcome o;
  o.payload = to_json(g);
  o.payload["label"] = spec.label;
  o.warnings = g.lyapunov.warnings;
  o.tables.push_back(lyapunov_table(g.lyapunov, true));
  return o;
}

Outcome series_outcome(const std::string& name, const std::string& statistic,
                       const MeasureSpec& spec, const SeriesResult& s,
                       std::span<const std::size_t> grid) {
  Outcome o;
  o.payload = to_json(s);
  o.payload["label"] = spec.label;
  o.warnings = s.warnings;
  o.tables.push_back(replicate_table(name, grid, s.values, statistic));
  return o;
}

Outcome cmd_converge(const ExperimentConfig& cfg, std::vector<MeasureSpec>& specs) {
  const auto& spec = single_spec(cfg, specs);
  const std::size_t d = spec.dim();
  const ProjectivePoint p(reference_flag_p0(d).frame().column(0));
  const ProjectivePoint q(reference_flag_q0(d).frame().column(0));
  const auto s = convergence_rate(spec, cfg.grid, *cfg.replicas, *cfg.seed, {p, q},
                                  parse_level(cfg.level));
  auto o = series_outcome("converge", "delta", spec, s, cfg.grid);
  o.payload["starts"] = {to_json(p.rep()), to_json(q.rep())};
  return o;
}

Outcome cmd_kak(const ExperimentConfig& cfg, std::vector<MeasureSpec>& specs) {
  const auto& spec = single_spec(cfg, specs);
  KakSide side;
  if (cfg.side == "right-k") side = KakSide::RightK;
  else if (cfg.side == "left-u") side = KakSide::LeftU;
  else usage_fail("--side must be right-k or left-u");
  const auto s = kak_convergence(spec, cfg.grid, *cfg.replicas, *cfg.seed, side,
                                 parse_level(cfg.level));
  auto o = series_outcome("kak_converge", "Delta", spec, s, cfg.grid);
  o.payload["side"] = cfg.side;
  return o;
}

Outcome cmd_u_diverge(const ExperimentConfig& cfg, std::vector<MeasureSpec>& specs) {
  const auto& spec = single_spec(cfg, specs);
  const auto u = u_nonconvergence(spec, cfg.grid, *cfg.replicas, *cfg.seed, parse_level(cfg.level));
  Outcome o;
  o.payload = to_json(u);
  o.payload["label"] = spec.label;
  o.warnings = u.series.warnings;
  o.tables.push_back(replicate_table("u_diverge", cfg.grid, u.series.values, "Delta_dual"));
  return o;
}

Outcome cmd_independence(const ExperimentConfig& cfg, std::vector<MeasureSpec>& specs) {
  const auto& spec = single_spec(cfg, specs);
  const auto fns = builtin_test_functions();
  const auto r = independence_gap(spec, cfg.grid, *cfg.samples, *cfg.seed, fns,
                                  parse_level(cfg.level));
  Outcome o;
  o.payload = to_json(r);
  o.payload["label"] = spec.label;
  // mean of the last third of the grid over the mean of the first third
  const std::size_t m = r.max_discrepancy.size();
  const std::size_t third = (m + 2) / 3;
  double head = 0.0, tail = 0.0;
  for (std::size_t k = 0; k < third; ++k) {
    head += r.max_discrepancy[k];
    tail += r.max_discrepancy[m - 1 - k];
  }
  const double ratio = head > 0.0 ? tail / head : std::nan("");
  o.payload["decay_ratio"] = std::isfinite(ratio) ? json(ratio) : json("nan");
  o.payload["decays"] = std::isfinite(ratio) && ratio < 0.2;
  CsvTable t{"independence", {"n", "phi_id", "statistic", "value"}, {}};
  for (std::size_t k = 0; k < r.grid.size(); ++k)
    for (std::size_t f = 0; f < r.functions.size(); ++f) {
      const std::string n = std::to_string(r.grid[k]);
      const std::string id = test_function_id(r.functions[f]);
      t.rows.push_back({n, id, "discrepancy", format_real(r.discrepancy[k][f])});
      t.rows.push_back({n, id, "discrepancy_se", format_real(r.discrepancy_se[k][f])});
      t.rows.push_back({n, id, "joint_mean", format_real(r.joint_mean[k][f])});
      t.rows.push_back({n, id, "product_mean", format_real(r.product_mean[k][f])});
    }
  o.tables.push_back(std::move(t));
  return o;
}

Outcome cmd_dimension(const ExperimentConfig& cfg, std::vector<MeasureSpec>& specs) {
  const auto& spec = single_spec(cfg, specs);
  require_valid(spec);
  if (*cfg.count < 2000) usage_fail("--count must be >= 2000");
  const auto sample =
      sample_stationary(spec, *cfg.n, *cfg.count, *cfg.seed, default_start(spec.dim()));
  const auto fit = fit_dimension(sample, cfg.eps_grid, *cfg.budget, *cfg.seed);
  const auto corr = correlation_dimension(sample);
  Outcome o;
  o.payload = {{"label", spec.label},
               {"fit", to_json(fit)},
               {"correlation", to_json(corr)},
               {"resolution", sample.resolution}};
  o.warnings = sample.warnings;
  CsvTable t{"dimension", {"epsilon", "hyperplane_id", "mass"}, {}};
  for (std::size_t k = 0; k < fit.eps_grid.size(); ++k)
    for (std::size_t h = 0; h < fit.masses[k].size(); ++h)
      t.rows.push_back({format_real(fit.eps_grid[k]), std::to_string(h),
                        format_real(fit.masses[k][h])});
  o.tables.push_back(std::move(t));
  return o;
}

Outcome cmd_certify(const ExperimentConfig& cfg, std::vector<MeasureSpec>&) {
  if (cfg.g.empty()) usage_fail("certify needs --g");
  if (cfg.h.empty() == !cfg.h_rotate_degrees) usage_fail("certify needs exactly one of --h, --h-rotate");
  const auto g_exact = parse_matrix_literal(cfg.g);
  const SquareMatrix g = g_exact.to_double();
  SquareMatrix h;
  json h_doc;
  if (!cfg.h.empty()) {
    const auto h_exact = parse_matrix_literal(cfg.h);
    h = h_exact.to_double();
    h_doc = matrix_strings(h_exact);
  } else {
    if (g.dim() != 2) usage_fail("--h-rotate needs a 2x2 --g");
    const auto r = SquareMatrix::rotation(*cfg.h_rotate_degrees * std::numbers::pi / 180.0);
    h = r * g * r.transposed();
    h_doc = to_json(h);
  }
  const auto cert = certify_pair(g, h, cfg.epsilon, *cfg.seed);
  Outcome o;
  o.payload = {{"g", matrix_strings(g_exact)}, {"h", std::move(h_doc)}, {"certificate", to_json(cert)}};
  return o;
}

Outcome cmd_word_oracle(const ExperimentConfig& cfg, std::vector<MeasureSpec>& specs) {
  RationalMatrix g, h;
  if (!specs.empty()) {
    if (!cfg.g.empty() || !cfg.h.empty()) usage_fail("pass either --spec or --g/--h");
    const auto atoms = exact_atoms(single_spec(cfg, specs));
    if (atoms.size() < 2) usage_fail("the measure spec needs at least two atoms");
    g = atoms[0];
    h = atoms[1];
  } else {
    if (cfg.g.empty() || cfg.h.empty()) usage_fail("word-oracle needs --g and --h (or --spec)");
    g = parse_matrix_literal(cfg.g);
    h = parse_matrix_literal(cfg.h);
  }
  const auto words = word_oracle(g, h, *cfg.word_length);
  Outcome o;
  o.payload = {{"g", matrix_strings(g)},
               {"h", matrix_strings(h)},
               {"L", *cfg.word_length},
               {"words", words},
               {"relations", words.size()}};
  return o;
}

Outcome cmd_tits(const ExperimentConfig& cfg, std::vector<MeasureSpec>& specs) {
  if (specs.empty() || specs.size() > 2) usage_fail("tits takes one or two --spec");
  const auto& s1 = specs.front();
  const auto& s2 = specs.back();
  const auto f = freeness_experiment(s1, s2, *cfg.n, cfg.grid, *cfg.pairs, *cfg.seed);
  Outcome o;
  o.payload = to_json(f);
  o.payload["labels"] = {s1.label, s2.label};
  o.warnings = f.warnings;
  CsvTable t{"tits", {"n", "replicate", "statistic", "value"}, {}};
  for (const auto& p : f.series)
    for (std::size_t i = 0; i < p.pair_certified.size(); ++i) {
      t.rows.push_back({std::to_string(p.n), std::to_string(i), "certified",
                        p.pair_certified[i] ? "1" : "0"});
      t.rows.push_back({std::to_string(p.n), std::to_string(i), "epsilon",
                        format_real(p.pair_epsilon[i])});
    }
  o.tables.push_back(std::move(t));
  return o;
}

Outcome dispatch(const ExperimentConfig& cfg) {
  std::vector<MeasureSpec> specs;
  for (const auto& p : cfg.specs) specs.push_back(load_spec(resolve_spec_path(p)));
  const std::string& c = cfg.subcommand;
  if (c == "validate-spec") return cmd_validate(cfg, specs);
  if (c == "walk") return cmd_walk(cfg, specs);
  if (c == "lyapunov") return cmd_lyapunov(cfg, specs);
  if (c == "gap") return cmd_gap(cfg, specs);
  if (c == "converge") return cmd_converge(cfg, specs);
  if (c == "kak-converge") return cmd_kak(cfg, specs);
  if (c == "u-diverge") return cmd_u_diverge(cfg, specs);
  if (c == "independence") return cmd_independence(cfg, specs);
  if (c == "dimension") return cmd_dimension(cfg, specs);
  if (c == "certify") return cmd_certify(cfg, specs);
  if (c == "word-oracle") return cmd_word_oracle(cfg, specs);
  return cmd_tits(cfg, specs);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Values of a config file, as option strings. Arrays become comma lists.
void merge_config_file(const std::string& path, RawOptions& raw) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error("cli", ErrorCode::ParseError, path + ": " + e.what());
  }
  if (!doc.is_object()) throw Error("cli", ErrorCode::ParseError, path + ": expected an object");
  auto scalar = [&](const json& v, const std::string& key) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_unsigned() || v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_float()) return format_real(v.get<double>());
    throw Error("cli", ErrorCode::ParseError, path + ": bad value for '" + key + "'");
  };
  for (const auto& [key, value] : doc.items()) {
    std::string name = key;
    for (auto& ch : name)
      if (ch == '_') ch = '-';
    if (name == "eps") name = "eps-grid";
    if (raw.count(name)) continue;  // command line wins
    std::vector<std::string> vals;
    if (name == "spec" || name == "specs") {
      name = "spec";
      if (value.is_array())
        for (const auto& v : value) vals.push_back(scalar(v, key));
      else
        vals.push_back(scalar(value, key));
      if (raw.count(name)) continue;
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar(v, key);
      vals.push_back(joined);
    } else {
      vals.push_back(scalar(value, key));
    }
    raw[name] = vals;
  }
}

int run_report(const std::vector<std::string>& inputs, const std::string& out_dir,
               std::ostream& out) {
  std::vector<ReportRow> rows;
  for (const auto& path : inputs) {
    json doc;
    try {
      doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
      throw Error("cli", ErrorCode::SchemaMismatch, path + ": not JSON: " + e.what());
    }
    validate_record(doc);
    rows.push_back(summarize(doc, path));
  }
  out << report_text(rows);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file((fs::path(out_dir) / "report.csv").string(), report_csv(rows));
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random matrix products: estimators and ping-pong certifier", "furstenberg"};
  app.require_subcommand(1);
  app.set_help_flag("-h,--help", "print this help");
  app.set_version_flag("--version", kToolVersion);

  RawOptions raw;
  std::string config_path;
  std::vector<std::string> report_inputs;
  std::string report_out;

  static const std::map<std::string, const char*> option_help{
      {"spec", "measure spec JSON (repeat for two specs)"},
      {"n", "walk length"},
      {"grid", "comma list of n, or geom:c:ratio:count"},
      {"replicas", "independent replicas"},
      {"count", "sample size"},
      {"samples", "joint samples per n"},
      {"eps-grid", "comma list of eps values"},
      {"budget", "hyperplanes from each construction"},
      {"pairs", "independent pairs per n"},
      {"L", "maximum word length (<= 12)"},
      {"level", "auto, flag or projective"},
      {"side", "walk: right|left; kak-converge: right-k|left-u"},
      {"mode", "direct or renormalized"},
      {"g", "matrix literal such as [[4,0],[0,1/4]]"},
      {"h", "matrix literal"},
      {"h-rotate", "take h = R g R^-1 with R the rotation by this many degrees"},
      {"epsilon", "fixed eps instead of the grid search"},
  };

  std::map<std::string, std::string> single;  // CLI11 targets
  std::vector<std::string> spec_values;
  std::string positional_spec;

  for (const auto& c : commands()) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->set_help_flag("--help", "print this help");
    for (const char* o : c.options) {
      const std::string name = o;
      if (name == "spec") {
        sub->add_option("--spec", spec_values, option_help.at(name));
        if (std::string(c.name) == "validate-spec")
          sub->add_option("spec_path", positional_spec, "measure spec JSON");
      } else {
        sub->add_option("--" + name, single[c.name + std::string(":") + name], option_help.at(name));
      }
    }
    sub->add_option("--seed", single[c.name + std::string(":seed")],
                    "master seed (default: $FURSTENBERG_SEED)");
    sub->add_option("--out", single[c.name + std::string(":out")], "output directory");
    sub->add_option("--jobs", single[c.name + std::string(":jobs")],
                    "worker threads (0 = all cores)");
    sub->add_option("--config", config_path, "JSON config; command-line flags take precedence");
  }
  auto* report = app.add_subcommand("report", "summarize result records");
  report->add_option("records", report_inputs, "result record JSON files");
  report->add_option("--out", report_out, "write report.csv here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (report->parsed()) return run_report(report_inputs, report_out, out);
    const CLI::App* chosen = app.get_subcommands().front();
    const std::string cmd = chosen->get_name();
    for (const auto& opt : chosen->get_options()) {
      if (opt->count() == 0) continue;
      const std::string name = opt->get_single_name();
      if (name == "config" || name == "help") continue;
      if (name == "spec" || name == "spec_path") continue;
      raw[name] = {single[cmd + ":" + name]};
    }
    if (!spec_values.empty()) raw["spec"] = spec_values;
    if (!positional_spec.empty()) raw["spec"].push_back(positional_spec);
    if (!config_path.empty()) merge_config_file(config_path, raw);

    const auto cfg = resolve(cmd, raw);
    set_max_jobs(cfg.jobs.value_or(0));

    const auto echo = config_echo(cfg);
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = dispatch(cfg);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json record = {{"schema", kRecordSchema},
                   {"subcommand", cmd},
                   {"tool_version", kToolVersion},
                   {"config", echo},
                   {"config_hash", config_hash(echo)},
                   {"started_at", started},
                   {"wall_clock_seconds", seconds},
                   {"payload", o.payload},
                   {"warnings", o.warnings}};
    validate_record(record);
    out << record.dump(2) << '\n';
    if (!cfg.out_dir.empty()) {
      fs::create_directories(cfg.out_dir);
      std::string stem = cmd;
      for (auto& ch : stem)
        if (ch == '-') ch = '_';
      write_file((fs::path(cfg.out_dir) / (stem + ".json")).string(), record.dump(2) + "\n");
      for (const auto& t : o.tables)
        write_file((fs::path(cfg.out_dir) / (t.name + ".csv")).string(), t.render());
    }
    for (const auto& w : o.warnings) err << "warning: " << w << '\n';
    return o.exit_code;
  } catch (const Error& e) {
    err << "error: " << e.qualified_code() << ": " << e.detail() << '\n';
    return is_numerical(e.code()) ? 3 : 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: cli.IoError: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace furstenberg::cli
