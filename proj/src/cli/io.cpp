#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "furstenberg/errors.hpp"
#include "internal.hpp"

namespace furstenberg::cli {

namespace {

[[noreturn]] void spec_fail(const std::string& detail) {
  throw Error("measures", ErrorCode::InvalidSpec, detail);
}

json real(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

json reals(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

json point(const ProjectivePoint& p) { return reals(p.rep()); }

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string CsvTable::render() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

CsvTable replicate_table(const std::string& name, std::span<const std::size_t> grid,
                         const std::vector<Vector>& values, const std::string& statistic) {
  CsvTable t{name, {"n", "replicate", "statistic", "value"}, {}};
  for (std::size_t k = 0; k < grid.size(); ++k)
    for (std::size_t r = 0; r < values[k].size(); ++r)
      t.rows.push_back({std::to_string(grid[k]), std::to_string(r), statistic,
                        format_real(values[k][r])});
  return t;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cli", ErrorCode::IoError, "cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cli", ErrorCode::IoError, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("cli", ErrorCode::IoError, "write failed for '" + path + "'");
}

MeasureSpec spec_from_json(const json& doc) {
  if (!doc.is_object()) spec_fail("spec must be a JSON object");
  MeasureSpec spec;
  spec.label = doc.value("label", std::string("unnamed"));
  if (!doc.contains("atoms") || !doc["atoms"].is_array()) spec_fail("spec needs an 'atoms' array");
  std::size_t index = 0;
  for (const auto& a : doc["atoms"]) {
    const std::string tag = "atom " + std::to_string(index++) + ": ";
    if (!a.is_object() || !a.contains("matrix")) spec_fail(tag + "needs a 'matrix'");
    const auto& rows = a["matrix"];
    if (!rows.is_array() || rows.empty()) spec_fail(tag + "matrix must be a non-empty array of rows");
    const std::size_t d = rows.size();
    std::vector<double> values;
    std::vector<std::string> exact;
    bool all_strings = true;
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != d) spec_fail(tag + "matrix is not square");
      for (const auto& e : row) {
        if (e.is_string()) {
          const auto q = parse_rational(e.get<std::string>());
          values.push_back(q.get_d());
          exact.push_back(e.get<std::string>());
        } else if (e.is_number()) {
          values.push_back(e.get<double>());
          all_strings = false;
        } else {
          spec_fail(tag + "entries must be numbers or rational strings");
        }
      }
    }
    Atom atom;
    atom.matrix = SquareMatrix(d, std::move(values));
    if (all_strings) atom.exact = RationalMatrix::parse(d, exact);
    if (!a.contains("weight")) spec_fail(tag + "needs a 'weight'");
    const auto& w = a["weight"];
    if (w.is_number()) atom.weight = w.get<double>();
    else if (w.is_string()) atom.weight = parse_rational(w.get<std::string>()).get_d();
    else spec_fail(tag + "weight must be a number or a rational string");
    spec.atoms.push_back(std::move(atom));
  }
  return spec;
}

MeasureSpec load_spec(const std::string& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error("cli", ErrorCode::ParseError, path + ": " + e.what());
  }
  return spec_from_json(doc);
}

json spec_to_json(const MeasureSpec& spec) {
  json atoms = json::array();
  for (const auto& a : spec.atoms) {
    json rows = json::array();
    const std::size_t d = a.matrix.dim();
    for (std::size_t i = 0; i < d; ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < d; ++j) {
        if (a.exact) row.push_back((*a.exact)(i, j).get_str());
        else row.push_back(a.matrix(i, j));
      }
      rows.push_back(std::move(row));
    }
    atoms.push_back({{"matrix", std::move(rows)}, {"weight", a.weight}});
  }
  return {{"label", spec.label}, {"atoms", std::move(atoms)}};
}

json to_json(std::span<const double> v) { return reals(v); }

json to_json(const SquareMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) rows.push_back(reals(m.row(i)));
  return rows;
}

json to_json(const DecayFit& f) {
  json j = {{"grid", f.grid},
            {"values", reals(f.values)},
            {"slope", real(f.slope)},
            {"intercept", real(f.intercept)},
            {"r2", real(f.r2)},
            {"rho_hat", real(f.rho_hat)},
            {"slope_se", real(f.slope_se)},
            {"slope_ci", {real(f.slope_ci_low), real(f.slope_ci_high)}},
            {"points_used", f.points_used},
            {"exact_zero", f.exact_zero},
            {"se_method", f.se_method}};
  if (f.has_typical)
    j["typical"] = {{"slope", real(f.typical_slope)},
                    {"slope_se", real(f.typical_slope_se)},
                    {"r2", real(f.typical_r2)}};
  return j;
}

json to_json(const LyapunovEstimate& e) {
  return {{"mean", reals(e.mean)},
          {"se", reals(e.se)},
          {"n", e.n},
          {"replicas", e.replicas},
          {"check_n", e.check_n},
          {"wedge_mean", reals(e.wedge_mean)},
          {"wedge_se", reals(e.wedge_se)},
          {"estimators_agree", e.estimators_agree},
          {"ordering_ok", e.ordering_ok},
          {"sum_ok", e.sum_ok},
          {"warnings", e.warnings}};
}

json to_json(const GapEstimate& g) {
  return {{"gap", real(g.gap)},
          {"se", real(g.se)},
          {"ci", {real(g.ci_low), real(g.ci_high)}},
          {"confidence", g.confidence},
          {"gap_positive", g.gap_positive},
          {"lyapunov", to_json(g.lyapunov)}};
}

json to_json(const SeriesResult& s) {
  json means = json::array();
  for (const auto& row : s.values) {
    double sum = 0.0;
    std::size_t used = 0;
    for (double v : row)
      if (!std::isnan(v)) {
        sum += v;
        ++used;
      }
    means.push_back(real(used ? sum / static_cast<double>(used) : std::nan("")));
  }
  return {{"fit", to_json(s.fit)},
          {"mean", std::move(means)},
          {"levels", s.levels},
          {"skipped", s.skipped},
          {"snapshots", s.snapshots},
          {"warnings", s.warnings}};
}

json to_json(const UNonconvergence& u) {
  return {{"series", to_json(u.series)},
          {"window_mean", real(u.window_mean)},
          {"window_se", real(u.window_se)},
          {"floor", u.floor},
          {"floor_exceeded", u.floor_exceeded},
          {"no_decay", u.no_decay}};
}

json to_json(const IndependenceResult& r) {
  json fns = json::array();
  for (auto f : r.functions) fns.push_back(test_function_id(f));
  auto matrix = [](const std::vector<Vector>& m) {
    json a = json::array();
    for (const auto& row : m) a.push_back(reals(row));
    return a;
  };
  return {{"grid", r.grid},
          {"functions", std::move(fns)},
          {"discrepancy", matrix(r.discrepancy)},
          {"discrepancy_se", matrix(r.discrepancy_se)},
          {"max_discrepancy", reals(r.max_discrepancy)},
          {"fit", to_json(r.fit)},
          {"samples", r.samples},
          {"n_star", r.n_star},
          {"levels", r.levels},
          {"skipped", r.skipped}};
}

json to_json(const DimensionFit& d) {
  return {{"eps_grid", reals(d.eps_grid)},
          {"max_mass", reals(d.max_mass)},
          {"argmax", d.argmax},
          {"alpha", real(d.alpha)},
          {"alpha_se", real(d.alpha_se)},
          {"alpha_ci", {real(d.alpha_ci_low), real(d.alpha_ci_high)}},
          {"c_hat", real(d.c_hat)},
          {"eps0", real(d.eps0)},
          {"r2", real(d.r2)},
          {"points_used", d.points_used},
          {"alpha_positive", d.alpha_positive},
          {"family", d.family_description},
          {"family_size", d.family_size},
          {"sample_size", d.sample_size},
          {"warnings", d.warnings}};
}

json to_json(const CorrelationDimension& c) {
  return {{"value", real(c.value)},
          {"se", real(c.se)},
          {"ci", {real(c.ci_low), real(c.ci_high)}},
          {"radii", reals(c.radii)},
          {"pair_fraction", reals(c.pair_fraction)},
          {"points_used", c.points_used},
          {"positive", c.positive}};
}

json to_json(const PingPongCertificate& c) {
  json players = json::array();
  for (const auto& p : c.players)
    players.push_back({{"name", p.name},
                       {"v", point(p.v)},
                       {"H_normal", reals(p.H.normal())},
                       {"ratio", real(p.ratio)},
                       {"contraction_margin", real(p.contraction_margin)},
                       {"separation", real(p.separation)},
                       {"separation_margin", real(p.separation_margin)}});
  json cross = json::array();
  for (const auto& m : c.cross)
    cross.push_back({{"s", c.players[m.s].name},
                     {"t", c.players[m.t].name},
                     {"distance", real(m.distance)},
                     {"margin", real(m.margin)}});
  json witnesses = json::array();
  for (const auto& w : c.witnesses) {
    json x = {{"ball", c.players[w.s].name},
              {"hyperplane", c.players[w.t].name},
              {"clearance", real(w.clearance)},
              {"found", w.found}};
    x["point"] = w.point ? point(*w.point) : json();
    witnesses.push_back(std::move(x));
  }
  return {{"epsilon", real(c.epsilon)},
          {"epsilons_tried", reals(c.epsilons_tried)},
          {"seed", c.seed},
          {"players", std::move(players)},
          {"cross", std::move(cross)},
          {"witnesses", std::move(witnesses)},
          {"conditions",
           {{"contraction", c.contraction_ok},
            {"separation", c.separation_ok},
            {"cross", c.cross_ok},
            {"witnesses", c.witnesses_ok}}},
          {"passed", c.passed},
          {"note", c.note}};
}

json to_json(const FreenessResult& f) {
  json series = json::array();
  for (const auto& p : f.series)
    series.push_back({{"n", p.n},
                      {"pairs", p.pairs},
                      {"certified", p.certified},
                      {"errors", p.errors},
                      {"fraction", real(p.fraction)}});
  json j = {{"n", f.n},
            {"certified_fraction", real(f.certified_fraction)},
            {"series", std::move(series)},
            {"spot_checks", f.spot_checks},
            {"spot_check_relations", f.spot_check_relations},
            {"relations_found", f.relations_found},
            {"warnings", f.warnings}};
  j["fit"] = f.fit.grid.empty() ? json() : to_json(f.fit);
  return j;
}

json to_json(const WalkState& s) {
  json j = {{"step", s.step},
            {"side", s.side == Side::Right ? "right" : "left"},
            {"mode", s.mode == WalkMode::Direct ? "direct" : "renormalized"}};
  if (s.mode == WalkMode::Direct) {
    j["product"] = to_json(s.product);
    j["max_entry"] = real(s.max_entry);
  } else {
    j["frame"] = to_json(s.frame);
    j["log_diag"] = reals(s.log_diag);
  }
  return j;
}

}  // namespace furstenberg::cli
