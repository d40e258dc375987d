#include <cmath>
#include <cstdio>
#include <map>

#include "furstenberg/errors.hpp"
#include "internal.hpp"

namespace furstenberg::cli {

namespace {

[[noreturn]] void mismatch(const std::string& detail) {
  throw Error("cli", ErrorCode::SchemaMismatch, detail);
}

// required payload keys; nested keys as "a.b"
const std::map<std::string, std::vector<std::string>>& payload_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"validate-spec", {"label", "diagnostics", "valid"}},
      {"walk", {"label", "snapshots"}},
      {"lyapunov", {"label", "mean", "se", "estimators_agree", "ordering_ok", "sum_ok"}},
      {"gap", {"label", "gap", "ci", "gap_positive"}},
      {"converge", {"label", "fit.slope", "fit.r2", "fit.slope_se", "mean"}},
      {"kak-converge", {"label", "side", "fit.slope", "fit.r2", "fit.slope_se", "mean"}},
      {"u-diverge", {"label", "window_mean", "floor_exceeded", "no_decay", "series.fit.slope"}},
      {"independence", {"label", "max_discrepancy", "discrepancy", "fit.slope", "decay_ratio"}},
      {"dimension", {"label", "fit.alpha", "fit.alpha_ci", "fit.alpha_positive", "correlation.value",
                     "correlation.ci"}},
      {"certify", {"certificate.passed", "certificate.epsilon", "certificate.players"}},
      {"word-oracle", {"words", "L", "relations"}},
      {"tits", {"certified_fraction", "series", "spot_check_relations"}},
  };
  return keys;
}

const json* lookup(const json& doc, const std::string& dotted) {
  const json* cur = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? dot : dot - start);
    if (cur->is_array() && !key.empty() &&
        key.find_first_not_of("0123456789") == std::string::npos) {
      const std::size_t i = std::stoul(key);
      if (i >= cur->size()) return nullptr;
      cur = &(*cur)[i];
    } else {
      if (!cur->is_object() || !cur->contains(key)) return nullptr;
      cur = &(*cur)[key];
    }
    if (dot == std::string::npos) return cur;
    start = dot + 1;
  }
}

double number(const json& doc, const std::string& key) {
  const json* v = lookup(doc, key);
  if (!v) mismatch("missing " + key);
  if (v->is_number()) return v->get<double>();
  if (v->is_string()) {
    const auto s = v->get<std::string>();
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
  }
  if (v->is_boolean()) return v->get<bool>() ? 1.0 : 0.0;
  mismatch(key + " is not a number");
}

bool flag(const json& doc, const std::string& key) {
  const json* v = lookup(doc, key);
  if (!v || !v->is_boolean()) mismatch(key + " is not a boolean");
  return v->get<bool>();
}

std::string flags(std::initializer_list<std::pair<const char*, bool>> items) {
  std::string s;
  for (const auto& [name, value] : items) {
    if (!s.empty()) s += ';';
    s += std::string(name) + '=' + (value ? "true" : "false");
  }
  return s;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

void validate_record(const json& r) {
  if (!r.is_object()) mismatch("record is not an object");
  if (r.value("schema", std::string()) != kRecordSchema) mismatch("unknown record schema");
  for (const char* key : {"subcommand", "tool_version", "config_hash", "started_at"})
    if (!r.contains(key) || !r[key].is_string()) mismatch(std::string("missing ") + key);
  if (!r.contains("config") || !r["config"].is_object()) mismatch("missing config");
  if (!r.contains("wall_clock_seconds") || !r["wall_clock_seconds"].is_number())
    mismatch("missing wall_clock_seconds");
  if (!r.contains("warnings") || !r["warnings"].is_array()) mismatch("missing warnings");
  if (!r.contains("payload") || !r["payload"].is_object()) mismatch("missing payload");
  const auto& hash = r["config_hash"].get_ref<const std::string&>();
  if (hash.size() != 40 || hash.find_first_not_of("0123456789abcdef") != std::string::npos)
    mismatch("config_hash is not a SHA-1 hex digest");
  if (config_hash(r["config"]) != hash) mismatch("config_hash does not match config");
  const auto& cmd = r["subcommand"].get_ref<const std::string&>();
  const auto it = payload_keys().find(cmd);
  if (it == payload_keys().end()) mismatch("unknown subcommand '" + cmd + "'");
  for (const auto& key : it->second)
    if (!lookup(r["payload"], key)) mismatch(cmd + " payload lacks '" + key + "'");
}

ReportRow summarize(const json& record, const std::string& file) {
  const auto& p = record["payload"];
  ReportRow row;
  row.file = file;
  row.subcommand = record["subcommand"].get<std::string>();
  if (p.contains("label") && p["label"].is_string()) row.spec_label = p["label"].get<std::string>();
  if (p.contains("labels") && p["labels"].is_array() && !p["labels"].empty())
    row.spec_label = p["labels"][0].get<std::string>();
  auto ci = [&](const std::string& key) {
    row.ci_low = number(p, key + ".0");
    row.ci_high = number(p, key + ".1");
    row.has_ci = true;
  };
  auto ci_array = [&](const json& a) {
    if (!a.is_array() || a.size() != 2) mismatch("CI is not a pair");
    row.ci_low = number(a, "0");
    row.ci_high = number(a, "1");
    row.has_ci = true;
  };
  const std::string& c = row.subcommand;
  if (c == "validate-spec") {
    row.statistic = "diagnostics";
    row.value = static_cast<double>(p["diagnostics"].size());
    row.pass_flags = flags({{"valid", flag(p, "valid")}});
  } else if (c == "walk") {
    row.statistic = "snapshots";
    row.value = static_cast<double>(p["snapshots"].size());
  } else if (c == "lyapunov") {
    row.statistic = "lambda_1";
    row.value = number(p, "mean.0");
    const double se = number(p, "se.0");
    row.ci_low = row.value - 1.96 * se;
    row.ci_high = row.value + 1.96 * se;
    row.has_ci = true;
    row.pass_flags = flags({{"estimators_agree", flag(p, "estimators_agree")},
                            {"ordering_ok", flag(p, "ordering_ok")},
                            {"sum_ok", flag(p, "sum_ok")}});
  } else if (c == "gap") {
    row.statistic = "gap";
    row.value = number(p, "gap");
    ci_array(p["ci"]);
    row.pass_flags = flags({{"gap_positive", flag(p, "gap_positive")}});
  } else if (c == "converge" || c == "kak-converge") {
    row.statistic = "slope";
    row.value = number(p, "fit.slope");
    ci_array(p["fit"]["slope_ci"]);
    row.pass_flags = flags({{"slope_negative", row.value < 0.0}});
  } else if (c == "u-diverge") {
    row.statistic = "window_mean";
    row.value = number(p, "window_mean");
    row.pass_flags = flags({{"floor_exceeded", flag(p, "floor_exceeded")},
                            {"no_decay", flag(p, "no_decay")}});
  } else if (c == "independence") {
    row.statistic = "rho_hat";
    row.value = number(p, "fit.rho_hat");
    row.pass_flags = flags({{"decays", flag(p, "decays")}});
  } else if (c == "dimension") {
    row.statistic = "alpha";
    row.value = number(p, "fit.alpha");
    ci("fit.alpha_ci");
    row.pass_flags = flags({{"alpha_positive", flag(p, "fit.alpha_positive")},
                            {"correlation_positive", flag(p, "correlation.positive")}});
  } else if (c == "certify") {
    row.statistic = "epsilon";
    row.value = number(p, "certificate.epsilon");
    row.pass_flags = flags({{"certified", flag(p, "certificate.passed")}});
  } else if (c == "word-oracle") {
    row.statistic = "relations";
    row.value = number(p, "relations");
    row.pass_flags = flags({{"no_relation", row.value == 0.0}});
  } else if (c == "tits") {
    row.statistic = "certified_fraction";
    row.value = number(p, "certified_fraction");
    const json* slope = lookup(p, "fit.slope");
    row.pass_flags = flags({{"fraction_ge_0.9", row.value >= 0.9},
                            {"failure_slope_negative", slope && number(p, "fit.slope") < 0.0},
                            {"sound", number(p, "spot_check_relations") == 0.0}});
  }
  return row;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out = "file,subcommand,spec_label,statistic,value,ci_low,ci_high,pass_flags\n";
  for (const auto& r : rows) {
    out += csv_cell(r.file) + ',' + csv_cell(r.subcommand) + ',' + csv_cell(r.spec_label) + ',' +
           r.statistic + ',' + format_real(r.value) + ',' +
           (r.has_ci ? format_real(r.ci_low) : "") + ',' +
           (r.has_ci ? format_real(r.ci_high) : "") + ',' + csv_cell(r.pass_flags) + '\n';
  }
  return out;
}

std::string report_text(const std::vector<ReportRow>& rows) {
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-14s %-12s %-20s %14s  %-29s %s\n", "subcommand", "spec",
                "statistic", "value", "ci", "flags");
  out += buf;
  for (const auto& r : rows) {
    std::string ci;
    if (r.has_ci) {
      char c[64];
      std::snprintf(c, sizeof c, "[%.6g, %.6g]", r.ci_low, r.ci_high);
      ci = c;
    }
    std::snprintf(buf, sizeof buf, "%-14s %-12s %-20s %14.6g  %-29s %s\n", r.subcommand.c_str(),
                  r.spec_label.c_str(), r.statistic.c_str(), r.value, ci.c_str(),
                  r.pass_flags.c_str());
    out += buf;
  }
  return out;
}

}  // namespace furstenberg::cli
