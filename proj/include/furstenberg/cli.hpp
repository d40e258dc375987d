#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "furstenberg/measures.hpp"
#include "furstenberg/rational.hpp"

namespace furstenberg::cli {

using nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kRecordSchema = "furstenberg.result/1";

struct ExperimentConfig {
  std::string subcommand;
  std::vector<std::string> specs;
  std::optional<std::size_t> n;
  std::vector<std::size_t> grid;
  std::optional<std::size_t> replicas;
  std::optional<std::size_t> count;
  std::optional<std::size_t> samples;
  std::vector<double> eps_grid;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> pairs;
  std::optional<std::size_t> word_length;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string level = "auto";
  std::string side;
  std::string mode;
  std::optional<std::size_t> jobs;
  std::string g, h;
  std::optional<double> h_rotate_degrees;
  std::optional<double> epsilon;
  std::vector<std::string> inputs;  // report
};

// The parameters that determine the result (output directory and job count excluded).
json config_echo(const ExperimentConfig& config);
// SHA-1 of the canonical (key-sorted, compact) JSON, hashed as a git blob
std::string config_hash(const json& echo);

// "5,8,11" or "geom:c:ratio:count"
std::vector<std::size_t> parse_grid(const std::string& text);
std::vector<double> parse_real_list(const std::string& text);
// "[[4,0],[0,1/4]]"
RationalMatrix parse_matrix_literal(const std::string& text);

MeasureSpec load_spec(const std::string& path);
MeasureSpec spec_from_json(const json& doc);
json spec_to_json(const MeasureSpec& spec);

// Checks the envelope and the payload keys required for its subcommand.
// Throws cli.SchemaMismatch.
void validate_record(const json& record);

struct ReportRow {
  std::string file;
  std::string subcommand;
  std::string spec_label;
  std::string statistic;
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool has_ci = false;
  std::string pass_flags;  // "name=true;name=false"
};

ReportRow summarize(const json& record, const std::string& file);
std::string report_csv(const std::vector<ReportRow>& rows);
std::string report_text(const std::vector<ReportRow>& rows);

// Entry point: returns the process exit code (0 ok, 2 validation, 3 numerical).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace furstenberg::cli
