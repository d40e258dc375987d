#pragma once

#include <string>
#include <vector>

#include "furstenberg/boundary.hpp"
#include "furstenberg/cli.hpp"
#include "furstenberg/decay_fit.hpp"
#include "furstenberg/dimension.hpp"
#include "furstenberg/pingpong.hpp"
#include "furstenberg/walk.hpp"

namespace furstenberg::cli {

struct CsvTable {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string render() const;
};

// shortest round-trip formatting; "nan", "inf", "-inf" for non-finite values
std::string format_real(double x);

json to_json(const DecayFit& f);
json to_json(const LyapunovEstimate& e);
json to_json(const GapEstimate& g);
json to_json(const SeriesResult& s);
json to_json(const UNonconvergence& u);
json to_json(const IndependenceResult& r);
json to_json(const DimensionFit& d);
json to_json(const CorrelationDimension& c);
json to_json(const PingPongCertificate& c);
json to_json(const FreenessResult& f);
json to_json(const WalkState& s);
json to_json(const SquareMatrix& m);
json to_json(std::span<const double> v);

// (n, replicate, statistic, value) rows of a replicated series
CsvTable replicate_table(const std::string& name, std::span<const std::size_t> grid,
                         const std::vector<Vector>& values, const std::string& statistic);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace furstenberg::cli
