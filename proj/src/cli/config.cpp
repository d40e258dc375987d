#include <openssl/evp.h>

#include <cctype>
#include <cstdio>
#include <sstream>

#include "furstenberg/cli.hpp"
#include "furstenberg/errors.hpp"
#include "furstenberg/walk.hpp"

namespace furstenberg::cli {

namespace {

[[noreturn]] void parse_fail(const std::string& detail) {
  throw Error("cli", ErrorCode::ParseError, detail);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string strip(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

std::size_t to_size(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    parse_fail("not an integer: '" + s + "'");
  }
  if (used != s.size() || s.front() == '-') parse_fail("not a non-negative integer: '" + s + "'");
  return static_cast<std::size_t>(v);
}

double to_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    parse_fail("not a number: '" + s + "'");
  }
  if (used != s.size()) parse_fail("not a number: '" + s + "'");
  return v;
}

}  // namespace

json config_echo(const ExperimentConfig& c) {
  json j = json::object();
  j["subcommand"] = c.subcommand;
  if (!c.specs.empty()) j["specs"] = c.specs;
  if (c.n) j["n"] = *c.n;
  if (!c.grid.empty()) j["grid"] = c.grid;
  if (c.replicas) j["replicas"] = *c.replicas;
  if (c.count) j["count"] = *c.count;
  if (c.samples) j["samples"] = *c.samples;
  if (!c.eps_grid.empty()) j["eps_grid"] = c.eps_grid;
  if (c.budget) j["budget"] = *c.budget;
  if (c.pairs) j["pairs"] = *c.pairs;
  if (c.word_length) j["L"] = *c.word_length;
  if (c.seed) j["seed"] = *c.seed;
  if (!c.level.empty()) j["level"] = c.level;
  if (!c.side.empty()) j["side"] = c.side;
  if (!c.mode.empty()) j["mode"] = c.mode;
  if (!c.g.empty()) j["g"] = c.g;
  if (!c.h.empty()) j["h"] = c.h;
  if (c.h_rotate_degrees) j["h_rotate"] = *c.h_rotate_degrees;
  if (c.epsilon) j["epsilon"] = *c.epsilon;
  if (!c.inputs.empty()) j["inputs"] = c.inputs;
  return j;
}

std::string config_hash(const json& echo) {
  // nlohmann::json objects keep keys sorted, so dump() is canonical
  const std::string body = echo.dump();
  const std::string blob = "blob " + std::to_string(body.size()) + '\0' + body;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw Error("cli", ErrorCode::IoError, "SHA-1 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::vector<std::size_t> parse_grid(const std::string& raw) {
  const std::string text = strip(raw);
  if (text.empty()) parse_fail("empty grid");
  if (text.rfind("geom:", 0) == 0) {
    const auto parts = split(text.substr(5), ':');
    if (parts.size() != 3) parse_fail("geometric grid must read geom:c:ratio:count");
    return geometric_grid(to_real(parts[0]), to_real(parts[1]), to_size(parts[2]));
  }
  std::vector<std::size_t> grid;
  for (const auto& p : split(text, ',')) grid.push_back(to_size(p));
  return grid;
}

std::vector<double> parse_real_list(const std::string& raw) {
  const std::string text = strip(raw);
  if (text.empty()) parse_fail("empty list");
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(to_real(p));
  return out;
}

RationalMatrix parse_matrix_literal(const std::string& raw) {
  const std::string text = strip(raw);
  if (text.size() < 4 || text.rfind("[[", 0) != 0 || text.substr(text.size() - 2) != "]]")
    parse_fail("matrix must look like [[a,b],[c,d]]: '" + raw + "'");
  const std::string inner = text.substr(2, text.size() - 4);
  std::vector<std::string> entries;
  std::size_t rows = 0, cols = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = inner.find("],[", start);
    const std::string row = inner.substr(start, end == std::string::npos ? end : end - start);
    const auto cells = split(row, ',');
    if (rows == 0) cols = cells.size();
    if (cells.size() != cols) parse_fail("ragged matrix literal: '" + raw + "'");
    entries.insert(entries.end(), cells.begin(), cells.end());
    ++rows;
    if (end == std::string::npos) break;
    start = end + 3;
  }
  if (rows != cols) parse_fail("matrix literal is not square: '" + raw + "'");
  try {
    return RationalMatrix::parse(rows, entries);
  } catch (const Error& e) {
    parse_fail(e.detail());
  }
}

}  // namespace furstenberg::cli
