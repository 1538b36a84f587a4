#include "model_io.hpp"

#include <fstream>
#include <sstream>

#include "error.hpp"
#include "json.hpp"

namespace phaseage {
namespace {

nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::io, "failed to parse " + path + ": " + e.what());
  }
}

Vec as_vector(const nlohmann::json& j, const std::string& what) {
  require(j.is_array(), ErrorCode::io, what + " must be an array of numbers");
  Vec v;
  v.reserve(j.size());
  for (const auto& e : j) {
    require(e.is_number(), ErrorCode::io, what + " must contain numbers only");
    v.push_back(e.get<double>());
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  // RFC 4180 field splitting with quoted-field support.
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c == '\r' && i + 1 == line.size()) {
      // tolerate CRLF line endings
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_number(const std::string& s, const std::string& path) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    require(pos == s.size(), ErrorCode::io, "malformed number '" + s + "' in " + path);
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorCode::io, "malformed number '" + s + "' in " + path);
  }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::string& expected_header) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::io, path + " is empty");
  std::vector<std::string> header = split_csv_line(line);
  std::vector<std::string> expected = split_csv_line(expected_header);
  require(header == expected, ErrorCode::io,
          path + " must start with header '" + expected_header + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = split_csv_line(line);
    require(fields.size() == expected.size(), ErrorCode::io,
            path + ": expected " + std::to_string(expected.size()) + " fields per row");
    rows.push_back(std::move(fields));
  }
  require(!rows.empty(), ErrorCode::io, path + " has no data rows");
  return rows;
}

}  // namespace

LoadedModel load_model_json(const std::string& path) {
  nlohmann::json j = parse_json_file(path);
  require(j.is_object(), ErrorCode::io, path + " must contain a JSON object");
  LoadedModel out;
  if (j.contains("lambdas")) {
    CoxianParameters p;
    p.lambdas = as_vector(j.at("lambdas"), "lambdas");
    require(j.contains("continue_probs"), ErrorCode::io,
            path + ": Coxian shorthand needs both 'lambdas' and 'continue_probs'");
    p.continue_probs = as_vector(j.at("continue_probs"), "continue_probs");
    out.ph = coxian(p);
    out.coxian_params = std::move(p);
    return out;
  }
  require(j.contains("alpha") && j.contains("Q"), ErrorCode::io,
          path + ": expected keys 'alpha' and 'Q' (or Coxian shorthand 'lambdas'/'continue_probs')");
  Vec alpha = as_vector(j.at("alpha"), "alpha");
  const auto& jq = j.at("Q");
  require(jq.is_array() && jq.size() == alpha.size(), ErrorCode::io,
          path + ": Q must be a square array matching alpha's length");
  Matrix q(alpha.size(), alpha.size());
  for (size_t r = 0; r < jq.size(); ++r) {
    Vec row = as_vector(jq.at(r), "Q row");
    require(row.size() == alpha.size(), ErrorCode::io, path + ": Q must be square");
    for (size_t c = 0; c < row.size(); ++c) q(r, c) = row[c];
  }
  out.ph = validate(alpha, q);
  return out;
}

MortalityTable load_mortality_csv(const std::string& path) {
  MortalityTable table;
  for (const auto& row : read_csv(path, "age_class_start,rate")) {
    table.class_starts.push_back(parse_number(row[0], path));
    table.rates.push_back(parse_number(row[1], path));
  }
  validate(table);
  return table;
}

PhaseFrequencies load_phase_frequencies_csv(const std::string& path) {
  PhaseFrequencies fp;
  int expect = 1;
  for (const auto& row : read_csv(path, "phase,frequency")) {
    double phase = parse_number(row[0], path);
    require(phase == static_cast<double>(expect), ErrorCode::io,
            path + ": phases must be listed in order 1..m");
    fp.freqs.push_back(parse_number(row[1], path));
    ++expect;
  }
  return fp;
}

}  // namespace phaseage
