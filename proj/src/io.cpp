#include "usd/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace usd {

using nlohmann::json;

namespace {

// Byte offset -> "line L, column C" for syntax error reporting.
std::string offset_location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double require_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where, "expected a number");
  return j.get<double>();
}

cplx parse_amplitude(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2)
    throw ParseError(where, "expected an amplitude as a [re, im] pair");
  return {require_number(j[0], where + "[0]"), require_number(j[1], where + "[1]")};
}

json report_json(const SolutionReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["input_digest"] = r.input_digest;
  j["method"] = r.method;
  j["p"] = r.p;
  j["q_fail"] = r.q_fail;
  j["p_success"] = r.p_success;
  j["min_eigenvalue_pi0"] = r.min_eigenvalue_pi0;
  j["kkt_ok"] = r.kkt_ok;
  j["elapsed_ms"] = r.elapsed_ms;
  json duals = json::array();
  for (const auto& v : r.reciprocal_states) {
    json row = json::array();
    for (const cplx& z : v) row.push_back({z.real(), z.imag()});
    duals.push_back(row);
  }
  j["reciprocal_states"] = duals;
  return j;
}

}  // namespace

EnsembleFile parse_ensemble_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(offset_location(text, e.byte > 0 ? e.byte - 1 : 0), e.what());
  }
  if (!j.is_object()) throw ParseError("$", "expected a JSON object");
  if (!j.contains("dimension") || !j["dimension"].is_number_integer())
    throw ParseError("dimension", "required integer field");
  if (!j.contains("states") || !j["states"].is_array())
    throw ParseError("states", "required array field");
  if (!j.contains("priors") || !j["priors"].is_array())
    throw ParseError("priors", "required array field");

  EnsembleFile file;
  file.dimension = j["dimension"].get<int>();
  for (std::size_t i = 0; i < j["states"].size(); ++i) {
    const json& st = j["states"][i];
    const std::string where = "states[" + std::to_string(i) + "]";
    if (!st.is_array()) throw ParseError(where, "expected an array of amplitudes");
    CVector v;
    for (std::size_t k = 0; k < st.size(); ++k)
      v.push_back(parse_amplitude(st[k], where + "[" + std::to_string(k) + "]"));
    file.states.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < j["priors"].size(); ++i)
    file.priors.push_back(require_number(j["priors"][i], "priors[" + std::to_string(i) + "]"));
  if (j.contains("labels")) {
    if (!j["labels"].is_array()) throw ParseError("labels", "expected an array of strings");
    for (std::size_t i = 0; i < j["labels"].size(); ++i) {
      const json& l = j["labels"][i];
      if (!l.is_string())
        throw ParseError("labels[" + std::to_string(i) + "]", "expected a string");
      file.labels.push_back(l.get<std::string>());
    }
  }
  return file;
}

EnsembleFile load_ensemble_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return parse_ensemble_json(buf.str());
}

std::string input_digest(const EnsembleFile& file) {
  json j;
  j["dimension"] = file.dimension;
  json states = json::array();
  for (const auto& v : file.states) {
    json row = json::array();
    for (const cplx& z : v) row.push_back({z.real(), z.imag()});
    states.push_back(row);
  }
  j["states"] = states;
  j["priors"] = file.priors;
  if (!file.labels.empty()) j["labels"] = file.labels;
  const std::string canon = j.dump();
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream hex;
  hex << std::hex << std::setfill('0') << std::setw(16) << h;
  return hex.str();
}

SolutionReport build_report(const EnsembleFile& file, const Ensemble& ensemble,
                            const PovmSolution& solution, bool kkt_ok, double elapsed_ms) {
  SolutionReport r;
  r.input_digest = input_digest(file);
  r.method = method_name(solution.method);
  r.p = solution.p;
  r.q_fail = solution.q_fail;
  r.p_success = solution.p_success;
  r.min_eigenvalue_pi0 = solution.certificate.min_eigenvalue_pi0;
  r.reciprocal_states = reciprocal_states(ensemble).reciprocal_states;
  r.kkt_ok = kkt_ok;
  r.elapsed_ms = elapsed_ms;
  return r;
}

std::string report_to_json(const SolutionReport& report) {
  return report_json(report).dump(2);
}

SolutionReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(offset_location(text, e.byte > 0 ? e.byte - 1 : 0), e.what());
  }
  SolutionReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kReportSchemaVersion)
    throw ParseError("schema_version", "unsupported report schema");
  r.input_digest = j.at("input_digest").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.p = j.at("p").get<ProbabilityVector>();
  r.q_fail = j.at("q_fail").get<double>();
  r.p_success = j.at("p_success").get<double>();
  r.min_eigenvalue_pi0 = j.at("min_eigenvalue_pi0").get<double>();
  r.kkt_ok = j.at("kkt_ok").get<bool>();
  r.elapsed_ms = j.at("elapsed_ms").get<double>();
  for (const auto& row : j.at("reciprocal_states")) {
    CVector v;
    for (const auto& z : row) v.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
    r.reciprocal_states.push_back(std::move(v));
  }
  return r;
}

void print_report_table(std::ostream& os, const SolutionReport& report) {
  os << std::left << std::setw(22) << "method" << report.method << '\n';
  os << std::left << std::setw(22) << "input digest" << report.input_digest << '\n';
  os << std::scientific << std::setprecision(12);
  for (std::size_t i = 0; i < report.p.size(); ++i)
    os << std::left << std::setw(22) << ("p[" + std::to_string(i + 1) + "]") << report.p[i]
       << '\n';
  os << std::left << std::setw(22) << "Q (inconclusive)" << report.q_fail << '\n';
  os << std::left << std::setw(22) << "P (success)" << report.p_success << '\n';
  os << std::left << std::setw(22) << "lambda_min(Pi_0)" << report.min_eigenvalue_pi0 << '\n';
  os << std::left << std::setw(22) << "KKT certificate"
     << (report.kkt_ok ? "pass" : "not verified") << '\n';
  os << std::left << std::setw(22) << "elapsed (ms)" << std::fixed << std::setprecision(3)
     << report.elapsed_ms << '\n';
}

void write_region_csv(std::ostream& os, const std::vector<ProbabilityVector>& samples,
                      const std::vector<FeasibleVertex>& vertices) {
  if (samples.empty()) return;
  const std::size_t n = samples.front().size();
  os << "p1,p2";
  if (n == 3) os << ",p3";
  os << '\n';
  os << std::setprecision(17);
  for (const auto& row : samples) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  for (const auto& v : vertices) {
    os << "# vertex {";
    for (std::size_t i = 0; i < v.support.size(); ++i)
      os << (i ? "," : "") << (v.support[i] + 1);
    os << "}:";
    for (double pi : v.p) os << ' ' << pi;
    os << '\n';
  }
}

std::string simulation_to_json(const SimulationReport& report, double analytic_q) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["trials"] = report.trials;
  j["seed"] = report.seed;
  j["counts"] = report.counts;
  j["empirical_error_rate"] = report.empirical_error_rate;
  j["empirical_failure_rate"] = report.empirical_failure_rate;
  j["analytic_q"] = analytic_q;
  const double sigma =
      std::sqrt(std::max(analytic_q * (1.0 - analytic_q), 0.0) / report.trials);
  j["z_score"] =
      sigma > 0.0 ? (report.empirical_failure_rate - analytic_q) / sigma : 0.0;
  return j.dump(2);
}

void print_simulation_table(std::ostream& os, const SimulationReport& report,
                            double analytic_q) {
  const std::size_t n = report.counts.empty() ? 0 : report.counts.front().size();
  os << "outcome";
  for (std::size_t i = 0; i < n; ++i) os << std::setw(12) << ("state " + std::to_string(i + 1));
  os << '\n';
  for (std::size_t k = 0; k < report.counts.size(); ++k) {
    os << std::left << std::setw(7) << (k == 0 ? std::string("fail") : std::to_string(k))
       << std::right;
    for (std::size_t i = 0; i < n; ++i) os << std::setw(12) << report.counts[k][i];
    os << '\n';
  }
  const double sigma =
      std::sqrt(std::max(analytic_q * (1.0 - analytic_q), 0.0) / report.trials);
  os << std::setprecision(12);
  os << "trials             " << report.trials << '\n';
  os << "seed               " << report.seed << '\n';
  os << "empirical error    " << report.empirical_error_rate << '\n';
  os << "empirical failure  " << report.empirical_failure_rate << '\n';
  os << "analytic Q         " << analytic_q << '\n';
  os << "z-score            "
     << (sigma > 0.0 ? (report.empirical_failure_rate - analytic_q) / sigma : 0.0) << '\n';
}

}  // namespace usd
