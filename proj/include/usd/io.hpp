#pragma once

// Ensemble file ingestion and report serialization for the CLI. The
// file format is a small JSON document: a dimension, a list of states
// whose amplitudes are [re, im] pairs, priors, and optional labels.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "usd/analytic.hpp"
#include "usd/oracle.hpp"

namespace usd {

// Parse failures carry the offending location: "line L, column C" for
// malformed JSON, a field path like "states[2][1]" for semantic errors.
struct ParseError : Error {
  ParseError(const std::string& location, const std::string& message)
      : Error(location + ": " + message), location(location) {}
  std::string location;
};

struct IoError : Error {
  using Error::Error;
};

struct EnsembleFile {
  int dimension = 0;
  std::vector<CVector> states;
  std::vector<double> priors;
  std::vector<std::string> labels;  // optional, may be empty

  Ensemble to_ensemble() const { return make_ensemble(dimension, states, priors); }
};

EnsembleFile parse_ensemble_json(const std::string& text);
EnsembleFile load_ensemble_file(const std::string& path);

// FNV-1a hash of the canonical JSON text, echoed in reports so a result
// can be tied back to its exact input.
std::string input_digest(const EnsembleFile& file);

inline constexpr int kReportSchemaVersion = 1;

struct SolutionReport {
  int schema_version = kReportSchemaVersion;
  std::string input_digest;
  std::string method;
  ProbabilityVector p;
  double q_fail = 0.0;
  double p_success = 0.0;
  double min_eigenvalue_pi0 = 0.0;
  std::vector<CVector> reciprocal_states;
  bool kkt_ok = false;
  double elapsed_ms = 0.0;
};

SolutionReport build_report(const EnsembleFile& file, const Ensemble& ensemble,
                            const PovmSolution& solution, bool kkt_ok, double elapsed_ms);

std::string report_to_json(const SolutionReport& report);
SolutionReport report_from_json(const std::string& text);

// Aligned human-readable rendering of the same report.
void print_report_table(std::ostream& os, const SolutionReport& report);

// "p1,p2[,p3]" rows followed by a comment block with the polytope
// vertices.
void write_region_csv(std::ostream& os, const std::vector<ProbabilityVector>& samples,
                      const std::vector<FeasibleVertex>& vertices);

std::string simulation_to_json(const SimulationReport& report, double analytic_q);
void print_simulation_table(std::ostream& os, const SimulationReport& report,
                            double analytic_q);

}  // namespace usd
