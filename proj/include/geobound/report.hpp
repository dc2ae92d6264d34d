#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geobound/bounds.hpp"
#include "geobound/egd.hpp"
#include "geobound/errors.hpp"
#include "geobound/lang.hpp"
#include "geobound/solve.hpp"
#include "geobound/symgeo.hpp"

namespace geobound {

enum class AnalysisMode { Residual, Geometric, Both };

std::string to_string(AnalysisMode m);
std::string to_string(Objective::Kind k);

struct AnalyzeOptions {
  std::string program_name;
  AnalysisMode mode = AnalysisMode::Both;
  std::size_t unroll = 30;
  std::size_t invariant_size = 1;
  Objective objective;
  std::size_t k_max = 2;
  std::size_t limit = 50;
  /// Lets the residual support box cap mass and moment upper bounds.
  bool support_refinement = true;
  bool strict_join = true;
  std::uint64_t seed = 0;
  PenaltyOptions penalty;
  std::size_t max_cells = 100'000'000;
  const Deadline* deadline = nullptr;
};

struct MomentBound {
  std::size_t k;
  Interval bound;
};

struct VariableReport {
  std::string name;
  std::vector<Interval> masses;             // value n at index n
  std::vector<Interval> normalized_masses;  // empty when nothing survives conditioning
  std::vector<MomentBound> moments;         // of the normalized distribution
  /// Upper bound on the tail decay rate; 0 means finitely supported.
  std::optional<Rational> tail_decay;
};

struct SolverInfo {
  std::string status = "not_run";
  std::size_t iterations = 0;
  std::optional<double> seconds;
};

struct BoundReport {
  std::string program;
  AnalysisMode mode = AnalysisMode::Both;
  std::size_t unroll = 0;
  std::size_t invariant_size = 1;
  std::string objective;
  std::vector<VariableReport> variables;
  Interval total_mass;
  Interval normalization;
  SolverInfo solver;
  std::vector<std::string> warnings;
};

/// Geometric-stage output kept for callers that want the certificate.
struct GeometricResult {
  SolveReport nonlinear;
  SolveReport linear;
  std::optional<Egd> bound;
};

BoundReport analyze(const CoreProgram& p, const AnalyzeOptions& opts, GeometricResult* geometric = nullptr);

enum class Format { Text, Json, Csv };

/// `csv_var` picks the variable for CSV output.
std::string render(const BoundReport& r, Format format, std::size_t csv_var = 0);
/// Inverse of the JSON rendering (values come back as doubles).
BoundReport report_from_json(const std::string& text);

}  // namespace geobound
