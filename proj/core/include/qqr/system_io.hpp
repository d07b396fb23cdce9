#pragma once

// File formats shared by the command-line tools.
//
// System file: one JSON object {name, n, m, A, B, N, Q2, R2} plus optional
// {generator, seed, eps}. Matrices are arrays of column arrays; floats are
// written with 17 significant digits so a save/load round trip is exact.
//
// Coefficient file: canonical (symmetrized) value and feedback coefficients,
// solver reports and, optionally, per-stage timings.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "qqr/albrekht.hpp"
#include "qqr/simulate.hpp"

namespace qqr {

struct SystemFile {
  std::string name;
  QuadraticSystem system;
  std::string generator;  // "random", "burgers" or empty
  std::optional<std::uint64_t> seed;
  std::optional<double> eps;
};

std::string system_to_string(const SystemFile& file);
/// Throws ParseError naming the offending line or field.
SystemFile system_from_string(const std::string& text);
void save_system(const std::filesystem::path& path, const SystemFile& file);
SystemFile load_system(const std::filesystem::path& path);

struct CoefficientFile {
  Index n = 0;
  Index m = 0;
  int degree = 0;            // feedback degree
  std::string method;        // "recursive" or "full"
  std::string status = "ok"; // or "not computed: size", "failed: ..."
  std::string message;
  PolyValueFunction value;   // symmetrized
  PolyFeedbackLaw feedback;  // rows symmetrized
  double are_residual = 0.0;
  double are_seconds = 0.0;
  std::vector<DegreeReport> reports;
  /// Command and parameters that produced the file (run record).
  std::string command;
  std::vector<std::pair<std::string, std::string>> parameters;

  bool ok() const noexcept { return status == "ok"; }
};

/// Canonicalizes a solution for export.
CoefficientFile make_coefficient_file(const QqrSolution& solution, std::string method);

/// The run record (command, parameters, timings) is omitted when
/// include_run is false, which makes the output a pure function of the
/// system and solver settings.
std::string coefficients_to_string(const CoefficientFile& file, bool include_run = true);
CoefficientFile coefficients_from_string(const std::string& text);
void save_coefficients(const std::filesystem::path& path, const CoefficientFile& file,
                       bool include_run = true);
CoefficientFile load_coefficients(const std::filesystem::path& path);

std::string comparison_to_string(const ValueComparison& cmp, const Vector& x0, int degree);
void save_comparison(const std::filesystem::path& path, const ValueComparison& cmp,
                     const Vector& x0, int degree);

/// CSV with header t,x1..xn,u1..um,cost and 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace qqr
