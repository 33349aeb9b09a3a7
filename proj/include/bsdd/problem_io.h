#pragma once

// Text formats for the command-line front end: problem files in, certificate
// files out. Both are JSON documents.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bsdd/certificate.h"
#include "bsdd/comparison.h"
#include "bsdd/partition.h"

namespace bsdd {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct ProblemOptions {
  std::optional<double> epsilon;
  std::optional<double> hinf_tol;
  std::optional<double> margin;
  std::optional<Strategy> strategy;
};

/// {"n": N, "partition": [k1, ...], "matrix": [[...], ...], "options": {...}}
struct ProblemFile {
  Matrix matrix;
  std::vector<Index> partition;
  ProblemOptions options;

  PartitionedMatrix partitioned() const;
};

/// Throws Error(kParseError) on malformed documents, kSizeMismatch when the
/// partition does not sum to n.
ProblemFile parse_problem(std::string_view text);
ProblemFile load_problem(const std::filesystem::path& path);

/// Parses a row-array matrix literal such as "[[-2, 0], [1, -3]]".
Matrix parse_matrix(std::string_view text);

/// SHA-256 (hex) of the canonical text of partition and matrix entries.
std::string input_digest(const Matrix& matrix, const std::vector<Index>& partition);

enum class CertificateStatus { kCertified, kNotCertified, kError };
std::string_view to_string(CertificateStatus status);

struct CertificateFile {
  CertificateStatus status = CertificateStatus::kNotCertified;
  std::string strategy;
  std::vector<Index> partition;
  std::vector<Matrix> blocks;
  double lyapunov_margin = 0.0;
  std::string tool_version{kToolVersion};
  std::string input_digest;
  std::string error;
};

std::string serialize_certificate(const CertificateFile& cert);
CertificateFile parse_certificate(std::string_view text);

nlohmann::json matrix_to_json(const Matrix& m);
nlohmann::json comparison_to_json(const ComparisonMatrix& c);
nlohmann::json report_to_json(const TestReport& report);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace bsdd
