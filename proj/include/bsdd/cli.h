#pragma once

#include <optional>
#include <ostream>
#include <string>

namespace bsdd::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitNotCertified = 1,
  kExitInputError = 2,
  kExitNumericalFailure = 3,
};

struct Options {
  std::string input;
  std::string certificate;
  /// Inline matrix literal for `hinf`.
  std::string matrix;
  std::string strategy;
  std::optional<double> epsilon;
  std::optional<double> hinf_tol;
  std::optional<double> margin;
  std::string out;
  bool quiet = false;
};

int cmd_certify(const Options& options, std::ostream& out, std::ostream& err);
int cmd_compare(const Options& options, std::ostream& out, std::ostream& err);
int cmd_hinf(const Options& options, std::ostream& out, std::ostream& err);
int cmd_verify(const Options& options, std::ostream& out, std::ostream& err);
int cmd_report(const Options& options, std::ostream& out, std::ostream& err);

}  // namespace bsdd::cli
