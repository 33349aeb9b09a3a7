#include "bsdd/cli.h"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "bsdd/certificate.h"
#include "bsdd/comparison.h"
#include "bsdd/error.h"
#include "bsdd/problem_io.h"

namespace bsdd::cli {

namespace {

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError:
    case ErrorCode::kSizeMismatch:
    case ErrorCode::kNonSquare:
    case ErrorCode::kNonFinite:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kIndexOutOfRange:
      return true;
    default:
      return false;
  }
}

int exit_for(const Error& e) {
  return is_input_error(e.code()) ? kExitInputError : kExitNumericalFailure;
}

void write_output(const std::string& path, const std::string& text,
                  std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kParseError, "cannot write " + path);
  f << text;
}

CertifyOptions certify_options(const ProblemFile& problem,
                               const Options& options) {
  CertifyOptions c;
  if (problem.options.strategy) c.strategy = *problem.options.strategy;
  if (!options.strategy.empty()) {
    auto s = parse_strategy(options.strategy);
    if (!s || *s == Strategy::kCustom) {
      throw Error(ErrorCode::kParseError,
                  "unknown strategy '" + options.strategy + "'");
    }
    c.strategy = *s;
  }
  c.epsilon = options.epsilon ? options.epsilon : problem.options.epsilon;
  if (c.epsilon && !(*c.epsilon > 0.0)) {
    throw Error(ErrorCode::kParseError, "epsilon must be positive");
  }
  if (auto tol = options.hinf_tol ? options.hinf_tol : problem.options.hinf_tol) {
    if (!(*tol > 0.0)) throw Error(ErrorCode::kParseError, "hinf-tol must be positive");
    c.hinf.tol = *tol;
  }
  if (auto m = options.margin ? options.margin : problem.options.margin) {
    if (!(*m >= 0.0)) throw Error(ErrorCode::kParseError, "margin must be >= 0");
    c.margin = *m;
  }
  return c;
}

int report_exit(const TestReport& report) {
  if (report.certified()) return kExitOk;
  for (const RouteResult& r : report.routes) {
    if (r.outcome == Outcome::kFail) return kExitNotCertified;
  }
  return report.any_error() ? kExitNumericalFailure : kExitNotCertified;
}

std::string format_sig(double x, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

}  // namespace

int cmd_certify(const Options& options, std::ostream& out, std::ostream& err) {
  ProblemFile problem;
  CertifyOptions copts;
  try {
    problem = load_problem(options.input);
    copts = certify_options(problem, options);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (!options.out.empty()) {
      CertificateFile cf;
      cf.status = CertificateStatus::kError;
      cf.error = e.what();
      try {
        write_output(options.out, serialize_certificate(cf), out);
      } catch (const Error&) {
      }
    }
    return kExitInputError;
  }

  const PartitionedMatrix p = problem.partitioned();
  CertificateFile cf;
  cf.partition = problem.partition;
  cf.input_digest = input_digest(problem.matrix, problem.partition);
  cf.strategy = std::string(to_string(copts.strategy));
  int code = kExitNotCertified;
  try {
    const TestReport report = certify(p, copts);
    code = report_exit(report);
    if (const Certificate* cert = report.certificate()) {
      cf.status = CertificateStatus::kCertified;
      cf.strategy = std::string(to_string(cert->strategy));
      cf.blocks = cert->blocks;
      cf.lyapunov_margin = cert->lyapunov_margin;
    } else {
      cf.status = code == kExitNumericalFailure ? CertificateStatus::kError
                                                : CertificateStatus::kNotCertified;
      std::string reasons;
      for (const RouteResult& r : report.routes) {
        if (!reasons.empty()) reasons += "; ";
        reasons += std::string(to_string(r.route)) + ": " + r.reason;
      }
      cf.error = reasons;
    }
  } catch (const Error& e) {
    cf.status = CertificateStatus::kError;
    cf.error = e.what();
    code = exit_for(e);
  }

  try {
    write_output(options.out, serialize_certificate(cf), out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  if (!options.quiet && !options.out.empty()) {
    out << to_string(cf.status) << " (" << cf.strategy << ")";
    if (cf.status == CertificateStatus::kCertified) {
      out << " lyapunov margin " << format_sig(cf.lyapunov_margin);
    }
    out << "\n";
  }
  return code;
}

int cmd_compare(const Options& options, std::ostream& out, std::ostream& err) {
  try {
    const ProblemFile problem = load_problem(options.input);
    const CertifyOptions copts = certify_options(problem, options);
    const ComparisonMatrix c = block_comparison(problem.partitioned(), copts.hinf);
    if (!options.out.empty()) {
      write_output(options.out, comparison_to_json(c).dump(2) + "\n", out);
    }
    if (options.quiet) return kExitOk;
    const Index n = c.order();
    out << "block comparison matrix (" << n << "x" << n << ")\n";
    out << std::fixed << std::setprecision(4);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        // Print -0.0000 as 0.0000.
        const double x = std::abs(c.matrix(i, j)) < 5e-5 ? 0.0 : c.matrix(i, j);
        out << std::setw(12) << x;
      }
      out << "\n";
    }
    out << std::defaultfloat;
    for (Index i = 0; i < n; ++i) {
      const DiagonalProvenance& d = c.diagonal[static_cast<std::size_t>(i)];
      out << "  (" << i + 1 << "," << i + 1 << ") ";
      if (d.block_hurwitz) {
        out << "-1 / ||(sI - A" << i + 1 << i + 1 << ")^-1||_inf, norm "
            << format_sig(d.hinf_norm) << " at w = "
            << format_sig(d.peak_frequency) << "\n";
      } else {
        out << "block not Hurwitz, entry extended to 0\n";
      }
    }
    out << (c.is_hurwitz() ? "Hurwitz\n" : "not Hurwitz\n");
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_for(e);
  }
}

int cmd_hinf(const Options& options, std::ostream& out, std::ostream& err) {
  try {
    Matrix a;
    HinfOptions hopts;
    if (!options.matrix.empty()) {
      a = parse_matrix(options.matrix);
    } else if (!options.input.empty()) {
      const ProblemFile problem = load_problem(options.input);
      a = problem.matrix;
      if (problem.options.hinf_tol) hopts.tol = *problem.options.hinf_tol;
    } else {
      throw Error(ErrorCode::kParseError, "hinf needs --input or --matrix");
    }
    if (options.hinf_tol) {
      if (!(*options.hinf_tol > 0.0)) {
        throw Error(ErrorCode::kParseError, "hinf-tol must be positive");
      }
      hopts.tol = *options.hinf_tol;
    }
    require_square(a, "matrix");
    const HinfResult h = hinf_norm_resolvent(a, hopts);
    nlohmann::json doc;
    if (h.is_infinite()) {
      doc["norm"] = "infinite";
    } else {
      doc["norm"] = h.norm;
    }
    doc["inverse_norm"] = h.inverse_norm;
    doc["peak_frequency"] = h.peak_frequency;
    doc["iterations"] = h.iterations;
    if (!options.out.empty()) write_output(options.out, doc.dump(2) + "\n", out);
    if (!options.quiet) {
      out << "norm " << (h.is_infinite() ? "infinite" : format_sig(h.norm))
          << "\ninverse " << format_sig(h.inverse_norm) << "\npeak frequency "
          << format_sig(h.peak_frequency) << "\niterations " << h.iterations
          << "\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_for(e);
  }
}

int cmd_verify(const Options& options, std::ostream& out, std::ostream& err) {
  ProblemFile problem;
  CertificateFile cf;
  double margin = 1e-9;
  try {
    problem = load_problem(options.input);
    cf = parse_certificate(read_text_file(options.certificate));
    margin = certify_options(problem, options).margin;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  if (cf.input_digest != input_digest(problem.matrix, problem.partition)) {
    err << "error: certificate digest does not match the input\n";
    return kExitInputError;
  }
  if (cf.partition != problem.partition) {
    err << "error: certificate partition does not match the input\n";
    return kExitInputError;
  }
  if (cf.status != CertificateStatus::kCertified) {
    if (!options.quiet) out << "certificate status is " << to_string(cf.status) << "\n";
    return kExitNotCertified;
  }
  try {
    const auto cert = assemble_and_verify(problem.partitioned(), cf.blocks, margin);
    if (!cert) {
      if (!options.quiet) out << "certificate does NOT verify\n";
      return kExitNotCertified;
    }
    if (!options.quiet) {
      out << "verified: lambda_max(PA + A^T P) = "
          << format_sig(-cert->lyapunov_margin) << ", lambda_min(P) = "
          << format_sig(cert->min_eigenvalue) << "\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_for(e);
  }
}

int cmd_report(const Options& options, std::ostream& out, std::ostream& err) {
  try {
    const ProblemFile problem = load_problem(options.input);
    CertifyOptions copts = certify_options(problem, options);
    if (options.strategy.empty()) copts.strategy = Strategy::kAuto;
    copts.run_all_routes = true;
    const TestReport report = certify(problem.partitioned(), copts);
    if (!options.out.empty()) {
      write_output(options.out, report_to_json(report).dump(2) + "\n", out);
    }
    if (!options.quiet) {
      out << std::left << std::setw(8) << "route" << std::setw(9) << "outcome"
          << std::setw(12) << "time [s]" << std::setw(14) << "margin"
          << "reason\n";
      for (const RouteResult& r : report.routes) {
        out << std::setw(8) << to_string(r.route) << std::setw(9)
            << to_string(r.outcome) << std::setw(12) << format_sig(r.seconds, 3)
            << std::setw(14)
            << (r.certificate ? format_sig(r.certificate->lyapunov_margin) : "-")
            << r.reason << "\n";
      }
      out << (report.certified() ? "certified" : "not certified (inconclusive)")
          << "\n";
    }
    return report_exit(report);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_for(e);
  }
}

}  // namespace bsdd::cli
