#include "bsdd/problem_io.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "bsdd/error.h"

namespace bsdd {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
  throw Error(ErrorCode::kParseError, what);
}

Matrix matrix_from_json(const json& rows, const char* what) {
  if (!rows.is_array() || rows.empty()) {
    parse_fail(std::string(what) + " must be a nonempty array of rows");
  }
  const auto n_rows = static_cast<Index>(rows.size());
  if (!rows[0].is_array()) parse_fail(std::string(what) + " rows must be arrays");
  const auto n_cols = static_cast<Index>(rows[0].size());
  Matrix m(n_rows, n_cols);
  for (Index i = 0; i < n_rows; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n_cols) {
      parse_fail(std::string(what) + " row " + std::to_string(i + 1) +
                 " has the wrong length");
    }
    for (Index j = 0; j < n_cols; ++j) {
      const json& x = row[static_cast<std::size_t>(j)];
      if (!x.is_number()) {
        parse_fail(std::string(what) + " entry (" + std::to_string(i + 1) +
                   "," + std::to_string(j + 1) + ") is not a number");
      }
      m(i, j) = x.get<double>();
    }
  }
  require_finite(m, what);
  return m;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    parse_fail(e.what());
  }
}

std::optional<double> optional_number(const json& obj, const char* key) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_number()) parse_fail(std::string(key) + " must be a number");
  const double v = obj[key].get<double>();
  if (!(v > 0.0) && std::string_view(key) != "margin") {
    parse_fail(std::string(key) + " must be positive");
  }
  if (!(v >= 0.0)) parse_fail(std::string(key) + " must be nonnegative");
  return v;
}

}  // namespace

PartitionedMatrix ProblemFile::partitioned() const {
  return PartitionedMatrix(matrix, BlockPartition(partition));
}

Matrix parse_matrix(std::string_view text) {
  return matrix_from_json(parse_json(text), "matrix");
}

ProblemFile parse_problem(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) parse_fail("problem must be a JSON object");
  if (!doc.contains("matrix")) parse_fail("missing key 'matrix'");
  if (!doc.contains("partition")) parse_fail("missing key 'partition'");

  ProblemFile out;
  out.matrix = matrix_from_json(doc["matrix"], "matrix");
  require_square(out.matrix, "matrix");
  if (doc.contains("n")) {
    if (!doc["n"].is_number_integer() ||
        doc["n"].get<Index>() != out.matrix.rows()) {
      parse_fail("'n' does not match the matrix order");
    }
  }
  const json& part = doc["partition"];
  if (!part.is_array() || part.empty()) {
    parse_fail("'partition' must be a nonempty array");
  }
  for (const json& k : part) {
    if (!k.is_number_integer() || k.get<Index>() < 1) {
      parse_fail("partition sizes must be positive integers");
    }
    out.partition.push_back(k.get<Index>());
  }
  // Throws kSizeMismatch when the sizes do not add up.
  (void)out.partitioned();

  if (doc.contains("options")) {
    const json& opt = doc["options"];
    if (!opt.is_object()) parse_fail("'options' must be an object");
    out.options.epsilon = optional_number(opt, "epsilon");
    out.options.hinf_tol = optional_number(opt, "hinf_tol");
    out.options.margin = optional_number(opt, "margin");
    if (opt.contains("strategy")) {
      if (!opt["strategy"].is_string()) parse_fail("strategy must be a string");
      out.options.strategy = parse_strategy(opt["strategy"].get<std::string>());
      if (!out.options.strategy || *out.options.strategy == Strategy::kCustom) {
        parse_fail("unknown strategy '" + opt["strategy"].get<std::string>() +
                   "'");
      }
    }
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProblemFile load_problem(const std::filesystem::path& path) {
  return parse_problem(read_text_file(path));
}

std::string input_digest(const Matrix& matrix,
                         const std::vector<Index>& partition) {
  std::ostringstream canon;
  canon << std::setprecision(17);
  canon << "partition";
  for (Index k : partition) canon << ' ' << k;
  canon << "\nmatrix " << matrix.rows() << ' ' << matrix.cols() << '\n';
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index j = 0; j < matrix.cols(); ++j) {
      // +0.0 and -0.0 canonicalize to the same text.
      const double x = matrix(i, j) == 0.0 ? 0.0 : matrix(i, j);
      canon << (j ? " " : "") << x;
    }
    canon << '\n';
  }
  const std::string text = canon.str();

  unsigned char hash[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), hash, &len, EVP_sha256(), nullptr) !=
      1) {
    throw Error(ErrorCode::kNumericalFailure, "SHA-256 digest failed");
  }
  std::ostringstream hex;
  hex << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) hex << std::setw(2) << int(hash[i]);
  return "sha256:" + hex.str();
}

std::string_view to_string(CertificateStatus status) {
  switch (status) {
    case CertificateStatus::kCertified: return "certified";
    case CertificateStatus::kNotCertified: return "not-certified";
    case CertificateStatus::kError: return "error";
  }
  return "unknown";
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string serialize_certificate(const CertificateFile& cert) {
  json doc;
  doc["status"] = to_string(cert.status);
  doc["strategy"] = cert.strategy;
  doc["partition"] = cert.partition;
  json blocks = json::array();
  for (const Matrix& b : cert.blocks) blocks.push_back(matrix_to_json(b));
  doc["blocks"] = std::move(blocks);
  doc["lyapunov_margin"] = cert.lyapunov_margin;
  doc["tool_version"] = cert.tool_version;
  doc["input_digest"] = cert.input_digest;
  if (!cert.error.empty()) doc["error"] = cert.error;
  return doc.dump(2) + "\n";
}

CertificateFile parse_certificate(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) parse_fail("certificate must be a JSON object");
  CertificateFile out;
  try {
    const std::string status = doc.at("status").get<std::string>();
    if (status == "certified") {
      out.status = CertificateStatus::kCertified;
    } else if (status == "not-certified") {
      out.status = CertificateStatus::kNotCertified;
    } else if (status == "error") {
      out.status = CertificateStatus::kError;
    } else {
      parse_fail("unknown status '" + status + "'");
    }
    out.strategy = doc.value("strategy", "");
    out.partition = doc.at("partition").get<std::vector<Index>>();
    for (const json& b : doc.at("blocks")) {
      out.blocks.push_back(matrix_from_json(b, "certificate block"));
    }
    out.lyapunov_margin = doc.value("lyapunov_margin", 0.0);
    out.tool_version = doc.value("tool_version", "");
    out.input_digest = doc.at("input_digest").get<std::string>();
    out.error = doc.value("error", "");
  } catch (const json::exception& e) {
    parse_fail(std::string("malformed certificate: ") + e.what());
  }
  return out;
}

json comparison_to_json(const ComparisonMatrix& c) {
  json doc;
  doc["kind"] = c.kind == ComparisonKind::kBlock ? "block" : "scalar";
  doc["matrix"] = matrix_to_json(c.matrix);
  json diag = json::array();
  for (std::size_t i = 0; i < c.diagonal.size(); ++i) {
    const DiagonalProvenance& d = c.diagonal[i];
    json entry;
    entry["source"] = d.source == DiagonalSource::kInverseHinfNorm
                          ? "inverse_hinf_norm"
                          : "clipped_diagonal";
    entry["block_hurwitz"] = d.block_hurwitz;
    if (d.block_hurwitz) {
      entry["hinf_norm"] = d.hinf_norm;
      entry["peak_frequency"] = d.peak_frequency;
    } else {
      entry["hinf_norm"] = "infinite";
    }
    diag.push_back(std::move(entry));
  }
  doc["diagonal_provenance"] = std::move(diag);
  doc["offdiag_sigma"] = matrix_to_json(c.offdiag_sigma);
  json zeros = json::array();
  for (Index i = 0; i < c.structural_zero.rows(); ++i) {
    for (Index j = 0; j < c.structural_zero.cols(); ++j) {
      if (c.structural_zero(i, j)) zeros.push_back({i + 1, j + 1});
    }
  }
  doc["structural_zeros"] = std::move(zeros);
  doc["hurwitz"] = c.is_hurwitz();
  return doc;
}

json report_to_json(const TestReport& report) {
  json routes = json::array();
  for (const RouteResult& r : report.routes) {
    json entry;
    entry["route"] = to_string(r.route);
    entry["outcome"] = to_string(r.outcome);
    entry["reason"] = r.reason;
    if (r.certificate) entry["lyapunov_margin"] = r.certificate->lyapunov_margin;
    routes.push_back(std::move(entry));
  }
  json doc;
  doc["certified"] = report.certified();
  doc["routes"] = std::move(routes);
  return doc;
}

}  // namespace bsdd
