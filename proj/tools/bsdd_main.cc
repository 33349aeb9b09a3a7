// bsdd: block-diagonal Lyapunov certificates from the command line.

#include <iostream>

#include <CLI11.hpp>

#include "bsdd/cli.h"

int main(int argc, char** argv) {
  CLI::App app{"Certify stability of block-partitioned linear systems with "
               "block-diagonal Lyapunov matrices"};
  app.require_subcommand(1);

  bsdd::cli::Options opts;
  auto add_common = [&](CLI::App* cmd, bool needs_input) {
    auto* in = cmd->add_option("--input", opts.input, "Problem file (JSON)");
    if (needs_input) in->required();
    cmd->add_option("--hinf-tol", opts.hinf_tol, "Relative Hinf bisection tolerance");
    cmd->add_option("--out", opts.out, "Write machine-readable output here");
    cmd->add_flag("--quiet", opts.quiet, "Suppress the human-readable summary");
  };
  auto add_certify_flags = [&](CLI::App* cmd) {
    cmd->add_option("--strategy", opts.strategy, "auto|a|b|c|prop4");
    cmd->add_option("--epsilon", opts.epsilon, "Uniform Riccati shift eps_i");
    cmd->add_option("--margin", opts.margin, "Lyapunov strictness margin");
  };

  auto* certify = app.add_subcommand("certify", "Construct and verify a certificate");
  add_common(certify, true);
  add_certify_flags(certify);

  auto* compare = app.add_subcommand("compare", "Print the block comparison matrix");
  add_common(compare, true);

  auto* hinf = app.add_subcommand("hinf", "Hinf norm of the resolvent (sI - A)^-1");
  add_common(hinf, false);
  hinf->add_option("--matrix", opts.matrix, "Inline matrix, e.g. \"[[-2]]\"");

  auto* verify = app.add_subcommand("verify", "Re-verify a stored certificate");
  add_common(verify, true);
  verify->add_option("--certificate", opts.certificate, "Certificate file")->required();
  verify->add_option("--margin", opts.margin, "Lyapunov strictness margin");

  auto* report = app.add_subcommand("report", "Run every route and print a table");
  add_common(report, true);
  add_certify_flags(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bsdd::cli::kExitInputError;
  }

  if (*certify) return bsdd::cli::cmd_certify(opts, std::cout, std::cerr);
  if (*compare) return bsdd::cli::cmd_compare(opts, std::cout, std::cerr);
  if (*hinf) return bsdd::cli::cmd_hinf(opts, std::cout, std::cerr);
  if (*verify) return bsdd::cli::cmd_verify(opts, std::cout, std::cerr);
  if (*report) return bsdd::cli::cmd_report(opts, std::cout, std::cerr);
  return bsdd::cli::kExitInputError;
}
