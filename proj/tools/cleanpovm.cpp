#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "cleanpovm/commands.hpp"

using namespace cleanpovm::cli;

int main(int argc, char** argv) {
  CLI::App app{"Decide cleanness of quasi-qubit POVMs and build non-cleanness witnesses"};
  app.require_subcommand(1);

  CheckOptions check;
  auto* c = app.add_subcommand("check", "decide cleanness of a POVM file");
  c->add_option("--input", check.input, "POVM file")->required();
  c->add_option("--tol", check.tol, "rank and zero threshold (relative)");
  c->add_option("--witness-out", check.witness_out, "write a witness bundle when not clean");
  c->add_flag("--oracle", check.oracle, "cross-check with the nullspace oracle");
  c->add_option("--json-out", check.json_out, "machine-readable result");

  VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "re-check a witness bundle against a POVM");
  v->add_option("--povm", verify.povm, "POVM file")->required();
  v->add_option("--witness", verify.witness, "witness bundle")->required();
  v->add_option("--json-out", verify.json_out, "machine-readable report");

  RandomOptions random;
  auto* r = app.add_subcommand("random", "generate random POVM files");
  r->add_option("--kind", random.kind, "rank-one | full-rank | strict-quasi-qubit | scalar")->required();
  r->add_option("--dim", random.dim, "Hilbert space dimension")->required()->check(CLI::Range(2, 64));
  r->add_option("--count", random.count, "number of files")->required();
  r->add_option("--seed", random.seed, "generator seed")->required();
  r->add_option("--out", random.out, "output directory")->required();
  r->add_option("--outcomes", random.outcomes, "number of POVM elements");

  FuzzOptions fuzz;
  auto* f = app.add_subcommand("fuzz", "run randomized consistency checks");
  f->add_option("--dim", fuzz.dim, "Hilbert space dimension")->required()->check(CLI::Range(2, 16));
  f->add_option("--count", fuzz.count, "number of instances")->required();
  f->add_option("--seed", fuzz.seed, "generator seed")->required();
  f->add_option("--repro-dir", fuzz.repro_dir, "where to write a failing instance");
  f->add_option("--jobs", fuzz.jobs, "worker threads")->check(CLI::Range(1, 256));
  f->add_flag("--verbose", fuzz.verbose, "list every instance");
  f->add_option("--json-out", fuzz.json_out, "machine-readable summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (*c) return cmd_check(check, std::cout, std::cerr);
    if (*v) return cmd_verify(verify, std::cout, std::cerr);
    if (*r) return cmd_random(random, std::cout, std::cerr);
    if (*f) return cmd_fuzz(fuzz, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
