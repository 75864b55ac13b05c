#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cleanpovm/cleanness.hpp"
#include "cleanpovm/linalg.hpp"
#include "cleanpovm/povm.hpp"
#include "cleanpovm/witness.hpp"

namespace cleanpovm::cli {

// Frozen exit-code contract.
inline constexpr int kExitClean = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitInternal = 2;
inline constexpr int kExitNotClean = 3;

struct CheckOptions {
  std::filesystem::path input;
  std::optional<double> tol;  // sets the rank and zero thresholds
  std::optional<std::filesystem::path> witness_out;
  bool oracle = false;
  std::optional<std::filesystem::path> json_out;
};

struct VerifyOptions {
  std::filesystem::path povm;
  std::filesystem::path witness;
  std::optional<std::filesystem::path> json_out;
};

struct RandomOptions {
  std::string kind;
  Index dim = 2;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  std::optional<std::size_t> outcomes;
};

struct FuzzOptions {
  Index dim = 2;
  std::size_t count = 100;
  std::uint64_t seed = 1;
  std::filesystem::path repro_dir = ".";
  unsigned jobs = 1;
  bool verbose = false;
  std::optional<std::filesystem::path> json_out;
};

int cmd_check(const CheckOptions& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err);
int cmd_random(const RandomOptions& opt, std::ostream& out, std::ostream& err);
int cmd_fuzz(const FuzzOptions& opt, std::ostream& out, std::ostream& err);

// Clean iff rank-one or three supports are pairwise non-colinear. d = 2 only.
bool qubit_closed_form(const Povm& p);
// Clean iff rank-one or the supports have a one-dimensional solution space.
bool nullspace_oracle(const Povm& p);

struct InstanceReport {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t outcomes = 0;
  bool clean = false;
  VerdictReason reason = VerdictReason::RankOne;
  std::optional<WitnessCase> case_tag;
  std::vector<std::string> violations;
  // Witness diagnostics when one was built.
  double max_residual = 0.0;
  double closure_residual = 0.0;
  double widening = 0.0;
  double min_q_ratio = 0.0;  // min_i lambda_min(Q_i) / lambda_max(Q_i)
};

// Runs every fuzz check on one POVM; `rng` drives the invariance trials.
InstanceReport check_instance(const Povm& p, Rng& rng);

struct FuzzSummary {
  std::vector<InstanceReport> instances;  // ordered by index
  std::size_t clean = 0;
  std::size_t not_clean = 0;
  std::size_t violations = 0;
  std::size_t case_counts[4] = {0, 0, 0, 0};
};

FuzzSummary run_fuzz(Index dim, std::size_t count, std::uint64_t seed, unsigned jobs = 1);

// Folds rank-one elements into full-rank ones while the instance keeps failing.
Povm minimize_failure(const Povm& p, std::uint64_t seed);

}  // namespace cleanpovm::cli
