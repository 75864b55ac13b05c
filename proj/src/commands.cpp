#include "cleanpovm/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cleanpovm/channel.hpp"
#include "cleanpovm/error.hpp"
#include "cleanpovm/io.hpp"

namespace cleanpovm::cli {

namespace {

using nlohmann::json;

constexpr double kClosureBound = 1e-10;
constexpr double kNegativityBound = 1e-10;

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

std::string error_line(const Error& e) {
  return "error: " + std::string(to_string(e.code())) + ": " + e.what();
}

std::vector<std::vector<std::size_t>> blocks_as_elements(const BlockPartition& part) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& block : part.blocks) {
    std::vector<std::size_t> b;
    for (std::size_t pos : block) {
      b.push_back(part.basis_indices.empty() ? pos + 1 : part.basis_indices[pos] + 1);
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::string blocks_text(const std::vector<std::vector<std::size_t>>& blocks) {
  std::string s = "[";
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (b) s += ",";
    s += "{";
    for (std::size_t k = 0; k < blocks[b].size(); ++k) {
      if (k) s += ",";
      s += std::to_string(blocks[b][k]);
    }
    s += "}";
  }
  return s + "]";
}

json report_json(const WitnessReport& r) {
  return {{"q_valid", r.q_valid},
          {"channel_unital", r.channel_unital},
          {"reproduces_p", r.reproduces_p},
          {"strictly_widened", r.strictly_widened},
          {"closure_residual", r.closure_residual},
          {"max_residual", r.max_residual},
          {"widening", r.widening},
          {"accepted", r.accepted()}};
}

void print_report(const WitnessReport& r, std::ostream& out) {
  auto yn = [](bool b) { return b ? "pass" : "FAIL"; };
  out << "q valid:          " << yn(r.q_valid);
  if (!r.q_error.empty()) out << " (" << r.q_error << ")";
  out << "\n";
  out << "channel unital:   " << yn(r.channel_unital) << "  residual " << fmt(r.closure_residual) << "\n";
  out << "reproduces P:     " << yn(r.reproduces_p) << "  max residual " << fmt(r.max_residual) << "\n";
  out << "strictly widened: " << yn(r.strictly_widened) << "  gain " << fmt(r.widening) << "\n";
}

std::size_t default_outcomes(PovmKind kind, Index d) {
  const auto du = static_cast<std::size_t>(d);
  switch (kind) {
    case PovmKind::RankOne: return du + 1;
    case PovmKind::FullRank: return 3;
    case PovmKind::Scalar: return 2;
    case PovmKind::StrictQuasiQubit: return du + 2;
  }
  return du + 1;
}

double min_q_ratio(const Witness& w) {
  double worst = std::numeric_limits<double>::infinity();
  for (const Matrix& q : w.q) {
    const RealVector v = eig_hermitian(hermitize(q)).values;
    const double top = std::max(v(v.size() - 1), std::numeric_limits<double>::min());
    worst = std::min(worst, v(0) / top);
  }
  return worst;
}

}  // namespace

bool nullspace_oracle(const Povm& p) {
  if (classify(p).kind == PovmClass::RankOne) return true;
  std::vector<Ket> kets;
  for (const auto& s : rank_one_supports(p)) kets.push_back(s.support);
  return totally_determined_nullspace(kets, p.dim(), p.tolerances()) == 1;
}

bool qubit_closed_form(const Povm& p) {
  if (p.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "closed form is for qubits");
  if (classify(p).kind == PovmClass::RankOne) return true;
  std::vector<Ket> directions;
  for (const auto& s : rank_one_supports(p)) {
    bool seen = false;
    for (const Ket& v : directions) {
      const double det = std::abs(v(0) * s.support(1) - v(1) * s.support(0));
      if (det <= p.tolerances().rank) seen = true;
    }
    if (!seen) directions.push_back(s.support);
  }
  return directions.size() >= 3;
}

InstanceReport check_instance(const Povm& p, Rng& rng) {
  InstanceReport rep;
  rep.outcomes = p.size();
  CleannessVerdict verdict;
  try {
    verdict = decide_clean(p);
  } catch (const Error& e) {
    rep.violations.push_back("decide_clean: " + error_line(e));
    return rep;
  }
  rep.clean = verdict.clean;
  rep.reason = verdict.reason;

  if (verdict.reason != VerdictReason::TrivialSingleOutcome) {
    if (nullspace_oracle(p) != verdict.clean) rep.violations.push_back("oracle disagrees");
    if (p.dim() == 2 && qubit_closed_form(p) != verdict.clean) {
      rep.violations.push_back("qubit closed form disagrees");
    }
  }

  if (!verdict.clean) {
    try {
      const Witness w = build_witness(p, verdict);
      rep.case_tag = w.case_tag;
      const WitnessReport r = verify_witness(p, w);
      rep.max_residual = r.max_residual;
      rep.closure_residual = r.closure_residual;
      rep.widening = r.widening;
      rep.min_q_ratio = min_q_ratio(w);
      if (!r.accepted()) rep.violations.push_back("witness rejected: " + report_json(r).dump());
      if (r.closure_residual > kClosureBound) {
        rep.violations.push_back("closure residual " + fmt(r.closure_residual));
      }
      if (rep.min_q_ratio < -kNegativityBound) {
        rep.violations.push_back("Q eigenvalue ratio " + fmt(rep.min_q_ratio));
      }
    } catch (const Error& e) {
      rep.violations.push_back("build_witness: " + error_line(e));
    }
  }

  try {
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    const Povm moved = conjugate(permute(p, order), random_unitary(p.dim(), rng));
    if (decide_clean(moved).clean != verdict.clean) {
      rep.violations.push_back("verdict changed under permutation and conjugation");
    }
  } catch (const Error& e) {
    rep.violations.push_back("invariance: " + error_line(e));
  }
  return rep;
}

namespace {

InstanceReport run_one(Index dim, std::uint64_t seed, std::size_t index) {
  const std::uint64_t s = derive_seed(seed, index);
  Rng rng(s);
  const Povm p = random_quasi_qubit_povm(dim, rng);
  InstanceReport rep = check_instance(p, rng);
  rep.index = index;
  rep.seed = s;
  return rep;
}

Povm instance_povm(Index dim, std::uint64_t instance_seed) {
  Rng rng(instance_seed);
  return random_quasi_qubit_povm(dim, rng);
}

}  // namespace

FuzzSummary run_fuzz(Index dim, std::size_t count, std::uint64_t seed, unsigned jobs) {
  FuzzSummary summary;
  summary.instances.resize(count);
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) summary.instances[i] = run_one(dim, seed, i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < count; i += jobs) summary.instances[i] = run_one(dim, seed, i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& r : summary.instances) {
    (r.clean ? summary.clean : summary.not_clean) += 1;
    if (r.case_tag) summary.case_counts[static_cast<int>(*r.case_tag)] += 1;
    if (!r.violations.empty()) summary.violations += 1;
  }
  return summary;
}

Povm minimize_failure(const Povm& p, std::uint64_t seed) {
  auto fails = [&](const Povm& q) {
    Rng rng(seed);
    return !check_instance(q, rng).violations.empty();
  };
  Povm best = p;
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < best.size() && !progress; ++i) {
      if (!best[i].rank_one) continue;
      for (std::size_t j = 0; j < best.size() && !progress; ++j) {
        if (j == i || best[j].rank != best.dim()) continue;
        std::vector<Matrix> els;
        for (std::size_t k = 0; k < best.size(); ++k) {
          if (k == i) continue;
          els.push_back(k == j ? Matrix(best[j].op.matrix() + best[i].op.matrix()) : best[k].op.matrix());
        }
        try {
          Povm candidate = validate(std::move(els), best.tolerances());
          if (fails(candidate)) {
            best = std::move(candidate);
            progress = true;
          }
        } catch (const Error&) {
        }
      }
    }
  }
  return best;
}

int cmd_check(const CheckOptions& opt, std::ostream& out, std::ostream& err) {
  Povm p;
  Tolerances tol;
  if (opt.tol) {
    if (!(*opt.tol > 0.0)) {
      err << "error: --tol must be positive\n";
      return kExitInputError;
    }
    tol.rank = tol.zero = *opt.tol;
  }
  CleannessVerdict verdict;
  try {
    p = to_povm(parse_povm_file(read_text(opt.input)), tol);
    verdict = decide_clean(p);
  } catch (const Error& e) {
    err << error_line(e) << "\n";
    return e.code() == ErrorCode::Internal ? kExitInternal : kExitInputError;
  }

  json j;
  j["clean"] = verdict.clean;
  j["reason"] = std::string(to_string(verdict.reason));
  out << "verdict: " << (verdict.clean ? "clean" : "not clean") << "\n";
  out << "reason: " << to_string(verdict.reason) << "\n";
  if (verdict.partition) {
    const auto blocks = blocks_as_elements(*verdict.partition);
    j["blocks"] = blocks;
    if (verdict.partition->basis_indices.empty()) {
      out << "blocks: " << blocks_text(blocks) << " (eigenvector basis positions)\n";
    } else {
      out << "blocks: " << blocks_text(blocks) << "\n";
    }
  }

  int code = verdict.clean ? kExitClean : kExitNotClean;
  try {
    if (opt.oracle) {
      const bool oracle = nullspace_oracle(p);
      const bool agrees = verdict.reason == VerdictReason::TrivialSingleOutcome || oracle == verdict.clean;
      std::vector<Ket> kets;
      for (const auto& s : rank_one_supports(p)) kets.push_back(s.support);
      const std::size_t nullity = totally_determined_nullspace(kets, p.dim(), p.tolerances());
      out << "oracle: nullspace dimension " << nullity << ", " << (agrees ? "agrees" : "DISAGREES") << "\n";
      j["oracle"] = {{"nullspace_dim", nullity}, {"agrees", agrees}};
      if (!agrees) code = kExitInternal;
    }
    if (opt.witness_out && !verdict.clean) {
      const Witness w = build_witness(p, verdict);
      const WitnessReport r = verify_witness(p, w);
      write_text(*opt.witness_out, serialize(make_bundle(p, w)));
      out << "witness: case " << to_string(w.case_tag) << ", eps " << fmt(w.epsilon) << ", element "
          << w.widened_index + 1 << " " << to_string(w.direction) << " by " << fmt(r.widening) << " -> "
          << opt.witness_out->string() << "\n";
      j["witness"] = {{"case", std::string(to_string(w.case_tag))},
                      {"epsilon", w.epsilon},
                      {"widened_index", w.widened_index + 1},
                      {"direction", std::string(to_string(w.direction))},
                      {"path", opt.witness_out->string()},
                      {"report", report_json(r)}};
      if (!r.accepted()) {
        err << "error: constructed witness failed verification\n";
        code = kExitInternal;
      }
    }
  } catch (const Error& e) {
    err << error_line(e) << "\n";
    code = kExitInternal;
  }
  j["exit_code"] = code;
  if (opt.json_out) write_text(*opt.json_out, j.dump(2) + "\n");
  return code;
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  WitnessReport r;
  try {
    const Povm p = to_povm(parse_povm_file(read_text(opt.povm)));
    const WitnessBundle b = parse_witness_bundle(read_text(opt.witness));
    if (b.channel_dim != p.dim() || b.povm_q.dim != p.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "witness and POVM dimensions differ");
    }
    r = verify_witness(p, to_witness(b));
  } catch (const Error& e) {
    err << error_line(e) << "\n";
    return kExitInputError;
  }
  print_report(r, out);
  out << (r.accepted() ? "accepted" : "rejected") << "\n";
  if (opt.json_out) {
    try {
      write_text(*opt.json_out, report_json(r).dump(2) + "\n");
    } catch (const Error& e) {
      err << error_line(e) << "\n";
      return kExitInternal;
    }
  }
  return r.accepted() ? 0 : kExitNotClean;
}

int cmd_random(const RandomOptions& opt, std::ostream& out, std::ostream& err) {
  const auto kind = parse_povm_kind(opt.kind);
  if (!kind) {
    err << "error: unknown kind '" << opt.kind << "' (rank-one, full-rank, strict-quasi-qubit, scalar)\n";
    return kExitInputError;
  }
  try {
    std::filesystem::create_directories(opt.out);
    const std::size_t n = opt.outcomes.value_or(default_outcomes(*kind, opt.dim));
    for (std::size_t i = 0; i < opt.count; ++i) {
      const Povm p = random_povm(*kind, opt.dim, n, derive_seed(opt.seed, i));
      char name[96];
      std::snprintf(name, sizeof name, "%s_d%ld_s%llu_%04zu.json", opt.kind.c_str(), static_cast<long>(opt.dim),
                    static_cast<unsigned long long>(opt.seed), i + 1);
      const auto path = opt.out / name;
      write_text(path, serialize(to_povm_file(p)));
      out << path.string() << "\n";
    }
  } catch (const Error& e) {
    err << error_line(e) << "\n";
    return kExitInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return 0;
}

int cmd_fuzz(const FuzzOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.dim < 2) {
    err << "error: --dim must be at least 2\n";
    return kExitInputError;
  }
  const FuzzSummary s = run_fuzz(opt.dim, opt.count, opt.seed, opt.jobs);
  const bool list = opt.verbose || opt.count <= 10;
  json instances = json::array();
  for (const auto& r : s.instances) {
    json ji = {{"index", r.index + 1}, {"seed", r.seed}, {"outcomes", r.outcomes},
               {"clean", r.clean}, {"reason", std::string(to_string(r.reason))}, {"violations", r.violations}};
    if (r.case_tag) ji["case"] = std::string(to_string(*r.case_tag));
    instances.push_back(std::move(ji));
    if (list || !r.violations.empty()) {
      out << "#" << r.index + 1 << " n=" << r.outcomes << " " << (r.clean ? "clean" : "not clean") << " "
          << to_string(r.reason);
      if (r.case_tag) out << " case " << to_string(*r.case_tag);
      out << "\n";
      for (const auto& v : r.violations) out << "  violation: " << v << "\n";
    }
  }
  out << "fuzz d=" << opt.dim << " count=" << opt.count << " seed=" << opt.seed << ": " << s.clean
      << " clean, " << s.not_clean << " not clean, cases a/b/c/d = " << s.case_counts[0] << "/"
      << s.case_counts[1] << "/" << s.case_counts[2] << "/" << s.case_counts[3] << ", " << s.violations
      << " violations\n";

  json j = {{"dim", opt.dim}, {"count", opt.count}, {"seed", opt.seed}, {"clean", s.clean},
            {"not_clean", s.not_clean}, {"violations", s.violations}, {"instances", std::move(instances)}};
  int code = 0;
  if (s.violations > 0) {
    code = kExitNotClean;
    const auto first = std::find_if(s.instances.begin(), s.instances.end(),
                                    [](const InstanceReport& r) { return !r.violations.empty(); });
    try {
      const Povm small = minimize_failure(instance_povm(opt.dim, first->seed), first->seed);
      std::filesystem::create_directories(opt.repro_dir);
      const auto path = opt.repro_dir / ("fuzz_repro_d" + std::to_string(opt.dim) + "_seed" +
                                         std::to_string(opt.seed) + "_" + std::to_string(first->index + 1) +
                                         ".json");
      write_text(path, serialize(to_povm_file(small)));
      out << "repro: " << path.string() << "\n";
      j["repro"] = path.string();
    } catch (const std::exception& e) {
      err << "error: could not write repro: " << e.what() << "\n";
    }
  }
  if (opt.json_out) write_text(*opt.json_out, j.dump(2) + "\n");
  return code;
}

}  // namespace cleanpovm::cli
