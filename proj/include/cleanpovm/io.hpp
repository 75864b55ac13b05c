#pragma once

// JSON file formats. Complex entries are [re, im] pairs; doubles are written
// with the shortest decimal form that parses back to the same bits.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cleanpovm/linalg.hpp"
#include "cleanpovm/povm.hpp"
#include "cleanpovm/witness.hpp"

namespace cleanpovm {

struct PovmFile {
  Index dim = 0;
  std::vector<Matrix> elements;
  std::vector<std::string> labels;
};

struct WitnessBundle {
  PovmFile povm_p;
  PovmFile povm_q;
  Index channel_dim = 0;
  std::vector<Matrix> kraus;
  WitnessCase case_tag = WitnessCase::A;
  double epsilon = 0.0;
  std::size_t widened_index = 0;  // 0-based here, 1-based on disk
  WideningDirection direction = WideningDirection::MaxEigIncrease;
};

// Parsers throw ParseError on malformed input; they do not validate the POVM.
PovmFile parse_povm_file(std::string_view text);
std::string serialize(const PovmFile& f);
WitnessBundle parse_witness_bundle(std::string_view text);
std::string serialize(const WitnessBundle& b);

PovmFile to_povm_file(const Povm& p);
Povm to_povm(const PovmFile& f, const Tolerances& tol = {});
WitnessBundle make_bundle(const Povm& p, const Witness& w);
Witness to_witness(const WitnessBundle& b);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace cleanpovm
