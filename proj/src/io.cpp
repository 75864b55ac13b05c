#include "cleanpovm/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cleanpovm/error.hpp"

namespace cleanpovm {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

double number(const json& j, const char* what) {
  if (!j.is_number()) parse_fail(std::string(what) + " must be a number");
  return j.get<double>();
}

Matrix matrix_from_json(const json& j, Index d, const std::string& where) {
  if (!j.is_array() || static_cast<Index>(j.size()) != d) parse_fail(where + ": expected " + std::to_string(d) + " rows");
  Matrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != d) {
      parse_fail(where + ": row " + std::to_string(i + 1) + " must have " + std::to_string(d) + " entries");
    }
    for (Index k = 0; k < d; ++k) {
      const json& z = row[static_cast<std::size_t>(k)];
      if (!z.is_array() || z.size() != 2) parse_fail(where + ": entries are [re, im] pairs");
      m(i, k) = Complex(number(z[0], "re"), number(z[1], "im"));
    }
  }
  return m;
}

Index dim_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim")) parse_fail("missing \"dim\"");
  const json& d = j["dim"];
  if (!d.is_number_integer() || d.get<long long>() < 1) parse_fail("\"dim\" must be a positive integer");
  return static_cast<Index>(d.get<long long>());
}

std::vector<Matrix> matrices_from_json(const json& j, Index d, const std::string& key) {
  if (!j.is_array()) parse_fail("\"" + key + "\" must be a list of matrices");
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(matrix_from_json(j[k], d, key + "[" + std::to_string(k + 1) + "]"));
  }
  return out;
}

json povm_to_json(const PovmFile& f) {
  json j;
  j["dim"] = f.dim;
  json els = json::array();
  for (const Matrix& m : f.elements) els.push_back(matrix_to_json(m));
  j["elements"] = std::move(els);
  if (!f.labels.empty()) j["labels"] = f.labels;
  return j;
}

PovmFile povm_from_json(const json& j) {
  PovmFile f;
  f.dim = dim_from_json(j);
  if (!j.contains("elements")) parse_fail("missing \"elements\"");
  f.elements = matrices_from_json(j["elements"], f.dim, "elements");
  if (j.contains("labels")) {
    const json& l = j["labels"];
    if (!l.is_array()) parse_fail("\"labels\" must be a list of strings");
    for (const json& s : l) {
      if (!s.is_string()) parse_fail("\"labels\" must be a list of strings");
      f.labels.push_back(s.get<std::string>());
    }
    if (f.labels.size() != f.elements.size()) parse_fail("one label per element");
  }
  return f;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(e.what());
  }
}

}  // namespace

PovmFile parse_povm_file(std::string_view text) { return povm_from_json(parse_json(text)); }

std::string serialize(const PovmFile& f) { return povm_to_json(f).dump(2) + "\n"; }

WitnessBundle parse_witness_bundle(std::string_view text) {
  const json j = parse_json(text);
  if (!j.is_object()) parse_fail("bundle must be an object");
  for (const char* key : {"povm_p", "povm_q", "channel", "case", "epsilon", "widened_index", "direction"}) {
    if (!j.contains(key)) parse_fail(std::string("missing \"") + key + "\"");
  }
  WitnessBundle b;
  b.povm_p = povm_from_json(j["povm_p"]);
  b.povm_q = povm_from_json(j["povm_q"]);
  const json& ch = j["channel"];
  b.channel_dim = dim_from_json(ch);
  if (!ch.contains("kraus")) parse_fail("missing \"kraus\"");
  b.kraus = matrices_from_json(ch["kraus"], b.channel_dim, "kraus");

  if (!j["case"].is_string()) parse_fail("\"case\" must be a string");
  const auto c = parse_witness_case(j["case"].get<std::string>());
  if (!c) parse_fail("\"case\" must be one of a, b, c, d");
  b.case_tag = *c;
  b.epsilon = number(j["epsilon"], "epsilon");
  const json& idx = j["widened_index"];
  if (!idx.is_number_integer() || idx.get<long long>() < 1) parse_fail("\"widened_index\" is 1-based");
  b.widened_index = static_cast<std::size_t>(idx.get<long long>() - 1);
  if (!j["direction"].is_string()) parse_fail("\"direction\" must be a string");
  const auto dir = parse_widening_direction(j["direction"].get<std::string>());
  if (!dir) parse_fail("\"direction\" must be max-eig-increase or min-eig-decrease");
  b.direction = *dir;
  return b;
}

std::string serialize(const WitnessBundle& b) {
  json j;
  j["povm_p"] = povm_to_json(b.povm_p);
  j["povm_q"] = povm_to_json(b.povm_q);
  json kraus = json::array();
  for (const Matrix& r : b.kraus) kraus.push_back(matrix_to_json(r));
  j["channel"] = {{"dim", b.channel_dim}, {"kraus", std::move(kraus)}};
  j["case"] = std::string(to_string(b.case_tag));
  j["epsilon"] = b.epsilon;
  j["widened_index"] = b.widened_index + 1;
  j["direction"] = std::string(to_string(b.direction));
  return j.dump(2) + "\n";
}

PovmFile to_povm_file(const Povm& p) {
  PovmFile f;
  f.dim = p.dim();
  f.elements = p.matrices();
  f.labels = p.labels();
  return f;
}

Povm to_povm(const PovmFile& f, const Tolerances& tol) {
  for (const Matrix& m : f.elements) {
    if (m.rows() != f.dim || m.cols() != f.dim) throw Error(ErrorCode::DimensionMismatch, "element dimension");
  }
  return validate(f.elements, tol, f.labels);
}

WitnessBundle make_bundle(const Povm& p, const Witness& w) {
  WitnessBundle b;
  b.povm_p = to_povm_file(p);
  b.povm_q.dim = p.dim();
  b.povm_q.elements = w.q;
  b.povm_q.labels = p.labels();
  b.channel_dim = p.dim();
  b.kraus = w.kraus;
  b.case_tag = w.case_tag;
  b.epsilon = w.epsilon;
  b.widened_index = w.widened_index;
  b.direction = w.direction;
  return b;
}

Witness to_witness(const WitnessBundle& b) {
  Witness w;
  w.q = b.povm_q.elements;
  w.kraus = b.kraus;
  w.widened_index = b.widened_index;
  w.case_tag = b.case_tag;
  w.epsilon = b.epsilon;
  w.direction = b.direction;
  return w;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InfeasibleRequest, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::InfeasibleRequest, "write failed for " + path.string());
}

}  // namespace cleanpovm
