#include "rcsearch/mol/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "rcsearch/error.hpp"
#include "rcsearch/mol/smiles.hpp"

namespace rcs::mol {

using nlohmann::json;

std::string sample_to_json_line(const Sample &sample) {
  json atoms = json::array();
  for (const Atom &a : sample.product.atoms()) {
    json h = a.explicit_h ? json(*a.explicit_h) : json(nullptr);
    atoms.push_back({{"z", a.z}, {"charge", a.formal_charge}, {"aromatic", a.aromatic}, {"h", h}});
  }
  json bonds = json::array();
  for (const Bond &b : sample.product.bonds()) {
    bonds.push_back({{"a", b.a},
                     {"b", b.b},
                     {"order", std::string(bond_order_name(b.order))},
                     {"stereo", b.stereo},
                     {"dir", b.direction}});
  }
  json record = {{"v", kDatasetSchemaVersion}, {"id", sample.id}};
  if (sample.smiles) record["smiles"] = *sample.smiles;
  record["product"] = {{"atoms", std::move(atoms)}, {"bonds", std::move(bonds)}};
  record["rc"] = sample.rc;
  return record.dump();
}

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string &what) {
  throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line) + ": " + what);
}

MolGraph graph_from_json(const json &product, std::size_t line) {
  if (!product.is_object() || !product.contains("atoms") || !product.contains("bonds")) {
    malformed(line, "\"product\" needs \"atoms\" and \"bonds\"");
  }
  std::vector<Atom> atoms;
  for (const json &ja : product.at("atoms")) {
    Atom a;
    a.z = ja.at("z").get<int>();
    a.formal_charge = ja.value("charge", 0);
    a.aromatic = ja.value("aromatic", false);
    if (ja.contains("h") && !ja.at("h").is_null()) a.explicit_h = ja.at("h").get<int>();
    atoms.push_back(a);
  }
  std::vector<Bond> bonds;
  for (const json &jb : product.at("bonds")) {
    Bond b;
    b.a = jb.at("a").get<int>();
    b.b = jb.at("b").get<int>();
    const auto order = parse_bond_order(jb.value("order", std::string("single")));
    if (!order) malformed(line, "unknown bond order");
    b.order = *order;
    b.stereo = jb.value("stereo", 0);
    b.direction = jb.value("dir", 0);
    bonds.push_back(b);
  }
  return MolGraph(std::move(atoms), std::move(bonds));
}

}  // namespace

Sample sample_from_json_line(const std::string &line, std::size_t line_number) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::exception &e) {
    malformed(line_number, std::string("invalid JSON: ") + e.what());
  }
  if (!record.is_object()) malformed(line_number, "record is not an object");
  if (record.contains("v")) {
    if (!record.at("v").is_number_integer() || record.at("v").get<int>() != kDatasetSchemaVersion) {
      throw Error(ErrorCode::kSchemaVersionMismatch,
                  "line " + std::to_string(line_number) + ": expected schema version " +
                      std::to_string(kDatasetSchemaVersion));
    }
  }
  if (!record.contains("rc")) malformed(line_number, "missing \"rc\"");
  if (!record.contains("id")) malformed(line_number, "missing \"id\"");
  Sample s;
  try {
    s.id = record.at("id").get<std::string>();
    if (record.contains("smiles") && !record.at("smiles").is_null()) s.smiles = record.at("smiles").get<std::string>();
    if (record.contains("product")) {
      s.product = graph_from_json(record.at("product"), line_number);
    } else if (s.smiles) {
      s.product = parse_smiles(*s.smiles);
    } else {
      malformed(line_number, "needs \"product\" or \"smiles\"");
    }
    std::vector<int> rc = record.at("rc").get<std::vector<int>>();
    for (int id : rc) {
      if (!s.product.valid_node(id)) malformed(line_number, "rc node id " + std::to_string(id) + " out of range");
    }
    s.rc = make_node_set(std::move(rc));
  } catch (const json::exception &e) {
    malformed(line_number, e.what());
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kMalformedRecord) throw;
    malformed(line_number, e.what());
  }
  return s;
}

std::vector<Sample> load_dataset(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<Sample> samples;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    samples.push_back(sample_from_json_line(line, line_number));
  }
  return samples;
}

void save_dataset(std::span<const Sample> samples, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  for (const Sample &s : samples) out << sample_to_json_line(s) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace rcs::mol
