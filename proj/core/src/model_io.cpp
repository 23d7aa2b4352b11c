#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "psindy/errors.hpp"
#include "psindy/mapmodel.hpp"

// Model document, one field per line, each value a JSON literal:
//
//   # psindy map model
//   dimension: 1
//   degree: 5
//   ordering: "grlex"
//   var_names: ["x"]
//   lambda: 0.050000000000000003
//   fingerprint: "9b1f..."
//   terms: [[0],[1],[2],[3],[4],[5]]
//   coefficients: [[-0.098...],[0.367...],[0],[0],[0],[0]]
//
// Reals are written with 17 significant digits. A truncated document is
// reported by the first field that is missing or cut short.

namespace psindy {

namespace {

using nlohmann::json;

constexpr const char* kFields[] = {"dimension", "degree",      "ordering",    "var_names",
                                   "lambda",    "fingerprint", "terms",       "coefficients"};

std::string real(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

std::string serialize_model(const MapModel& model) {
  const auto& lib = model.library();
  const auto& xi = model.xi();
  std::string out = "# psindy map model\n";
  out += fmt::format("dimension: {}\n", lib.dimension());
  out += fmt::format("degree: {}\n", lib.max_degree());
  out += "ordering: \"grlex\"\n";
  out += "var_names: " + json(model.var_names()).dump() + "\n";
  out += fmt::format("lambda: {}\n", real(model.coefficients().lambda));
  out += fmt::format("fingerprint: \"{:016x}\"\n", lib.fingerprint());

  out += "terms: [";
  for (std::size_t j = 0; j < lib.size(); ++j) {
    out += j ? ",[" : "[";
    const auto& e = lib.term(j).exponents;
    for (std::size_t k = 0; k < e.size(); ++k) out += (k ? "," : "") + std::to_string(e[k]);
    out += "]";
  }
  out += "]\n";

  out += "coefficients: [";
  for (Eigen::Index j = 0; j < xi.rows(); ++j) {
    out += j ? ",[" : "[";
    for (Eigen::Index k = 0; k < xi.cols(); ++k) out += (k ? "," : "") + real(xi(j, k));
    out += "]";
  }
  out += "]\n";
  return out;
}

MapModel parse_model(const std::string& text) {
  std::map<std::string, json> fields;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError(fmt::format("model file: malformed line '{}'", line));
    const std::string key = line.substr(0, colon);
    try {
      fields[key] = json::parse(line.substr(colon + 1));
    } catch (const json::parse_error&) {
      throw ParseError(fmt::format("model file: field '{}' is malformed or truncated", key));
    }
  }
  for (const char* f : kFields) {
    if (!fields.count(f)) throw ParseError(fmt::format("model file: missing field '{}'", f));
  }

  try {
    const auto d = fields["dimension"].get<std::size_t>();
    const int degree = fields["degree"].get<int>();
    if (fields["ordering"].get<std::string>() != "grlex") {
      throw ParseError("model file: field 'ordering' must be \"grlex\"");
    }
    FeatureLibrary lib(d, degree);

    const auto& terms = fields["terms"];
    if (!terms.is_array() || terms.size() != lib.size()) {
      throw ParseError(fmt::format("model file: field 'terms' has {} entries, library has {}",
                                   terms.size(), lib.size()));
    }
    for (std::size_t j = 0; j < lib.size(); ++j) {
      if (terms[j].get<std::vector<int>>() != lib.term(j).exponents) {
        throw ParseError(fmt::format("model file: term {} is out of grlex order", j));
      }
    }
    const auto fp = fields["fingerprint"].get<std::string>();
    if (fp != fmt::format("{:016x}", lib.fingerprint())) {
      throw ParseError("model file: fingerprint mismatch between library and coefficients");
    }

    const auto& coef = fields["coefficients"];
    if (!coef.is_array() || coef.size() != lib.size()) {
      throw ParseError("model file: field 'coefficients' must have one row per term");
    }
    CoefficientMatrix cm;
    cm.values.resize(static_cast<Eigen::Index>(lib.size()), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < lib.size(); ++j) {
      const auto row = coef[j].get<std::vector<double>>();
      if (row.size() != d) throw ParseError(fmt::format("model file: coefficient row {} has wrong width", j));
      for (std::size_t k = 0; k < d; ++k) {
        cm.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = row[k];
      }
    }
    cm.support = cm.values.array() != 0.0;
    cm.library_fingerprint = lib.fingerprint();
    cm.lambda = fields["lambda"].get<double>();
    cm.empty_columns.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
      cm.empty_columns[k] = !cm.support.col(static_cast<Eigen::Index>(k)).any();
    }
    return MapModel(std::move(lib), std::move(cm),
                    fields["var_names"].get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("model file: {}", e.what()));
  } catch (const InvalidArgument& e) {
    throw ParseError(fmt::format("model file: {}", e.what()));
  }
}

void save_model(const MapModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << serialize_model(model);
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

MapModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace psindy
