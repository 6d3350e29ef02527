#include "mollikit/field_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mollikit {

namespace {

struct CsvHeader {
  int dim = 0;
  std::vector<int> shape;
  std::vector<Interval> bbox;
};

std::vector<double> split_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

CsvHeader parse_header(const std::string& line) {
  if (line.empty() || line[0] != '#') throw ConfigError("field CSV is missing its header row");
  CsvHeader h;
  std::stringstream ss(line.substr(1));
  std::string tok;
  while (ss >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "dim") {
      h.dim = std::stoi(val);
    } else if (key == "shape") {
      for (double v : split_numbers(val)) h.shape.push_back(static_cast<int>(v));
    } else if (key == "bbox") {
      auto v = split_numbers(val);
      for (std::size_t i = 0; i + 1 < v.size(); i += 2) h.bbox.push_back({v[i], v[i + 1]});
    }
  }
  if (h.dim < 1 || static_cast<int>(h.shape.size()) != h.dim ||
      static_cast<int>(h.bbox.size()) != h.dim)
    throw ConfigError("malformed field CSV header: " + line);
  return h;
}

std::vector<double> read_values(std::ifstream& in, std::size_t expected) {
  std::vector<double> values;
  values.reserve(expected);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    values.push_back(std::stod(line));
  }
  if (values.size() != expected)
    throw ConfigError("field CSV has " + std::to_string(values.size()) + " values, expected " +
                      std::to_string(expected));
  return values;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string field_csv_header(const Domain& d) {
  std::ostringstream os;
  os.precision(17);
  os << "# dim=" << d.dim() << " shape=";
  for (int k = 0; k < d.dim(); ++k) os << (k ? "," : "") << d.shape(k);
  os << " bbox=";
  for (int k = 0; k < d.dim(); ++k) os << (k ? "," : "") << d.bbox(k).lo << "," << d.bbox(k).hi;
  return os.str();
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& f) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << field_csv_header(f.domain()) << "\n";
  out.precision(17);
  for (double v : f.values()) out << v << "\n";
}

ScalarField read_field_csv(const std::filesystem::path& path, const DomainPtr& domain) {
  auto in = open_input(path);
  std::string line;
  std::getline(in, line);
  CsvHeader h = parse_header(line);
  if (h.dim != domain->dim()) throw ConfigError("field dimension does not match domain");
  for (int k = 0; k < h.dim; ++k) {
    const double tol = 1e-9 * (domain->bbox(k).hi - domain->bbox(k).lo);
    if (h.shape[k] != domain->shape(k) || std::abs(h.bbox[k].lo - domain->bbox(k).lo) > tol ||
        std::abs(h.bbox[k].hi - domain->bbox(k).hi) > tol)
      throw ConfigError("field grid does not match domain grid: " + path.string());
  }
  return ScalarField(domain, read_values(in, domain->node_count()));
}

ScalarField read_field_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  std::getline(in, line);
  CsvHeader h = parse_header(line);
  auto domain = std::make_shared<const Domain>(Domain::box(h.dim, h.bbox, h.shape));
  return ScalarField(domain, read_values(in, domain->node_count()));
}

namespace {

Domain domain_from_json(const nlohmann::json& j) {
  const std::string kind = j.value("kind", "box");
  if (kind != "box" && kind != "ball" && kind != "mask") throw ConfigError("unknown domain kind '" + kind + "'");
  const auto bbox_flat = j.at("bbox").get<std::vector<double>>();
  const auto resolution = j.at("resolution").get<std::vector<int>>();
  const int dim = static_cast<int>(resolution.size());
  if (bbox_flat.size() != 2 * resolution.size()) throw ConfigError("bbox needs lo,hi per axis");
  std::vector<Interval> bbox;
  for (int k = 0; k < dim; ++k) bbox.push_back({bbox_flat[2 * k], bbox_flat[2 * k + 1]});

  Domain d = Domain::box(dim, bbox, resolution);
  if (kind == "ball") {
    d = Domain::ball(dim, bbox, resolution);
  } else if (kind == "mask") {
    auto grid = std::make_shared<const Domain>(d);
    ScalarField m = read_field_csv(j.at("mask").get<std::string>(), grid);
    NodeMask inside(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) inside[i] = m[i] != 0.0;
    d = Domain::mask(dim, bbox, resolution, std::move(inside));
  }

  if (j.contains("delta") && !j["delta"].is_null()) {
    auto grid = std::make_shared<const Domain>(d);
    ScalarField a = read_field_csv(j["delta"].get<std::string>(), grid);
    NodeMask delta(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) delta[i] = a[i] == 0.0;
    d = d.with_delta(std::move(delta));
  }
  if (j.contains("gamma") && !j["gamma"].is_null()) {
    NodeMask gamma(d.node_count(), 0);
    for (const auto& face : j["gamma"]) {
      int axis = face.at("axis").get<int>();
      bool hi = face.at("side").get<std::string>() == "hi";
      if (axis < 0 || axis >= dim) throw ConfigError("gamma axis out of range");
      for (std::size_t i = 0; i < d.node_count(); ++i) {
        auto c = d.coords(i);
        if (c[axis] == (hi ? d.shape(axis) - 1 : 0)) gamma[i] = 1;
      }
    }
    d = d.with_gamma(std::move(gamma));
  }
  return d;
}

}  // namespace

DomainPtr parse_domain_spec(const std::string& json_or_path) {
  nlohmann::json j;
  try {
    std::string text = json_or_path;
    auto first = text.find_first_not_of(" \t\n");
    if (first == std::string::npos || text[first] != '{') {
      auto in = open_input(json_or_path);
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid domain spec: ") + e.what());
  }
  try {
    return std::make_shared<const Domain>(domain_from_json(j));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid domain spec: ") + e.what());
  }
}

}  // namespace mollikit
