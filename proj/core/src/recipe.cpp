#include "atomkit/recipe.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "atomkit/errors.hpp"
#include "atomkit/set_calculus.hpp"

namespace atomkit {

namespace {

using nlohmann::json;

Dense dense_from_json_rows(const json& rows) {
  const int r = static_cast<int>(rows.size());
  if (r == 0) return Dense();
  const int c = static_cast<int>(rows[0].size());
  Dense out(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[i].size()) != c)
      throw ShapeMismatch("recipe: ragged matrix rows");
    for (int j = 0; j < c; ++j) out(i, j) = rows[i][j].get<double>();
  }
  return out;
}

Shape shape_from_params(const json& p) {
  if (p.contains("n")) return Shape{p["n"].get<int>(), 1};
  return Shape{p["rows"].get<int>(), p.value("cols", 1)};
}

LinearMap map_from_json(const json& m) {
  const std::string kind = m["kind"].get<std::string>();
  if (kind == "dense") return LinearMap::dense_map(dense_from_json_rows(m["matrix"]));
  if (kind == "scaling") return LinearMap::scaling(m["alpha"].get<double>(), m["n"].get<int>());
  if (kind == "dct") return LinearMap::dct_forward(m["n"].get<int>());
  if (kind == "dct_transpose") return LinearMap::dct_transpose(m["n"].get<int>());
  throw ShapeMismatch("recipe: unknown map kind '" + kind + "'");
}

}  // namespace

json descriptor_to_recipe(const AtomicSet& set) {
  json j;
  j["variant"] = set.variant();
  j["params"] = set.recipe_params();
  return j;
}

AtomicSetPtr descriptor_from_recipe(const json& recipe) {
  const std::string variant = recipe.at("variant").get<std::string>();
  const json params = recipe.value("params", json::object());

  if (variant == "signed_basis") return signed_basis(shape_from_params(params));
  if (variant == "two_norm_ball") return two_norm_ball(shape_from_params(params));
  if (variant == "box") return box_set(shape_from_params(params));
  if (variant == "nuclear_ball")
    return nuclear_ball(params.at("rows").get<int>(), params.at("cols").get<int>());
  if (variant == "spectrahedron") return spectrahedron(params.at("n").get<int>());
  if (variant == "tv") return tv_atoms(params.at("n").get<int>());
  if (variant == "subspace") return subspace_set(dense_from_json_rows(params.at("basis")));
  if (variant == "group_norm") {
    std::vector<std::vector<int>> groups;
    for (const auto& g : params.at("groups")) groups.push_back(g.get<std::vector<int>>());
    return group_norm(params.at("n").get<int>(), std::move(groups));
  }
  if (variant == "weighted_spectrahedron") {
    Dense v = dense_from_json_rows(params.at("v"));
    const auto& lm = params.at("lambda");
    Dense lambda(static_cast<int>(lm.size()), 1);
    for (int i = 0; i < lambda.size(); ++i) lambda[i] = lm[i].get<double>();
    return weighted_spectrahedron(std::move(v), std::move(lambda));
  }
  if (variant == "finite_atoms") {
    const Shape s = shape_from_params(params);
    std::vector<Dense> atoms;
    for (const auto& row : params.at("atoms")) {
      std::vector<double> vals;
      for (const auto& v : row) vals.push_back(v.get<double>());
      atoms.push_back(Dense(s, std::move(vals)));
    }
    return finite_atom_set(s, std::move(atoms));
  }
  if (variant == "transformed") {
    AtomicSetPtr inner = descriptor_from_recipe(params.at("inner"));
    LinearMap m = map_from_json(params.at("map"));
    const std::string mode = params.at("mode").get<std::string>();
    return transform(inner, std::move(m),
                     mode == "image" ? TransformMode::image : TransformMode::preimage);
  }
  if (variant == "scaled") {
    AtomicSetPtr inner = descriptor_from_recipe(params.at("inner"));
    return scale_set(inner, params.at("alpha").get<double>());
  }
  if (variant == "sum" || variant == "union") {
    std::vector<AtomicSetPtr> parts;
    for (const auto& p : params.at("parts")) parts.push_back(descriptor_from_recipe(p));
    return variant == "sum" ? sum_descriptor(std::move(parts))
                            : union_descriptor(std::move(parts));
  }
  throw ShapeMismatch("recipe: unknown variant '" + variant + "'");
}

Dense dense_from_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ShapeMismatch("csv: empty input");
  const int c = static_cast<int>(rows[0].size());
  Dense out(static_cast<int>(rows.size()), c);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<int>(rows[i].size()) != c) throw ShapeMismatch("csv: ragged rows");
    for (int j = 0; j < c; ++j) out(static_cast<int>(i), j) = rows[i][j];
  }
  if (!out.all_finite()) throw ShapeMismatch("csv: non-finite entries");
  return out;
}

Dense dense_from_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ShapeMismatch("csv: cannot open " + path);
  return dense_from_csv(f);
}

std::string dense_to_csv(const Dense& x) {
  std::ostringstream os;
  char buf[64];
  for (int i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < x.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", x(i, j));
      os << (j ? "," : "") << buf;
    }
    os << "\n";
  }
  return os.str();
}

MaskedMatrix masked_from_csv_file(const std::string& path, Shape shape) {
  std::ifstream f(path);
  if (!f) throw ShapeMismatch("csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("i,j,value", 0) != 0)
    throw ShapeMismatch("masked csv: missing 'i,j,value' header");
  std::vector<MaskedEntry> entries;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    MaskedEntry e;
    std::getline(ss, cell, ',');
    e.i = std::stoi(cell);
    std::getline(ss, cell, ',');
    e.j = std::stoi(cell);
    std::getline(ss, cell, ',');
    e.value = std::stod(cell);
    entries.push_back(e);
  }
  return MaskedMatrix(shape, std::move(entries));
}

}  // namespace atomkit
