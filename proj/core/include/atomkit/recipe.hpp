#pragma once

#include <iosfwd>
#include <string>

#include "atomkit/atomic_sets.hpp"
#include "atomkit/linalg.hpp"

#include "json.hpp"

namespace atomkit {

/// {"variant": name, "params": {...}} with nested parts for combinators.
nlohmann::json descriptor_to_recipe(const AtomicSet& set);
AtomicSetPtr descriptor_from_recipe(const nlohmann::json& recipe);

/// CSV: one row per matrix row, comma separated, no header.
Dense dense_from_csv(std::istream& in);
Dense dense_from_csv_file(const std::string& path);
std::string dense_to_csv(const Dense& x);

/// Masked matrix CSV with header "i,j,value".
MaskedMatrix masked_from_csv_file(const std::string& path, Shape shape);

}  // namespace atomkit
