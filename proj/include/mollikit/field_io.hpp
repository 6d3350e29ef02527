#pragma once

#include <filesystem>
#include <string>

#include "mollikit/geometry.hpp"

namespace mollikit {

/// Writes `# dim=<N> shape=<n1,...> bbox=<lo1,hi1,...>` then one value per line, row-major.
void write_field_csv(const std::filesystem::path& path, const ScalarField& f);
std::string field_csv_header(const Domain& d);

/// Reads a field onto `domain`; the header must describe the same grid.
ScalarField read_field_csv(const std::filesystem::path& path, const DomainPtr& domain);
/// Reads a field and builds a box domain from its header.
ScalarField read_field_csv(const std::filesystem::path& path);

/// Parses `{"kind":"box"|"ball"|"mask", "bbox":[...], "resolution":[...],
/// "delta":<field path or null>, "gamma":<spec or null>, "mask":<field path>}`.
/// Δ is the set of inside nodes where the delta field is exactly zero; the mask field marks
/// inside nodes by nonzero values. Γ is a list of `{"axis":k,"side":"lo"|"hi"}` faces.
/// The argument is either inline JSON or a path to a JSON file.
DomainPtr parse_domain_spec(const std::string& json_or_path);

}  // namespace mollikit
