#pragma once

#include <string>
#include <string_view>

#include "taxwb/core/taxonomy.hpp"

namespace taxwb::testkit {

std::string fixture_path(std::string_view file_name);
std::string read_fixture(std::string_view file_name);

/// Loads tests/fixtures/<name>.json without going through the service
/// loader, so core tests stay independent of persistence code.
Taxonomy load_fixture(std::string_view name);

/// Tree from an indented outline, two spaces per level:
///   "Entity\n  Object\n    Star\n  Time\n"
TypeNode outline(std::string_view text);

}  // namespace taxwb::testkit
