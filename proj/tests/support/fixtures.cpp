#include "fixtures.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "taxwb/core/branch_json.hpp"

namespace taxwb::testkit {

std::string fixture_path(std::string_view file_name) {
  return std::string(TAXWB_FIXTURE_DIR) + "/" + std::string(file_name);
}

std::string read_fixture(std::string_view file_name) {
  std::ifstream in(fixture_path(file_name), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + std::string(file_name));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Taxonomy load_fixture(std::string_view name) {
  const auto doc = ordered_json::parse(read_fixture(std::string(name) + ".json"));
  return Taxonomy(branch_from_json(doc.at("root")), doc.at("version").get<std::uint64_t>());
}

namespace {

struct Pending {
  Label label;
  std::vector<TypeNode> children;
};

}  // namespace

TypeNode outline(std::string_view text) {
  std::vector<Pending> stack;
  std::optional<TypeNode> root;
  auto close_to = [&](std::size_t depth) {
    while (stack.size() > depth) {
      TypeNode done(stack.back().label, std::move(stack.back().children));
      stack.pop_back();
      if (stack.empty()) {
        root = std::move(done);
      } else {
        stack.back().children.push_back(std::move(done));
      }
    }
  };
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(' ');
    if (first == std::string::npos) continue;
    const std::size_t depth = first / 2;
    if (depth > stack.size()) throw std::runtime_error("bad outline line: " + line);
    close_to(depth);
    if (depth == 0 && root) throw std::runtime_error("outline has two roots");
    stack.push_back({Label(line.substr(first)), {}});
  }
  close_to(0);
  if (!root) throw std::runtime_error("empty outline");
  return *root;
}

}  // namespace taxwb::testkit
