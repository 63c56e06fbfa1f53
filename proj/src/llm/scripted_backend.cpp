#include "taxwb/llm/scripted_backend.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "taxwb/core/error.hpp"
#include "taxwb/core/text.hpp"

namespace taxwb::llm {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::io, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0x0F]);
  }
  return out;
}

bool FixtureRecord::matches(std::string_view prompt) const {
  switch (matcher) {
    case Matcher::substring:
      return prompt.find(pattern) != std::string_view::npos;
    case Matcher::sha256:
      return sha256_hex(prompt) == pattern;
  }
  return false;
}

ScriptedFixture ScriptedFixture::parse(std::string_view jsonl) {
  ScriptedFixture fixture;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= jsonl.size()) {
    const auto end = std::min(jsonl.find('\n', start), jsonl.size());
    const auto line = text::trim(jsonl.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    nlohmann::json value = nlohmann::json::parse(line, nullptr, false);
    const std::string where = "fixture line " + std::to_string(line_no);
    if (value.is_discarded() || !value.is_object()) {
      throw Error(ErrorCode::parse, where + " is not a JSON object");
    }
    if (value.contains("strict")) {
      if (!value["strict"].is_boolean()) {
        throw Error(ErrorCode::schema_violation, where + ": 'strict' must be a boolean");
      }
      fixture.strict = value["strict"].get<bool>();
      continue;
    }
    FixtureRecord record;
    if (value.contains("match") && value["match"].is_string()) {
      record.matcher = FixtureRecord::Matcher::substring;
      record.pattern = value["match"].get<std::string>();
    } else if (value.contains("match_sha256") && value["match_sha256"].is_string()) {
      record.matcher = FixtureRecord::Matcher::sha256;
      record.pattern = text::fold_case(value["match_sha256"].get<std::string>());
    } else {
      throw Error(ErrorCode::schema_violation,
                  where + ": needs a string 'match' or 'match_sha256'");
    }
    if (!value.contains("response") || !value["response"].is_string()) {
      throw Error(ErrorCode::schema_violation, where + ": needs a string 'response'");
    }
    record.response = value["response"].get<std::string>();
    fixture.records.push_back(std::move(record));
  }
  return fixture;
}

ScriptedFixture ScriptedFixture::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open fixture file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

ScriptedBackend::ScriptedBackend(ScriptedFixture fixture, std::string id)
    : id_(std::move(id)),
      fixture_(std::move(fixture)),
      consumed_(fixture_.records.size(), false) {}

std::size_t ScriptedBackend::consumed_count() const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(std::count(consumed_.begin(), consumed_.end(), true));
}

std::vector<std::string> ScriptedBackend::prompts() const {
  std::lock_guard lock(mutex_);
  return prompts_;
}

std::string ScriptedBackend::do_complete(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  prompts_.push_back(request.prompt);
  for (std::size_t i = 0; i < fixture_.records.size(); ++i) {
    if (!consumed_[i] && fixture_.records[i].matches(request.prompt)) {
      consumed_[i] = true;
      return fixture_.records[i].response;
    }
  }
  if (fixture_.strict) {
    const auto first_line = request.prompt.substr(0, request.prompt.find('\n'));
    throw Error(ErrorCode::fixture_miss,
                "no unconsumed fixture record matches prompt starting '" + first_line +
                    "' (sha256 " + sha256_hex(request.prompt) + ")");
  }
  for (const auto& record : fixture_.records) {
    if (record.matches(request.prompt)) return record.response;
  }
  return {};
}

}  // namespace taxwb::llm
