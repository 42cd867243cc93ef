#pragma once

#include <filesystem>
#include <functional>

#include <nlohmann/json.hpp>

namespace legalstyle {

/// Parses each non-blank line of a JSONL file. Parse and schema errors
/// raised by `fn` are reported as Error(Format) with the line number.
void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const nlohmann::json&)>& fn);

}  // namespace legalstyle
