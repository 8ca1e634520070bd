#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bargain/backends.hpp"
#include "bargain/session.hpp"

namespace bargain {

/// Everything needed to launch a session, as read from a config file.
struct RunConfig {
  SessionConfig session;
  BackendSettings backends;
};

/// Parses the JSON config format documented in the README. Relative file
/// references (human pool, demo bank) resolve against `base_dir`. Unknown
/// keys are rejected.
RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// One suggestion per non-blank line.
std::vector<std::string> load_human_pool(const std::filesystem::path& path);

}  // namespace bargain
