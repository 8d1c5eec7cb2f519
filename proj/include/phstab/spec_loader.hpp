#pragma once

#include "phstab/problem.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace phstab {

/// Reads a TOML problem file; relative csv paths resolve against the file's directory.
///
/// Throws ParseError (message carries line and column) or ValidationError listing every problem.
ProblemSpec load_spec(const std::filesystem::path& path);

ProblemSpec parse_spec(std::string_view text, const std::filesystem::path& base_dir = ".",
                       std::string_view source_name = "<string>");

/// TOML text that parse_spec reads back into an equivalent problem.
std::string to_toml(const ProblemSpec& spec);

}  // namespace phstab
