#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace netsem {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over `path` on success.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Sibling temp directory for staging a directory that replaces `target`.
std::filesystem::path staging_dir_for(const std::filesystem::path& target);

/// Replaces `target` with the fully written `staged` directory.
void commit_dir(const std::filesystem::path& staged, const std::filesystem::path& target);

}  // namespace netsem
