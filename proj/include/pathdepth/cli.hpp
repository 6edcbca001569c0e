#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace pathdepth::cli {

/// Process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;  // bad flags, unreadable config or missing input files
inline constexpr int kExitData = 3;   // bad data or a failed fit

struct GridManifestEntry {
  std::filesystem::path dtm;
  std::filesystem::path dsm;
};

/// Parses `city,dtm_path,dsm_path` lines; '#' starts a comment. Relative
/// paths resolve against `base_dir`.
std::map<std::string, GridManifestEntry> parse_grid_manifest(const std::string& text,
                                                             const std::filesystem::path& base_dir);

/// Hex SHA-256 of a file's contents.
std::string file_digest(const std::filesystem::path& path);

/// Entry point shared by the executable and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pathdepth::cli
