#pragma once

#include <string>
#include <vector>

namespace dynabe {

/// Shortest decimal form that parses back to the same double. Used for every
/// numeric value we persist, so written artifacts are byte-stable and exact
/// on re-read.
std::string format_double(double v);

/// Writes rows as CSV (simple comma separation; our column names and values
/// never contain commas or quotes).
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// FNV-1a 64-bit content hash, hex-encoded. Guards persisted bundles against
/// accidental edits, not adversaries.
std::string content_hash(const std::string& bytes);

}  // namespace dynabe
