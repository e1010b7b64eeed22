#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace qana {

/// Unicode NFC normalization. Invalid UTF-8 is rejected with
/// ErrorCode::invalid_argument.
std::string nfc(std::string_view text);

std::string_view trim(std::string_view text);

/// NFC + trim. Case is preserved.
std::string normalize_text(std::string_view text);

/// Number of code points in a UTF-8 string.
std::size_t utf8_length(std::string_view text);

/// Prefix of `text` holding at most `max_chars` code points.
std::string_view utf8_truncate(std::string_view text, std::size_t max_chars);

/// Fixed 6-significant-digit rendering used by every emitted CSV.
std::string format_number(double value);

/// UTC ISO-8601 timestamp, e.g. "2024-03-01T12:00:00Z".
std::string iso8601_utc(std::int64_t epoch_seconds);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace qana
