#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dili::report {

inline constexpr std::string_view kToolName = "dilibench";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// FNV-1a 64-bit digest, lowercase hex. Used to fingerprint report inputs;
/// not a cryptographic integrity claim.
std::string fnv1a64_hex(std::string_view bytes);

/// Digest of a file's raw bytes; throws dili::ParseError when unreadable.
std::string file_digest(const std::string& path);

/// Fixed-decimal metric formatting; absent values render as "--".
std::string format_metric(const std::optional<double>& value, int decimals = 4);
std::string format_metric(double value, int decimals = 4);

/// One-decimal percentage ("19.3").
std::string format_pct1(double value);

/// Column-aligned text table (two-space gutters, left-aligned).
class TextTable {
public:
    explicit TextTable(std::vector<std::string> headers);
    void add_row(std::vector<std::string> cells);
    std::string str() const;

private:
    std::vector<std::string> headers_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace dili::report
