#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace diffcontact {

/// 9-significant-digit decimal; the single formatting used in every CSV so
/// repeated runs are byte-identical.
std::string format_sig9(double x);

/// 4-decimal fixed format matching the benchmark tables' precision.
std::string format_fixed4(double x);

/// RFC-4180-style CSV: header row then data rows, fields joined with commas
/// and terminated with \n. Fields are expected to be comma-free.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_text_file(const std::filesystem::path& path, const std::string& content);

std::string markdown_table(const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows);

}  // namespace diffcontact
