#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ssanet {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Writes `header` and rows as comma-separated UTF-8 text with LF endings.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace ssanet
