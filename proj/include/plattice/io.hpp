// CSV (RFC-4180) emission, digests, small format helpers.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace plattice {

std::string fmt_g17(double v);
std::string csv_field(const std::string& raw);  // quotes when needed

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& file);
    void row(const std::vector<std::string>& fields);
    void close();

private:
    std::ofstream f_;
};

std::string digest_hex(std::uint64_t h);
std::string string_digest(const std::string& bytes);
std::string file_digest(const std::filesystem::path& file);

}  // namespace plattice
