#include "plattice/io.hpp"

#include <cstdio>
#include <stdexcept>

#include "plattice/noise.hpp"

namespace plattice {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& file) : f_(file, std::ios::binary | std::ios::trunc) {
    if (!f_) throw std::runtime_error("CsvWriter: cannot open " + file.string());
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) f_ << ',';
        f_ << csv_field(fields[i]);
    }
    f_ << "\r\n";
}

void CsvWriter::close() {
    f_.close();
    if (f_.fail()) throw std::runtime_error("CsvWriter: write failed");
}

std::string digest_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string string_digest(const std::string& bytes) {
    return digest_hex(fnv1a64(bytes.data(), bytes.size()));
}

std::string file_digest(const std::filesystem::path& file) {
    std::ifstream f(file, std::ios::binary);
    if (!f) throw std::runtime_error("file_digest: cannot open " + file.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(f.gcount()), h);
    return digest_hex(h);
}

}  // namespace plattice
