#include "bbsim/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bbsim/errors.hpp"

namespace bbsim::csv {

std::string format(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string format(std::optional<double> x) { return x ? format(*x) : std::string("nan"); }

double parse_double(std::string_view field) {
    double x = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), x);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ValidationError(std::string(field), "not a number");
    return x;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw ValidationError(std::string(name), "missing column");
}

std::vector<double> Table::numeric_column(std::string_view name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        if (c >= r.size()) throw ValidationError(std::string(name), "row too short");
        out.push_back(parse_double(r[c]));
    }
    return out;
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file " + path.string());
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.rows.push_back(split(line));
    }
    return t;
}

Writer::Writer(const std::filesystem::path& path) : path_(path) {}

Writer::~Writer() {
    try {
        close();
    } catch (...) {
    }
}

void Writer::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += fields[i];
    }
    buffer_ += '\n';
}

void Writer::close() {
    if (closed_) return;
    closed_ = true;
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    out << buffer_;
    if (!out) throw IoError("cannot write " + path_.string());
}

}  // namespace bbsim::csv
