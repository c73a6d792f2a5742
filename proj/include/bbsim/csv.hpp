#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bbsim::csv {

// Shortest round-trip representation; "nan" for missing values.
std::string format(double x);
std::string format(std::optional<double> x);

double parse_double(std::string_view field);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Throws ValidationError naming the column when it is absent.
    std::size_t column(std::string_view name) const;
    std::vector<double> numeric_column(std::string_view name) const;
};

// Throws IoError when the file cannot be read.
Table read(const std::filesystem::path& path);

class Writer {
public:
    explicit Writer(const std::filesystem::path& path);
    ~Writer();
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    void row(const std::vector<std::string>& fields);
    void close();

private:
    std::filesystem::path path_;
    std::string buffer_;
    bool closed_ = false;
};

}  // namespace bbsim::csv
