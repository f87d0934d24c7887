#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "elastoplast/types.hpp"

namespace elastoplast::csv {

/// Shortest 17-significant-digit decimal form; round-trips to the same double.
[[nodiscard]] std::string format_double(double v);

/// RFC-4180-style quoting (only applied when a field needs it), `\n` line ends.
[[nodiscard]] std::string quote_field(const std::string& field);

class Writer {
public:
    explicit Writer(std::vector<std::string> header);

    void row(const std::vector<double>& values);
    void raw_row(const std::vector<std::string>& fields);

    [[nodiscard]] const std::string& str() const { return buf_; }
    void write_file(const std::filesystem::path& path) const;

private:
    std::string buf_;
    std::size_t columns_ = 0;
};

/// Trajectory export: header `t,y,z`, one row per grid point.
[[nodiscard]] std::string trajectory_csv(const Trajectory& traj);

/// Forcing or control series: header `t,<name>`.
[[nodiscard]] std::string series_csv(const std::string& value_name,
                                     const std::vector<double>& times,
                                     const std::vector<double>& values);

}  // namespace elastoplast::csv
