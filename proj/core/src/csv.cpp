#include "elastoplast/csv.hpp"

#include <cstdio>
#include <fstream>

namespace elastoplast::csv {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string quote_field(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

Writer::Writer(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += quote_field(header[i]);
    }
    buf_ += '\n';
}

void Writer::row(const std::vector<double>& values) {
    if (values.size() != columns_)
        throw ValidationError("csv::Writer: row width does not match header");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += format_double(values[i]);
    }
    buf_ += '\n';
}

void Writer::raw_row(const std::vector<std::string>& fields) {
    if (fields.size() != columns_)
        throw ValidationError("csv::Writer: row width does not match header");
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += quote_field(fields[i]);
    }
    buf_ += '\n';
}

void Writer::write_file(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SimulationError("csv: cannot open " + path.string() + " for writing");
    out << buf_;
}

std::string trajectory_csv(const Trajectory& traj) {
    Writer w({"t", "y", "z"});
    for (std::size_t i = 0; i < traj.size(); ++i) {
        w.row({traj.t(i), traj.states[i].y, traj.states[i].z});
    }
    return w.str();
}

std::string series_csv(const std::string& value_name, const std::vector<double>& times,
                       const std::vector<double>& values) {
    if (times.size() != values.size())
        throw ValidationError("series_csv: times/values length mismatch");
    Writer w({"t", value_name});
    for (std::size_t i = 0; i < times.size(); ++i) w.row({times[i], values[i]});
    return w.str();
}

}  // namespace elastoplast::csv
