#include "sigreg/csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unordered_map>
#include <unordered_set>

#include "sigreg/common.hpp"

namespace sigreg {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_double(std::string_view field, const std::filesystem::path& file,
                    std::size_t line_no) {
    double value = 0.0;
    const auto [end, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || end != field.data() + field.size())
        throw DataError(file.string() + ":" + std::to_string(line_no) +
                        ": cannot parse number '" + std::string(field) + "'");
    return value;
}

// Strips a trailing \r so files with Windows line endings load too.
std::string_view trim_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

std::ifstream open_or_throw(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    return in;
}

}  // namespace

PathsCsv read_paths_csv(const std::filesystem::path& file) {
    std::ifstream in = open_or_throw(file);
    std::string line;
    if (!std::getline(in, line))
        throw DataError(file.string() + ": empty file");
    const auto header = split_fields(trim_cr(line));
    if (header.size() < 3 || header[0] != "sample_id" || header[1] != "time")
        throw DataError(file.string() +
                        ":1: header must be sample_id,time,c1,...");
    const std::size_t d = header.size() - 2;

    PathsCsv out;
    std::unordered_set<std::string> seen;
    std::string current_id;
    std::vector<double> times;
    std::vector<double> values;  // row-major, d per time point

    auto flush = [&](std::size_t line_no) {
        if (current_id.empty()) return;
        const auto p = static_cast<Eigen::Index>(times.size());
        Eigen::MatrixXd m(p, static_cast<Eigen::Index>(d));
        for (Eigen::Index r = 0; r < p; ++r)
            for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(d); ++c)
                m(r, c) = values[r * d + c];
        Eigen::VectorXd t =
            Eigen::Map<const Eigen::VectorXd>(times.data(), p);
        try {
            out.paths.push_back(from_matrix(std::move(m), std::move(t)));
        } catch (const DataError& e) {
            throw DataError(file.string() + ": sample '" + current_id +
                            "' (rows ending line " + std::to_string(line_no) +
                            "): " + e.what());
        }
        out.ids.push_back(current_id);
        times.clear();
        values.clear();
    };

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = trim_cr(line);
        if (trimmed.empty()) continue;
        const auto fields = split_fields(trimmed);
        if (fields.size() != d + 2)
            throw DataError(file.string() + ":" + std::to_string(line_no) +
                            ": expected " + std::to_string(d + 2) +
                            " fields, got " + std::to_string(fields.size()));
        if (fields[0].empty())
            throw DataError(file.string() + ":" + std::to_string(line_no) +
                            ": empty sample_id");
        if (fields[0] != current_id) {
            flush(line_no - 1);
            current_id = std::string(fields[0]);
            if (!seen.insert(current_id).second)
                throw DataError(file.string() + ":" + std::to_string(line_no) +
                                ": sample '" + current_id +
                                "' reappears after other samples; rows must "
                                "be grouped");
        }
        const double t = parse_double(fields[1], file, line_no);
        if (!times.empty() && t <= times.back())
            throw DataError(file.string() + ":" + std::to_string(line_no) +
                            ": times not sorted for sample '" + current_id +
                            "' (rows must be in strictly increasing time "
                            "order)");
        times.push_back(t);
        for (std::size_t c = 0; c < d; ++c)
            values.push_back(parse_double(fields[2 + c], file, line_no));
    }
    flush(line_no);
    if (out.paths.empty())
        throw DataError(file.string() + ": no data rows");
    return out;
}

Eigen::VectorXd read_targets_csv(const std::filesystem::path& file,
                                 const std::vector<std::string>& ids) {
    std::ifstream in = open_or_throw(file);
    std::string line;
    if (!std::getline(in, line))
        throw DataError(file.string() + ": empty file");
    {
        const auto header = split_fields(trim_cr(line));
        if (header.size() != 2 || header[0] != "sample_id" || header[1] != "y")
            throw DataError(file.string() + ":1: header must be sample_id,y");
    }
    std::unordered_map<std::string, double> by_id;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = trim_cr(line);
        if (trimmed.empty()) continue;
        const auto fields = split_fields(trimmed);
        if (fields.size() != 2)
            throw DataError(file.string() + ":" + std::to_string(line_no) +
                            ": expected 2 fields");
        const std::string id(fields[0]);
        if (!by_id.emplace(id, parse_double(fields[1], file, line_no)).second)
            throw DataError(file.string() + ":" + std::to_string(line_no) +
                            ": duplicate target for sample '" + id + "'");
    }
    Eigen::VectorXd y(static_cast<Eigen::Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto it = by_id.find(ids[i]);
        if (it == by_id.end())
            throw DataError(file.string() + ": no target for sample '" +
                            ids[i] + "'");
        y[static_cast<Eigen::Index>(i)] = it->second;
        by_id.erase(it);
    }
    if (!by_id.empty())
        throw DataError(file.string() + ": target for unknown sample '" +
                        by_id.begin()->first + "'");
    return y;
}

std::string format_double(double x) {
    char buf[32];  // ample: the longest shortest-form double is 24 chars
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, end);
}

std::vector<std::string> default_sample_ids(std::size_t n) {
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "s%04zu", i);
        ids.emplace_back(buf);
    }
    return ids;
}

void write_text_atomic(const std::filesystem::path& file,
                       std::string_view content) {
    if (file.has_parent_path())
        std::filesystem::create_directories(file.parent_path());
    const std::filesystem::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open " + tmp.string() + " for write");
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw DataError("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, file);
}

void write_paths_csv(const std::filesystem::path& file,
                     const std::vector<SampledPath>& paths,
                     const std::vector<std::string>& ids) {
    if (paths.size() != ids.size())
        throw ConfigError("write_paths_csv: id count mismatch");
    std::string out = "sample_id,time";
    if (!paths.empty())
        for (Eigen::Index c = 1; c <= paths.front().d(); ++c)
            out += ",c" + std::to_string(c);
    out += '\n';
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& path = paths[i];
        for (Eigen::Index r = 0; r < path.p(); ++r) {
            out += ids[i];
            out += ',';
            out += format_double(path.times[r]);
            for (Eigen::Index c = 0; c < path.d(); ++c) {
                out += ',';
                out += format_double(path.values(r, c));
            }
            out += '\n';
        }
    }
    write_text_atomic(file, out);
}

void write_targets_csv(const std::filesystem::path& file,
                       const Eigen::VectorXd& targets,
                       const std::vector<std::string>& ids) {
    if (static_cast<std::size_t>(targets.size()) != ids.size())
        throw ConfigError("write_targets_csv: id count mismatch");
    std::string out = "sample_id,y\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out += ids[i];
        out += ',';
        out += format_double(targets[static_cast<Eigen::Index>(i)]);
        out += '\n';
    }
    write_text_atomic(file, out);
}

}  // namespace sigreg
