#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pdmp/targets.hpp"

namespace pdmp {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    return out;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

double parse_real(const std::string& text, const std::filesystem::path& path, std::size_t line)
{
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return value;
    } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": not a number: '" + text + "'");
    }
}

int parse_int(const std::string& text, const std::filesystem::path& path, std::size_t line)
{
    const double value = parse_real(text, path, line);
    if (value != std::floor(value)) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": not an integer: '" + text + "'");
    }
    return static_cast<int>(value);
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path, std::string& header)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open dataset: " + path.string());
    }
    if (!std::getline(in, header)) {
        throw std::runtime_error(path.string() + ": missing header row");
    }
    if (!header.empty() && header.back() == '\r') {
        header.pop_back();
    }
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        rows.push_back(split_csv(line));
    }
    return rows;
}

}  // namespace

void write_logistic_csv(const LogisticData& data, const std::filesystem::path& path)
{
    data.validate();
    auto out = open_for_write(path);
    for (std::size_t i = 0; i < data.d; ++i) {
        out << 'r' << (i + 1) << ',';
    }
    out << "label\n";
    for (std::size_t k = 0; k < data.n; ++k) {
        for (std::size_t i = 0; i < data.d; ++i) {
            out << format_real(data.covariates[k * data.d + i]) << ',';
        }
        out << data.labels[k] << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

LogisticData read_logistic_csv(const std::filesystem::path& path)
{
    std::string header;
    const auto rows = read_rows(path, header);
    const auto columns = split_csv(header);
    if (columns.size() < 2 || columns.back() != "label") {
        throw std::runtime_error(path.string() + ": logistic header must be r1,...,rd,label");
    }
    for (std::size_t i = 0; i + 1 < columns.size(); ++i) {
        if (columns[i] != "r" + std::to_string(i + 1)) {
            throw std::runtime_error(path.string() + ": unexpected column '" + columns[i] + "'");
        }
    }
    LogisticData data;
    data.d = columns.size() - 1;
    data.n = rows.size();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k].size() != columns.size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(k + 2) + ": wrong column count");
        }
        for (std::size_t i = 0; i < data.d; ++i) {
            data.covariates.push_back(parse_real(rows[k][i], path, k + 2));
        }
        data.labels.push_back(parse_int(rows[k].back(), path, k + 2));
    }
    data.validate();
    return data;
}

void write_lgcp_csv(const LgcpData& data, const std::filesystem::path& path)
{
    data.validate();
    auto out = open_for_write(path);
    out << "i,j,y,x\n";
    const std::size_t side = data.params.side;
    for (std::size_t k = 0; k < data.counts.size(); ++k) {
        out << k / side << ',' << k % side << ',' << data.counts[k] << ','
            << (data.latent.empty() ? std::string() : format_real(data.latent[k])) << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

LgcpData read_lgcp_csv(const std::filesystem::path& path, LgcpParams params)
{
    std::string header;
    const auto rows = read_rows(path, header);
    if (header != "i,j,y,x") {
        throw std::runtime_error(path.string() + ": lgcp header must be i,j,y,x");
    }
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(rows.size()))));
    if (side < 2 || side * side != rows.size()) {
        throw std::runtime_error(path.string() + ": row count is not a square grid");
    }
    params.side = side;
    LgcpData data;
    data.params = params;
    data.counts.assign(rows.size(), 0);
    bool has_latent = true;
    Vector latent(rows.size(), 0.0);
    std::vector<bool> seen(rows.size(), false);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 4) {
            throw std::runtime_error(path.string() + ":" + std::to_string(r + 2) + ": wrong column count");
        }
        const int i = parse_int(row[0], path, r + 2);
        const int j = parse_int(row[1], path, r + 2);
        if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= side || static_cast<std::size_t>(j) >= side) {
            throw std::runtime_error(path.string() + ":" + std::to_string(r + 2) + ": cell out of range");
        }
        const std::size_t k = static_cast<std::size_t>(i) * side + static_cast<std::size_t>(j);
        if (seen[k]) {
            throw std::runtime_error(path.string() + ":" + std::to_string(r + 2) + ": duplicate cell");
        }
        seen[k] = true;
        data.counts[k] = parse_int(row[2], path, r + 2);
        if (row[3].empty()) {
            has_latent = false;
        } else {
            latent[k] = parse_real(row[3], path, r + 2);
        }
    }
    if (has_latent) {
        data.latent = std::move(latent);
    }
    data.validate();
    return data;
}

}  // namespace pdmp
