#include "efr/csvio.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "efr/errors.hpp"

namespace efr {

std::string format_full(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& tok, const std::string& path, std::size_t lineno) {
    if (tok.empty())
        throw data_error(path + ":" + std::to_string(lineno) + ": empty numeric field");
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || errno == ERANGE)
        throw data_error(path + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
    return v;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw data_error("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty())
        lines.pop_back();
    if (lines.empty())
        throw data_error(path + ": empty file");
    return lines;
}

} // namespace

CurveSample read_curves(const std::string& path) {
    auto lines = read_lines(path);
    auto head = split_line(lines[0]);
    if (head.size() < 3 || head[0] != "id")
        throw data_error(path + ": curves header must be 'id,<s_1>,...,<s_S>' with S >= 2");
    std::vector<double> pts;
    pts.reserve(head.size() - 1);
    for (std::size_t j = 1; j < head.size(); ++j)
        pts.push_back(parse_number(head[j], path, 1));
    auto grid = make_grid(pts);

    std::vector<std::string> ids;
    std::vector<Curve> curves;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty())
            continue;
        auto tok = split_line(lines[r]);
        if (tok.size() != head.size())
            throw data_error(path + ":" + std::to_string(r + 1) + ": expected " +
                             std::to_string(head.size()) + " fields, got " +
                             std::to_string(tok.size()));
        if (tok[0].empty())
            throw data_error(path + ":" + std::to_string(r + 1) + ": empty id");
        ids.push_back(tok[0]);
        std::vector<double> row(tok.size() - 1);
        for (std::size_t j = 1; j < tok.size(); ++j)
            row[j - 1] = parse_number(tok[j], path, r + 1);
        curves.push_back(make_curve(grid, std::move(row)));
    }
    if (curves.empty())
        throw data_error(path + ": no curve rows");
    return make_sample(grid, std::move(curves), std::move(ids));
}

void write_curves(const std::string& path, const CurveSample& sample) {
    std::ofstream out(path);
    if (!out)
        throw data_error("cannot write " + path);
    out << "id";
    for (double s : sample.grid->points)
        out << ',' << format_full(s);
    out << '\n';
    for (std::size_t i = 0; i < sample.n(); ++i) {
        out << (sample.ids.empty() ? "c" + std::to_string(i + 1) : sample.ids[i]);
        for (double v : sample.curves[i].values)
            out << ',' << format_full(v);
        out << '\n';
    }
}

std::vector<double> read_responses(const std::string& path, const CurveSample& sample) {
    auto lines = read_lines(path);
    auto head = split_line(lines[0]);
    if (head.size() != 2 || head[0] != "id" || head[1] != "y")
        throw data_error(path + ": responses header must be 'id,y'");
    std::unordered_map<std::string, double> by_id;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty())
            continue;
        auto tok = split_line(lines[r]);
        if (tok.size() != 2)
            throw data_error(path + ":" + std::to_string(r + 1) + ": expected 2 fields");
        if (!by_id.emplace(tok[0], parse_number(tok[1], path, r + 1)).second)
            throw data_error(path + ": duplicate id '" + tok[0] + "'");
    }
    if (sample.ids.size() != sample.n())
        throw data_error("curve sample carries no ids to join responses on");
    std::vector<double> y;
    y.reserve(sample.n());
    for (const auto& id : sample.ids) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw data_error(path + ": no response for curve id '" + id + "'");
        y.push_back(it->second);
    }
    if (by_id.size() != sample.n())
        throw data_error(path + ": has " + std::to_string(by_id.size()) +
                         " responses for " + std::to_string(sample.n()) + " curves");
    return y;
}

void write_responses(const std::string& path, const std::vector<std::string>& ids,
                     const std::vector<double>& y) {
    if (ids.size() != y.size())
        throw data_error("ids/values size mismatch writing " + path);
    std::ofstream out(path);
    if (!out)
        throw data_error("cannot write " + path);
    out << "id,y\n";
    for (std::size_t i = 0; i < ids.size(); ++i)
        out << ids[i] << ',' << format_full(y[i]) << '\n';
}

} // namespace efr
