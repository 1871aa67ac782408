#include "twistorq/quadric_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace twistorq::io {

namespace {

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

QuadricFile parse_quadric(std::istream& in)
{
    QuadricFile f;
    Order order = Order::Twistor;
    std::vector<double> nums;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq != std::string::npos) {
            std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
            if (key == "label") {
                f.label = value;
            } else if (key == "order") {
                if (value == "twistor")
                    order = Order::Twistor;
                else if (value == "block")
                    order = Order::Block;
                else
                    throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": unknown order '" + value + "'");
            } else {
                throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
            }
            continue;
        }
        for (char& c : line)
            if (c == ',')
                c = ' ';
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) {
            std::size_t used = 0;
            double v;
            try {
                v = std::stod(tok, &used);
            } catch (const std::logic_error&) {
                used = 0;
            }
            if (used != tok.size())
                throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": bad number '" + tok + "'");
            if (!std::isfinite(v))
                throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": non-finite value");
            nums.push_back(v);
        }
    }
    if (nums.size() != 20)
        throw Error(ErrorKind::Parse, "expected 20 numbers, found " + std::to_string(nums.size()));
    Mat4 m;
    int k = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j, k += 2)
            m(i, j) = m(j, i) = cd(nums[k], nums[k + 1]);
    f.q = to_order({m, order}, Order::Twistor);
    return f;
}

QuadricFile parse_quadric_string(const std::string& text)
{
    std::istringstream in(text);
    return parse_quadric(in);
}

QuadricFile read_quadric_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Parse, "cannot open '" + path + "'");
    return parse_quadric(in);
}

void write_quadric(std::ostream& out, const Quadric& q, const std::string& label)
{
    Mat4 m = convert(q.m, q.order, Order::Twistor);
    if (!label.empty())
        out << "label = " << label << '\n';
    out << "order = twistor\n";
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j)
            out << format_double(m(i, j).real()) << ' ' << format_double(m(i, j).imag()) << "  # (" << i << ','
                << j << ")\n";
}

std::string format_double(double x)
{
    if (x == 0)
        x = 0.0;  // no "-0"
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace twistorq::io
