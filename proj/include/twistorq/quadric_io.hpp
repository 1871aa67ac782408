#pragma once

#include "twistorq/core.hpp"

#include <iosfwd>
#include <string>

namespace twistorq::io {

// Text format: optional "key = value" metadata lines (label, order), '#'
// comments, then 20 floats: (re, im) of entries (0,0) (0,1) (0,2) (0,3)
// (1,1) (1,2) (1,3) (2,2) (2,3) (3,3). Entries are in Twistor order unless
// "order = block" is given.
struct QuadricFile {
    Quadric q;
    std::string label;
};

QuadricFile parse_quadric(std::istream& in);
QuadricFile parse_quadric_string(const std::string& text);
QuadricFile read_quadric_file(const std::string& path);

// Writes q in Twistor order.
void write_quadric(std::ostream& out, const Quadric& q, const std::string& label = {});

// Shortest representation that round-trips (at most 17 significant digits).
std::string format_double(double x);

}  // namespace twistorq::io
