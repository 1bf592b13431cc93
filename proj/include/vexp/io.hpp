#pragma once

// Text formats.
//
// Grid function:
//   line 1: dim m N_1 [N_2] a_1 b_1 [a_2 b_2]
//   then one node per line (row-major, x fastest), m whitespace-separated decimals.
//
// Jump set (one jump per line):
//   1D: x j_1 ... j_m
//   2D: x1 y1 x2 y2 nu_x nu_y j_1 ... j_m

#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "vexp/grid.hpp"
#include "vexp/piecewise_bv.hpp"

namespace vexp {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

namespace detail {

inline bool parse_double(const std::string& tok, double& out) {
  const char* b = tok.data();
  const char* e = tok.data() + tok.size();
  if (b != e && *b == '+') ++b;
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

inline std::vector<double> parse_numbers(const std::vector<std::string>& toks, const std::string& source,
                                         std::size_t line_no) {
  std::vector<double> v(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i)
    if (!parse_double(toks[i], v[i])) throw ParseError(source, line_no, "not a number: '" + toks[i] + "'");
  return v;
}

}  // namespace detail

inline GridFunction read_grid_function(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  ++line_no;
  const auto toks = detail::split_ws(line);
  if (toks.size() < 2) throw ParseError(source, line_no, "header needs 'dim m N_1 [N_2] a_1 b_1 [a_2 b_2]'");
  int dim = 0;
  int m = 0;
  try {
    dim = std::stoi(toks[0]);
    m = std::stoi(toks[1]);
  } catch (const std::exception&) {
    throw ParseError(source, line_no, "dim and m must be integers");
  }
  if (dim != 1 && dim != 2) throw ParseError(source, line_no, "dim must be 1 or 2");
  if (m < 1) throw ParseError(source, line_no, "m must be >= 1");
  const std::size_t expected = 2 + dim + 2 * dim;
  if (toks.size() != expected)
    throw ParseError(source, line_no, "header has " + std::to_string(toks.size()) + " fields, expected " +
                                          std::to_string(expected));
  std::vector<int> cells(dim);
  for (int k = 0; k < dim; ++k) {
    try {
      std::size_t pos = 0;
      cells[k] = std::stoi(toks[2 + k], &pos);
      if (pos != toks[2 + k].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(source, line_no, "cell count must be an integer: '" + toks[2 + k] + "'");
    }
  }
  std::vector<Interval> ext(dim);
  for (int k = 0; k < dim; ++k) {
    double a = 0, b = 0;
    if (!detail::parse_double(toks[2 + dim + 2 * k], a) || !detail::parse_double(toks[3 + dim + 2 * k], b))
      throw ParseError(source, line_no, "interval bounds must be numbers");
    ext[k] = {a, b};
  }
  std::optional<GridDomain> domain;
  try {
    domain.emplace(ext, cells);
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, line_no, e.what());
  }
  std::vector<double> values;
  values.reserve(domain->node_count() * m);
  std::size_t nodes = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    const auto row = detail::split_ws(line);
    if (row.size() != static_cast<std::size_t>(m))
      throw ParseError(source, line_no, "expected " + std::to_string(m) + " values, got " + std::to_string(row.size()));
    if (nodes == domain->node_count()) throw ParseError(source, line_no, "more node lines than the grid has nodes");
    for (double v : detail::parse_numbers(row, source, line_no)) {
      if (!std::isfinite(v)) throw ParseError(source, line_no, "non-finite value");
      values.push_back(v);
    }
    ++nodes;
  }
  if (nodes != domain->node_count())
    throw ParseError(source, line_no, "expected " + std::to_string(domain->node_count()) + " node lines, got " +
                                          std::to_string(nodes));
  return GridFunction(*domain, m, std::move(values));
}

inline void write_grid_function(std::ostream& out, const GridFunction& u) {
  const auto& d = u.domain();
  out << d.dim() << ' ' << u.codim();
  for (int k = 0; k < d.dim(); ++k) out << ' ' << d.cells(k);
  for (int k = 0; k < d.dim(); ++k) out << ' ' << format_double(d.extent(k).lower) << ' ' << format_double(d.extent(k).upper);
  out << '\n';
  for (std::size_t i = 0; i < d.node_count(); ++i) {
    for (int a = 0; a < u.codim(); ++a) out << (a ? " " : "") << format_double(u(i, a));
    out << '\n';
  }
}

inline GridFunction load_grid_function(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_grid_function(in, path);
}

inline void save_grid_function(const std::string& path, const GridFunction& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_grid_function(out, u);
}

/// Reads a jump set for a domain of the given dimension and codimension m.
inline std::vector<JumpRecord> read_jumps(std::istream& in, int dim, int m, const std::string& source = "<stream>") {
  std::vector<JumpRecord> jumps;
  std::string line;
  std::size_t line_no = 0;
  const std::size_t geom = dim == 1 ? 1 : 6;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line) || line.front() == '#') continue;
    const auto toks = detail::split_ws(line);
    if (toks.size() != geom + m)
      throw ParseError(source, line_no, "expected " + std::to_string(geom + m) + " fields, got " +
                                            std::to_string(toks.size()));
    const auto v = detail::parse_numbers(toks, source, line_no);
    std::vector<double> jump(v.begin() + geom, v.end());
    if (dim == 1)
      jumps.push_back(JumpRecord::point(v[0], std::move(jump)));
    else
      jumps.push_back(JumpRecord::segment({v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}, std::move(jump)));
  }
  return jumps;
}

inline void write_jumps(std::ostream& out, const std::vector<JumpRecord>& jumps, int dim) {
  for (const auto& j : jumps) {
    if (dim == 1) {
      out << format_double(j.from[0]);
    } else {
      out << format_double(j.from[0]) << ' ' << format_double(j.from[1]) << ' ' << format_double(j.to[0]) << ' '
          << format_double(j.to[1]) << ' ' << format_double(j.normal[0]) << ' ' << format_double(j.normal[1]);
    }
    for (double v : j.jump) out << ' ' << format_double(v);
    out << '\n';
  }
}

inline std::vector<JumpRecord> load_jumps(const std::string& path, int dim, int m) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_jumps(in, dim, m, path);
}

}  // namespace vexp
