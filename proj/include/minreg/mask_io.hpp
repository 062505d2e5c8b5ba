#ifndef MINREG_MASK_IO_HPP
#define MINREG_MASK_IO_HPP

#include "minreg/oracle.hpp"
#include "minreg/scanner.hpp"

#include <json.hpp>

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace minreg {

/// Shortest decimal that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw Error(ErrorKind::InvalidArgument, "bad number '" + std::string(text) + "'");
  }
  return v;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// CSV layout:
///   # sigma=2, eps0=0.1, grid=-1:3:401|-2:2:401
///   # theta_steps=2048, slack=1e-09
///   x1,x2,...,xn,member
/// Finite sets write points=<count> in place of eps0.
inline void write_mask_csv(std::ostream& out, const RegionMask& mask) {
  const auto& g = mask.grid;
  out << "# sigma=" << format_number(mask.metadata.sigma) << ", ";
  if (mask.metadata.eps0) {
    out << "eps0=" << format_number(*mask.metadata.eps0);
  } else {
    out << "points=" << mask.metadata.point_count.value_or(0);
  }
  out << ", grid=";
  for (std::size_t a = 0; a < g.counts.size(); ++a) {
    const auto i = static_cast<Eigen::Index>(a);
    if (a > 0) out << '|';
    out << format_number(g.lower[i]) << ':' << format_number(g.upper[i]) << ':' << g.counts[a];
  }
  out << "\n# theta_steps=" << mask.metadata.theta_steps
      << ", slack=" << format_number(mask.metadata.slack) << '\n';
  for (std::size_t idx = 0; idx < mask.membership.size(); ++idx) {
    const Vector p = g.point(idx);
    for (Eigen::Index i = 0; i < p.size(); ++i) out << format_number(p[i]) << ',';
    out << static_cast<int>(mask.membership[idx]) << '\n';
  }
}

/// Inverse of write_mask_csv. Point coordinates must match the header grid.
inline RegionMask read_mask_csv(std::istream& in) {
  auto bad = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, "mask csv: " + msg); };
  RegionMask mask;
  std::string line;
  bool have_grid = false;
  std::size_t idx = 0;
  while (std::getline(in, line)) {
    std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      view.remove_prefix(1);
      for (auto field : detail::split(view, ',')) {
        field = detail::trim(field);
        const auto eq = field.find('=');
        if (eq == std::string_view::npos) bad("header field without '='");
        const auto key = field.substr(0, eq);
        const auto value = field.substr(eq + 1);
        if (key == "sigma") {
          mask.metadata.sigma = parse_number(value);
        } else if (key == "eps0") {
          mask.metadata.eps0 = parse_number(value);
        } else if (key == "points") {
          mask.metadata.point_count = static_cast<std::size_t>(parse_number(value));
        } else if (key == "theta_steps") {
          mask.metadata.theta_steps = static_cast<std::size_t>(parse_number(value));
        } else if (key == "slack") {
          mask.metadata.slack = parse_number(value);
        } else if (key == "grid") {
          const auto axes = detail::split(value, '|');
          mask.grid.lower.resize(static_cast<Eigen::Index>(axes.size()));
          mask.grid.upper.resize(static_cast<Eigen::Index>(axes.size()));
          for (std::size_t a = 0; a < axes.size(); ++a) {
            const auto parts = detail::split(axes[a], ':');
            if (parts.size() != 3) bad("grid axis must be lower:upper:count");
            mask.grid.lower[static_cast<Eigen::Index>(a)] = parse_number(parts[0]);
            mask.grid.upper[static_cast<Eigen::Index>(a)] = parse_number(parts[1]);
            mask.grid.counts.push_back(static_cast<std::size_t>(parse_number(parts[2])));
          }
          mask.grid.validate();
          mask.membership.assign(mask.grid.total(), 0);
          have_grid = true;
        } else {
          bad("unknown header key '" + std::string(key) + "'");
        }
      }
      continue;
    }
    if (!have_grid) bad("data before grid header");
    if (idx >= mask.membership.size()) bad("more rows than grid points");
    const auto cells = detail::split(view, ',');
    const auto n = static_cast<std::size_t>(mask.grid.dimension());
    if (cells.size() != n + 1) bad("row " + std::to_string(idx) + " has wrong column count");
    const Vector expected = mask.grid.point(idx);
    for (std::size_t i = 0; i < n; ++i) {
      if (parse_number(cells[i]) != expected[static_cast<Eigen::Index>(i)]) {
        bad("row " + std::to_string(idx) + " does not match the grid");
      }
    }
    if (cells[n] == "1") {
      mask.membership[idx] = 1;
    } else if (cells[n] != "0") {
      bad("member flag must be 0 or 1");
    }
    ++idx;
  }
  if (!have_grid) bad("missing grid header");
  if (idx != mask.membership.size()) bad("fewer rows than grid points");
  return mask;
}

/// Binary P5 image of a 2-D mask: width = x1 samples, height = x2 samples,
/// row 0 holds the largest x2; 255 marks members.
inline void write_mask_pgm(std::ostream& out, const RegionMask& mask) {
  if (mask.grid.dimension() != 2) {
    throw Error(ErrorKind::InvalidGrid, "PGM output needs a 2-D grid");
  }
  const std::size_t width = mask.grid.counts[0];
  const std::size_t height = mask.grid.counts[1];
  out << "P5\n" << width << ' ' << height << "\n255\n";
  std::string row(width, '\0');
  for (std::size_t r = 0; r < height; ++r) {
    const std::size_t j = height - 1 - r;
    for (std::size_t c = 0; c < width; ++c) {
      row[c] = mask.membership[c * height + j] ? static_cast<char>(255) : '\0';
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

inline nlohmann::json report_to_json(const NecessityReport& report, const nlohmann::json& config,
                                     std::uint64_t seed, double sigma, double classify_sigma) {
  nlohmann::json j;
  j["config"] = config;
  j["trials"] = report.trials;
  j["falsifications"] = report.falsifications;
  j["worst_margin"] = report.worst_margin ? nlohmann::json(*report.worst_margin) : nlohmann::json();
  j["seed"] = seed;
  j["members"] = report.members;
  j["inside_set"] = report.inside_set;
  j["max_stationarity"] = report.max_stationarity;
  j["sigma"] = sigma;
  j["classify_sigma"] = classify_sigma;
  if (report.first_falsification) {
    const auto& s = *report.first_falsification;
    auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    j["first_falsification"] = {{"center", vec(s.unknown.center)},
                                {"sigma_u", s.unknown.sigma_u},
                                {"joint_minimizer", vec(s.joint_minimizer)},
                                {"best_score", s.verdict.best_score ? nlohmann::json(*s.verdict.best_score)
                                                                    : nlohmann::json()}};
  }
  return j;
}

}  // namespace minreg

#endif  // MINREG_MASK_IO_HPP
