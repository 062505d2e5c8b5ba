#ifndef MINREG_CLI_HPP
#define MINREG_CLI_HPP

#include "minreg/config.hpp"
#include "minreg/mask_io.hpp"
#include "minreg/oracle.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace minreg::cli {

enum ExitCode : int { kSuccess = 0, kNegative = 1, kUsage = 2 };

namespace detail {

inline std::string join(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) s += ',';
    s += format_number(v[i]);
  }
  return s;
}

inline const char* basis_name(Basis b) {
  switch (b) {
    case Basis::Interior: return "interior";
    case Basis::SetBoundary: return "set-boundary";
    case Basis::Condition: return "condition";
  }
  return "?";
}

struct Overrides {
  std::optional<std::size_t> theta_steps;
  std::optional<double> slack;
  std::optional<double> sigma;
  bool full_sweep = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--theta-steps", theta_steps, "Samples of the central-angle sweep")
        ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
    cmd.add_option("--slack", slack, "Tolerance added to -sigma")->check(CLI::NonNegativeNumber);
    cmd.add_option("--sigma-override", sigma, "Replace sigma (validate: classification only)")
        ->check(CLI::PositiveNumber);
    cmd.add_flag("--full-sweep", full_sweep, "Disable early exit and report the true sweep minimum");
  }

  void apply(EvalOptions& options) const {
    if (theta_steps) options.theta_steps = *theta_steps;
    if (slack) options.slack = *slack;
    if (full_sweep) options.early_exit = false;
  }
};

inline std::string sweep_path(const std::string& base, double eps0, double sigma) {
  const std::filesystem::path p(base);
  std::filesystem::path out = p.parent_path() /
                              (p.stem().string() + "_eps0-" + format_number(eps0) + "_sigma-" +
                               format_number(sigma) + p.extension().string());
  return out.string();
}

inline void write_mask(const RegionMask& mask, const std::string& path, const std::string& format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Config, "cannot write '" + path + "'");
  if (format == "pgm") {
    write_mask_pgm(out, mask);
  } else {
    write_mask_csv(out, mask);
  }
  if (!out) throw Error(ErrorKind::Config, "failed writing '" + path + "'");
}

}  // namespace detail

/// Runs the command line; returns the process exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Candidate-minimizer regions for known + unknown strongly convex sums", "minreg"};
  app.require_subcommand(1);

  std::string config_path;
  detail::Overrides overrides;

  auto* check = app.add_subcommand("check", "Test whether a point can be a minimizer");
  std::vector<double> point;
  check->add_option("config", config_path, "Problem file")->required();
  check->add_option("point", point, "Query coordinates")->required();
  overrides.add_to(*check);

  auto* scan = app.add_subcommand("scan", "Classify every point of the config grid");
  std::string output;
  std::string format = "csv";
  std::vector<double> sweep_radius;
  std::vector<double> sweep_sigma;
  std::size_t threads = minreg::detail::default_threads();
  scan->add_option("config", config_path, "Problem file")->required();
  scan->add_option("-o,--output", output, "Mask output path")->required();
  scan->add_option("--format", format, "csv or pgm")->check(CLI::IsMember({"csv", "pgm"}));
  scan->add_option("--sweep-radius", sweep_radius, "Ball radii to sweep (writes one mask each)")
      ->delimiter(',');
  scan->add_option("--sweep-sigma", sweep_sigma, "Sigma values to sweep")->delimiter(',');
  scan->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  overrides.add_to(*scan);

  auto* validate = app.add_subcommand("validate", "Falsification campaign for the necessary condition");
  std::size_t trials = 1000;
  std::uint64_t seed = 42;
  double multiplier_min = 1.0;
  double multiplier_max = 4.0;
  std::string report_path;
  validate->add_option("config", config_path, "Problem file")->required();
  validate->add_option("--trials", trials, "Number of sampled unknown functions");
  validate->add_option("--seed", seed, "Master seed");
  validate->add_option("--multiplier-min", multiplier_min, "Lower bound of sigma_u / sigma");
  validate->add_option("--multiplier-max", multiplier_max, "Upper bound of sigma_u / sigma");
  validate->add_option("--report", report_path, "Write the JSON report here instead of stdout");
  validate->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  overrides.add_to(*validate);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    ProblemConfig config = load_config(config_path);
    EvalOptions options = config.options;
    overrides.apply(options);

    if (check->parsed()) {
      const UncertaintySet set =
          overrides.sigma ? config.uncertainty.with_sigma(*overrides.sigma) : config.uncertainty;
      if (static_cast<Eigen::Index>(point.size()) != set.dimension()) {
        err << "point has " << point.size() << " coordinates, problem has " << set.dimension() << '\n';
        return kUsage;
      }
      const Vector x = Eigen::Map<const Vector>(point.data(), static_cast<Eigen::Index>(point.size()));
      const auto v = classify_point(config.known_function, x, set, options);
      out << (v.member ? "member" : "non-member") << '\n';
      out << "basis: " << detail::basis_name(v.basis) << '\n';
      out << "best_score: " << (v.best_score ? format_number(*v.best_score) : "none") << '\n';
      out << "threshold: " << format_number(-set.sigma() + options.slack) << '\n';
      if (v.witness) {
        out << "witness.x_u: " << detail::join(v.witness->x_u) << '\n';
        out << "witness.g: " << detail::join(v.witness->g) << '\n';
        if (v.witness->theta) out << "witness.theta: " << format_number(*v.witness->theta) << '\n';
        if (v.witness->truncated) out << "witness.truncated: true\n";
      }
      return v.member ? kSuccess : kNegative;
    }

    if (scan->parsed()) {
      if (!config.grid) {
        err << "config has no grid\n";
        return kUsage;
      }
      if (format == "pgm" && config.grid->dimension() != 2) {
        err << "pgm output needs a 2-D grid\n";
        return kUsage;
      }
      const bool sweeping = !sweep_radius.empty() || !sweep_sigma.empty();
      if (!sweep_radius.empty() && !config.uncertainty.ball()) {
        err << "--sweep-radius needs a ball uncertainty set\n";
        return kUsage;
      }
      for (double v : sweep_radius) {
        if (!(v > 0.0)) {
          err << "sweep radii must be positive\n";
          return kUsage;
        }
      }
      for (double v : sweep_sigma) {
        if (!(v > 0.0)) {
          err << "sweep sigmas must be positive\n";
          return kUsage;
        }
      }
      const double base_sigma = overrides.sigma.value_or(config.uncertainty.sigma());
      std::vector<double> radii = sweep_radius;
      if (radii.empty()) radii.push_back(config.uncertainty.ball() ? config.uncertainty.ball()->radius() : 0.0);
      std::vector<double> sigmas = sweep_sigma.empty() ? std::vector<double>{base_sigma} : sweep_sigma;

      for (double radius : radii) {
        for (double sigma : sigmas) {
          UncertaintySet set = config.uncertainty.with_sigma(sigma);
          if (const auto* ball = config.uncertainty.ball()) set = UncertaintySet(Ball(ball->center(), radius), sigma);
          const auto start = std::chrono::steady_clock::now();
          const RegionMask mask = scan_region(config.known_function, set, *config.grid, options, threads);
          const double seconds =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          const std::string path = sweeping ? detail::sweep_path(output, radius, sigma) : output;
          detail::write_mask(mask, path, format);
          out << path << ": " << mask.member_count() << " / " << mask.membership.size()
              << " members, grid ";
          for (std::size_t a = 0; a < mask.grid.counts.size(); ++a) {
            out << (a ? "x" : "") << mask.grid.counts[a];
          }
          out << ", " << seconds << " s\n";
        }
      }
      return kSuccess;
    }

    // validate
    if (trials < 1) {
      err << "--trials must be >= 1\n";
      return kUsage;
    }
    if (!(multiplier_min >= 1.0) || !(multiplier_max >= multiplier_min)) {
      err << "multiplier range must satisfy 1 <= min <= max\n";
      return kUsage;
    }
    NecessityConfig nc;
    nc.trials = trials;
    nc.seed = seed;
    nc.multiplier_range = {multiplier_min, multiplier_max};
    nc.classify_sigma = overrides.sigma;
    nc.options = options;
    nc.threads = threads;
    const double sigma = config.uncertainty.sigma();
    const NecessityReport report = validate_necessity(config.known_function, config.uncertainty, sigma, nc);
    const auto json = report_to_json(report, config.source, seed, sigma, overrides.sigma.value_or(sigma));
    if (report_path.empty()) {
      out << json.dump(2) << '\n';
    } else {
      std::ofstream file(report_path);
      if (!file) {
        err << "cannot write '" << report_path << "'\n";
        return kUsage;
      }
      file << json.dump(2) << '\n';
      out << "trials " << report.trials << ", falsifications " << report.falsifications << '\n';
    }
    return report.passed() ? kSuccess : kNegative;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace minreg::cli

#endif  // MINREG_CLI_HPP
