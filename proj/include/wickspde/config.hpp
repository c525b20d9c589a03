#pragma once
// Experiment configuration: flat key-value text with [section] headers, strict
// unknown-key rejection, documented defaults, and parse-time validation of the
// parameter windows each experiment relies on. Parsing never samples anything.

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "wickspde/linfield.hpp"
#include "wickspde/subordinator.hpp"

namespace wickspde {

enum class Command {
  isometry,
  covariance,
  wick_convergence,
  renorm_divergence,
  jump_continuity,
  solve_heat,
  solve_wave,
  stationary_check,
};

std::string command_name(Command c);
Command command_from_name(const std::string& name);

struct ExperimentConfig {
  Command command = Command::isometry;

  // [subordinator]
  SubordinatorSpec spec;

  // [field]
  ConvolutionKind kind = ConvolutionKind::heat;
  int order = 2;                    // Wick order k
  int cutoff = 8;                   // single-cutoff commands
  std::vector<int> cutoffs;         // study commands; empty means {cutoff}

  // [time]
  double horizon = 0.5;
  int time_cells = 32;              // uniform output cells over [0, horizon]
  double t_past = 8.0;              // stationary warm-up length

  // [norm]  (infinities are written and read as "inf")
  double alpha = -0.5;
  double p = std::numeric_limits<double>::infinity();
  double q = std::numeric_limits<double>::infinity();
  bool sup_time = false;
  double gamma = 1.0;
  double epsilon = 0.2;
  double delta = 0.5;

  // [run]
  std::size_t ensemble = 20;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_dir = "wickspde-out";

  // [solver]
  double sign = -1.0;
  double dt = 1e-3;
  int solver_cutoff = 0;            // 0 means order * cutoff
  double blowup_radius = 10.0;
  double picard_tol = 1e-9;
  int picard_max = 50;
  int max_halvings = 8;
  bool nonlinear = true;
  // inf: record the mild residual in the manifest without gating on it
  double residual_tol = std::numeric_limits<double>::infinity();
  bool emit_fields = true;

  // [points]  probe times/locations for covariance and stationary-check
  int order_m = 0;                  // 0 means same as order
  double time_s = 0.25;
  double time_t = 0.5;
  std::array<double, 2> point_x{0.0, 0.0};
  std::array<double, 2> point_y{0.0, 0.0};

  std::vector<int> resolved_cutoffs() const;
  int resolved_solver_cutoff() const;
  int resolved_order_m() const;
};

// Throws std::invalid_argument with a message naming the offending key, value,
// or violated inequality. Unknown keys and unknown sections are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical text form; parse_config(emit_config(c)) reproduces c exactly.
std::string emit_config(const ExperimentConfig& cfg);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace wickspde
