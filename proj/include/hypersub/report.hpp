#pragma once

#include "hypersub/diffusion.hpp"
#include "hypersub/sublaplacian.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace hypersub {

inline constexpr int kSchemaVersion = 1;

enum class Command { VerifyIdentities, Converge, Simulate, RadialCompare };

std::string_view to_string(Command c);
Command parse_command(std::string_view name);

struct Tolerances {
  double normalization = 1e-7;
  double reeb_omega = 1e-9;
  double reeb_d_omega = 1e-7;
  double normal = 1e-9;
  double normal_order = 1.8;
  double volume = 1e-8;
  double volume_exact = 1e-12;
  double divergence = 1e-6;
  double frame_divergence = 1e-8;
  double structure = 1e-10;
  double bracket = 1e-8;
  double kernel_angle = 1e-6;
  double sublaplacian = 1e-6;
  double convergence_order = 1.5;
  double ks = 0.05;
  double hit_fraction = 0.005;
  double retraction = 1e-12;
  double moment_floor = 0.05;
  double moment_sigmas = 3.0;
};

struct RunConfig {
  Command command = Command::VerifyIdentities;
  Family family = Family::Heisenberg;
  int n = 1;
  double k = 1.0;
  std::uint64_t seed = 42;
  std::string output_dir = "hypersub-out";
  int samples = 1000;             // random points for pointwise identities
  int grid_points = 200;          // grid for normal, volume, divergence, operator checks
  int convergence_points = 60;    // grid for the eps study
  std::vector<double> eps = default_eps_schedule();
  std::vector<double> normal_eps = {0.2, 0.1, 0.05, 0.025};
  double normal_margin = 0.5;     // distance from C(S) for the N_eps rate fit
  int histogram_bins = 40;
  Tolerances tol;
  SimConfig sim;

  // Copies family/n/k/seed into `sim` and checks every field.
  void finalize();
};

// Reads a configuration document. Unknown keys and non-positive tolerances
// raise ArgumentError.
RunConfig parse_run_config(const nlohmann::ordered_json& doc);
RunConfig load_run_config(const std::string& path);
nlohmann::ordered_json to_json(const RunConfig& cfg);

enum class Relation { AtMost, AtLeast, Below };

struct CheckRecord {
  std::string name;
  std::string anchor;
  double measured;
  double threshold;
  Relation relation;
  bool pass;
};

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<bool> integral;  // per column
  std::vector<std::vector<double>> rows;
};

struct SuiteReport {
  std::string suite;
  std::string model;
  std::vector<CheckRecord> records;
  bool overall_pass = true;
  double runtime_seconds = 0.0;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<Table> tables;

  const CheckRecord& check(std::string name, std::string anchor, double measured, double threshold,
                           Relation relation = Relation::AtMost);
  const CheckRecord* find(std::string_view name) const;
};

SuiteReport verify_identities(const RunConfig& cfg);
SuiteReport converge(const RunConfig& cfg);
SuiteReport simulate(const RunConfig& cfg);
SuiteReport radial_compare(const RunConfig& cfg);
SuiteReport run_suite(const RunConfig& cfg);

// JSON with every floating value in %.16e; runtime is left out so that
// reports are byte-stable under a fixed seed.
std::string report_json(const SuiteReport& report, const RunConfig& cfg);
std::string table_csv(const Table& table);
std::string dump_scientific(const nlohmann::ordered_json& j, int indent = 2);
std::string format_double(double v);

// Writes the JSON report and every table; returns the paths written.
std::vector<std::string> write_artifacts(const SuiteReport& report, const RunConfig& cfg);
std::vector<std::string> emit_plotdata(const SuiteReport& report, const std::string& dir);

// Runs the configured suite and writes artifacts. 0: all checks pass,
// 1: a check failed, 2: configuration or I/O error.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace hypersub
