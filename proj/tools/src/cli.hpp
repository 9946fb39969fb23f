#pragma once

#include <phinv/error.hpp>
#include <phinv/operators.hpp>
#include <phinv/scenario.hpp>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace phinv::cli {

namespace fs = std::filesystem;

/// A module error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct Verdict {
  std::string check;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct RunReport {
  std::string command;
  std::string scenario_text;
  bool flip_lambda = false;
  std::vector<ResidualRecord> records;
  std::vector<Verdict> verdicts;
  std::vector<std::pair<std::string, double>> timings;  // seconds per stage

  bool passed() const;
  std::string to_json() const;
};

/// Residual records and verdicts of the full verification suite for one scenario.
struct CheckSuite {
  std::vector<ResidualRecord> records;
  std::vector<Verdict> verdicts;
  // observables at t1 for the first mode index
  double eps_t1 = 0.0;
  double mean_H_eta_t1 = 0.0;
};
CheckSuite run_checks(const Scenario& s, bool flip_lambda,
                      std::vector<std::pair<std::string, double>>* timings = nullptr);

RunReport cmd_solve(const Scenario& s, const fs::path& out_dir, bool flip_lambda);
RunReport cmd_verify(const Scenario& s, const fs::path& out_dir, bool flip_lambda);

/// Parameters accepted by cmd_sweep.
const std::vector<std::string>& sweep_parameters();
/// Scenario with one parameter replaced. Throws ValidationError for unsupported combinations.
Scenario with_parameter(const Scenario& s, const std::string& param, double value);
RunReport cmd_sweep(const Scenario& s, const std::string& param, const std::vector<double>& values,
                    const fs::path& out_dir, bool flip_lambda, int workers);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const fs::path& path, const std::string& content);

/// Full command-line entry point. Returns the process exit code.
int run(int argc, char** argv);

}  // namespace phinv::cli
