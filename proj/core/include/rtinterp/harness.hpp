#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rtinterp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

struct ExperimentConfig {
  std::string subcommand;
  int dim = 3;
  int k = 0;
  int kmax = 3;
  int m = 0;
  double p = 2.0;
  std::string family = "F1";
  /// Explicit lengths; overrides `levels` when non-empty.
  std::vector<double> h;
  /// h = 2^-1 .. 2^-levels.
  int levels = 6;
  std::string field = "smooth-trig";
  std::uint64_t seed = 1;
  double eps = 0.1;
  std::string element = "reference";
  std::string record;
  std::string bound;
  std::string path = "reference";
  std::string input;
  std::string output;
  std::string format = "csv";
};

/// CLI entry point. Exit 0 on success, 2 on validation errors, 3 on numerical
/// failures or failed verify checks.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct VerifyCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Invariant suite across all modules.
std::vector<VerifyCheck> run_verify_suite(std::uint64_t seed = 1);

}  // namespace rtinterp
