#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace horseshoe::cli {

inline constexpr int kExitYes = 0;
inline constexpr int kExitNo = 1;
inline constexpr int kExitUnknown = 2;
inline constexpr int kExitUsage = 64;

// Everything a run depends on. Artifacts embed config_json(config), so a
// run can be replayed from its own output.
struct RunConfig {
  std::string subcommand;
  // Either an explicit descriptor or the normal form x^d + c - a y.
  std::string map;
  std::string a = "1";
  std::string c = "-10";
  int d = 2;

  int horizon = 100;
  int depth = 12;
  int resolution = 512;
  int grid = 160;
  int order = 30;
  double tol = 1e-10;
  double alpha = 0.0;  // 0 selects the library default
  double gamma = 1.0;
  double R = 0.0;      // 0 selects a radius from the map

  std::string method = "inequality";  // certify
  int max_period = 12;                // cycles
  int period = 1;                     // enumerate
  int k = 1;                          // homoclinic saddle period
  int saddle = 0;                     // index into the saddles found
  std::string x = "0";                // itinerary point
  std::string y = "0";
  int back = -1;  // -1: depth / 2
  int fwd = -1;
  std::string plane = "fix-y";  // slice
  std::string fixed = "0";
  std::string center = "0";
  double radius = 0.0;  // slice half-width; 0 uses R

  std::string out;  // primary artifact; empty writes to stdout
  std::string csv;
  std::string ppm;
  std::uint64_t seed = 1;
  int workers = 0;
  bool timing = false;
};

// JSON with a fixed key order; excludes the worker count, which never
// changes results.
std::string config_json(const RunConfig& config);

// Runs one subcommand; returns the exit code.
int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv (long flags only) and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace horseshoe::cli
