#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dai/decoherence.hpp"
#include "dai/estimation.hpp"
#include "dai/measurement.hpp"

namespace dai {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key-value file with [section] headers and '#' comments. Keys are
// addressed as "section.key"; duplicates are rejected.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::filesystem::path& path);
  static ConfigFile parse_text(std::string_view text, std::string origin,
                               std::filesystem::path base_dir);

  bool has(const std::string& key) const;
  std::string require_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double require_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t require_u64(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> require_int_list(const std::string& key) const;       // "a,b,c" or "a:b:step"
  std::vector<double> require_double_list(const std::string& key) const;

  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::string origin_;
  std::filesystem::path base_dir_;

  const std::string* find(const std::string& key) const;
};

enum class ScanKind { DiamondScan, HoldScan, AccelScan, Single };

struct Scenario {
  std::string name;
  ScanKind kind = ScanKind::Single;

  GeometryKind geometry = GeometryKind::SingleDiamond;
  std::vector<int> n_list;
  std::vector<double> t_hold_list;  // s, HoldScan
  std::vector<double> accel_list;   // m/s^2, AccelScan
  double t_hold = 0.0;              // s, Single with hold geometry
  double accel = 0.0;               // m/s^2, Single with accel geometry
  double t_acc = 0.0;               // s
  std::optional<std::string> dsl_text;  // Single built from a DSL file

  LatticeConfig lattice;
  TimingParams timing;
  PotentialModel potential{LinearGradientPotential{0.0}};
  DecoherenceParams decoherence;

  int phi_points = 12;
  int shots_per_point = 0;
  std::uint64_t seed = 0;
  bool noiseless = false;

  bool write_fringes = true;
  bool write_paths = false;
};

// Throws ConfigError naming the offending key.
Scenario load_scenario(const ConfigFile& config);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  int threads = 1;
  std::optional<std::uint64_t> seed_override;
};

// Runs the scenario and writes truth.json, fits.json, summary.csv and the
// per-fringe CSVs under options.out_dir. Output bytes depend only on the
// scenario and the seed, not on the thread count. Returns 0 on success and
// 3 on numerical failure; configuration problems throw ConfigError.
int run_scenario(const Scenario& scenario, const RunOptions& options);

// 12-significant-digit decimal text, the one number format used in output
// artifacts.
std::string format_sig12(double v);

}  // namespace dai
