#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dai/paths.hpp"
#include "dai/scenario.hpp"

namespace {

int cmd_run(const std::string& config_path, const dai::RunOptions& options) {
  try {
    dai::ConfigFile config = dai::ConfigFile::parse_file(config_path);
    dai::Scenario scenario = dai::load_scenario(config);
    return dai::run_scenario(scenario, options);
  } catch (const dai::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}

int cmd_validate(const std::string& path, bool as_dsl) {
  const bool dsl = as_dsl || std::filesystem::path(path).extension() == ".dsl";
  try {
    if (dsl) {
      std::ifstream in(path);
      if (!in) {
        std::fprintf(stderr, "cannot read %s\n", path.c_str());
        return 2;
      }
      std::ostringstream ss;
      ss << in.rdbuf();
      dai::Sequence seq = dai::parse_sequence(ss.str());
      auto violations = dai::validate_sequence(seq);
      if (violations.empty()) {
        std::printf("ok: %d blocks, %d shifts, total %s s\n",
                    static_cast<int>(seq.blocks.size()), seq.shift_count(),
                    dai::format_sig12(seq.total_duration()).c_str());
        return 0;
      }
      for (const auto& v : violations)
        std::printf("violation [block %d]: %s\n", v.block_index, v.message.c_str());
      return 2;
    }
    dai::ConfigFile config = dai::ConfigFile::parse_file(path);
    dai::Scenario scenario = dai::load_scenario(config);
    std::printf("ok: scenario '%s'\n", scenario.name.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "invalid: %s\n", e.what());
    return 2;
  }
}

struct OracleArgs {
  int n = 12;
  double grad_hz_per_d = 0.0;
  double grad_j_per_m = 0.0;
  double t_hold_us = 0.0;
  double accel_g = 0.0;
  double accel_m_s2 = 0.0;
  double t_acc_us = 0.0;
  double tau_s_us = 18.0;
  double tau_pi_us = 12.0;
};

int cmd_oracle(const OracleArgs& args) {
  dai::LatticeConfig lat;
  dai::TimingParams timing;
  timing.tau_shift = dai::from_us(args.tau_s_us);
  timing.tau_pi = dai::from_us(args.tau_pi_us);

  const double grad_u = args.grad_hz_per_d != 0.0
                            ? dai::kPlanck * args.grad_hz_per_d / lat.spacing
                            : args.grad_j_per_m;
  const double accel = args.accel_g != 0.0 ? args.accel_g * lat.g0 : args.accel_m_s2;

  try {
    auto print = [](const char* key, double v) {
      std::printf("%s = %s\n", key, dai::format_sig12(v).c_str());
    };
    const double phi_diamond =
        dai::closed_form_diamond_phase(args.n, grad_u, timing, lat.spacing);
    print("gradU_J_per_m", grad_u);
    print("phi_diamond_rad", phi_diamond);
    double total = phi_diamond;
    if (args.t_hold_us > 0.0) {
      const double phi_hold = dai::closed_form_hold_phase(
          args.n, grad_u, dai::from_us(args.t_hold_us), lat.spacing);
      print("phi_hold_rad", phi_hold);
      total += phi_hold;
    }
    if (args.t_acc_us > 0.0) {
      const double phi_acc = dai::closed_form_acceleration_phase(
          args.n, lat.mass, accel, dai::from_us(args.t_acc_us), lat.spacing);
      print("phi_accel_rad", phi_acc);
      total += phi_acc;
    }
    print("phi_total_rad", total);
    print("gradient_equivalent_g",
          dai::gradient_equivalent_acceleration(grad_u, lat.mass, lat.g0));
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dai: digital single-atom interferometer simulator"};
  app.require_subcommand(1);

  std::string config_path;
  dai::RunOptions options;
  std::optional<std::uint64_t> seed;
  int threads = 1;

  CLI::App* run = app.add_subcommand("run", "run a scenario config and write artifacts");
  run->add_option("config", config_path, "scenario config file")->required();
  run->add_option("--out-dir", options.out_dir, "output directory (default: out)");
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt = run->add_option("--seed", seed_value, "override the config seed");
  run->add_option("--threads", threads, "worker threads (default: 1)");

  std::string validate_path;
  bool as_dsl = false;
  CLI::App* validate = app.add_subcommand("validate", "validate a config or DSL sequence file");
  validate->add_option("path", validate_path, "config or .dsl file")->required();
  validate->add_flag("--dsl", as_dsl, "treat the file as a DSL sequence");

  OracleArgs oracle;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "print closed-form phases");
  oracle_cmd->add_option("--n", oracle.n, "total shift count (even)");
  oracle_cmd->add_option("--grad-hz-per-d", oracle.grad_hz_per_d, "gradient in Hz per site");
  oracle_cmd->add_option("--grad-j-per-m", oracle.grad_j_per_m, "gradient in J/m");
  oracle_cmd->add_option("--t-hold-us", oracle.t_hold_us, "hold time in us");
  oracle_cmd->add_option("--accel-g", oracle.accel_g, "lattice acceleration in g");
  oracle_cmd->add_option("--accel-m-s2", oracle.accel_m_s2, "lattice acceleration in m/s^2");
  oracle_cmd->add_option("--t-acc-us", oracle.t_acc_us, "acceleration time in us");
  oracle_cmd->add_option("--tau-s-us", oracle.tau_s_us, "shift duration in us");
  oracle_cmd->add_option("--tau-pi-us", oracle.tau_pi_us, "pi pulse duration in us");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (seed_opt->count() > 0) options.seed_override = seed_value;
    options.threads = threads;
    return cmd_run(config_path, options);
  }
  if (validate->parsed()) return cmd_validate(validate_path, as_dsl);
  if (oracle_cmd->parsed()) return cmd_oracle(oracle);
  return 1;
}
