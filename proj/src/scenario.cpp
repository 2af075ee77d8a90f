#include "dai/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "dai/paths.hpp"

namespace dai {

std::string format_sig12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config file

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

double parse_double_value(const std::string& key, const std::string& raw) {
  std::string_view s = raw;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError("malformed number for key: " + key + " = '" + raw + "'");
  return v;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path.string(), path.parent_path());
}

ConfigFile ConfigFile::parse_text(std::string_view text, std::string origin,
                                  std::filesystem::path base_dir) {
  ConfigFile cfg;
  cfg.origin_ = std::move(origin);
  cfg.base_dir_ = std::move(base_dir);

  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    std::string line = trim(raw.substr(0, std::min(raw.find('#'), raw.size())));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError(cfg.origin_ + ":" + std::to_string(line_no) + ": malformed section");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(cfg.origin_ + ":" + std::to_string(line_no) +
                        ": expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty() || section.empty())
      throw ConfigError(cfg.origin_ + ":" + std::to_string(line_no) +
                        ": key outside a [section] or empty key");
    std::string full = section + "." + key;
    if (cfg.find(full) != nullptr)
      throw ConfigError(cfg.origin_ + ":" + std::to_string(line_no) + ": duplicate key " + full);
    cfg.entries_.emplace_back(std::move(full), std::move(value));
  }
  return cfg;
}

const std::string* ConfigFile::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

bool ConfigFile::has(const std::string& key) const { return find(key) != nullptr; }

std::string ConfigFile::require_string(const std::string& key) const {
  const std::string* v = find(key);
  if (v == nullptr) throw ConfigError("missing key: " + key);
  return *v;
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v != nullptr ? *v : fallback;
}

double ConfigFile::require_double(const std::string& key) const {
  return parse_double_value(key, require_string(key));
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  return v != nullptr ? parse_double_value(key, *v) : fallback;
}

std::uint64_t ConfigFile::require_u64(const std::string& key) const {
  std::string raw = require_string(key);
  std::uint64_t v = 0;
  auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size())
    throw ConfigError("malformed unsigned integer for key: " + key + " = '" + raw + "'");
  return v;
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
  const std::string* v = find(key);
  if (v == nullptr) return fallback;
  double d = parse_double_value(key, *v);
  int i = static_cast<int>(std::llround(d));
  if (d != static_cast<double>(i)) throw ConfigError("expected integer for key: " + key);
  return i;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (v == nullptr) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("expected boolean for key: " + key + " = '" + *v + "'");
}

std::vector<double> ConfigFile::require_double_list(const std::string& key) const {
  std::string raw = require_string(key);
  std::vector<double> out;
  if (raw.find(':') != std::string::npos) {
    // inclusive range start:stop:step
    double parts[3];
    std::size_t a = 0;
    for (int i = 0; i < 3; ++i) {
      std::size_t b = i < 2 ? raw.find(':', a) : raw.size();
      if (b == std::string::npos) throw ConfigError("range needs start:stop:step in " + key);
      parts[i] = parse_double_value(key, trim(std::string_view(raw).substr(a, b - a)));
      a = b + 1;
    }
    if (!(parts[2] > 0.0)) throw ConfigError("range step must be positive in " + key);
    for (double v = parts[0]; v <= parts[1] + 1e-9 * parts[2]; v += parts[2]) out.push_back(v);
  } else {
    std::size_t a = 0;
    while (a <= raw.size()) {
      std::size_t b = raw.find(',', a);
      std::string tok = trim(std::string_view(raw).substr(a, b == std::string::npos ? b : b - a));
      if (!tok.empty()) out.push_back(parse_double_value(key, tok));
      if (b == std::string::npos) break;
      a = b + 1;
    }
  }
  if (out.empty()) throw ConfigError("empty list for key: " + key);
  return out;
}

std::vector<int> ConfigFile::require_int_list(const std::string& key) const {
  std::vector<int> out;
  for (double v : require_double_list(key)) {
    int i = static_cast<int>(std::llround(v));
    if (v != static_cast<double>(i))
      throw ConfigError("expected integer list for key: " + key);
    out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scenario loading

namespace {

GeometryKind parse_geometry_kind(const std::string& name) {
  if (name == "single_diamond") return GeometryKind::SingleDiamond;
  if (name == "double_diamond") return GeometryKind::DoubleDiamond;
  if (name == "hold_diamond") return GeometryKind::HoldDiamond;
  if (name == "accel_diamond") return GeometryKind::AccelDiamond;
  throw ConfigError("unknown geometry.kind: " + name);
}

}  // namespace

Scenario load_scenario(const ConfigFile& config) {
  Scenario sc;
  sc.name = config.require_string("scenario.name");
  const std::string kind = config.require_string("scenario.kind");

  sc.lattice.wavelength = config.get_double("lattice.lambda_nm", 866.0) * 1e-9;
  sc.lattice.spacing = sc.lattice.wavelength / 2.0;
  sc.lattice.rayleigh = config.get_double("lattice.rayleigh_mm", 2.3) * 1e-3;
  sc.lattice.mass = config.get_double("lattice.mass_kg", kCsMass);
  sc.lattice.g0 = config.get_double("lattice.g0_m_s2", kStandardGravity);

  sc.timing.tau_shift = from_us(config.get_double("timing.tau_S_us", 18.0));
  sc.timing.tau_pi = from_us(config.get_double("timing.tau_pi_us", 12.0));
  if (!(sc.timing.tau_shift > 0.0) || !(sc.timing.tau_pi > 0.0))
    throw ConfigError("timing durations must be positive");

  if (kind == "diamond_scan") {
    sc.kind = ScanKind::DiamondScan;
    sc.geometry = parse_geometry_kind(config.require_string("geometry.kind"));
    if (sc.geometry != GeometryKind::SingleDiamond && sc.geometry != GeometryKind::DoubleDiamond)
      throw ConfigError("diamond_scan supports single_diamond or double_diamond");
    sc.n_list = config.require_int_list("geometry.n_list");
  } else if (kind == "hold_scan") {
    sc.kind = ScanKind::HoldScan;
    sc.geometry = GeometryKind::HoldDiamond;
    sc.n_list = config.require_int_list("geometry.n_list");
    for (double us : config.require_double_list("geometry.t_hold_list_us"))
      sc.t_hold_list.push_back(from_us(us));
  } else if (kind == "accel_scan") {
    sc.kind = ScanKind::AccelScan;
    sc.geometry = GeometryKind::AccelDiamond;
    sc.n_list = config.require_int_list("geometry.n_list");
    if (config.has("geometry.accel_list_g")) {
      for (double g : config.require_double_list("geometry.accel_list_g"))
        sc.accel_list.push_back(g * sc.lattice.g0);
    } else {
      for (double a : config.require_double_list("geometry.accel_list_m_s2"))
        sc.accel_list.push_back(a);
    }
    sc.t_acc = from_us(config.require_double("geometry.t_acc_us"));
  } else if (kind == "single") {
    sc.kind = ScanKind::Single;
    if (config.has("geometry.dsl_file")) {
      std::filesystem::path p = config.base_dir() / config.require_string("geometry.dsl_file");
      std::ifstream in(p);
      if (!in) throw ConfigError("cannot read dsl file: " + p.string());
      std::ostringstream ss;
      ss << in.rdbuf();
      sc.dsl_text = ss.str();
    } else {
      sc.geometry = parse_geometry_kind(config.require_string("geometry.kind"));
      sc.n_list = {config.get_int("geometry.n", 2)};
      sc.t_hold = from_us(config.get_double("geometry.t_hold_us", 0.0));
      sc.accel = config.get_double("geometry.accel_m_s2", 0.0);
      sc.t_acc = from_us(config.get_double("geometry.t_acc_us", 0.0));
    }
  } else {
    throw ConfigError("unknown scenario.kind: " + kind);
  }

  const std::string pot = config.get_string("potential.kind", "none");
  if (pot == "none") {
    sc.potential = PotentialModel{LinearGradientPotential{0.0}};
  } else if (pot == "linear") {
    double grad_u = 0.0;
    if (config.has("potential.gradU_Hz_per_d"))
      grad_u = kPlanck * config.require_double("potential.gradU_Hz_per_d") / sc.lattice.spacing;
    else
      grad_u = config.require_double("potential.gradU_J_per_m");
    sc.potential = PotentialModel{LinearGradientPotential{grad_u}};
  } else if (pot == "gaussian_axial") {
    GaussianBeamAxialPotential g;
    g.depth = config.require_double("potential.U0_J");
    g.x_focus = config.require_double("potential.x_focus_um") * 1e-6;
    g.rayleigh = sc.lattice.rayleigh;
    sc.potential = PotentialModel{g};
  } else {
    throw ConfigError("unknown potential.kind: " + pot);
  }

  sc.decoherence.kappa_idle = config.get_double("decoherence.kappa_idle", 0.006);
  sc.decoherence.f_shift = config.get_double("decoherence.f_shift", 0.99);
  sc.decoherence.kappa_extra = config.get_double("decoherence.kappa_extra", 0.017);
  sc.decoherence.t_hold_gauss = config.get_double("decoherence.T_hold_gauss_ms", 1.0) * 1e-3;
  sc.decoherence.gamma_loss = config.get_double("decoherence.gamma_loss", 0.05);
  sc.decoherence.initial_contrast = config.get_double("decoherence.C0", 1.0);

  sc.seed = config.require_u64("plan.seed");
  sc.noiseless = config.get_bool("plan.noiseless", false);
  sc.phi_points = config.get_int("plan.phi_points", 12);
  if (!sc.noiseless) {
    if (!config.has("plan.shots_per_point")) throw ConfigError("missing key: plan.shots_per_point");
    sc.shots_per_point = config.get_int("plan.shots_per_point", 0);
    if (sc.shots_per_point <= 0) throw ConfigError("plan.shots_per_point must be positive");
    if (sc.phi_points < 4)
      throw ConfigError("plan.phi_points must be at least 4 to fit a fringe");
  }

  for (std::size_t i = 0; i < sc.n_list.size(); ++i)
    for (std::size_t j = i + 1; j < sc.n_list.size(); ++j)
      if (sc.n_list[i] == sc.n_list[j])
        throw ConfigError("geometry.n_list entries must be unique");

  sc.write_fringes = config.get_bool("outputs.write_fringes", true);
  sc.write_paths = config.get_bool("outputs.write_paths", false);
  return sc;
}

// ---------------------------------------------------------------------------
// Running

namespace {

struct WorkItem {
  int index = 0;
  std::string label;
  int n = 0;
  double x = 0.0;  // t_hold (s) or accel (m/s^2), scan dependent
  Sequence seq;
  ExperimentResult result;
  FringeFit fit;
  bool fitted = false;
  double phi_for_summary = 0.0;  // unwrapped fit phase (or truth when noiseless)
};

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, std::max(count, 1));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string item_label(const Scenario& sc, int index, int n, double x) {
  char head[32];
  std::snprintf(head, sizeof head, "i%03d_n%02d", index, n);
  std::string label = head;
  if (sc.kind == ScanKind::HoldScan) label += "_th" + format_sig12(x * 1e6) + "us";
  if (sc.kind == ScanKind::AccelScan) label += "_a" + format_sig12(x);
  return label;
}

Sequence build_item_sequence(const Scenario& sc, int n, double x) {
  GeometrySpec spec;
  spec.kind = sc.geometry;
  spec.n_shifts = n;
  spec.probe_phase = 0.0;
  switch (sc.kind) {
    case ScanKind::HoldScan:
      spec.t_hold = x;
      break;
    case ScanKind::AccelScan:
      spec.accel = x;
      spec.t_acc = sc.t_acc;
      break;
    case ScanKind::Single:
      spec.t_hold = sc.t_hold;
      spec.accel = sc.accel;
      spec.t_acc = sc.t_acc;
      break;
    case ScanKind::DiamondScan:
      break;
  }
  return build_geometry(spec, sc.timing);
}

std::string json_bool(bool b) { return b ? "true" : "false"; }

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

double gradU_as_hz_per_d(double grad_u, double d) { return grad_u * d / kPlanck; }

}  // namespace

int run_scenario(const Scenario& scenario, const RunOptions& options) {
  const std::uint64_t seed = options.seed_override.value_or(scenario.seed);

  // Assemble the scan grid.
  std::vector<WorkItem> items;
  auto add_item = [&](int n, double x) {
    WorkItem item;
    item.index = static_cast<int>(items.size());
    item.n = n;
    item.x = x;
    items.push_back(std::move(item));
  };
  switch (scenario.kind) {
    case ScanKind::DiamondScan:
      for (int n : scenario.n_list) add_item(n, 0.0);
      break;
    case ScanKind::HoldScan:
      for (int n : scenario.n_list)
        for (double t : scenario.t_hold_list) add_item(n, t);
      break;
    case ScanKind::AccelScan:
      for (int n : scenario.n_list)
        for (double a : scenario.accel_list) add_item(n, a);
      break;
    case ScanKind::Single:
      add_item(scenario.n_list.empty() ? 0 : scenario.n_list.front(), 0.0);
      break;
  }

  // Build and validate sequences up front so configuration problems surface
  // before any expensive work.
  for (WorkItem& item : items) {
    try {
      if (scenario.kind == ScanKind::Single && scenario.dsl_text) {
        item.seq = parse_sequence(*scenario.dsl_text);
        item.n = item.seq.shift_count();
      } else {
        item.seq = build_item_sequence(scenario, item.n, item.x);
      }
    } catch (const std::exception& e) {
      throw ConfigError(std::string("cannot build sequence: ") + e.what());
    }
    std::vector<Violation> violations = validate_sequence(item.seq);
    if (!violations.empty()) {
      std::string msg = "sequence invalid:";
      for (const Violation& v : violations)
        msg += " [block " + std::to_string(v.block_index) + "] " + v.message + ";";
      throw ConfigError(msg);
    }
    item.label = item_label(scenario, item.index, item.n, item.x);
  }

  MeasurementPlan plan;
  plan.phi_grid = uniform_phase_grid(scenario.phi_points);
  plan.shots_per_point = scenario.noiseless ? 0 : scenario.shots_per_point;
  plan.seed = seed;

  const RngStream root(seed);
  parallel_for(static_cast<int>(items.size()), options.threads, [&](int i) {
    WorkItem& item = items[i];
    item.result = run_experiment(item.seq, scenario.potential, scenario.decoherence, plan,
                                 scenario.lattice, root.derive(item.index));
    if (!scenario.noiseless) {
      item.fit = fit_fringe(item.result.data, initial_fringe_guess(item.result.data));
      item.fitted = true;
      item.phi_for_summary = item.fit.phi;
    } else {
      item.phi_for_summary = item.result.truth.phi;
    }
  });

  // ----- per-kind analysis -------------------------------------------------
  std::ostringstream analysis;
  const double d = scenario.lattice.spacing;

  auto sigmas_of = [&](const std::vector<const WorkItem*>& group) {
    std::vector<double> s;
    if (scenario.noiseless) return s;
    for (const WorkItem* it : group) s.push_back(std::max(it->fit.sigma_phi(), 1e-12));
    return s;
  };

  if (scenario.kind == ScanKind::DiamondScan &&
      scenario.geometry == GeometryKind::SingleDiamond) {
    std::vector<const WorkItem*> group;
    for (const WorkItem& it : items) group.push_back(&it);
    std::vector<int> ns;
    std::vector<double> phases;
    std::vector<int> flagged;
    for (const WorkItem* it : group) ns.push_back(it->n);
    if (scenario.noiseless) {
      for (const WorkItem* it : group) phases.push_back(it->result.truth.phi);
    } else {
      std::vector<double> wrapped;
      for (const WorkItem* it : group) wrapped.push_back(it->fit.phi);
      UnwrapResult uw = unwrap_phase_series(ns, wrapped, scenario.timing, d);
      phases = uw.phases;
      flagged = uw.flagged;
      for (std::size_t i = 0; i < items.size(); ++i) items[i].phi_for_summary = phases[i];
    }
    std::vector<double> sig = sigmas_of(group);
    GradientFit gf = fit_gradient(ns, phases, sig, scenario.timing, d);
    const double truth_grad = potential_gradient(scenario.potential, 0.0, 0.0);
    analysis << "  \"analysis\": {\n"
             << "    \"type\": \"gradient_fit\",\n"
             << "    \"gradU_J_per_m\": " << format_sig12(gf.grad_u) << ",\n"
             << "    \"gradU_sigma_J_per_m\": " << format_sig12(gf.sigma) << ",\n"
             << "    \"gradU_Hz_per_d\": " << format_sig12(gradU_as_hz_per_d(gf.grad_u, d))
             << ",\n"
             << "    \"gradU_sigma_Hz_per_d\": " << format_sig12(gradU_as_hz_per_d(gf.sigma, d))
             << ",\n"
             << "    \"equivalent_g\": "
             << format_sig12(gradient_equivalent_acceleration(gf.grad_u, scenario.lattice.mass,
                                                              scenario.lattice.g0))
             << ",\n"
             << "    \"equivalent_g_sigma\": "
             << format_sig12(gradient_equivalent_acceleration(gf.sigma, scenario.lattice.mass,
                                                              scenario.lattice.g0))
             << ",\n"
             << "    \"chi2_per_dof\": " << format_sig12(gf.chi2_per_dof) << ",\n"
             << "    \"truth_gradU_J_per_m\": " << format_sig12(truth_grad) << ",\n"
             << "    \"flagged_points\": [";
    for (std::size_t i = 0; i < flagged.size(); ++i)
      analysis << (i ? "," : "") << flagged[i];
    analysis << "]\n  }";
  } else if (scenario.kind == ScanKind::HoldScan || scenario.kind == ScanKind::AccelScan) {
    const bool hold = scenario.kind == ScanKind::HoldScan;
    analysis << "  \"analysis\": {\n"
             << "    \"type\": \"" << (hold ? "hold_slopes" : "accel_slopes") << "\",\n"
             << "    \"per_n\": [\n";
    std::vector<double> slopes, slope_sigmas;
    std::vector<double> implied, implied_sigma;
    for (std::size_t gi = 0; gi < scenario.n_list.size(); ++gi) {
      const int n = scenario.n_list[gi];
      std::vector<const WorkItem*> group;
      for (const WorkItem& it : items)
        if (it.n == n) group.push_back(&it);
      std::vector<double> xs, phases;
      for (const WorkItem* it : group) xs.push_back(it->x);
      if (scenario.noiseless) {
        for (const WorkItem* it : group) phases.push_back(it->result.truth.phi);
      } else {
        std::vector<double> wrapped;
        for (const WorkItem* it : group) wrapped.push_back(it->fit.phi);
        UnwrapResult uw = unwrap_linear_series(xs, wrapped);
        phases = uw.phases;
        for (std::size_t k = 0; k < group.size(); ++k)
          items[group[k]->index].phi_for_summary = phases[k];
      }
      SlopeFit sf = fit_slope(xs, phases, sigmas_of(group));
      slopes.push_back(sf.slope);
      slope_sigmas.push_back(sf.sigma_slope);
      // slope = gradU * (n/2) * d / hbar   (hold)
      // slope = mass * (n/2) * d * t_acc / hbar   (accel)
      if (hold) {
        implied.push_back(sf.slope * kHbar / ((n / 2.0) * d));
        implied_sigma.push_back(sf.sigma_slope * kHbar / ((n / 2.0) * d));
      }
      analysis << "      {\"n\": " << n << ", \"slope\": " << format_sig12(sf.slope)
               << ", \"slope_sigma\": " << format_sig12(sf.sigma_slope)
               << ", \"intercept\": " << format_sig12(sf.intercept)
               << ", \"chi2_per_dof\": " << format_sig12(sf.chi2_per_dof);
      if (hold) {
        analysis << ", \"implied_gradU_J_per_m\": " << format_sig12(implied.back())
                 << ", \"implied_gradU_Hz_per_d\": "
                 << format_sig12(gradU_as_hz_per_d(implied.back(), d));
      } else {
        const double predicted =
            scenario.lattice.mass * (n / 2.0) * d * scenario.t_acc / kHbar;
        analysis << ", \"predicted_slope\": " << format_sig12(predicted);
      }
      analysis << "}" << (gi + 1 < scenario.n_list.size() ? "," : "") << "\n";
    }
    analysis << "    ],\n    \"slope_ratios\": [";
    for (std::size_t i = 0; i < slopes.size(); ++i)
      analysis << (i ? "," : "") << format_sig12(slopes[i] / slopes.front());
    analysis << "]";
    if (hold && !implied.empty()) {
      double sw = 0.0, swg = 0.0;
      for (std::size_t i = 0; i < implied.size(); ++i) {
        const double sigma = scenario.noiseless ? 1.0 : implied_sigma[i];
        const double w = 1.0 / (sigma * sigma);
        sw += w;
        swg += w * implied[i];
      }
      const double pooled = swg / sw;
      analysis << ",\n    \"pooled_gradU_J_per_m\": " << format_sig12(pooled)
               << ",\n    \"pooled_gradU_sigma_J_per_m\": "
               << format_sig12(scenario.noiseless ? 0.0 : std::sqrt(1.0 / sw))
               << ",\n    \"pooled_gradU_Hz_per_d\": "
               << format_sig12(gradU_as_hz_per_d(pooled, d));
    }
    analysis << "\n  }";
  } else {
    analysis << "  \"analysis\": {\"type\": \"none\"}";
  }

  // ----- numerical health check -------------------------------------------
  for (const WorkItem& item : items) {
    bool ok = std::isfinite(item.result.truth.phi) && std::isfinite(item.result.truth.contrast) &&
              std::isfinite(item.phi_for_summary);
    if (item.fitted)
      ok = ok && std::isfinite(item.fit.phi) && std::isfinite(item.fit.contrast) &&
           std::isfinite(item.fit.gamma);
    if (!ok) {
      std::fprintf(stderr, "numerical failure in item %s\n", item.label.c_str());
      return 3;
    }
  }

  // ----- artifacts ----------------------------------------------------------
  std::filesystem::create_directories(options.out_dir);
  if (scenario.write_fringes && !scenario.noiseless)
    std::filesystem::create_directories(options.out_dir / "fringes");
  if (scenario.write_paths) std::filesystem::create_directories(options.out_dir / "paths");

  {
    std::ostringstream truth;
    truth << "{\n  \"scenario\": \"" << json_escape(scenario.name) << "\",\n"
          << "  \"seed\": " << seed << ",\n  \"sequences\": [\n";
    for (std::size_t i = 0; i < items.size(); ++i) {
      const TruthRecord& t = items[i].result.truth;
      truth << "    {\"label\": \"" << items[i].label << "\", \"n\": " << items[i].n;
      if (scenario.kind == ScanKind::HoldScan)
        truth << ", \"t_hold_us\": " << format_sig12(items[i].x * 1e6);
      if (scenario.kind == ScanKind::AccelScan)
        truth << ", \"accel_m_s2\": " << format_sig12(items[i].x);
      truth << ", \"phi_rad\": " << format_sig12(t.phi)
            << ", \"contrast\": " << format_sig12(t.contrast)
            << ", \"gamma\": " << format_sig12(t.gamma)
            << ", \"spacetime_area_m_s\": " << format_sig12(t.area)
            << ", \"max_separation_m\": " << format_sig12(t.max_separation)
            << ", \"total_duration_s\": " << format_sig12(t.total_duration) << "}"
            << (i + 1 < items.size() ? "," : "") << "\n";
    }
    truth << "  ]\n}\n";
    write_file(options.out_dir / "truth.json", truth.str());
  }

  {
    std::ostringstream fits;
    fits << "{\n  \"scenario\": \"" << json_escape(scenario.name) << "\",\n"
         << "  \"seed\": " << seed << ",\n  \"fringes\": [\n";
    for (std::size_t i = 0; i < items.size(); ++i) {
      const WorkItem& item = items[i];
      fits << "    {\"label\": \"" << item.label << "\", \"n\": " << item.n;
      if (item.fitted) {
        fits << ", \"phi_rad\": " << format_sig12(item.fit.phi)
             << ", \"phi_unwrapped_rad\": " << format_sig12(item.phi_for_summary)
             << ", \"sigma_phi_rad\": " << format_sig12(item.fit.sigma_phi())
             << ", \"contrast\": " << format_sig12(item.fit.contrast)
             << ", \"gamma\": " << format_sig12(item.fit.gamma)
             << ", \"log_likelihood\": " << format_sig12(item.fit.log_likelihood)
             << ", \"converged\": " << json_bool(item.fit.converged)
             << ", \"degenerate\": " << json_bool(item.fit.degenerate)
             << ", \"iterations\": " << item.fit.iterations << ", \"covariance\": [";
        for (int r = 0; r < 3; ++r) {
          fits << (r ? "," : "") << "[";
          for (int c = 0; c < 3; ++c)
            fits << (c ? "," : "") << format_sig12(item.fit.covariance(r, c));
          fits << "]";
        }
        fits << "]";
      } else {
        fits << ", \"phi_rad\": " << format_sig12(item.result.truth.phi)
             << ", \"noiseless\": true";
      }
      fits << "}" << (i + 1 < items.size() ? "," : "") << "\n";
    }
    fits << "  ],\n" << analysis.str() << "\n}\n";
    write_file(options.out_dir / "fits.json", fits.str());
  }

  {
    std::ostringstream summary;
    summary << "scenario,n,truth_phi_rad,fit_phi_rad,fit_sigma,contrast_truth,contrast_fit";
    if (scenario.kind == ScanKind::HoldScan) summary << ",t_hold_us";
    if (scenario.kind == ScanKind::AccelScan) summary << ",accel_m_s2";
    summary << "\n";
    for (const WorkItem& item : items) {
      const TruthRecord& t = item.result.truth;
      summary << scenario.name << ',' << item.n << ',' << format_sig12(t.phi) << ','
              << format_sig12(item.phi_for_summary) << ','
              << format_sig12(item.fitted ? item.fit.sigma_phi() : 0.0) << ','
              << format_sig12(t.contrast) << ','
              << format_sig12(item.fitted ? item.fit.contrast : t.contrast);
      if (scenario.kind == ScanKind::HoldScan) summary << ',' << format_sig12(item.x * 1e6);
      if (scenario.kind == ScanKind::AccelScan) summary << ',' << format_sig12(item.x);
      summary << "\n";
    }
    write_file(options.out_dir / "summary.csv", summary.str());
  }

  if (scenario.write_fringes && !scenario.noiseless) {
    for (const WorkItem& item : items) {
      std::ostringstream csv;
      csv << "phi_rad,successes,shots\n";
      const FringeData& data = item.result.data;
      for (std::size_t i = 0; i < data.phi_grid.size(); ++i)
        csv << format_sig12(data.phi_grid[i]) << ',' << data.successes[i] << ','
            << data.shots[i] << "\n";
      write_file(options.out_dir / "fringes" / (item.label + ".csv"), csv.str());
    }
  }

  if (scenario.write_paths) {
    for (const WorkItem& item : items) {
      std::ostringstream csv;
      write_paths_csv(csv, compute_paths(item.seq, scenario.lattice));
      write_file(options.out_dir / "paths" / (item.label + ".csv"), csv.str());
    }
  }

  return 0;
}

}  // namespace dai
