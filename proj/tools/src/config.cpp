#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <sstream>


namespace tbnls::cli {

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << '\n';
    if (issues[i].line > 0)
      os << "line " << issues[i].line << ": ";
    else
      os << "override: ";
    os << issues[i].message;
  }
  return os.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

bool parse_double(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

template <class Int>
bool parse_int(const std::string& s, Int& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "yes" || s == "1") return out = true, true;
  if (s == "false" || s == "no" || s == "0") return out = false, true;
  return false;
}

/// Binds each known key to a setter that reports type errors.
class Binder {
 public:
  using Setter = std::function<bool(const std::string&)>;

  void add(const std::string& key, std::string type, Setter set) {
    keys_[key] = {std::move(type), std::move(set)};
  }
  bool known(const std::string& key) const { return keys_.count(key) > 0; }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : keys_) out.push_back(k);
    return out;
  }

  void apply(const std::map<std::string, Entry>& entries, std::vector<ConfigIssue>& issues) const {
    for (const auto& [key, entry] : entries) {
      const auto it = keys_.find(key);
      if (it == keys_.end()) continue;
      if (!it->second.second(entry.value))
        issues.push_back({entry.line, "'" + key + "' expects " + it->second.first + ", got '" +
                                          entry.value + "'"});
    }
  }

 private:
  std::map<std::string, std::pair<std::string, Setter>> keys_;
};

Binder make_binder(ExperimentConfig& c) {
  Binder b;
  auto real = [&b](const std::string& k, double& dst) {
    b.add(k, "a number", [&dst](const std::string& v) { return parse_double(v, dst); });
  };
  auto integer = [&b](const std::string& k, auto& dst) {
    b.add(k, "an integer", [&dst](const std::string& v) { return parse_int(v, dst); });
  };
  auto text = [&b](const std::string& k, std::string& dst) {
    b.add(k, "a name", [&dst](const std::string& v) { return !v.empty() && (dst = v, true); });
  };

  text("lattice.potential", c.lattice.potential.name);
  real("lattice.potential_depth", c.lattice.potential.depth);
  text("lattice.perturbation", c.lattice.perturbation.name);
  real("lattice.perturbation_amplitude", c.lattice.perturbation.amplitude);
  real("lattice.perturbation_length", c.lattice.perturbation.length);
  real("lattice.cell_size", c.lattice.cell_size);
  integer("lattice.N", c.lattice.num_cells);
  integer("lattice.M", c.lattice.points_per_cell);

  real("semiclassical.hbar", c.hbar);
  b.add("semiclassical.hbar_list", "a comma-separated list of numbers",
        [&c](const std::string& v) {
          std::vector<double> out;
          std::stringstream ss(v);
          for (std::string item; std::getline(ss, item, ',');) {
            double x;
            if (!parse_double(trim(item), x)) return false;
            out.push_back(x);
          }
          c.hbar_list = std::move(out);
          return !c.hbar_list.empty();
        });
  b.add("semiclassical.model", "model1, model2 or custom", [&c](const std::string& v) {
    try {
      c.model = regime_from_string(v);
      return true;
    } catch (const std::invalid_argument&) {
      return false;
    }
  });
  real("semiclassical.F", c.F);
  real("semiclassical.eta", c.eta);
  real("semiclassical.k_F", c.k_F);
  real("semiclassical.k_eta", c.k_eta);
  real("semiclassical.k_T", c.k_T);
  real("semiclassical.gamma", c.gamma);

  b.add("integrator.scheme", "kinetic-potential or bloch-exact", [&c](const std::string& v) {
    try {
      c.scheme = split_scheme_from_string(v);
      return true;
    } catch (const std::invalid_argument&) {
      return false;
    }
  });
  real("integrator.dt", c.dt);
  real("integrator.final_time", c.final_time);
  integer("integrator.monitor_stride", c.monitor_stride);
  integer("integrator.min_steps", c.min_steps);
  real("integrator.wall_budget", c.wall_budget);

  text("run.initial_state", c.initial_state);
  integer("run.initial_width", c.initial_width);
  integer("run.seed", c.seed);
  integer("run.workers", c.workers);

  text("output.directory", c.output_directory);
  b.add("output.snapshots", "true or false",
        [&c](const std::string& v) { return parse_bool(v, c.snapshots); });
  return b;
}

/// Line of the key if it was given, else 0.
int line_of(const std::map<std::string, Entry>& entries, const std::string& key) {
  const auto it = entries.find(key);
  return it == entries.end() ? 0 : it->second.line;
}

void validate(const ExperimentConfig& c, const std::map<std::string, Entry>& e,
              std::vector<ConfigIssue>& issues) {
  auto fail = [&](const std::string& key, const std::string& msg) {
    issues.push_back({line_of(e, key), msg});
  };
  const auto& pot = c.lattice.potential.name;
  if (pot != "sin2" && pot != "cos-lattice" && pot != "zero")
    fail("lattice.potential", "unknown potential '" + pot + "' (sin2, cos-lattice, zero)");
  const auto& pert = c.lattice.perturbation.name;
  if (pert != "w-cos" && pert != "w-tanh" && pert != "zero")
    fail("lattice.perturbation", "unknown perturbation '" + pert + "' (w-cos, w-tanh, zero)");
  if (c.lattice.num_cells % 2 != 0) fail("lattice.N", "N must be even");
  if (c.lattice.num_cells < 4) fail("lattice.N", "N must be at least 4");
  if (c.lattice.points_per_cell < 4 || c.lattice.points_per_cell % 2 != 0)
    fail("lattice.M", "M must be even and at least 4");
  if (!(c.lattice.cell_size > 0.0)) fail("lattice.cell_size", "cell_size must be positive");
  if (!(c.lattice.perturbation.length > 0.0))
    fail("lattice.perturbation_length", "perturbation_length must be positive");
  if (!(c.hbar > 0.0 && c.hbar <= 1.0)) fail("semiclassical.hbar", "hbar must lie in (0, 1]");
  for (std::size_t i = 0; i < c.hbar_list.size(); ++i) {
    if (!(c.hbar_list[i] > 0.0 && c.hbar_list[i] <= 1.0))
      fail("semiclassical.hbar_list", "hbar_list entries must lie in (0, 1]");
    if (i && !(c.hbar_list[i] < c.hbar_list[i - 1])) {
      fail("semiclassical.hbar_list", "hbar_list must be strictly decreasing");
      break;
    }
  }
  if (c.F < 0.0) fail("semiclassical.F", "F must be non-negative");
  if (c.k_F < 0.0) fail("semiclassical.k_F", "k_F must be non-negative");
  if (!(c.k_T > 0.0)) fail("semiclassical.k_T", "k_T must be positive");
  if (c.gamma < 0.0) fail("semiclassical.gamma", "gamma must be non-negative");
  if (c.dt < 0.0) fail("integrator.dt", "dt must be non-negative (0 selects the default)");
  if (c.final_time < 0.0)
    fail("integrator.final_time", "final_time must be non-negative (0 selects the window)");
  if (c.monitor_stride < 1) fail("integrator.monitor_stride", "monitor_stride must be >= 1");
  if (c.min_steps < 1) fail("integrator.min_steps", "min_steps must be >= 1");
  if (c.wall_budget < 0.0) fail("integrator.wall_budget", "wall_budget must be non-negative");
  if (c.initial_state != "gaussian" && c.initial_state != "random")
    fail("run.initial_state", "initial_state must be gaussian or random");
  if (c.initial_width < 1 || c.initial_width > c.lattice.num_cells)
    fail("run.initial_width", "initial_width must lie in [1, N]");
  if (c.workers < 0) fail("run.workers", "workers must be non-negative");
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  ExperimentConfig c;
  Binder binder = make_binder(c);
  std::vector<ConfigIssue> issues;
  std::map<std::string, Entry> entries;

  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        issues.push_back({line, "malformed section header '" + s + "'"});
        continue;
      }
      section = trim(s.substr(1, s.size() - 2));
      static const std::vector<std::string> known{"lattice", "semiclassical", "integrator",
                                                  "output", "run"};
      if (std::find(known.begin(), known.end(), section) == known.end())
        issues.push_back({line, "unknown section [" + section + "]"});
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      issues.push_back({line, "expected 'key = value', got '" + s + "'"});
      continue;
    }
    const std::string key = section + "." + trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty()) {
      issues.push_back({line, "key '" + trim(s.substr(0, eq)) + "' outside any section"});
      continue;
    }
    if (!binder.known(key)) {
      issues.push_back({line, "unknown key '" + key + "'"});
      continue;
    }
    const auto [it, inserted] = entries.emplace(key, Entry{value, line});
    if (!inserted)
      issues.push_back({line, "duplicate key '" + key + "' (lines " +
                                  std::to_string(it->second.line) + " and " +
                                  std::to_string(line) + ")"});
  }

  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const std::string key = trim(o.substr(0, eq));
    if (eq == std::string::npos || key.find('.') == std::string::npos) {
      issues.push_back({0, "override '" + o + "' is not of the form section.key=value"});
      continue;
    }
    if (!binder.known(key)) {
      issues.push_back({0, "unknown key '" + key + "'"});
      continue;
    }
    entries[key] = Entry{trim(o.substr(eq + 1)), 0};
  }

  binder.apply(entries, issues);
  validate(c, entries, issues);
  if (!issues.empty()) {
    std::stable_sort(issues.begin(), issues.end(),
                     [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
    throw ConfigError(std::move(issues));
  }
  return c;
}

std::string serialize(const ExperimentConfig& c) {
  std::ostringstream os;
  // shortest representation that reads back to the same double
  auto num = [](double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  os << "[lattice]\n"
     << "potential = " << c.lattice.potential.name << '\n'
     << "potential_depth = " << num(c.lattice.potential.depth) << '\n'
     << "perturbation = " << c.lattice.perturbation.name << '\n'
     << "perturbation_amplitude = " << num(c.lattice.perturbation.amplitude) << '\n'
     << "perturbation_length = " << num(c.lattice.perturbation.length) << '\n'
     << "cell_size = " << num(c.lattice.cell_size) << '\n'
     << "N = " << c.lattice.num_cells << '\n'
     << "M = " << c.lattice.points_per_cell << "\n\n";
  os << "[semiclassical]\n"
     << "hbar = " << num(c.hbar) << '\n'
     << "hbar_list = ";
  for (std::size_t i = 0; i < c.hbar_list.size(); ++i) os << (i ? ", " : "") << num(c.hbar_list[i]);
  os << '\n'
     << "model = " << to_string(c.model) << '\n'
     << "F = " << num(c.F) << '\n'
     << "eta = " << num(c.eta) << '\n'
     << "k_F = " << num(c.k_F) << '\n'
     << "k_eta = " << num(c.k_eta) << '\n'
     << "k_T = " << num(c.k_T) << '\n'
     << "gamma = " << num(c.gamma) << "\n\n";
  os << "[integrator]\n"
     << "scheme = " << to_string(c.scheme) << '\n'
     << "dt = " << num(c.dt) << '\n'
     << "final_time = " << num(c.final_time) << '\n'
     << "monitor_stride = " << c.monitor_stride << '\n'
     << "min_steps = " << c.min_steps << '\n'
     << "wall_budget = " << num(c.wall_budget) << "\n\n";
  os << "[run]\n"
     << "initial_state = " << c.initial_state << '\n'
     << "initial_width = " << c.initial_width << '\n'
     << "seed = " << c.seed << '\n'
     << "workers = " << c.workers << "\n\n";
  os << "[output]\n"
     << "directory = " << c.output_directory << '\n'
     << "snapshots = " << (c.snapshots ? "true" : "false") << '\n';
  return os.str();
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return serialize(a) == serialize(b);
}

}  // namespace tbnls::cli
