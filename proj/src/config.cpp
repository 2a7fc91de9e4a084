#include "pce/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pce/candidates.hpp"
#include "pce/errors.hpp"

namespace pce {

namespace {

const std::vector<std::string> kExperiments = {"fig-pcerrors", "fig-conGPC",    "fig-conSC", "ode-linear",
                                               "ode-nonlinear", "window-sweep", "selftest"};
const std::vector<std::string> kMethods = {"gp", "sc", "ls", "cL2", "cl2"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int to_int(const std::string& s) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("expected an integer, got '" + s + "'");
  }
  if (used != s.size()) throw InvalidArgument("expected an integer, got '" + s + "'");
  return v;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("expected a number, got '" + s + "'");
  }
  if (used != s.size()) throw InvalidArgument("expected a number, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InvalidArgument("expected true or false, got '" + s + "'");
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split(text)) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(to_int(item));
      continue;
    }
    const int lo = to_int(trim(item.substr(0, dash)));
    const int hi = to_int(trim(item.substr(dash + 1)));
    if (hi < lo) throw InvalidArgument("empty range '" + item + "'");
    for (int k = lo; k <= hi; ++k) out.push_back(k);
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text)) out.push_back(to_double(item));
  return out;
}

void ExperimentConfig::apply(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "experiment") {
    if (std::find(kExperiments.begin(), kExperiments.end(), value) == kExperiments.end()) {
      throw InvalidArgument("unknown experiment '" + value + "'");
    }
    experiment = value;
  } else if (key == "kappa") {
    kappas = parse_int_list(value);
  } else if (key == "function") {
    function = value;
  } else if (key == "custom_coeffs") {
    custom_coeffs = parse_double_list(value);
  } else if (key == "methods" || key == "method") {
    methods = split(value);
    for (const auto& m : methods) {
      if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end()) {
        throw InvalidArgument("unknown method '" + m + "'");
      }
    }
  } else if (key == "quadrature_points") {
    quadrature_points = to_int(value);
  } else if (key == "seed") {
    try {
      seed = std::stoull(value, nullptr, 0);
    } catch (const std::exception&) {
      throw InvalidArgument("expected an unsigned seed, got '" + value + "'");
    }
  } else if (key == "out") {
    out = value;
  } else if (key == "step") {
    step = to_double(value);
  } else if (key == "horizon") {
    horizon = to_double(value);
  } else if (key == "window") {
    window = to_int(value);
  } else if (key == "window_multipliers") {
    window_multipliers = parse_int_list(value);
  } else if (key == "mc_paths") {
    const int v = to_int(value);
    if (v < 2) throw InvalidArgument("mc_paths must be at least 2");
    mc_paths = static_cast<std::size_t>(v);
  } else if (key == "max_condition") {
    max_condition = to_double(value);
    if (!(max_condition >= 1.0)) throw InvalidArgument("max_condition must be at least 1");
  } else if (key == "free_running") {
    free_running = to_bool(value);
  } else {
    throw InvalidArgument("unknown config key '" + key + "'");
  }
}

void ExperimentConfig::finalize() {
  const bool ode = experiment == "ode-linear" || experiment == "ode-nonlinear";
  if (kappas.empty()) {
    if (experiment == "window-sweep") {
      kappas = {1};
    } else if (ode) {
      kappas = {1, 2, 3};
    } else {
      for (int k = 1; k <= 10; ++k) kappas.push_back(k);
    }
  }
  if (methods.empty()) {
    if (experiment == "fig-conGPC") {
      methods = {"gp", "cL2"};
    } else if (experiment == "fig-conSC") {
      methods = {"sc", "ls", "cl2"};
    } else {
      methods = {"gp", "sc", "ls"};
    }
  }
  if (kappas.empty()) throw InvalidArgument("kappa range is empty");
  for (int k : kappas) {
    if (k < 1) throw InvalidArgument("kappa must be at least 1");
  }
  make_candidate(function, custom_coeffs);
  if (!(step > 0.0) || !(horizon > step)) throw InvalidArgument("need 0 < step < horizon");
  if (window < 1) throw InvalidArgument("window multiplier must be at least 1");
  if (window_multipliers.empty()) throw InvalidArgument("window_multipliers is empty");
  for (int m : window_multipliers) {
    if (m < 1) throw InvalidArgument("window multipliers must be at least 1");
  }
  if (quadrature_points < 0) throw InvalidArgument("quadrature_points must be non-negative");
}

std::size_t ExperimentConfig::steps() const { return static_cast<std::size_t>(std::llround(horizon / step)); }

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  ExperimentConfig config = std::move(base);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(number) + ": expected key = value");
    }
    config.apply(line.substr(0, eq), line.substr(eq + 1));
  }
  return config;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config '" + path + "'");
  return parse_config(in, std::move(base));
}

}  // namespace pce
