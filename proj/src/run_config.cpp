#include "cnrm/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "cnrm/csv.hpp"

namespace cnrm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::string_view origin, std::size_t line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw ConfigError(os.str());
}

double parse_double(std::string_view origin, std::size_t line, std::string_view key,
                    std::string_view value) {
  const std::string v(value);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty()) {
    fail(origin, line, "key '" + std::string(key) + "': not a number: '" + v + "'");
  }
  return x;
}

std::uint64_t parse_u64(std::string_view origin, std::size_t line, std::string_view key,
                        std::string_view value) {
  const std::string v(value);
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty() || v.front() == '-') {
    fail(origin, line, "key '" + std::string(key) + "': not a nonnegative integer: '" + v + "'");
  }
  return x;
}

std::vector<std::size_t> parse_index_list(std::string_view origin, std::size_t line,
                                          std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  const std::string v(value);
  while (pos <= v.size()) {
    const std::size_t comma = v.find(',', pos);
    const std::string_view item =
        trim(std::string_view(v).substr(pos, comma == std::string::npos ? comma : comma - pos));
    if (item.empty()) {
      fail(origin, line, "key '" + std::string(key) + "': empty list entry");
    }
    out.push_back(static_cast<std::size_t>(parse_u64(origin, line, key, item)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

const char* ic_name(IcKind k) { return k == IcKind::sine ? "sine" : "const"; }
const char* bc_name(BcKind k) { return k == BcKind::zero ? "zero" : "const"; }
const char* solver_name(SolverKind k) { return k == SolverKind::direct ? "direct" : "rm"; }
const char* noise_name(NoiseKind k) { return k == NoiseKind::zero ? "zero" : "uniform"; }

}  // namespace

void RunConfig::validate() const {
  const auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError("config: " + msg);
  };
  require(std::isfinite(D) && D >= 0.0, "D must be a finite nonnegative number");
  require(std::isfinite(x_lo) && std::isfinite(x_hi) && x_hi > x_lo, "x_hi must exceed x_lo");
  require(std::isfinite(ic_value), "ic_value must be finite");
  require(std::isfinite(bc_lo_value) && std::isfinite(bc_hi_value),
          "boundary values must be finite");
  require(N >= 2, "N must be at least 2");
  require(M >= 1, "M must be at least 1");
  require(std::isfinite(t_end) && t_end > 0.0, "t_end must be positive");
  require(rm_iters >= 1, "rm_iters must be at least 1");
  require(std::isfinite(rm_gain) && rm_gain > 0.0, "rm_gain must be positive");
  require(noise_kind == NoiseKind::zero || (std::isfinite(noise_b) && noise_b > 0.0),
          "noise_b must be positive unless noise_kind = zero");
  require(std::isfinite(noise_mean_shift), "noise_mean_shift must be finite");
  require(std::isfinite(epsilon) && epsilon >= 0.0, "epsilon must be nonnegative");
  require(replications >= 2, "replications must be at least 2");
  require(!checkpoints.empty(), "checkpoints must not be empty");
  std::size_t prev = 0;
  for (std::size_t c : checkpoints) {
    require(c >= 1 && c <= rm_iters && c > prev,
            "checkpoints must be strictly increasing within [1, rm_iters]");
    prev = c;
  }
  require(k_max >= 1 && k_max <= 5000, "k_max must lie in [1, 5000]");
  require(levels >= 1, "levels must be at least 1");
  require(recursion_k >= 1 && recursion_k <= 10000, "recursion_k must lie in [1, 10000]");
  require(std::isfinite(bound_p) && bound_p >= 0.0, "bound_p must be nonnegative");
  require(std::isfinite(bound_alpha) && bound_alpha >= 0.0, "bound_alpha must be nonnegative");
  require(!out.empty(), "out must not be empty");
}

std::string RunConfig::echo() const {
  std::ostringstream os;
  os << "D = " << fmt17(D) << "\n";
  os << "x_lo = " << fmt17(x_lo) << "\n";
  os << "x_hi = " << fmt17(x_hi) << "\n";
  os << "ic = " << ic_name(ic) << "\n";
  os << "ic_value = " << fmt17(ic_value) << "\n";
  os << "bc_lo = " << bc_name(bc_lo) << "\n";
  os << "bc_lo_value = " << fmt17(bc_lo_value) << "\n";
  os << "bc_hi = " << bc_name(bc_hi) << "\n";
  os << "bc_hi_value = " << fmt17(bc_hi_value) << "\n";
  os << "N = " << N << "\n";
  os << "M = " << M << "\n";
  os << "t_end = " << fmt17(t_end) << "\n";
  os << "solver = " << solver_name(solver) << "\n";
  os << "rm_iters = " << rm_iters << "\n";
  os << "rm_gain = " << fmt17(rm_gain) << "\n";
  os << "noise_kind = " << noise_name(noise_kind) << "\n";
  os << "noise_b = " << fmt17(noise_b) << "\n";
  os << "noise_mean_shift = " << fmt17(noise_mean_shift) << "\n";
  os << "epsilon = " << fmt17(epsilon) << "\n";
  os << "replications = " << replications << "\n";
  os << "checkpoints = ";
  for (std::size_t j = 0; j < checkpoints.size(); ++j) {
    os << checkpoints[j] << (j + 1 < checkpoints.size() ? "," : "");
  }
  os << "\n";
  os << "k_max = " << k_max << "\n";
  os << "levels = " << levels << "\n";
  os << "recursion_k = " << recursion_k << "\n";
  os << "bound_p = " << fmt17(bound_p) << "\n";
  os << "bound_alpha = " << fmt17(bound_alpha) << "\n";
  os << "seed = " << seed << "\n";
  os << "out = " << out << "\n";
  return os.str();
}

std::uint64_t RunConfig::config_hash() const { return fnv1a64(echo()); }

RunConfig parse_config_text(std::string_view text, std::string_view origin) {
  RunConfig cfg;
  std::set<std::string> seen;

  using Setter = std::function<void(std::size_t, std::string_view)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"D", [&](std::size_t l, std::string_view v) { cfg.D = parse_double(origin, l, "D", v); }},
      {"x_lo",
       [&](std::size_t l, std::string_view v) { cfg.x_lo = parse_double(origin, l, "x_lo", v); }},
      {"x_hi",
       [&](std::size_t l, std::string_view v) { cfg.x_hi = parse_double(origin, l, "x_hi", v); }},
      {"ic",
       [&](std::size_t l, std::string_view v) {
         if (v == "sine") cfg.ic = IcKind::sine;
         else if (v == "const") cfg.ic = IcKind::constant;
         else fail(origin, l, "ic must be 'sine' or 'const'");
       }},
      {"ic_value",
       [&](std::size_t l, std::string_view v) {
         cfg.ic_value = parse_double(origin, l, "ic_value", v);
       }},
      {"bc_lo",
       [&](std::size_t l, std::string_view v) {
         if (v == "zero") cfg.bc_lo = BcKind::zero;
         else if (v == "const") cfg.bc_lo = BcKind::constant;
         else fail(origin, l, "bc_lo must be 'zero' or 'const'");
       }},
      {"bc_lo_value",
       [&](std::size_t l, std::string_view v) {
         cfg.bc_lo_value = parse_double(origin, l, "bc_lo_value", v);
       }},
      {"bc_hi",
       [&](std::size_t l, std::string_view v) {
         if (v == "zero") cfg.bc_hi = BcKind::zero;
         else if (v == "const") cfg.bc_hi = BcKind::constant;
         else fail(origin, l, "bc_hi must be 'zero' or 'const'");
       }},
      {"bc_hi_value",
       [&](std::size_t l, std::string_view v) {
         cfg.bc_hi_value = parse_double(origin, l, "bc_hi_value", v);
       }},
      {"N",
       [&](std::size_t l, std::string_view v) {
         cfg.N = static_cast<std::size_t>(parse_u64(origin, l, "N", v));
       }},
      {"M",
       [&](std::size_t l, std::string_view v) {
         cfg.M = static_cast<std::size_t>(parse_u64(origin, l, "M", v));
       }},
      {"t_end",
       [&](std::size_t l, std::string_view v) {
         cfg.t_end = parse_double(origin, l, "t_end", v);
       }},
      {"solver",
       [&](std::size_t l, std::string_view v) {
         if (v == "direct") cfg.solver = SolverKind::direct;
         else if (v == "rm") cfg.solver = SolverKind::rm;
         else fail(origin, l, "solver must be 'direct' or 'rm'");
       }},
      {"rm_iters",
       [&](std::size_t l, std::string_view v) {
         cfg.rm_iters = static_cast<std::size_t>(parse_u64(origin, l, "rm_iters", v));
       }},
      {"rm_gain",
       [&](std::size_t l, std::string_view v) {
         cfg.rm_gain = parse_double(origin, l, "rm_gain", v);
       }},
      {"noise_kind",
       [&](std::size_t l, std::string_view v) {
         if (v == "zero") cfg.noise_kind = NoiseKind::zero;
         else if (v == "uniform") cfg.noise_kind = NoiseKind::uniform;
         else fail(origin, l, "noise_kind must be 'zero' or 'uniform'");
       }},
      {"noise_b",
       [&](std::size_t l, std::string_view v) {
         cfg.noise_b = parse_double(origin, l, "noise_b", v);
       }},
      {"noise_mean_shift",
       [&](std::size_t l, std::string_view v) {
         cfg.noise_mean_shift = parse_double(origin, l, "noise_mean_shift", v);
       }},
      {"epsilon",
       [&](std::size_t l, std::string_view v) {
         cfg.epsilon = parse_double(origin, l, "epsilon", v);
       }},
      {"replications",
       [&](std::size_t l, std::string_view v) {
         cfg.replications = static_cast<std::size_t>(parse_u64(origin, l, "replications", v));
       }},
      {"checkpoints",
       [&](std::size_t l, std::string_view v) {
         cfg.checkpoints = parse_index_list(origin, l, "checkpoints", v);
       }},
      {"k_max",
       [&](std::size_t l, std::string_view v) {
         cfg.k_max = static_cast<std::size_t>(parse_u64(origin, l, "k_max", v));
       }},
      {"levels",
       [&](std::size_t l, std::string_view v) {
         cfg.levels = static_cast<std::size_t>(parse_u64(origin, l, "levels", v));
       }},
      {"recursion_k",
       [&](std::size_t l, std::string_view v) {
         cfg.recursion_k = static_cast<std::size_t>(parse_u64(origin, l, "recursion_k", v));
       }},
      {"bound_p",
       [&](std::size_t l, std::string_view v) {
         cfg.bound_p = parse_double(origin, l, "bound_p", v);
       }},
      {"bound_alpha",
       [&](std::size_t l, std::string_view v) {
         cfg.bound_alpha = parse_double(origin, l, "bound_alpha", v);
       }},
      {"seed",
       [&](std::size_t l, std::string_view v) { cfg.seed = parse_u64(origin, l, "seed", v); }},
      {"out", [&](std::size_t, std::string_view v) { cfg.out = std::string(v); }},
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    ++line_no;
    const std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;

    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string_view::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(origin, line_no, "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      fail(origin, line_no, "unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      fail(origin, line_no, "duplicate key '" + key + "'");
    }
    it->second(line_no, value);
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string config_header(const RunConfig& cfg, std::string_view command) {
  std::ostringstream os;
  os << "# cnrm " << command << "\n";
  os << "# config_hash = 0x" << std::hex << cfg.config_hash() << std::dec << "\n";
  os << "# seed = " << cfg.seed << "\n";
  os << "# config begin\n";
  std::istringstream echo(cfg.echo());
  std::string line;
  while (std::getline(echo, line)) os << "# " << line << "\n";
  os << "# config end\n";
  return os.str();
}

RunConfig extract_embedded_config(std::string_view csv_text) {
  std::istringstream in{std::string(csv_text)};
  std::string line;
  std::string embedded;
  bool inside = false;
  while (std::getline(in, line)) {
    if (line == "# config begin") {
      inside = true;
      continue;
    }
    if (line == "# config end") {
      inside = false;
      break;
    }
    if (inside && line.size() >= 2 && line[0] == '#' && line[1] == ' ') {
      embedded += line.substr(2);
      embedded += "\n";
    }
  }
  if (embedded.empty()) {
    throw ConfigError("no embedded config block found");
  }
  return parse_config_text(embedded, "<embedded>");
}

HeatProblem make_problem(const RunConfig& cfg) {
  HeatProblem p;
  p.diffusivity = cfg.D;
  p.x_lo = cfg.x_lo;
  p.x_hi = cfg.x_hi;
  if (cfg.ic == IcKind::sine) {
    const double lo = cfg.x_lo, width = cfg.x_hi - cfg.x_lo;
    p.initial = [lo, width](double x) {
      return std::sin(std::numbers::pi * (x - lo) / width);
    };
  } else {
    const double v = cfg.ic_value;
    p.initial = [v](double) { return v; };
  }
  const auto boundary = [](BcKind kind, double value) -> std::function<double(double)> {
    if (kind == BcKind::zero) return [](double) { return 0.0; };
    return [value](double) { return value; };
  };
  p.boundary_lo = boundary(cfg.bc_lo, cfg.bc_lo_value);
  p.boundary_hi = boundary(cfg.bc_hi, cfg.bc_hi_value);
  return p;
}

bool analytic_available(const RunConfig& cfg) {
  return cfg.ic == IcKind::sine && cfg.bc_lo == BcKind::zero && cfg.bc_hi == BcKind::zero &&
         cfg.x_lo == 0.0 && cfg.x_hi == 1.0;
}

NoiseModel make_noise(const RunConfig& cfg, std::size_t dim) {
  NoiseModel n;
  n.kind = cfg.noise_kind;
  n.bound = cfg.noise_kind == NoiseKind::zero ? 0.0 : cfg.noise_b;
  n.dim = dim;
  n.mean_shift = cfg.noise_mean_shift;
  return n;
}

RMConfig make_rm_config(const RunConfig& cfg, std::size_t dim) {
  RMConfig rm;
  rm.max_iters = cfg.rm_iters;
  rm.gain = cfg.rm_gain;
  rm.x_init.assign(dim, 0.0);
  rm.seed = cfg.seed;
  rm.checkpoints = cfg.checkpoints;
  return rm;
}

}  // namespace cnrm
