#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <string>

#include "iapg/experiments.hpp"

namespace iapg {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': expected a real number, got '" + value + "'");
  }
  return out;
}

long long to_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
  }
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + value +
                      "'");
  }
  return out;
}

void require(bool ok, const std::string& key, const char* what) {
  if (!ok) throw ConfigError("config key '" + key + "': " + what);
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

RunConfig run_config_from(const std::map<std::string, std::string>& kv, bool allow_problem_key) {
  RunConfig cfg;
  cfg.solver.eps_stat = 1e-8;
  cfg.solver.E0 = 64;
  cfg.solver.p = 2;
  cfg.solver.rho = 1;
  cfg.solver.r = 1.0 / 16.0;
  cfg.solver.s = 1024;
  cfg.solver.inner_s = 4096;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"problem",
       [&](const std::string& k, const std::string& v) {
         require(allow_problem_key, k, "not accepted by this command");
         require(v == "tv" || v == "sparse_l1", k, "must be 'tv' or 'sparse_l1'");
         cfg.problem = v;
       }},
      {"n",
       [&](const std::string& k, const std::string& v) {
         const auto n = to_integer(k, v);
         require(n >= 2, k, "must be >= 2");
         cfg.tv.n = n;
         cfg.sparse_n = n;
       }},
      {"l",
       [&](const std::string& k, const std::string& v) {
         const auto l = to_integer(k, v);
         require(l >= 1, k, "must be >= 1");
         cfg.tv.l = l;
       }},
      {"eta",
       [&](const std::string& k, const std::string& v) {
         cfg.tv.eta = to_double(k, v);
         require(cfg.tv.eta > 0, k, "must be positive");
       }},
      {"lam_box",
       [&](const std::string& k, const std::string& v) {
         cfg.tv.lam_box = to_double(k, v);
         require(cfg.tv.lam_box >= 0, k, "must be nonnegative");
       }},
      {"sigma",
       [&](const std::string& k, const std::string& v) {
         cfg.tv.sigma = to_double(k, v);
         require(cfg.tv.sigma >= 0, k, "must be nonnegative");
       }},
      {"seed", [&](const std::string& k, const std::string& v) { cfg.tv.seed = to_unsigned(k, v); }},
      {"blur",
       [&](const std::string& k, const std::string& v) {
         require(v == "box" || v == "identity", k, "must be 'box' or 'identity'");
         cfg.tv.identity_blur = v == "identity";
       }},
      {"lambda",
       [&](const std::string& k, const std::string& v) {
         cfg.sparse_lambda = to_double(k, v);
         require(cfg.sparse_lambda > 0, k, "must be positive");
       }},
      {"E0",
       [&](const std::string& k, const std::string& v) {
         cfg.solver.E0 = to_double(k, v);
         require(cfg.solver.E0 > 0, k, "must be positive");
       }},
      {"p",
       [&](const std::string& k, const std::string& v) {
         cfg.solver.p = to_double(k, v);
         require(cfg.solver.p > 1, k, "must exceed 1");
       }},
      {"rho",
       [&](const std::string& k, const std::string& v) {
         cfg.solver.rho = to_double(k, v);
         require(cfg.solver.rho > 0, k, "must be positive");
       }},
      {"r",
       [&](const std::string& k, const std::string& v) {
         cfg.solver.r = to_double(k, v);
         require(cfg.solver.r > 0 && cfg.solver.r <= 1, k, "must lie in (0, 1]");
       }},
      {"s_inner",
       [&](const std::string& k, const std::string& v) {
         const auto s = to_integer(k, v);
         require(s >= 1, k, "must be >= 1");
         cfg.solver.inner_s = static_cast<int>(s);
       }},
      {"s_outer",
       [&](const std::string& k, const std::string& v) {
         const auto s = to_integer(k, v);
         require(s >= 1, k, "must be >= 1");
         cfg.solver.s = static_cast<int>(s);
       }},
      {"B0",
       [&](const std::string& k, const std::string& v) {
         cfg.solver.B0 = to_double(k, v);
         require(cfg.solver.B0 > 0, k, "must be positive");
         cfg.auto_B0 = false;
       }},
      {"eps",
       [&](const std::string& k, const std::string& v) {
         cfg.solver.eps_stat = to_double(k, v);
         require(cfg.solver.eps_stat > 0, k, "must be positive");
       }},
      {"max_iters",
       [&](const std::string& k, const std::string& v) {
         cfg.solver.max_iters = to_integer(k, v);
         require(cfg.solver.max_iters >= 1, k, "must be >= 1");
       }},
      {"inner_max_iters",
       [&](const std::string& k, const std::string& v) {
         cfg.solver.inner_max_iters = to_integer(k, v);
         require(cfg.solver.inner_max_iters >= 1, k, "must be >= 1");
       }},
  };

  for (const auto& [key, value] : kv) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(key, value);
  }
  if (cfg.problem == "tv") {
    require(cfg.tv.identity_blur || cfg.tv.l <= cfg.tv.n, "l", "must not exceed n");
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, bool allow_problem_key) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  return run_config_from(parse_key_values(in), allow_problem_key);
}

std::string config_help() {
  std::ostringstream os;
  os << "Config file: one `key = value` per line, `#` starts a comment. Unknown keys are errors.\n"
        "  problem          tv | sparse_l1          (solve only; default tv)\n"
        "  n                integer >= 2            signal length (default 2048; sparse_l1: 128)\n"
        "  l                integer >= 1            box-blur half-width (default 128)\n"
        "  eta              real > 0                l1 / TV weight (default 2)\n"
        "  lam_box          real >= 0               fidelity box half-width (default 0.2)\n"
        "  sigma            real >= 0               observation noise std (default 0.3)\n"
        "  seed             unsigned integer        noise / instance seed (default 0)\n"
        "  blur             box | identity          blur operator C (default box)\n"
        "  lambda           real > 0                sparse_l1 proximal parameter (default 1)\n"
        "  E0               real > 0                absolute error budget (default 64)\n"
        "  p                real > 1                error schedule exponent (default 2)\n"
        "  rho              real > 0                rho_k = rho B_k (default 1)\n"
        "  r                real in (0, 1]          L floor ratio (default 1/16)\n"
        "  s_inner          integer >= 1            inner tau half-life (default 4096)\n"
        "  s_outer          integer >= 1            outer L half-life (default 1024)\n"
        "  B0               real > 0                initial smoothness estimate (default: ||C||^2)\n"
        "  eps              real > 0                stationarity tolerance (default 1e-8)\n"
        "  max_iters        integer >= 1            outer iteration limit (default 100000)\n"
        "  inner_max_iters  integer >= 1            inner iteration limit (default 2^20)\n";
  return os.str();
}

}  // namespace iapg
