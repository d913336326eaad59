#include "chaoslab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "chaoslab/errors.hpp"
#include "chaoslab/grid.hpp"

namespace chaoslab {

double TomlValue::number() const {
  if (kind == Kind::kInt) return static_cast<double>(i);
  if (kind == Kind::kFloat) return f;
  throw ValidationError("config", "expected a numeric value");
}

namespace {

[[noreturn]] void fail_line(int line, const std::string& msg) {
  std::ostringstream os;
  os << "line " << line << ": " << msg;
  throw ValidationError("config.toml", os.str());
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-'))
      return false;
  return true;
}

TomlValue parse_scalar(const std::string& raw, int line) {
  const std::string v = trim(raw);
  if (v.empty()) fail_line(line, "empty value");
  TomlValue out;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') fail_line(line, "unterminated string");
    out.kind = TomlValue::Kind::kString;
    std::string s;
    for (std::size_t p = 1; p + 1 < v.size(); ++p) {
      char c = v[p];
      if (c == '\\') {
        if (p + 2 >= v.size()) fail_line(line, "dangling escape");
        char e = v[++p];
        switch (e) {
          case 'n': s += '\n'; break;
          case 't': s += '\t'; break;
          case '"': s += '"'; break;
          case '\\': s += '\\'; break;
          default: fail_line(line, "unsupported escape sequence");
        }
      } else if (c == '"') {
        fail_line(line, "unexpected quote inside string");
      } else {
        s += c;
      }
    }
    out.s = s;
    return out;
  }
  if (v == "true" || v == "false") {
    out.kind = TomlValue::Kind::kBool;
    out.b = (v == "true");
    return out;
  }
  // integer?
  {
    char* end = nullptr;
    errno = 0;
    const long long iv = std::strtoll(v.c_str(), &end, 10);
    if (errno == 0 && end && *end == '\0' && v.find_first_of(".eE") == std::string::npos) {
      out.kind = TomlValue::Kind::kInt;
      out.i = iv;
      return out;
    }
  }
  {
    char* end = nullptr;
    errno = 0;
    const double fv = std::strtod(v.c_str(), &end);
    if (errno == 0 && end && *end == '\0') {
      out.kind = TomlValue::Kind::kFloat;
      out.f = fv;
      return out;
    }
  }
  fail_line(line, "cannot parse value '" + v + "'");
}

TomlValue parse_value(const std::string& raw, int line) {
  const std::string v = trim(raw);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') fail_line(line, "unterminated array");
    TomlValue out;
    out.kind = TomlValue::Kind::kArray;
    const std::string inner = v.substr(1, v.size() - 2);
    std::string item;
    bool in_str = false;
    for (char c : inner) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        if (!trim(item).empty()) out.arr.push_back(parse_scalar(item, line));
        item.clear();
      } else {
        item += c;
      }
    }
    if (!trim(item).empty()) out.arr.push_back(parse_scalar(item, line));
    return out;
  }
  return parse_scalar(v, line);
}

std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t p = 0; p < line.size(); ++p) {
    char c = line[p];
    if (c == '"' && (p == 0 || line[p - 1] != '\\')) in_str = !in_str;
    if (c == '#' && !in_str) return line.substr(0, p);
  }
  return line;
}

} // namespace

std::map<std::string, TomlValue> parse_toml(const std::string& text) {
  std::map<std::string, TomlValue> out;
  std::istringstream is(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail_line(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_key(section)) fail_line(line_no, "invalid section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail_line(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) fail_line(line_no, "invalid key '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (out.count(full)) fail_line(line_no, "duplicate key '" + full + "'");
    out.emplace(full, parse_value(line.substr(eq + 1), line_no));
  }
  return out;
}

std::map<std::string, TomlValue> parse_toml_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("config.path", "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  if (f.bad()) throw IoError("config.path", "error reading '" + path + "'");
  return parse_toml(buf.str());
}

namespace {

struct Reader {
  const std::map<std::string, TomlValue>& t;
  std::set<std::string> used;

  const TomlValue* find(const std::string& key) {
    auto it = t.find(key);
    if (it == t.end()) return nullptr;
    used.insert(key);
    return &it->second;
  }
  void number(const std::string& key, double& dst) {
    if (const TomlValue* v = find(key)) dst = v->number();
  }
  void integer(const std::string& key, int& dst) {
    if (const TomlValue* v = find(key)) {
      if (v->kind != TomlValue::Kind::kInt)
        throw ValidationError(key, "expected an integer");
      dst = static_cast<int>(v->i);
    }
  }
  void integer64(const std::string& key, std::int64_t& dst) {
    if (const TomlValue* v = find(key)) {
      if (v->kind != TomlValue::Kind::kInt)
        throw ValidationError(key, "expected an integer");
      dst = v->i;
    }
  }
  void uinteger64(const std::string& key, std::uint64_t& dst) {
    if (const TomlValue* v = find(key)) {
      if (v->kind != TomlValue::Kind::kInt)
        throw ValidationError(key, "expected an integer");
      dst = static_cast<std::uint64_t>(v->i);
    }
  }
  void string(const std::string& key, std::string& dst) {
    if (const TomlValue* v = find(key)) {
      if (v->kind != TomlValue::Kind::kString)
        throw ValidationError(key, "expected a string");
      dst = v->s;
    }
  }
  void boolean(const std::string& key, bool& dst) {
    if (const TomlValue* v = find(key)) {
      if (v->kind != TomlValue::Kind::kBool)
        throw ValidationError(key, "expected a boolean");
      dst = v->b;
    }
  }
  void int_list(const std::string& key, std::vector<int>& dst) {
    if (const TomlValue* v = find(key)) {
      if (v->kind != TomlValue::Kind::kArray)
        throw ValidationError(key, "expected an array");
      dst.clear();
      for (const auto& e : v->arr) {
        if (e.kind != TomlValue::Kind::kInt)
          throw ValidationError(key, "expected integer entries");
        dst.push_back(static_cast<int>(e.i));
      }
    }
  }
  void num_list(const std::string& key, std::vector<double>& dst) {
    if (const TomlValue* v = find(key)) {
      if (v->kind != TomlValue::Kind::kArray)
        throw ValidationError(key, "expected an array");
      dst.clear();
      for (const auto& e : v->arr) dst.push_back(e.number());
    }
  }
};

} // namespace

ExperimentConfig config_from_toml(const std::map<std::string, TomlValue>& t) {
  ExperimentConfig cfg;
  Reader r{t, {}};

  std::string family = "bounded_confidence";
  r.string("kernel.family", family);
  if (family == "bounded_confidence") {
    cfg.kernel.family = KernelFamily::kBoundedConfidence;
  } else if (family == "coulomb") {
    cfg.kernel.family = KernelFamily::kCoulomb;
    cfg.kernel.route = "weierstrass_sqrt";
    cfg.kernel.d = 3;
  } else if (family == "bessel") {
    cfg.kernel.family = KernelFamily::kBessel;
    cfg.kernel.route = "weierstrass";
    cfg.kernel.d = 1;
  } else if (family == "custom") {
    cfg.kernel.family = KernelFamily::kCustom;
  } else {
    throw ValidationError("kernel.family", "unknown kernel family '" + family + "'");
  }
  r.number("kernel.R", cfg.kernel.R);
  r.string("kernel.route", cfg.kernel.route);
  r.integer("kernel.d", cfg.kernel.d);
  r.string("kernel.w_file", cfg.kernel.w_file);
  r.string("kernel.v_file", cfg.kernel.v_file);
  r.string("kernel.mode", cfg.kernel.mode);
  r.number("kernel.force_sign", cfg.kernel.force_sign);
  r.number("kernel.a_W", cfg.kernel.a_W);
  r.number("kernel.a_V", cfg.kernel.a_V);

  r.string("init.kind", cfg.init.kind);
  r.number("init.mean", cfg.init.mean);
  r.number("init.std", cfg.init.std_dev);
  r.number("init.a", cfg.init.a);
  r.number("init.b", cfg.init.b);

  r.number("schedule.beta", cfg.beta);
  r.int_list("schedule.N_list", cfg.N_list);

  r.number("sde.sigma", cfg.sigma);
  r.number("sde.T", cfg.T);
  r.number("sde.dt", cfg.dt);
  r.integer("sde.save_count", cfg.save_count);

  r.number("grid.L", cfg.L);
  r.integer64("grid.n", cfg.n);

  r.number("diagnostics.alpha", cfg.alpha);
  r.number("diagnostics.delta", cfg.delta);
  r.number("diagnostics.gamma", cfg.gamma);
  r.integer("diagnostics.replicas", cfg.replicas);
  r.string("diagnostics.lln_path", cfg.lln_path);

  r.num_list("sweep.eps_list", cfg.eps_list);
  r.number("sweep.eps", cfg.eps_override);

  r.string("output.dir", cfg.output_dir);
  r.boolean("output.trajectories", cfg.write_trajectories);

  r.uinteger64("seed", cfg.seed);

  for (const auto& [key, value] : t) {
    (void)value;
    if (!r.used.count(key))
      throw ValidationError(key, "unknown config key '" + key + "'");
  }
  return cfg;
}

namespace {

bool bump_based(const KernelConfig& k) {
  switch (k.family) {
    case KernelFamily::kBoundedConfidence: return true;
    case KernelFamily::kCoulomb: return k.route != "weierstrass_sqrt";
    case KernelFamily::kBessel: return k.route == "mollifier";
    case KernelFamily::kCustom: return false;
  }
  return false;
}

} // namespace

void validate_config(const ExperimentConfig& cfg, Command cmd) {
  // grid (Grid's constructor enforces dim/L/n invariants)
  const int kernel_dim =
      (cfg.kernel.family == KernelFamily::kCoulomb ||
       cfg.kernel.family == KernelFamily::kBessel)
          ? cfg.kernel.d
          : 1;
  Grid probe(kernel_dim, cfg.L, cfg.n);
  const double h = probe.h();

  if (!(cfg.beta > 0.0) || !(cfg.beta < 0.5))
    throw ValidationError("schedule.beta", "beta must lie in (0, 1/2)");
  if (!(cfg.alpha > 0.0))
    throw ValidationError("diagnostics.alpha", "alpha must be positive");
  if (!(cfg.delta > 0.0))
    throw ValidationError("diagnostics.delta", "delta must be positive");
  if (!(cfg.alpha + cfg.delta < 0.5))
    throw ValidationError("diagnostics.alpha", "alpha + delta must be < 1/2");
  if (!(cfg.gamma > 0.0))
    throw ValidationError("diagnostics.gamma", "gamma must be positive");
  if (!(cfg.sigma > 0.0)) throw ValidationError("sde.sigma", "sigma must be > 0");
  if (!(cfg.T > 0.0)) throw ValidationError("sde.T", "T must be > 0");
  if (!(cfg.dt > 0.0)) throw ValidationError("sde.dt", "dt must be > 0");
  {
    const double ratio = cfg.T / cfg.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      throw ValidationError("sde.dt", "T/dt must be integral within 1e-9");
  }
  if (cfg.save_count < 1)
    throw ValidationError("sde.save_count", "save_count must be >= 1");
  if (cfg.replicas < 1)
    throw ValidationError("diagnostics.replicas", "replicas must be >= 1");
  if (cfg.N_list.empty())
    throw ValidationError("schedule.N_list", "N_list must not be empty");
  for (int N : cfg.N_list)
    if (N < 1) throw ValidationError("schedule.N_list", "N values must be >= 1");
  if (cfg.lln_path != "deposit" && cfg.lln_path != "direct")
    throw ValidationError("diagnostics.lln_path", "lln_path must be deposit|direct");
  if (cfg.init.kind != "gaussian" && cfg.init.kind != "uniform")
    throw ValidationError("init.kind", "init kind must be gaussian|uniform");
  if (cfg.init.kind == "gaussian" && !(cfg.init.std_dev > 0.0))
    throw ValidationError("init.std", "gaussian std must be > 0");
  if (cfg.init.kind == "uniform" && !(cfg.init.a < cfg.init.b))
    throw ValidationError("init.a", "uniform support needs a < b");

  // the eps values this command will instantiate
  std::vector<double> eps_used;
  const bool sweeps_N = (cmd == Command::kSimulate || cmd == Command::kRateSweep);
  if (sweeps_N) {
    for (int N : cfg.N_list)
      eps_used.push_back(std::pow(static_cast<double>(N), -cfg.beta));
  } else if (cmd == Command::kLiouvilleOracle) {
    eps_used.push_back(cfg.eps_override > 0.0 ? cfg.eps_override
                                              : std::pow(2.0, -cfg.beta));
  } else { // kernel-check, pde-compare
    if (cfg.eps_list.size() < 2)
      throw ValidationError("sweep.eps_list", "need at least two eps values");
    for (double e : cfg.eps_list) {
      if (!(e > 0.0))
        throw ValidationError("sweep.eps_list", "eps values must be positive");
      eps_used.push_back(e);
    }
  }
  const double eps_min = *std::min_element(eps_used.begin(), eps_used.end());
  const double eps_max = *std::max_element(eps_used.begin(), eps_used.end());

  if (bump_based(cfg.kernel) && eps_min < 4.0 * h) {
    std::ostringstream os;
    os << "smallest mollifier width eps = " << eps_min
       << " is unresolvable: need eps >= 4h = " << 4.0 * h
       << " (increase grid.n or reduce beta)";
    throw ValidationError("grid.n", os.str());
  }

  switch (cfg.kernel.family) {
    case KernelFamily::kBoundedConfidence: {
      if (cfg.kernel.route != "force" && cfg.kernel.route != "potential")
        throw ValidationError("kernel.route", "bounded-confidence route must be "
                                              "force|potential");
      if (!(cfg.kernel.R > 0.0))
        throw ValidationError("kernel.R", "R must be > 0");
      if (cfg.kernel.R + 2.0 * eps_max >= cfg.L)
        throw ValidationError("kernel.R",
                              "kernel support R + 2 eps must fit inside the box");
      break;
    }
    case KernelFamily::kCoulomb: {
      if (cfg.kernel.d != 2 && cfg.kernel.d != 3)
        throw ValidationError("kernel.d", "coulomb requires d = 2 or 3");
      if (cfg.kernel.route != "mollify_both" && cfg.kernel.route != "fourier_sqrt" &&
          cfg.kernel.route != "weierstrass_sqrt")
        throw ValidationError("kernel.route",
                              "coulomb route must be mollify_both|fourier_sqrt|"
                              "weierstrass_sqrt");
      if (cfg.kernel.route != "mollify_both" && cfg.kernel.d != 3)
        throw ValidationError("kernel.route", "sqrt routes require d = 3");
      if (cmd != Command::kKernelCheck)
        throw ValidationError("kernel.family",
                              "coulomb kernels support kernel-check only "
                              "(the dynamics are 1D)");
      break;
    }
    case KernelFamily::kBessel: {
      if (cfg.kernel.d < 1 || cfg.kernel.d > 3)
        throw ValidationError("kernel.d", "bessel requires d in {1,2,3}");
      if (cfg.kernel.route != "weierstrass" && cfg.kernel.route != "mollifier")
        throw ValidationError("kernel.route",
                              "bessel route must be weierstrass|mollifier");
      if (cmd != Command::kKernelCheck && cfg.kernel.d != 1)
        throw ValidationError("kernel.d", "only d = 1 bessel kernels can drive the "
                                          "1D dynamics");
      break;
    }
    case KernelFamily::kCustom: {
      if (cfg.kernel.w_file.empty() || cfg.kernel.v_file.empty())
        throw ValidationError("kernel.w_file",
                              "custom kernels need kernel.w_file and kernel.v_file");
      if (cfg.kernel.mode != "product" && cfg.kernel.mode != "gradient")
        throw ValidationError("kernel.mode", "custom mode must be product|gradient");
      break;
    }
  }

  if (cmd == Command::kPdeCompare &&
      cfg.kernel.family != KernelFamily::kBoundedConfidence)
    throw ValidationError("kernel.family",
                          "pde-compare is defined for the bounded-confidence family");
  if (cfg.output_dir.empty())
    throw ValidationError("output.dir", "output directory must not be empty");
}

namespace {

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace

std::string canonical_string(const ExperimentConfig& cfg) {
  std::map<std::string, std::string> kv;
  const char* families[] = {"bounded_confidence", "coulomb", "bessel", "custom"};
  kv["kernel.family"] = families[static_cast<int>(cfg.kernel.family)];
  kv["kernel.R"] = g17(cfg.kernel.R);
  kv["kernel.route"] = cfg.kernel.route;
  kv["kernel.d"] = std::to_string(cfg.kernel.d);
  kv["kernel.w_file"] = cfg.kernel.w_file;
  kv["kernel.v_file"] = cfg.kernel.v_file;
  kv["kernel.mode"] = cfg.kernel.mode;
  kv["kernel.force_sign"] = g17(cfg.kernel.force_sign);
  kv["kernel.a_W"] = g17(cfg.kernel.a_W);
  kv["kernel.a_V"] = g17(cfg.kernel.a_V);
  kv["init.kind"] = cfg.init.kind;
  kv["init.mean"] = g17(cfg.init.mean);
  kv["init.std"] = g17(cfg.init.std_dev);
  kv["init.a"] = g17(cfg.init.a);
  kv["init.b"] = g17(cfg.init.b);
  kv["schedule.beta"] = g17(cfg.beta);
  {
    std::string s;
    for (std::size_t i = 0; i < cfg.N_list.size(); ++i)
      s += (i ? "," : "") + std::to_string(cfg.N_list[i]);
    kv["schedule.N_list"] = s;
  }
  kv["sde.sigma"] = g17(cfg.sigma);
  kv["sde.T"] = g17(cfg.T);
  kv["sde.dt"] = g17(cfg.dt);
  kv["sde.save_count"] = std::to_string(cfg.save_count);
  kv["grid.L"] = g17(cfg.L);
  kv["grid.n"] = std::to_string(cfg.n);
  kv["diagnostics.alpha"] = g17(cfg.alpha);
  kv["diagnostics.delta"] = g17(cfg.delta);
  kv["diagnostics.gamma"] = g17(cfg.gamma);
  kv["diagnostics.replicas"] = std::to_string(cfg.replicas);
  kv["diagnostics.lln_path"] = cfg.lln_path;
  {
    std::string s;
    for (std::size_t i = 0; i < cfg.eps_list.size(); ++i)
      s += (i ? "," : "") + g17(cfg.eps_list[i]);
    kv["sweep.eps_list"] = s;
  }
  kv["sweep.eps"] = g17(cfg.eps_override);
  kv["output.dir"] = cfg.output_dir;
  kv["output.trajectories"] = cfg.write_trajectories ? "true" : "false";
  kv["seed"] = std::to_string(cfg.seed);

  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string s = canonical_string(cfg);
  std::uint64_t h = 1469598103934665603ULL; // FNV offset basis
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL; // FNV prime
  }
  return h;
}

const char* command_name(Command cmd) {
  switch (cmd) {
    case Command::kSimulate: return "simulate";
    case Command::kKernelCheck: return "kernel-check";
    case Command::kLiouvilleOracle: return "liouville-oracle";
    case Command::kPdeCompare: return "pde-compare";
    case Command::kRateSweep: return "rate-sweep";
  }
  return "?";
}

} // namespace chaoslab
