#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "twdglm/error.hpp"
#include "twdglm/parallel.hpp"
#include "twdglm/workflow.hpp"

namespace twdglm {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  auto r = std::from_chars(b, e, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != e) throw Error(Code::Config, key + ": expected a number, got '" + s + "'");
  return v;
}

long long to_integer(const std::string& key, const std::string& s) {
  long long v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw Error(Code::Config, key + ": expected an integer, got '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

const std::vector<std::string>& Options::known_keys() {
  static const std::vector<std::string> keys = {
      "family", "p",     "p-grid", "mean-link", "disp-link", "penalty",  "lambda1", "lambda2",   "grid",
      "graph",  "data",  "train-frac", "seed",  "threads",   "out",      "approx",  "max-block", "expand",
      "eps",    "max-iters", "coef",  "oracle", "surface",   "n",        "lattice", "pattern",   "zero-prop",
      "amplitude", "warm-start"};
  return keys;
}

void Options::set(const std::string& key, const std::string& value) {
  const auto& k = known_keys();
  if (std::find(k.begin(), k.end(), key) == k.end()) throw Error(Code::Config, "unknown option '" + key + "'");
  values_[key] = trim(value);
}

std::string Options::get(const std::string& key, const std::string& def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

double Options::get_double(const std::string& key, double def) const {
  return has(key) ? to_double(key, get(key)) : def;
}

int Options::get_int(const std::string& key, int def) const {
  if (!has(key)) return def;
  const long long v = to_integer(key, get(key));
  if (v < -2147483647LL || v > 2147483647LL) throw Error(Code::Config, key + ": out of range");
  return static_cast<int>(v);
}

std::uint64_t Options::get_seed(const std::string& key, std::uint64_t def) const {
  if (!has(key)) return def;
  const long long v = to_integer(key, get(key));
  if (v < 0) throw Error(Code::Config, key + ": must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool Options::get_bool(const std::string& key, bool def) const {
  if (!has(key)) return def;
  const std::string v = get(key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(Code::Config, key + ": expected a boolean, got '" + v + "'");
}

void Options::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Code::IO, "cannot open config '" + path + "'");
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Code::Config, path + " line " + std::to_string(ln) + ": expected 'key = value'");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string Options::to_string() const {
  std::string s;
  for (const auto& [k, v] : values_) s += k + " = " + v + "\n";
  return s;
}

std::vector<double> parse_p_grid(const std::string& s) {
  const auto f = split(s, ':');
  if (f.size() != 3) throw Error(Code::Config, "p-grid: expected lo:hi:step, got '" + s + "'");
  const double lo = to_double("p-grid", f[0]), hi = to_double("p-grid", f[1]), step = to_double("p-grid", f[2]);
  if (!(lo > 1.0 && hi < 2.0 && lo <= hi && step > 0.0))
    throw Error(Code::Config, "p-grid: need 1 < lo <= hi < 2 and step > 0");
  return make_p_grid(lo, hi, step);
}

GridSpec parse_grid(const std::string& s) {
  const auto axes = split(s, ',');
  if (axes.size() != 2) throw Error(Code::Config, "grid: expected l1lo:l1hi:n1,l2lo:l2hi:n2, got '" + s + "'");
  double lo[2], hi[2];
  int n[2];
  for (int a = 0; a < 2; ++a) {
    const auto f = split(axes[a], ':');
    if (f.size() != 3) throw Error(Code::Config, "grid: expected lo:hi:n per axis, got '" + axes[a] + "'");
    lo[a] = to_double("grid", f[0]);
    hi[a] = to_double("grid", f[1]);
    const long long k = to_integer("grid", f[2]);
    if (k < 1 || k > 10000) throw Error(Code::Config, "grid: resolution must be between 1 and 10000");
    n[a] = static_cast<int>(k);
    if (!(lo[a] <= hi[a]) || (n[a] > 1 && lo[a] == hi[a])) throw Error(Code::Config, "grid: need lo < hi");
  }
  return GridSpec::make(lo[0], hi[0], n[0], lo[1], hi[1], n[1]);
}

std::pair<int, int> parse_lattice(const std::string& s) {
  const auto x = s.find('x');
  const long long r = to_integer("lattice", x == std::string::npos ? s : s.substr(0, x));
  const long long c = x == std::string::npos ? r : to_integer("lattice", s.substr(x + 1));
  if (r < 1 || c < 1 || r > 1000 || c > 1000) throw Error(Code::Config, "lattice: dimensions must be 1..1000");
  return {static_cast<int>(r), static_cast<int>(c)};
}

int resolve_threads(const Options& o) {
  if (o.has("threads")) {
    const int t = o.get_int("threads", 1);
    if (t < 1) throw Error(Code::Config, "threads must be at least 1");
    return t;
  }
  return default_threads();
}

FamilySpec family_from(const Options& o) {
  FamilySpec s = FamilySpec::of(parse_member(o.get("family", "cpg")), o.get_double("p", 1.5));
  s.approx = parse_approx(o.get("approx", "series"));
  s.validate();
  return s;
}

Links links_from(const Options& o, const FamilySpec& spec) {
  Links l;
  l.mean = parse_link(o.get("mean-link", "log"));
  l.disp = parse_link(o.get("disp-link", "log"));
  validate_links(spec, l);
  return l;
}

FitConfig fit_config_from(const Options& o, const FamilySpec& spec, const Dataset& d, const ArealGraph& g) {
  FitConfig c;
  const int max_block = o.get_int("max-block", 0);
  if (max_block < 0) throw Error(Code::Config, "max-block must be non-negative");
  c.penalty = assemble_penalty(parse_penalty_mode(o.get("penalty", "spatial")), o.get_double("lambda1", 1.0),
                               o.get_double("lambda2", 1.0), d.k_beta(), g, d.k_gamma(), max_block);
  c.use_block_solve = max_block > 0;
  if (o.has("p-grid")) {
    if (!is_cpg(spec.member)) throw Error(Code::Config, "p-grid applies only to the compound Poisson-gamma member");
    c.p_grid = parse_p_grid(o.get("p-grid"));
  } else if (is_cpg(spec.member) && !o.has("p")) {
    // A given --p alone fixes the index.
    c.p_grid = default_p_grid();
  }
  c.eps_converge = o.get_double("eps", 1e-8);
  c.max_iters = o.get_int("max-iters", 200);
  c.threads = resolve_threads(o);
  c.validate(spec);
  return c;
}

}  // namespace twdglm
