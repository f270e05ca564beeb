#pragma once

#include <map>
#include <string>
#include <vector>

#include "twdglm/graph.hpp"
#include "twdglm/optimizer.hpp"
#include "twdglm/tuning.hpp"

namespace twdglm {

// Flag-named settings ("family", "p-grid", ...). Unknown keys are rejected.
class Options {
 public:
  static const std::vector<std::string>& known_keys();

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& def = "") const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;

  // "key = value" lines, '#' comments.
  void load_file(const std::string& path);
  std::string to_string() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<double> parse_p_grid(const std::string& s);   // lo:hi:step
GridSpec parse_grid(const std::string& s);                 // l1lo:l1hi:n1,l2lo:l2hi:n2
std::pair<int, int> parse_lattice(const std::string& s);  // RxC or R

// --threads, then TWDGLM_THREADS, then 1.
int resolve_threads(const Options& o);

FamilySpec family_from(const Options& o);
Links links_from(const Options& o, const FamilySpec& spec);
FitConfig fit_config_from(const Options& o, const FamilySpec& spec, const Dataset& d, const ArealGraph& g);

// Runs simulate, fit, tune, predict or report. Returns the headline number:
// fit objective, best hold-out deviance, total predicted deviance, alpha SSE
// (report with an oracle) or realised zero proportion.
double run_command(const std::string& command, const Options& o);

}  // namespace twdglm
