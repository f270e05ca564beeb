#include "twdglm/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "twdglm/error.hpp"
#include "util.hpp"

namespace twdglm {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  if (*b == '+') ++b;
  auto r = std::from_chars(b, e, v);
  return r.ec == std::errc() && r.ptr == e;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Code::IO, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Code::IO, "cannot open '" + path + "' for writing");
  return out;
}

std::string loc(int row, const std::string& col) { return "row " + std::to_string(row + 1) + ", column '" + col + "'"; }

double cell_number(const CsvTable& t, int row, int col) {
  double v;
  if (!parse_double(t.cells[row][col], v))
    throw Error(Code::Schema, loc(row, t.header[col]) + ": non-numeric value '" + t.cells[row][col] + "'");
  return v;
}

bool column_numeric(const CsvTable& t, int col) {
  double v;
  for (const auto& r : t.cells)
    if (!parse_double(r[col], v)) return false;
  return true;
}

// Appends design columns named `names` built from the table.
void fill_design(const CsvTable& t, const std::vector<std::string>& names, RowMatrix& M) {
  const int n = static_cast<int>(t.cells.size());
  M.resize(n, static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    const std::string& nm = names[j];
    if (nm == "(Intercept)") {
      M.col(j).setOnes();
      continue;
    }
    const auto eq = nm.find('=');
    const std::string base = nm.substr(0, eq);
    const int c = t.column(base);
    if (c < 0) throw Error(Code::Schema, "missing column '" + base + "'");
    for (int i = 0; i < n; ++i)
      M(i, j) = eq == std::string::npos ? cell_number(t, i, c) : (t.cells[i][c] == nm.substr(eq + 1) ? 1.0 : 0.0);
  }
}

std::vector<std::string> design_names(const CsvTable& t, const std::string& prefix, bool intercept, bool expand) {
  std::vector<std::string> names;
  if (intercept) names.push_back("(Intercept)");
  for (int c = 0; c < static_cast<int>(t.header.size()); ++c) {
    const std::string& h = t.header[c];
    if (h.rfind(prefix, 0) != 0) continue;
    if (!expand || column_numeric(t, c)) {
      names.push_back(h);
      continue;
    }
    std::set<std::string> levels;
    for (const auto& r : t.cells) levels.insert(r[c]);
    levels.erase(std::prev(levels.end()));
    for (const auto& l : levels) names.push_back(h + "=" + l);
  }
  return names;
}

}  // namespace

ArealGraph load_graph(const std::string& path) {
  std::ifstream in = open_in(path);
  ArealGraph g;
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> f;
    for (std::string tok; ss >> tok;) f.push_back(tok);
    if (f.empty()) continue;
    if (f.size() > 2)
      throw Error(Code::Schema, path + " line " + std::to_string(ln) + ": expected one or two labels");
    const int a = g.add_vertex(f[0]);
    if (f.size() == 2) {
      const int b = g.add_vertex(f[1]);
      try {
        g.add_edge(a, b);
      } catch (const Error& e) {
        throw Error(e.code(), path + " line " + std::to_string(ln) + ": " + e.what());
      }
    }
  }
  if (g.size() == 0) throw Error(Code::Schema, path + ": graph has no vertices");
  return g;
}

void write_graph(const std::string& path, const ArealGraph& g) {
  std::ofstream out = open_out(path);
  for (const auto& l : g.labels()) out << l << '\n';
  for (auto [a, b] : g.edges()) out << g.labels()[a] << '\t' << g.labels()[b] << '\n';
}

int CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(Code::Schema, path + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  for (auto& h : split(line, ',')) t.header.push_back(unquote(h));
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split(line, ',');
    if (f.size() != t.header.size())
      throw Error(Code::Schema, "row " + std::to_string(t.cells.size() + 1) + ": expected " +
                                    std::to_string(t.header.size()) + " fields, found " + std::to_string(f.size()));
    for (auto& c : f) c = unquote(c);
    t.cells.push_back(std::move(f));
    t.lines.push_back(line);
  }
  return t;
}

void write_csv_rows(const std::string& path, const CsvTable& t, const std::vector<int>& rows) {
  std::ofstream out = open_out(path);
  for (std::size_t c = 0; c < t.header.size(); ++c) out << (c ? "," : "") << t.header[c];
  out << '\n';
  for (int r : rows) out << t.lines[r] << '\n';
}

Dataset dataset_from_table(const CsvTable& t, const ArealGraph& g, const FamilySpec& spec, bool expand,
                           const DesignLayout* layout) {
  const int cy = t.column("y");
  if (cy < 0) throw Error(Code::Schema, "missing column 'y'");
  const int cv = t.column("vertex");
  if (cv < 0) throw Error(Code::Schema, "missing column 'vertex'");
  const int cw = t.column("exposure");
  const int n = static_cast<int>(t.cells.size());

  Dataset d;
  d.L = g.size();
  d.y.resize(n);
  d.w = Eigen::VectorXd::Ones(n);
  d.vertex.resize(n);
  for (int i = 0; i < n; ++i) {
    d.y[i] = cell_number(t, i, cy);
    if (cw >= 0) d.w[i] = cell_number(t, i, cw);
    const int v = g.index_of(t.cells[i][cv]);
    if (v < 0) throw Error(Code::Schema, loc(i, "vertex") + ": unknown vertex label '" + t.cells[i][cv] + "'");
    d.vertex[i] = v;
  }
  if (layout) {
    d.x_names = layout->x_names;
    d.z_names = layout->z_names;
  } else {
    d.x_names = design_names(t, "x_", true, expand);
    d.z_names = design_names(t, "z_", has_dispersion(spec.member), expand);
  }
  fill_design(t, d.x_names, d.X);
  fill_design(t, d.z_names, d.Z);
  d.validate(spec);
  return d;
}

Dataset load_dataset(const std::string& path, const ArealGraph& g, const FamilySpec& spec, bool expand,
                     const DesignLayout* layout) {
  return dataset_from_table(read_csv(path), g, spec, expand, layout);
}

void write_dataset(const std::string& path, const Dataset& d, const ArealGraph& g) {
  std::ofstream out = open_out(path);
  std::vector<std::pair<const RowMatrix*, int>> cols;
  out << "y,vertex,exposure";
  for (int j = 0; j < d.k_beta(); ++j)
    if (d.x_names[j] != "(Intercept)") {
      out << ',' << d.x_names[j];
      cols.emplace_back(&d.X, j);
    }
  for (int j = 0; j < d.k_gamma(); ++j)
    if (d.z_names[j] != "(Intercept)") {
      out << ',' << d.z_names[j];
      cols.emplace_back(&d.Z, j);
    }
  out << '\n';
  for (int i = 0; i < d.rows(); ++i) {
    out << fmt_double(d.y[i]) << ',' << g.labels()[d.vertex[i]] << ',' << fmt_double(d.w[i]);
    for (auto [m, j] : cols) out << ',' << fmt_double((*m)(i, j));
    out << '\n';
  }
}

void write_coefficients(const std::string& path, const CoefFile& c) {
  std::ofstream out = open_out(path);
  out << "block\tname\tvalue\n";
  out << "meta\tfamily\t" << member_name(c.spec.member) << '\n';
  out << "meta\tp\t" << fmt_double(c.spec.p) << '\n';
  out << "meta\tapprox\t" << approx_name(c.spec.approx) << '\n';
  out << "meta\tmean_link\t" << link_name(c.links.mean) << '\n';
  out << "meta\tdisp_link\t" << link_name(c.links.disp) << '\n';
  for (int j = 0; j < c.theta.beta.size(); ++j) out << "beta\t" << c.x_names[j] << '\t' << fmt_double(c.theta.beta[j]) << '\n';
  for (int j = 0; j < c.theta.alpha.size(); ++j)
    out << "alpha\t" << c.alpha_labels[j] << '\t' << fmt_double(c.theta.alpha[j]) << '\n';
  for (int j = 0; j < c.theta.gamma.size(); ++j)
    out << "gamma\t" << c.z_names[j] << '\t' << fmt_double(c.theta.gamma[j]) << '\n';
}

CoefFile read_coefficients(const std::string& path) {
  std::ifstream in = open_in(path);
  CoefFile c;
  std::vector<double> b, a, g;
  std::string line;
  int ln = 0;
  bool have_family = false;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split(line, '\t');
    const std::string where = path + " line " + std::to_string(ln);
    if (f.size() != 3) throw Error(Code::Schema, where + ": expected 3 tab-separated fields");
    if (ln == 1 && f[0] == "block") continue;
    if (f[0] == "meta") {
      if (f[1] == "family") {
        c.spec.member = parse_member(f[2]);
        have_family = true;
      } else if (f[1] == "p") {
        if (!parse_double(f[2], c.spec.p)) throw Error(Code::Schema, where + ": bad index value");
      } else if (f[1] == "approx") {
        c.spec.approx = parse_approx(f[2]);
      } else if (f[1] == "mean_link") {
        c.links.mean = parse_link(f[2]);
      } else if (f[1] == "disp_link") {
        c.links.disp = parse_link(f[2]);
      }
      continue;
    }
    double v;
    if (!parse_double(f[2], v)) throw Error(Code::Schema, where + ": non-numeric value '" + f[2] + "'");
    if (f[0] == "beta") {
      c.x_names.push_back(f[1]);
      b.push_back(v);
    } else if (f[0] == "alpha") {
      c.alpha_labels.push_back(f[1]);
      a.push_back(v);
    } else if (f[0] == "gamma") {
      c.z_names.push_back(f[1]);
      g.push_back(v);
    } else {
      throw Error(Code::Schema, where + ": unknown block '" + f[0] + "'");
    }
  }
  if (!have_family) throw Error(Code::Schema, path + ": missing family");
  c.theta.beta = Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  c.theta.alpha = Eigen::Map<Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
  c.theta.gamma = Eigen::Map<Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
  return c;
}

void write_wald(const std::string& path, const std::vector<WaldRow>& rows) {
  std::ofstream out = open_out(path);
  out << "effect\tlevel\testimate\tstd_error\tz\tp_value\n";
  for (const auto& r : rows)
    out << r.effect << '\t' << r.level << '\t' << fmt_double(r.estimate) << '\t' << fmt_double(r.std_error) << '\t'
        << fmt_double(r.z) << '\t' << fmt_double(r.p_value) << '\n';
}

void write_trace(const std::string& path, const FitResult& f) {
  std::ofstream out = open_out(path);
  out << "iter\tF_start\tF_mean\tF_disp\tF_end\tc1\tc2\tp\tdalpha_sq\tdtheta_sq\tmean_expected\tdisp_clamped\n";
  for (const auto& r : f.history)
    out << r.iter << '\t' << fmt_double(r.F_start) << '\t' << fmt_double(r.F_mean) << '\t' << fmt_double(r.F_disp)
        << '\t' << fmt_double(r.F_end) << '\t' << fmt_double(r.c1) << '\t' << fmt_double(r.c2) << '\t'
        << fmt_double(r.p) << '\t' << fmt_double(r.dalpha_sq) << '\t' << fmt_double(r.dtheta_sq) << '\t'
        << r.mean_expected << '\t' << r.disp_clamped << '\n';
}

void write_surface(const std::string& path, const std::vector<GridCell>& surface) {
  std::ofstream out = open_out(path);
  out << "log_lambda1\tlog_lambda2\tholdout_deviance\tconverged\n";
  for (const auto& c : surface)
    out << fmt_double(c.log_lambda1) << '\t' << fmt_double(c.log_lambda2) << '\t'
        << (c.failed ? std::string("nan") : fmt_double(c.holdout_deviance)) << '\t' << (c.converged ? 1 : 0) << '\n';
}

std::vector<GridCell> read_surface(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<GridCell> s;
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || ln == 1) continue;
    std::vector<std::string> f = split(line, '\t');
    GridCell c;
    double conv = 0;
    if (f.size() != 4 || !parse_double(f[0], c.log_lambda1) || !parse_double(f[1], c.log_lambda2) ||
        !parse_double(f[2], c.holdout_deviance) || !parse_double(f[3], conv))
      throw Error(Code::Schema, path + " line " + std::to_string(ln) + ": malformed surface row");
    c.converged = conv != 0.0;
    c.failed = std::isnan(c.holdout_deviance);
    s.push_back(c);
  }
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
}

}  // namespace twdglm
