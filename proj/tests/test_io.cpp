#include <unistd.h>

#include <filesystem>
#include <functional>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "twdglm/error.hpp"
#include "twdglm/io.hpp"
#include "twdglm/simgen.hpp"
#include "twdglm/workflow.hpp"

using namespace twdglm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("twdglm_io_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& text) const {
    const fs::path p = path / name;
    std::ofstream(p) << text;
    return p.string();
  }
};

const FamilySpec kCpg = FamilySpec::of(Member::CompoundPoissonGamma, 1.5);

ArealGraph abc() {
  ArealGraph g;
  g.add_vertex("a");
  g.add_vertex("b");
  g.add_vertex("c");
  g.add_edge(0, 1);
  return g;
}

std::string error_of(const std::function<void()>& f, Code* code = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (code) *code = e.code();
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("graph files") {
    TempDir t("graph");
    const std::string p = t.file("g.tsv", "# comment\nc\na\tb\nb c\n\n");
    const ArealGraph g = load_graph(p);
    CHECK(g.size() == 3);
    CHECK(g.labels()[0] == "c");
    CHECK(g.edges().size() == 2);
    write_graph((t.path / "out.tsv").string(), g);
    const ArealGraph h = load_graph((t.path / "out.tsv").string());
    CHECK(h.labels() == g.labels());
    CHECK(h.edges() == g.edges());
    Code c{};
    const std::string msg = error_of([&] { load_graph(t.file("bad.tsv", "a b\na b c\n")); }, &c);
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(error_of([&] { load_graph((t.path / "missing").string()); }, &c) != "");
    CHECK(c == Code::IO);
    CHECK(error_of([&] { load_graph(t.file("loop.tsv", "a a\n")); }, &c) != "");
    CHECK(c == Code::Schema);
  }

  TEST_CASE("well-formed three-row dataset") {
    TempDir t("ds");
    const std::string p = t.file("d.csv", "y,vertex,exposure,x_1,z_1\n0,a,1,0.5,1\n2.5,b,2,1.5,0\n1,c,0.5,-1,2\n");
    const Dataset d = load_dataset(p, abc(), kCpg);
    CHECK(d.rows() == 3);
    CHECK(d.L == 3);
    CHECK(d.x_names == std::vector<std::string>{"(Intercept)", "x_1"});
    CHECK(d.z_names == std::vector<std::string>{"(Intercept)", "z_1"});
    CHECK(d.vertex == std::vector<int>{0, 1, 2});
    CHECK(d.w[1] == 2.0);
    CHECK(d.X(2, 1) == -1.0);
    const std::string q = t.file("noexp.csv", "y,vertex\n1,a\n");
    CHECK(load_dataset(q, abc(), kCpg).w[0] == 1.0);
    // No dispersion intercept for Poisson.
    CHECK(load_dataset(q, abc(), FamilySpec::of(Member::Poisson)).k_gamma() == 0);
  }

  TEST_CASE("dataset errors carry locations") {
    TempDir t("err");
    Code c{};
    std::string msg = error_of([&] { load_dataset(t.file("a.csv", "vertex,x_1\na,1\n"), abc(), kCpg); }, &c);
    CHECK(c == Code::Schema);
    CHECK(msg.find("'y'") != std::string::npos);
    msg = error_of([&] { load_dataset(t.file("b.csv", "y,vertex\n-1,a\n1,b\n"), abc(), kCpg); }, &c);
    CHECK(c == Code::Support);
    CHECK(msg.find("row 1") != std::string::npos);
    msg = error_of([&] { load_dataset(t.file("c.csv", "y,vertex,x_1\n1,a,1\n1,b,oops\n"), abc(), kCpg); }, &c);
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("x_1") != std::string::npos);
    msg = error_of([&] { load_dataset(t.file("d.csv", "y,vertex\n1,a\n1,zz\n"), abc(), kCpg); }, &c);
    CHECK(msg.find("zz") != std::string::npos);
    CHECK(msg.find("row 2") != std::string::npos);
  }

  TEST_CASE("categorical expansion drops the last level") {
    TempDir t("expand");
    const std::string p = t.file("d.csv", "y,vertex,x_class,x_1\n1,a,G,1\n2,b,A,2\n0,c,M,3\n3,a,A,4\n");
    Code c{};
    CHECK(error_of([&] { load_dataset(p, abc(), kCpg); }, &c) != "");
    const Dataset d = load_dataset(p, abc(), kCpg, true);
    CHECK(d.x_names == std::vector<std::string>{"(Intercept)", "x_class=A", "x_class=G", "x_1"});
    CHECK(d.X(0, 2) == 1.0);
    CHECK(d.X(2, 1) == 0.0);
    CHECK(d.X(2, 2) == 0.0);
    // A fixed layout reproduces the columns on new rows.
    DesignLayout lay{d.x_names, d.z_names};
    const std::string q = t.file("e.csv", "y,vertex,x_class,x_1\n1,b,G,7\n");
    const Dataset e = load_dataset(q, abc(), kCpg, true, &lay);
    CHECK(e.x_names == d.x_names);
    CHECK(e.X(0, 2) == 1.0);
    CHECK(e.X(0, 3) == 7.0);
  }

  TEST_CASE("dataset and coefficient round trips") {
    TempDir t("rt");
    const fx::Instance in = fx::random_instance(Member::CompoundPoissonGamma, LinkKind::Log, LinkKind::Log, 30, 4, 2);
    const ArealGraph g = make_lattice(2, 2);
    Dataset d = in.d;
    d.x_names = {"(Intercept)", "x_1", "x_2"};
    d.z_names = {"(Intercept)", "z_1"};
    write_dataset((t.path / "d.csv").string(), d, g);
    const Dataset back = load_dataset((t.path / "d.csv").string(), g, kCpg);
    CHECK(back.y == d.y);
    CHECK(back.w == d.w);
    CHECK(back.X == d.X);
    CHECK(back.Z == d.Z);
    CHECK(back.vertex == d.vertex);

    CoefFile cf{kCpg, in.links, in.th, d.x_names, g.labels(), d.z_names};
    cf.spec.p = 1.35;
    write_coefficients((t.path / "c.tsv").string(), cf);
    const CoefFile r = read_coefficients((t.path / "c.tsv").string());
    CHECK(r.spec.p == 1.35);
    CHECK(r.theta.theta() == in.th.theta());
    CHECK(r.alpha_labels == g.labels());
    CHECK(r.z_names == d.z_names);
  }

  TEST_CASE("surface round trip keeps failed cells") {
    TempDir t("surf");
    std::vector<GridCell> s(2);
    s[0].log_lambda1 = -1;
    s[0].log_lambda2 = 0.5;
    s[0].holdout_deviance = 123.456789012345;
    s[0].converged = true;
    s[1].failed = true;
    s[1].holdout_deviance = std::nan("");
    write_surface((t.path / "s.tsv").string(), s);
    const std::vector<GridCell> r = read_surface((t.path / "s.tsv").string());
    REQUIRE(r.size() == 2);
    CHECK(r[0].holdout_deviance == s[0].holdout_deviance);
    CHECK(r[0].converged);
    CHECK(std::isnan(r[1].holdout_deviance));
  }

  TEST_CASE("options and parsers") {
    Options o;
    o.set("family", "cpg");
    o.set("lambda1", "2.5");
    CHECK(o.get_double("lambda1", 0) == 2.5);
    CHECK(o.get("mean-link", "log") == "log");
    CHECK_THROWS_AS(o.set("colour", "red"), Error);
    CHECK(o.to_string() == "family = cpg\nlambda1 = 2.5\n");
    TempDir t("opts");
    Options back;
    back.load_file(t.file("c.txt", "# echo\n" + o.to_string()));
    CHECK(back.to_string() == o.to_string());

    const std::vector<double> pg = parse_p_grid("1.3:1.7:0.1");
    CHECK(pg.size() == 5);
    CHECK(pg.back() == doctest::Approx(1.7));
    CHECK_THROWS_AS(parse_p_grid("0.5:1.7:0.1"), Error);
    const GridSpec gs = parse_grid("-5:5:20,-5:5:20");
    CHECK(gs.log_lambda1.size() == 20);
    CHECK(gs.log_lambda2.front() == -5);
    CHECK_THROWS_AS(parse_grid("1:2"), Error);
    CHECK(parse_lattice("3x4") == std::pair<int, int>{3, 4});
    CHECK(parse_lattice("5") == std::pair<int, int>{5, 5});

    Options f;
    f.set("family", "poisson");
    CHECK(family_from(f).member == Member::Poisson);
    Options th;
    th.set("threads", "0");
    CHECK_THROWS_AS(resolve_threads(th), Error);
  }
}
