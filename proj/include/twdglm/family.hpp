#pragma once

#include <string>
#include <string_view>

namespace twdglm {

enum class Member { Normal, Poisson, CompoundPoissonGamma, Gamma, InverseGaussian };
enum class Approx { Series, Saddlepoint };

struct FamilySpec {
  Member member = Member::CompoundPoissonGamma;
  double p = 1.5;
  Approx approx = Approx::Series;
  double eps0 = 1e-6;
  double series_rtol = 1e-12;
  // k_max above this raises SeriesInfeasible.
  double series_kmax_cap = 1e7;

  void validate() const;
  // Fixed-index members get their p filled in.
  static FamilySpec of(Member m, double p = 1.5);
};

Member parse_member(std::string_view name);
std::string member_name(Member m);
Approx parse_approx(std::string_view name);
std::string approx_name(Approx a);

bool is_cpg(Member m);
// False only for Poisson, whose dispersion is fixed at 1.
bool has_dispersion(Member m);

void check_mean(const FamilySpec& spec, double mu);
void check_response(const FamilySpec& spec, double y);

double variance_function(const FamilySpec& spec, double mu);
double variance_derivative(const FamilySpec& spec, double mu);

// theta(mu) and kappa(theta(mu)).
double theta_of_mu(const FamilySpec& spec, double mu);
double kappa_of_mu(const FamilySpec& spec, double mu);

double unit_deviance(const FamilySpec& spec, double y, double mu);

struct SeriesSums {
  double log_a = 0.0;   // log a(y, phi, p)
  double mean_k = 0.0;  // E[k] under weights T_k
  double mean_k2 = 0.0;
  long k_lo = 0;
  long k_hi = 0;
};

double series_mode(double y, double phi, double p);
SeriesSums series_sums(double y, double phi, double p, double rtol, double kmax_cap = 1e7);
double log_normalizer_series(double y, double phi, double p, double rtol, double kmax_cap = 1e7);
double log_normalizer_saddlepoint(double y, double phi, const FamilySpec& spec);

// log C(y, phi) such that log f = (y theta - kappa) / phi + log C, together
// with its first two derivatives in phi. The saddle-point variant folds the
// -D(y)/phi term of the deviance form into C.
struct LogNormalizer {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

LogNormalizer log_normalizer(const FamilySpec& spec, double y, double phi, int order = 2);

double log_density(const FamilySpec& spec, double y, double mu, double phi);

}  // namespace twdglm
