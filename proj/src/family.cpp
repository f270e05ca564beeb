#include "twdglm/family.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "twdglm/error.hpp"
#include "util.hpp"

namespace twdglm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

[[noreturn]] void domain(const std::string& msg) { throw Error(Code::Domain, msg); }

}  // namespace

void FamilySpec::validate() const {
  auto bad = [&](const std::string& m) { throw Error(Code::Config, m); };
  switch (member) {
    case Member::Normal:
      if (p != 0.0) bad("normal member requires p = 0");
      break;
    case Member::Poisson:
      if (p != 1.0) bad("poisson member requires p = 1");
      break;
    case Member::CompoundPoissonGamma:
      if (!(p > 1.0 && p < 2.0)) bad("compound Poisson-gamma requires 1 < p < 2, got " + fmt_double(p));
      break;
    case Member::Gamma:
      if (p != 2.0) bad("gamma member requires p = 2");
      break;
    case Member::InverseGaussian:
      if (p != 3.0) bad("inverse Gaussian member requires p = 3");
      break;
  }
  if (!(eps0 > 0.0)) bad("eps0 must be positive");
  if (!(series_rtol > 0.0 && series_rtol <= 1e-2)) bad("series_rtol must lie in (0, 1e-2]");
  if (!(series_kmax_cap >= 1.0)) bad("series k_max cap must be at least 1");
}

FamilySpec FamilySpec::of(Member m, double p) {
  FamilySpec s;
  s.member = m;
  switch (m) {
    case Member::Normal: s.p = 0.0; break;
    case Member::Poisson: s.p = 1.0; break;
    case Member::CompoundPoissonGamma: s.p = p; break;
    case Member::Gamma: s.p = 2.0; break;
    case Member::InverseGaussian: s.p = 3.0; break;
  }
  return s;
}

Member parse_member(std::string_view name) {
  if (name == "normal" || name == "gaussian") return Member::Normal;
  if (name == "poisson") return Member::Poisson;
  if (name == "cpg" || name == "tweedie" || name == "compound-poisson-gamma") return Member::CompoundPoissonGamma;
  if (name == "gamma") return Member::Gamma;
  if (name == "inverse-gaussian" || name == "ig") return Member::InverseGaussian;
  throw Error(Code::Config, "unknown family '" + std::string(name) + "'");
}

std::string member_name(Member m) {
  switch (m) {
    case Member::Normal: return "normal";
    case Member::Poisson: return "poisson";
    case Member::CompoundPoissonGamma: return "cpg";
    case Member::Gamma: return "gamma";
    case Member::InverseGaussian: return "inverse-gaussian";
  }
  return "?";
}

Approx parse_approx(std::string_view name) {
  if (name == "series") return Approx::Series;
  if (name == "saddlepoint") return Approx::Saddlepoint;
  throw Error(Code::Config, "unknown approximation '" + std::string(name) + "'");
}

std::string approx_name(Approx a) { return a == Approx::Series ? "series" : "saddlepoint"; }

bool is_cpg(Member m) { return m == Member::CompoundPoissonGamma; }
bool has_dispersion(Member m) { return m != Member::Poisson; }

void check_mean(const FamilySpec& spec, double mu) {
  if (!std::isfinite(mu)) domain("mean is not finite");
  if (spec.member != Member::Normal && !(mu > 0.0))
    domain("mean " + fmt_double(mu) + " outside (0, inf) for " + member_name(spec.member));
}

void check_response(const FamilySpec& spec, double y) {
  auto fail = [&](const char* what) {
    throw Error(Code::Support, "response " + fmt_double(y) + " " + what + " for " + member_name(spec.member));
  };
  if (!std::isfinite(y)) fail("is not finite");
  switch (spec.member) {
    case Member::Normal: break;
    case Member::Poisson:
    case Member::CompoundPoissonGamma:
      if (y < 0.0) fail("is negative");
      break;
    case Member::Gamma:
    case Member::InverseGaussian:
      if (!(y > 0.0)) fail("is not positive");
      break;
  }
}

double variance_function(const FamilySpec& spec, double mu) {
  check_mean(spec, mu);
  switch (spec.member) {
    case Member::Normal: return 1.0;
    case Member::Poisson: return mu;
    case Member::CompoundPoissonGamma: return std::pow(mu, spec.p);
    case Member::Gamma: return mu * mu;
    case Member::InverseGaussian: return mu * mu * mu;
  }
  return 0.0;
}

double variance_derivative(const FamilySpec& spec, double mu) {
  check_mean(spec, mu);
  switch (spec.member) {
    case Member::Normal: return 0.0;
    case Member::Poisson: return 1.0;
    case Member::CompoundPoissonGamma: return spec.p * std::pow(mu, spec.p - 1.0);
    case Member::Gamma: return 2.0 * mu;
    case Member::InverseGaussian: return 3.0 * mu * mu;
  }
  return 0.0;
}

double theta_of_mu(const FamilySpec& spec, double mu) {
  check_mean(spec, mu);
  const double p = spec.p;
  switch (spec.member) {
    case Member::Normal: return mu;
    case Member::Poisson: return std::log(mu);
    case Member::CompoundPoissonGamma: return std::pow(mu, 1.0 - p) / (1.0 - p);
    case Member::Gamma: return -1.0 / mu;
    case Member::InverseGaussian: return -0.5 / (mu * mu);
  }
  return 0.0;
}

double kappa_of_mu(const FamilySpec& spec, double mu) {
  check_mean(spec, mu);
  const double p = spec.p;
  switch (spec.member) {
    case Member::Normal: return 0.5 * mu * mu;
    case Member::Poisson: return mu;
    case Member::CompoundPoissonGamma: return std::pow(mu, 2.0 - p) / (2.0 - p);
    case Member::Gamma: return std::log(mu);
    case Member::InverseGaussian: return -1.0 / mu;
  }
  return 0.0;
}

double unit_deviance(const FamilySpec& spec, double y, double mu) {
  check_response(spec, y);
  check_mean(spec, mu);
  const double p = spec.p;
  double d = 0.0;
  switch (spec.member) {
    case Member::Normal:
      d = (y - mu) * (y - mu);
      break;
    case Member::Poisson:
      d = y > 0.0 ? 2.0 * (y * std::log(y / mu) - (y - mu)) : 2.0 * mu;
      break;
    case Member::CompoundPoissonGamma:
      if (y > 0.0) {
        d = 2.0 * (y * (std::pow(y, 1.0 - p) - std::pow(mu, 1.0 - p)) / (1.0 - p) -
                   (std::pow(y, 2.0 - p) - std::pow(mu, 2.0 - p)) / (2.0 - p));
      } else {
        d = 2.0 * std::pow(mu, 2.0 - p) / (2.0 - p);
      }
      break;
    case Member::Gamma:
      d = 2.0 * (-std::log(y / mu) + (y - mu) / mu);
      break;
    case Member::InverseGaussian:
      d = (y - mu) * (y - mu) / (mu * mu * y);
      break;
  }
  return d > 0.0 ? d : 0.0;
}

double series_mode(double y, double phi, double p) { return std::pow(y, 2.0 - p) / ((2.0 - p) * phi); }

SeriesSums series_sums(double y, double phi, double p, double rtol, double kmax_cap) {
  if (!(y > 0.0)) domain("series normalizer needs y > 0");
  if (!(phi > 0.0) || !std::isfinite(phi)) domain("series normalizer needs phi > 0");
  if (!(p > 1.0 && p < 2.0)) domain("series normalizer needs 1 < p < 2");
  const double kmax = series_mode(y, phi, p);
  if (!(kmax <= kmax_cap)) {
    throw Error(Code::SeriesInfeasible, "series window centre k_max = " + fmt_double(kmax) + " exceeds cap " +
                                            fmt_double(kmax_cap) + "; use the saddlepoint approximation");
  }
  const double xi = (2.0 - p) / (p - 1.0);
  const double logt = xi * std::log(y) - xi * std::log(p - 1.0) - std::log(2.0 - p) - (1.0 + xi) * std::log(phi);
  auto log_term = [&](long k) {
    const double kd = static_cast<double>(k);
    return kd * logt - log_gamma(kd + 1.0) - log_gamma(kd * xi);
  };
  constexpr long kSideCap = 1000000;
  const double log_rtol = std::log(rtol);

  thread_local std::vector<double> right, left;
  right.clear();
  left.clear();
  const long k0 = std::max(1L, std::lround(kmax));
  double top = log_term(k0);
  right.push_back(top);
  for (long k = k0 + 1; k - k0 <= kSideCap; ++k) {
    const double v = log_term(k);
    right.push_back(v);
    if (v > top) top = v;
    if (v < top + log_rtol) break;
  }
  for (long k = k0 - 1; k >= 1 && k0 - k <= kSideCap; --k) {
    const double v = log_term(k);
    left.push_back(v);
    if (v > top) top = v;
    if (v < top + log_rtol) break;
  }
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = left.size(); i-- > 0;) {
    const double k = static_cast<double>(k0 - 1 - static_cast<long>(i));
    const double e = std::exp(left[i] - top);
    s0 += e;
    s1 += k * e;
    s2 += k * k * e;
  }
  for (std::size_t i = 0; i < right.size(); ++i) {
    const double k = static_cast<double>(k0 + static_cast<long>(i));
    const double e = std::exp(right[i] - top);
    s0 += e;
    s1 += k * e;
    s2 += k * k * e;
  }
  SeriesSums out;
  out.log_a = -std::log(y) + top + std::log(s0);
  out.mean_k = s1 / s0;
  out.mean_k2 = s2 / s0;
  out.k_lo = k0 - static_cast<long>(left.size());
  out.k_hi = k0 + static_cast<long>(right.size()) - 1;
  return out;
}

double log_normalizer_series(double y, double phi, double p, double rtol, double kmax_cap) {
  return series_sums(y, phi, p, rtol, kmax_cap).log_a;
}

double log_normalizer_saddlepoint(double y, double phi, const FamilySpec& spec) {
  if (!(phi > 0.0)) domain("saddlepoint normalizer needs phi > 0");
  if (!(y >= 0.0)) domain("saddlepoint normalizer needs y >= 0");
  const double v = std::pow(y > 0.0 ? y : spec.eps0, spec.p);
  return -0.5 * (kLog2Pi + std::log(phi * v));
}

LogNormalizer log_normalizer(const FamilySpec& spec, double y, double phi, int order) {
  if (!(phi > 0.0) || !std::isfinite(phi)) domain("dispersion " + fmt_double(phi) + " is not positive");
  LogNormalizer r;
  const double p = spec.p;
  switch (spec.member) {
    case Member::Normal:
      r.value = -0.5 * (kLog2Pi + std::log(phi)) - y * y / (2.0 * phi);
      r.d1 = -0.5 / phi + y * y / (2.0 * phi * phi);
      r.d2 = 0.5 / (phi * phi) - y * y / (phi * phi * phi);
      break;
    case Member::Poisson:
      r.value = -log_gamma(y + 1.0);
      break;
    case Member::Gamma: {
      const double u = 1.0 / phi;
      const double ly = std::log(y);
      r.value = u * std::log(u) + (u - 1.0) * ly - log_gamma(u);
      if (order >= 1) {
        const double lu = std::log(u) + 1.0 + ly - boost::math::digamma(u);
        r.d1 = -u * u * lu;
        if (order >= 2) {
          const double luu = 1.0 / u - boost::math::trigamma(u);
          r.d2 = u * u * u * u * luu + 2.0 * u * u * u * lu;
        }
      }
      break;
    }
    case Member::InverseGaussian:
      r.value = -0.5 * (kLog2Pi + 3.0 * std::log(y) + std::log(phi)) - 1.0 / (2.0 * phi * y);
      r.d1 = -0.5 / phi + 1.0 / (2.0 * phi * phi * y);
      r.d2 = 0.5 / (phi * phi) - 1.0 / (phi * phi * phi * y);
      break;
    case Member::CompoundPoissonGamma:
      if (spec.approx == Approx::Series) {
        if (y > 0.0) {
          const SeriesSums s = series_sums(y, phi, p, spec.series_rtol, spec.series_kmax_cap);
          const double c = 1.0 + (2.0 - p) / (p - 1.0);
          r.value = s.log_a;
          r.d1 = -c * s.mean_k / phi;
          r.d2 = (c * c * s.mean_k2 + c * s.mean_k) / (phi * phi) - r.d1 * r.d1;
        }
      } else {
        const double dy = y > 0.0 ? std::pow(y, 2.0 - p) / ((1.0 - p) * (2.0 - p)) : 0.0;
        r.value = log_normalizer_saddlepoint(y, phi, spec) - dy / phi;
        r.d1 = -0.5 / phi + dy / (phi * phi);
        r.d2 = 0.5 / (phi * phi) - 2.0 * dy / (phi * phi * phi);
      }
      break;
  }
  return r;
}

double log_density(const FamilySpec& spec, double y, double mu, double phi) {
  check_response(spec, y);
  if (spec.member == Member::Poisson) phi = 1.0;
  const double lin = (y * theta_of_mu(spec, mu) - kappa_of_mu(spec, mu)) / phi;
  return lin + log_normalizer(spec, y, phi, 0).value;
}

}  // namespace twdglm
