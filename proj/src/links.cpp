#include "twdglm/links.hpp"

#include <cmath>

#include "twdglm/error.hpp"
#include "util.hpp"

namespace twdglm {

LinkKind parse_link(std::string_view name) {
  if (name == "log") return LinkKind::Log;
  if (name == "identity") return LinkKind::Identity;
  if (name == "sqrt") return LinkKind::Sqrt;
  if (name == "inverse") return LinkKind::Inverse;
  if (name == "inverse-squared") return LinkKind::InverseSquared;
  throw Error(Code::Config, "unknown link '" + std::string(name) + "'");
}

std::string link_name(LinkKind k) {
  switch (k) {
    case LinkKind::Log: return "log";
    case LinkKind::Identity: return "identity";
    case LinkKind::Sqrt: return "sqrt";
    case LinkKind::Inverse: return "inverse";
    case LinkKind::InverseSquared: return "inverse-squared";
  }
  return "?";
}

bool link_domain_ok(LinkKind kind, double t) {
  if (!std::isfinite(t)) return false;
  switch (kind) {
    case LinkKind::Log:
    case LinkKind::Identity: return true;
    case LinkKind::Sqrt:
    case LinkKind::InverseSquared: return t > 0.0;
    case LinkKind::Inverse: return t != 0.0;
  }
  return false;
}

double link_eval(LinkKind kind, double t, int order) {
  if (!link_domain_ok(kind, t))
    throw Error(Code::Domain, link_name(kind) + " link undefined at t = " + fmt_double(t));
  switch (kind) {
    case LinkKind::Log:
      return std::exp(t);
    case LinkKind::Identity:
      return order == 0 ? t : (order == 1 ? 1.0 : 0.0);
    case LinkKind::Sqrt:
      return order == 0 ? t * t : (order == 1 ? 2.0 * t : 2.0);
    case LinkKind::Inverse:
      return order == 0 ? 1.0 / t : (order == 1 ? -1.0 / (t * t) : 2.0 / (t * t * t));
    case LinkKind::InverseSquared: {
      const double r = 1.0 / std::sqrt(t);
      if (order == 0) return r;
      if (order == 1) return -0.5 * r / t;
      return 0.75 * r / (t * t);
    }
  }
  return 0.0;
}

double link_apply(LinkKind kind, double mu) {
  switch (kind) {
    case LinkKind::Log:
      if (!(mu > 0.0)) break;
      return std::log(mu);
    case LinkKind::Identity:
      return mu;
    case LinkKind::Sqrt:
      if (!(mu > 0.0)) break;
      return std::sqrt(mu);
    case LinkKind::Inverse:
      if (mu == 0.0) break;
      return 1.0 / mu;
    case LinkKind::InverseSquared:
      if (!(mu > 0.0)) break;
      return 1.0 / (mu * mu);
  }
  throw Error(Code::Domain, link_name(kind) + " link undefined at mu = " + fmt_double(mu));
}

bool link_permitted(const FamilySpec& spec, const LinkSpec& link) {
  if (link.role == LinkRole::Dispersion) return link.kind == LinkKind::Log || link.kind == LinkKind::Identity;
  switch (spec.member) {
    case Member::Normal:
      return link.kind == LinkKind::Identity || link.kind == LinkKind::Log;
    case Member::Poisson:
      return link.kind == LinkKind::Log || link.kind == LinkKind::Sqrt || link.kind == LinkKind::Identity;
    case Member::CompoundPoissonGamma:
      return link.kind == LinkKind::Log || link.kind == LinkKind::Identity;
    case Member::Gamma:
      return link.kind == LinkKind::Log || link.kind == LinkKind::Identity || link.kind == LinkKind::Inverse;
    case Member::InverseGaussian:
      return link.kind == LinkKind::InverseSquared || link.kind == LinkKind::Log;
  }
  return false;
}

void validate_links(const FamilySpec& spec, const Links& links) {
  if (!link_permitted(spec, {links.mean, LinkRole::Mean}))
    throw Error(Code::Config, "mean link '" + link_name(links.mean) + "' not permitted for " + member_name(spec.member));
  if (!link_permitted(spec, {links.disp, LinkRole::Dispersion}))
    throw Error(Code::Config, "dispersion link '" + link_name(links.disp) + "' not permitted (use log or identity)");
}

double natural_from_predictor(const FamilySpec& spec, LinkKind mean_link, double t, int order) {
  const double mu = link_eval(mean_link, t, 0);
  check_mean(spec, mu);
  if (order == 0) return theta_of_mu(spec, mu);
  const double h1 = link_eval(mean_link, t, 1);
  const double v = variance_function(spec, mu);
  if (order == 1) return h1 / v;
  const double h2 = link_eval(mean_link, t, 2);
  const double dv = variance_derivative(spec, mu);
  return h2 / v - h1 * h1 * dv / (v * v);
}

DTerms d_terms_generic(const FamilySpec& spec, LinkKind mean_link, double y, double t) {
  DTerms r;
  r.mu = link_eval(mean_link, t, 0);
  check_mean(spec, r.mu);
  const double h1 = link_eval(mean_link, t, 1);
  const double th = natural_from_predictor(spec, mean_link, t, 0);
  const double th1 = natural_from_predictor(spec, mean_link, t, 1);
  const double th2 = natural_from_predictor(spec, mean_link, t, 2);
  r.D = y * th - kappa_of_mu(spec, r.mu);
  r.D1 = th1 * (y - r.mu);
  r.D2 = th2 * (y - r.mu) - th1 * h1;
  r.info = th1 * h1;
  return r;
}

DTerms d_terms(const FamilySpec& spec, LinkKind mean_link, double y, double t) {
  if (!link_domain_ok(mean_link, t))
    throw Error(Code::Domain, link_name(mean_link) + " link undefined at t = " + fmt_double(t));
  DTerms r;
  const double p = spec.p;
  switch (spec.member) {
    case Member::Normal:
      if (mean_link == LinkKind::Identity) {
        r = {y * t - 0.5 * t * t, y - t, -1.0, 1.0, t};
        return r;
      }
      if (mean_link == LinkKind::Log) {
        const double e = std::exp(t), e2 = e * e;
        r = {y * e - 0.5 * e2, y * e - e2, y * e - 2.0 * e2, e2, e};
        return r;
      }
      break;
    case Member::Poisson:
      if (mean_link == LinkKind::Log) {
        const double e = std::exp(t);
        r = {y * t - e, y - e, -e, e, e};
        return r;
      }
      if (mean_link == LinkKind::Sqrt) {
        r = {2.0 * y * std::log(t) - t * t, 2.0 * (y / t - t), -2.0 * (y / (t * t) + 1.0), 4.0, t * t};
        return r;
      }
      if (mean_link == LinkKind::Identity) {
        if (!(t > 0.0)) break;
        r = {y * std::log(t) - t, y / t - 1.0, -y / (t * t), 1.0 / t, t};
        return r;
      }
      break;
    case Member::CompoundPoissonGamma:
      if (mean_link == LinkKind::Log) {
        const double e1 = std::exp((1.0 - p) * t), e2 = std::exp((2.0 - p) * t);
        r = {y * e1 / (1.0 - p) - e2 / (2.0 - p), y * e1 - e2, (1.0 - p) * y * e1 - (2.0 - p) * e2, e2,
             std::exp(t)};
        return r;
      }
      if (mean_link == LinkKind::Identity) {
        if (!(t > 0.0)) break;
        const double a = std::pow(t, -p), b = std::pow(t, 1.0 - p);
        r = {y * b / (1.0 - p) - t * b / (2.0 - p), y * a - b, -p * y * a / t - (1.0 - p) * a, a, t};
        return r;
      }
      break;
    case Member::Gamma:
      if (mean_link == LinkKind::Inverse) {
        if (!(t > 0.0)) break;
        r = {-y * t + std::log(t), -y + 1.0 / t, -1.0 / (t * t), 1.0 / (t * t), 1.0 / t};
        return r;
      }
      if (mean_link == LinkKind::Identity) {
        if (!(t > 0.0)) break;
        r = {-y / t - std::log(t), y / (t * t) - 1.0 / t, -2.0 * y / (t * t * t) + 1.0 / (t * t), 1.0 / (t * t), t};
        return r;
      }
      if (mean_link == LinkKind::Log) {
        const double e = std::exp(-t);
        r = {-y * e - t, y * e - 1.0, -y * e, 1.0, std::exp(t)};
        return r;
      }
      break;
    case Member::InverseGaussian:
      if (mean_link == LinkKind::InverseSquared) {
        const double s = std::sqrt(t);
        r = {-0.5 * y * t + s, -0.5 * y + 0.5 / s, -0.25 / (s * t), 0.25 / (s * t), 1.0 / s};
        return r;
      }
      if (mean_link == LinkKind::Log) {
        const double e1 = std::exp(-t), e2 = e1 * e1;
        r = {-0.5 * y * e2 + e1, y * e2 - e1, -2.0 * y * e2 + e1, e1, std::exp(t)};
        return r;
      }
      break;
  }
  return d_terms_generic(spec, mean_link, y, t);
}

}  // namespace twdglm
