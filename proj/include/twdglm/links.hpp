#pragma once

#include <string>
#include <string_view>

#include "twdglm/family.hpp"

namespace twdglm {

enum class LinkKind { Log, Identity, Sqrt, Inverse, InverseSquared };
enum class LinkRole { Mean, Dispersion };

struct LinkSpec {
  LinkKind kind = LinkKind::Log;
  LinkRole role = LinkRole::Mean;
};

struct Links {
  LinkKind mean = LinkKind::Log;
  LinkKind disp = LinkKind::Log;
};

LinkKind parse_link(std::string_view name);
std::string link_name(LinkKind k);

// h(t), h'(t) or h''(t) of the inverse link.
double link_eval(LinkKind kind, double t, int order);
inline double link_eval(const LinkSpec& link, double t, int order) { return link_eval(link.kind, t, order); }
// g(mu).
double link_apply(LinkKind kind, double mu);
bool link_domain_ok(LinkKind kind, double t);

bool link_permitted(const FamilySpec& spec, const LinkSpec& link);
void validate_links(const FamilySpec& spec, const Links& links);

// theta(h1(t)) and its first two derivatives in t, by the chain rule.
double natural_from_predictor(const FamilySpec& spec, LinkKind mean_link, double t, int order);

struct DTerms {
  double D = 0.0;    // y theta - kappa
  double D1 = 0.0;   // dD/dt
  double D2 = 0.0;   // d2D/dt2
  double info = 0.0; // expected -D2: h1'^2 / V
  double mu = 0.0;
};

// Hand-written closed forms per (member, link).
DTerms d_terms(const FamilySpec& spec, LinkKind mean_link, double y, double t);
// Generic chain-rule evaluation, kept to cross-check the closed forms.
DTerms d_terms_generic(const FamilySpec& spec, LinkKind mean_link, double y, double t);

}  // namespace twdglm
