#include "myofuzz/fuzzy.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "myofuzz/error.hpp"

namespace myofuzz::fuzzy {

std::string_view to_string(MembershipKind kind) noexcept {
  switch (kind) {
    case MembershipKind::cr: return "cr";
    case MembershipKind::cr0: return "cr0";
    case MembershipKind::nt: return "nt";
    case MembershipKind::lp: return "lp";
    case MembershipKind::sm: return "sm";
    case MembershipKind::ss: return "ss";
  }
  return "unknown";
}

MembershipKind parse_kind(std::string_view name) {
  for (MembershipKind k : kAllKinds)
    if (to_string(k) == name) return k;
  throw ConfigError(fmt::format("unknown membership kind '{}' (expected cr|cr0|nt|lp|sm|ss)", name));
}

double normalize_score(double score, const occ::ScoreBand& band) {
  if (!(band.scale > 0.0)) throw ContractError("normalize_score: band scale must be positive");
  return std::clamp((score + band.scale) / (2.0 * band.scale), 0.0, 1.0);
}

namespace {

double logistic(double beta, double t) { return 1.0 / (1.0 + std::exp(-beta * (t - 0.5))); }

}  // namespace

double membership(const MembershipSpec& spec, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ContractError(fmt::format("membership: t = {} outside [0, 1]", t));
  switch (spec.kind) {
    case MembershipKind::cr: return t >= 0.5 ? 1.0 : 0.0;
    case MembershipKind::cr0: return 1.0;
    case MembershipKind::nt: return t;
    case MembershipKind::lp: {
      // Linear up to the joint, then a parabola meeting (1, 1) with zero slope;
      // the slope 4/3 makes the two pieces C1 at t = 0.5.
      if (t <= 0.5) return (4.0 / 3.0) * t;
      const double u = 1.0 - t;
      return 1.0 - (4.0 / 3.0) * u * u;
    }
    case MembershipKind::sm: return t * t * (3.0 - 2.0 * t);
    case MembershipKind::ss: {
      if (!(spec.steepness > 0.0)) throw ContractError("membership: ss steepness must be positive");
      if (t == 0.0) return 0.0;
      if (t == 1.0) return 1.0;
      const double lo = logistic(spec.steepness, 0.0);
      const double hi = logistic(spec.steepness, 1.0);
      return std::clamp((logistic(spec.steepness, t) - lo) / (hi - lo), 0.0, 1.0);
    }
  }
  return 0.0;
}

double channel_membership(const occ::ChannelDetector& det, const MembershipSpec& spec,
                          std::span<const double> x) {
  return membership(spec, normalize_score(det.model.decision(x), det.band));
}

}  // namespace myofuzz::fuzzy
