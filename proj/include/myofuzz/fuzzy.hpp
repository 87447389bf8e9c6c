#pragma once

// Membership of a channel observation in the fuzzy "clean signal" set.
//
// A detector score is first mapped to a band coordinate t in [0, 1] with the
// crisp detector boundary (score 0) at t = 0.5. The membership shape then maps
// t to r in [0, 1].

#include <array>
#include <string_view>

#include "myofuzz/occ.hpp"

namespace myofuzz::fuzzy {

enum class MembershipKind { cr, cr0, nt, lp, sm, ss };

inline constexpr std::array kAllKinds = {MembershipKind::cr, MembershipKind::cr0, MembershipKind::nt,
                                         MembershipKind::lp, MembershipKind::sm,  MembershipKind::ss};

std::string_view to_string(MembershipKind kind) noexcept;
MembershipKind parse_kind(std::string_view name);  // throws ConfigError

// Default shape for the soft (non-crisp) methods.
inline constexpr MembershipKind kDefaultSoftKind = MembershipKind::lp;

struct MembershipSpec {
  MembershipKind kind = kDefaultSoftKind;
  double steepness = 10.0;  // ss only
};

// clamp((score + s) / (2 s), 0, 1)
double normalize_score(double score, const occ::ScoreBand& band);

// Throws ContractError for t outside [0, 1].
double membership(const MembershipSpec& spec, double t);

// Convenience: membership(spec, normalize_score(det.decision(x), det.band)).
double channel_membership(const occ::ChannelDetector& det, const MembershipSpec& spec,
                          std::span<const double> x);

}  // namespace myofuzz::fuzzy
