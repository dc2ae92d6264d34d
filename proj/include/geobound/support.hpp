#pragma once

#include <map>
#include <optional>

#include "geobound/bounds.hpp"
#include "geobound/lang.hpp"

namespace geobound {

/// Interval box per variable; std::nullopt is the empty support.
using Support = std::optional<RangeBox>;

Support support_point(const std::vector<std::uint64_t>& point);
Support support_join(const Support& a, const Support& b);
Support support_widen(const Support& a, const Support& b);
bool support_leq(const Support& a, const Support& b);

/// Smallest box containing the part of `s` where the event can hold
/// (positive = true) or fail (positive = false).
Support refine(const Support& s, const Event& e, bool positive = true);

/// Plain joins for this many loop iterations before widening kicks in.
inline constexpr int kWideningDelay = 3;

/// Support after running a statement (loops analysed to a fixpoint).
Support support_post(const StmtPtr& stmt, const Support& in);

/// Fixpoint at the head of a loop entered with `in`.
Support loop_head(const While& loop, const Support& in);

struct SupportAnalysis {
  /// Over-approximates the support of the exact output.
  Support post;
  /// Over-approximates the support of the mass passing through a While
  /// node of the analysed program (the part cut off by the lower semantics).
  Support residual;
  /// Loop-head boxes, joined over all visits, keyed by node.
  std::map<const Statement*, Support> loop_heads;
};

SupportAnalysis analyze_support(const CoreProgram& p, const Support& init);

std::string to_string(const Support& s);

}  // namespace geobound
