#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "geobound/bounds.hpp"
#include "geobound/errors.hpp"
#include "geobound/lang.hpp"
#include "geobound/rational.hpp"
#include "geobound/tensor.hpp"

namespace geobound {

/// Finite measure on N^n plus the failure state. The N^n part is a dense box
/// starting at `offset`; cells outside the box carry no mass.
struct StateDist {
  std::vector<std::uint64_t> offset;
  Tensor<Rational> masses;
  Rational failure = 0;

  static StateDist zero(std::size_t dims);
  static StateDist dirac(const std::vector<std::uint64_t>& point);

  std::size_t dims() const { return offset.size(); }
  Rational mass_at(std::span<const std::uint64_t> point) const;
  /// Mass on N^n (failure excluded).
  Rational state_mass() const;
  Rational total() const { return state_mass() + failure; }
  /// Marginal masses of one variable, indexed by value from 0.
  std::vector<Rational> marginal(std::size_t var) const;
  /// Shrinks the box to the smallest one holding all nonzero mass.
  void trim();

  bool operator==(const StateDist& other) const;
};

struct MeasureOptions {
  std::size_t max_cells = 100'000'000;
  const Deadline* deadline = nullptr;
};

/// mu restricted to the event on N^n; failure mass is dropped.
StateDist restrict_event(const StateDist& mu, const Event& e);
StateDist add(const StateDist& a, const StateDist& b, const MeasureOptions& opts = {});
StateDist scale(StateDist mu, const Rational& factor);

/// Standard semantics with every While replaced by the zero measure.
StateDist lower_semantics(const StmtPtr& stmt, const StateDist& mu, const MeasureOptions& opts = {});
StateDist lower_semantics(const CoreProgram& p, const StateDist& mu, const MeasureOptions& opts = {});

/// mu(E) minus the total lower mass after unrolling u times.
Rational residual_mass(const CoreProgram& p, const StateDist& mu, std::size_t u,
                       const MeasureOptions& opts = {});

/// Sum of mass * x_var^k over N^n.
Rational finite_moment(const StateDist& d, std::size_t var, std::size_t k);

struct PointRegion {
  std::vector<std::uint64_t> point;
};
struct FailureRegion {};
struct MarginalRegion {
  std::size_t var;
  std::uint64_t value;
};
using Region = std::variant<PointRegion, FailureRegion, MarginalRegion>;

struct PosteriorBounds {
  Interval unnormalized;
  Interval normalized;
};

/// Bounds on the true (and normalized) mass of a region given the lower
/// distribution and the residual mass. When a residual support box is given
/// and the region lies outside it, the residual cannot reach the region and
/// the upper bound collapses to the lower one. `std::nullopt` inside the
/// optional box argument stands for the empty support.
PosteriorBounds posterior_bounds(const StateDist& lower, const Rational& residual, const Region& region,
                                 const std::optional<std::optional<RangeBox>>& residual_support = {});

/// Bounds on the normalizing constant 1 - P[failure].
Interval normalization_bounds(const StateDist& lower, const Rational& residual);

}  // namespace geobound
