#pragma once

// Discrete-type matching core: own/peer densities, feasibility of
// counterfactual teacher-level rules, and average outcomes under a rule.
//
// Everything except match-surface values is an exact rational, so small
// populations reproduce hand-computed tables without rounding. Doubles only
// appear where a caller asks for one.

#include <boost/rational.hpp>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tcr::matchcore {

// Compare against Rational(n), never a bare integer: boost's mixed
// integer/rational operator== recurses under C++20 rewritten comparisons.
using Rational = boost::rational<std::int64_t>;

double to_double(const Rational& r);
std::string to_string(const Rational& r);

struct Composition {
  std::vector<int> student_types;  // one entry per seat, values in [0, K)
  Rational probability;
};

struct ToyPopulation {
  int student_types = 2;  // K
  int class_size = 3;
  std::vector<Composition> compositions;
  std::vector<Rational> teacher_marginal;  // f(w), one entry per level

  int teacher_levels() const { return static_cast<int>(teacher_marginal.size()); }
  void validate() const;
};

/// Own type plus leave-own-out peer fractions of categories 1..K-1
/// (category 0 is the omitted reference).
struct SupportPoint {
  int own = 0;
  std::vector<Rational> peer;

  friend bool operator==(const SupportPoint&, const SupportPoint&) = default;
  friend bool operator<(const SupportPoint& a, const SupportPoint& b);
  std::vector<double> peer_values() const;
};

struct OwnPeerDensity {
  int student_types = 2;
  std::vector<SupportPoint> support;  // ascending
  std::vector<Rational> mass;

  std::optional<std::size_t> find(const SupportPoint& point) const;
  Rational total_mass() const;
};

OwnPeerDensity own_peer_density(const ToyPopulation& pop);

/// One row per seat: which composition it belongs to, the seat's support
/// point, and the density mass of that support point.
struct SeatRow {
  std::size_t composition = 0;
  SupportPoint point;
  Rational density;
};

std::vector<SeatRow> seat_rows(const ToyPopulation& pop);

/// f~(w | x, xbar): one probability vector over teacher levels per support
/// point, in the order of `OwnPeerDensity::support`.
struct CounterfactualRule {
  std::vector<std::vector<Rational>> rows;
  void validate(std::size_t levels) const;
};

CounterfactualRule constant_rule(const OwnPeerDensity& density, std::span<const Rational> marginal);

/// Lifts classroom-level probabilities (one vector over levels per
/// composition) to a support-level rule by mixing over the compositions
/// that contain each support point.
CounterfactualRule rule_from_classroom_probabilities(
    const ToyPopulation& pop, const OwnPeerDensity& density,
    const std::vector<std::vector<Rational>>& per_composition);

/// Deterministic classroom-level plan: composition c receives level levels[c].
CounterfactualRule rule_from_classroom_levels(const ToyPopulation& pop, const OwnPeerDensity& density,
                                              std::span<const int> levels);

struct Feasibility {
  bool feasible = false;
  Rational max_violation;
};

inline constexpr double kFeasibilityTolerance = 1e-10;

Feasibility check_feasible(const CounterfactualRule& rule, const OwnPeerDensity& density,
                           std::span<const Rational> marginal);

/// True when every composition's support points carry the same row, i.e. the
/// rule never splits one classroom across teacher levels.
bool is_classroom_consistent(const CounterfactualRule& rule, const ToyPopulation& pop,
                             const OwnPeerDensity& density);

/// m(x, xbar, w) on the support of a density.
class MatchSurface {
 public:
  using Function = std::function<double(int own, const std::vector<double>& peer, int level)>;

  MatchSurface() = default;
  MatchSurface(const OwnPeerDensity& density, int levels, const Function& fn);

  void set(const SupportPoint& point, int level, double value);
  std::optional<double> get(const SupportPoint& point, int level) const;
  double min_value() const;
  double max_value() const;

 private:
  std::map<SupportPoint, std::map<int, double>> values_;
};

double are_nonparametric(const MatchSurface& surface, const CounterfactualRule& rule,
                         const OwnPeerDensity& density);

/// All classroom-level one-hot plans whose level frequencies reproduce the
/// teacher marginal exactly.
std::vector<std::vector<int>> feasible_classroom_plans(const ToyPopulation& pop);

struct DeterministicOptimum {
  std::vector<int> levels;
  double value = 0.0;
};

DeterministicOptimum best_classroom_plan(const ToyPopulation& pop, const MatchSurface& surface,
                                         bool maximize);

/// The 2-type, 3-seat population with compositions {000, 001, 011, 111}
/// equally likely and a half/half teacher marginal.
ToyPopulation two_type_example();

}  // namespace tcr::matchcore
