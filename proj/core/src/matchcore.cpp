#include "tcr/matchcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tcr/error.hpp"

namespace tcr::matchcore {

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

bool operator<(const SupportPoint& a, const SupportPoint& b) {
  if (a.own != b.own) return a.own < b.own;
  return std::lexicographical_compare(a.peer.begin(), a.peer.end(), b.peer.begin(), b.peer.end());
}

std::vector<double> SupportPoint::peer_values() const {
  std::vector<double> out;
  out.reserve(peer.size());
  for (const auto& r : peer) out.push_back(to_double(r));
  return out;
}

void ToyPopulation::validate() const {
  if (compositions.empty()) throw InvalidInput("toy population has no classroom compositions");
  if (student_types < 2) throw InvalidInput("toy population needs at least two student types");
  if (class_size < 2) throw InvalidInput("class size must be at least 2 for peer fractions");
  if (teacher_marginal.empty()) throw InvalidInput("teacher marginal is empty");
  Rational total = 0;
  for (std::size_t c = 0; c < compositions.size(); ++c) {
    const auto& comp = compositions[c];
    if (static_cast<int>(comp.student_types.size()) != class_size)
      throw InvalidInput("composition " + std::to_string(c) + " does not have class_size seats");
    for (int t : comp.student_types)
      if (t < 0 || t >= student_types)
        throw InvalidInput("composition " + std::to_string(c) + " has an out-of-range student type");
    if (comp.probability < Rational(0)) throw InvalidInput("negative composition probability");
    total += comp.probability;
  }
  if (total != Rational(1)) throw InvalidInput("composition probabilities sum to " + to_string(total));
  Rational marginal_total = 0;
  for (const auto& p : teacher_marginal) {
    if (p < Rational(0)) throw InvalidInput("negative teacher marginal entry");
    marginal_total += p;
  }
  if (marginal_total != Rational(1)) throw InvalidInput("teacher marginal sums to " + to_string(marginal_total));
}

namespace {

SupportPoint seat_point(const std::vector<int>& seats, std::size_t seat, int types) {
  SupportPoint p;
  p.own = seats[seat];
  std::vector<std::int64_t> counts(static_cast<std::size_t>(types), 0);
  for (std::size_t j = 0; j < seats.size(); ++j)
    if (j != seat) ++counts[static_cast<std::size_t>(seats[j])];
  const auto peers = static_cast<std::int64_t>(seats.size() - 1);
  for (int k = 1; k < types; ++k) p.peer.emplace_back(counts[static_cast<std::size_t>(k)], peers);
  return p;
}

std::size_t index_of(const OwnPeerDensity& density, const SupportPoint& p) {
  auto idx = density.find(p);
  if (!idx) throw InvalidInput("support point missing from density");
  return *idx;
}

}  // namespace

std::optional<std::size_t> OwnPeerDensity::find(const SupportPoint& point) const {
  auto it = std::lower_bound(support.begin(), support.end(), point);
  if (it == support.end() || !(*it == point)) return std::nullopt;
  return static_cast<std::size_t>(it - support.begin());
}

Rational OwnPeerDensity::total_mass() const {
  return std::accumulate(mass.begin(), mass.end(), Rational(0));
}

OwnPeerDensity own_peer_density(const ToyPopulation& pop) {
  pop.validate();
  std::map<SupportPoint, Rational> acc;
  const Rational seats(pop.class_size);
  for (const auto& comp : pop.compositions) {
    for (std::size_t s = 0; s < comp.student_types.size(); ++s) {
      acc[seat_point(comp.student_types, s, pop.student_types)] += comp.probability / seats;
    }
  }
  OwnPeerDensity out;
  out.student_types = pop.student_types;
  for (auto& [point, mass] : acc) {
    if (mass == Rational(0)) continue;
    out.support.push_back(point);
    out.mass.push_back(mass);
  }
  return out;
}

std::vector<SeatRow> seat_rows(const ToyPopulation& pop) {
  const auto density = own_peer_density(pop);
  std::vector<SeatRow> rows;
  for (std::size_t c = 0; c < pop.compositions.size(); ++c) {
    const auto& seats = pop.compositions[c].student_types;
    for (std::size_t s = 0; s < seats.size(); ++s) {
      SeatRow row;
      row.composition = c;
      row.point = seat_point(seats, s, pop.student_types);
      auto idx = density.find(row.point);
      row.density = idx ? density.mass[*idx] : Rational(0);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void CounterfactualRule::validate(std::size_t levels) const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != levels)
      throw InvalidInput("rule row " + std::to_string(i) + " has the wrong number of levels");
    Rational total = 0;
    for (const auto& p : rows[i]) {
      if (p < Rational(0) || p > Rational(1)) throw InvalidInput("rule entry outside [0, 1] in row " + std::to_string(i));
      total += p;
    }
    if (total != Rational(1)) throw InvalidInput("rule row " + std::to_string(i) + " sums to " + to_string(total));
  }
}

CounterfactualRule constant_rule(const OwnPeerDensity& density, std::span<const Rational> marginal) {
  CounterfactualRule rule;
  rule.rows.assign(density.support.size(), std::vector<Rational>(marginal.begin(), marginal.end()));
  return rule;
}

CounterfactualRule rule_from_classroom_probabilities(
    const ToyPopulation& pop, const OwnPeerDensity& density,
    const std::vector<std::vector<Rational>>& per_composition) {
  if (per_composition.size() != pop.compositions.size())
    throw InvalidInput("need one probability vector per composition");
  const auto levels = static_cast<std::size_t>(pop.teacher_levels());
  std::vector<std::vector<Rational>> weighted(density.support.size(), std::vector<Rational>(levels, 0));
  std::vector<Rational> weight(density.support.size(), 0);
  const Rational seats(pop.class_size);
  for (std::size_t c = 0; c < pop.compositions.size(); ++c) {
    if (per_composition[c].size() != levels)
      throw InvalidInput("composition " + std::to_string(c) + " probability vector has wrong length");
    const auto& seats_c = pop.compositions[c].student_types;
    const Rational seat_mass = pop.compositions[c].probability / seats;
    for (std::size_t s = 0; s < seats_c.size(); ++s) {
      const auto i = index_of(density, seat_point(seats_c, s, pop.student_types));
      weight[i] += seat_mass;
      for (std::size_t w = 0; w < levels; ++w) weighted[i][w] += seat_mass * per_composition[c][w];
    }
  }
  CounterfactualRule rule;
  rule.rows.resize(density.support.size());
  for (std::size_t i = 0; i < weighted.size(); ++i) {
    rule.rows[i].resize(levels);
    for (std::size_t w = 0; w < levels; ++w) rule.rows[i][w] = weighted[i][w] / weight[i];
  }
  return rule;
}

CounterfactualRule rule_from_classroom_levels(const ToyPopulation& pop, const OwnPeerDensity& density,
                                              std::span<const int> levels) {
  const int L = pop.teacher_levels();
  std::vector<std::vector<Rational>> probs;
  for (int level : levels) {
    if (level < 0 || level >= L) throw InvalidInput("classroom level out of range");
    std::vector<Rational> row(static_cast<std::size_t>(L), 0);
    row[static_cast<std::size_t>(level)] = 1;
    probs.push_back(std::move(row));
  }
  return rule_from_classroom_probabilities(pop, density, probs);
}

Feasibility check_feasible(const CounterfactualRule& rule, const OwnPeerDensity& density,
                           std::span<const Rational> marginal) {
  if (rule.rows.size() != density.support.size())
    throw InvalidInput("rule has " + std::to_string(rule.rows.size()) + " rows but density has " +
                       std::to_string(density.support.size()) + " support points");
  rule.validate(marginal.size());
  Feasibility out;
  out.max_violation = 0;
  for (std::size_t w = 0; w < marginal.size(); ++w) {
    Rational implied = 0;
    for (std::size_t i = 0; i < rule.rows.size(); ++i) implied += rule.rows[i][w] * density.mass[i];
    const Rational gap = boost::abs(implied - marginal[w]);
    out.max_violation = std::max(out.max_violation, gap);
  }
  out.feasible = to_double(out.max_violation) <= kFeasibilityTolerance;
  return out;
}

bool is_classroom_consistent(const CounterfactualRule& rule, const ToyPopulation& pop,
                             const OwnPeerDensity& density) {
  for (const auto& comp : pop.compositions) {
    const std::vector<Rational>* first = nullptr;
    for (std::size_t s = 0; s < comp.student_types.size(); ++s) {
      const auto& row = rule.rows.at(index_of(density, seat_point(comp.student_types, s, pop.student_types)));
      if (first == nullptr) {
        first = &row;
      } else if (row != *first) {
        return false;
      }
    }
  }
  return true;
}

MatchSurface::MatchSurface(const OwnPeerDensity& density, int levels, const Function& fn) {
  for (const auto& point : density.support) {
    const auto peer = point.peer_values();
    for (int w = 0; w < levels; ++w) values_[point][w] = fn(point.own, peer, w);
  }
}

void MatchSurface::set(const SupportPoint& point, int level, double value) {
  if (!std::isfinite(value)) throw InvalidInput("match surface values must be finite");
  values_[point][level] = value;
}

std::optional<double> MatchSurface::get(const SupportPoint& point, int level) const {
  auto it = values_.find(point);
  if (it == values_.end()) return std::nullopt;
  auto jt = it->second.find(level);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

double MatchSurface::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& [p, row] : values_)
    for (const auto& [w, v] : row) m = std::min(m, v);
  return m;
}

double MatchSurface::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& [p, row] : values_)
    for (const auto& [w, v] : row) m = std::max(m, v);
  return m;
}

double are_nonparametric(const MatchSurface& surface, const CounterfactualRule& rule,
                         const OwnPeerDensity& density) {
  if (rule.rows.size() != density.support.size()) throw InvalidInput("rule does not match density support");
  double total = 0.0;
  for (std::size_t i = 0; i < density.support.size(); ++i) {
    double inner = 0.0;
    for (std::size_t w = 0; w < rule.rows[i].size(); ++w) {
      if (rule.rows[i][w] == Rational(0)) continue;
      auto m = surface.get(density.support[i], static_cast<int>(w));
      if (!m) throw InvalidInput("match surface is missing a required (x, xbar, w) cell");
      inner += *m * to_double(rule.rows[i][w]);
    }
    total += inner * to_double(density.mass[i]);
  }
  return total;
}

std::vector<std::vector<int>> feasible_classroom_plans(const ToyPopulation& pop) {
  pop.validate();
  const auto C = pop.compositions.size();
  const int L = pop.teacher_levels();
  if (std::pow(static_cast<double>(L), static_cast<double>(C)) > 5e6)
    throw InvalidInput("too many compositions to enumerate classroom plans");
  std::vector<std::vector<int>> plans;
  std::vector<int> levels(C, 0);
  for (;;) {
    std::vector<Rational> implied(static_cast<std::size_t>(L), 0);
    for (std::size_t c = 0; c < C; ++c)
      implied[static_cast<std::size_t>(levels[c])] += pop.compositions[c].probability;
    if (implied == pop.teacher_marginal) plans.push_back(levels);
    std::size_t pos = 0;
    while (pos < C && ++levels[pos] == L) levels[pos++] = 0;
    if (pos == C) break;
  }
  return plans;
}

DeterministicOptimum best_classroom_plan(const ToyPopulation& pop, const MatchSurface& surface,
                                         bool maximize) {
  const auto density = own_peer_density(pop);
  const auto plans = feasible_classroom_plans(pop);
  if (plans.empty()) throw InvalidInput("no deterministic classroom plan reproduces the teacher marginal");
  DeterministicOptimum best;
  bool have = false;
  for (const auto& plan : plans) {
    const double v = are_nonparametric(surface, rule_from_classroom_levels(pop, density, plan), density);
    if (!have || (maximize ? v > best.value : v < best.value)) {
      best = {plan, v};
      have = true;
    }
  }
  return best;
}

ToyPopulation two_type_example() {
  ToyPopulation pop;
  pop.student_types = 2;
  pop.class_size = 3;
  pop.compositions = {
      {{0, 0, 0}, Rational(1, 4)},
      {{0, 0, 1}, Rational(1, 4)},
      {{0, 1, 1}, Rational(1, 4)},
      {{1, 1, 1}, Rational(1, 4)},
  };
  pop.teacher_marginal = {Rational(1, 2), Rational(1, 2)};
  return pop;
}

}  // namespace tcr::matchcore
