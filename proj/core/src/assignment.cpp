#include "tcr/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "tcr/error.hpp"

namespace tcr {

std::string AssignmentProblem::cell_name(std::size_t c) const {
  return c < cell_names.size() ? cell_names[c] : "cell " + std::to_string(c);
}

void AssignmentProblem::validate() const {
  if (L < 1) throw InvalidInput("assignment problem needs at least one level");
  if (cell.size() != values.size()) throw InvalidInput("cluster cell labels and value rows differ in length");
  std::vector<int> count(supply.size(), 0);
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (static_cast<int>(values[c].size()) != L) throw InvalidInput("value row " + std::to_string(c) + " has wrong width");
    for (double v : values[c])
      if (!std::isfinite(v)) throw InvalidInput("value row " + std::to_string(c) + " is not finite");
    if (cell[c] < 0 || static_cast<std::size_t>(cell[c]) >= supply.size())
      throw InvalidInput("cluster " + std::to_string(c) + " has an unknown cell");
    ++count[static_cast<std::size_t>(cell[c])];
  }
  for (std::size_t k = 0; k < supply.size(); ++k) {
    if (static_cast<int>(supply[k].size()) != L) throw InvalidInput(cell_name(k) + ": supply vector has wrong width");
    int total = 0;
    for (int s : supply[k]) {
      if (s < 0) throw InvalidInput(cell_name(k) + ": negative supply");
      total += s;
    }
    if (total != count[k])
      throw InvalidInput(cell_name(k) + ": supply totals " + std::to_string(total) + " teachers for " +
                         std::to_string(count[k]) + " clusters");
  }
}

double plan_objective(const AssignmentProblem& p, std::span<const int> level) {
  if (level.size() != p.values.size()) throw InvalidInput("plan length differs from cluster count");
  double s = 0.0;
  for (std::size_t c = 0; c < level.size(); ++c) s += p.values[c][static_cast<std::size_t>(level[c])];
  return s;
}

bool plan_feasible(const AssignmentProblem& p, std::span<const int> level) {
  if (level.size() != p.values.size()) return false;
  std::vector<std::vector<int>> used(p.supply.size(), std::vector<int>(static_cast<std::size_t>(p.L), 0));
  for (std::size_t c = 0; c < level.size(); ++c) {
    if (level[c] < 0 || level[c] >= p.L) return false;
    ++used[static_cast<std::size_t>(p.cell[c])][static_cast<std::size_t>(level[c])];
  }
  return used == p.supply;
}

namespace {

std::vector<std::vector<std::size_t>> cell_members(const AssignmentProblem& p) {
  std::vector<std::vector<std::size_t>> m(p.cells());
  for (std::size_t c = 0; c < p.clusters(); ++c) m[static_cast<std::size_t>(p.cell[c])].push_back(c);
  return m;
}

// Min-cost flow on source -> clusters -> levels -> sink with unit cluster
// demand. Costs are nonnegative, so zero initial potentials are valid.
class CellFlow {
 public:
  CellFlow(const std::vector<std::vector<double>>& cost, const std::vector<int>& cap)
      : n_(cost.size()), L_(cap.size()), graph_(n_ + L_ + 2) {
    for (std::size_t c = 0; c < n_; ++c) add(source(), cluster(c), 1, 0.0);
    for (std::size_t c = 0; c < n_; ++c)
      for (std::size_t w = 0; w < L_; ++w) add(cluster(c), level(w), 1, cost[c][w]);
    for (std::size_t w = 0; w < L_; ++w) add(level(w), sink(), cap[w], 0.0);
  }

  std::vector<int> solve() {
    const auto N = graph_.size();
    std::vector<double> pot(N, 0.0), dist(N);
    std::vector<std::size_t> prev_edge(N);
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t unit = 0; unit < n_; ++unit) {
      std::fill(dist.begin(), dist.end(), inf);
      dist[source()] = 0.0;
      using Item = std::pair<double, std::size_t>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      pq.push({0.0, source()});
      while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (auto e : graph_[u]) {
          const auto& E = edges_[e];
          if (E.cap <= 0) continue;
          // reduced costs are >= 0 in exact arithmetic; clamp rounding noise
          // so zero-cost cycles cannot keep relaxing forever
          const double nd = d + std::max(0.0, E.cost + pot[u] - pot[E.to]);
          if (nd < dist[E.to]) {
            dist[E.to] = nd;
            prev_edge[E.to] = e;
            pq.push({nd, E.to});
          }
        }
      }
      if (dist[sink()] == inf) throw NumericalError("assignment network has no augmenting path; supply inconsistent");
      for (std::size_t v = 0; v < N; ++v)
        if (dist[v] < inf) pot[v] += dist[v];
      for (auto v = sink(); v != source();) {
        const auto e = prev_edge[v];
        edges_[e].cap -= 1;
        edges_[e ^ 1].cap += 1;
        v = edges_[e ^ 1].to;
      }
    }
    std::vector<int> out(n_, -1);
    for (std::size_t c = 0; c < n_; ++c)
      for (auto e : graph_[cluster(c)])
        if (edges_[e].to >= level(0) && edges_[e].to < level(0) + L_ && (e % 2 == 0) && edges_[e].cap == 0)
          out[c] = static_cast<int>(edges_[e].to - level(0));
    return out;
  }

 private:
  struct Edge {
    std::size_t to;
    int cap;
    double cost;
  };
  std::size_t source() const { return 0; }
  std::size_t cluster(std::size_t c) const { return 1 + c; }
  std::size_t level(std::size_t w) const { return 1 + n_ + w; }
  std::size_t sink() const { return 1 + n_ + L_; }
  void add(std::size_t u, std::size_t v, int cap, double cost) {
    graph_[u].push_back(edges_.size());
    edges_.push_back({v, cap, cost});
    graph_[v].push_back(edges_.size());
    edges_.push_back({u, 0, -cost});
  }

  std::size_t n_, L_;
  std::vector<std::vector<std::size_t>> graph_;
  std::vector<Edge> edges_;
};

// Hall's condition for the remaining clusters: every set S of levels must
// have capacity for the clusters whose allowed levels all lie in S.
bool completable(const std::vector<long>& mask_count, const std::vector<int>& cap, int L) {
  const std::size_t full = std::size_t{1} << L;
  std::vector<long> f(mask_count);
  for (int b = 0; b < L; ++b)
    for (std::size_t s = 0; s < full; ++s)
      if (s & (std::size_t{1} << b)) f[s] += f[s ^ (std::size_t{1} << b)];
  for (std::size_t s = 0; s < full; ++s) {
    long c = 0;
    for (int b = 0; b < L; ++b)
      if (s & (std::size_t{1} << b)) c += cap[static_cast<std::size_t>(b)];
    if (f[s] > c) return false;
  }
  return true;
}

struct CellResult {
  std::vector<int> level;  // per member
  bool tie = false;
};

CellResult solve_cell(const std::vector<std::vector<double>>& value, const std::vector<int>& supply, Sense sense) {
  const auto n = value.size();
  const auto L = supply.size();
  CellResult res;
  if (n == 0) return res;

  // nonnegative costs: distance from the best (or worst) value in the cell
  double ref = sense == Sense::maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (const auto& row : value)
    for (double v : row) {
      ref = sense == Sense::maximize ? std::max(ref, v) : std::min(ref, v);
      scale = std::max(scale, std::abs(v));
    }
  std::vector<std::vector<double>> cost(n, std::vector<double>(L));
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t w = 0; w < L; ++w) cost[c][w] = sense == Sense::maximize ? ref - value[c][w] : value[c][w] - ref;

  const auto ssp = CellFlow(cost, supply).solve();

  // Dual prices on levels: d_b - d_a <= cost(c, b) - cost(c, a) for every
  // cluster c currently at a. Bellman-Ford from a virtual root.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> arc(L, std::vector<double>(L, inf));
  for (std::size_t c = 0; c < n; ++c) {
    const auto a = static_cast<std::size_t>(ssp[c]);
    for (std::size_t b = 0; b < L; ++b)
      if (b != a) arc[a][b] = std::min(arc[a][b], cost[c][b] - cost[c][a]);
  }
  const double tol = 1e-12 * (1.0 + scale);
  std::vector<double> d(L, 0.0);
  for (std::size_t it = 0; it < L; ++it)
    for (std::size_t a = 0; a < L; ++a)
      for (std::size_t b = 0; b < L; ++b)
        if (arc[a][b] < inf && d[a] + arc[a][b] < d[b]) d[b] = d[a] + arc[a][b];
  bool optimal = true;
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t b = 0; b < L; ++b)
      if (arc[a][b] < inf && d[a] + arc[a][b] < d[b] - tol) optimal = false;

  std::vector<unsigned> mask(n, 0);
  for (std::size_t c = 0; c < n; ++c) {
    const auto a = static_cast<std::size_t>(ssp[c]);
    for (std::size_t w = 0; w < L; ++w) {
      const double rc = cost[c][w] - cost[c][a] + d[a] - d[w];
      if (w == a || rc <= tol) mask[c] |= 1u << w;
    }
  }

  // lexicographically smallest plan on the tight arcs
  std::vector<int> cap(supply);
  std::vector<long> count(std::size_t{1} << L, 0);
  for (auto m : mask) ++count[m];
  std::vector<int> lex(n, -1);
  bool ok = optimal;
  for (std::size_t c = 0; c < n && ok; ++c) {
    --count[mask[c]];
    int feasible_choices = 0;
    for (std::size_t w = 0; w < L; ++w) {
      if (!(mask[c] >> w & 1u) || cap[w] == 0) continue;
      --cap[w];
      const bool fits = completable(count, cap, static_cast<int>(L));
      ++cap[w];
      if (!fits) continue;
      ++feasible_choices;
      if (lex[c] < 0) lex[c] = static_cast<int>(w);
    }
    if (lex[c] < 0) {
      ok = false;
      break;
    }
    if (feasible_choices > 1) res.tie = true;
    --cap[static_cast<std::size_t>(lex[c])];
  }

  auto total = [&](const std::vector<int>& plan) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += value[c][static_cast<std::size_t>(plan[c])];
    return s;
  };
  if (ok) {
    const double a = total(lex), b = total(ssp);
    const bool worse = sense == Sense::maximize ? a < b : a > b;
    if (!worse) {
      res.level = std::move(lex);
      return res;
    }
  }
  res.level = ssp;
  return res;
}

}  // namespace

AssignmentPlan solve_assignment(const AssignmentProblem& p) {
  p.validate();
  AssignmentPlan plan;
  plan.level.assign(p.clusters(), 0);
  const auto members = cell_members(p);
  for (std::size_t k = 0; k < p.cells(); ++k) {
    std::vector<std::vector<double>> v;
    for (auto c : members[k]) v.push_back(p.values[c]);
    auto r = solve_cell(v, p.supply[k], p.sense);
    for (std::size_t j = 0; j < members[k].size(); ++j) plan.level[members[k][j]] = r.level[j];
    plan.degenerate_tie = plan.degenerate_tie || r.tie;
  }
  plan.objective = plan_objective(p, plan.level);
  return plan;
}

AssignmentPlan brute_force_assignment(const AssignmentProblem& p, std::size_t max_cell) {
  p.validate();
  AssignmentPlan plan;
  plan.level.assign(p.clusters(), 0);
  const auto members = cell_members(p);
  for (std::size_t k = 0; k < p.cells(); ++k) {
    const auto& mem = members[k];
    if (mem.size() > max_cell)
      throw InvalidInput(p.cell_name(k) + " has " + std::to_string(mem.size()) + " clusters; brute force is limited to " +
                         std::to_string(max_cell));
    if (mem.empty()) continue;
    std::vector<int> levels;
    for (int w = 0; w < p.L; ++w) levels.insert(levels.end(), static_cast<std::size_t>(p.supply[k][static_cast<std::size_t>(w)]), w);
    std::vector<int> best;
    double best_value = 0.0;
    std::size_t optima = 0;
    do {
      double s = 0.0;
      for (std::size_t j = 0; j < mem.size(); ++j) s += p.values[mem[j]][static_cast<std::size_t>(levels[j])];
      const bool better = best.empty() || (p.sense == Sense::maximize ? s > best_value : s < best_value);
      if (better) {
        best = levels;
        best_value = s;
        optima = 1;
      } else if (s == best_value) {
        ++optima;
      }
    } while (std::next_permutation(levels.begin(), levels.end()));
    for (std::size_t j = 0; j < mem.size(); ++j) plan.level[mem[j]] = best[j];
    plan.degenerate_tie = plan.degenerate_tie || optima > 1;
  }
  plan.objective = plan_objective(p, plan.level);
  return plan;
}

}  // namespace tcr
