#pragma once

// Transportation problem: every cluster (teacher-classroom unit) receives
// exactly one teacher level, and within each cell level w is used exactly
// supply[cell][w] times. Cells are independent.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tcr {

enum class Sense { maximize, minimize };

struct AssignmentProblem {
  int L = 0;
  std::vector<std::vector<double>> values;  // cluster x level
  std::vector<int> cell;                    // per cluster, in [0, cells)
  std::vector<std::vector<int>> supply;     // cell x level
  std::vector<std::string> cell_names;      // optional, for messages
  Sense sense = Sense::maximize;

  std::size_t clusters() const { return values.size(); }
  std::size_t cells() const { return supply.size(); }
  std::string cell_name(std::size_t c) const;
  // Shape, finiteness and per-cell supply totals; throws InvalidInput naming
  // the offending cell.
  void validate() const;
};

struct AssignmentPlan {
  std::vector<int> level;  // per cluster
  double objective = 0.0;
  bool degenerate_tie = false;  // more than one optimal plan exists
};

// Sum of values[c][level[c]] in cluster order.
double plan_objective(const AssignmentProblem& p, std::span<const int> level);

// True when every cell uses each level exactly supply times.
bool plan_feasible(const AssignmentProblem& p, std::span<const int> level);

// Exact optimum via successive shortest paths (Dijkstra with potentials) on
// the cluster -> level network. Among optimal plans the lexicographically
// smallest level vector is returned, i.e. the lowest cluster index gets the
// lowest level index that still admits an optimal completion.
AssignmentPlan solve_assignment(const AssignmentProblem& p);

// Enumerates every placement of each cell's level multiset. Intended as an
// oracle; throws InvalidInput when a cell has more than `max_cell` clusters.
// Returns the lexicographically first optimum.
AssignmentPlan brute_force_assignment(const AssignmentProblem& p, std::size_t max_cell = 10);

}  // namespace tcr
