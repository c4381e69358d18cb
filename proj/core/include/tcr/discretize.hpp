#pragma once

// Discrete student types and teacher levels, plus leave-own-out peer
// fractions. Labels are 0-based; label 0 is always the omitted reference.

#include <map>
#include <span>
#include <string>
#include <vector>

namespace tcr {

struct CategorySpec {
  enum class StudentRule { district_quantiles, explicit_cutoffs };

  int K = 3;                             // student types
  std::vector<double> teacher_cutoffs;   // ascending, L - 1 entries
  StudentRule student_rule = StudentRule::district_quantiles;
  std::vector<double> student_cutoffs;   // used only with explicit_cutoffs

  int L() const { return static_cast<int>(teacher_cutoffs.size()) + 1; }
  void validate() const;  // throws InvalidInput

  // Practice-score cutoffs on the 1-4 rubric: {2.5} for L = 2,
  // {2.25, 2.75} for L = 3, {2.25, 2.5, 2.75} for L = 4, evenly spaced
  // between 2.25 and 2.75 otherwise.
  static std::vector<double> default_teacher_cutoffs(int L);
  static CategorySpec defaults(int K, int L);
};

// Level = number of cutoffs <= score, so a score equal to a cutoff lands in
// the upper cell. Throws InvalidInput on a non-finite score.
std::vector<int> discretize_teachers(std::span<const double> scores, std::span<const double> cutoffs);

struct StudentDiscretization {
  std::vector<int> labels;
  std::map<int, std::vector<double>> district_cuts;  // K - 1 cut points per district
  std::string rule;                                  // human-readable description of the quantile rule
};

// Within-district K-tiles. Cut j (1..K-1) is the nearest-rank order
// statistic x_(ceil(j n / K)); a student's label is the number of cuts
// strictly below their score, so ties at a cut go to the lower cell.
StudentDiscretization discretize_students(std::span<const double> z, std::span<const int> district, int K);

// Explicit cutoffs, same tie rule as the quantile version.
std::vector<int> discretize_students_fixed(std::span<const double> z, std::span<const double> cutoffs);

// Leave-own-out fractions of each non-reference category (1..K-1) among the
// other members of one roster. Throws InvalidInput for a singleton roster.
std::vector<std::vector<double>> peer_fractions(std::span<const int> roster_types, int K);

}  // namespace tcr
