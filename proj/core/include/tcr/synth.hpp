#pragma once

// Synthetic classroom experiments with known production parameters.

#include <cstdint>
#include <string_view>
#include <vector>

#include "tcr/dataset.hpp"
#include "tcr/discretize.hpp"

namespace tcr {

// Outcome model coefficients. Interaction vectors are flattened Kronecker
// products with the first factor varying slowest:
//   zeta   X (x) Xbar : index (k-1)(K-1) + (j-1)
//   eta    X (x) W    : index (k-1)(L-1) + (l-1)
//   lambda W (x) Xbar : index (l-1)(K-1) + (k-1)
struct ProductionParams {
  double alpha = 0.0;
  std::vector<double> beta;    // K-1
  std::vector<double> gamma;   // K-1
  std::vector<double> delta;   // L-1
  std::vector<double> zeta;    // (K-1)^2
  std::vector<double> eta;     // (K-1)(L-1)
  std::vector<double> lambda;  // (L-1)(K-1)
  double rho = 0.0;
  double sd_V = 0.0;
  double sd_U = 0.0;

  void validate(int K, int L) const;  // throws InvalidInput
  static ProductionParams zeros(int K, int L);
  // Magnitudes of a 3x3 model without teacher-by-peer terms; other sizes
  // get a monotone pattern of the same scale.
  static ProductionParams defaults(int K, int L);
};

// How non-compliance (or assignment) departs from the idiosyncratic default.
enum class EndogenousMode {
  none,
  rigged_assignment,                    // assigned teachers track classroom baseline means
  teacher_sorting,                      // displaced teachers sort on experience vs. assigned peer mean
  student_sorting_on_assigned_teacher,  // strong students move toward the highest-FFT assigned teacher
  student_ability_sorting,              // high-V students move toward the best realized teacher
};

std::string_view to_string(EndogenousMode m);
EndogenousMode parse_endogenous_mode(std::string_view s);

struct PopulationConfig {
  int n_districts = 6;
  int schools_per_district = 10;
  int blocks_per_school = 4;
  int classrooms_min = 2;
  int classrooms_max = 3;
  int class_size_min = 10;
  int class_size_max = 18;
  int K = 3;
  int L = 3;
  std::vector<double> teacher_cutoffs;  // empty -> CategorySpec defaults for L
  double practice_beta_a = 13.0;        // practice = 1 + 3 Beta(a, b)
  double practice_beta_b = 13.0;
  double elementary_share = 0.6;
  double district_sd = 0.3;
  double sorting_strength = 1.0;
  double v_loading = 0.3;               // V = v_loading * z + sd_V * N(0, 1)
  double noncompliance_rate_teachers = 0.3;
  double noncompliance_rate_students = 0.05;
  double attrition_rate = 0.0;
  double student_aux_missing_rate = 0.0;
  EndogenousMode endogenous_mode = EndogenousMode::none;
  double endogenous_strength = 2.0;
  std::uint64_t seed = 1;

  void validate() const;  // throws InvalidInput
  CategorySpec category_spec() const;
};

// Builds blocks, classrooms, randomized assignment, non-compliance,
// attrition and outcomes. The result carries oracle columns.
Dataset generate(const PopulationConfig& config, const ProductionParams& params);

// Teacher displacements and student moves, all within block. Requires the
// oracle columns only for modes that key on latent draws. Deterministic in
// config.seed.
Dataset apply_noncompliance(const Dataset& ds, const PopulationConfig& config);

// Outcome equation evaluated on realized links (leave-own-out peer means
// over realized rosters). Requires oracle columns. Students alone in their
// realized section get zero peer terms.
std::vector<double> production_outcome(const Dataset& ds, const ProductionParams& params, const CategorySpec& spec);

}  // namespace tcr
