#pragma once

// Counterfactual classroom values, optimal / worst reallocations within
// cells, average reallocation effects and assortativeness summaries.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcr/assignment.hpp"
#include "tcr/dataset.hpp"
#include "tcr/design.hpp"
#include "tcr/estimator.hpp"

namespace tcr {

enum class CellScheme { district_school_type, school_type, block };

std::string_view to_string(CellScheme s);
CellScheme parse_cell_scheme(std::string_view s);  // "district-school-type" | "school-type" | "block"

struct PredictionOptions {
  bool include_lambda = false;
  CellScheme cells = CellScheme::district_school_type;
  bool supply_from_assigned = false;  // default: levels of the realized teachers
};

// A teacher together with every section they actually teach.
struct TeacherCluster {
  int teacher = 0;
  std::vector<int> sections;
  int cell = 0;
  int status_quo_level = 0;
  int supply_level = 0;
};

struct ClassroomValueTable {
  int K = 0;
  int L = 0;
  std::vector<TeacherCluster> clusters;
  std::vector<std::string> cell_names;
  std::vector<std::vector<double>> values;  // cluster x level: sum of weighted student predictions

  // student level (students with defined peer groups)
  std::vector<std::size_t> student_rows;
  std::vector<int> student_cluster;
  std::vector<int> student_type;
  std::vector<double> student_weight;
  std::vector<std::vector<double>> student_values;  // student x level

  AssignmentProblem problem(Sense sense) const;
  std::vector<int> status_quo() const;
};

// Predicted gain for student i at level w relative to the reference level:
//   w'delta + (X_i (x) w)'eta [+ (w (x) Xbar_realized(i))'lambda],
// summed with weights over each teacher's realized students.
// `student_weights`, when given, has one entry per dataset student row.
ClassroomValueTable predict_counterfactuals(const Dataset& ds, const Discretization& disc, const IVEstimate& est,
                                            const PredictionOptions& opt,
                                            std::span<const double> student_weights = {});

struct AreOptions {
  std::optional<int> subgroup;  // student type filter
  bool conditional_on_reassigned = false;
};

struct AreResult {
  double gain = 0.0;
  double reassigned_fraction = 0.0;
  double weight = 0.0;  // total weight of the filtered students
  std::size_t students = 0;
  std::size_t reassigned = 0;
  bool empty = false;  // filtered set is empty; gain is reported as 0
};

AreResult compute_are(const ClassroomValueTable& table, std::span<const int> plan_a, std::span<const int> plan_b,
                      const AreOptions& opt = {});

struct AssortativenessRow {
  int level = 0;
  std::size_t classrooms = 0;
  std::vector<double> shares;  // K entries summing to 1
};

struct Assortativeness {
  std::vector<AssortativenessRow> rows;  // levels with at least one classroom
  std::vector<std::string> notices;
};

Assortativeness assortativeness_summary(const ClassroomValueTable& table, std::span<const int> plan);

struct AreCell {
  std::string panel;     // "optimal_vs_status_quo" | "optimal_vs_worst"
  std::string subgroup;  // "all" or "type[k]"
  bool conditional = false;
  AreResult result;
};

struct ReallocationReport {
  AssignmentPlan optimal;
  AssignmentPlan worst;
  std::vector<int> status_quo;
  double status_quo_objective = 0.0;
  std::vector<AreCell> effects;
  double reassigned_fraction = 0.0;  // optimal vs status quo, all students
};

ReallocationReport reallocate(const ClassroomValueTable& table);

// Long format: plan, teacher_level, student_type, share.
void write_assortativeness_csv(const std::filesystem::path& path,
                               const std::vector<std::pair<std::string, Assortativeness>>& plans);

}  // namespace tcr
