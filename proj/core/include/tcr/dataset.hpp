#pragma once

// The experiment as implemented: randomization blocks, sections with an
// assigned and a realized teacher, teachers, and students with an assigned
// and a realized section.
//
// Ids of blocks, sections and teachers are dense (id == position). Student
// ids are unique but need not be dense, since attrition deletes rows.
// Auxiliary attributes are named columns; NaN marks a missing value.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tcr {

enum class SchoolType { elementary, middle };

std::string_view to_string(SchoolType t);
SchoolType parse_school_type(std::string_view s);  // throws DataError

struct Block {
  int id = 0;
  int school = 0;
  int district = 0;
  SchoolType school_type = SchoolType::elementary;
  friend bool operator==(const Block&, const Block&) = default;
};

struct Section {
  int id = 0;
  int block = 0;
  int assigned_teacher = 0;
  int realized_teacher = 0;
  friend bool operator==(const Section&, const Section&) = default;
};

struct Teacher {
  int id = 0;
  int block = 0;
  double practice_score = 0.0;
  std::vector<double> aux;
};

struct Student {
  int id = 0;
  int district = 0;
  int school = 0;
  int block = 0;
  int assigned_section = 0;
  int realized_section = 0;
  double baseline_score = 0.0;  // z-score within district
  double outcome = 0.0;
  std::vector<double> aux;
};

// Latent draws known only to the generator. Never read by estimation,
// diagnostics or reallocation code.
struct OracleColumns {
  std::vector<double> student_v;  // one per student row
  std::vector<double> teacher_u;  // one per teacher
};

struct Dataset {
  std::vector<std::string> teacher_aux_names;
  std::vector<std::string> student_aux_names;
  std::vector<Block> blocks;
  std::vector<Section> sections;
  std::vector<Teacher> teachers;
  std::vector<Student> students;
  std::optional<OracleColumns> oracle;

  // Structural checks; throws DataError describing the first violation.
  void validate() const;

  // Copy with the oracle columns removed.
  Dataset estimator_view() const;

  std::optional<std::size_t> teacher_aux(std::string_view name) const;
  std::optional<std::size_t> student_aux(std::string_view name) const;

  int district_count() const;
};

// Field-by-field equality; NaN compares equal to NaN.
bool same_visible(const Dataset& a, const Dataset& b);
bool same_including_oracle(const Dataset& a, const Dataset& b);

// Student row indices per section.
std::vector<std::vector<std::size_t>> realized_rosters(const Dataset& ds);
std::vector<std::vector<std::size_t>> assigned_rosters(const Dataset& ds);

// Leave-own-out mean of `values` over each student's realized (or assigned)
// roster, skipping NaN peers. NaN when no valid peer remains.
std::vector<double> peer_mean(const Dataset& ds, const std::vector<double>& values, bool realized);

}  // namespace tcr
