#include "tcr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tcr/error.hpp"

namespace tcr {

std::string_view to_string(SchoolType t) { return t == SchoolType::elementary ? "elementary" : "middle"; }

SchoolType parse_school_type(std::string_view s) {
  if (s == "elementary") return SchoolType::elementary;
  if (s == "middle") return SchoolType::middle;
  throw DataError("unknown school type '" + std::string(s) + "'");
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DataError(what);
}

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

bool same_doubles(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), same_double);
}

}  // namespace

void Dataset::validate() const {
  const auto nb = static_cast<int>(blocks.size());
  const auto ns = static_cast<int>(sections.size());
  const auto nt = static_cast<int>(teachers.size());
  for (int i = 0; i < nb; ++i) require(blocks[i].id == i, "block ids must be dense; row " + std::to_string(i));
  for (int i = 0; i < ns; ++i) {
    const auto& s = sections[i];
    const auto where = "section " + std::to_string(i);
    require(s.id == i, "section ids must be dense; row " + std::to_string(i));
    require(s.block >= 0 && s.block < nb, where + " references unknown block");
    require(s.assigned_teacher >= 0 && s.assigned_teacher < nt, where + " references unknown assigned teacher");
    require(s.realized_teacher >= 0 && s.realized_teacher < nt, where + " references unknown realized teacher");
    require(teachers[s.assigned_teacher].block == s.block, where + ": assigned teacher is outside the section's block");
  }
  for (int i = 0; i < nt; ++i) {
    require(teachers[i].id == i, "teacher ids must be dense; row " + std::to_string(i));
    require(teachers[i].block >= 0 && teachers[i].block < nb, "teacher " + std::to_string(i) + " references unknown block");
    require(teachers[i].aux.size() == teacher_aux_names.size(), "teacher " + std::to_string(i) + " has wrong aux width");
    require(std::isfinite(teachers[i].practice_score), "teacher " + std::to_string(i) + " has a non-finite practice score");
  }
  std::set<int> ids;
  for (std::size_t i = 0; i < students.size(); ++i) {
    const auto& s = students[i];
    const auto where = "student " + std::to_string(s.id);
    require(ids.insert(s.id).second, "duplicate student id " + std::to_string(s.id));
    require(s.block >= 0 && s.block < nb, where + " references unknown block");
    require(s.assigned_section >= 0 && s.assigned_section < ns, where + " references unknown assigned section");
    require(s.realized_section >= 0 && s.realized_section < ns, where + " references unknown realized section");
    require(sections[s.assigned_section].block == s.block, where + ": assigned section is outside the student's block");
    require(blocks[s.block].district == s.district && blocks[s.block].school == s.school,
            where + ": district/school disagree with the block table");
    require(s.aux.size() == student_aux_names.size(), where + " has wrong aux width");
  }
  if (oracle) {
    require(oracle->student_v.size() == students.size(), "oracle student column has wrong length");
    require(oracle->teacher_u.size() == teachers.size(), "oracle teacher column has wrong length");
  }
}

Dataset Dataset::estimator_view() const {
  Dataset out = *this;
  out.oracle.reset();
  return out;
}

std::optional<std::size_t> Dataset::teacher_aux(std::string_view name) const {
  auto it = std::find(teacher_aux_names.begin(), teacher_aux_names.end(), name);
  if (it == teacher_aux_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - teacher_aux_names.begin());
}

std::optional<std::size_t> Dataset::student_aux(std::string_view name) const {
  auto it = std::find(student_aux_names.begin(), student_aux_names.end(), name);
  if (it == student_aux_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - student_aux_names.begin());
}

int Dataset::district_count() const {
  int m = -1;
  for (const auto& b : blocks) m = std::max(m, b.district);
  return m + 1;
}

bool same_visible(const Dataset& a, const Dataset& b) {
  if (a.teacher_aux_names != b.teacher_aux_names || a.student_aux_names != b.student_aux_names) return false;
  if (a.blocks != b.blocks || a.sections != b.sections) return false;
  if (a.teachers.size() != b.teachers.size() || a.students.size() != b.students.size()) return false;
  for (std::size_t i = 0; i < a.teachers.size(); ++i) {
    const auto &x = a.teachers[i], &y = b.teachers[i];
    if (x.id != y.id || x.block != y.block || !same_double(x.practice_score, y.practice_score) ||
        !same_doubles(x.aux, y.aux))
      return false;
  }
  for (std::size_t i = 0; i < a.students.size(); ++i) {
    const auto &x = a.students[i], &y = b.students[i];
    if (x.id != y.id || x.district != y.district || x.school != y.school || x.block != y.block ||
        x.assigned_section != y.assigned_section || x.realized_section != y.realized_section ||
        !same_double(x.baseline_score, y.baseline_score) || !same_double(x.outcome, y.outcome) ||
        !same_doubles(x.aux, y.aux))
      return false;
  }
  return true;
}

bool same_including_oracle(const Dataset& a, const Dataset& b) {
  if (!same_visible(a, b) || a.oracle.has_value() != b.oracle.has_value()) return false;
  if (!a.oracle) return true;
  return same_doubles(a.oracle->student_v, b.oracle->student_v) &&
         same_doubles(a.oracle->teacher_u, b.oracle->teacher_u);
}

std::vector<std::vector<std::size_t>> realized_rosters(const Dataset& ds) {
  std::vector<std::vector<std::size_t>> r(ds.sections.size());
  for (std::size_t i = 0; i < ds.students.size(); ++i) r[ds.students[i].realized_section].push_back(i);
  return r;
}

std::vector<std::vector<std::size_t>> assigned_rosters(const Dataset& ds) {
  std::vector<std::vector<std::size_t>> r(ds.sections.size());
  for (std::size_t i = 0; i < ds.students.size(); ++i) r[ds.students[i].assigned_section].push_back(i);
  return r;
}

std::vector<double> peer_mean(const Dataset& ds, const std::vector<double>& values, bool realized) {
  const auto rosters = realized ? realized_rosters(ds) : assigned_rosters(ds);
  std::vector<double> out(ds.students.size(), std::nan(""));
  for (const auto& roster : rosters) {
    double sum = 0.0;
    std::size_t n = 0;
    for (auto i : roster)
      if (!std::isnan(values[i])) {
        sum += values[i];
        ++n;
      }
    for (auto i : roster) {
      const bool own = !std::isnan(values[i]);
      const std::size_t peers = n - (own ? 1 : 0);
      if (peers == 0) continue;
      out[i] = (sum - (own ? values[i] : 0.0)) / static_cast<double>(peers);
    }
  }
  return out;
}

}  // namespace tcr
