#include "tcr/dataset_io.hpp"

#include <cmath>
#include <string>

#include "tcr/csv.hpp"
#include "tcr/error.hpp"

namespace tcr {

namespace fs = std::filesystem;
using csv::format_double;

void export_dataset(const Dataset& ds, const fs::path& dir, bool with_oracle) {
  ds.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidInput("cannot create output directory " + dir.string() + ": " + ec.message());
  const bool oracle = with_oracle && ds.oracle.has_value();

  {
    csv::Writer w(dir / "blocks.csv");
    w.line("block_id", "school_id", "district_id", "school_type");
    for (const auto& b : ds.blocks) w.line(b.id, b.school, b.district, to_string(b.school_type));
  }
  {
    csv::Writer w(dir / "sections.csv");
    w.line("section_id", "block_id", "assigned_teacher_id", "realized_teacher_id");
    for (const auto& s : ds.sections) w.line(s.id, s.block, s.assigned_teacher, s.realized_teacher);
  }
  {
    csv::Writer w(dir / "teachers.csv");
    std::vector<std::string> header{"teacher_id", "block_id", "practice_score"};
    for (const auto& n : ds.teacher_aux_names) header.push_back("aux_" + n);
    if (oracle) header.emplace_back("latent_U");
    w.row(header);
    for (std::size_t i = 0; i < ds.teachers.size(); ++i) {
      const auto& t = ds.teachers[i];
      std::vector<std::string> f{std::to_string(t.id), std::to_string(t.block), format_double(t.practice_score)};
      for (double a : t.aux) f.push_back(format_double(a));
      if (oracle) f.push_back(format_double(ds.oracle->teacher_u[i]));
      w.row(f);
    }
  }
  {
    csv::Writer w(dir / "students.csv");
    std::vector<std::string> header{"student_id", "district_id", "school_id", "block_id",
                                    "assigned_section_id", "realized_section_id", "baseline_score", "outcome"};
    for (const auto& n : ds.student_aux_names) header.push_back("aux_" + n);
    if (oracle) header.emplace_back("latent_V");
    w.row(header);
    for (std::size_t i = 0; i < ds.students.size(); ++i) {
      const auto& s = ds.students[i];
      std::vector<std::string> f{std::to_string(s.id),
                                 std::to_string(s.district),
                                 std::to_string(s.school),
                                 std::to_string(s.block),
                                 std::to_string(s.assigned_section),
                                 std::to_string(s.realized_section),
                                 format_double(s.baseline_score),
                                 format_double(s.outcome)};
      for (double a : s.aux) f.push_back(format_double(a));
      if (oracle) f.push_back(format_double(ds.oracle->student_v[i]));
      w.row(f);
    }
  }
}

namespace {

std::vector<std::pair<std::string, std::size_t>> aux_columns(const csv::Table& t) {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (std::size_t c = 0; c < t.header.size(); ++c)
    if (t.header[c].rfind("aux_", 0) == 0) out.emplace_back(t.header[c].substr(4), c);
  return out;
}

void require_finite(const csv::Table& t, std::size_t row, std::size_t col, double v) {
  if (!std::isfinite(v))
    throw DataError(t.source.filename().string() + " line " + std::to_string(row + 2) + ": column '" +
                    t.header[col] + "' must be a finite number");
}

}  // namespace

Dataset import_dataset(const fs::path& dir) {
  Dataset ds;
  const auto blocks = csv::read(dir / "blocks.csv");
  const auto sections = csv::read(dir / "sections.csv");
  const auto teachers = csv::read(dir / "teachers.csv");
  const auto students = csv::read(dir / "students.csv");

  {
    const auto id = blocks.column("block_id"), school = blocks.column("school_id"),
               district = blocks.column("district_id"), type = blocks.column("school_type");
    for (std::size_t r = 0; r < blocks.rows.size(); ++r) {
      Block b;
      b.id = blocks.get_int(r, id);
      b.school = blocks.get_int(r, school);
      b.district = blocks.get_int(r, district);
      try {
        b.school_type = parse_school_type(blocks.get(r, type));
      } catch (const DataError& e) {
        throw DataError("blocks.csv line " + std::to_string(r + 2) + ": " + e.what());
      }
      ds.blocks.push_back(b);
    }
  }
  {
    const auto id = sections.column("section_id"), block = sections.column("block_id"),
               assigned = sections.column("assigned_teacher_id"), realized = sections.column("realized_teacher_id");
    for (std::size_t r = 0; r < sections.rows.size(); ++r)
      ds.sections.push_back({sections.get_int(r, id), sections.get_int(r, block), sections.get_int(r, assigned),
                             sections.get_int(r, realized)});
  }

  const bool oracle = teachers.has_column("latent_U") && students.has_column("latent_V");
  OracleColumns latent;
  {
    const auto id = teachers.column("teacher_id"), block = teachers.column("block_id"),
               score = teachers.column("practice_score");
    const auto aux = aux_columns(teachers);
    for (const auto& [name, c] : aux) ds.teacher_aux_names.push_back(name);
    const auto u = oracle ? teachers.column("latent_U") : 0;
    for (std::size_t r = 0; r < teachers.rows.size(); ++r) {
      Teacher t;
      t.id = teachers.get_int(r, id);
      t.block = teachers.get_int(r, block);
      t.practice_score = teachers.get_double(r, score);
      require_finite(teachers, r, score, t.practice_score);
      for (const auto& [name, c] : aux) t.aux.push_back(teachers.get_double(r, c));
      if (oracle) latent.teacher_u.push_back(teachers.get_double(r, u));
      ds.teachers.push_back(std::move(t));
    }
  }
  {
    const auto id = students.column("student_id"), district = students.column("district_id"),
               school = students.column("school_id"), block = students.column("block_id"),
               assigned = students.column("assigned_section_id"), realized = students.column("realized_section_id"),
               baseline = students.column("baseline_score"), outcome = students.column("outcome");
    const auto aux = aux_columns(students);
    for (const auto& [name, c] : aux) ds.student_aux_names.push_back(name);
    const auto v = oracle ? students.column("latent_V") : 0;
    for (std::size_t r = 0; r < students.rows.size(); ++r) {
      Student s;
      s.id = students.get_int(r, id);
      s.district = students.get_int(r, district);
      s.school = students.get_int(r, school);
      s.block = students.get_int(r, block);
      s.assigned_section = students.get_int(r, assigned);
      s.realized_section = students.get_int(r, realized);
      s.baseline_score = students.get_double(r, baseline);
      require_finite(students, r, baseline, s.baseline_score);
      s.outcome = students.get_double(r, outcome);
      require_finite(students, r, outcome, s.outcome);
      for (const auto& [name, c] : aux) s.aux.push_back(students.get_double(r, c));
      if (oracle) latent.student_v.push_back(students.get_double(r, v));
      ds.students.push_back(std::move(s));
    }
  }
  if (oracle) ds.oracle = std::move(latent);
  ds.validate();
  return ds;
}

}  // namespace tcr
