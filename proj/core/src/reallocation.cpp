#include "tcr/reallocation.hpp"

#include <cmath>
#include <map>
#include <tuple>

#include "tcr/csv.hpp"
#include "tcr/error.hpp"

namespace tcr {

std::string_view to_string(CellScheme s) {
  switch (s) {
    case CellScheme::district_school_type: return "district-school-type";
    case CellScheme::school_type: return "school-type";
    case CellScheme::block: return "block";
  }
  return "district-school-type";
}

CellScheme parse_cell_scheme(std::string_view s) {
  for (auto c : {CellScheme::district_school_type, CellScheme::school_type, CellScheme::block})
    if (to_string(c) == s) return c;
  throw InvalidInput("unknown cell scheme '" + std::string(s) + "' (district-school-type|school-type|block)");
}

AssignmentProblem ClassroomValueTable::problem(Sense sense) const {
  AssignmentProblem p;
  p.L = L;
  p.values = values;
  p.cell_names = cell_names;
  p.sense = sense;
  p.supply.assign(cell_names.size(), std::vector<int>(static_cast<std::size_t>(L), 0));
  for (const auto& c : clusters) {
    p.cell.push_back(c.cell);
    ++p.supply[static_cast<std::size_t>(c.cell)][static_cast<std::size_t>(c.supply_level)];
  }
  return p;
}

std::vector<int> ClassroomValueTable::status_quo() const {
  std::vector<int> out;
  for (const auto& c : clusters) out.push_back(c.status_quo_level);
  return out;
}

namespace {

struct Coefficients {
  std::vector<double> delta;                // L-1
  std::vector<std::vector<double>> eta;     // (K-1) x (L-1)
  std::vector<std::vector<double>> lambda;  // (L-1) x (K-1)
};

Coefficients extract(const IVEstimate& est, int K, int L, bool include_lambda) {
  for (const auto& n : est.names) {
    if (n == "FFT" || n == "FFT*") throw InvalidInput("counterfactual prediction needs teacher-level dummies, not a continuous score");
    if (n.rfind("W[", 0) == 0) {
      const int l = std::stoi(n.substr(2));
      if (l >= L) throw InvalidInput("estimate column " + n + " does not match L = " + std::to_string(L));
    }
    if (n.rfind("X[", 0) == 0) {
      const int k = std::stoi(n.substr(2));
      if (k >= K) throw InvalidInput("estimate column " + n + " does not match K = " + std::to_string(K));
    }
  }
  auto get = [&](const std::string& name) {
    auto i = est.index_of(name);
    return i ? est.coef(static_cast<Eigen::Index>(*i)) : 0.0;
  };
  Coefficients c;
  for (int l = 1; l < L; ++l) c.delta.push_back(get(w_name(l)));
  c.eta.assign(static_cast<std::size_t>(K - 1), std::vector<double>(static_cast<std::size_t>(L - 1), 0.0));
  for (int k = 1; k < K; ++k)
    for (int l = 1; l < L; ++l) c.eta[k - 1][l - 1] = get(xw_name(k, l));
  c.lambda.assign(static_cast<std::size_t>(L - 1), std::vector<double>(static_cast<std::size_t>(K - 1), 0.0));
  if (include_lambda)
    for (int l = 1; l < L; ++l)
      for (int k = 1; k < K; ++k) c.lambda[l - 1][k - 1] = get(wxbar_name(l, k));
  return c;
}

}  // namespace

ClassroomValueTable predict_counterfactuals(const Dataset& ds, const Discretization& disc, const IVEstimate& est,
                                            const PredictionOptions& opt, std::span<const double> student_weights) {
  if (!student_weights.empty() && student_weights.size() != ds.students.size())
    throw InvalidInput("student weights must have one entry per student row");
  const int K = disc.K, L = disc.L;
  if (K < 2 || L < 2) throw InvalidInput("discretization is missing its K and L");
  ClassroomValueTable table;
  table.K = K;
  table.L = L;
  const auto coef = extract(est, K, L, opt.include_lambda);

  // teacher clusters in teacher-id order
  std::vector<int> cluster_of(ds.teachers.size(), -1);
  for (const auto& s : ds.sections) cluster_of[static_cast<std::size_t>(s.realized_teacher)] = 0;
  std::map<std::tuple<int, int, int>, int> cells;
  for (std::size_t t = 0; t < ds.teachers.size(); ++t) {
    if (cluster_of[t] < 0) continue;
    cluster_of[t] = static_cast<int>(table.clusters.size());
    TeacherCluster c;
    c.teacher = static_cast<int>(t);
    c.status_quo_level = disc.teacher_level[t];
    table.clusters.push_back(c);
  }
  for (const auto& s : ds.sections) table.clusters[static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(s.realized_teacher)])].sections.push_back(s.id);
  for (auto& c : table.clusters) {
    const auto& first = ds.sections[static_cast<std::size_t>(c.sections.front())];
    const auto& b = ds.blocks[static_cast<std::size_t>(first.block)];
    std::tuple<int, int, int> key;
    switch (opt.cells) {
      case CellScheme::district_school_type: key = {b.district, static_cast<int>(b.school_type), 0}; break;
      case CellScheme::school_type: key = {0, static_cast<int>(b.school_type), 0}; break;
      case CellScheme::block: key = {0, 0, b.id}; break;
    }
    cells.try_emplace(key, 0);
    c.supply_level = opt.supply_from_assigned ? disc.teacher_level[static_cast<std::size_t>(first.assigned_teacher)]
                                              : c.status_quo_level;
  }
  {
    int next = 0;
    for (auto& [key, id] : cells) {
      id = next++;
      const auto [d, type, block] = key;
      switch (opt.cells) {
        case CellScheme::district_school_type:
          table.cell_names.push_back("district" + std::to_string(d) + "-" + std::string(to_string(static_cast<SchoolType>(type))));
          break;
        case CellScheme::school_type: table.cell_names.emplace_back(to_string(static_cast<SchoolType>(type))); break;
        case CellScheme::block: table.cell_names.push_back("block" + std::to_string(block)); break;
      }
    }
  }
  for (auto& c : table.clusters) {
    const auto& b = ds.blocks[static_cast<std::size_t>(ds.sections[static_cast<std::size_t>(c.sections.front())].block)];
    std::tuple<int, int, int> key;
    switch (opt.cells) {
      case CellScheme::district_school_type: key = {b.district, static_cast<int>(b.school_type), 0}; break;
      case CellScheme::school_type: key = {0, static_cast<int>(b.school_type), 0}; break;
      case CellScheme::block: key = {0, 0, b.id}; break;
    }
    c.cell = cells.at(key);
  }

  table.values.assign(table.clusters.size(), std::vector<double>(static_cast<std::size_t>(L), 0.0));
  const auto realized = realized_rosters(ds);
  const auto assigned = assigned_rosters(ds);
  for (std::size_t i = 0; i < ds.students.size(); ++i) {
    const auto& s = ds.students[i];
    const auto& roster = realized[static_cast<std::size_t>(s.realized_section)];
    if (roster.size() < 2 || assigned[static_cast<std::size_t>(s.assigned_section)].size() < 2) continue;
    const int x = disc.student_type[i];
    std::vector<double> xbar(static_cast<std::size_t>(K - 1), 0.0);
    if (opt.include_lambda) {
      for (auto j : roster)
        if (j != i && disc.student_type[j] > 0) xbar[static_cast<std::size_t>(disc.student_type[j] - 1)] += 1.0;
      for (auto& f : xbar) f /= static_cast<double>(roster.size() - 1);
    }
    std::vector<double> yhat(static_cast<std::size_t>(L), 0.0);
    for (int w = 1; w < L; ++w) {
      double v = coef.delta[w - 1];
      if (x > 0) v += coef.eta[x - 1][w - 1];
      if (opt.include_lambda)
        for (int k = 1; k < K; ++k) v += coef.lambda[w - 1][k - 1] * xbar[k - 1];
      yhat[w] = v;
    }
    const int cl = cluster_of[static_cast<std::size_t>(ds.sections[static_cast<std::size_t>(s.realized_section)].realized_teacher)];
    const double wt = student_weights.empty() ? 1.0 : student_weights[i];
    for (int w = 0; w < L; ++w) table.values[static_cast<std::size_t>(cl)][static_cast<std::size_t>(w)] += wt * yhat[static_cast<std::size_t>(w)];
    table.student_rows.push_back(i);
    table.student_cluster.push_back(cl);
    table.student_type.push_back(x);
    table.student_weight.push_back(wt);
    table.student_values.push_back(std::move(yhat));
  }
  return table;
}

AreResult compute_are(const ClassroomValueTable& table, std::span<const int> plan_a, std::span<const int> plan_b,
                      const AreOptions& opt) {
  if (plan_a.size() != table.clusters.size() || plan_b.size() != table.clusters.size())
    throw InvalidInput("plans must cover every cluster of the value table");
  AreResult r;
  double total = 0.0, moved = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < table.student_rows.size(); ++i) {
    if (opt.subgroup && table.student_type[i] != *opt.subgroup) continue;
    const auto c = static_cast<std::size_t>(table.student_cluster[i]);
    const bool reassigned = plan_a[c] != plan_b[c];
    const double w = table.student_weight[i];
    total += w;
    ++r.students;
    if (reassigned) {
      moved += w;
      ++r.reassigned;
    }
    if (opt.conditional_on_reassigned && !reassigned) continue;
    const auto& v = table.student_values[i];
    sum += w * (v[static_cast<std::size_t>(plan_a[c])] - v[static_cast<std::size_t>(plan_b[c])]);
  }
  r.reassigned_fraction = total > 0 ? moved / total : 0.0;
  const double denom = opt.conditional_on_reassigned ? moved : total;
  r.weight = denom;
  if (!(denom > 0)) {
    r.empty = true;
    r.gain = 0.0;
    return r;
  }
  r.gain = sum / denom;
  return r;
}

Assortativeness assortativeness_summary(const ClassroomValueTable& table, std::span<const int> plan) {
  if (plan.size() != table.clusters.size()) throw InvalidInput("plan must cover every cluster");
  const auto K = static_cast<std::size_t>(table.K);
  std::vector<std::vector<double>> mass(table.clusters.size(), std::vector<double>(K, 0.0));
  std::vector<double> tot(table.clusters.size(), 0.0);
  for (std::size_t i = 0; i < table.student_rows.size(); ++i) {
    const auto c = static_cast<std::size_t>(table.student_cluster[i]);
    mass[c][static_cast<std::size_t>(table.student_type[i])] += table.student_weight[i];
    tot[c] += table.student_weight[i];
  }
  Assortativeness out;
  for (int l = 0; l < table.L; ++l) {
    AssortativenessRow row;
    row.level = l;
    row.shares.assign(K, 0.0);
    for (std::size_t c = 0; c < plan.size(); ++c) {
      if (plan[c] != l || !(tot[c] > 0)) continue;
      ++row.classrooms;
      for (std::size_t k = 0; k < K; ++k) row.shares[k] += mass[c][k] / tot[c];
    }
    if (row.classrooms == 0) {
      out.notices.push_back("teacher level " + std::to_string(l) + " has no classrooms; row omitted");
      continue;
    }
    for (auto& s : row.shares) s /= static_cast<double>(row.classrooms);
    out.rows.push_back(std::move(row));
  }
  return out;
}

ReallocationReport reallocate(const ClassroomValueTable& table) {
  ReallocationReport rep;
  rep.optimal = solve_assignment(table.problem(Sense::maximize));
  rep.worst = solve_assignment(table.problem(Sense::minimize));
  rep.status_quo = table.status_quo();
  rep.status_quo_objective = plan_objective(table.problem(Sense::maximize), rep.status_quo);
  std::vector<std::optional<int>> groups{std::nullopt};
  for (int k = 0; k < table.K; ++k) groups.emplace_back(k);
  for (const auto& [panel, other] : {std::pair<std::string, const std::vector<int>*>{"optimal_vs_status_quo", &rep.status_quo},
                                     {"optimal_vs_worst", &rep.worst.level}})
    for (bool cond : {false, true})
      for (const auto& g : groups) {
        AreCell cell;
        cell.panel = panel;
        cell.subgroup = g ? "type[" + std::to_string(*g) + "]" : "all";
        cell.conditional = cond;
        cell.result = compute_are(table, rep.optimal.level, *other, {g, cond});
        rep.effects.push_back(std::move(cell));
      }
  rep.reassigned_fraction = compute_are(table, rep.optimal.level, rep.status_quo).reassigned_fraction;
  return rep;
}

void write_assortativeness_csv(const std::filesystem::path& path,
                               const std::vector<std::pair<std::string, Assortativeness>>& plans) {
  csv::Writer w(path);
  w.line("plan", "teacher_level", "student_type", "share");
  for (const auto& [name, a] : plans)
    for (const auto& row : a.rows)
      for (std::size_t k = 0; k < row.shares.size(); ++k) w.line(name, row.level, static_cast<int>(k), row.shares[k]);
}

}  // namespace tcr
