#include "tcr/pipeline.hpp"

#include <cmath>

#include "tcr/error.hpp"

namespace tcr {

std::string effect_statistic_name(const AreCell& cell) {
  return std::string(cell.conditional ? "AREC" : "ARE") + "[" + cell.panel + "," + cell.subgroup + "]";
}

Pipeline::Pipeline(Dataset ds, PipelineConfig config) : ds_(std::move(ds)), config_(std::move(config)) {
  ds_.validate();
  config_.spec.validate();
  if (config_.design.teacher != TeacherMeasure::levels)
    throw InvalidInput("the reallocation pipeline needs discrete teacher levels");
  config_.design.include_lambda = config_.prediction.include_lambda;
  disc_ = discretize(ds_, config_.spec);
  design_ = build_design(ds_, disc_, config_.spec, config_.design);

  std::vector<int> index(ds_.teachers.size(), -1);
  for (const auto& s : ds_.sections) index[static_cast<std::size_t>(s.realized_teacher)] = 0;
  for (std::size_t t = 0; t < index.size(); ++t)
    if (index[t] == 0) {
      index[t] = static_cast<int>(cluster_teacher_.size());
      cluster_teacher_.push_back(static_cast<int>(t));
    }
  student_cluster_.reserve(ds_.students.size());
  for (const auto& st : ds_.students) {
    const auto& sec = ds_.sections[static_cast<std::size_t>(st.realized_section)];
    student_cluster_.push_back(index[static_cast<std::size_t>(sec.realized_teacher)]);
  }

  const auto point = run();
  names_ = {"objective[optimal]", "objective[status_quo]", "objective[worst]", "reassigned_fraction"};
  for (const auto& cell : point.report.effects) names_.push_back(effect_statistic_name(cell));
  for (const auto& n : point.estimate.names)
    if (n.starts_with("W[") || (n.starts_with("X[") && n.find("xW[") != std::string::npos)) names_.push_back(n);
}

std::vector<double> Pipeline::student_weights(std::span<const double> cluster_weights) const {
  std::vector<double> w(ds_.students.size(), 1.0);
  if (cluster_weights.empty()) return w;
  if (cluster_weights.size() != cluster_teacher_.size())
    throw InvalidInput("expected " + std::to_string(cluster_teacher_.size()) + " cluster weights, got " +
                       std::to_string(cluster_weights.size()));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = cluster_weights[static_cast<std::size_t>(student_cluster_[i])];
  return w;
}

PipelineResult Pipeline::run(std::span<const double> cluster_weights) const {
  const auto sw = student_weights(cluster_weights);
  DesignMatrix m = design_;
  for (std::size_t r = 0; r < m.n(); ++r) m.weights(static_cast<Eigen::Index>(r)) = sw[m.rows[r]];
  const auto absorbed = absorb_blocks(m);
  PipelineResult out;
  out.estimate = config_.method == Method::tsls ? tsls_fit(absorbed) : ols_fit(absorbed);
  out.table = predict_counterfactuals(ds_, disc_, out.estimate, config_.prediction, sw);
  out.report = reallocate(out.table);
  return out;
}

std::vector<double> Pipeline::statistics(const PipelineResult& r) const {
  // objectives per unit of student weight, so draws share one scale
  double total = 0.0;
  for (double w : r.table.student_weight) total += w;
  if (!(total > 0)) throw NumericalError("replication has no student weight");
  std::vector<double> v{r.report.optimal.objective / total, r.report.status_quo_objective / total,
                        r.report.worst.objective / total, r.report.reassigned_fraction};
  for (const auto& cell : r.report.effects) v.push_back(cell.result.gain);
  for (std::size_t j = v.size(); j < names_.size(); ++j) {
    const auto i = r.estimate.index_of(names_[j]);
    if (!i) throw NumericalError("coefficient " + names_[j] + " not estimable in this replication");
    v.push_back(r.estimate.coef(static_cast<Eigen::Index>(*i)));
  }
  if (!names_.empty() && v.size() != names_.size()) throw NumericalError("statistic set changed between runs");
  for (double x : v)
    if (!std::isfinite(x)) throw NumericalError("non-finite statistic");
  return v;
}

}  // namespace tcr
