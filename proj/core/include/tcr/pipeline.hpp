#pragma once

// The full estimation chain, runnable under cluster weights:
//   design -> block absorption -> 2SLS -> counterfactual values -> optimal
//   and worst plans -> reallocation effects.
// Discretization and the unweighted design are computed once; each run only
// reweights rows, so runs may execute concurrently.

#include <span>
#include <string>
#include <vector>

#include "tcr/dataset.hpp"
#include "tcr/design.hpp"
#include "tcr/discretize.hpp"
#include "tcr/estimator.hpp"
#include "tcr/reallocation.hpp"

namespace tcr {

struct PipelineConfig {
  CategorySpec spec;
  DesignOptions design;
  PredictionOptions prediction;
  Method method = Method::tsls;
};

struct PipelineResult {
  IVEstimate estimate;
  ClassroomValueTable table;
  ReallocationReport report;
};

class Pipeline {
 public:
  Pipeline(Dataset ds, PipelineConfig config);

  // Teacher-classroom clusters: one per realized teacher, in teacher-id order.
  std::size_t cluster_count() const { return cluster_teacher_.size(); }
  const std::vector<int>& cluster_teachers() const { return cluster_teacher_; }

  // Per-student weights implied by cluster weights (empty -> unit weights).
  std::vector<double> student_weights(std::span<const double> cluster_weights) const;

  PipelineResult run(std::span<const double> cluster_weights = {}) const;

  // Tracked statistics: plan objectives per unit of student weight, the
  // reassigned fraction, every reallocation effect and the delta/eta
  // coefficients of the point fit.
  std::vector<std::string> statistic_names() const { return names_; }
  std::vector<double> statistics(const PipelineResult& r) const;

  const Dataset& dataset() const { return ds_; }
  const PipelineConfig& config() const { return config_; }
  const Discretization& discretization() const { return disc_; }
  const DesignMatrix& design() const { return design_; }

 private:
  Dataset ds_;
  PipelineConfig config_;
  Discretization disc_;
  DesignMatrix design_;
  std::vector<int> cluster_teacher_;
  std::vector<int> student_cluster_;  // per student row
  std::vector<std::string> names_;
};

std::string effect_statistic_name(const AreCell& cell);

}  // namespace tcr
