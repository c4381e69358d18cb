#include "tcr/discretize.hpp"

#include <algorithm>
#include <cmath>

#include "tcr/error.hpp"

namespace tcr {

void CategorySpec::validate() const {
  if (K < 2) throw InvalidInput("K must be at least 2");
  if (teacher_cutoffs.empty()) throw InvalidInput("L must be at least 2 (need one teacher cutoff)");
  for (std::size_t i = 1; i < teacher_cutoffs.size(); ++i)
    if (!(teacher_cutoffs[i] > teacher_cutoffs[i - 1])) throw InvalidInput("teacher cutoffs must be strictly ascending");
  for (double c : teacher_cutoffs)
    if (!std::isfinite(c)) throw InvalidInput("teacher cutoffs must be finite");
  if (student_rule == StudentRule::explicit_cutoffs) {
    if (static_cast<int>(student_cutoffs.size()) != K - 1)
      throw InvalidInput("explicit student cutoffs need K - 1 entries");
    for (std::size_t i = 1; i < student_cutoffs.size(); ++i)
      if (!(student_cutoffs[i] > student_cutoffs[i - 1]))
        throw InvalidInput("student cutoffs must be strictly ascending");
  }
}

std::vector<double> CategorySpec::default_teacher_cutoffs(int L) {
  if (L < 2) throw InvalidInput("L must be at least 2");
  if (L == 2) return {2.5};
  if (L == 3) return {2.25, 2.75};
  if (L == 4) return {2.25, 2.5, 2.75};
  std::vector<double> c;
  for (int i = 0; i < L - 1; ++i) c.push_back(2.25 + 0.5 * i / (L - 2));
  return c;
}

CategorySpec CategorySpec::defaults(int K, int L) {
  CategorySpec s;
  s.K = K;
  s.teacher_cutoffs = default_teacher_cutoffs(L);
  return s;
}

std::vector<int> discretize_teachers(std::span<const double> scores, std::span<const double> cutoffs) {
  std::vector<int> out;
  out.reserve(scores.size());
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidInput("teacher practice score is not finite");
    out.push_back(static_cast<int>(std::upper_bound(cutoffs.begin(), cutoffs.end(), s) - cutoffs.begin()));
  }
  return out;
}

namespace {

int count_strictly_below(std::span<const double> cuts, double z) {
  return static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), z) - cuts.begin());
}

}  // namespace

StudentDiscretization discretize_students(std::span<const double> z, std::span<const int> district, int K) {
  if (z.size() != district.size()) throw InvalidInput("score and district vectors differ in length");
  if (K < 2) throw InvalidInput("K must be at least 2");
  std::map<int, std::vector<double>> by_district;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i])) throw InvalidInput("baseline score is not finite");
    by_district[district[i]].push_back(z[i]);
  }
  StudentDiscretization out;
  out.rule = "nearest-rank: cut j = x_(ceil(j*n/K)) within district; label = #cuts strictly below score";
  for (auto& [d, xs] : by_district) {
    if (static_cast<int>(xs.size()) < K)
      throw InvalidInput("district " + std::to_string(d) + " has fewer than K students");
    std::sort(xs.begin(), xs.end());
    const auto n = static_cast<long long>(xs.size());
    std::vector<double> cuts;
    for (int j = 1; j < K; ++j) {
      const long long rank = (j * n + K - 1) / K;  // ceil(j n / K), 1-based
      cuts.push_back(xs[static_cast<std::size_t>(rank - 1)]);
    }
    out.district_cuts[d] = std::move(cuts);
  }
  out.labels.reserve(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out.labels.push_back(count_strictly_below(out.district_cuts[district[i]], z[i]));
  return out;
}

std::vector<int> discretize_students_fixed(std::span<const double> z, std::span<const double> cutoffs) {
  std::vector<int> out;
  out.reserve(z.size());
  for (double v : z) {
    if (!std::isfinite(v)) throw InvalidInput("baseline score is not finite");
    out.push_back(count_strictly_below(cutoffs, v));
  }
  return out;
}

std::vector<std::vector<double>> peer_fractions(std::span<const int> roster_types, int K) {
  if (roster_types.size() < 2) throw InvalidInput("peer fractions need a roster of at least two students");
  std::vector<long> counts(static_cast<std::size_t>(K), 0);
  for (int t : roster_types) {
    if (t < 0 || t >= K) throw InvalidInput("student type out of range");
    ++counts[static_cast<std::size_t>(t)];
  }
  const auto peers = static_cast<double>(roster_types.size() - 1);
  std::vector<std::vector<double>> out;
  out.reserve(roster_types.size());
  for (int own : roster_types) {
    std::vector<double> f(static_cast<std::size_t>(K - 1));
    for (int k = 1; k < K; ++k)
      f[static_cast<std::size_t>(k - 1)] = static_cast<double>(counts[static_cast<std::size_t>(k)] - (own == k ? 1 : 0)) / peers;
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace tcr
