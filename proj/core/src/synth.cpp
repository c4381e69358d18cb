#include "tcr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tcr/error.hpp"
#include "tcr/rng.hpp"
#include "tcr/stats.hpp"

namespace tcr {

namespace {

void check_len(const std::vector<double>& v, int n, const char* name) {
  if (static_cast<int>(v.size()) != n)
    throw InvalidInput(std::string("production parameter ") + name + " should have " + std::to_string(n) +
                       " entries, has " + std::to_string(v.size()));
  for (double x : v)
    if (!std::isfinite(x)) throw InvalidInput(std::string("production parameter ") + name + " is not finite");
}

void check_rate(double r, const char* name) {
  if (!(r >= 0.0 && r <= 1.0)) throw InvalidInput(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

void ProductionParams::validate(int K, int L) const {
  check_len(beta, K - 1, "beta");
  check_len(gamma, K - 1, "gamma");
  check_len(delta, L - 1, "delta");
  check_len(zeta, (K - 1) * (K - 1), "zeta");
  check_len(eta, (K - 1) * (L - 1), "eta");
  check_len(lambda, (L - 1) * (K - 1), "lambda");
  if (!(sd_V >= 0.0) || !(sd_U >= 0.0)) throw InvalidInput("sd_V and sd_U must be nonnegative");
  if (!std::isfinite(alpha) || !std::isfinite(rho)) throw InvalidInput("alpha and rho must be finite");
}

ProductionParams ProductionParams::zeros(int K, int L) {
  ProductionParams p;
  const auto k1 = static_cast<std::size_t>(K - 1), l1 = static_cast<std::size_t>(L - 1);
  p.beta.assign(k1, 0.0);
  p.gamma.assign(k1, 0.0);
  p.delta.assign(l1, 0.0);
  p.zeta.assign(k1 * k1, 0.0);
  p.eta.assign(k1 * l1, 0.0);
  p.lambda.assign(l1 * k1, 0.0);
  return p;
}

ProductionParams ProductionParams::defaults(int K, int L) {
  auto p = zeros(K, L);
  p.sd_V = 0.55;
  p.sd_U = 0.15;
  p.rho = 0.1;
  if (K == 3 && L == 3) {
    p.beta = {0.84, 1.55};
    p.gamma = {0.05, 0.10};
    p.delta = {0.027, -0.155};
    p.eta = {0.052, 0.196, 0.050, 0.265};
    return p;
  }
  for (int k = 1; k < K; ++k) {
    p.beta[static_cast<std::size_t>(k - 1)] = 1.6 * k / (K - 1);
    p.gamma[static_cast<std::size_t>(k - 1)] = 0.1 * k / (K - 1);
  }
  for (int l = 1; l < L; ++l) p.delta[static_cast<std::size_t>(l - 1)] = -0.15 * l / (L - 1);
  for (int k = 1; k < K; ++k)
    for (int l = 1; l < L; ++l)
      p.eta[static_cast<std::size_t>((k - 1) * (L - 1) + (l - 1))] = 0.27 * k * l / double((K - 1) * (L - 1));
  return p;
}

std::string_view to_string(EndogenousMode m) {
  switch (m) {
    case EndogenousMode::none: return "none";
    case EndogenousMode::rigged_assignment: return "rigged_assignment";
    case EndogenousMode::teacher_sorting: return "teacher_sorting";
    case EndogenousMode::student_sorting_on_assigned_teacher: return "student_sorting_on_assigned_teacher";
    case EndogenousMode::student_ability_sorting: return "student_ability_sorting";
  }
  return "none";
}

EndogenousMode parse_endogenous_mode(std::string_view s) {
  for (auto m : {EndogenousMode::none, EndogenousMode::rigged_assignment, EndogenousMode::teacher_sorting,
                 EndogenousMode::student_sorting_on_assigned_teacher, EndogenousMode::student_ability_sorting})
    if (to_string(m) == s) return m;
  throw InvalidInput("unknown endogenous mode '" + std::string(s) + "'");
}

void PopulationConfig::validate() const {
  if (n_districts < 1 || schools_per_district < 1 || blocks_per_school < 1)
    throw InvalidInput("district, school and block counts must be positive");
  if (classrooms_min < 2)
    throw InvalidInput("classrooms_per_block must be at least 2: blocks need two classrooms to randomize");
  if (classrooms_max < classrooms_min) throw InvalidInput("classrooms_per_block range is empty");
  if (class_size_min < 2 || class_size_max < class_size_min)
    throw InvalidInput("class_size_range must satisfy 2 <= min <= max");
  if (K < 2 || L < 2) throw InvalidInput("K and L must be at least 2");
  if (!teacher_cutoffs.empty() && static_cast<int>(teacher_cutoffs.size()) != L - 1)
    throw InvalidInput("teacher_cutoffs must have L - 1 entries");
  if (!(practice_beta_a > 0) || !(practice_beta_b > 0)) throw InvalidInput("practice Beta parameters must be positive");
  check_rate(elementary_share, "elementary_share");
  check_rate(noncompliance_rate_teachers, "noncompliance_rate_teachers");
  check_rate(noncompliance_rate_students, "noncompliance_rate_students");
  check_rate(attrition_rate, "attrition_rate");
  check_rate(student_aux_missing_rate, "student_aux_missing_rate");
  if (!(district_sd >= 0) || !std::isfinite(sorting_strength) || !std::isfinite(v_loading) ||
      !std::isfinite(endogenous_strength))
    throw InvalidInput("population scale parameters must be finite and dispersions nonnegative");
  if (static_cast<long long>(n_districts) * schools_per_district * blocks_per_school * class_size_min < K)
    throw InvalidInput("population too small for K student types per district");
  category_spec().validate();
}

CategorySpec PopulationConfig::category_spec() const {
  CategorySpec s;
  s.K = K;
  s.teacher_cutoffs = teacher_cutoffs.empty() ? CategorySpec::default_teacher_cutoffs(L) : teacher_cutoffs;
  return s;
}

namespace {

std::vector<int> sections_of_block(const Dataset& ds, int block) {
  std::vector<int> out;
  for (const auto& s : ds.sections)
    if (s.block == block) out.push_back(s.id);
  return out;
}

double standardize(double x, double mean, double sd) { return sd > 0 ? (x - mean) / sd : 0.0; }

// Number of displaced teachers in a block of n: binomial(n, r), with a draw
// of 1 split evenly between 0 and 2 so the mean stays r n and nobody is
// displaced alone.
std::size_t displaced_count(Rng& rng, std::size_t n, double r) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < n; ++i) d += rng.bernoulli(r) ? 1 : 0;
  if (d == 1) d = rng.bernoulli(0.5) ? 2 : 0;
  return d;
}

void displace_teachers(Dataset& ds, const PopulationConfig& cfg, Rng& rng, const std::vector<double>& assigned_peer_z) {
  const double r = cfg.noncompliance_rate_teachers;
  if (r == 0.0) return;
  const bool sorting = cfg.endogenous_mode == EndogenousMode::teacher_sorting;
  std::vector<double> experience;
  double em = 0, esd = 0;
  if (sorting) {
    auto ix = ds.teacher_aux("experience");
    if (!ix) throw InvalidInput("teacher_sorting mode needs an 'experience' teacher attribute");
    for (const auto& t : ds.teachers) experience.push_back(t.aux[*ix]);
    em = stats::mean(experience);
    esd = stats::sample_sd(experience);
  }
  for (const auto& b : ds.blocks) {
    auto secs = sections_of_block(ds, b.id);
    const auto d = displaced_count(rng, secs.size(), r);
    if (d == 0) continue;
    rng.shuffle(secs.begin(), secs.end());
    std::vector<int> chosen(secs.begin(), secs.begin() + static_cast<std::ptrdiff_t>(d));
    std::vector<int> teachers;
    for (int s : chosen) teachers.push_back(ds.sections[s].realized_teacher);
    if (!sorting) {
      // one d-cycle: every chosen teacher ends up somewhere else
      for (std::size_t i = 0; i < d; ++i) ds.sections[chosen[i]].realized_teacher = teachers[(i + 1) % d];
      continue;
    }
    std::vector<double> tkey;
    for (int t : teachers) tkey.push_back(cfg.endogenous_strength * standardize(experience[t], em, esd) + rng.normal());
    std::vector<std::size_t> torder(d), sorder(d);
    std::iota(torder.begin(), torder.end(), 0);
    std::iota(sorder.begin(), sorder.end(), 0);
    std::sort(torder.begin(), torder.end(), [&](auto a, auto c) { return tkey[a] < tkey[c]; });
    std::sort(sorder.begin(), sorder.end(),
              [&](auto a, auto c) { return assigned_peer_z[chosen[a]] < assigned_peer_z[chosen[c]]; });
    for (std::size_t i = 0; i < d; ++i) ds.sections[chosen[sorder[i]]].realized_teacher = teachers[torder[i]];
  }
}

void move_students(Dataset& ds, const PopulationConfig& cfg, Rng& rng) {
  const double r = cfg.noncompliance_rate_students;
  if (r == 0.0) return;
  std::vector<std::vector<int>> block_sections(ds.blocks.size());
  for (const auto& s : ds.sections) block_sections[s.block].push_back(s.id);
  const double s = cfg.endogenous_strength;

  auto best_section = [&](int block, bool realized) {
    int best = -1;
    double score = -1e300;
    for (int sec : block_sections[block]) {
      const auto& t = ds.teachers[realized ? ds.sections[sec].realized_teacher : ds.sections[sec].assigned_teacher];
      if (t.practice_score > score) {
        score = t.practice_score;
        best = sec;
      }
    }
    return best;
  };

  switch (cfg.endogenous_mode) {
    case EndogenousMode::student_sorting_on_assigned_teacher: {
      auto att = ds.student_aux("attendance");
      std::vector<double> a;
      for (const auto& st : ds.students) a.push_back(att ? st.aux[*att] : 0.0);
      std::vector<double> valid;
      for (double v : a)
        if (!std::isnan(v)) valid.push_back(v);
      const double am = valid.size() > 1 ? stats::mean(valid) : 0.0;
      const double asd = valid.size() > 1 ? stats::sample_sd(valid) : 0.0;
      for (std::size_t i = 0; i < ds.students.size(); ++i) {
        auto& st = ds.students[i];
        const int target = best_section(st.block, false);
        if (target == st.assigned_section) continue;
        const double q = st.baseline_score + (std::isnan(a[i]) ? 0.0 : standardize(a[i], am, asd));
        if (rng.bernoulli(std::min(1.0, 2.0 * r * stats::normal_cdf(s * q)))) st.realized_section = target;
      }
      return;
    }
    case EndogenousMode::student_ability_sorting: {
      if (!ds.oracle) throw InvalidInput("student_ability_sorting needs latent student draws");
      for (std::size_t i = 0; i < ds.students.size(); ++i) {
        auto& st = ds.students[i];
        const int target = best_section(st.block, true);
        if (target == st.realized_section) continue;
        const double p = 4.0 * r * stats::normal_cdf(s * ds.oracle->student_v[i]) * stats::normal_cdf(st.baseline_score);
        if (rng.bernoulli(std::min(1.0, p))) st.realized_section = target;
      }
      return;
    }
    default:
      for (auto& st : ds.students) {
        if (!rng.bernoulli(r)) continue;
        const auto& secs = block_sections[st.block];
        if (secs.size() < 2) continue;
        int pick = secs[rng.below(secs.size() - 1)];
        if (pick == st.assigned_section) pick = secs.back();
        st.realized_section = pick;
      }
  }
}

}  // namespace

Dataset apply_noncompliance(const Dataset& input, const PopulationConfig& config) {
  config.validate();
  Dataset ds = input;
  Rng rng = Rng::for_stream(config.seed, 1);

  // mean assigned-classmate baseline per section, used by teacher_sorting
  std::vector<double> section_z(ds.sections.size(), 0.0);
  std::vector<double> section_n(ds.sections.size(), 0.0);
  for (const auto& st : ds.students) {
    section_z[st.assigned_section] += st.baseline_score;
    section_n[st.assigned_section] += 1;
  }
  for (std::size_t s = 0; s < section_z.size(); ++s)
    if (section_n[s] > 0) section_z[s] /= section_n[s];

  displace_teachers(ds, config, rng, section_z);
  move_students(ds, config, rng);
  return ds;
}

std::vector<double> production_outcome(const Dataset& ds, const ProductionParams& params, const CategorySpec& spec) {
  if (!ds.oracle) throw InvalidInput("outcome reproduction needs the latent oracle columns");
  spec.validate();
  const int K = spec.K, L = spec.L();
  params.validate(K, L);
  const auto n = ds.students.size();

  std::vector<double> z(n);
  std::vector<int> district(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = ds.students[i].baseline_score;
    district[i] = ds.students[i].district;
  }
  const auto type = spec.student_rule == CategorySpec::StudentRule::explicit_cutoffs
                        ? discretize_students_fixed(z, spec.student_cutoffs)
                        : discretize_students(z, district, K).labels;
  std::vector<double> scores;
  for (const auto& t : ds.teachers) scores.push_back(t.practice_score);
  const auto level = discretize_teachers(scores, spec.teacher_cutoffs);

  const auto& V = ds.oracle->student_v;
  const auto& U = ds.oracle->teacher_u;
  const auto rosters = realized_rosters(ds);
  const auto k1 = static_cast<std::size_t>(K - 1), l1 = static_cast<std::size_t>(L - 1);

  std::vector<double> y(n, 0.0);
  for (const auto& roster : rosters) {
    std::vector<long> counts(static_cast<std::size_t>(K), 0);
    double vsum = 0.0;
    for (auto i : roster) {
      ++counts[static_cast<std::size_t>(type[i])];
      vsum += V[i];
    }
    for (auto i : roster) {
      const auto& st = ds.students[i];
      const int teacher = ds.sections[st.realized_section].realized_teacher;
      const int w = level[teacher];
      const int x = type[i];
      std::vector<double> xbar(k1, 0.0);
      double vbar = 0.0;
      if (roster.size() > 1) {
        const auto peers = static_cast<double>(roster.size() - 1);
        for (std::size_t j = 0; j < k1; ++j)
          xbar[j] = static_cast<double>(counts[j + 1] - (x == static_cast<int>(j + 1) ? 1 : 0)) / peers;
        vbar = (vsum - V[i]) / peers;
      }
      double v = params.alpha;
      if (x > 0) v += params.beta[x - 1];
      v += V[i];
      for (std::size_t j = 0; j < k1; ++j) v += params.gamma[j] * xbar[j];
      v += params.rho * vbar;
      if (w > 0) v += params.delta[w - 1];
      v += U[teacher];
      if (x > 0)
        for (std::size_t j = 0; j < k1; ++j) v += params.zeta[(x - 1) * k1 + j] * xbar[j];
      if (x > 0 && w > 0) v += params.eta[(x - 1) * l1 + (w - 1)];
      if (w > 0)
        for (std::size_t j = 0; j < k1; ++j) v += params.lambda[(w - 1) * k1 + j] * xbar[j];
      y[i] = v;
    }
  }
  return y;
}

Dataset generate(const PopulationConfig& config, const ProductionParams& params) {
  config.validate();
  params.validate(config.K, config.L);
  Rng rng = Rng::for_stream(config.seed, 0);

  Dataset ds;
  ds.teacher_aux_names = {"experience", "masters"};
  ds.student_aux_names = {"frl", "attendance"};
  OracleColumns latent;
  std::vector<double> raw;  // pre-standardization baseline per student

  for (int d = 0; d < config.n_districts; ++d) {
    const double offset = config.district_sd * rng.normal();
    for (int sc = 0; sc < config.schools_per_district; ++sc) {
      const int school = d * config.schools_per_district + sc;
      const auto type = rng.bernoulli(config.elementary_share) ? SchoolType::elementary : SchoolType::middle;
      for (int bb = 0; bb < config.blocks_per_school; ++bb) {
        const int block = static_cast<int>(ds.blocks.size());
        ds.blocks.push_back({block, school, d, type});

        const int rooms = rng.uniform_int(config.classrooms_min, config.classrooms_max);
        std::vector<int> sizes;
        int total = 0;
        for (int c = 0; c < rooms; ++c) {
          sizes.push_back(rng.uniform_int(config.class_size_min, config.class_size_max));
          total += sizes.back();
        }
        std::vector<double> r(static_cast<std::size_t>(total)), key(static_cast<std::size_t>(total));
        for (int i = 0; i < total; ++i) {
          r[i] = offset + rng.normal();
          key[i] = config.sorting_strength * r[i] + rng.normal();
        }
        std::vector<int> order(static_cast<std::size_t>(total));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });

        const int first_section = static_cast<int>(ds.sections.size());
        std::vector<double> section_mean;
        int pos = 0;
        for (int c = 0; c < rooms; ++c) {
          const int sec = first_section + c;
          ds.sections.push_back({sec, block, -1, -1});
          ds.teachers.push_back({sec, block, 1.0 + 3.0 * rng.beta(config.practice_beta_a, config.practice_beta_b),
                                 {1.0 + 4.0 * rng.gamma(2.0), rng.bernoulli(0.45) ? 1.0 : 0.0}});
          latent.teacher_u.push_back(params.sd_U * rng.normal());
          double m = 0;
          for (int j = 0; j < sizes[c]; ++j, ++pos) {
            const int i = order[pos];
            Student st;
            st.id = static_cast<int>(ds.students.size());
            st.district = d;
            st.school = school;
            st.block = block;
            st.assigned_section = st.realized_section = sec;
            const double centered = r[i] - offset;
            const double frl = rng.bernoulli(stats::normal_cdf(0.3 - 0.6 * centered)) ? 1.0 : 0.0;
            const double attendance = std::clamp(0.93 + 0.02 * centered + 0.03 * rng.normal(), 0.0, 1.0);
            st.aux = {frl, attendance};
            if (config.student_aux_missing_rate > 0)
              for (auto& a : st.aux)
                if (rng.bernoulli(config.student_aux_missing_rate)) a = std::nan("");
            ds.students.push_back(std::move(st));
            raw.push_back(r[i]);
            m += r[i];
          }
          section_mean.push_back(m / sizes[c]);
        }

        // teachers (ids first_section..) to sections, uniformly within block
        std::vector<int> perm(static_cast<std::size_t>(rooms));
        std::iota(perm.begin(), perm.end(), first_section);
        if (config.endogenous_mode == EndogenousMode::rigged_assignment) {
          std::vector<double> tkey;
          for (int t : perm) tkey.push_back(config.endogenous_strength * (ds.teachers[t].practice_score - 2.5) / 0.25 + rng.normal());
          std::vector<int> torder(perm.size()), sorder(perm.size());
          std::iota(torder.begin(), torder.end(), 0);
          std::iota(sorder.begin(), sorder.end(), 0);
          std::sort(torder.begin(), torder.end(), [&](int a, int b) { return tkey[a] < tkey[b]; });
          std::sort(sorder.begin(), sorder.end(), [&](int a, int b) { return section_mean[a] < section_mean[b]; });
          for (int c = 0; c < rooms; ++c)
            ds.sections[first_section + sorder[c]].assigned_teacher = perm[torder[c]];
        } else {
          rng.shuffle(perm.begin(), perm.end());
          for (int c = 0; c < rooms; ++c) ds.sections[first_section + c].assigned_teacher = perm[c];
        }
        for (int c = 0; c < rooms; ++c)
          ds.sections[first_section + c].realized_teacher = ds.sections[first_section + c].assigned_teacher;
      }
    }
  }

  // within-district z-scores
  std::vector<double> dsum(config.n_districts, 0.0), dsq(config.n_districts, 0.0), dn(config.n_districts, 0.0);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    dsum[ds.students[i].district] += raw[i];
    dn[ds.students[i].district] += 1;
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int d = ds.students[i].district;
    const double dev = raw[i] - dsum[d] / dn[d];
    dsq[d] += dev * dev;
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int d = ds.students[i].district;
    const double sd = std::sqrt(dsq[d] / dn[d]);
    ds.students[i].baseline_score = sd > 0 ? (raw[i] - dsum[d] / dn[d]) / sd : 0.0;
    latent.student_v.push_back(config.v_loading * ds.students[i].baseline_score + params.sd_V * rng.normal());
  }
  ds.oracle = std::move(latent);

  ds = apply_noncompliance(ds, config);

  if (config.attrition_rate > 0) {
    Rng attr = Rng::for_stream(config.seed, 2);
    Dataset kept = ds;
    kept.students.clear();
    kept.oracle->student_v.clear();
    for (std::size_t i = 0; i < ds.students.size(); ++i) {
      if (attr.bernoulli(config.attrition_rate)) continue;
      kept.students.push_back(ds.students[i]);
      kept.oracle->student_v.push_back(ds.oracle->student_v[i]);
    }
    ds = std::move(kept);
  }

  const auto y = production_outcome(ds, params, config.category_spec());
  for (std::size_t i = 0; i < y.size(); ++i) ds.students[i].outcome = y[i];
  ds.validate();
  return ds;
}

}  // namespace tcr
