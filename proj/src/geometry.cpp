// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kermod/errors.hpp"
#include "kermod/random.hpp"

namespace kermod::geometry {

namespace {

constexpr double kInputTolerance = 1e-12;
constexpr double kCheckTolerance = 1e-9;
constexpr std::size_t kMaxExhaustiveWork = 50'000'000;

Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

// e* with <e*, v> = target for a single direction v of squared norm r,
// completed to unit length with a component orthogonal to v.
Vector hit_inner_product(std::span<const double> e, std::span<const double> v, double r, double target) {
  const std::size_t d = v.size();
  const double len = std::sqrt(r);
  Vector unit_v(v.begin(), v.end());
  for (double& x : unit_v) x /= len;
  const double along = target / len;
  const double across = std::sqrt(std::max(0.0, 1.0 - along * along));

  Vector out(d);
  for (std::size_t k = 0; k < d; ++k) out[k] = along * unit_v[k];
  if (across == 0.0) return out;

  // Gram-Schmidt: start from e, fall back to the standard basis.
  Vector ortho;
  for (std::size_t attempt = 0; attempt <= d && ortho.empty(); ++attempt) {
    Vector candidate(d, 0.0);
    if (attempt == 0) {
      candidate.assign(e.begin(), e.end());
    } else {
      candidate[attempt - 1] = 1.0;
    }
    const double proj = dot(candidate, unit_v);
    for (std::size_t k = 0; k < d; ++k) candidate[k] -= proj * unit_v[k];
    const double cn = norm(candidate);
    if (cn > 1e-8) {
      for (double& x : candidate) x /= cn;
      ortho = std::move(candidate);
    }
  }
  if (ortho.empty()) throw InternalInvariantError("construct_e_star: no orthogonal direction found");
  for (std::size_t k = 0; k < d; ++k) out[k] += across * ortho[k];
  return out;
}

}  // namespace

std::string to_string(LemmaBranch branch) {
  switch (branch) {
    case LemmaBranch::general:
      return "general";
    case LemmaBranch::coincident:
      return "coincident";
    case LemmaBranch::antipodal:
      return "antipodal";
    case LemmaBranch::mirrored:
      return "mirrored";
  }
  return "unknown";
}

double angle_between(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw ContractError("angle_between: zero vector");
  Vector ua(a.begin(), a.end()), ub(b.begin(), b.end());
  for (double& x : ua) x /= na;
  for (double& x : ub) x /= nb;
  return 2.0 * std::atan2(norm(subtract(ua, ub)), norm(add(ua, ub)));
}

void LemmaInstance::validate() const {
  const std::size_t d = e.size();
  if (d == 0) throw ContractError("lemma instance: empty vectors");
  for (const Vector* v : {&v_plus, &v_minus, &v_plus_star, &v_minus_star})
    if (v->size() != d) throw ContractError("lemma instance: vectors differ in dimension");
  if (std::abs(norm(e) - 1.0) > kInputTolerance) throw ContractError("lemma instance: e is not a unit vector");
  const double rho = norm(v_plus);
  if (!(rho > 0.0)) throw ContractError("lemma instance: vectors must have positive norm");
  for (const Vector* v : {&v_minus, &v_plus_star, &v_minus_star}) {
    if (std::abs(norm(*v) - rho) > kInputTolerance * std::max(1.0, rho)) {
      throw ContractError("lemma instance: the four vectors must share one norm");
    }
  }
  if (norm(subtract(v_plus, v_minus)) > norm(subtract(v_plus_star, v_minus_star)) + kInputTolerance) {
    throw ContractError("lemma instance: ||v+ - v-|| exceeds ||v+* - v-*||");
  }
}

LemmaSolution construct_e_star(const LemmaInstance& inst) {
  inst.validate();
  LemmaSolution sol;
  LemmaDiagnostics& dg = sol.diagnostics;
  dg.p = dot(inst.e, inst.v_plus);
  dg.n = dot(inst.e, inst.v_minus);
  dg.r = squared_norm(inst.v_plus_star);
  dg.s = dot(inst.v_plus_star, inst.v_minus_star);
  dg.theta = angle_between(inst.v_plus, inst.v_minus);
  dg.theta_star = angle_between(inst.v_plus_star, inst.v_minus_star);
  dg.gamma_plus = angle_between(inst.e, inst.v_plus);
  dg.gamma_minus = angle_between(inst.e, inst.v_minus);

  const double r = dg.r;
  const double r_minus = squared_norm(inst.v_minus_star);
  // r - s and r + s from the difference/sum vectors, which stay accurate
  // when v+* is nearly parallel or antiparallel to v-*.
  const double r_minus_s = 0.5 * squared_norm(subtract(inst.v_plus_star, inst.v_minus_star)) + 0.5 * (r - r_minus);
  const double r_plus_s = 0.5 * squared_norm(add(inst.v_plus_star, inst.v_minus_star)) + 0.5 * (r - r_minus);
  const double scale = std::sqrt(r);

  if (std::sqrt(std::max(0.0, 2.0 * r_minus_s)) <= kInputTolerance * scale) {
    sol.branch = LemmaBranch::coincident;
    sol.e_star = hit_inner_product(inst.e, inst.v_plus_star, r, dg.p);
    sol.a = dg.p / r;
    sol.b = 0.0;
  } else if (std::sqrt(std::max(0.0, 2.0 * r_plus_s)) <= kInputTolerance * scale) {
    sol.branch = LemmaBranch::antipodal;
    sol.e_star = inst.v_plus_star;
    for (double& x : sol.e_star) x /= scale;
    sol.a = 1.0 / scale;
    sol.b = 0.0;
  } else {
    const double denom = r_minus_s * r_plus_s;  // r^2 - s^2
    if (!(denom > 0.0)) throw InternalInvariantError("construct_e_star: |s| >= r in the general branch");
    const double s = dg.s;
    // e* = a v+* + b v-* with <e*, v-*> = n and a >= 0.
    double a = std::sqrt(std::max(0.0, r - dg.n * dg.n) / denom);
    double b = (dg.n - a * s) / r;
    sol.branch = LemmaBranch::general;
    // Rounding-level shortfall is left to the verifier's tolerance.
    if (a * r + b * s < dg.p - kInputTolerance * scale) {
      // Same formula with v+* and v-* exchanged and e negated.
      const double a_m = std::sqrt(std::max(0.0, r - dg.p * dg.p) / denom);
      const double b_m = (-dg.p - a_m * s) / r;
      a = -b_m;
      b = -a_m;
      sol.branch = LemmaBranch::mirrored;
    }
    sol.a = a;
    sol.b = b;
    sol.e_star.resize(inst.e.size());
    for (std::size_t k = 0; k < inst.e.size(); ++k) sol.e_star[k] = a * inst.v_plus_star[k] + b * inst.v_minus_star[k];
    dg.unit_constraint_residual = s >= 0.0 ? r * (a + b) * (a + b) - 2.0 * a * b * r_minus_s - 1.0
                                           : r * (a - b) * (a - b) + 2.0 * a * b * r_plus_s - 1.0;
  }
  dg.p_star = dot(sol.e_star, inst.v_plus_star);
  dg.n_star = dot(sol.e_star, inst.v_minus_star);
  return sol;
}

bool LemmaReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* LemmaReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

LemmaReport verify_lemma_solution(const LemmaInstance& inst, const LemmaSolution& sol) {
  LemmaReport report;
  auto add_check = [&](std::string name, double residual, bool applicable = true) {
    // residual <= 0 is compliant; tolerance absorbs rounding
    report.checks.push_back({std::move(name), !applicable || residual <= kCheckTolerance, applicable, residual});
  };
  if (sol.e_star.size() != inst.e.size()) {
    report.checks.push_back({"dimension", false, true, std::numeric_limits<double>::infinity()});
    return report;
  }
  const double p = dot(inst.e, inst.v_plus);
  const double n = dot(inst.e, inst.v_minus);
  const double p_star = dot(sol.e_star, inst.v_plus_star);
  const double n_star = dot(sol.e_star, inst.v_minus_star);
  const LemmaDiagnostics& dg = sol.diagnostics;

  add_check("unit_norm", std::abs(norm(sol.e_star) - 1.0));
  add_check("p_inequality", p - p_star);
  add_check("n_inequality", n_star - n);
  const bool mirrored = sol.branch == LemmaBranch::mirrored;
  add_check("n_equality", std::abs(dg.n_star - n), sol.branch != LemmaBranch::antipodal && !mirrored);
  add_check("p_equality", std::abs(dg.p_star - p), mirrored);
  add_check("unit_constraint", std::abs(dg.unit_constraint_residual), sol.branch == LemmaBranch::general || mirrored);
  add_check("angle_gap", dg.gamma_minus - dg.gamma_plus - dg.theta);
  const double consistency = std::max({std::abs(dg.p - p), std::abs(dg.n - n), std::abs(dg.p_star - p_star),
                                       std::abs(dg.n_star - n_star)});
  add_check("diagnostics_consistent", consistency);
  return report;
}

LemmaInstance sample_lemma_instance(std::uint64_t seed, std::size_t d) {
  if (d == 0) throw ContractError("sample_lemma_instance: dimension must be positive");
  Rng rng(seed);
  for (;;) {
    const double radius = rng.uniform(0.25, 4.0);
    auto on_sphere = [&] {
      auto v = rng.unit_vector(d);
      for (double& x : v) x *= radius;
      return v;
    };
    LemmaInstance inst{rng.unit_vector(d), on_sphere(), on_sphere(), on_sphere(), on_sphere()};
    if (norm(subtract(inst.v_plus, inst.v_minus)) <= norm(subtract(inst.v_plus_star, inst.v_minus_star))) return inst;
  }
}

LemmaSuiteReport run_lemma_suite(std::size_t count, std::uint64_t seed, std::size_t d_min, std::size_t d_max) {
  if (d_min == 0 || d_min > d_max) throw ConfigError("lemma suite: need 1 <= d_min <= d_max");
  LemmaSuiteReport out;
  out.instances = count;
  out.seed = seed;
  out.d_min = d_min;
  out.d_max = d_max;
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t d = d_min + rng.index(d_max - d_min + 1);
    const LemmaInstance inst = sample_lemma_instance(rng.fork(), d);
    const LemmaSolution sol = construct_e_star(inst);
    const LemmaReport rep = verify_lemma_solution(inst, sol);
    if (sol.branch == LemmaBranch::mirrored) ++out.mirrored;
    out.max_unit_norm_error = std::max(out.max_unit_norm_error, rep.find("unit_norm")->residual);
    if (const Check* c = rep.find("n_equality"); c->applicable)
      out.max_n_equality_error = std::max(out.max_n_equality_error, c->residual);
    out.max_p_shortfall = std::max(out.max_p_shortfall, rep.find("p_inequality")->residual);
    if (const Check* c = rep.find("unit_constraint"); c->applicable)
      out.max_unit_constraint_error = std::max(out.max_unit_constraint_error, c->residual);
    out.max_angle_gap_excess = std::max(out.max_angle_gap_excess, rep.find("angle_gap")->residual);
    if (!rep.passed()) {
      ++out.failures;
      if (out.failing_instances.size() < 16) out.failing_instances.push_back(i);
    }
  }
  return out;
}

std::vector<WeightPoint> make_weight_lattice(std::size_t d, double bound, std::size_t steps) {
  if (steps < 1 || !(bound >= 0.0)) throw ConfigError("weight lattice: need steps >= 1 and bound >= 0");
  std::size_t total = 1;
  for (std::size_t k = 0; k <= d; ++k) {
    total *= steps;
    if (total > kMaxTheoremWeights) {
      throw ConfigError("weight lattice: " + std::to_string(steps) + "^" + std::to_string(d + 1) + " points exceeds " +
                        std::to_string(kMaxTheoremWeights));
    }
  }
  auto coord = [&](std::size_t i) {
    return steps == 1 ? 0.0 : -bound + 2.0 * bound * static_cast<double>(i) / static_cast<double>(steps - 1);
  };
  std::vector<WeightPoint> out;
  out.reserve(total);
  std::vector<std::size_t> digit(d + 1, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    WeightPoint wp;
    for (std::size_t k = 0; k < d; ++k) wp.w.push_back(coord(digit[k]));
    wp.b = coord(digit[d]);
    out.push_back(std::move(wp));
    for (std::size_t k = 0; k <= d; ++k) {
      if (++digit[k] < steps) break;
      digit[k] = 0;
    }
  }
  return out;
}

TheoremReport theorem_bruteforce(const TheoremInstance& inst, bool exhaustive) {
  const std::size_t n = inst.positive.size();
  const std::size_t g = inst.grid.size();
  const std::size_t nw = inst.weights.size();
  if (n == 0 || n > kMaxTheoremPoints) throw ConfigError("theorem oracle: need 1..6 training points");
  if (g == 0 || g > kMaxTheoremGrid) throw ConfigError("theorem oracle: need 1..16 grid codes");
  if (nw == 0 || nw > kMaxTheoremWeights) throw ConfigError("theorem oracle: need 1..10000 weight points");
  const std::size_t d1 = inst.grid.front().size();
  for (const auto& code : inst.grid)
    if (code.size() != d1) throw ConfigError("theorem oracle: grid codes differ in dimension");
  for (const auto& wp : inst.weights)
    if (wp.w.size() != d1) throw ConfigError("theorem oracle: weight dimension does not match codes");

  TheoremReport report;
  report.name = inst.name;

  std::vector<Vector> features;
  for (const auto& code : inst.grid) features.push_back(inst.feature.apply(code));
  std::vector<double> dist(g * g);
  for (std::size_t a = 0; a < g; ++a)
    for (std::size_t b = 0; b < g; ++b) {
      dist[a * g + b] = norm(subtract(features[a], features[b]));
      report.max_separation = std::max(report.max_separation, dist[a * g + b]);
    }

  // Per weight point, per code: l+(score), l-(score).
  std::vector<double> lp(nw * g), lm(nw * g), penalty(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    const auto& wp = inst.weights[w];
    penalty[w] = inst.loss.lambda == 0.0 ? 0.0 : inst.loss.lambda * inst.loss.g(norm(wp.w));
    for (std::size_t c = 0; c < g; ++c) {
      const double score = dot(wp.w, features[c]) + wp.b;
      lp[w * g + c] = inst.loss.ell_plus(score);
      lm[w * g + c] = inst.loss.ell_minus(score);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  std::size_t n_pos = 0;
  for (bool pos : inst.positive) n_pos += pos ? 1 : 0;
  const std::size_t n_neg = n - n_pos;

  auto loss_at = [&](const std::vector<std::size_t>& assign, std::size_t w) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += inst.positive[i] ? lp[w * g + assign[i]] : lm[w * g + assign[i]];
    return inv_n * total + penalty[w];
  };
  auto min_over_weights = [&](const std::vector<std::size_t>& assign) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < nw; ++w) best = std::min(best, loss_at(assign, w));
    return best;
  };

  // Separable global minimum: for fixed weights each point picks its best code.
  report.global_min = std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < nw; ++w) {
    const double best_p = *std::min_element(lp.begin() + static_cast<long>(w * g), lp.begin() + static_cast<long>((w + 1) * g));
    const double best_m = *std::min_element(lm.begin() + static_cast<long>(w * g), lm.begin() + static_cast<long>((w + 1) * g));
    report.global_min = std::min(report.global_min,
                                 inv_n * (static_cast<double>(n_pos) * best_p + static_cast<double>(n_neg) * best_m) + penalty[w]);
  }

  std::size_t assignments = 1;
  for (std::size_t i = 0; i < n; ++i) assignments *= g;
  report.assignments = assignments;
  if (exhaustive && assignments * nw > kMaxExhaustiveWork) {
    throw ConfigError("theorem oracle: exhaustive enumeration of " + std::to_string(assignments * nw) +
                      " combinations is too large");
  }

  const double required = report.max_separation - kInputTolerance;
  double exhaustive_min = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> assign(n, 0);
  for (std::size_t idx = 0; idx < assignments; ++idx) {
    bool satisfies = true;
    for (std::size_t i = 0; i < n && satisfies; ++i) {
      if (!inst.positive[i]) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (!inst.positive[j] && dist[assign[i] * g + assign[j]] < required) {
          satisfies = false;
          break;
        }
    }
    double best = std::numeric_limits<double>::quiet_NaN();
    if (exhaustive) {
      best = min_over_weights(assign);
      exhaustive_min = std::min(exhaustive_min, best);
    }
    if (satisfies) {
      ++report.satisfying;
      if (std::isnan(best)) best = min_over_weights(assign);
      const double gap = best - report.global_min;
      report.worst_gap = std::max(report.worst_gap, gap);
      if (gap > kCheckTolerance && report.counterexamples.size() < 16) report.counterexamples.push_back({assign, best});
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (++assign[i] < g) break;
      assign[i] = 0;
    }
  }
  if (exhaustive) report.global_min_exhaustive = exhaustive_min;
  return report;
}

RemarkReport check_remark_equivalence(const kernel::KernelSpec& spec, std::span<const std::pair<Vector, Vector>> pairs) {
  if (!spec.feature_map.normalize) throw ContractError("remark check: feature map must be normalized");
  if (spec.feature_map.nonlinearity == Activation::sigmoid) {
    throw ContractError("remark check: the sigmoid kernel does not attain its infimum");
  }
  RemarkReport report;
  report.max_distance_sq = 2.0 * spec.alpha - 2.0 * spec.beta;
  std::vector<double> ks, ds;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [u, v] = pairs[i];
    const double k = kernel::kernel_eval(spec, u, v);
    const double d2 = kernel::rkhs_distance_sq(spec, u, v);
    ks.push_back(k);
    ds.push_back(d2);
    report.max_identity_residual = std::max(report.max_identity_residual, std::abs(d2 - (2.0 * spec.alpha - 2.0 * k)));
    const bool at_max = std::abs(d2 - report.max_distance_sq) <= kCheckTolerance;
    const bool at_beta = std::abs(k - spec.beta) <= kCheckTolerance;
    if (at_max != at_beta) report.violations.push_back({i, k, d2});
  }
  report.pairs_checked = pairs.size();
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ks[a] < ks[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (ds[order[i]] > ds[order[i - 1]] + kInputTolerance) report.order_consistent = false;
  return report;
}

}  // namespace kermod::geometry
