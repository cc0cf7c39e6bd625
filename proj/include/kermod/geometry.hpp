// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0
//
// Executable checks of the optimality argument for two-module training:
//  * the constructive unit vector e* (a more separated pair of equal-norm
//    feature vectors admits a linear separator that is no worse),
//  * an exhaustive oracle comparing input modules on tiny discretized
//    problems,
//  * the equivalence between maximal feature distance and k == beta.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kermod/kernel.hpp"
#include "kermod/loss.hpp"

namespace kermod::geometry {

using Vector = std::vector<double>;

struct LemmaInstance {
  Vector e;  // unit vector
  Vector v_plus;
  Vector v_minus;
  Vector v_plus_star;
  Vector v_minus_star;

  /// Throws ContractError unless e is a unit vector, the four vectors share
  /// one positive norm (1e-12 relative) and ||v+ - v-|| <= ||v+* - v-*||.
  void validate() const;
};

enum class LemmaBranch {
  general,     // v+* != +-v-*: e* = a v+* + b v-*
  coincident,  // v+* == v-*: e* hits <e, v+> against v+*
  antipodal,   // v+* == -v-*: e* = v+* / ||v+*||
  // v+* != +-v-* but the general e* leaves p* < p, which happens exactly
  // when theta* > gamma+ + gamma-; no e* then keeps n* = n. The roles of
  // the pair are swapped instead: p* = p and n* is minimized.
  mirrored,
};

std::string to_string(LemmaBranch branch);

struct LemmaDiagnostics {
  double p = 0.0;       // <e, v+>
  double n = 0.0;       // <e, v->
  double p_star = 0.0;  // <e*, v+*>
  double n_star = 0.0;  // <e*, v-*>
  double r = 0.0;       // ||v+*||^2
  double s = 0.0;       // <v+*, v-*>
  double theta = 0.0;       // angle(v+, v-)
  double theta_star = 0.0;  // angle(v+*, v-*)
  double gamma_plus = 0.0;  // angle(e, v+)
  double gamma_minus = 0.0; // angle(e, v-)
  /// a^2 r + b^2 r + 2abs - 1, evaluated in a cancellation-free form.
  double unit_constraint_residual = 0.0;
};

struct LemmaSolution {
  Vector e_star;
  double a = 0.0;  // coefficient on v+*
  double b = 0.0;  // coefficient on v-*
  LemmaBranch branch = LemmaBranch::general;
  LemmaDiagnostics diagnostics;
};

LemmaSolution construct_e_star(const LemmaInstance& inst);

/// Angle in [0, pi] between nonzero vectors, accurate near 0 and pi.
double angle_between(std::span<const double> a, std::span<const double> b);

struct Check {
  std::string name;
  bool passed = true;
  bool applicable = true;
  double residual = 0.0;  // signed slack; negative beyond tolerance means failure
};

struct LemmaReport {
  std::vector<Check> checks;
  bool passed() const;
  const Check* find(const std::string& name) const;
};

/// Recomputes inner products from the vectors and checks, at 1e-9:
/// unit_norm, p_inequality, n_inequality, n_equality (general and
/// coincident branches), p_equality (mirrored branch), unit_constraint
/// (general and mirrored branches),
/// angle_gap (gamma- - gamma+ <= theta) and diagnostics_consistent.
LemmaReport verify_lemma_solution(const LemmaInstance& inst, const LemmaSolution& sol);

/// Draws e, v+, v-, v+*, v-* uniformly on spheres in R^d with a shared random
/// radius, rejecting draws that violate the distance condition.
LemmaInstance sample_lemma_instance(std::uint64_t seed, std::size_t d);

struct LemmaSuiteReport {
  std::size_t instances = 0;
  std::size_t failures = 0;
  std::uint64_t seed = 0;
  std::size_t d_min = 0;
  std::size_t d_max = 0;
  // Worst observed value per check:
  double max_unit_norm_error = 0.0;
  double max_n_equality_error = 0.0;
  double max_p_shortfall = 0.0;  // max(p - p*, 0)
  double max_unit_constraint_error = 0.0;
  double max_angle_gap_excess = 0.0;  // max(gamma- - gamma+ - theta, 0)
  std::vector<std::size_t> failing_instances;  // first few indices
  /// Instances solved by the mirrored branch; on these n* = n is not
  /// achievable by any unit vector.
  std::size_t mirrored = 0;
};

LemmaSuiteReport run_lemma_suite(std::size_t count, std::uint64_t seed, std::size_t d_min, std::size_t d_max);

// ---------------------------------------------------------------------------
// Exhaustive oracle over a discretized hypothesis family.

struct WeightPoint {
  Vector w;
  double b = 0.0;
};

/// Every (w, b) with each of the d+1 coordinates on linspace(-bound, bound, steps).
std::vector<WeightPoint> make_weight_lattice(std::size_t d, double bound, std::size_t steps);

struct TheoremInstance {
  std::string name;
  std::vector<bool> positive;  // class of each training point
  std::vector<Vector> grid;    // candidate codes F1(x_i) in R^{d1}
  kernel::FeatureMap feature;
  loss::DecomposableLoss loss;
  std::vector<WeightPoint> weights;
};

struct TheoremCounterexample {
  std::vector<std::size_t> assignment;  // grid index per training point
  double min_loss = 0.0;
};

struct TheoremReport {
  std::string name;
  std::size_t assignments = 0;  // |grid|^n
  std::size_t satisfying = 0;   // assignments meeting the separation condition
  double max_separation = 0.0;  // max over grid pairs of ||psi(s) - psi(t)||
  double global_min = 0.0;      // min over every assignment and weight point
  std::optional<double> global_min_exhaustive;  // direct enumeration, when run
  double worst_gap = 0.0;  // max over satisfying assignments of (min loss - global min)
  std::vector<TheoremCounterexample> counterexamples;
  bool passed() const { return counterexamples.empty(); }
};

/// Limits guarding the enumeration.
inline constexpr std::size_t kMaxTheoremPoints = 6;
inline constexpr std::size_t kMaxTheoremGrid = 16;
inline constexpr std::size_t kMaxTheoremWeights = 10000;

/// For each map from the training points into the grid, checks the
/// separation condition against the grid and verifies that every satisfying
/// map, minimized over the weight family, reaches the global minimum within
/// 1e-9. The global minimum is computed per weight point by minimizing each
/// point's loss independently; when `exhaustive` is set, it is also computed
/// by direct enumeration of all (map, weight) combinations.
TheoremReport theorem_bruteforce(const TheoremInstance& inst, bool exhaustive = false);

// ---------------------------------------------------------------------------

struct RemarkViolation {
  std::size_t pair_index = 0;
  double kernel = 0.0;
  double distance_sq = 0.0;
};

struct RemarkReport {
  std::size_t pairs_checked = 0;
  double max_distance_sq = 0.0;       // 2 alpha - 2 beta
  double max_identity_residual = 0.0; // |d^2 - (2 alpha - 2k)|
  bool order_consistent = true;       // sorting by d^2 desc == sorting by k asc
  std::vector<RemarkViolation> violations;
  bool passed() const { return violations.empty() && order_consistent; }
};

/// For each (u, v): d^2 attains 2 alpha - 2 beta iff k(u, v) == beta, both at
/// 1e-9. Requires a normalized feature map whose infimum is attained (relu
/// or tanh).
RemarkReport check_remark_equivalence(const kernel::KernelSpec& spec, std::span<const std::pair<Vector, Vector>> pairs);

}  // namespace kermod::geometry
