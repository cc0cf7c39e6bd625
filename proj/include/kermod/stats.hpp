// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace kermod::stats {

/// 1-based ranks in ascending order; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Throws DimensionError on a length mismatch and ContractError on fewer
/// than two points. Returns 0 when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of the average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace kermod::stats
