#pragma once

#include <cstddef>

#include "core/extremal.hpp"
#include "core/quantile.hpp"

namespace ecrisk {

/// Tail index 1 / (1/gamma + N) of Y | X = x.
double conditional_tail_index(double gamma, std::size_t N);

/// Lp-quantile / quantile limit ratio [gamma / B(p, 1/gamma - p + 1)]^{-gamma}.
/// Requires gamma < 1/(p-1).
double lp_factor(double gamma, double p);

/// Haezendonck-Goovaerts / quantile limit ratio for phi(t) = t^p.
/// Requires gamma < 1/p.
double hg_factor(double gamma, double p);

/// Rescales the radial term of a plain quantile estimate by
/// lp_factor(conditional_tail_index(gamma_hat, N), p).
RiskEstimate lp_quantile_estimate(const RiskEstimate& base, const ExtremalEstimate& est, double p,
                                  std::size_t N);
/// Same with hg_factor.
RiskEstimate hg_estimate(const RiskEstimate& base, const ExtremalEstimate& est, double p,
                         std::size_t N);

/// Dispatches on kind; kind.type == Quantile returns base unchanged.
RiskEstimate convert_estimate(const RiskEstimate& base, const ExtremalEstimate& est,
                              const MeasureKind& kind, std::size_t N);

}  // namespace ecrisk
