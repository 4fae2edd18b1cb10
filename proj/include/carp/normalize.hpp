#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace carp {

/// How expert likelihood scores are mapped into the open interval (0,1).
///   MinMax:      linear map of [min, max] onto [eps, 1 - eps]
///   DivideByMax: l / max * (1 - eps)
///   Identity:    scores already in (0,1), clamped to [eps, 1 - eps]
enum class NormalizationScheme { MinMax, DivideByMax, Identity };

inline constexpr double kDefaultNormalizationEpsilon = 0.01;

std::string_view to_string(NormalizationScheme s);
NormalizationScheme parse_normalization_scheme(std::string_view name);

std::vector<double> normalize_likelihoods(std::span<const double> raw,
                                          NormalizationScheme scheme = NormalizationScheme::MinMax,
                                          double epsilon = kDefaultNormalizationEpsilon);

}  // namespace carp
