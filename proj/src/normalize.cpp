#include "carp/normalize.hpp"

#include "carp/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace carp {

std::string_view to_string(NormalizationScheme s) {
  switch (s) {
    case NormalizationScheme::MinMax: return "minmax";
    case NormalizationScheme::DivideByMax: return "divide-by-max";
    case NormalizationScheme::Identity: return "identity";
  }
  return "?";
}

NormalizationScheme parse_normalization_scheme(std::string_view name) {
  if (name == "minmax" || name == "MinMax") return NormalizationScheme::MinMax;
  if (name == "divide-by-max" || name == "DivideByMax") return NormalizationScheme::DivideByMax;
  if (name == "identity" || name == "Identity") return NormalizationScheme::Identity;
  throw DomainError("unknown normalization scheme '" + std::string(name) + "'");
}

std::vector<double> normalize_likelihoods(std::span<const double> raw, NormalizationScheme scheme,
                                          double epsilon) {
  if (raw.empty()) throw DomainError("cannot normalize an empty likelihood list");
  if (!(epsilon > 0.0 && epsilon < 0.1)) throw DomainError("epsilon must lie in (0, 0.1)");
  for (double v : raw) {
    if (!(std::isfinite(v) && v > 0.0)) throw DomainError("raw likelihoods must be positive");
  }

  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> out(raw.size());

  switch (scheme) {
    case NormalizationScheme::MinMax: {
      if (!(hi > lo)) throw DomainError("min-max normalization needs a non-degenerate range");
      const double span = 1.0 - 2.0 * epsilon;
      std::transform(raw.begin(), raw.end(), out.begin(),
                     [&](double v) { return epsilon + (v - lo) / (hi - lo) * span; });
      break;
    }
    case NormalizationScheme::DivideByMax:
      std::transform(raw.begin(), raw.end(), out.begin(),
                     [&](double v) { return v / hi * (1.0 - epsilon); });
      break;
    case NormalizationScheme::Identity:
      for (std::size_t k = 0; k < raw.size(); ++k) {
        if (raw[k] >= 1.0) {
          throw DomainError("identity normalization needs scores inside (0,1)");
        }
        out[k] = std::clamp(raw[k], epsilon, 1.0 - epsilon);
      }
      break;
  }
  return out;
}

}  // namespace carp
