#pragma once

#include <map>
#include <string>
#include <vector>

#include "wifsmc/core.hpp"
#include "wifsmc/rng.hpp"

namespace wifsmc {

enum class SchemeKind {
  multinomial,
  residual,
  killing,
  stratified,
  systematic,
  ssp,
  symmetrised_systematic,
};

enum class Ordering { natural, mean_partition };

/// Identifies a concrete resampling scheme. `ordering` = mean_partition is the
/// "Partition" variant: indices are processed in a mean-partition order of the
/// weights (below-or-equal-average weights first), which asymptotically
/// partitions the potentials about their mean with high potentials first.
struct SchemeId {
  SchemeKind kind = SchemeKind::systematic;
  Ordering ordering = Ordering::natural;
  /// Symmetrised systematic only: when the excess-mass condition p <= 1 fails,
  /// fall back to SSP with mean partition instead of erroring.
  bool fallback = true;

  bool supports_ordering() const {
    return kind == SchemeKind::stratified || kind == SchemeKind::systematic ||
           kind == SchemeKind::ssp;
  }
  bool has_intensity_limit() const {
    return kind != SchemeKind::multinomial && kind != SchemeKind::residual;
  }
  std::string name() const;
  static SchemeId parse(const std::string& name);
};

/// All stable schemes in the order used by the experiment harnesses.
std::vector<SchemeId> all_schemes();

/// Draws one ancestor vector from the scheme's law given unnormalised weights.
AncestorVector resample(const SchemeId& scheme, const std::vector<double>& g, Rng& rng);

using ResamplingDistribution = std::map<AncestorVector, double>;

/// Exact law of `resample` by enumeration; N is capped (kMaxEnumerationN) since
/// product-support schemes enumerate up to N^N outcomes.
ResamplingDistribution exact_distribution(const SchemeId& scheme, const std::vector<double>& g);

inline constexpr std::size_t kMaxEnumerationN = 12;

/// Expected offspring counts under an exact law; the unbiasedness check
/// compares this against N*w.
std::vector<double> expected_offspring(const ResamplingDistribution& dist);

}  // namespace wifsmc
