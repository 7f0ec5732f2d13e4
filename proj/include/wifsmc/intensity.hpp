#pragma once

#include <map>
#include <vector>

#include "wifsmc/core.hpp"
#include "wifsmc/resampling.hpp"

namespace wifsmc {

/// Instantaneous potential values v with cached mean and minimum.
struct PotentialValues {
  std::vector<double> v;
  double vbar = 0.0;
  double vmin = 0.0;

  std::size_t size() const { return v.size(); }
  static PotentialValues from(std::vector<double> v);
};

struct IntensityEntry {
  EventSignature sig;
  AncestorVector layout;  // full ancestor assignment of the event
  double rate = 0.0;
};

/// Sparse table of limiting resampling rates, keyed by single-death event.
/// `total` is the overall rate iota*: the closed form, computed independently
/// of the per-entry sum.
struct IntensityTable {
  std::map<EventSignature, IntensityEntry> entries;
  double total = 0.0;
  /// Numeric tables only: rate mass of non-identity outcomes that are not
  /// single-death events (O(Delta) for stable schemes, divergent for
  /// multinomial/residual). Always 0 in closed-form tables.
  double other = 0.0;

  double entry_sum() const;
  double rate(const EventSignature& sig) const;
  /// Per-index marginal rate of elimination / duplication.
  std::vector<double> elimination_marginals(std::size_t n) const;
  std::vector<double> duplication_marginals(std::size_t n) const;
};

/// Closed-form limiting intensity table of a stable scheme. `order` must be a
/// mean partition of -v for the schemes whose definition depends on one
/// (stratified, systematic, ssp with mean-partition ordering); it is ignored
/// by killing and by natural-order ssp/symmetrised.
IntensityTable intensity_table(const SchemeId& scheme, const PotentialValues& v,
                               const Permutation& order);

/// Closed-form overall rate, evaluated from the iota* expression directly.
double overall_rate(const SchemeId& scheme, const PotentialValues& v, const Permutation& order);

/// Finite-Delta quotient (1/Delta) r(a | exp(-Delta v)) restricted to
/// non-identity outcomes, keyed like the closed-form table. First-order
/// accurate in Delta for the stable schemes.
IntensityTable numeric_intensity(const SchemeId& scheme, const PotentialValues& v, double delta);

/// Richardson extrapolation of two numeric tables at Delta and Delta/2:
/// 2*T(Delta/2) - T(Delta), entry by entry.
IntensityTable richardson(const IntensityTable& coarse, const IntensityTable& fine);

/// Residuals of the asymptotic-unbiasedness identity: for each index i,
/// sum_a iota(a,v) (offspring_i(a) - 1) - (vbar - v_i). Zero for every shipped
/// closed-form table.
std::vector<double> check_unbiased_identity(const IntensityTable& table, const PotentialValues& v);

struct RateOrdering {
  double killing = 0.0;
  double stratified = 0.0;
  double systematic_ssp = 0.0;
  bool killing_ge_systematic = false;
  bool stratified_ge_systematic = false;
  int killing_vs_stratified = 0;  // sign of killing - stratified
};

/// Evaluates the three closed-form overall rates and the theorem's ordering.
RateOrdering rate_ordering(const PotentialValues& v, const Permutation& order);

}  // namespace wifsmc
