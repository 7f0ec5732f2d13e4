#pragma once

#include <stdexcept>
#include <string>

namespace wifsmc {

struct AllZeroWeights : std::runtime_error {
  explicit AllZeroWeights(const std::string& what = "all weights are zero")
      : std::runtime_error(what) {}
};

struct NegativeWeight : std::runtime_error {
  explicit NegativeWeight(const std::string& what = "negative weight")
      : std::runtime_error(what) {}
};

struct IndexOutOfRange : std::out_of_range {
  explicit IndexOutOfRange(const std::string& what = "index out of range")
      : std::out_of_range(what) {}
};

struct TooLargeForEnumeration : std::runtime_error {
  explicit TooLargeForEnumeration(const std::string& what = "N too large for exact enumeration")
      : std::runtime_error(what) {}
};

struct SymmetrisedConditionViolated : std::runtime_error {
  explicit SymmetrisedConditionViolated(const std::string& what =
                                            "sum of positive weight excesses exceeds 1")
      : std::runtime_error(what) {}
};

struct NoIntensityLimit : std::runtime_error {
  explicit NoIntensityLimit(const std::string& what = "scheme has no continuous-time intensity")
      : std::runtime_error(what) {}
};

struct InvalidOrder : std::runtime_error {
  explicit InvalidOrder(const std::string& what = "permutation is not a valid mean partition")
      : std::runtime_error(what) {}
};

struct UnsupportedDimension : std::runtime_error {
  explicit UnsupportedDimension(const std::string& what = "operation supports d = 1 only")
      : std::runtime_error(what) {}
};

struct MajorantViolated : std::runtime_error {
  explicit MajorantViolated(const std::string& what = "observed rate exceeds the majorant")
      : std::runtime_error(what) {}
};

struct EmptyEnsemble : std::runtime_error {
  explicit EmptyEnsemble(const std::string& what = "empty path ensemble")
      : std::runtime_error(what) {}
};

struct ChainTooShort : std::runtime_error {
  explicit ChainTooShort(const std::string& what = "chain too short for requested diagnostic")
      : std::runtime_error(what) {}
};

struct DegenerateFilter : std::runtime_error {
  explicit DegenerateFilter(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wifsmc
