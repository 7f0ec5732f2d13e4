#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "wifsmc/resampling.hpp"

using namespace wifsmc;

namespace {

AncestorVector av(std::vector<std::size_t> idx) {
  AncestorVector a;
  a.a = std::move(idx);
  return a;
}

double law_prob(const ResamplingDistribution& d, const AncestorVector& a) {
  auto it = d.find(a);
  return it == d.end() ? 0.0 : it->second;
}

void check_law_sums_to_one(const ResamplingDistribution& d) {
  double s = 0.0;
  for (const auto& [a, p] : d) {
    CHECK(p >= 0.0);
    s += p;
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
}

}  // namespace

TEST_CASE("scheme names round-trip") {
  for (const auto& s : all_schemes()) {
    auto t = SchemeId::parse(s.name());
    CHECK(t.kind == s.kind);
    CHECK(t.ordering == s.ordering);
  }
  CHECK(all_schemes().size() == 10);
  CHECK_THROWS(SchemeId::parse("bogus"));
  CHECK_THROWS(SchemeId::parse("multinomial+partition"));
}

TEST_CASE("systematic with uniform weights returns identity surely") {
  Rng rng(1);
  std::vector<double> g(5, 0.2);
  for (const char* name : {"killing", "stratified", "systematic", "ssp",
                           "systematic+partition", "symmetrised-systematic"}) {
    auto scheme = SchemeId::parse(name);
    for (int rep = 0; rep < 200; ++rep) CHECK(resample(scheme, g, rng).is_identity());
  }
}

TEST_CASE("multinomial with degenerate weights") {
  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    auto a = resample(SchemeId::parse("multinomial"), {1.0, 0.0, 0.0}, rng);
    CHECK(a.a == std::vector<std::size_t>{0, 0, 0});
  }
}

TEST_CASE("killing law for g=(0.4,0.6)") {
  auto d = exact_distribution(SchemeId::parse("killing"), {0.4, 0.6});
  check_law_sums_to_one(d);
  CHECK(law_prob(d, av({0, 1})) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(law_prob(d, av({1, 1})) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(d.size() == 2);
}

TEST_CASE("systematic, stratified and ssp share the two-point law") {
  for (const char* name : {"systematic", "stratified", "ssp+partition", "ssp"}) {
    CAPTURE(name);
    auto d = exact_distribution(SchemeId::parse(name), {0.4, 0.6});
    check_law_sums_to_one(d);
    CHECK(law_prob(d, av({0, 1})) == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(law_prob(d, av({1, 1})) == doctest::Approx(0.2).epsilon(1e-10));
  }
}

TEST_CASE("multinomial uniform N=3 permutation mass is 6/27") {
  auto d = exact_distribution(SchemeId::parse("multinomial"), {1.0, 1.0, 1.0});
  check_law_sums_to_one(d);
  double perm_mass = 0.0;
  for (const auto& [a, p] : d) {
    auto off = a.offspring();
    bool is_perm = true;
    for (auto c : off) is_perm = is_perm && c == 1;
    if (is_perm) perm_mass += p;
  }
  CHECK(perm_mass == doctest::Approx(6.0 / 27.0).epsilon(1e-12));
}

TEST_CASE("unbiasedness of the exact law") {
  Rng rng(3);
  for (const auto& scheme : all_schemes()) {
    CAPTURE(scheme.name());
    for (std::size_t n : {2, 3, 4}) {
      for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> g(n);
        for (auto& v : g) v = 0.05 + uniform01(rng);
        auto wv = normalize(g);
        auto off = expected_offspring(exact_distribution(scheme, g));
        for (std::size_t j = 0; j < n; ++j)
          CHECK(std::abs(off[j] - static_cast<double>(n) * wv.w[j]) < 1e-9);
      }
    }
  }
}

TEST_CASE("sampler matches the exact law") {
  const std::size_t draws = 200000;
  std::vector<double> g{0.2, 0.5, 0.3};
  for (const auto& scheme : all_schemes()) {
    CAPTURE(scheme.name());
    auto d = exact_distribution(scheme, g);
    std::map<AncestorVector, std::size_t> counts;
    Rng rng(99);
    for (std::size_t i = 0; i < draws; ++i) ++counts[resample(scheme, g, rng)];
    for (const auto& [a, c] : counts) CHECK(law_prob(d, a) > 0.0);
    for (const auto& [a, p] : d) {
      const double freq = static_cast<double>(counts[a]) / static_cast<double>(draws);
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(draws));
      CHECK(std::abs(freq - p) <= 4.0 * se + 1e-9);
    }
  }
}

namespace {

// aggregate single-event and other off-identity mass over random nearly
// uniform partitioned weight vectors exp(-delta v), v sorted descending
std::pair<double, double> offidentity_masses(const SchemeId& scheme, double delta,
                                             std::uint64_t seed) {
  Rng rng(seed);
  double single = 0.0, multi = 0.0;
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 3 + rng() % 3;
    std::vector<double> v(n);
    for (auto& x : v) x = uniform01(rng) * 3.0;
    std::sort(v.begin(), v.end(), std::greater<>());
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(-delta * v[i]);
    REQUIRE(normalize(g).nearly_uniform_partitioned());
    for (const auto& [a, p] : exact_distribution(scheme, g)) {
      if (a.is_identity()) continue;
      EventSignature sig;
      (single_event_signature(a, sig) ? single : multi) += p;
    }
  }
  return {single, multi};
}

}  // namespace

TEST_CASE("single-event structure under nearly uniform partitioned weights") {
  // systematic, ssp and symmetrised place no mass outside identity and single
  // events under the partitioned sign pattern, at any step size
  for (std::string name : {"systematic", "ssp", "symmetrised-systematic"}) {
    CAPTURE(name);
    auto [single, multi] = offidentity_masses(SchemeId::parse(name), 0.05, 5);
    CHECK(single > 0.0);
    CHECK(multi == 0.0);
  }
  // killing and stratified admit simultaneous double events whose mass is one
  // order smaller in the step size and vanishes in the limit
  for (std::string name : {"killing", "stratified"}) {
    CAPTURE(name);
    auto scheme = SchemeId::parse(name);
    auto [s1, m1] = offidentity_masses(scheme, 0.05, 5);
    auto [s2, m2] = offidentity_masses(scheme, 0.025, 5);
    CHECK(m1 / s1 < 0.05);
    CHECK(m2 / s2 < 0.6 * m1 / s1);
  }
}

TEST_CASE("stratified support under identity order") {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + rng() % 4;
    std::vector<double> v(n);
    for (auto& x : v) x = uniform01(rng) * 2.0;
    std::sort(v.begin(), v.end(), std::greater<>());
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(-0.02 * v[i]);
    REQUIRE(normalize(g).nearly_uniform_partitioned());
    for (const auto& [a, p] : exact_distribution(SchemeId::parse("stratified"), g)) {
      if (p <= 1e-15) continue;
      for (std::size_t i = 0; i < n; ++i) CHECK((a.a[i] == i || a.a[i] == i + 1));
    }
  }
}

TEST_CASE("determinism given the seed") {
  std::vector<double> g{0.1, 0.4, 0.2, 0.3};
  for (const auto& scheme : all_schemes()) {
    Rng r1(123), r2(123);
    for (int i = 0; i < 50; ++i) CHECK(resample(scheme, g, r1).a == resample(scheme, g, r2).a);
  }
}

TEST_CASE("symmetrised systematic condition handling") {
  // p = sum (N w - 1)_+ > 1 needs a sharply peaked weight vector
  std::vector<double> g{10.0, 0.1, 0.1, 0.1};
  auto strict = SchemeId::parse("symmetrised-systematic");
  strict.fallback = false;
  Rng rng(8);
  CHECK_THROWS_AS(resample(strict, g, rng), SymmetrisedConditionViolated);
  CHECK_THROWS_AS(exact_distribution(strict, g), SymmetrisedConditionViolated);
  auto relaxed = SchemeId::parse("symmetrised-systematic");
  CHECK_NOTHROW(resample(relaxed, g, rng));
  check_law_sums_to_one(exact_distribution(relaxed, g));
}

TEST_CASE("symmetrised systematic law: identity mass is 1 - p") {
  std::vector<double> g{0.9, 1.0, 1.1};  // eps = (-0.1, 0, 0.1), p = 0.1
  auto d = exact_distribution(SchemeId::parse("symmetrised-systematic"), g);
  check_law_sums_to_one(d);
  CHECK(law_prob(d, av({0, 1, 2})) == doctest::Approx(0.9).epsilon(1e-10));
  // the only (negative, positive) excess pair is (0, 2): event [1 -> 3]_3
  CHECK(law_prob(d, AncestorVector::single_event(3, 0, 2)) ==
        doctest::Approx(0.1).epsilon(1e-10));
}

TEST_CASE("enumeration bound enforced") {
  std::vector<double> g(13, 1.0);
  CHECK_THROWS_AS(exact_distribution(SchemeId::parse("multinomial"), g),
                  TooLargeForEnumeration);
}

TEST_CASE("residual law splits floor copies plus remainder") {
  // w = (0.5, 0.25, 0.25), N=4: floor copies (2,1,1), no remainder -> deterministic
  auto d = exact_distribution(SchemeId::parse("residual"), {0.5, 0.25, 0.25, 0.0});
  check_law_sums_to_one(d);
  // N=4 with a zero weight: floors (2,1,1,0) fill all slots
  CHECK(d.size() == 1);
  auto off = d.begin()->first.offspring();
  CHECK(off == std::vector<std::size_t>{2, 1, 1, 0});
}
