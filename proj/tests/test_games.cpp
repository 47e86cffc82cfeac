#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cbg/errors.hpp"
#include "cbg/games.hpp"
#include "helpers.hpp"

using namespace cbg;
using test_helpers::close;
using test_helpers::make_vendor;

namespace {

// Literal pairwise summation, written independently of the library path.
std::vector<double> brute_force_vendor(const VendorGameSpec& spec, const PureProfile& profile) {
  const int n = spec.n_agents();
  std::vector<double> out(n, 0.0);
  for (int x = 0; x < n; ++x) {
    double total = spec.bias[x];
    for (int y = 0; y < n; ++y) {
      if (y == x) continue;
      if (profile[x] == profile[y]) total += spec.interaction[x * n + y];
    }
    out[x] = total;
  }
  return out;
}

}  // namespace

TEST_CASE("vendor payoffs: solo agent earns its bias") {
  const VendorGameSpec spec = make_vendor(1, 2, {0.0}, {2.5});
  CHECK(vendor_payoffs(spec, {0}) == std::vector<double>{2.5});
  CHECK(vendor_payoffs(spec, {1}) == std::vector<double>{2.5});
}

TEST_CASE("vendor payoffs: separated agents do not interact") {
  const VendorGameSpec spec = make_vendor(2, 2, {0.0, 7.0, -4.0, 0.0}, {1.0, -1.0});
  CHECK(vendor_payoffs(spec, {0, 1}) == std::vector<double>{1.0, -1.0});
}

TEST_CASE("vendor payoffs: three co-located agents match the brute-force sum") {
  const VendorGameSpec spec =
      make_vendor(3, 2, {0.0, 1.0, 2.0, 3.0, 0.0, 4.0, 5.0, 6.0, 0.0}, {1.0, -1.0, 0.5});
  const PureProfile profile{0, 0, 0};
  const std::vector<double> expected{4.0, 6.0, 11.5};  // frozen from the oracle
  const std::vector<double> got = vendor_payoffs(spec, profile);
  const std::vector<double> oracle = brute_force_vendor(spec, profile);
  for (int x = 0; x < 3; ++x) {
    CHECK(close(got[x], expected[x], 1e-12));
    CHECK(close(got[x], oracle[x], 1e-12));
  }
}

TEST_CASE("vendor payoffs: moving an agent away subtracts exactly its impact") {
  Rng rng = make_rng(7);
  std::uniform_real_distribution<double> draw(-3.0, 3.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 4;
    std::vector<double> interaction(n * n), bias(n);
    for (double& v : interaction) v = draw(rng);
    for (double& v : bias) v = draw(rng);
    const VendorGameSpec spec = make_vendor(n, 2, interaction, bias);
    PureProfile together(n, 0);
    for (int y = 1; y < n; ++y) {
      PureProfile moved = together;
      moved[y] = 1;
      const double before = vendor_payoffs(spec, together)[0];
      const double after = vendor_payoffs(spec, moved)[0];
      CHECK(close(before - after, spec.impact(0, y), 1e-12));
    }
  }
}

TEST_CASE("vendor payoffs: dimension mismatch is rejected") {
  const VendorGameSpec spec = make_vendor(2, 2, {0.0, 1.0, 1.0, 0.0}, {0.0, 0.0});
  CHECK_THROWS_AS(vendor_payoffs(spec, {0}), InvalidInputError);
  CHECK_THROWS_AS(vendor_payoffs(spec, {0, 2}), InvalidInputError);
}

TEST_CASE("bar payoffs: attendance at capacity still fits") {
  const SantaFeSpec spec{10, 0.6, 4.0, -6.0, 0.0};
  REQUIRE(spec.capacity() == 6);
  PureProfile profile(10, 0);
  for (int a = 0; a < 6; ++a) profile[a] = 1;
  const std::vector<double> payoffs = santafe_payoffs(spec, profile);
  for (int a = 0; a < 10; ++a) CHECK(payoffs[a] == (a < 6 ? 4.0 : 0.0));
}

TEST_CASE("bar payoffs: one visitor over capacity crowds everyone") {
  const SantaFeSpec spec{10, 0.6, 4.0, -6.0, 0.0};
  PureProfile profile(10, 0);
  for (int a = 0; a < 7; ++a) profile[a] = 1;
  const std::vector<double> payoffs = santafe_payoffs(spec, profile);
  for (int a = 0; a < 10; ++a) CHECK(payoffs[a] == (a < 7 ? -6.0 : 0.0));
}

TEST_CASE("bar payoffs: everyone home earns the home utility") {
  const SantaFeSpec spec{10, 0.6, 4.0, -6.0, 0.0};
  const std::vector<double> payoffs = santafe_payoffs(spec, PureProfile(10, 0));
  for (double v : payoffs) CHECK(v == 0.0);
}

TEST_CASE("bar payoffs: permuting agents permutes payoffs") {
  const SantaFeSpec spec{8, 0.5, 4.0, -6.0, 0.0};
  Rng rng = make_rng(11);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int rep = 0; rep < 20; ++rep) {
    PureProfile profile(8);
    for (int& s : profile) s = coin(rng);
    const std::vector<double> base = santafe_payoffs(spec, profile);
    PureProfile rotated(profile.rbegin(), profile.rend());
    const std::vector<double> perm = santafe_payoffs(spec, rotated);
    for (int a = 0; a < 8; ++a) CHECK(base[a] == perm[7 - a]);
  }
}

TEST_CASE("sampling: zero variance copies the type mean into every pair") {
  Rng rng = make_rng(3);
  const VendorGameSpec spec = sample_vendor_game(6, 2, 2, 0.0, rng);
  for (int x = 0; x < 6; ++x) {
    for (int y = 0; y < 6; ++y) {
      if (x == y) continue;
      CHECK(spec.impact(x, y) ==
            spec.type_mean(spec.agent_type[x], spec.agent_type[y]));
    }
  }
  for (int t = 0; t < 2; ++t) CHECK(spec.type_mean(t, t) < 0.0);
}

TEST_CASE("sampling: fixed seed reproduces the spec exactly") {
  Rng rng_a = make_rng(99);
  Rng rng_b = make_rng(99);
  const VendorGameSpec a = sample_vendor_game(10, 2, 2, 1.5, rng_a);
  const VendorGameSpec b = sample_vendor_game(10, 2, 2, 1.5, rng_b);
  CHECK(a.type_matrix == b.type_matrix);
  CHECK(a.interaction == b.interaction);
  CHECK(a.bias == b.bias);
  CHECK(a.agent_type == b.agent_type);
}

TEST_CASE("sampling: relation mix hits the stated probabilities") {
  Rng rng = make_rng(17);
  const int n_types = 101;  // 10100 off-diagonal relation draws
  const VendorGameSpec spec = sample_vendor_game(2, n_types, 2, 0.0, rng);
  int neutral = 0, substitute = 0, complement = 0, total = 0;
  for (int i = 0; i < n_types; ++i) {
    for (int j = 0; j < n_types; ++j) {
      if (i == j) continue;
      ++total;
      const double mean = spec.type_mean(i, j);
      if (mean == 0.0) {
        ++neutral;
      } else if (mean < 0.0) {
        ++substitute;
      } else {
        ++complement;
      }
    }
  }
  CHECK(std::abs(static_cast<double>(neutral) / total - 0.1) < 0.02);
  CHECK(std::abs(static_cast<double>(substitute) / total - 0.45) < 0.02);
  CHECK(std::abs(static_cast<double>(complement) / total - 0.45) < 0.02);
}

TEST_CASE("sampling: unsatisfiable complement requirement errors out") {
  Rng rng = make_rng(5);
  CHECK_THROWS_AS(sample_vendor_game(4, 1, 2, 0.5, rng), GenerationError);
}

TEST_CASE("observations: single draw has matching payoffs") {
  Rng rng = make_rng(21);
  const VendorGameSpec spec = sample_vendor_game(10, 2, 2, 0.5, rng);
  const ObservationSet obs = generate_observations(Game{spec}, 1, rng);
  REQUIRE(obs.size() == 1);
  REQUIRE(obs.observations[0].profile.size() == 10);
  CHECK(obs.observations[0].payoffs == vendor_payoffs(spec, obs.observations[0].profile));
}

TEST_CASE("observations: fixed seed is bit-reproducible") {
  Rng rng = make_rng(23);
  const VendorGameSpec spec = sample_vendor_game(6, 2, 2, 0.5, rng);
  Rng rng_a = make_rng(1234);
  Rng rng_b = make_rng(1234);
  const ObservationSet a = generate_observations(Game{spec}, 25, rng_a);
  const ObservationSet b = generate_observations(Game{spec}, 25, rng_b);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.observations[i].profile == b.observations[i].profile);
    CHECK(a.observations[i].payoffs == b.observations[i].payoffs);
  }
}

TEST_CASE("observations: strategies are uniform") {
  const VendorGameSpec spec = make_vendor(4, 2, std::vector<double>(16, 0.0), {0, 0, 0, 0});
  Rng rng = make_rng(31);
  const ObservationSet obs = generate_observations(Game{spec}, 10000, rng);
  for (int a = 0; a < 4; ++a) {
    int zeros = 0;
    for (const Observation& ob : obs.observations) zeros += ob.profile[a] == 0;
    CHECK(std::abs(zeros / 10000.0 - 0.5) < 0.02);
  }
}

TEST_CASE("counterfactual: identity deviation returns the realized payoff") {
  Rng rng = make_rng(41);
  const VendorGameSpec spec = sample_vendor_game(8, 2, 3, 1.0, rng);
  const Game game{spec};
  const ObservationSet obs = generate_observations(game, 5, rng);
  for (const Observation& ob : obs.observations) {
    for (int a = 0; a < 8; ++a) {
      CHECK(counterfactual_payoff(game, ob.profile, a, ob.profile[a]) == ob.payoffs[a]);
    }
  }
}

TEST_CASE("counterfactual: deviating home is unconditional") {
  const SantaFeSpec spec{10, 0.4, 4.0, -6.0, 0.0};
  const Game game{spec};
  Rng rng = make_rng(43);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int rep = 0; rep < 10; ++rep) {
    PureProfile profile(10);
    for (int& s : profile) s = coin(rng);
    for (int a = 0; a < 10; ++a) CHECK(counterfactual_payoff(game, profile, a, 0) == 0.0);
  }
}

TEST_CASE("counterfactual: matches a full re-evaluation") {
  Rng rng = make_rng(47);
  const VendorGameSpec spec = sample_vendor_game(3, 2, 2, 1.0, rng);
  const Game game{spec};
  std::uniform_int_distribution<int> coin(0, 1);
  for (int rep = 0; rep < 20; ++rep) {
    PureProfile profile(3);
    for (int& s : profile) s = coin(rng);
    for (int a = 0; a < 3; ++a) {
      for (int alt = 0; alt < 2; ++alt) {
        PureProfile deviated = profile;
        deviated[a] = alt;
        const double full = brute_force_vendor(spec, deviated)[a];
        CHECK(close(counterfactual_payoff(game, profile, a, alt), full, 1e-12));
      }
    }
  }
}

TEST_CASE("counterfactual: invalid indices are rejected") {
  const SantaFeSpec spec{4, 0.5, 4.0, -6.0, 0.0};
  const Game game{spec};
  const PureProfile profile{0, 1, 0, 1};
  CHECK_THROWS_AS(counterfactual_payoff(game, profile, 4, 0), InvalidInputError);
  CHECK_THROWS_AS(counterfactual_payoff(game, profile, 0, 2), InvalidInputError);
}
