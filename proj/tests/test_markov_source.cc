#include <cmath>
#include <vector>

#include "doctest.h"
#include "gen.h"
#include "specdec/dist.h"
#include "specdec/error.h"
#include "specdec/markov_source.h"
#include "specdec/rng.h"

using namespace specdec;

TEST_CASE("order-0 source ignores context") {
  const MarkovSource src(0, 3, {normalize({1, 2, 3})});
  CHECK(src.row_count() == 1);
  const Context a{0, 1, 2};
  const Context b{2};
  CHECK(&src.conditional(a) == &src.conditional(b));
  CHECK(&src.conditional(Context{}) == &src.conditional(a));
  CHECK(random_source(1, 0, 5, 1.0).row_count() == 1);
}

TEST_CASE("order-1 table lookup") {
  // rows: start, after 0, after 1
  const MarkovSource src(1, 2, {Dist::uniform(2), normalize({0.3, 0.7}), normalize({0.9, 0.1})});
  const Dist& d = src.conditional(Context{0, 0, 1});
  CHECK(d[0] == doctest::Approx(0.9));
  CHECK(d[1] == doctest::Approx(0.1));
  CHECK(src.conditional(Context{}) == Dist::uniform(2));
  CHECK(src.conditional(Context{1}, Context{0}) == src.conditional(Context{0}));
}

TEST_CASE("Markov property, exhaustive over short contexts") {
  for (int order = 0; order <= 2; ++order) {
    for (int n = 2; n <= 5; ++n) {
      const MarkovSource src = random_source(100 + 10 * order + n, order, n, 1.0);
      // Every context of length ≤ order + 2.
      std::vector<Context> ctxs{{}};
      for (int len = 1; len <= order + 2; ++len) {
        std::vector<Context> next;
        for (const Context& c : ctxs) {
          if (static_cast<int>(c.size()) != len - 1) continue;
          for (Token t = 0; t < n; ++t) {
            Context e = c;
            e.push_back(t);
            next.push_back(e);
          }
        }
        ctxs.insert(ctxs.end(), next.begin(), next.end());
      }
      for (const Context& c : ctxs) {
        const std::size_t keep = std::min(c.size(), static_cast<std::size_t>(order));
        const Context suffix(c.end() - static_cast<std::ptrdiff_t>(keep), c.end());
        CHECK(src.conditional(c) == src.conditional(suffix));
        // window() inverts context_index.
        const std::vector<Token> w = src.window(src.context_index(c));
        std::vector<Token> real;
        for (Token t : w) {
          if (t != kStartSymbol) real.push_back(t);
        }
        CHECK(real == suffix);
        // The split lookup agrees with the concatenated one.
        if (!c.empty()) {
          const Context head(c.begin(), c.end() - 1);
          const Context tail(c.end() - 1, c.end());
          CHECK(&src.conditional(head, tail) == &src.conditional(c));
        }
      }
    }
  }
}

TEST_CASE("random_source is deterministic and concentrates") {
  const MarkovSource a = random_source(5, 1, 6, 0.5);
  const MarkovSource b = random_source(5, 1, 6, 0.5);
  for (std::size_t r = 0; r < a.row_count(); ++r) CHECK(a.row(r) == b.row(r));

  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const MarkovSource s = random_source(seed, 1, 4, 1e4);
    for (std::size_t r = 0; r < s.row_count(); ++r) {
      worst = std::max(worst, tv_distance(s.row(r), Dist::uniform(4)));
    }
  }
  CHECK(worst < 0.05);
  CHECK_THROWS_AS(random_source(1, 1, 1, 1.0), Error);
  CHECK_THROWS_AS(random_source(1, 1, 4, 0.0), Error);
}

TEST_CASE("perturb_draft") {
  const MarkovSource p = random_source(9, 1, 4, 1.0);
  const MarkovSource same = perturb_draft(p, 0.0, 3);
  for (std::size_t r = 0; r < p.row_count(); ++r) {
    CHECK(kl_divergence(p.row(r), same.row(r)) == 0.0);
  }
  // mix = 1 ignores P: two different targets give the same draft.
  const MarkovSource other = random_source(10, 1, 4, 1.0);
  const MarkovSource q1 = perturb_draft(p, 1.0, 3);
  const MarkovSource q2 = perturb_draft(other, 1.0, 3);
  for (std::size_t r = 0; r < p.row_count(); ++r) {
    for (Token t = 0; t < 4; ++t) CHECK(q1.row(r)[t] == doctest::Approx(q2.row(r)[t]).epsilon(1e-12));
  }

  auto mean_kl = [](double mix) {
    double total = 0.0;
    int rows = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const MarkovSource pp = random_source(seed, 0, 4, 1.0);
      const MarkovSource qq = perturb_draft(pp, mix, seed + 1000);
      total += kl_divergence(pp.row(0), qq.row(0));
      ++rows;
    }
    return total / rows;
  };
  const double k0 = mean_kl(0.0);
  const double k2 = mean_kl(0.2);
  const double k1 = mean_kl(1.0);
  CHECK(k0 < k2);
  CHECK(k2 < k1);
}

TEST_CASE("autoregressive sampling") {
  Rng rng(1);
  const MarkovSource src = random_source(3, 1, 5, 1.0);
  CHECK(autoregressive_sample(src, {}, 0, rng).empty());

  // Deterministic cycle 0 → 1 → 2 → 0.
  const MarkovSource cyc(1, 3, {Dist::point(3, 0), Dist::point(3, 1), Dist::point(3, 2), Dist::point(3, 0)});
  CHECK(autoregressive_sample(cyc, {}, 5, rng) == std::vector<Token>{0, 1, 2, 0, 1});

  const Context ctx{2};
  std::vector<double> freq(5, 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) freq[static_cast<std::size_t>(autoregressive_sample(src, ctx, 1, rng)[0])] += 1.0 / draws;
  const auto row = src.conditional(ctx).mass();
  CHECK(specdec::testing::tv(freq, {row.begin(), row.end()}) < 0.01);
}

TEST_CASE("stationary weights solve the chain") {
  const MarkovSource src = random_source(21, 2, 3, 1.0);
  const std::vector<double> w = src.stationary_row_weights();
  double total = 0.0;
  for (double x : w) total += x;
  CHECK(total == doctest::Approx(1.0));
  // π(a,b) = Σ_c π(c,a) P(b | c,a), checked on full windows.
  for (std::size_t r = 0; r < src.row_count(); ++r) {
    const std::vector<Token> win = src.window(r);
    if (win[0] == kStartSymbol) {
      CHECK(w[r] == 0.0);
      continue;
    }
    double inflow = 0.0;
    for (Token c = 0; c < 3; ++c) {
      const Context prev{c, win[0]};
      inflow += w[src.context_index(prev)] * src.conditional(prev)[win[1]];
    }
    CHECK(w[r] == doctest::Approx(inflow).epsilon(1e-9));
  }
}

TEST_CASE("JSON round trip") {
  const MarkovSource src = random_source(4, 2, 3, 0.7);
  const MarkovSource back = source_from_json(to_json(src));
  REQUIRE(back.row_count() == src.row_count());
  for (std::size_t r = 0; r < src.row_count(); ++r) {
    for (Token t = 0; t < 3; ++t) CHECK(back.row(r)[t] == doctest::Approx(src.row(r)[t]).epsilon(1e-15));
  }
  CHECK_THROWS_AS(source_from_json("{\"order\": 1}"), Error);
}
