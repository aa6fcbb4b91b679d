#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "support.hpp"

using namespace netcurrency;
using namespace testsupport;

namespace {

// Brute-force backward induction on the lattice j/G with utilities from allocate_T.
class LatticeOracle {
 public:
  LatticeOracle(const Scenario& s, int grid) : s_(s), sys_(s), grid_(grid) {}

  CommitmentProfile solve() {
    CommitmentProfile p;
    p.choices.assign(s_.issuer_count(), IssuerChoice::out());
    return solve_from(0, p);
  }

  double utility(const CommitmentProfile& p, std::size_t t) const {
    if (!p[t].in()) return 0.0;
    const Allocation a = allocate_T(sys_, s_, p);
    return a.totals()(static_cast<Eigen::Index>(t)) - s_.k * s_.issuers[t].cost(p[t].e());
  }

 private:
  CommitmentProfile solve_from(std::size_t t, CommitmentProfile p) {
    if (t == s_.issuer_count()) return p;
    const double tie = Tolerances{}.tie_tol;
    std::vector<std::pair<double, CommitmentProfile>> in;
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j <= grid_; ++j) {
      p[t] = IssuerChoice::commit(j == grid_ ? 1.0 : static_cast<double>(j) / grid_);
      CommitmentProfile full = solve_from(t + 1, p);
      const double u = utility(full, t);
      best = std::max(best, u);
      in.emplace_back(u, std::move(full));
    }
    if (best <= tie) {
      p[t] = IssuerChoice::out();
      return solve_from(t + 1, p);
    }
    for (auto it = in.rbegin(); it != in.rend(); ++it)
      if (it->first >= best - tie) return it->second;
    return in.back().second;
  }

  Scenario s_;
  UserSystem sys_;
  int grid_;
};

// Leader's best payoff over a dense commitment grid. The follower's reply is a coarse
// scan refined by a fine scan around it (its payoff is concave in its own commitment).
double dense_leader_value(const Scenario& s, double step_leader) {
  const GameModel model(s);
  const double tie = Tolerances{}.tie_tol;
  double best = 0.0;  // Out
  for (double ea = 0.0; ea <= 1.0 + 1e-12; ea += step_leader) {
    const double e_a = std::min(ea, 1.0);
    auto ub = [&](double eb) { return model.utility(1, CommitmentProfile::all_in({e_a, eb})); };
    const auto coarse = dense_scan(ub, 0.0, 1.0, 1e-3);
    const double lo = std::max(0.0, coarse.first - 2e-3), hi = std::min(1.0, coarse.first + 2e-3);
    const auto [eb, vb] = dense_scan(ub, lo, hi, 1e-7);
    const CommitmentProfile p = vb > tie ? CommitmentProfile::all_in({e_a, eb})
                                         : CommitmentProfile({IssuerChoice::commit(e_a), IssuerChoice::out()});
    best = std::max(best, model.utility(0, p));
  }
  return best;
}

Scenario at_k(Scenario s, double k) {
  s.k = k;
  return s;
}

}  // namespace

TEST(IssuerUtility, Examples) {
  const Scenario s = load_scenario("six_node_w.json");
  const CommitmentProfile p({IssuerChoice::out(), IssuerChoice::commit(0.4)});
  EXPECT_EQ(issuer_utility(s, p, 0), 0.0);
  EXPECT_NEAR(issuer_utility(s, CommitmentProfile({IssuerChoice::commit(0.0), IssuerChoice::out()}), 0),
              s.total_volume() - s.k * 1.0, 1e-12);
  const Allocation a = allocate_two(s, 0.27, 0.31);
  const auto both = CommitmentProfile::all_in({0.27, 0.31});
  EXPECT_NEAR(issuer_utility(s, both, 0), a.totals()(0) - 1.5 * std::exp(0.27), 1e-12);
  EXPECT_NEAR(issuer_utility(s, both, 1), a.totals()(1) - 1.5 * std::exp(0.31), 1e-12);
  EXPECT_NEAR(issuer_utility(s, both, 0), 2.83 - 1.5 * std::exp(0.27), 0.005);
}

TEST(GameModel, AggregateIdentityMatchesAllocation) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t T = 2 + rng() % 4;
    const Scenario s = random_scenario(rng, 1 + rng() % 10, T);
    const GameModel model(s);
    const auto p = random_profile(rng, T, 0.3);
    const Allocation a = allocate_T(s, p);
    for (std::size_t t = 0; t < T; ++t) {
      const double x = p[t].in() ? a.totals()(static_cast<Eigen::Index>(t)) : 0.0;
      EXPECT_NEAR(model.total(t, p), x, 1e-10 * std::max(1.0, s.total_volume()));
      EXPECT_NEAR(model.utility(t, p), issuer_utility(s, p, t), 1e-10 * std::max(1.0, s.total_volume()));
    }
  }
}

TEST(BestResponseFollower, Examples) {
  std::mt19937_64 rng(2);
  const Scenario sym = symmetric_scenario(random_network(rng, 6));
  const double kmax = sym.total_volume() / sym.min_base_cost();

  const auto blocked = best_response_follower(at_k(sym, kmax), IssuerChoice::commit(0.0));
  EXPECT_FALSE(blocked.choice.in());
  EXPECT_LE(blocked.utility, 0.0);

  const auto cheap = best_response_follower(at_k(sym, 1e-4), IssuerChoice::commit(0.5));
  ASSERT_TRUE(cheap.choice.in());
  EXPECT_EQ(cheap.choice.e(), 1.0);

  const auto alone = best_response_follower(at_k(sym, 0.5 * kmax), IssuerChoice::out());
  ASSERT_TRUE(alone.choice.in());
  EXPECT_EQ(alone.choice.e(), 0.0);
  EXPECT_FALSE(best_response_follower(at_k(sym, kmax * 1.01), IssuerChoice::out()).choice.in());

  const Scenario w = load_scenario("six_node_w.json");
  const auto r = best_response_follower(w, IssuerChoice::commit(0.27));
  ASSERT_TRUE(r.choice.in());
  EXPECT_NEAR(r.choice.e(), 0.31, 0.01);
}

TEST(BestResponseFollower, MatchesDenseScan) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    const Scenario s = random_scenario(rng, 2 + rng() % 6, 2);
    const GameModel model(s);
    const double ea = uniform(rng, 0.0, 1.0);
    const auto r = best_response_follower(model, IssuerChoice::commit(ea));
    auto ub = [&](double eb) { return model.utility(1, CommitmentProfile::all_in({ea, eb})); };
    const auto [eb, vb] = dense_scan(ub, 0.0, 1.0, 1e-5);
    EXPECT_GE(r.utility, vb - 1e-12);
    EXPECT_NEAR(r.best_commit, eb, 1e-4);
    EXPECT_EQ(r.choice.in(), vb > Tolerances{}.tie_tol);
  }
}

TEST(Deterrence, SymmetricRegimes) {
  std::mt19937_64 rng(4);
  const Scenario sym = symmetric_scenario(random_network(rng, 6));
  const double kmax = sym.total_volume() / sym.min_base_cost();
  EXPECT_EQ(deterrence_commitment(at_k(sym, kmax * 0.999)).status, DeterrenceStatus::Free);
  EXPECT_EQ(deterrence_commitment(at_k(sym, 1e-3)).status, DeterrenceStatus::Infeasible);

  // The root leaves the follower at (or below) zero and any smaller commitment lets it in.
  for (double frac : {0.3, 0.5, 0.7, 0.9}) {
    const Scenario s = at_k(sym, kmax * frac);
    const auto d = deterrence_commitment(s);
    if (d.status != DeterrenceStatus::Feasible) continue;
    EXPECT_LE(best_response_follower(s, IssuerChoice::commit(d.commitment)).utility, Tolerances{}.tie_tol);
    EXPECT_GT(best_response_follower(s, IssuerChoice::commit(std::max(0.0, d.commitment - 1e-6))).utility, 0.0);
  }
}

TEST(Deterrence, SixNodeDoublePrime) {
  const Scenario s = load_scenario("six_node_w_double_prime.json");
  SpeTwoOptions cont;
  const auto d = deterrence_commitment(s, cont);
  EXPECT_EQ(d.status, DeterrenceStatus::Feasible);
  EXPECT_LE(d.commitment, 1.0);
  EXPECT_GT(d.commitment, 0.9);
}

TEST(SpeTwo, SixNodeRegressionsOnLattice) {
  SpeTwoOptions opts;
  opts.lattice = true;
  opts.grid_n = 100;
  const auto w = spe_two(load_scenario("six_node_w.json"), opts);
  EXPECT_EQ(w.regime, Regime::SharedMarket);
  EXPECT_NEAR(w.profile[0].e(), 0.27, 0.01);
  EXPECT_NEAR(w.profile[1].e(), 0.31, 0.01);
  EXPECT_NEAR(w.alloc.totals()(0), 2.83, 0.01);
  EXPECT_NEAR(w.alloc.totals()(1), 3.17, 0.01);

  const auto wp = spe_two(load_scenario("six_node_w_prime.json"), opts);
  EXPECT_EQ(wp.regime, Regime::SharedMarket);
  EXPECT_NEAR(wp.profile[0].e(), 0.29, 0.01);
  EXPECT_NEAR(wp.profile[1].e(), 0.34, 0.01);
  EXPECT_NEAR(wp.alloc.totals()(0), 2.79, 0.01);
  EXPECT_NEAR(wp.alloc.totals()(1), 3.21, 0.01);

  const auto wpp = spe_two(load_scenario("six_node_w_double_prime.json"), opts);
  EXPECT_EQ(wpp.regime, Regime::MonopolyDeterrence);
  EXPECT_EQ(wpp.profile[0].e(), 1.0);
  EXPECT_NEAR(wpp.alloc.totals()(0), 6.0, 1e-12);
}

TEST(SpeTwo, ContinuousModeOnSixNodeNetworks) {
  SpeTwoOptions opts;
  const auto w = spe_two(load_scenario("six_node_w.json"), opts);
  EXPECT_EQ(w.regime, Regime::SharedMarket);
  EXPECT_NEAR(w.profile[0].e(), 0.27, 0.01);
  EXPECT_NEAR(w.profile[1].e(), 0.31, 0.01);
  EXPECT_NEAR(w.alloc.totals()(0), 2.83, 0.01);

  const auto wpp = spe_two(load_scenario("six_node_w_double_prime.json"), opts);
  EXPECT_EQ(wpp.regime, Regime::MonopolyDeterrence);
  EXPECT_GT(wpp.profile[0].e(), 0.99);
  ASSERT_TRUE(wpp.diagnostics.deterrence_root);
  EXPECT_NEAR(wpp.profile[0].e(), *wpp.diagnostics.deterrence_root, 1e-12);
}

TEST(SpeTwo, LatticeMatchesBruteForce) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 25; ++rep) {
    Scenario s = random_scenario(rng, 2 + rng() % 6, 2);
    s.k = uniform(rng, 0.0, s.total_volume() / s.min_base_cost());
    SpeTwoOptions opts;
    opts.lattice = true;
    opts.grid_n = 12;
    const auto out = spe_two(s, opts);
    const auto oracle = LatticeOracle(s, 12).solve();
    ASSERT_EQ(out.profile.size(), 2u);
    for (std::size_t t = 0; t < 2; ++t) {
      ASSERT_EQ(out.profile[t].in(), oracle[t].in()) << "rep " << rep << " issuer " << t;
      if (oracle[t].in()) EXPECT_NEAR(out.profile[t].e(), oracle[t].e(), 1e-12) << "rep " << rep;
    }
  }
}

TEST(SpeTwo, ContinuousLeaderPayoffMatchesDenseOracle) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 6; ++rep) {
    Scenario s = random_scenario(rng, 2 + rng() % 5, 2);
    s.k = uniform(rng, 0.0, 0.8) * s.total_volume() / s.min_base_cost();
    const auto out = spe_two(s);
    const double oracle = dense_leader_value(s, 2e-3);
    EXPECT_GE(out.utilities[0], oracle - 1e-6) << "rep " << rep;
    EXPECT_LE(out.utilities[0], oracle + 0.02) << "rep " << rep;
  }
}

TEST(SpeTwo, SymmetricRegimePattern) {
  std::mt19937_64 rng(7);
  const Scenario sym = symmetric_scenario(random_network(rng, 6));
  const double kmax = sym.total_volume() / sym.min_base_cost();
  int stage = 0;
  bool saw_deterrence = false;
  for (int j = 0; j < 40; ++j) {
    const auto out = spe_two(at_k(sym, kmax * j / 40.0));
    int r = 0;
    switch (out.regime) {
      case Regime::SharedMarket:
        r = 0;
        EXPECT_NEAR(out.profile[0].e(), out.profile[1].e(), 1e-5);
        EXPECT_NEAR(out.alloc.totals()(0), sym.total_volume() / 2.0, 1e-9);
        break;
      case Regime::MonopolyDeterrence:
        r = 1;
        saw_deterrence = true;
        EXPECT_NEAR(out.alloc.totals()(0), sym.total_volume(), 1e-12);
        break;
      case Regime::MonopolyZeroCommit:
        r = 2;
        EXPECT_EQ(out.profile[0].e(), 0.0);
        break;
      default:
        ADD_FAILURE() << "unexpected regime " << to_string(out.regime) << " at j=" << j;
    }
    EXPECT_GE(r, stage) << "regimes out of order at j=" << j;
    stage = std::max(stage, r);
  }
  EXPECT_TRUE(saw_deterrence);
  EXPECT_EQ(stage, 2);
}

TEST(SpeTwo, AssumptionOneAtTheBoundary) {
  std::mt19937_64 rng(8);
  const Scenario sym = symmetric_scenario(random_network(rng, 5));
  const double kmax = sym.total_volume() / sym.min_base_cost();
  const auto near = spe_two(at_k(sym, kmax * (1.0 - 1e-6)));
  EXPECT_EQ(near.regime, Regime::MonopolyZeroCommit);
  EXPECT_GT(near.utilities[0], 0.0);
  const auto at = spe_two(at_k(sym, kmax));
  EXPECT_EQ(at.regime, Regime::AllOut);
  EXPECT_EQ(at.alloc.x.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(at.utilities, std::vector<double>(2, 0.0));

  for (int rep = 0; rep < 20; ++rep) {
    Scenario s = random_scenario(rng, 2 + rng() % 6, 2);
    s.k = uniform(rng, 0.0, 1.1) * s.total_volume() / s.min_base_cost();
    const auto out = spe_two(s);
    for (std::size_t p = 0; p < 2; ++p)
      if (out.profile[p].in()) EXPECT_GT(out.utilities[p], Tolerances{}.tie_tol);
    if (out.profile[0].in() && !out.profile[1].in())
      EXPECT_LE(best_response_follower(s, out.profile[0]).utility, Tolerances{}.tie_tol);
  }
}

TEST(SpeTwo, FollowerMonopolyWithStrongBias) {
  std::mt19937_64 rng(9);
  Scenario s = symmetric_scenario(random_network(rng, 5), 1.5);
  s.issuers[1].liquidity.bias.assign(5, 3.0);
  s.beta = beta_lower_bound_T(s.net, s.vols, s.liquidity_tables()) * 1.1;
  bool found = false;
  for (int j = 1; j < 40 && !found; ++j) found = spe_two(at_k(s, s.total_volume() * j / 40.0)).regime == Regime::FollowerMonopoly;
  EXPECT_TRUE(found);
}

TEST(SpeT, MatchesSpeTwoLatticeForTwoIssuers) {
  std::mt19937_64 rng(10);
  for (int rep = 0; rep < 50; ++rep) {
    Scenario s = random_scenario(rng, 2 + rng() % 7, 2);
    s.k = uniform(rng, 0.0, s.total_volume() / s.min_base_cost());
    SpeTwoOptions two;
    two.lattice = true;
    two.grid_n = 40;
    SpeTOptions t;
    t.grid_n = 40;
    t.threads = 2;
    const auto a = spe_two(s, two);
    const auto b = spe_T(s, t);
    for (std::size_t p = 0; p < 2; ++p) {
      ASSERT_EQ(a.profile[p].in(), b.profile[p].in()) << "rep " << rep;
      if (a.profile[p].in()) EXPECT_NEAR(a.profile[p].e(), b.profile[p].e(), 1e-12) << "rep " << rep;
    }
  }
}

TEST(SpeT, MatchesBruteForceBackwardInduction) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 12; ++rep) {
    Scenario s = random_scenario(rng, 2 + rng() % 5, 3);
    s.k = uniform(rng, 0.0, 0.7) * s.total_volume() / s.min_base_cost();
    SpeTOptions opts;
    opts.grid_n = 6;
    const auto out = spe_T(s, opts);
    const auto oracle = LatticeOracle(s, 6).solve();
    for (std::size_t p = 0; p < 3; ++p) {
      ASSERT_EQ(out.profile[p].in(), oracle[p].in()) << "rep " << rep << " issuer " << p;
      if (oracle[p].in()) EXPECT_NEAR(out.profile[p].e(), oracle[p].e(), 1e-12) << "rep " << rep;
    }
  }
}

TEST(SpeT, OneShotDeviationsDoNotPay) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 4; ++rep) {
    Scenario s = random_scenario(rng, 2 + rng() % 5, 3);
    s.k = uniform(rng, 0.0, 0.5) * s.total_volume() / s.min_base_cost();
    SpeTOptions opts;
    opts.grid_n = 8;
    const auto out = spe_T(s, opts);
    // The last mover's best reply is exact on the lattice.
    LatticeOracle oracle(s, 8);
    CommitmentProfile p = out.profile;
    for (int j = -1; j <= 8; ++j) {
      p[2] = j < 0 ? IssuerChoice::out() : IssuerChoice::commit(j == 8 ? 1.0 : j / 8.0);
      if (p.active().empty()) continue;
      EXPECT_LE(oracle.utility(p, 2), out.utilities[2] + Tolerances{}.tie_tol) << "rep " << rep << " j " << j;
    }
  }
}

TEST(SpeT, StarRegression) {
  const auto out = spe_T(load_scenario("star9.json"));
  const std::vector<double> expected{0.86, 0.70, 0.54, 0.42};
  for (std::size_t t = 0; t < 4; ++t) {
    ASSERT_TRUE(out.profile[t].in());
    EXPECT_NEAR(out.profile[t].e(), expected[t], 0.02);
  }
  EXPECT_FALSE(out.profile[4].in());
  EXPECT_EQ(out.regime, Regime::Mixed);
  EXPECT_GT(out.diagnostics.evaluations, 0u);
}

TEST(SpeT, FewerCurrenciesWhenCommitmentIsCostly) {
  std::mt19937_64 rng(13);
  Scenario s = symmetric_scenario(random_network(rng, 5));
  s.issuers.push_back(s.issuers[0]);
  s.issuers[2].label = "c";
  s.beta = beta_lower_bound_T(s.net, s.vols, s.liquidity_tables()) * 1.1;
  s.k = s.total_volume() / s.min_base_cost() * 0.99;
  SpeTOptions opts;
  opts.grid_n = 20;
  const auto out = spe_T(s, opts);
  EXPECT_EQ(out.profile.active().size(), 1u);
}

TEST(SpeT, BudgetAndArgumentErrors) {
  const Scenario s = load_scenario("star9.json");
  SpeTOptions opts;
  opts.grid_n = 200;
  try {
    spe_T(s, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExceeded);
  }
  Scenario one = s;
  one.issuers.resize(1);
  EXPECT_THROW(spe_T(one), Error);
  Scenario low = s;
  low.beta = 1.5;
  try {
    spe_T(low);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BetaTooSmall);
  }
}

TEST(SpeT, DeterministicAcrossThreadCounts) {
  std::mt19937_64 rng(14);
  const Scenario s = random_scenario(rng, 6, 3);
  SpeTOptions a, b;
  a.grid_n = b.grid_n = 15;
  a.threads = 1;
  b.threads = 4;
  EXPECT_EQ(spe_T(s, a).profile, spe_T(s, b).profile);
}

TEST(CommitmentEffectiveness, MatchesFiniteDifferences) {
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t T = 2 + rng() % 3;
    const Scenario s = random_scenario(rng, 1 + rng() % 9, T);
    CommitmentProfile p = random_profile(rng, T, 0.2);
    if (p.active().size() < 2) continue;
    const std::size_t t = p.active()[rng() % p.active().size()];
    p[t] = IssuerChoice::commit(uniform(rng, 0.05, 0.95));
    const double h = 1e-4;
    CommitmentProfile up = p, down = p;
    up[t] = IssuerChoice::commit(p[t].e() + h);
    down[t] = IssuerChoice::commit(p[t].e() - h);
    const auto ti = static_cast<Eigen::Index>(t);
    const double fd = (allocate_T(s, up).totals()(ti) - allocate_T(s, down).totals()(ti)) / (2.0 * h);
    const double d = commitment_effectiveness(s, p, t);
    EXPECT_NEAR(d, fd, 1e-5 * std::abs(fd)) << "rep " << rep;
  }
}

TEST(CommitmentEffectiveness, Examples) {
  Scenario one;
  one.net = TradeNetwork::empty({"solo"});
  one.vols = UserVolumes::uniform(1);
  one.beta = 3.0;
  one.issuers = {{"a", {1.0, 0.5, 0.0, {}}, {1.0, 1.0}}, {"b", {1.0, 0.5, 0.0, {}}, {1.0, 1.0}}};
  const auto p = CommitmentProfile::all_in({0.25, 0.6});
  EXPECT_NEAR(commitment_effectiveness(one, p, 0), 0.5 / std::sqrt(0.25) / (2.0 * 3.0), 1e-14);
  try {
    commitment_effectiveness(one, CommitmentProfile::all_in({0.0, 0.6}), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DerivativeAtZero);
  }
  one.issuers[0].liquidity.alpha = 1.0;
  EXPECT_NEAR(commitment_effectiveness(one, CommitmentProfile::all_in({0.0, 0.6}), 0), 1.0 / 6.0, 1e-14);
}

TEST(CommitmentEffectiveness, IntegrationInequalities) {
  std::mt19937_64 rng(16);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 2 + rng() % 7;
    Scenario s = symmetric_scenario(random_network(rng, n), 1.3);
    std::vector<double> bias(n);
    for (auto& b : bias) b = uniform(rng, 1.05, 1.5);
    s.issuers[0].liquidity.bias = bias;
    const std::size_t i = rng() % n, j = (i + 1 + rng() % (n - 1)) % n;
    Scenario integ = s;
    integ.net = s.net.with_weight(i, j, s.net.weight(i, j) + uniform(rng, 0.01, 0.1));
    const double bound = std::max(beta_lower_bound_T(s.net, s.vols, s.liquidity_tables()),
                                  beta_lower_bound_T(integ.net, integ.vols, integ.liquidity_tables()));
    s.beta = integ.beta = bound * 1.05;
    const auto p = CommitmentProfile::all_in({0.4, 0.4});
    const double da = commitment_effectiveness(integ, p, 0) - commitment_effectiveness(s, p, 0);
    const double db = commitment_effectiveness(integ, p, 1) - commitment_effectiveness(s, p, 1);
    EXPECT_GT(da, 0.0);
    EXPECT_GT(db, 0.0);
    EXPECT_GT(da, db);
  }
}

TEST(ClassifyProfile, Labels) {
  using C = IssuerChoice;
  EXPECT_EQ(classify_profile(CommitmentProfile({C::commit(0.5), C::out()}), 1e-6), Regime::MonopolyDeterrence);
  EXPECT_EQ(classify_profile(CommitmentProfile({C::commit(0.0), C::out()}), 1e-6), Regime::MonopolyZeroCommit);
  EXPECT_EQ(classify_profile(CommitmentProfile({C::out(), C::commit(0.3)}), 1e-6), Regime::FollowerMonopoly);
  EXPECT_EQ(classify_profile(CommitmentProfile({C::commit(0.2), C::commit(0.3)}), 1e-6), Regime::SharedMarket);
  EXPECT_EQ(classify_profile(CommitmentProfile({C::out(), C::out()}), 1e-6), Regime::AllOut);
  EXPECT_EQ(classify_profile(CommitmentProfile({C::commit(0.2), C::commit(0.3), C::out()}), 1e-6), Regime::Mixed);
}
