#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

#include "riskrl/errors.hpp"
#include "riskrl/evaluation.hpp"
#include "riskrl/io.hpp"
#include "riskrl/mdp.hpp"
#include "riskrl/rng.hpp"

#include <sstream>

using namespace riskrl;
using namespace riskrl::testing;

TEST_CASE("validate accepts a self-loop and reports violations") {
    FiniteMDP ok = single_state_mdp({RewardEntry{1.0, 0.5}}, 0.9);
    CHECK_NOTHROW(validate(ok));

    FiniteMDP bad_row = ok;
    bad_row.p(0, 0, 0) = 0.9;
    CHECK_THROWS_WITH_AS(validate(bad_row), doctest::Contains("(x=0, a=0)"), ConfigError);

    FiniteMDP negative = ok;
    negative.p(0, 0, 0) = -0.5;
    CHECK_THROWS_AS(validate(negative), ConfigError);

    FiniteMDP bad_reward = ok;
    bad_reward.rewards[0][0] = {RewardEntry{0.7, 1.0}};
    CHECK_THROWS_AS(validate(bad_reward), ConfigError);
}

TEST_CASE("policy validation rejects inadmissible mass") {
    FiniteMDP mdp = two_armed_bandit(0.5, 0.9);
    mdp.admissible[0] = {0};
    Policy pi(1, 2);
    pi.at(0, 0) = 0.5;
    pi.at(0, 1) = 0.5;
    CHECK_THROWS_AS(validate_policy(mdp, pi), ConfigError);
    pi.at(0, 0) = 1.0;
    pi.at(0, 1) = 0.0;
    CHECK_NOTHROW(validate_policy(mdp, pi));
}

TEST_CASE("simulate follows a deterministic chain") {
    FiniteMDP chain = chain_mdp(3, 0.25, 0.9);
    Policy pi(3, 1);
    for (int x = 0; x < 3; ++x) pi.at(x, 0) = 1.0;

    auto traj = simulate(chain, pi, 0, 100, 7);
    REQUIRE(traj.size() == 2);
    CHECK(traj[0].x == 0);
    CHECK(traj[0].next == 1);
    CHECK(traj[1].x == 1);
    CHECK(traj[1].next == 2);
    CHECK(traj[1].r == doctest::Approx(0.25));

    // absorbing start yields an empty trajectory
    CHECK(simulate(chain, pi, 2, 100, 7).empty());

    // determinism under a fixed seed
    auto a = simulate(chain, pi, 0, 100, 99);
    auto b = simulate(chain, pi, 0, 100, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].a == b[i].a);
        CHECK(a[i].w == b[i].w);
        CHECK(a[i].next == b[i].next);
    }
}

TEST_CASE("simulate respects the kernel within the DKW bound") {
    // 1 live state fanning out to 4 next states with fixed probabilities
    FiniteMDP mdp;
    mdp.allocate(5, 1);
    mdp.gamma = 0.9;
    const double probs[4] = {0.5, 0.25, 0.15, 0.1};
    mdp.admissible[0] = {0};
    mdp.rewards[0][0] = {RewardEntry{1.0, 1.0}};
    for (int j = 0; j < 4; ++j) mdp.p(0, 0, 1 + j) = probs[j];
    for (int x = 1; x < 5; ++x) {
        mdp.admissible[x] = {0};
        mdp.absorbing[x] = 1;
        mdp.p(x, 0, x) = 1.0;
        mdp.rewards[x][0] = {RewardEntry{1.0, 0.0}};
    }
    validate(mdp);

    Policy pi(5, 1);
    for (int x = 0; x < 5; ++x) pi.at(x, 0) = 1.0;

    const int n = 100000;
    std::vector<double> freq(4, 0.0);
    Rng rng(123);
    for (int i = 0; i < n; ++i) {
        auto traj = simulate(mdp, pi, 0, 1, rng.next_u64());
        REQUIRE(traj.size() == 1);
        freq[traj[0].next - 1] += 1.0 / n;
    }
    double l1 = 0.0;
    for (int j = 0; j < 4; ++j) l1 += std::abs(freq[j] - probs[j]);
    CHECK(l1 <= dkw_bound_tight(n, 4, 0.01));
}

TEST_CASE("sample_demonstrations produces consistent counts") {
    FiniteMDP chain = chain_mdp(3, 0.25, 0.9);
    Policy pi(3, 1);
    for (int x = 0; x < 3; ++x) pi.at(x, 0) = 1.0;
    std::vector<double> start(3, 0.0);
    start[0] = 1.0;

    auto empty = sample_demonstrations(chain, pi, 0, start, 100, 5);
    CHECK(empty.total == 0);
    CHECK(empty.episodes.empty());

    auto demos = sample_demonstrations(chain, pi, 10, start, 100, 5);
    CHECK(demos.total == 20);  // deterministic 2-step episodes
    CHECK(demos.count(0, 0) == doctest::Approx(10));
    CHECK(demos.count(1, 0) == doctest::Approx(10));
    CHECK(demos.weight(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("empirical policy covers only visited states") {
    DemonstrationSet demos;
    demos.episodes = {{{0, 1}, {0, 0}, {0, 0}}, {{0, 0}}};
    demos.rebuild_counts(3, 2);

    auto emp = empirical_policy(demos);
    CHECK(emp.visited[0] == 1);
    CHECK(emp.visited[1] == 0);
    CHECK(emp.visited[2] == 0);
    CHECK(emp.policy.at(0, 0) == doctest::Approx(0.75));
    CHECK(emp.policy.at(0, 1) == doctest::Approx(0.25));

    DemonstrationSet single;
    single.episodes = {{{1, 1}}};
    single.rebuild_counts(3, 2);
    CHECK(empirical_policy(single).policy.at(1, 1) == doctest::Approx(1.0));

    DemonstrationSet none;
    none.rebuild_counts(3, 2);
    CHECK_THROWS_AS(empirical_policy(none), ConfigError);
}

TEST_CASE("demonstrations round-trip through jsonl bit-exactly") {
    FiniteMDP chain = chain_mdp(4, -0.1, 0.9);
    Policy pi(4, 1);
    for (int x = 0; x < 4; ++x) pi.at(x, 0) = 1.0;
    auto demos = sample_demonstrations(chain, pi, 7, uniform_start_dist(chain), 50, 31);

    std::ostringstream out;
    demos_to_jsonl(demos, out);
    std::istringstream in(out.str());
    auto loaded = demos_from_jsonl(in, 4, 1);

    CHECK(loaded.episodes == demos.episodes);
    CHECK(loaded.total == demos.total);
    CHECK(loaded.counts == demos.counts);

    std::ostringstream out2;
    demos_to_jsonl(loaded, out2);
    CHECK(out.str() == out2.str());
}

TEST_CASE("mdp json round trip preserves the model") {
    GridSpec grid = default_grid();
    FiniteMDP mdp = build_gridworld(grid);
    FiniteMDP back = mdp_from_json(mdp_to_json(mdp));
    CHECK(back.n_states == mdp.n_states);
    CHECK(back.n_actions == mdp.n_actions);
    CHECK(back.transition == mdp.transition);
    CHECK(back.gamma == mdp.gamma);
    CHECK(back.admissible == mdp.admissible);
    CHECK(mdp_to_json(back) == mdp_to_json(mdp));
}
