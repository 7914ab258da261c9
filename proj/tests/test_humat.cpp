#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lmsim/errors.hpp"
#include "lmsim/humat.hpp"

#include "support/diffusion_oracle.hpp"
#include "support/scenario_builder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

using namespace lmsim;

namespace {

HumatAgent make_agent(int person, std::vector<double> importances, std::vector<double> evals,
                      std::size_t alt_count, double persuasion = 1.0) {
    HumatAgent agent;
    agent.person = person;
    agent.importances = std::move(importances);
    agent.evaluations = std::move(evals);
    agent.persuasion = persuasion;
    refresh_caches(agent, alt_count);
    choose(agent);
    return agent;
}

SocialNetwork empty_network(std::size_t n) {
    SocialNetwork net;
    for (auto& layer : net.layers) {
        layer.adjacency.assign(n, {});
    }
    return net;
}

void add_edge(SocialNetwork& net, LayerKind kind, int a, int b) {
    EdgeLayer& layer = net.layer(kind);
    layer.edges.push_back({std::min(a, b), std::max(a, b), 1.0});
    layer.adjacency[static_cast<std::size_t>(a)].push_back(b);
    layer.adjacency[static_cast<std::size_t>(b)].push_back(a);
    std::sort(layer.adjacency[static_cast<std::size_t>(a)].begin(),
              layer.adjacency[static_cast<std::size_t>(a)].end());
    std::sort(layer.adjacency[static_cast<std::size_t>(b)].begin(),
              layer.adjacency[static_cast<std::size_t>(b)].end());
}

using test::TinyAgent;
using test::tiny_round;

const std::vector<std::string> kTwoAlts = {"home_courier", "crowdshipping"};

} // namespace

TEST_CASE("satisfaction: identity, symmetry and the hand oracle") {
    HumatAgent single = make_agent(0, {1.0}, {0.7}, 1);
    CHECK(satisfaction(single, 0, 1) == 0.7);

    HumatAgent balanced = make_agent(0, {1.0, 1.0}, {1.0, -1.0}, 1);
    CHECK(satisfaction(balanced, 0, 1) == 0.0);

    HumatAgent weighted = make_agent(0, {2.0, 1.0}, {0.5, -0.4}, 1);
    double oracle = (2.0 * 0.5 + 1.0 * -0.4) / (2.0 + 1.0);
    CHECK(satisfaction(weighted, 0, 1) == oracle); // bitwise vs the defining formula
    CHECK(satisfaction(weighted, 0, 1) == doctest::Approx(0.2).epsilon(1e-12));

    HumatAgent zero_weights = make_agent(0, {0.0, 0.0}, {1.0, 1.0}, 1);
    CHECK(satisfaction(zero_weights, 0, 1) == 0.0);
}

TEST_CASE("dissonance: zero, maximum and the 2*min/(P+N) oracle") {
    HumatAgent all_positive = make_agent(0, {1.0, 1.0}, {0.6, 0.8}, 1);
    CHECK(dissonance(all_positive, 0, 1) == 0.0);

    HumatAgent balanced = make_agent(0, {1.0, 1.0}, {0.5, -0.5}, 1); // P = N
    CHECK(dissonance(balanced, 0, 1) == 1.0);

    // P = 3, N = 1 -> 2 * 1 / 4 = 0.5
    HumatAgent skewed = make_agent(0, {1.0, 1.0}, {0.75, -0.25}, 1);
    double p = 0.75;
    double n = 0.25;
    CHECK(dissonance(skewed, 0, 1) == 2.0 * std::min(p, n) / (p + n));
    CHECK(dissonance(skewed, 0, 1) == 0.5);

    HumatAgent empty = make_agent(0, {1.0}, {0.0}, 1);
    CHECK(dissonance(empty, 0, 1) == 0.0);
}

TEST_CASE("catalog-checked accessors reject unknown alternatives") {
    HumatAgent agent = make_agent(0, {1.0}, {0.5, -0.5}, 2);
    CHECK(satisfaction(agent, kTwoAlts, "home_courier") == 0.5);
    CHECK_THROWS_AS(satisfaction(agent, kTwoAlts, "teleport"), UnknownAlternative);
    CHECK_THROWS_AS(dissonance(agent, kTwoAlts, "teleport"), UnknownAlternative);
}

TEST_CASE("choose: argmax, dissonance tie-break, catalog-order tie-break") {
    HumatAgent a = make_agent(0, {1.0}, {0.4, 0.1}, 2);
    CHECK(choose(a) == 0);

    // equal satisfaction, lower dissonance wins: S = 0.25 both, D differs
    HumatAgent b = make_agent(0, {1.0, 1.0}, {0.25, 0.75, 0.25, -0.25}, 2);
    CHECK(b.satisfaction_cache[0] == b.satisfaction_cache[1]);
    CHECK(b.dissonance_cache[0] < b.dissonance_cache[1]);
    CHECK(choose(b) == 0);
    HumatAgent c = make_agent(0, {1.0, 1.0}, {0.75, 0.25, -0.25, 0.25}, 2);
    CHECK(c.satisfaction_cache[0] == c.satisfaction_cache[1]);
    CHECK(c.dissonance_cache[1] < c.dissonance_cache[0]);
    CHECK(choose(c) == 1);

    // everything equal: first in catalog order
    HumatAgent d = make_agent(0, {1.0}, {0.3, 0.3}, 2);
    CHECK(choose(d) == 0);
}

TEST_CASE("inquire: no alters is a reported no-op") {
    SocialNetwork net = empty_network(1);
    std::vector<HumatAgent> agents = {make_agent(0, {1.0}, {0.2, -0.2}, 2)};
    DiffusionSettings settings;
    std::vector<double> before = agents[0].evaluations;
    CHECK_FALSE(inquire(agents[0], net, agents, 0, settings));
    CHECK(agents[0].evaluations == before);
}

TEST_CASE("inquire: full learning from a fully persuasive alter adopts exactly") {
    SocialNetwork net = empty_network(2);
    add_edge(net, LayerKind::friendship, 0, 1);
    std::vector<HumatAgent> agents = {make_agent(0, {1.0, 1.0}, {0.2, -0.4, 0.1, 0.3}, 2, 1.0),
                                      make_agent(1, {1.0, 1.0}, {-0.6, 0.9, 0.5, -0.2}, 2, 1.0)};
    DiffusionSettings settings;
    settings.learning_rate = 1.0;
    CHECK(inquire(agents[0], net, agents, 0, settings));
    CHECK(agents[0].eval(0, 0, 2) == agents[1].eval(0, 0, 2));
    CHECK(agents[0].eval(1, 0, 2) == agents[1].eval(1, 0, 2));
    // the other alternative's column is untouched
    CHECK(agents[0].eval(0, 1, 2) == -0.4);
}

TEST_CASE("inquire: convex update with partial persuasion") {
    SocialNetwork net = empty_network(2);
    add_edge(net, LayerKind::friendship, 0, 1);
    std::vector<HumatAgent> agents = {make_agent(0, {1.0}, {0.0, 0.0}, 2, 1.0),
                                      make_agent(1, {1.0}, {1.0, 0.0}, 2, 0.8)};
    DiffusionSettings settings;
    settings.learning_rate = 0.5;
    CHECK(inquire(agents[0], net, agents, 0, settings));
    CHECK(agents[0].eval(0, 0, 2) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("inquire: picks the most persuasive alter across layers") {
    SocialNetwork net = empty_network(3);
    add_edge(net, LayerKind::friendship, 0, 1);
    add_edge(net, LayerKind::job, 0, 2);
    std::vector<HumatAgent> agents = {make_agent(0, {1.0}, {0.0, 0.0}, 2, 1.0),
                                      make_agent(1, {1.0}, {0.5, 0.0}, 2, 0.3),
                                      make_agent(2, {1.0}, {-0.5, 0.0}, 2, 0.9)};
    DiffusionSettings settings;
    settings.learning_rate = 1.0;
    CHECK(inquire(agents[0], net, agents, 0, settings));
    CHECK(agents[0].eval(0, 0, 2) == doctest::Approx(0.9 * -0.5).epsilon(1e-12));
}

TEST_CASE("signal: isolated agent updates nobody") {
    SocialNetwork net = empty_network(1);
    std::vector<HumatAgent> agents = {make_agent(0, {1.0}, {0.5, 0.0}, 2)};
    DiffusionSettings settings;
    CHECK(signal(agents[0], net, agents, settings) == 0);
}

TEST_CASE("signal: full learning pushes the signaler's row onto the alter") {
    SocialNetwork net = empty_network(2);
    add_edge(net, LayerKind::friendship, 0, 1);
    std::vector<HumatAgent> agents = {make_agent(0, {1.0, 1.0}, {0.9, 0.0, -0.3, 0.0}, 2, 1.0),
                                      make_agent(1, {1.0, 1.0}, {0.0, 0.2, 0.0, 0.2}, 2, 1.0)};
    DiffusionSettings settings;
    settings.learning_rate = 1.0;
    CHECK(agents[0].choice == 0);
    CHECK(signal(agents[0], net, agents, settings) == 1);
    CHECK(agents[1].eval(0, 0, 2) == agents[0].eval(0, 0, 2));
    CHECK(agents[1].eval(1, 0, 2) == agents[0].eval(1, 0, 2));
    CHECK(agents[1].eval(0, 1, 2) == 0.2); // other column untouched
}

TEST_CASE("signal: star center updates exactly its degree") {
    SocialNetwork net = empty_network(5);
    for (int leaf = 1; leaf < 5; ++leaf) {
        add_edge(net, LayerKind::friendship, 0, leaf);
    }
    std::vector<HumatAgent> agents;
    for (int i = 0; i < 5; ++i) {
        agents.push_back(make_agent(i, {1.0}, {0.4, 0.0}, 2));
    }
    DiffusionSettings settings;
    CHECK(signal(agents[0], net, agents, settings) == 4);
}

TEST_CASE("diffusion_round: edgeless network and identical societies do not change") {
    DiffusionSettings settings;
    RandomStream rng(1, "d");

    SocialNetwork net = empty_network(4);
    std::vector<HumatAgent> agents;
    for (int i = 0; i < 4; ++i) {
        agents.push_back(make_agent(i, {1.0, 1.0}, {0.5, -0.5, -0.5, 0.5}, 2));
    }
    CHECK(diffusion_round(agents, net, settings, 2, rng) == 0);

    SocialNetwork ring = empty_network(4);
    for (int i = 0; i < 4; ++i) {
        add_edge(ring, LayerKind::friendship, i, (i + 1) % 4);
    }
    std::vector<HumatAgent> same;
    for (int i = 0; i < 4; ++i) {
        same.push_back(make_agent(i, {1.0, 1.0}, {0.8, -0.8, 0.1, 0.0}, 2));
    }
    CHECK(diffusion_round(same, ring, settings, 2, rng) == 0);
}

TEST_CASE("diffusion_round: two-agent dumbbell matches the enumeration oracle") {
    DiffusionSettings settings;
    settings.learning_rate = 1.0;
    settings.dissonance_threshold = 0.5;
    RandomStream rng(2, "d");

    // Opposing strong evaluations; both fully persuasive. Agent 0 prefers
    // alt 0, agent 1 prefers alt 1; both dissonant on their choice.
    std::vector<double> e0 = {0.9, -0.9, -0.8, 0.8}; // motive-major, 2 motives x 2 alts
    std::vector<double> e1 = {-0.9, 0.9, 0.8, -0.8};

    SocialNetwork net = empty_network(2);
    add_edge(net, LayerKind::friendship, 0, 1);
    std::vector<HumatAgent> agents = {make_agent(0, {1.0, 1.0}, e0, 2, 1.0),
                                      make_agent(1, {1.0, 1.0}, e1, 2, 1.0)};

    std::vector<TinyAgent> tiny(2);
    tiny[0] = {{1.0, 1.0}, e0, agents[0].choice, 1.0};
    tiny[1] = {{1.0, 1.0}, e1, agents[1].choice, 1.0};
    std::vector<std::vector<int>> adj = {{1}, {0}};

    for (int round = 0; round < 4; ++round) {
        int changed = diffusion_round(agents, net, settings, 2, rng);
        int oracle_changed = tiny_round(tiny, adj, 1.0, 0.5, 2);
        CHECK(changed == oracle_changed);
        for (int i = 0; i < 2; ++i) {
            CHECK(agents[static_cast<std::size_t>(i)].choice == tiny[static_cast<std::size_t>(i)].choice);
            for (std::size_t k = 0; k < 4; ++k) {
                CHECK(agents[static_cast<std::size_t>(i)].evaluations[k] ==
                      doctest::Approx(tiny[static_cast<std::size_t>(i)].e[k]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("diffusion_round: random small instances match the oracle") {
    DiffusionSettings settings;
    settings.learning_rate = 0.4;
    settings.dissonance_threshold = 0.3;
    RandomStream maker(5, "mk");
    RandomStream rng(6, "d");

    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 2 + maker.uniform_below(4); // up to 5 agents
        SocialNetwork net = empty_network(n);
        std::vector<std::vector<int>> adj(n);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                if (maker.bernoulli(0.5)) {
                    add_edge(net, LayerKind::friendship, static_cast<int>(a),
                             static_cast<int>(b));
                    adj[a].push_back(static_cast<int>(b));
                    adj[b].push_back(static_cast<int>(a));
                }
            }
        }
        std::vector<HumatAgent> agents;
        std::vector<TinyAgent> tiny(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> w = {maker.uniform(0.1, 1.0), maker.uniform(0.1, 1.0)};
            std::vector<double> e = {maker.uniform(-1.0, 1.0), maker.uniform(-1.0, 1.0),
                                     maker.uniform(-1.0, 1.0), maker.uniform(-1.0, 1.0)};
            double pers = maker.uniform01();
            agents.push_back(make_agent(static_cast<int>(i), w, e, 2, pers));
            tiny[i] = {w, e, agents[i].choice, pers};
        }
        for (int round = 0; round < 3; ++round) {
            int changed = diffusion_round(agents, net, settings, 2, rng);
            int oracle_changed = tiny_round(tiny, adj, 0.4, 0.3, 2);
            REQUIRE(changed == oracle_changed);
            for (std::size_t i = 0; i < n; ++i) {
                REQUIRE(agents[i].choice == tiny[i].choice);
            }
        }
    }
}

TEST_CASE("diffusion_round is independent of the processing order") {
    ScenarioConfig sc = test::mini_config({"home_courier", "crowdshipping"});
    RandomStream pop_rng(11, "pop");
    Population pop = synthesize_population(
        [&] {
            ScenarioConfig c = sc;
            c.population.size = 30;
            return c;
        }(),
        pop_rng);
    RandomStream net_rng(12, "net");
    SocialNetwork net = build_network(pop.persons, sc, net_rng);
    RandomStream agent_rng(13, "ag");
    std::vector<HumatAgent> base = init_agents(pop.persons, sc.schema, sc.motives, sc.priors,
                                               sc.channel_catalog, agent_rng);
    DiffusionSettings settings;
    settings.dissonance_threshold = 0.2;

    RandomStream round_rng(14, "round");
    std::vector<HumatAgent> reference = base;
    diffusion_round(reference, net, settings, 2, round_rng);

    RandomStream perm_rng(15, "perm");
    std::vector<int> order(base.size());
    std::iota(order.begin(), order.end(), 0);
    for (int trial = 0; trial < 100; ++trial) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[perm_rng.uniform_below(i)]);
        }
        std::vector<HumatAgent> permuted = base;
        diffusion_round(permuted, net, settings, 2, round_rng, order);
        for (std::size_t i = 0; i < base.size(); ++i) {
            REQUIRE(permuted[i].choice == reference[i].choice);
            REQUIRE(permuted[i].evaluations == reference[i].evaluations);
        }
    }
}

TEST_CASE("run_diffusion: already-converged and edgeless societies stop after one round") {
    DiffusionSettings settings;
    RandomStream rng(3, "d");
    SocialNetwork net = empty_network(3);
    std::vector<HumatAgent> agents;
    for (int i = 0; i < 3; ++i) {
        agents.push_back(make_agent(i, {1.0}, {0.5, 0.1}, 2));
    }
    DiffusionOutcome out = run_diffusion(agents, net, settings, 2, 10, rng);
    CHECK(out.rounds_run == 1);
    CHECK(out.converged);
}

TEST_CASE("run_diffusion: 200-agent regression fixture converges within the round cap") {
    ScenarioConfig sc = test::mini_config({"home_courier", "crowdshipping"});
    sc.population.size = 200;
    sc.humat.dissonance_threshold = 0.7;
    // Mixed-sign priors: genuine dissonance with a clear aggregate winner.
    sc.priors.cells[0 * 2 + 0] = {0.5, 0.2};
    sc.priors.cells[0 * 2 + 1] = {-0.2, 0.2};
    sc.priors.cells[1 * 2 + 0] = {0.3, 0.2};
    sc.priors.cells[1 * 2 + 1] = {0.1, 0.2};
    sc.priors.cells[2 * 2 + 0] = {-0.1, 0.2};
    sc.priors.cells[2 * 2 + 1] = {0.4, 0.2};
    RandomStream pop_rng(20, "pop");
    Population pop = synthesize_population(sc, pop_rng);
    RandomStream net_rng(21, "net");
    SocialNetwork net = build_network(pop.persons, sc, net_rng);
    RandomStream agent_rng(22, "ag");
    std::vector<HumatAgent> agents = init_agents(pop.persons, sc.schema, sc.motives, sc.priors,
                                                 sc.channel_catalog, agent_rng);
    DiffusionSettings settings = diffusion_settings(sc);
    RandomStream rng(23, "run");
    DiffusionOutcome out = run_diffusion(agents, net, settings, 2, 50, rng);
    CHECK(out.converged);
    CHECK(out.rounds_run <= 50);
    CHECK(out.rounds_run == 6); // frozen empirical regression value

    // Non-convergence in churny regimes is reported, not hidden.
    ScenarioConfig churn = test::mini_config({"home_courier", "crowdshipping"});
    churn.population.size = 200;
    RandomStream pop_rng2(21, "pop");
    Population pop2 = synthesize_population(churn, pop_rng2);
    RandomStream net_rng2(22, "net");
    SocialNetwork net2 = build_network(pop2.persons, churn, net_rng2);
    RandomStream agent_rng2(23, "ag");
    std::vector<HumatAgent> agents2 = init_agents(pop2.persons, churn.schema, churn.motives,
                                                  churn.priors, churn.channel_catalog,
                                                  agent_rng2);
    RandomStream rng2(24, "run");
    DiffusionOutcome churny = run_diffusion(agents2, net2, diffusion_settings(churn), 2, 10, rng2);
    CHECK(churny.rounds_run == 10);
    CHECK_FALSE(churny.converged);
}

TEST_CASE("monotone adoption: a dominant agent converts a connected society") {
    // lambda = 1, persuasion = 1, path networks of n <= 5; agent 0 holds
    // strictly dominant positive evaluations for alternative 1 and all
    // others start dissonant and dissatisfied on alternative 0.
    for (std::size_t n = 2; n <= 5; ++n) {
        SocialNetwork net = empty_network(n);
        std::vector<std::vector<int>> adj(n);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            add_edge(net, LayerKind::friendship, static_cast<int>(i), static_cast<int>(i + 1));
            adj[i].push_back(static_cast<int>(i + 1));
            adj[i + 1].push_back(static_cast<int>(i));
        }
        std::vector<HumatAgent> agents;
        std::vector<TinyAgent> tiny(n);
        std::vector<double> dominant = {-1.0, 1.0, -1.0, 1.0};
        std::vector<double> follower = {1.0, 0.3, -1.0, 0.3};
        agents.push_back(make_agent(0, {1.0, 1.0}, dominant, 2, 1.0));
        tiny[0] = {{1.0, 1.0}, dominant, agents[0].choice, 1.0};
        for (std::size_t i = 1; i < n; ++i) {
            HumatAgent follower_agent = make_agent(static_cast<int>(i), {1.0, 1.0}, follower, 2, 1.0);
            follower_agent.choice = 0; // dissonant and dissatisfied on alt 0
            agents.push_back(follower_agent);
            tiny[i] = {{1.0, 1.0}, follower, 0, 1.0};
        }
        DiffusionSettings settings;
        settings.learning_rate = 1.0;
        settings.dissonance_threshold = 0.5;
        RandomStream rng(30 + static_cast<std::uint64_t>(n), "adopt");
        for (int round = 0; round < 6; ++round) {
            diffusion_round(agents, net, settings, 2, rng);
            tiny_round(tiny, adj, 1.0, 0.5, 2);
            for (std::size_t i = 0; i < n; ++i) {
                REQUIRE(agents[i].choice == tiny[i].choice);
            }
        }
        for (const HumatAgent& agent : agents) {
            CHECK(agent.choice == 1);
        }
    }
}

TEST_CASE("satisfaction and dissonance stay in bounds under fuzzing") {
    RandomStream rng(41, "fuzz");
    for (int i = 0; i < 10000; ++i) {
        std::size_t motives = 1 + rng.uniform_below(4);
        std::size_t alts = 1 + rng.uniform_below(3);
        std::vector<double> w(motives);
        std::vector<double> e(motives * alts);
        for (double& v : w) {
            v = rng.uniform01();
        }
        for (double& v : e) {
            v = rng.uniform(-1.0, 1.0);
        }
        HumatAgent agent = make_agent(0, w, e, alts);
        for (std::size_t a = 0; a < alts; ++a) {
            REQUIRE(std::abs(agent.satisfaction_cache[a]) <= 1.0 + 1e-12);
            REQUIRE(agent.dissonance_cache[a] >= 0.0);
            REQUIRE(agent.dissonance_cache[a] <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("scaling all importances leaves satisfaction, dissonance and choice unchanged") {
    RandomStream rng(42, "scale");
    for (int i = 0; i < 200; ++i) {
        std::vector<double> w = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
        std::vector<double> e(6);
        for (double& v : e) {
            v = rng.uniform(-1.0, 1.0);
        }
        HumatAgent base = make_agent(0, w, e, 2);
        for (double scale : {0.5, 2.0, 8.0, 0.25}) { // exact binary scalings
            std::vector<double> scaled = w;
            for (double& v : scaled) {
                v *= scale;
            }
            HumatAgent other = make_agent(0, scaled, e, 2);
            CHECK(other.satisfaction_cache == base.satisfaction_cache);
            CHECK(other.dissonance_cache == base.dissonance_cache);
            CHECK(other.choice == base.choice);
        }
    }
    // integer scaling of integer weights is exact too
    HumatAgent a = make_agent(0, {2.0, 1.0, 4.0}, {0.5, -0.25, 1.0, 0.0, -0.75, 0.5}, 2);
    HumatAgent b = make_agent(0, {6.0, 3.0, 12.0}, {0.5, -0.25, 1.0, 0.0, -0.75, 0.5}, 2);
    CHECK(a.satisfaction_cache == b.satisfaction_cache);
    CHECK(a.dissonance_cache == b.dissonance_cache);
}

TEST_CASE("init_agents: degenerate priors produce identical agents") {
    ScenarioConfig sc = test::mini_config({"home_courier", "crowdshipping"});
    for (Motive& m : sc.motives.motives) {
        for (ImportanceRule& r : m.rules) {
            r.sd = 0.0;
        }
    }
    for (EvalPrior& p : sc.priors.cells) {
        p.sd = 0.0;
    }
    RandomStream pop_rng(51, "pop");
    sc.population.size = 20;
    Population pop = synthesize_population(sc, pop_rng);
    RandomStream rng(52, "ag");
    std::vector<HumatAgent> agents = init_agents(pop.persons, sc.schema, sc.motives, sc.priors,
                                                 sc.channel_catalog, rng);
    for (const HumatAgent& agent : agents) {
        CHECK(agent.importances == agents[0].importances);
        CHECK(agent.evaluations == agents[0].evaluations);
        CHECK(agent.choice == agents[0].choice);
    }
}

TEST_CASE("init_agents: a single alternative is always chosen") {
    ScenarioConfig sc = test::mini_config({"home_courier"});
    sc.population.size = 30;
    RandomStream pop_rng(53, "pop");
    Population pop = synthesize_population(sc, pop_rng);
    RandomStream rng(54, "ag");
    std::vector<HumatAgent> agents = init_agents(pop.persons, sc.schema, sc.motives, sc.priors,
                                                 sc.channel_catalog, rng);
    for (const HumatAgent& agent : agents) {
        CHECK(agent.choice == 0);
    }
}

TEST_CASE("init_agents: sample mean importance matches the prior mean") {
    ScenarioConfig sc = test::mini_config({"home_courier", "crowdshipping"});
    sc.motives.motives[0].rules = {{"all", "all", 0.5, 0.12}};
    sc.population.size = 1000;
    RandomStream pop_rng(55, "pop");
    Population pop = synthesize_population(sc, pop_rng);
    RandomStream rng(56, "ag");
    std::vector<HumatAgent> agents = init_agents(pop.persons, sc.schema, sc.motives, sc.priors,
                                                 sc.channel_catalog, rng);
    double mean = 0.0;
    for (const HumatAgent& agent : agents) {
        mean += agent.importances[0];
    }
    mean /= static_cast<double>(agents.size());
    CHECK(mean == doctest::Approx(0.5).epsilon(0.03 / 0.5));
}

TEST_CASE("init_agents: a missing stratum throws") {
    ScenarioConfig sc = test::mini_config();
    sc.motives.motives[0].rules = {{"income_band", "inc_low", 0.5, 0.1}}; // inc_high uncovered
    sc.population.size = 40;
    RandomStream pop_rng(57, "pop");
    Population pop = synthesize_population(sc, pop_rng);
    RandomStream rng(58, "ag");
    CHECK_THROWS_AS(init_agents(pop.persons, sc.schema, sc.motives, sc.priors,
                                sc.channel_catalog, rng),
                    MissingStratum);
}

TEST_CASE("choice_shares: forced shares, grouping oracle and share sums") {
    std::vector<HumatAgent> agents = {make_agent(0, {1.0}, {0.5, 0.1}, 2),
                                      make_agent(1, {1.0}, {0.5, 0.1}, 2),
                                      make_agent(2, {1.0}, {0.1, 0.5}, 2)};
    std::vector<PersonRecord> persons(3);
    AttributeSchema schema;
    schema.attributes = {{"sex", {"female", "male"}}};
    persons[0].categories = {0};
    persons[1].categories = {1};
    persons[2].categories = {1};
    for (std::size_t i = 0; i < 3; ++i) {
        persons[i].person_id = "p" + std::to_string(i + 1);
    }

    SatisfactionKpi all = choice_shares(agents, persons, schema, kTwoAlts, "all");
    REQUIRE(all.rows.size() == 2);
    CHECK(all.rows[0].share == doctest::Approx(2.0 / 3.0));
    CHECK(all.rows[1].share == doctest::Approx(1.0 / 3.0));
    CHECK(all.rows[0].share + all.rows[1].share == doctest::Approx(1.0).epsilon(1e-9));

    SatisfactionKpi by_sex = choice_shares(agents, persons, schema, kTwoAlts, "sex");
    // independent tally oracle
    std::map<std::pair<std::string, std::string>, double> oracle;
    oracle[{"female", "home_courier"}] = 1.0;
    oracle[{"female", "crowdshipping"}] = 0.0;
    oracle[{"male", "home_courier"}] = 0.5;
    oracle[{"male", "crowdshipping"}] = 0.5;
    for (const KpiRow& row : by_sex.rows) {
        CHECK(row.share == doctest::Approx(oracle[{row.category, row.alternative}]));
    }

    CHECK_THROWS_AS(choice_shares(agents, persons, schema, kTwoAlts, "age"), UnknownAttribute);
}

TEST_CASE("apply_experience: nudge, clamp and sequential fold") {
    MotiveSpec motives;
    motives.motives = {{"comfort", MotiveGroup::experiential, {}},
                       {"norm", MotiveGroup::social, {}}};
    HumatAgent agent = make_agent(0, {1.0, 1.0}, {0.0, 0.0, 0.0, 0.0}, 2);

    DeliveryOutcome success{1, 0, 0, true, 0.0};
    apply_experience(agent, success, motives, 2, 0.1, 1.5);
    CHECK(agent.eval(0, 0, 2) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(agent.eval(1, 0, 2) == 0.0); // social motives untouched

    HumatAgent floor_agent = make_agent(0, {1.0, 1.0}, {-1.0, 0.0, 0.0, 0.0}, 2);
    DeliveryOutcome failure{2, 0, 0, false, 0.0};
    apply_experience(floor_agent, failure, motives, 2, 0.1, 1.5);
    CHECK(floor_agent.eval(0, 0, 2) == -1.0); // clamped

    // distant locker counts as a negative experience even on success
    HumatAgent walker = make_agent(0, {1.0, 1.0}, {0.0, 0.0, 0.0, 0.0}, 2);
    DeliveryOutcome far_locker{3, 0, 1, true, 2.4};
    apply_experience(walker, far_locker, motives, 2, 0.1, 1.5);
    CHECK(walker.eval(0, 1, 2) == doctest::Approx(-0.1).epsilon(1e-12));

    // ten-outcome fold oracle
    RandomStream rng(71, "fold");
    HumatAgent folded = make_agent(0, {1.0, 1.0}, {0.2, 0.0, 0.0, 0.0}, 2);
    double expected = 0.2;
    for (int i = 0; i < 10; ++i) {
        bool ok = rng.bernoulli(0.5);
        DeliveryOutcome outcome{i, 0, 0, ok, 0.0};
        apply_experience(folded, outcome, motives, 2, 0.1, 1.5);
        expected = std::clamp(expected + (ok ? 0.1 : -0.1), -1.0, 1.0);
        REQUIRE(folded.eval(0, 0, 2) == doctest::Approx(expected).epsilon(1e-12));
    }
}
