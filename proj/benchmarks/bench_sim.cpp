#include <benchmark/benchmark.h>

#include "lmsim/humat.hpp"
#include "lmsim/orchestrator.hpp"
#include "lmsim/popsynth.hpp"
#include "lmsim/scheduling.hpp"
#include "lmsim/socnet.hpp"

#include <cmath>
#include <filesystem>

using namespace lmsim;

namespace {

ScenarioConfig bench_config(std::vector<std::string> catalog, long long persons) {
    ScenarioConfig sc;
    sc.name = "bench";
    sc.day_count = 1;
    sc.seed = 1;
    sc.channel_catalog = std::move(catalog);
    sc.zones = {{"z1", {52.00, 4.30}, 1.0},
                {"z2", {52.01, 4.31}, 1.0},
                {"z3", {52.02, 4.29}, 1.0},
                {"z4", {52.03, 4.32}, 1.0}};
    sc.carriers = {{"c1", 0.6, 0.95, "z1", 120}, {"c2", 0.4, 0.9, "z3", 120}};
    sc.schema.attributes = {{"employment", {"employed", "not_employed"}},
                            {"income_band", {"inc_low", "inc_mid", "inc_high"}},
                            {"age_group", {"young", "mid", "old"}}};
    sc.marginals.targets = {{600.0, 400.0}, {300.0, 450.0, 250.0}, {330.0, 420.0, 250.0}};
    sc.has_marginals = true;
    sc.employment_attribute = 0;
    sc.employed_category = 0;
    sc.income_attribute = 1;
    sc.population.size = persons;
    sc.population.household_size_weights = {0.4, 0.35, 0.25};
    sc.demand.base_rate = 0.3;
    sc.demand.income_multipliers = {0.8, 1.0, 1.3};
    sc.demand.employment_multiplier = 0.2;

    auto layer = [](double k, double spatial, std::vector<double> attrs) {
        LayerParams p;
        p.k_mean = k;
        p.weights.spatial_weight = spatial;
        p.weights.attribute_weights = std::move(attrs);
        double total = p.weights.spatial_weight;
        for (double w : p.weights.attribute_weights) {
            total += w;
        }
        for (double& w : p.weights.attribute_weights) {
            w /= total;
        }
        p.weights.spatial_weight /= total;
        return p;
    };
    sc.network.friendship = layer(8.0, 1.0, {0.0, 1.0, 2.0});
    sc.network.job = layer(5.0, 0.5, {1.0, 1.0, 1.0});
    sc.network.neighborhood = layer(5.0, 3.0, {0.0, 1.0, 0.0});

    sc.motives.motives = {{"comfort", MotiveGroup::experiential, {{"all", "all", 0.6, 0.15}}},
                          {"norm", MotiveGroup::social, {{"all", "all", 0.5, 0.15}}},
                          {"thrift", MotiveGroup::values, {{"all", "all", 0.4, 0.15}}}};
    std::size_t alts = sc.channel_catalog.size();
    sc.priors.cells.assign(3 * alts, EvalPrior{0.3, 0.2});
    for (std::size_t a = 1; a < alts; ++a) {
        for (std::size_t m = 0; m < 3; ++m) {
            sc.priors.cells[m * alts + a] = {0.0, 0.25};
        }
    }
    sc.market.fixed_shares.assign(alts, 0.0);
    sc.market.fixed_shares[0] = 1.0;
    return sc;
}

DistanceMatrix random_matrix(std::size_t stops, RandomStream& rng) {
    std::vector<std::pair<double, double>> points = {{0.0, 0.0}};
    for (std::size_t s = 0; s < stops; ++s) {
        points.emplace_back(rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0));
    }
    DistanceMatrix dist(points.size(), std::vector<double>(points.size(), 0.0));
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            double dx = points[i].first - points[j].first;
            double dy = points[i].second - points[j].second;
            double d = std::sqrt(dx * dx + dy * dy);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    return dist;
}

} // namespace

static void BM_TwoOpt(benchmark::State& state) {
    RandomStream rng(7, "bench.twoopt");
    DistanceMatrix dist = random_matrix(static_cast<std::size_t>(state.range(0)), rng);
    for (auto _ : state) {
        std::vector<int> order = nearest_neighbor_order(dist);
        two_opt(order, dist);
        benchmark::DoNotOptimize(order);
    }
}
BENCHMARK(BM_TwoOpt)->Arg(20)->Arg(40)->Arg(80);

static void BM_FitIpf(benchmark::State& state) {
    ScenarioConfig sc = bench_config({"home_courier"}, 1000);
    JointTable seed = JointTable::uniform(sc.schema);
    for (auto _ : state) {
        IpfResult fit = fit_ipf(seed, sc.marginals, 1e-6, 200);
        benchmark::DoNotOptimize(fit);
    }
}
BENCHMARK(BM_FitIpf);

static void BM_BuildNetwork(benchmark::State& state) {
    ScenarioConfig sc = bench_config({"home_courier"}, state.range(0));
    RandomStream pop_rng(9, "bench.pop");
    Population pop = synthesize_population(sc, pop_rng);
    for (auto _ : state) {
        RandomStream rng(10, "bench.net");
        SocialNetwork net = build_network(pop.persons, sc, rng);
        benchmark::DoNotOptimize(net);
    }
}
BENCHMARK(BM_BuildNetwork)->Arg(500)->Arg(1000);

static void BM_DiffusionRound(benchmark::State& state) {
    ScenarioConfig sc = bench_config({"home_courier", "crowdshipping"}, state.range(0));
    RandomStream pop_rng(11, "bench.pop");
    Population pop = synthesize_population(sc, pop_rng);
    RandomStream net_rng(12, "bench.net");
    SocialNetwork net = build_network(pop.persons, sc, net_rng);
    RandomStream agent_rng(13, "bench.ag");
    std::vector<HumatAgent> agents = init_agents(pop.persons, sc.schema, sc.motives, sc.priors,
                                                 sc.channel_catalog, agent_rng);
    DiffusionSettings settings = diffusion_settings(sc);
    RandomStream rng(14, "bench.round");
    for (auto _ : state) {
        std::vector<HumatAgent> copy = agents;
        benchmark::DoNotOptimize(diffusion_round(copy, net, settings, 2, rng));
    }
}
BENCHMARK(BM_DiffusionRound)->Arg(500)->Arg(1000);

static void BM_FullDay(benchmark::State& state) {
    ScenarioConfig sc = bench_config({"home_courier", "crowdshipping"}, 1000);
    sc.crowdshipping.participation_rate = 0.1;
    sc.crowdshipping.max_detour_km = 5.0;
    std::filesystem::path out =
        std::filesystem::temp_directory_path() / "lmsim_bench_day";
    for (auto _ : state) {
        RunOptions options;
        options.out_dir = out;
        RunResult result = run_scenario(sc, options);
        benchmark::DoNotOptimize(result);
    }
    std::error_code ec;
    std::filesystem::remove_all(out, ec);
}
BENCHMARK(BM_FullDay);

BENCHMARK_MAIN();
