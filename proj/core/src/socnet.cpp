#include "lmsim/socnet.hpp"

#include "lmsim/csv.hpp"
#include "lmsim/errors.hpp"
#include "lmsim/geo.hpp"
#include "lmsim/util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace lmsim {

double EdgeLayer::mean_degree() const {
    if (adjacency.empty()) {
        return 0.0;
    }
    return 2.0 * static_cast<double>(edges.size()) / static_cast<double>(adjacency.size());
}

double similarity(const PersonRecord& a, const PersonRecord& b, const SimilarityWeights& w,
                  double zone_distance_km, double d_half) {
    if (a.categories.size() != b.categories.size() ||
        a.categories.size() != w.attribute_weights.size()) {
        throw SchemaMismatch("persons compared under different schemas");
    }
    double score = 0.0;
    for (std::size_t i = 0; i < w.attribute_weights.size(); ++i) {
        if (a.categories[i] == b.categories[i]) {
            score += w.attribute_weights[i];
        }
    }
    if (w.spatial_weight > 0.0) {
        score += w.spatial_weight * std::exp(-std::numbers::ln2 * zone_distance_km / d_half);
    }
    return score;
}

LayerBuildContext make_layer_context(const ScenarioConfig& config) {
    LayerBuildContext ctx;
    ctx.zones = config.zones;
    ctx.employment_attribute = config.employment_attribute;
    ctx.employed_category = config.employed_category;
    ctx.spatial_half_km = config.network.spatial_half_km;
    ctx.candidate_factor = config.network.candidate_factor;

    // Zone adjacency: the k nearest centroids, symmetrized, plus self.
    std::size_t nz = config.zones.size();
    ctx.zone_adjacency.assign(nz, {});
    std::size_t k = static_cast<std::size_t>(std::max(0, config.network.zone_adjacency_k));
    std::vector<std::set<int>> adj(nz);
    for (std::size_t i = 0; i < nz; ++i) {
        adj[i].insert(static_cast<int>(i));
        std::vector<std::pair<double, int>> by_dist;
        for (std::size_t j = 0; j < nz; ++j) {
            if (j == i) {
                continue;
            }
            by_dist.emplace_back(
                great_circle_km(config.zones[i].centroid, config.zones[j].centroid),
                static_cast<int>(j));
        }
        std::sort(by_dist.begin(), by_dist.end());
        for (std::size_t r = 0; r < std::min(k, by_dist.size()); ++r) {
            adj[i].insert(by_dist[r].second);
            adj[static_cast<std::size_t>(by_dist[r].second)].insert(static_cast<int>(i));
        }
    }
    for (std::size_t i = 0; i < nz; ++i) {
        ctx.zone_adjacency[i].assign(adj[i].begin(), adj[i].end());
    }
    return ctx;
}

namespace {

struct Candidate {
    int a;
    int b;
    double sim;
};

// Distinct index pairs (i < j) drawn uniformly from `eligible`, capped at
// `target`. Used when the full pair set would be too large.
std::vector<std::pair<int, int>> sample_pairs(const std::vector<int>& eligible,
                                              std::size_t target, RandomStream& rng) {
    std::set<std::pair<int, int>> picked;
    std::size_t attempts = 0;
    std::size_t max_attempts = target * 10 + 16;
    std::size_t m = eligible.size();
    while (picked.size() < target && attempts < max_attempts) {
        ++attempts;
        std::size_t i = static_cast<std::size_t>(rng.uniform_below(m));
        std::size_t j = static_cast<std::size_t>(rng.uniform_below(m));
        if (i == j) {
            continue;
        }
        int a = eligible[std::min(i, j)];
        int b = eligible[std::max(i, j)];
        picked.emplace(a, b);
    }
    return {picked.begin(), picked.end()};
}

// Expected edge count at scale c: sum over candidates of min(1, c * sim).
double expected_edges(const std::vector<Candidate>& candidates, double c) {
    double sum = 0.0;
    for (const Candidate& cand : candidates) {
        sum += std::min(1.0, c * cand.sim);
    }
    return sum;
}

} // namespace

EdgeLayer build_layer(std::span<const PersonRecord> persons, LayerKind kind,
                      const LayerParams& params, const LayerBuildContext& ctx, RandomStream& rng) {
    std::size_t n = persons.size();
    EdgeLayer layer;
    layer.adjacency.assign(n, {});
    if (n < 2 || params.k_mean <= 0.0) {
        return layer;
    }
    if (params.k_mean >= static_cast<double>(n)) {
        throw ValidationError("network.k_mean", "mean degree " + format_double(params.k_mean) +
                                                    " must be below the person count " +
                                                    std::to_string(n));
    }

    // Eligible persons and candidate pairs depend on the layer.
    std::vector<int> eligible;
    std::vector<std::pair<int, int>> pairs;
    std::size_t cap = static_cast<std::size_t>(ctx.candidate_factor) * n;

    if (kind == LayerKind::job) {
        if (!ctx.employment_attribute) {
            return layer; // no employment attribute, no job network
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (persons[i].categories[*ctx.employment_attribute] ==
                static_cast<int>(ctx.employed_category)) {
                eligible.push_back(static_cast<int>(i));
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            eligible.push_back(static_cast<int>(i));
        }
    }
    if (eligible.size() < 2) {
        return layer;
    }

    if (kind == LayerKind::neighborhood) {
        // Pairs within the same or adjacent zones only.
        std::vector<std::vector<int>> by_zone(ctx.zones.size());
        for (int p : eligible) {
            by_zone[static_cast<std::size_t>(persons[static_cast<std::size_t>(p)].zone)].push_back(
                p);
        }
        for (std::size_t z = 0; z < ctx.zones.size(); ++z) {
            for (int other : ctx.zone_adjacency[z]) {
                std::size_t oz = static_cast<std::size_t>(other);
                if (oz < z) {
                    continue; // each zone pair once
                }
                if (oz == z) {
                    const auto& zs = by_zone[z];
                    for (std::size_t i = 0; i < zs.size(); ++i) {
                        for (std::size_t j = i + 1; j < zs.size(); ++j) {
                            pairs.emplace_back(zs[i], zs[j]);
                        }
                    }
                } else {
                    for (int a : by_zone[z]) {
                        for (int b : by_zone[oz]) {
                            pairs.emplace_back(std::min(a, b), std::max(a, b));
                        }
                    }
                }
            }
        }
        std::sort(pairs.begin(), pairs.end());
        if (pairs.size() > cap) {
            std::vector<std::pair<int, int>> thinned;
            thinned.reserve(cap);
            // Deterministic subsample: keep a stride-spread subset.
            double stride = static_cast<double>(pairs.size()) / static_cast<double>(cap);
            for (std::size_t i = 0; i < cap; ++i) {
                thinned.push_back(pairs[static_cast<std::size_t>(i * stride)]);
            }
            pairs = std::move(thinned);
        }
    } else {
        std::size_t all = eligible.size() * (eligible.size() - 1) / 2;
        if (all <= cap) {
            for (std::size_t i = 0; i < eligible.size(); ++i) {
                for (std::size_t j = i + 1; j < eligible.size(); ++j) {
                    pairs.emplace_back(eligible[i], eligible[j]);
                }
            }
        } else {
            pairs = sample_pairs(eligible, cap, rng);
        }
    }
    if (pairs.empty()) {
        return layer;
    }

    std::vector<Candidate> candidates;
    candidates.reserve(pairs.size());
    for (auto [a, b] : pairs) {
        const PersonRecord& pa = persons[static_cast<std::size_t>(a)];
        const PersonRecord& pb = persons[static_cast<std::size_t>(b)];
        double dist = great_circle_km(ctx.zones[static_cast<std::size_t>(pa.zone)].centroid,
                                      ctx.zones[static_cast<std::size_t>(pb.zone)].centroid);
        double sim = similarity(pa, pb, params.weights, dist, ctx.spatial_half_km);
        candidates.push_back({a, b, sim});
    }

    // Calibrate the global scale by bisection so the expected mean degree
    // over eligible persons hits k_mean.
    double target = params.k_mean * static_cast<double>(eligible.size()) / 2.0;
    double hi = 1.0;
    while (expected_edges(candidates, hi) < target && hi < 1e12) {
        hi *= 2.0;
    }
    double lo = 0.0;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        if (expected_edges(candidates, mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double scale = hi;

    for (const Candidate& cand : candidates) {
        double p = std::min(1.0, scale * cand.sim);
        if (rng.uniform01() < p) {
            layer.edges.push_back({cand.a, cand.b, cand.sim});
        }
    }
    for (const Edge& e : layer.edges) {
        layer.adjacency[static_cast<std::size_t>(e.a)].push_back(e.b);
        layer.adjacency[static_cast<std::size_t>(e.b)].push_back(e.a);
    }
    for (auto& neighbors : layer.adjacency) {
        std::sort(neighbors.begin(), neighbors.end());
    }
    return layer;
}

SocialNetwork build_network(std::span<const PersonRecord> persons, const ScenarioConfig& config,
                            RandomStream& rng) {
    LayerBuildContext ctx = make_layer_context(config);
    SocialNetwork net;
    RandomStream friendship_rng = rng.derive("friendship");
    RandomStream job_rng = rng.derive("job");
    RandomStream neighborhood_rng = rng.derive("neighborhood");
    net.layer(LayerKind::friendship) =
        build_layer(persons, LayerKind::friendship, config.network.friendship, ctx, friendship_rng);
    net.layer(LayerKind::job) = build_layer(persons, LayerKind::job, config.network.job, ctx, job_rng);
    net.layer(LayerKind::neighborhood) = build_layer(persons, LayerKind::neighborhood,
                                                     config.network.neighborhood, ctx,
                                                     neighborhood_rng);
    return net;
}

AlterLists alters(const SocialNetwork& network, std::span<const PersonRecord> persons,
                  std::string_view person_id) {
    for (std::size_t i = 0; i < persons.size(); ++i) {
        if (persons[i].person_id == person_id) {
            AlterLists out;
            out.friendship = network.layer(LayerKind::friendship).adjacency[i];
            out.job = network.layer(LayerKind::job).adjacency[i];
            out.neighborhood = network.layer(LayerKind::neighborhood).adjacency[i];
            return out;
        }
    }
    throw UnknownPerson("no person with id '" + std::string(person_id) + "'");
}

void write_network_csv(const SocialNetwork& network, std::span<const PersonRecord> persons,
                       const std::filesystem::path& path) {
    std::string out = csv_line({"layer", "person_a", "person_b", "weight"});
    for (std::size_t l = 0; l < 3; ++l) {
        for (const Edge& e : network.layers[l].edges) {
            out += csv_line({kLayerNames[l], persons[static_cast<std::size_t>(e.a)].person_id,
                             persons[static_cast<std::size_t>(e.b)].person_id,
                             format_double(e.weight)});
        }
    }
    write_text_file(path, out);
}

} // namespace lmsim
