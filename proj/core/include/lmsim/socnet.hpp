#pragma once

#include "lmsim/popsynth.hpp"
#include "lmsim/random.hpp"
#include "lmsim/scenario.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace lmsim {

enum class LayerKind { friendship = 0, job = 1, neighborhood = 2 };

inline constexpr std::array<const char*, 3> kLayerNames = {"friendship", "job", "neighborhood"};

struct Edge {
    int a{0}; // person index, a < b
    int b{0};
    double weight{0.0}; // similarity of the endpoints, in (0, 1]
};

struct EdgeLayer {
    std::vector<Edge> edges;
    std::vector<std::vector<int>> adjacency; // sorted neighbor person indices

    double mean_degree() const;
};

struct SocialNetwork {
    std::array<EdgeLayer, 3> layers;

    const EdgeLayer& layer(LayerKind kind) const { return layers[static_cast<std::size_t>(kind)]; }
    EdgeLayer& layer(LayerKind kind) { return layers[static_cast<std::size_t>(kind)]; }
};

struct AlterLists {
    std::vector<int> friendship;
    std::vector<int> job;
    std::vector<int> neighborhood;
};

/// Weighted attribute-match similarity with exponential spatial decay:
/// matching categories contribute their weight, the spatial term
/// contributes spatial_weight * exp(-ln2 * distance / d_half). Weights are
/// normalized, so the result lies in [0, 1].
double similarity(const PersonRecord& a, const PersonRecord& b, const SimilarityWeights& w,
                  double zone_distance_km, double d_half);

/// Precomputed inputs shared by all three layer builds.
struct LayerBuildContext {
    std::span<const Zone> zones;
    std::vector<std::vector<int>> zone_adjacency; // per zone, sorted adjacent zone indices (incl. self)
    std::optional<std::size_t> employment_attribute;
    std::size_t employed_category{0};
    double spatial_half_km{2.0};
    int candidate_factor{50};
};

LayerBuildContext make_layer_context(const ScenarioConfig& config);

/// Bernoulli homophily graph calibrated by bisection so the expected mean
/// degree over the layer's eligible persons equals k_mean.
EdgeLayer build_layer(std::span<const PersonRecord> persons, LayerKind kind,
                      const LayerParams& params, const LayerBuildContext& ctx, RandomStream& rng);

/// All three layers with independently derived child streams.
SocialNetwork build_network(std::span<const PersonRecord> persons, const ScenarioConfig& config,
                            RandomStream& rng);

/// Per-layer neighbor lists for one person; throws UnknownPerson.
AlterLists alters(const SocialNetwork& network, std::span<const PersonRecord> persons,
                  std::string_view person_id);

void write_network_csv(const SocialNetwork& network, std::span<const PersonRecord> persons,
                       const std::filesystem::path& path);

} // namespace lmsim
