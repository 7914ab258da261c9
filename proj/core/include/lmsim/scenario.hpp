#pragma once

#include "lmsim/geo.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lmsim {

// ---------------------------------------------------------------------------
// Spatial and market entities
// ---------------------------------------------------------------------------

struct Zone {
    std::string zone_id;
    LatLon centroid;
    double population_weight{0.0}; // relative household mass

    bool operator==(const Zone&) const = default;
};

struct Carrier {
    std::string carrier_id;
    double market_share{0.0};
    double success_rate{1.0};
    std::string depot_zone;
    int vehicle_capacity{120}; // parcels per tour

    bool operator==(const Carrier&) const = default;
};

struct LockerSpec {
    std::string locker_id;
    std::string zone;
    LatLon position;
    int capacity{1}; // parcels per day
    std::string availability_pattern{"1"}; // '0'/'1' per day, cycled

    bool available_on(int day) const; // day is 1-based
    bool operator==(const LockerSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Population schema and marginal targets
// ---------------------------------------------------------------------------

struct Attribute {
    std::string name;
    std::vector<std::string> categories;

    bool operator==(const Attribute&) const = default;
};

struct AttributeSchema {
    std::vector<Attribute> attributes;

    std::optional<std::size_t> index_of(std::string_view name) const;
    std::optional<std::size_t> category_index(std::size_t attribute, std::string_view label) const;

    bool operator==(const AttributeSchema&) const = default;
};

/// Per-attribute target counts, aligned with the schema's attribute and
/// category order. All attributes must total the same population size.
struct MarginalTable {
    std::vector<std::vector<double>> targets;

    double total() const;

    bool operator==(const MarginalTable&) const = default;
};

// ---------------------------------------------------------------------------
// Social network parameters
// ---------------------------------------------------------------------------

/// Per-layer similarity kernel weights. One weight per schema attribute
/// plus one for spatial proximity; normalized to sum 1 at load.
struct SimilarityWeights {
    std::vector<double> attribute_weights;
    double spatial_weight{0.0};

    bool operator==(const SimilarityWeights&) const = default;
};

struct LayerParams {
    double k_mean{0.0};
    double influence{1.0}; // diffusion multiplier for signals on this layer
    SimilarityWeights weights;

    bool operator==(const LayerParams&) const = default;
};

struct NetworkParams {
    double spatial_half_km{2.0};  // similarity halves every this many km
    int zone_adjacency_k{3};      // neighborhood layer: k nearest zones count as adjacent
    int candidate_factor{50};     // candidate pairs per person before sampling kicks in
    LayerParams friendship;
    LayerParams job;
    LayerParams neighborhood;

    bool operator==(const NetworkParams&) const = default;
};

// ---------------------------------------------------------------------------
// Agent motives and decision parameters
// ---------------------------------------------------------------------------

enum class MotiveGroup { experiential, social, values };

MotiveGroup motive_group_from_string(const std::string& s);
std::string to_string(MotiveGroup g);

/// Importance distribution for one motive within one population stratum.
/// stratum_attribute "all" applies to everyone.
struct ImportanceRule {
    std::string stratum_attribute;
    std::string stratum_category;
    double mean{0.5};
    double sd{0.0};

    bool operator==(const ImportanceRule&) const = default;
};

struct Motive {
    std::string name;
    MotiveGroup group{MotiveGroup::experiential};
    std::vector<ImportanceRule> rules;

    bool operator==(const Motive&) const = default;
};

struct MotiveSpec {
    std::vector<Motive> motives;

    bool operator==(const MotiveSpec&) const = default;
};

/// Survey prior for the initial evaluation of one alternative under one
/// motive; evaluations are drawn from these and clamped to [-1, 1].
struct EvalPrior {
    double mean{0.0};
    double sd{0.0};

    bool operator==(const EvalPrior&) const = default;
};

/// Motive-major matrix: cell(m, a) = cells[m * alternative_count + a].
struct EvalPriors {
    std::vector<EvalPrior> cells;

    bool operator==(const EvalPriors&) const = default;
};

struct HumatParams {
    double dissonance_threshold{0.5};
    double learning_rate{0.3};  // lambda in the belief update
    double experience_eta{0.1}; // delivery feedback nudge
    int setup_max_rounds{50};   // diffusion cap during the setup phase

    bool operator==(const HumatParams&) const = default;
};

// ---------------------------------------------------------------------------
// Freight parameters
// ---------------------------------------------------------------------------

struct DemandParams {
    double base_rate{0.0}; // expected parcels per household per day
    std::vector<double> income_multipliers; // per income_band category
    double employment_multiplier{0.0};      // per employed member
    bool success_in_allocation{true};

    bool operator==(const DemandParams&) const = default;
};

enum class OdPattern { depot_weighted, population };

struct CrowdshipParams {
    double participation_rate{0.0};
    double max_detour_km{2.0};
    int trip_capacity{1};
    OdPattern od_pattern{OdPattern::depot_weighted};

    bool operator==(const CrowdshipParams&) const = default;
};

struct LockerParams {
    double walk_max_km{1.5};

    bool operator==(const LockerParams&) const = default;
};

struct MarketParams {
    /// Channel shares used instead of HUMAT choices in freight-only mode,
    /// aligned with the channel catalog.
    std::vector<double> fixed_shares;

    bool operator==(const MarketParams&) const = default;
};

struct PopulationParams {
    long long size{0};
    std::vector<double> household_size_weights; // index i = size i+1
    double ipf_tol{1e-6};
    int ipf_max_iter{100};

    bool operator==(const PopulationParams&) const = default;
};

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

inline constexpr const char* kChannelHomeCourier = "home_courier";
inline constexpr const char* kChannelParcelLocker = "parcel_locker";
inline constexpr const char* kChannelCrowdshipping = "crowdshipping";

struct ScenarioConfig {
    std::string name;
    int day_count{0};
    std::uint64_t seed{0};
    std::vector<std::string> channel_catalog;

    std::vector<Zone> zones;
    std::vector<Carrier> carriers;
    std::vector<LockerSpec> lockers;

    AttributeSchema schema;
    MarginalTable marginals;
    bool has_marginals{false};
    std::optional<std::string> population_file; // pre-built persons.csv, bypasses synthesis

    // Schema roles; nullopt when the attribute is absent.
    std::optional<std::size_t> income_attribute;
    std::optional<std::size_t> employment_attribute;
    std::size_t employed_category{0};

    PopulationParams population;
    DemandParams demand;
    NetworkParams network;
    HumatParams humat;
    MotiveSpec motives;
    EvalPriors priors;
    CrowdshipParams crowdshipping;
    LockerParams locker_params;
    MarketParams market;

    // Directory the scenario file was loaded from; not part of identity.
    std::filesystem::path base_dir;

    std::optional<std::size_t> zone_index(std::string_view zone_id) const;
    std::optional<std::size_t> carrier_index(std::string_view carrier_id) const;
    std::optional<std::size_t> channel_index(std::string_view channel) const;

    bool operator==(const ScenarioConfig& other) const;
};

/// Parses and fully validates a scenario file and its sibling CSV tables.
/// Throws ParseError for malformed input, ValidationError for violated
/// constraints.
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Re-validates an already constructed configuration (used by callers
/// that build configs in memory).
void validate_scenario(const ScenarioConfig& config);

/// Writes scenario.<name>.toml plus all referenced CSV tables into dir.
/// Loading the result yields a configuration equal to the input.
std::filesystem::path save_scenario(const ScenarioConfig& config,
                                    const std::filesystem::path& dir);

} // namespace lmsim
