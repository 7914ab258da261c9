#pragma once

#include "lmsim/popsynth.hpp"
#include "lmsim/random.hpp"
#include "lmsim/scenario.hpp"
#include "lmsim/socnet.hpp"

#include <span>
#include <string>
#include <vector>

namespace lmsim {

struct HumatAgent {
    int person{-1}; // index into the population's person vector
    std::vector<double> importances;        // per motive, in [0, 1]
    std::vector<double> evaluations;        // motive-major, eval(m, a) in [-1, 1]
    std::vector<double> satisfaction_cache; // per alternative
    std::vector<double> dissonance_cache;   // per alternative
    int choice{0};         // index into the channel catalog
    double persuasion{0.0};

    double eval(std::size_t motive, std::size_t alternative, std::size_t alt_count) const {
        return evaluations[motive * alt_count + alternative];
    }
    double& eval(std::size_t motive, std::size_t alternative, std::size_t alt_count) {
        return evaluations[motive * alt_count + alternative];
    }
};

/// Delivery feedback for one parcel, routed to the household's
/// decision-maker agent.
struct DeliveryOutcome {
    int parcel{-1};
    int household{-1};
    int channel{-1};
    bool success{false};
    double locker_distance_km{0.0}; // only meaningful for parcel_locker
};

struct KpiRow {
    std::string grouping;  // attribute name or "all"
    std::string category;
    std::string alternative;
    long long agents{0};       // subgroup size
    double share{0.0};         // fraction of the subgroup choosing this alternative
    double mean_satisfaction{0.0};
};

/// KPI table: per subgroup and alternative, the share choosing it and the
/// subgroup's mean satisfaction with it. Shares sum to 1 per subgroup.
struct SatisfactionKpi {
    std::vector<KpiRow> rows;
};

// ---------------------------------------------------------------------------
// Agent construction and per-agent algebra
// ---------------------------------------------------------------------------

/// Draws motive importances per stratum, initial evaluations from the
/// survey priors, and persuasion uniform [0,1]; computes caches and the
/// initial choice. Throws MissingStratum when a person's stratum has no
/// importance rule.
std::vector<HumatAgent> init_agents(std::span<const PersonRecord> persons,
                                    const AttributeSchema& schema, const MotiveSpec& motives,
                                    const EvalPriors& priors,
                                    std::span<const std::string> catalog, RandomStream& rng);

/// S_a = sum_i w_i e_ia / sum_i w_i, or 0 when all importances are 0.
double satisfaction(const HumatAgent& agent, std::size_t alternative, std::size_t alt_count);

/// D_a = 2 min(P, N) / (P + N) over the importance-weighted positive and
/// negative evaluation mass, or 0 when both are 0.
double dissonance(const HumatAgent& agent, std::size_t alternative, std::size_t alt_count);

// Catalog-checked variants; throw UnknownAlternative.
double satisfaction(const HumatAgent& agent, std::span<const std::string> catalog,
                    std::string_view alternative);
double dissonance(const HumatAgent& agent, std::span<const std::string> catalog,
                  std::string_view alternative);

void refresh_caches(HumatAgent& agent, std::size_t alt_count);

/// Argmax of satisfaction; ties broken by lower dissonance, then catalog
/// order. Stores and returns the chosen alternative index.
std::size_t choose(HumatAgent& agent);

// ---------------------------------------------------------------------------
// Social influence
// ---------------------------------------------------------------------------

struct DiffusionSettings {
    double dissonance_threshold{0.5};
    double learning_rate{0.3};
    std::array<double, 3> layer_influence{1.0, 1.0, 1.0};
};

DiffusionSettings diffusion_settings(const ScenarioConfig& config);

/// The dissonant, dissatisfied move: adopt evaluation information about
/// `alternative` from the most persuasive alter (ties by lower person
/// index). Returns false (no-op) when the agent has no alters.
bool inquire(HumatAgent& agent, const SocialNetwork& network, std::span<const HumatAgent> agents,
             std::size_t alternative, const DiffusionSettings& settings);

/// The dissonant, satisfied move: push the agent's evaluations of its
/// chosen alternative to every alter, scaled by the signaler's persuasion
/// and the layer influence multiplier. Returns the number of alters
/// updated.
int signal(const HumatAgent& agent, const SocialNetwork& network, std::span<HumatAgent> agents,
           const DiffusionSettings& settings);

/// One synchronous round: classify every agent against the pre-round
/// snapshot, apply updates in canonical order, re-choose, and return the
/// number of agents whose choice changed. The result is independent of
/// `process_order` (exposed for the order-independence property test).
int diffusion_round(std::vector<HumatAgent>& agents, const SocialNetwork& network,
                    const DiffusionSettings& settings, std::size_t alt_count, RandomStream& rng,
                    std::span<const int> process_order = {});

struct DiffusionOutcome {
    int rounds_run{0};
    bool converged{false};
};

/// Iterates diffusion_round until no choice changes or max_rounds.
DiffusionOutcome run_diffusion(std::vector<HumatAgent>& agents, const SocialNetwork& network,
                               const DiffusionSettings& settings, std::size_t alt_count,
                               int max_rounds, RandomStream& rng);

// ---------------------------------------------------------------------------
// KPIs and experience feedback
// ---------------------------------------------------------------------------

/// Shares and mean satisfaction per subgroup of `grouping` ("all" or a
/// schema attribute name; throws UnknownAttribute).
SatisfactionKpi choice_shares(std::span<const HumatAgent> agents,
                              std::span<const PersonRecord> persons,
                              const AttributeSchema& schema,
                              std::span<const std::string> catalog, std::string_view grouping);

/// Same, with an externally supplied subgroup label per agent.
SatisfactionKpi choice_shares_by_labels(std::span<const HumatAgent> agents,
                                        std::span<const std::string> labels,
                                        std::string_view grouping,
                                        std::span<const std::string> catalog);

/// Nudges the experiential-group evaluations of the outcome's channel by
/// +eta on success and -eta on failure (or a locker beyond walking
/// distance), clamped to [-1, 1]; caches are recomputed.
void apply_experience(HumatAgent& agent, const DeliveryOutcome& outcome,
                      const MotiveSpec& motives, std::size_t alt_count, double eta,
                      double walk_max_km);

void write_kpi_csv(const SatisfactionKpi& kpi, const std::filesystem::path& path);

} // namespace lmsim
