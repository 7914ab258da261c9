#pragma once

#include "lmsim/random.hpp"
#include "lmsim/scenario.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lmsim {

struct PersonRecord {
    std::string person_id;
    int household{-1}; // index into Population::households
    int zone{-1};      // index into ScenarioConfig::zones
    std::vector<int> categories; // one index per schema attribute

    bool operator==(const PersonRecord&) const = default;
};

struct HouseholdRecord {
    std::string household_id;
    int zone{-1};
    std::vector<int> members;  // person indices, ascending person_id
    int income_category{-1};   // -1 when the schema has no income attribute

    /// Lowest person_id by convention.
    int decision_maker() const { return members.front(); }

    bool operator==(const HouseholdRecord&) const = default;
};

struct Population {
    std::vector<PersonRecord> persons;
    std::vector<HouseholdRecord> households;

    bool operator==(const Population&) const = default;
};

/// Dense joint contingency table over the schema's attributes, row-major
/// with the first attribute varying slowest.
struct JointTable {
    std::vector<std::size_t> dims;
    std::vector<double> cells;

    static JointTable uniform(const AttributeSchema& schema, double value = 1.0);

    std::size_t cell_count() const;
    double sum() const;
    /// Decomposes a flat cell index into per-attribute category indices.
    std::vector<std::size_t> unravel(std::size_t flat) const;
};

struct IpfResult {
    JointTable table;
    bool converged{false};
    int iterations{0};
    double max_residual{0.0};
};

/// Iterative proportional fitting: alternately rescales the seed table so
/// each attribute's marginal sums match the targets.
///
/// Throws InconsistentMarginals when the per-attribute totals disagree.
/// Reaching max_iter is reported through the result, not thrown.
IpfResult fit_ipf(const JointTable& seed, const MarginalTable& marginals, double tol,
                  int max_iter);

/// Draws N persons from the fitted joint, groups them into households by
/// sampled size, and assigns households to zones proportionally to
/// population_weight. Deterministic in rng.
Population sample_population(const JointTable& joint, const AttributeSchema& schema,
                             std::size_t n, std::span<const Zone> zones,
                             std::span<const double> household_size_weights,
                             std::optional<std::size_t> income_attribute, RandomStream& rng);

/// Full synthesis for a scenario: uniform-seed IPF on the marginals, then
/// sampling. Throws NotConverged when IPF fails to reach tolerance.
Population synthesize_population(const ScenarioConfig& config, RandomStream& rng);

/// Reads a pre-built persons.csv and reconstructs households from it.
/// Used when a scenario supplies its own population. The schema is taken
/// from config (persons.csv columns must match).
Population load_population(const std::filesystem::path& path, const ScenarioConfig& config);

/// Derives the attribute schema from a persons.csv header and body:
/// attribute order from the columns, category order lexicographic.
AttributeSchema schema_from_population_csv(const std::filesystem::path& path);

void write_population_csv(const Population& pop, const ScenarioConfig& config,
                          const std::filesystem::path& persons_path,
                          const std::filesystem::path& households_path);

} // namespace lmsim
