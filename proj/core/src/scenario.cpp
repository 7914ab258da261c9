#include "lmsim/scenario.hpp"

#include "lmsim/config.hpp"
#include "lmsim/csv.hpp"
#include "lmsim/errors.hpp"
#include "lmsim/popsynth.hpp"
#include "lmsim/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace lmsim {

namespace {

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

bool LockerSpec::available_on(int day) const {
    if (availability_pattern.empty()) {
        return false;
    }
    std::size_t idx = static_cast<std::size_t>(day - 1) % availability_pattern.size();
    return availability_pattern[idx] == '1';
}

std::optional<std::size_t> AttributeSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < attributes.size(); ++i) {
        if (attributes[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> AttributeSchema::category_index(std::size_t attribute,
                                                           std::string_view label) const {
    const auto& cats = attributes[attribute].categories;
    for (std::size_t i = 0; i < cats.size(); ++i) {
        if (cats[i] == label) {
            return i;
        }
    }
    return std::nullopt;
}

double MarginalTable::total() const {
    if (targets.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (double v : targets.front()) {
        sum += v;
    }
    return sum;
}

MotiveGroup motive_group_from_string(const std::string& s) {
    if (s == "experiential") return MotiveGroup::experiential;
    if (s == "social") return MotiveGroup::social;
    if (s == "values") return MotiveGroup::values;
    throw ValidationError("motives.group", "unknown motive group '" + s + "'");
}

std::string to_string(MotiveGroup g) {
    switch (g) {
    case MotiveGroup::experiential: return "experiential";
    case MotiveGroup::social: return "social";
    case MotiveGroup::values: return "values";
    }
    return "?";
}

std::optional<std::size_t> ScenarioConfig::zone_index(std::string_view zone_id) const {
    for (std::size_t i = 0; i < zones.size(); ++i) {
        if (zones[i].zone_id == zone_id) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> ScenarioConfig::carrier_index(std::string_view carrier_id) const {
    for (std::size_t i = 0; i < carriers.size(); ++i) {
        if (carriers[i].carrier_id == carrier_id) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> ScenarioConfig::channel_index(std::string_view channel) const {
    for (std::size_t i = 0; i < channel_catalog.size(); ++i) {
        if (channel_catalog[i] == channel) {
            return i;
        }
    }
    return std::nullopt;
}

bool ScenarioConfig::operator==(const ScenarioConfig& other) const {
    // base_dir is where the files came from, not part of scenario identity.
    return name == other.name && day_count == other.day_count && seed == other.seed &&
           channel_catalog == other.channel_catalog && zones == other.zones &&
           carriers == other.carriers && lockers == other.lockers && schema == other.schema &&
           marginals == other.marginals && has_marginals == other.has_marginals &&
           population_file == other.population_file &&
           income_attribute == other.income_attribute &&
           employment_attribute == other.employment_attribute &&
           employed_category == other.employed_category && population == other.population &&
           demand == other.demand && network == other.network && humat == other.humat &&
           motives == other.motives && priors == other.priors &&
           crowdshipping == other.crowdshipping && locker_params == other.locker_params &&
           market == other.market;
}

// ---------------------------------------------------------------------------
// CSV table loaders
// ---------------------------------------------------------------------------

namespace {

double cell_double(const CsvTable& t, std::size_t row, std::size_t col, const std::string& field) {
    auto v = parse_double(t.cell(row, col));
    if (!v) {
        throw ValidationError(field, "not a number: '" + t.cell(row, col) + "' (" + t.source +
                                         " row " + std::to_string(row + 2) + ")");
    }
    return *v;
}

long long cell_int(const CsvTable& t, std::size_t row, std::size_t col, const std::string& field) {
    auto v = parse_int(t.cell(row, col));
    if (!v) {
        throw ValidationError(field, "not an integer: '" + t.cell(row, col) + "' (" + t.source +
                                         " row " + std::to_string(row + 2) + ")");
    }
    return *v;
}

std::vector<Zone> load_zones(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    std::size_t c_id = t.column("zone_id");
    std::size_t c_lat = t.column("lat");
    std::size_t c_lon = t.column("lon");
    std::size_t c_w = t.column("population_weight");

    std::vector<Zone> zones;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        Zone z;
        z.zone_id = t.cell(r, c_id);
        z.centroid.lat = cell_double(t, r, c_lat, "zones.lat");
        z.centroid.lon = cell_double(t, r, c_lon, "zones.lon");
        z.population_weight = cell_double(t, r, c_w, "zones.population_weight");
        if (z.zone_id.empty()) {
            throw ValidationError("zones.zone_id", "empty id (row " + std::to_string(r + 2) + ")");
        }
        if (!seen.insert(z.zone_id).second) {
            throw ValidationError("zones.zone_id", "duplicate id '" + z.zone_id + "'");
        }
        if (z.centroid.lat < -90.0 || z.centroid.lat > 90.0) {
            throw ValidationError("zones.lat", "latitude " + short_num(z.centroid.lat) +
                                                   " outside [-90, 90] for '" + z.zone_id + "'");
        }
        if (z.centroid.lon < -180.0 || z.centroid.lon > 180.0) {
            throw ValidationError("zones.lon", "longitude " + short_num(z.centroid.lon) +
                                                   " outside [-180, 180] for '" + z.zone_id + "'");
        }
        if (z.population_weight < 0.0) {
            throw ValidationError("zones.population_weight",
                                  "negative weight for '" + z.zone_id + "'");
        }
        zones.push_back(std::move(z));
    }
    return zones;
}

std::vector<Carrier> load_carriers(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    std::size_t c_id = t.column("carrier_id");
    std::size_t c_share = t.column("market_share");
    std::size_t c_succ = t.column("success_rate");
    std::size_t c_depot = t.column("depot_zone");
    std::size_t c_cap = t.column("vehicle_capacity");

    std::vector<Carrier> carriers;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        Carrier c;
        c.carrier_id = t.cell(r, c_id);
        c.market_share = cell_double(t, r, c_share, "carriers.market_share");
        c.success_rate = cell_double(t, r, c_succ, "carriers.success_rate");
        c.depot_zone = t.cell(r, c_depot);
        c.vehicle_capacity = static_cast<int>(cell_int(t, r, c_cap, "carriers.vehicle_capacity"));
        if (!seen.insert(c.carrier_id).second) {
            throw ValidationError("carriers.carrier_id", "duplicate id '" + c.carrier_id + "'");
        }
        if (c.market_share < 0.0 || c.market_share > 1.0) {
            throw ValidationError("carriers.market_share",
                                  "share " + short_num(c.market_share) + " outside [0, 1]");
        }
        if (c.success_rate <= 0.0 || c.success_rate > 1.0) {
            throw ValidationError("carriers.success_rate",
                                  "rate " + short_num(c.success_rate) + " outside (0, 1]");
        }
        if (c.vehicle_capacity < 1) {
            throw ValidationError("carriers.vehicle_capacity", "must be >= 1");
        }
        carriers.push_back(std::move(c));
    }
    return carriers;
}

std::vector<LockerSpec> load_lockers(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    std::size_t c_id = t.column("locker_id");
    std::size_t c_zone = t.column("zone");
    std::size_t c_lat = t.column("lat");
    std::size_t c_lon = t.column("lon");
    std::size_t c_cap = t.column("capacity");
    std::size_t c_avail = t.column("availability_pattern");

    std::vector<LockerSpec> lockers;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        LockerSpec l;
        l.locker_id = t.cell(r, c_id);
        l.zone = t.cell(r, c_zone);
        l.position.lat = cell_double(t, r, c_lat, "lockers.lat");
        l.position.lon = cell_double(t, r, c_lon, "lockers.lon");
        l.capacity = static_cast<int>(cell_int(t, r, c_cap, "lockers.capacity"));
        l.availability_pattern = t.cell(r, c_avail);
        if (!seen.insert(l.locker_id).second) {
            throw ValidationError("lockers.locker_id", "duplicate id '" + l.locker_id + "'");
        }
        if (l.capacity < 1) {
            throw ValidationError("lockers.capacity", "must be >= 1 ('" + l.locker_id + "')");
        }
        if (l.position.lat < -90.0 || l.position.lat > 90.0 || l.position.lon < -180.0 ||
            l.position.lon > 180.0) {
            throw ValidationError("lockers.lat", "invalid coordinates ('" + l.locker_id + "')");
        }
        if (l.availability_pattern.empty() ||
            l.availability_pattern.find_first_not_of("01") != std::string::npos) {
            throw ValidationError("lockers.availability_pattern",
                                  "must be a nonempty string of 0/1 ('" + l.locker_id + "')");
        }
        lockers.push_back(std::move(l));
    }
    return lockers;
}

void load_marginals(const std::filesystem::path& path, AttributeSchema& schema,
                    MarginalTable& marginals) {
    CsvTable t = read_csv(path);
    std::size_t c_attr = t.column("attribute");
    std::size_t c_cat = t.column("category");
    std::size_t c_count = t.column("count");

    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string& attr = t.cell(r, c_attr);
        const std::string& cat = t.cell(r, c_cat);
        double count = cell_double(t, r, c_count, "marginals.count");
        if (count < 0.0) {
            throw ValidationError("marginals.count",
                                  "negative count for " + attr + "/" + cat);
        }
        auto idx = schema.index_of(attr);
        if (!idx) {
            schema.attributes.push_back({attr, {}});
            marginals.targets.emplace_back();
            idx = schema.attributes.size() - 1;
        }
        if (schema.category_index(*idx, cat)) {
            throw ValidationError("marginals.category",
                                  "duplicate category " + attr + "/" + cat);
        }
        schema.attributes[*idx].categories.push_back(cat);
        marginals.targets[*idx].push_back(count);
    }

    for (const Attribute& a : schema.attributes) {
        if (a.categories.size() < 2) {
            throw ValidationError("marginals.attribute",
                                  "attribute '" + a.name + "' needs >= 2 categories");
        }
    }
    if (!schema.attributes.empty()) {
        double first = 0.0;
        for (double v : marginals.targets.front()) {
            first += v;
        }
        for (std::size_t a = 1; a < marginals.targets.size(); ++a) {
            double sum = 0.0;
            for (double v : marginals.targets[a]) {
                sum += v;
            }
            if (std::abs(sum - first) > 1e-6 * std::max(1.0, first)) {
                throw ValidationError("marginals.count",
                                      "attribute '" + schema.attributes[a].name + "' totals " +
                                          short_num(sum) + " but '" +
                                          schema.attributes.front().name + "' totals " +
                                          short_num(first));
            }
        }
    }
}

void load_motives(const std::filesystem::path& path, const AttributeSchema& schema,
                  MotiveSpec& spec) {
    CsvTable t = read_csv(path);
    std::size_t c_motive = t.column("motive");
    std::size_t c_group = t.column("group");
    std::size_t c_attr = t.column("stratum_attribute");
    std::size_t c_cat = t.column("stratum_category");
    std::size_t c_mean = t.column("importance_mean");
    std::size_t c_sd = t.column("importance_sd");

    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string& name = t.cell(r, c_motive);
        MotiveGroup group = motive_group_from_string(t.cell(r, c_group));
        ImportanceRule rule;
        rule.stratum_attribute = t.cell(r, c_attr);
        rule.stratum_category = t.cell(r, c_cat);
        rule.mean = cell_double(t, r, c_mean, "motives.importance_mean");
        rule.sd = cell_double(t, r, c_sd, "motives.importance_sd");
        if (rule.mean < 0.0 || rule.mean > 1.0) {
            throw ValidationError("motives.importance_mean",
                                  "mean " + short_num(rule.mean) + " outside [0, 1]");
        }
        if (rule.sd < 0.0) {
            throw ValidationError("motives.importance_sd", "negative sd");
        }
        if (rule.stratum_attribute != "all") {
            auto idx = schema.index_of(rule.stratum_attribute);
            if (!idx) {
                throw ValidationError("motives.stratum_attribute",
                                      "unknown attribute '" + rule.stratum_attribute + "'");
            }
            if (!schema.category_index(*idx, rule.stratum_category)) {
                throw ValidationError("motives.stratum_category",
                                      "unknown category '" + rule.stratum_category + "' of '" +
                                          rule.stratum_attribute + "'");
            }
        }

        Motive* motive = nullptr;
        for (Motive& m : spec.motives) {
            if (m.name == name) {
                motive = &m;
                break;
            }
        }
        if (motive == nullptr) {
            spec.motives.push_back({name, group, {}});
            motive = &spec.motives.back();
        } else if (motive->group != group) {
            throw ValidationError("motives.group",
                                  "motive '" + name + "' listed with two different groups");
        }
        motive->rules.push_back(std::move(rule));
    }

    if (!spec.motives.empty()) {
        bool has[3] = {false, false, false};
        for (const Motive& m : spec.motives) {
            has[static_cast<int>(m.group)] = true;
        }
        if (!has[0] || !has[1] || !has[2]) {
            throw ValidationError("motives.group",
                                  "need at least one motive in each of the experiential, "
                                  "social and values groups");
        }
    }
}

void load_priors(const std::filesystem::path& path, const MotiveSpec& motives,
                 const std::vector<std::string>& catalog, EvalPriors& priors) {
    CsvTable t = read_csv(path);
    std::size_t c_motive = t.column("motive");
    std::size_t c_alt = t.column("alternative");
    std::size_t c_mean = t.column("eval_mean");
    std::size_t c_sd = t.column("eval_sd");

    std::size_t alt_count = catalog.size();
    priors.cells.assign(motives.motives.size() * alt_count, EvalPrior{});
    std::vector<bool> filled(priors.cells.size(), false);

    auto motive_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < motives.motives.size(); ++i) {
            if (motives.motives[i].name == name) {
                return i;
            }
        }
        throw ValidationError("priors.motive", "unknown motive '" + name + "'");
    };
    auto alt_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < catalog.size(); ++i) {
            if (catalog[i] == name) {
                return i;
            }
        }
        throw ValidationError("priors.alternative",
                              "alternative '" + name + "' not in the channel catalog");
    };

    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::size_t m = motive_index(t.cell(r, c_motive));
        std::size_t a = alt_index(t.cell(r, c_alt));
        EvalPrior p;
        p.mean = cell_double(t, r, c_mean, "priors.eval_mean");
        p.sd = cell_double(t, r, c_sd, "priors.eval_sd");
        if (p.mean < -1.0 || p.mean > 1.0) {
            throw ValidationError("priors.eval_mean",
                                  "mean " + short_num(p.mean) + " outside [-1, 1]");
        }
        if (p.sd < 0.0) {
            throw ValidationError("priors.eval_sd", "negative sd");
        }
        std::size_t cell = m * alt_count + a;
        if (filled[cell]) {
            throw ValidationError("priors",
                                  "duplicate row for " + t.cell(r, c_motive) + "/" +
                                      t.cell(r, c_alt));
        }
        filled[cell] = true;
        priors.cells[cell] = p;
    }
    for (std::size_t m = 0; m < motives.motives.size(); ++m) {
        for (std::size_t a = 0; a < alt_count; ++a) {
            if (!filled[m * alt_count + a]) {
                throw ValidationError("priors", "missing row for " + motives.motives[m].name +
                                                    "/" + catalog[a]);
            }
        }
    }
}

SimilarityWeights load_layer_weights(const ConfigTable& cfg, const std::string& section,
                                     const AttributeSchema& schema) {
    SimilarityWeights w;
    w.attribute_weights.assign(schema.attributes.size(), 0.0);
    w.spatial_weight = cfg.get_double_or(section + ".spatial_weight", 0.0);

    std::vector<std::string> names;
    std::vector<double> weights;
    if (cfg.contains(section + ".attributes")) {
        names = cfg.get_string_array(section + ".attributes");
        weights = cfg.get_double_array(section + ".weights");
        if (names.size() != weights.size()) {
            throw ValidationError(section, "attributes and weights differ in length");
        }
    } else if (cfg.contains(section + ".weights")) {
        throw ValidationError(section, "weights given without attributes");
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto idx = schema.index_of(names[i]);
        if (!idx) {
            throw ValidationError(section + ".attributes",
                                  "unknown attribute '" + names[i] + "'");
        }
        if (weights[i] < 0.0) {
            throw ValidationError(section + ".weights", "negative weight for '" + names[i] + "'");
        }
        w.attribute_weights[*idx] = weights[i];
    }
    if (w.spatial_weight < 0.0) {
        throw ValidationError(section + ".spatial_weight", "negative weight");
    }

    double total = w.spatial_weight;
    for (double v : w.attribute_weights) {
        total += v;
    }
    if (total <= 0.0) {
        throw ValidationError(section, "at least one similarity weight must be positive");
    }
    for (double& v : w.attribute_weights) {
        v /= total;
    }
    w.spatial_weight /= total;
    return w;
}

LayerParams load_layer(const ConfigTable& cfg, const std::string& section,
                       const AttributeSchema& schema) {
    LayerParams p;
    p.k_mean = cfg.get_double_or(section + ".k_mean", 0.0);
    p.influence = cfg.get_double_or(section + ".influence", 1.0);
    if (p.k_mean < 0.0) {
        throw ValidationError(section + ".k_mean", "must be >= 0");
    }
    if (p.influence < 0.0) {
        throw ValidationError(section + ".influence", "must be >= 0");
    }
    p.weights = load_layer_weights(cfg, section, schema);
    return p;
}

} // namespace

// ---------------------------------------------------------------------------
// load_scenario
// ---------------------------------------------------------------------------

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw IoError("scenario file not found: " + path.string());
    }
    ConfigTable cfg = parse_config_file(path);
    std::filesystem::path dir = path.parent_path();

    ScenarioConfig sc;
    sc.base_dir = dir;
    sc.name = cfg.get_string("scenario.name");
    sc.day_count = static_cast<int>(cfg.get_int("scenario.day_count"));
    sc.seed = cfg.get_uint("scenario.seed");
    sc.channel_catalog = cfg.get_string_array("scenario.channel_catalog");

    if (sc.name.empty()) {
        throw ValidationError("scenario.name", "must not be empty");
    }
    if (sc.day_count < 0) {
        throw ValidationError("scenario.day_count", "must be >= 0");
    }

    auto file_in_dir = [&](const std::string& key) {
        return dir / cfg.get_string(key);
    };

    sc.zones = load_zones(file_in_dir("files.zones"));
    sc.carriers = load_carriers(file_in_dir("files.carriers"));
    if (cfg.contains("files.lockers")) {
        sc.lockers = load_lockers(file_in_dir("files.lockers"));
    }

    bool has_marginals_file = cfg.contains("files.marginals");
    bool has_population_file = cfg.contains("files.population");
    if (has_marginals_file && has_population_file) {
        throw ValidationError("files", "provide either marginals or population, not both");
    }
    if (!has_marginals_file && !has_population_file) {
        throw ValidationError("files", "one of marginals or population is required");
    }
    if (has_marginals_file) {
        load_marginals(file_in_dir("files.marginals"), sc.schema, sc.marginals);
        sc.has_marginals = true;
    } else {
        sc.population_file = cfg.get_string("files.population");
        sc.schema = schema_from_population_csv(dir / *sc.population_file);
    }

    // Schema roles. Explicit overrides must resolve; defaults are optional.
    auto resolve_role = [&](const std::string& key, const std::string& fallback) {
        bool explicit_key = cfg.contains("schema." + key);
        std::string name = explicit_key ? cfg.get_string("schema." + key) : fallback;
        auto idx = sc.schema.index_of(name);
        if (explicit_key && !idx) {
            throw ValidationError("schema." + key, "unknown attribute '" + name + "'");
        }
        return idx;
    };
    sc.income_attribute = resolve_role("income_attribute", "income_band");
    sc.employment_attribute = resolve_role("employment_attribute", "employment");
    if (sc.employment_attribute) {
        std::string cat = cfg.get_string_or("schema.employed_category", "employed");
        auto c = sc.schema.category_index(*sc.employment_attribute, cat);
        if (!c) {
            throw ValidationError("schema.employed_category",
                                  "unknown category '" + cat + "'");
        }
        sc.employed_category = *c;
    } else {
        // consume the key so a stray setting is still reported below
        cfg.get_string_or("schema.employed_category", "employed");
    }

    // Population synthesis parameters.
    sc.population.size = cfg.get_int_or("population.size", 0);
    if (cfg.contains("population.household_size_weights")) {
        sc.population.household_size_weights =
            cfg.get_double_array("population.household_size_weights");
    } else {
        sc.population.household_size_weights = {1.0};
    }
    sc.population.ipf_tol = cfg.get_double_or("population.ipf_tol", 1e-6);
    sc.population.ipf_max_iter = static_cast<int>(cfg.get_int_or("population.ipf_max_iter", 100));

    // Demand.
    sc.demand.base_rate = cfg.get_double_or("demand_params.base_rate", 0.0);
    if (cfg.contains("demand_params.income_multipliers")) {
        sc.demand.income_multipliers = cfg.get_double_array("demand_params.income_multipliers");
    }
    sc.demand.employment_multiplier = cfg.get_double_or("demand_params.employment_multiplier", 0.0);
    sc.demand.success_in_allocation = cfg.get_bool_or("demand_params.success_in_allocation", true);

    // Social network.
    sc.network.spatial_half_km = cfg.get_double_or("network.spatial_half_km", 2.0);
    sc.network.zone_adjacency_k = static_cast<int>(cfg.get_int_or("network.zone_adjacency_k", 3));
    sc.network.candidate_factor = static_cast<int>(cfg.get_int_or("network.candidate_factor", 50));
    for (const char* layer : {"friendship", "job", "neighborhood"}) {
        std::string section = std::string("network.") + layer;
        LayerParams params = load_layer(cfg, section, sc.schema);
        if (layer == std::string_view("friendship")) sc.network.friendship = params;
        if (layer == std::string_view("job")) sc.network.job = params;
        if (layer == std::string_view("neighborhood")) sc.network.neighborhood = params;
    }

    // HUMAT.
    sc.humat.dissonance_threshold = cfg.get_double_or("humat.dissonance_threshold", 0.5);
    sc.humat.learning_rate = cfg.get_double_or("humat.learning_rate", 0.3);
    sc.humat.experience_eta = cfg.get_double_or("humat.experience_eta", 0.1);
    sc.humat.setup_max_rounds = static_cast<int>(cfg.get_int_or("humat.setup_max_rounds", 50));

    if (cfg.contains("files.motives")) {
        load_motives(file_in_dir("files.motives"), sc.schema, sc.motives);
    }
    if (cfg.contains("files.priors")) {
        if (sc.motives.motives.empty()) {
            throw ValidationError("files.priors", "priors given without motives");
        }
        load_priors(file_in_dir("files.priors"), sc.motives, sc.channel_catalog, sc.priors);
    } else if (!sc.motives.motives.empty()) {
        throw ValidationError("files.motives", "motives given without priors");
    }

    // Crowdshipping.
    sc.crowdshipping.participation_rate = cfg.get_double_or("crowdshipping.participation_rate", 0.0);
    sc.crowdshipping.max_detour_km = cfg.get_double_or("crowdshipping.max_detour_km", 2.0);
    sc.crowdshipping.trip_capacity =
        static_cast<int>(cfg.get_int_or("crowdshipping.trip_capacity", 1));
    std::string od = cfg.get_string_or("crowdshipping.od_pattern", "depot_weighted");
    if (od == "depot_weighted") {
        sc.crowdshipping.od_pattern = OdPattern::depot_weighted;
    } else if (od == "population") {
        sc.crowdshipping.od_pattern = OdPattern::population;
    } else {
        throw ValidationError("crowdshipping.od_pattern",
                              "expected 'depot_weighted' or 'population', got '" + od + "'");
    }

    // Lockers and market.
    sc.locker_params.walk_max_km = cfg.get_double_or("lockers.walk_max_km", 1.5);
    if (cfg.contains("market.fixed_shares")) {
        sc.market.fixed_shares = cfg.get_double_array("market.fixed_shares");
    } else {
        sc.market.fixed_shares.assign(sc.channel_catalog.size(), 0.0);
        if (!sc.channel_catalog.empty()) {
            for (std::size_t i = 0; i < sc.channel_catalog.size(); ++i) {
                if (sc.channel_catalog[i] == kChannelHomeCourier) {
                    sc.market.fixed_shares[i] = 1.0;
                }
            }
        }
    }

    std::vector<std::string> leftover = cfg.unconsumed_keys();
    if (!leftover.empty()) {
        throw ValidationError(leftover.front(), "unknown configuration key");
    }

    validate_scenario(sc);
    return sc;
}

// ---------------------------------------------------------------------------
// validate_scenario
// ---------------------------------------------------------------------------

void validate_scenario(const ScenarioConfig& sc) {
    if (sc.zones.empty()) {
        throw ValidationError("zones", "at least one zone is required");
    }
    {
        std::set<std::string> ids;
        double weight_sum = 0.0;
        for (const Zone& z : sc.zones) {
            if (!ids.insert(z.zone_id).second) {
                throw ValidationError("zones.zone_id", "duplicate id '" + z.zone_id + "'");
            }
            if (z.centroid.lat < -90.0 || z.centroid.lat > 90.0 || z.centroid.lon < -180.0 ||
                z.centroid.lon > 180.0) {
                throw ValidationError("zones", "invalid coordinates for '" + z.zone_id + "'");
            }
            if (z.population_weight < 0.0) {
                throw ValidationError("zones.population_weight", "negative weight");
            }
            weight_sum += z.population_weight;
        }
        if (weight_sum <= 0.0) {
            throw ValidationError("zones.population_weight",
                                  "total population weight must be positive");
        }
    }

    if (sc.carriers.empty()) {
        throw ValidationError("carriers", "at least one carrier is required");
    }
    double share_sum = 0.0;
    for (const Carrier& c : sc.carriers) {
        share_sum += c.market_share;
        if (c.success_rate <= 0.0 || c.success_rate > 1.0) {
            throw ValidationError("carriers.success_rate", "outside (0, 1]");
        }
        if (c.vehicle_capacity < 1) {
            throw ValidationError("carriers.vehicle_capacity", "must be >= 1");
        }
        if (!sc.zone_index(c.depot_zone)) {
            throw ValidationError("carriers.depot_zone", "unknown zone '" + c.depot_zone +
                                                             "' for carrier '" + c.carrier_id +
                                                             "'");
        }
    }
    if (std::abs(share_sum - 1.0) > 1e-9) {
        throw ValidationError("carriers.market_share",
                              "sum " + short_num(share_sum) + " != 1");
    }

    for (const LockerSpec& l : sc.lockers) {
        if (!sc.zone_index(l.zone)) {
            throw ValidationError("lockers.zone",
                                  "unknown zone '" + l.zone + "' for locker '" + l.locker_id + "'");
        }
    }

    if (sc.channel_catalog.empty()) {
        throw ValidationError("scenario.channel_catalog", "must not be empty");
    }
    {
        std::set<std::string> seen;
        bool has_home = false;
        for (const std::string& ch : sc.channel_catalog) {
            if (ch != kChannelHomeCourier && ch != kChannelParcelLocker &&
                ch != kChannelCrowdshipping) {
                throw ValidationError("scenario.channel_catalog", "unknown channel '" + ch + "'");
            }
            if (!seen.insert(ch).second) {
                throw ValidationError("scenario.channel_catalog", "duplicate channel '" + ch + "'");
            }
            has_home = has_home || ch == kChannelHomeCourier;
        }
        if (!has_home) {
            throw ValidationError("scenario.channel_catalog",
                                  "must contain home_courier, the universal fallback");
        }
    }
    if (sc.channel_index(kChannelParcelLocker) && sc.lockers.empty()) {
        throw ValidationError("lockers",
                              "channel catalog contains parcel_locker but no lockers are defined");
    }

    if (sc.has_marginals) {
        if (sc.population.size < 0) {
            throw ValidationError("population.size", "must be >= 0");
        }
        if (sc.schema.attributes.empty()) {
            throw ValidationError("marginals", "schema must define at least one attribute");
        }
    }
    {
        double wsum = 0.0;
        for (double w : sc.population.household_size_weights) {
            if (w < 0.0) {
                throw ValidationError("population.household_size_weights", "negative weight");
            }
            wsum += w;
        }
        if (sc.population.household_size_weights.empty() || wsum <= 0.0) {
            throw ValidationError("population.household_size_weights",
                                  "weights must be nonempty with positive sum");
        }
    }
    if (sc.population.ipf_tol <= 0.0) {
        throw ValidationError("population.ipf_tol", "must be > 0");
    }
    if (sc.population.ipf_max_iter < 1) {
        throw ValidationError("population.ipf_max_iter", "must be >= 1");
    }

    if (sc.demand.base_rate < 0.0) {
        throw ValidationError("demand_params.base_rate", "must be >= 0");
    }
    if (sc.demand.employment_multiplier < 0.0) {
        throw ValidationError("demand_params.employment_multiplier", "must be >= 0");
    }
    if (!sc.demand.income_multipliers.empty()) {
        if (!sc.income_attribute) {
            throw ValidationError("demand_params.income_multipliers",
                                  "given but the schema has no income attribute");
        }
        std::size_t cats = sc.schema.attributes[*sc.income_attribute].categories.size();
        if (sc.demand.income_multipliers.size() != cats) {
            throw ValidationError("demand_params.income_multipliers",
                                  "expected " + std::to_string(cats) + " entries, got " +
                                      std::to_string(sc.demand.income_multipliers.size()));
        }
        for (double m : sc.demand.income_multipliers) {
            if (m < 0.0) {
                throw ValidationError("demand_params.income_multipliers", "negative multiplier");
            }
        }
    }

    if (sc.humat.dissonance_threshold < 0.0 || sc.humat.dissonance_threshold > 1.0) {
        throw ValidationError("humat.dissonance_threshold", "outside [0, 1]");
    }
    if (sc.humat.learning_rate <= 0.0 || sc.humat.learning_rate > 1.0) {
        throw ValidationError("humat.learning_rate", "outside (0, 1]");
    }
    if (sc.humat.experience_eta < 0.0) {
        throw ValidationError("humat.experience_eta", "must be >= 0");
    }
    if (sc.humat.setup_max_rounds < 1) {
        throw ValidationError("humat.setup_max_rounds", "must be >= 1");
    }

    std::size_t alt_count = sc.channel_catalog.size();
    if (!sc.motives.motives.empty() &&
        sc.priors.cells.size() != sc.motives.motives.size() * alt_count) {
        throw ValidationError("priors", "prior matrix does not cover motives x catalog");
    }

    if (sc.crowdshipping.participation_rate < 0.0 || sc.crowdshipping.participation_rate > 1.0) {
        throw ValidationError("crowdshipping.participation_rate", "outside [0, 1]");
    }
    if (sc.crowdshipping.max_detour_km < 0.0) {
        throw ValidationError("crowdshipping.max_detour_km", "must be >= 0");
    }
    if (sc.crowdshipping.trip_capacity < 1) {
        throw ValidationError("crowdshipping.trip_capacity", "must be >= 1");
    }
    if (sc.channel_index(kChannelCrowdshipping) && sc.crowdshipping.participation_rate > 0.0 &&
        !sc.employment_attribute) {
        throw ValidationError("crowdshipping.participation_rate",
                              "crowdshipper trips need an employment attribute in the schema");
    }

    if (sc.locker_params.walk_max_km < 0.0) {
        throw ValidationError("lockers.walk_max_km", "must be >= 0");
    }

    if (sc.market.fixed_shares.size() != sc.channel_catalog.size()) {
        throw ValidationError("market.fixed_shares",
                              "expected " + std::to_string(sc.channel_catalog.size()) +
                                  " entries, got " +
                                  std::to_string(sc.market.fixed_shares.size()));
    }
    double fsum = 0.0;
    for (double s : sc.market.fixed_shares) {
        if (s < 0.0) {
            throw ValidationError("market.fixed_shares", "negative share");
        }
        fsum += s;
    }
    if (std::abs(fsum - 1.0) > 1e-9) {
        throw ValidationError("market.fixed_shares", "sum " + short_num(fsum) + " != 1");
    }
}

// ---------------------------------------------------------------------------
// save_scenario
// ---------------------------------------------------------------------------

namespace {

void write_csv_file(const std::filesystem::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
    std::string out = csv_line(header);
    for (const auto& row : rows) {
        out += csv_line(row);
    }
    write_text_file(path, out);
}

std::string toml_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string toml_string_array(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += toml_string(items[i]);
    }
    out += "]";
    return out;
}

std::string toml_double_array(const std::vector<double>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += format_double(items[i]);
    }
    out += "]";
    return out;
}

void emit_layer(std::ostringstream& out, const std::string& name, const LayerParams& p,
                const AttributeSchema& schema) {
    out << "[network." << name << "]\n";
    out << "k_mean = " << format_double(p.k_mean) << "\n";
    out << "influence = " << format_double(p.influence) << "\n";
    out << "spatial_weight = " << format_double(p.weights.spatial_weight) << "\n";
    std::vector<std::string> names;
    std::vector<double> weights;
    for (std::size_t i = 0; i < p.weights.attribute_weights.size(); ++i) {
        if (p.weights.attribute_weights[i] != 0.0) {
            names.push_back(schema.attributes[i].name);
            weights.push_back(p.weights.attribute_weights[i]);
        }
    }
    if (!names.empty()) {
        out << "attributes = " << toml_string_array(names) << "\n";
        out << "weights = " << toml_double_array(weights) << "\n";
    }
    out << "\n";
}

} // namespace

std::filesystem::path save_scenario(const ScenarioConfig& sc, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    {
        std::vector<std::vector<std::string>> rows;
        for (const Zone& z : sc.zones) {
            rows.push_back({z.zone_id, format_double(z.centroid.lat), format_double(z.centroid.lon),
                            format_double(z.population_weight)});
        }
        write_csv_file(dir / "zones.csv", {"zone_id", "lat", "lon", "population_weight"}, rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (const Carrier& c : sc.carriers) {
            rows.push_back({c.carrier_id, format_double(c.market_share),
                            format_double(c.success_rate), c.depot_zone,
                            std::to_string(c.vehicle_capacity)});
        }
        write_csv_file(dir / "carriers.csv",
                       {"carrier_id", "market_share", "success_rate", "depot_zone",
                        "vehicle_capacity"},
                       rows);
    }
    if (!sc.lockers.empty()) {
        std::vector<std::vector<std::string>> rows;
        for (const LockerSpec& l : sc.lockers) {
            rows.push_back({l.locker_id, l.zone, format_double(l.position.lat),
                            format_double(l.position.lon), std::to_string(l.capacity),
                            l.availability_pattern});
        }
        write_csv_file(dir / "lockers.csv",
                       {"locker_id", "zone", "lat", "lon", "capacity", "availability_pattern"},
                       rows);
    }
    if (sc.has_marginals) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t a = 0; a < sc.schema.attributes.size(); ++a) {
            const Attribute& attr = sc.schema.attributes[a];
            for (std::size_t c = 0; c < attr.categories.size(); ++c) {
                rows.push_back({attr.name, attr.categories[c],
                                format_double(sc.marginals.targets[a][c])});
            }
        }
        write_csv_file(dir / "marginals.csv", {"attribute", "category", "count"}, rows);
    }
    if (sc.population_file) {
        std::filesystem::copy_file(sc.base_dir / *sc.population_file, dir / *sc.population_file,
                                   std::filesystem::copy_options::overwrite_existing);
    }
    if (!sc.motives.motives.empty()) {
        std::vector<std::vector<std::string>> rows;
        for (const Motive& m : sc.motives.motives) {
            for (const ImportanceRule& r : m.rules) {
                rows.push_back({m.name, to_string(m.group), r.stratum_attribute,
                                r.stratum_category, format_double(r.mean), format_double(r.sd)});
            }
        }
        write_csv_file(dir / "motives.csv",
                       {"motive", "group", "stratum_attribute", "stratum_category",
                        "importance_mean", "importance_sd"},
                       rows);

        std::vector<std::vector<std::string>> prows;
        std::size_t alt_count = sc.channel_catalog.size();
        for (std::size_t m = 0; m < sc.motives.motives.size(); ++m) {
            for (std::size_t a = 0; a < alt_count; ++a) {
                const EvalPrior& p = sc.priors.cells[m * alt_count + a];
                prows.push_back({sc.motives.motives[m].name, sc.channel_catalog[a],
                                 format_double(p.mean), format_double(p.sd)});
            }
        }
        write_csv_file(dir / "priors.csv", {"motive", "alternative", "eval_mean", "eval_sd"},
                       prows);
    }

    std::ostringstream out;
    out << "[scenario]\n";
    out << "name = " << toml_string(sc.name) << "\n";
    out << "day_count = " << sc.day_count << "\n";
    out << "seed = " << sc.seed << "\n";
    out << "channel_catalog = " << toml_string_array(sc.channel_catalog) << "\n\n";

    out << "[files]\n";
    out << "zones = \"zones.csv\"\n";
    out << "carriers = \"carriers.csv\"\n";
    if (!sc.lockers.empty()) {
        out << "lockers = \"lockers.csv\"\n";
    }
    if (sc.has_marginals) {
        out << "marginals = \"marginals.csv\"\n";
    }
    if (sc.population_file) {
        out << "population = " << toml_string(*sc.population_file) << "\n";
    }
    if (!sc.motives.motives.empty()) {
        out << "motives = \"motives.csv\"\n";
        out << "priors = \"priors.csv\"\n";
    }
    out << "\n";

    if (sc.income_attribute || sc.employment_attribute) {
        out << "[schema]\n";
        if (sc.income_attribute) {
            out << "income_attribute = "
                << toml_string(sc.schema.attributes[*sc.income_attribute].name) << "\n";
        }
        if (sc.employment_attribute) {
            const Attribute& attr = sc.schema.attributes[*sc.employment_attribute];
            out << "employment_attribute = " << toml_string(attr.name) << "\n";
            out << "employed_category = " << toml_string(attr.categories[sc.employed_category])
                << "\n";
        }
        out << "\n";
    }

    out << "[population]\n";
    out << "size = " << sc.population.size << "\n";
    out << "household_size_weights = " << toml_double_array(sc.population.household_size_weights)
        << "\n";
    out << "ipf_tol = " << format_double(sc.population.ipf_tol) << "\n";
    out << "ipf_max_iter = " << sc.population.ipf_max_iter << "\n\n";

    out << "[demand_params]\n";
    out << "base_rate = " << format_double(sc.demand.base_rate) << "\n";
    if (!sc.demand.income_multipliers.empty()) {
        out << "income_multipliers = " << toml_double_array(sc.demand.income_multipliers) << "\n";
    }
    out << "employment_multiplier = " << format_double(sc.demand.employment_multiplier) << "\n";
    out << "success_in_allocation = " << (sc.demand.success_in_allocation ? "true" : "false")
        << "\n\n";

    out << "[network]\n";
    out << "spatial_half_km = " << format_double(sc.network.spatial_half_km) << "\n";
    out << "zone_adjacency_k = " << sc.network.zone_adjacency_k << "\n";
    out << "candidate_factor = " << sc.network.candidate_factor << "\n\n";
    emit_layer(out, "friendship", sc.network.friendship, sc.schema);
    emit_layer(out, "job", sc.network.job, sc.schema);
    emit_layer(out, "neighborhood", sc.network.neighborhood, sc.schema);

    out << "[humat]\n";
    out << "dissonance_threshold = " << format_double(sc.humat.dissonance_threshold) << "\n";
    out << "learning_rate = " << format_double(sc.humat.learning_rate) << "\n";
    out << "experience_eta = " << format_double(sc.humat.experience_eta) << "\n";
    out << "setup_max_rounds = " << sc.humat.setup_max_rounds << "\n\n";

    out << "[crowdshipping]\n";
    out << "participation_rate = " << format_double(sc.crowdshipping.participation_rate) << "\n";
    out << "max_detour_km = " << format_double(sc.crowdshipping.max_detour_km) << "\n";
    out << "trip_capacity = " << sc.crowdshipping.trip_capacity << "\n";
    out << "od_pattern = "
        << (sc.crowdshipping.od_pattern == OdPattern::depot_weighted ? "\"depot_weighted\""
                                                                     : "\"population\"")
        << "\n\n";

    out << "[lockers]\n";
    out << "walk_max_km = " << format_double(sc.locker_params.walk_max_km) << "\n\n";

    out << "[market]\n";
    out << "fixed_shares = " << toml_double_array(sc.market.fixed_shares) << "\n";

    std::filesystem::path file = dir / ("scenario." + sc.name + ".toml");
    write_text_file(file, out.str());
    return file;
}

} // namespace lmsim
