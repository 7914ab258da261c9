#include "lmsim/popsynth.hpp"

#include "lmsim/csv.hpp"
#include "lmsim/errors.hpp"
#include "lmsim/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

namespace lmsim {

JointTable JointTable::uniform(const AttributeSchema& schema, double value) {
    JointTable t;
    for (const Attribute& a : schema.attributes) {
        t.dims.push_back(a.categories.size());
    }
    t.cells.assign(t.cell_count(), value);
    return t;
}

std::size_t JointTable::cell_count() const {
    std::size_t n = 1;
    for (std::size_t d : dims) {
        n *= d;
    }
    return dims.empty() ? 0 : n;
}

double JointTable::sum() const {
    double s = 0.0;
    for (double c : cells) {
        s += c;
    }
    return s;
}

std::vector<std::size_t> JointTable::unravel(std::size_t flat) const {
    std::vector<std::size_t> idx(dims.size(), 0);
    for (std::size_t a = dims.size(); a-- > 0;) {
        idx[a] = flat % dims[a];
        flat /= dims[a];
    }
    return idx;
}

// ---------------------------------------------------------------------------
// IPF
// ---------------------------------------------------------------------------

namespace {

// Marginal sums of `cells` along attribute `axis`.
void marginal_of(const JointTable& t, std::size_t axis, std::vector<double>& out) {
    out.assign(t.dims[axis], 0.0);
    std::size_t inner = 1;
    for (std::size_t a = axis + 1; a < t.dims.size(); ++a) {
        inner *= t.dims[a];
    }
    std::size_t block = inner * t.dims[axis];
    for (std::size_t i = 0; i < t.cells.size(); ++i) {
        std::size_t cat = (i % block) / inner;
        out[cat] += t.cells[i];
    }
}

} // namespace

IpfResult fit_ipf(const JointTable& seed, const MarginalTable& marginals, double tol,
                  int max_iter) {
    if (marginals.targets.size() != seed.dims.size()) {
        throw InconsistentMarginals("marginal table covers " +
                                    std::to_string(marginals.targets.size()) +
                                    " attributes, seed table has " +
                                    std::to_string(seed.dims.size()));
    }
    for (std::size_t a = 0; a < seed.dims.size(); ++a) {
        if (marginals.targets[a].size() != seed.dims[a]) {
            throw InconsistentMarginals("attribute " + std::to_string(a) +
                                        " has mismatched category count");
        }
    }
    double total = 0.0;
    for (double v : marginals.targets.front()) {
        total += v;
    }
    for (std::size_t a = 0; a < marginals.targets.size(); ++a) {
        double sum = 0.0;
        for (double v : marginals.targets[a]) {
            if (v < 0.0) {
                throw InconsistentMarginals("negative marginal target");
            }
            sum += v;
        }
        if (std::abs(sum - total) > 1e-6 * std::max(1.0, total)) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "marginal totals differ: %.6g vs %.6g", sum, total);
            throw InconsistentMarginals(buf);
        }
    }

    IpfResult result;
    result.table = seed;
    std::vector<double> current;

    for (int iter = 1; iter <= max_iter; ++iter) {
        for (std::size_t axis = 0; axis < result.table.dims.size(); ++axis) {
            marginal_of(result.table, axis, current);
            std::size_t inner = 1;
            for (std::size_t a = axis + 1; a < result.table.dims.size(); ++a) {
                inner *= result.table.dims[a];
            }
            std::size_t block = inner * result.table.dims[axis];
            for (std::size_t i = 0; i < result.table.cells.size(); ++i) {
                std::size_t cat = (i % block) / inner;
                double cur = current[cat];
                double target = marginals.targets[axis][cat];
                if (cur > 0.0) {
                    result.table.cells[i] *= target / cur;
                } else if (target == 0.0) {
                    result.table.cells[i] = 0.0;
                }
                // cur == 0 with target > 0 cannot be fixed by scaling; the
                // residual check below reports it as non-convergence.
            }
        }
        result.iterations = iter;

        double residual = 0.0;
        for (std::size_t axis = 0; axis < result.table.dims.size(); ++axis) {
            marginal_of(result.table, axis, current);
            for (std::size_t c = 0; c < current.size(); ++c) {
                residual = std::max(residual,
                                    std::abs(current[c] - marginals.targets[axis][c]));
            }
        }
        result.max_residual = residual;
        if (residual <= tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace {

std::string person_label(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "p%06llu", static_cast<unsigned long long>(index + 1));
    return buf;
}

std::string household_label(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "h%06llu", static_cast<unsigned long long>(index + 1));
    return buf;
}

} // namespace

Population sample_population(const JointTable& joint, const AttributeSchema& schema,
                             std::size_t n, std::span<const Zone> zones,
                             std::span<const double> household_size_weights,
                             std::optional<std::size_t> income_attribute, RandomStream& rng) {
    if (joint.dims.size() != schema.attributes.size()) {
        throw SchemaMismatch("joint table covers " + std::to_string(joint.dims.size()) +
                             " attributes, schema has " +
                             std::to_string(schema.attributes.size()));
    }
    Population pop;
    if (n == 0) {
        return pop;
    }

    // Persons: one categorical draw over the joint cells each.
    pop.persons.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t cell = rng.categorical(joint.cells);
        std::vector<std::size_t> cats = joint.unravel(cell);
        PersonRecord person;
        person.person_id = person_label(i);
        person.categories.assign(cats.begin(), cats.end());
        pop.persons.push_back(std::move(person));
    }

    // Households: sample sizes and fill sequentially from the pool. The
    // pool order is i.i.d., so sequential filling is a draw without
    // replacement.
    std::size_t next = 0;
    while (next < n) {
        std::size_t size = rng.categorical(household_size_weights) + 1;
        size = std::min(size, n - next);
        HouseholdRecord hh;
        hh.household_id = household_label(pop.households.size());
        for (std::size_t k = 0; k < size; ++k) {
            hh.members.push_back(static_cast<int>(next + k));
        }
        pop.households.push_back(std::move(hh));
        next += size;
    }

    // Zones proportional to population weight.
    std::vector<double> zone_weights;
    zone_weights.reserve(zones.size());
    for (const Zone& z : zones) {
        zone_weights.push_back(z.population_weight);
    }
    for (std::size_t h = 0; h < pop.households.size(); ++h) {
        HouseholdRecord& hh = pop.households[h];
        hh.zone = static_cast<int>(rng.categorical(zone_weights));
        for (int member : hh.members) {
            pop.persons[static_cast<std::size_t>(member)].household = static_cast<int>(h);
            pop.persons[static_cast<std::size_t>(member)].zone = hh.zone;
        }
        // Household income is the decision-maker's income category.
        if (income_attribute) {
            hh.income_category =
                pop.persons[static_cast<std::size_t>(hh.decision_maker())].categories
                    [*income_attribute];
        }
    }
    return pop;
}

Population synthesize_population(const ScenarioConfig& config, RandomStream& rng) {
    if (!config.has_marginals) {
        throw ValidationError("population", "scenario has no marginals to synthesize from");
    }
    JointTable seed = JointTable::uniform(config.schema);
    IpfResult fit = fit_ipf(seed, config.marginals, config.population.ipf_tol,
                            config.population.ipf_max_iter);
    if (!fit.converged) {
        throw NotConverged("IPF did not reach tolerance " +
                               format_double(config.population.ipf_tol) + " in " +
                               std::to_string(config.population.ipf_max_iter) +
                               " iterations (residual " + format_double(fit.max_residual) + ")",
                           fit.max_residual);
    }
    return sample_population(fit.table, config.schema,
                             static_cast<std::size_t>(config.population.size), config.zones,
                             config.population.household_size_weights, config.income_attribute,
                             rng);
}

// ---------------------------------------------------------------------------
// CSV ingestion and emission
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kPersonFixedColumns[] = {"person_id", "household_id", "zone_id"};

std::vector<std::string> attribute_columns(const CsvTable& t) {
    std::vector<std::string> out;
    for (const std::string& h : t.header) {
        bool fixed = false;
        for (const char* f : kPersonFixedColumns) {
            fixed = fixed || h == f;
        }
        if (!fixed) {
            out.push_back(h);
        }
    }
    return out;
}

} // namespace

AttributeSchema schema_from_population_csv(const std::filesystem::path& path) {
    CsvTable t = read_csv(path);
    for (const char* f : kPersonFixedColumns) {
        t.column(f); // presence check
    }
    AttributeSchema schema;
    for (const std::string& name : attribute_columns(t)) {
        std::size_t col = t.column(name);
        std::set<std::string> values;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            values.insert(t.cell(r, col));
        }
        if (values.size() < 2) {
            throw ValidationError("population." + name,
                                  "attribute needs >= 2 observed categories");
        }
        Attribute attr;
        attr.name = name;
        attr.categories.assign(values.begin(), values.end());
        schema.attributes.push_back(std::move(attr));
    }
    return schema;
}

Population load_population(const std::filesystem::path& path, const ScenarioConfig& config) {
    CsvTable t = read_csv(path);
    std::size_t c_person = t.column("person_id");
    std::size_t c_household = t.column("household_id");
    std::size_t c_zone = t.column("zone_id");

    std::vector<std::size_t> attr_cols;
    for (const Attribute& a : config.schema.attributes) {
        attr_cols.push_back(t.column(a.name));
    }

    struct RawPerson {
        std::string id;
        std::string household;
        int zone;
        std::vector<int> categories;
    };
    std::vector<RawPerson> raw;
    raw.reserve(t.rows.size());
    std::set<std::string> ids;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        RawPerson p;
        p.id = t.cell(r, c_person);
        p.household = t.cell(r, c_household);
        if (!ids.insert(p.id).second) {
            throw ValidationError("population.person_id", "duplicate id '" + p.id + "'");
        }
        auto zi = config.zone_index(t.cell(r, c_zone));
        if (!zi) {
            throw ValidationError("population.zone_id",
                                  "unknown zone '" + t.cell(r, c_zone) + "' for '" + p.id + "'");
        }
        p.zone = static_cast<int>(*zi);
        for (std::size_t a = 0; a < attr_cols.size(); ++a) {
            auto ci = config.schema.category_index(a, t.cell(r, attr_cols[a]));
            if (!ci) {
                throw ValidationError("population." + config.schema.attributes[a].name,
                                      "unknown category '" + t.cell(r, attr_cols[a]) + "' for '" +
                                          p.id + "'");
            }
            p.categories.push_back(static_cast<int>(*ci));
        }
        raw.push_back(std::move(p));
    }

    std::sort(raw.begin(), raw.end(),
              [](const RawPerson& a, const RawPerson& b) { return a.id < b.id; });

    Population pop;
    pop.persons.reserve(raw.size());
    std::map<std::string, int> household_index;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const RawPerson& p = raw[i];
        auto [it, inserted] =
            household_index.emplace(p.household, static_cast<int>(pop.households.size()));
        if (inserted) {
            HouseholdRecord hh;
            hh.household_id = p.household;
            hh.zone = p.zone;
            pop.households.push_back(std::move(hh));
        }
        int h = it->second;
        if (pop.households[static_cast<std::size_t>(h)].zone != p.zone) {
            throw ValidationError("population.zone_id",
                                  "household '" + p.household + "' spans multiple zones");
        }
        pop.households[static_cast<std::size_t>(h)].members.push_back(static_cast<int>(i));

        PersonRecord person;
        person.person_id = p.id;
        person.household = h;
        person.zone = p.zone;
        person.categories = p.categories;
        pop.persons.push_back(std::move(person));
    }
    for (HouseholdRecord& hh : pop.households) {
        if (config.income_attribute) {
            hh.income_category =
                pop.persons[static_cast<std::size_t>(hh.decision_maker())].categories
                    [*config.income_attribute];
        }
    }
    return pop;
}

void write_population_csv(const Population& pop, const ScenarioConfig& config,
                          const std::filesystem::path& persons_path,
                          const std::filesystem::path& households_path) {
    std::vector<std::string> header = {"person_id", "household_id", "zone_id"};
    for (const Attribute& a : config.schema.attributes) {
        header.push_back(a.name);
    }
    std::string out = csv_line(header);
    for (const PersonRecord& p : pop.persons) {
        std::vector<std::string> row = {
            p.person_id,
            pop.households[static_cast<std::size_t>(p.household)].household_id,
            config.zones[static_cast<std::size_t>(p.zone)].zone_id,
        };
        for (std::size_t a = 0; a < p.categories.size(); ++a) {
            row.push_back(
                config.schema.attributes[a].categories[static_cast<std::size_t>(p.categories[a])]);
        }
        out += csv_line(row);
    }
    write_text_file(persons_path, out);

    std::string hout =
        csv_line({"household_id", "zone_id", "income_band", "size", "members"});
    for (const HouseholdRecord& hh : pop.households) {
        std::string income = "";
        if (hh.income_category >= 0 && config.income_attribute) {
            income = config.schema.attributes[*config.income_attribute]
                         .categories[static_cast<std::size_t>(hh.income_category)];
        }
        std::vector<std::string> member_ids;
        for (int m : hh.members) {
            member_ids.push_back(pop.persons[static_cast<std::size_t>(m)].person_id);
        }
        hout += csv_line({hh.household_id, config.zones[static_cast<std::size_t>(hh.zone)].zone_id,
                          income, std::to_string(hh.members.size()), join(member_ids, ';')});
    }
    write_text_file(households_path, hout);
}

} // namespace lmsim
