#include "lmsim/humat.hpp"

#include "lmsim/csv.hpp"
#include "lmsim/errors.hpp"
#include "lmsim/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace lmsim {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }
double clamp_eval(double v) { return std::min(1.0, std::max(-1.0, v)); }

std::size_t alt_index_checked(std::span<const std::string> catalog, std::string_view name) {
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (catalog[i] == name) {
            return i;
        }
    }
    throw UnknownAlternative("alternative '" + std::string(name) + "' not in the channel catalog");
}

// Importance of one motive for one person: the rule matching the person's
// stratum, "all" rules as fallback. Throws MissingStratum when neither
// exists.
const ImportanceRule& rule_for(const Motive& motive, const PersonRecord& person,
                               const AttributeSchema& schema) {
    const ImportanceRule* fallback = nullptr;
    for (const ImportanceRule& rule : motive.rules) {
        if (rule.stratum_attribute == "all") {
            fallback = &rule;
            continue;
        }
        auto attr = schema.index_of(rule.stratum_attribute);
        if (!attr) {
            continue;
        }
        auto cat = schema.category_index(*attr, rule.stratum_category);
        if (cat && person.categories[*attr] == static_cast<int>(*cat)) {
            return rule;
        }
    }
    if (fallback != nullptr) {
        return *fallback;
    }
    throw MissingStratum("motive '" + motive.name + "' has no importance rule for person '" +
                         person.person_id + "'");
}

} // namespace

std::vector<HumatAgent> init_agents(std::span<const PersonRecord> persons,
                                    const AttributeSchema& schema, const MotiveSpec& motives,
                                    const EvalPriors& priors,
                                    std::span<const std::string> catalog, RandomStream& rng) {
    std::size_t motive_count = motives.motives.size();
    std::size_t alt_count = catalog.size();
    std::vector<HumatAgent> agents;
    agents.reserve(persons.size());

    for (std::size_t i = 0; i < persons.size(); ++i) {
        HumatAgent agent;
        agent.person = static_cast<int>(i);
        agent.importances.resize(motive_count);
        agent.evaluations.resize(motive_count * alt_count);

        for (std::size_t m = 0; m < motive_count; ++m) {
            const ImportanceRule& rule = rule_for(motives.motives[m], persons[i], schema);
            double w = rule.sd > 0.0 ? rng.normal(rule.mean, rule.sd) : rule.mean;
            agent.importances[m] = clamp01(w);
        }
        for (std::size_t m = 0; m < motive_count; ++m) {
            for (std::size_t a = 0; a < alt_count; ++a) {
                const EvalPrior& prior = priors.cells[m * alt_count + a];
                double e = prior.sd > 0.0 ? rng.normal(prior.mean, prior.sd) : prior.mean;
                agent.eval(m, a, alt_count) = clamp_eval(e);
            }
        }
        agent.persuasion = rng.uniform01();
        refresh_caches(agent, alt_count);
        choose(agent);
        agents.push_back(std::move(agent));
    }
    return agents;
}

double satisfaction(const HumatAgent& agent, std::size_t alternative, std::size_t alt_count) {
    double weighted = 0.0;
    double weight_sum = 0.0;
    for (std::size_t m = 0; m < agent.importances.size(); ++m) {
        weighted += agent.importances[m] * agent.eval(m, alternative, alt_count);
        weight_sum += agent.importances[m];
    }
    if (weight_sum == 0.0) {
        return 0.0;
    }
    return weighted / weight_sum;
}

double dissonance(const HumatAgent& agent, std::size_t alternative, std::size_t alt_count) {
    double positive = 0.0;
    double negative = 0.0;
    for (std::size_t m = 0; m < agent.importances.size(); ++m) {
        double e = agent.eval(m, alternative, alt_count);
        if (e > 0.0) {
            positive += agent.importances[m] * e;
        } else if (e < 0.0) {
            negative += agent.importances[m] * (-e);
        }
    }
    double total = positive + negative;
    if (total == 0.0) {
        return 0.0;
    }
    return 2.0 * std::min(positive, negative) / total;
}

double satisfaction(const HumatAgent& agent, std::span<const std::string> catalog,
                    std::string_view alternative) {
    return satisfaction(agent, alt_index_checked(catalog, alternative), catalog.size());
}

double dissonance(const HumatAgent& agent, std::span<const std::string> catalog,
                  std::string_view alternative) {
    return dissonance(agent, alt_index_checked(catalog, alternative), catalog.size());
}

void refresh_caches(HumatAgent& agent, std::size_t alt_count) {
    agent.satisfaction_cache.resize(alt_count);
    agent.dissonance_cache.resize(alt_count);
    for (std::size_t a = 0; a < alt_count; ++a) {
        agent.satisfaction_cache[a] = satisfaction(agent, a, alt_count);
        agent.dissonance_cache[a] = dissonance(agent, a, alt_count);
    }
}

std::size_t choose(HumatAgent& agent) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < agent.satisfaction_cache.size(); ++a) {
        if (agent.satisfaction_cache[a] > agent.satisfaction_cache[best]) {
            best = a;
        } else if (agent.satisfaction_cache[a] == agent.satisfaction_cache[best] &&
                   agent.dissonance_cache[a] < agent.dissonance_cache[best]) {
            best = a;
        }
    }
    agent.choice = static_cast<int>(best);
    return best;
}

DiffusionSettings diffusion_settings(const ScenarioConfig& config) {
    DiffusionSettings s;
    s.dissonance_threshold = config.humat.dissonance_threshold;
    s.learning_rate = config.humat.learning_rate;
    s.layer_influence = {config.network.friendship.influence, config.network.job.influence,
                         config.network.neighborhood.influence};
    return s;
}

namespace {

struct AlterRef {
    int person;
    double influence; // max layer influence when connected on several layers
};

std::vector<AlterRef> union_alters(const SocialNetwork& network, std::size_t person,
                                   const DiffusionSettings& settings) {
    std::map<int, double> merged;
    for (std::size_t l = 0; l < 3; ++l) {
        for (int alter : network.layers[l].adjacency[person]) {
            double influence = settings.layer_influence[l];
            auto [it, inserted] = merged.emplace(alter, influence);
            if (!inserted) {
                it->second = std::max(it->second, influence);
            }
        }
    }
    std::vector<AlterRef> out;
    out.reserve(merged.size());
    for (auto [p, infl] : merged) {
        out.push_back({p, infl});
    }
    return out;
}

// Most persuasive alter, ties broken by lower person index.
const HumatAgent* most_persuasive(std::span<const HumatAgent> agents,
                                  const std::vector<AlterRef>& alters) {
    const HumatAgent* best = nullptr;
    for (const AlterRef& ref : alters) {
        const HumatAgent& cand = agents[static_cast<std::size_t>(ref.person)];
        if (best == nullptr || cand.persuasion > best->persuasion) {
            best = &cand;
        }
    }
    return best;
}

// e <- (1 - lambda) e + lambda * strength * e_source for every motive's
// evaluation of one alternative.
void adopt_row(HumatAgent& target, const HumatAgent& source, std::size_t alternative,
               std::size_t alt_count, double lambda, double strength) {
    for (std::size_t m = 0; m < target.importances.size(); ++m) {
        double& e = target.eval(m, alternative, alt_count);
        e = clamp_eval((1.0 - lambda) * e + lambda * strength * source.eval(m, alternative, alt_count));
    }
}

bool is_dissonant(const HumatAgent& agent, const DiffusionSettings& settings) {
    return agent.dissonance_cache[static_cast<std::size_t>(agent.choice)] >=
           settings.dissonance_threshold;
}

bool is_dissatisfied(const HumatAgent& agent) {
    double chosen = agent.satisfaction_cache[static_cast<std::size_t>(agent.choice)];
    for (std::size_t a = 0; a < agent.satisfaction_cache.size(); ++a) {
        if (agent.satisfaction_cache[a] > chosen) {
            return true;
        }
    }
    return false;
}

} // namespace

bool inquire(HumatAgent& agent, const SocialNetwork& network, std::span<const HumatAgent> agents,
             std::size_t alternative, const DiffusionSettings& settings) {
    std::vector<AlterRef> refs =
        union_alters(network, static_cast<std::size_t>(agent.person), settings);
    const HumatAgent* source = most_persuasive(agents, refs);
    if (source == nullptr) {
        return false; // no alters to ask
    }
    std::size_t alt_count = agent.satisfaction_cache.size();
    adopt_row(agent, *source, alternative, alt_count, settings.learning_rate, source->persuasion);
    refresh_caches(agent, alt_count);
    return true;
}

int signal(const HumatAgent& agent, const SocialNetwork& network, std::span<HumatAgent> agents,
           const DiffusionSettings& settings) {
    std::vector<AlterRef> refs =
        union_alters(network, static_cast<std::size_t>(agent.person), settings);
    std::size_t alt_count = agent.satisfaction_cache.size();
    std::size_t alternative = static_cast<std::size_t>(agent.choice);
    for (const AlterRef& ref : refs) {
        HumatAgent& alter = agents[static_cast<std::size_t>(ref.person)];
        adopt_row(alter, agent, alternative, alt_count, settings.learning_rate,
                  agent.persuasion * ref.influence);
        refresh_caches(alter, alt_count);
    }
    return static_cast<int>(refs.size());
}

int diffusion_round(std::vector<HumatAgent>& agents, const SocialNetwork& network,
                    const DiffusionSettings& settings, std::size_t alt_count,
                    RandomStream& rng, std::span<const int> process_order) {
    (void)rng; // classification and updates are deterministic
    std::size_t n = agents.size();
    if (n == 0) {
        return 0;
    }

    const std::vector<HumatAgent> snapshot = agents;

    enum class Role { content, inquiring, signaling };
    std::vector<Role> roles(n, Role::content);

    auto classify = [&](std::size_t i) {
        const HumatAgent& agent = snapshot[i];
        if (!is_dissonant(agent, settings)) {
            roles[i] = Role::content;
        } else if (is_dissatisfied(agent)) {
            roles[i] = Role::inquiring;
        } else {
            roles[i] = Role::signaling;
        }
    };
    if (process_order.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            classify(i);
        }
    } else {
        for (int i : process_order) {
            classify(static_cast<std::size_t>(i));
        }
    }

    // All sources are read from the snapshot and each receiver applies its
    // updates in canonical order (own inquiry first, then incoming signals
    // by ascending signaler index), so the result does not depend on the
    // processing order above.
    for (std::size_t i = 0; i < n; ++i) {
        HumatAgent& agent = agents[i];
        if (roles[i] == Role::inquiring) {
            std::vector<AlterRef> refs = union_alters(network, i, settings);
            const HumatAgent* source = most_persuasive(snapshot, refs);
            if (source != nullptr) {
                adopt_row(agent, *source, static_cast<std::size_t>(snapshot[i].choice), alt_count,
                          settings.learning_rate, source->persuasion);
            }
        }
        std::vector<AlterRef> refs = union_alters(network, i, settings);
        for (const AlterRef& ref : refs) {
            std::size_t s = static_cast<std::size_t>(ref.person);
            if (roles[s] != Role::signaling) {
                continue;
            }
            const HumatAgent& signaler = snapshot[s];
            adopt_row(agent, signaler, static_cast<std::size_t>(signaler.choice), alt_count,
                      settings.learning_rate, signaler.persuasion * ref.influence);
        }
    }

    int changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        refresh_caches(agents[i], alt_count);
        choose(agents[i]);
        if (agents[i].choice != snapshot[i].choice) {
            ++changed;
        }
    }
    return changed;
}

DiffusionOutcome run_diffusion(std::vector<HumatAgent>& agents, const SocialNetwork& network,
                               const DiffusionSettings& settings, std::size_t alt_count,
                               int max_rounds, RandomStream& rng) {
    DiffusionOutcome out;
    for (int round = 1; round <= max_rounds; ++round) {
        int changed = diffusion_round(agents, network, settings, alt_count, rng);
        out.rounds_run = round;
        if (changed == 0) {
            out.converged = true;
            break;
        }
    }
    return out;
}

SatisfactionKpi choice_shares(std::span<const HumatAgent> agents,
                              std::span<const PersonRecord> persons,
                              const AttributeSchema& schema,
                              std::span<const std::string> catalog, std::string_view grouping) {
    std::vector<std::string> labels(agents.size());
    if (grouping == "all") {
        for (std::size_t i = 0; i < agents.size(); ++i) {
            labels[i] = "all";
        }
    } else {
        auto attr = schema.index_of(grouping);
        if (!attr) {
            throw UnknownAttribute("no attribute '" + std::string(grouping) + "' in the schema");
        }
        for (std::size_t i = 0; i < agents.size(); ++i) {
            const PersonRecord& p = persons[static_cast<std::size_t>(agents[i].person)];
            labels[i] =
                schema.attributes[*attr].categories[static_cast<std::size_t>(p.categories[*attr])];
        }
    }
    return choice_shares_by_labels(agents, labels, grouping, catalog);
}

SatisfactionKpi choice_shares_by_labels(std::span<const HumatAgent> agents,
                                        std::span<const std::string> labels,
                                        std::string_view grouping,
                                        std::span<const std::string> catalog) {
    std::size_t alt_count = catalog.size();
    struct Acc {
        long long n{0};
        std::vector<long long> chosen;
        std::vector<double> sat_sum;
    };
    std::map<std::string, Acc> groups;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        Acc& acc = groups[labels[i]];
        if (acc.chosen.empty()) {
            acc.chosen.assign(alt_count, 0);
            acc.sat_sum.assign(alt_count, 0.0);
        }
        ++acc.n;
        ++acc.chosen[static_cast<std::size_t>(agents[i].choice)];
        for (std::size_t a = 0; a < alt_count; ++a) {
            acc.sat_sum[a] += agents[i].satisfaction_cache[a];
        }
    }

    SatisfactionKpi kpi;
    for (const auto& [category, acc] : groups) {
        for (std::size_t a = 0; a < alt_count; ++a) {
            KpiRow row;
            row.grouping = std::string(grouping);
            row.category = category;
            row.alternative = catalog[a];
            row.agents = acc.n;
            row.share = static_cast<double>(acc.chosen[a]) / static_cast<double>(acc.n);
            row.mean_satisfaction = acc.sat_sum[a] / static_cast<double>(acc.n);
            kpi.rows.push_back(std::move(row));
        }
    }
    return kpi;
}

void apply_experience(HumatAgent& agent, const DeliveryOutcome& outcome,
                      const MotiveSpec& motives, std::size_t alt_count, double eta,
                      double walk_max_km) {
    bool negative = !outcome.success || outcome.locker_distance_km > walk_max_km;
    double nudge = negative ? -eta : eta;
    std::size_t channel = static_cast<std::size_t>(outcome.channel);
    for (std::size_t m = 0; m < motives.motives.size(); ++m) {
        if (motives.motives[m].group != MotiveGroup::experiential) {
            continue;
        }
        double& e = agent.eval(m, channel, alt_count);
        e = clamp_eval(e + nudge);
    }
    refresh_caches(agent, alt_count);
}

void write_kpi_csv(const SatisfactionKpi& kpi, const std::filesystem::path& path) {
    std::string out = csv_line(
        {"grouping", "category", "alternative", "agents", "share", "mean_satisfaction"});
    for (const KpiRow& row : kpi.rows) {
        out += csv_line({row.grouping, row.category, row.alternative, std::to_string(row.agents),
                         format_double(row.share), format_double(row.mean_satisfaction)});
    }
    write_text_file(path, out);
}

} // namespace lmsim
