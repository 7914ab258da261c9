#include "lmsim/csv.hpp"
#include "lmsim/errors.hpp"
#include "lmsim/json_writer.hpp"
#include "lmsim/orchestrator.hpp"
#include "lmsim/util.hpp"

#include <json.hpp>

#include <map>

namespace lmsim {

namespace {

// Raw tokens are kept so values copied into the summary stay byte-identical
// to their CSV source.
struct Token {
    std::string raw;
    double value{0.0};
};

Token token_at(const CsvTable& t, std::size_t row, std::size_t col) {
    Token tok;
    tok.raw = t.cell(row, col);
    auto v = parse_double(tok.raw);
    if (!v) {
        throw ParseError(t.source, static_cast<int>(row + 2),
                         "expected a number, got '" + tok.raw + "'");
    }
    tok.value = *v;
    return tok;
}

} // namespace

std::filesystem::path write_report(const std::filesystem::path& run_dir) {
    std::filesystem::path manifest_path = run_dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path)) {
        throw MissingArtifact("no manifest.json in " + run_dir.string());
    }
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_text_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(manifest_path.string(), 1, e.what());
    }

    auto require_file = [&](const std::string& name) {
        std::filesystem::path p = run_dir / name;
        if (!std::filesystem::exists(p)) {
            throw MissingArtifact("missing " + name + " in " + run_dir.string());
        }
        return read_csv(p);
    };

    CsvTable demand = require_file("demand_kpis.csv");
    CsvTable market = require_file("market_kpis.csv");
    CsvTable scheduling = require_file("scheduling_kpis.csv");
    bool freight_only = manifest.value("freight_only", false);

    JsonWriter out;
    out.begin_object();
    out.key("scenario").value(manifest.value("scenario", std::string()));
    out.key("seed").value(static_cast<std::uint64_t>(manifest.value("seed", 0ULL)));
    out.key("days").value(static_cast<long long>(manifest.value("days", 0)));
    out.key("freight_only").value(freight_only);

    // Demand: totals per day and per carrier from demand_kpis.csv.
    {
        std::size_t c_day = demand.column("day");
        std::size_t c_carrier = demand.column("carrier");
        std::size_t c_parcels = demand.column("parcels");
        long long total = 0;
        std::map<long long, long long> per_day;
        std::map<std::string, long long> per_carrier;
        for (std::size_t r = 0; r < demand.rows.size(); ++r) {
            long long n = static_cast<long long>(token_at(demand, r, c_parcels).value);
            total += n;
            per_day[static_cast<long long>(token_at(demand, r, c_day).value)] += n;
            per_carrier[demand.cell(r, c_carrier)] += n;
        }
        out.key("demand").begin_object();
        out.key("total_parcels").value(total);
        out.key("per_day").begin_array();
        for (const auto& [day, n] : per_day) {
            out.begin_object();
            out.key("day").value(day);
            out.key("parcels").value(n);
            out.end_object();
        }
        out.end_array();
        out.key("per_carrier").begin_object();
        for (const auto& [carrier, n] : per_carrier) {
            out.key(carrier).value(n);
        }
        out.end_object();
        out.end_object();
    }

    // Market: per-channel totals plus the per-day locker utilization and
    // crowdshipping detour, copied verbatim.
    {
        std::size_t c_day = market.column("day");
        std::size_t c_channel = market.column("channel");
        std::size_t c_tagged = market.column("tagged");
        std::size_t c_fulfilled = market.column("fulfilled");
        std::size_t c_fallbacks = market.column("fallbacks");
        std::size_t c_detour = market.column("crowdship_detour_km");
        std::size_t c_util = market.column("locker_utilization");

        struct ChannelTotals {
            long long tagged{0};
            long long fulfilled{0};
            long long fallbacks{0};
        };
        std::map<std::string, ChannelTotals> channels;
        std::map<long long, std::pair<Token, Token>> per_day; // detour, utilization
        for (std::size_t r = 0; r < market.rows.size(); ++r) {
            ChannelTotals& ct = channels[market.cell(r, c_channel)];
            ct.tagged += static_cast<long long>(token_at(market, r, c_tagged).value);
            ct.fulfilled += static_cast<long long>(token_at(market, r, c_fulfilled).value);
            ct.fallbacks += static_cast<long long>(token_at(market, r, c_fallbacks).value);
            long long day = static_cast<long long>(token_at(market, r, c_day).value);
            per_day[day] = {token_at(market, r, c_detour), token_at(market, r, c_util)};
        }
        out.key("market").begin_object();
        out.key("channels").begin_object();
        for (const auto& [channel, ct] : channels) {
            out.key(channel).begin_object();
            out.key("tagged").value(ct.tagged);
            out.key("fulfilled").value(ct.fulfilled);
            out.key("fallbacks").value(ct.fallbacks);
            out.end_object();
        }
        out.end_object();
        out.key("per_day").begin_array();
        for (const auto& [day, tokens] : per_day) {
            out.begin_object();
            out.key("day").value(day);
            out.key("crowdship_detour_km").raw_number(tokens.first.raw);
            out.key("locker_utilization").raw_number(tokens.second.raw);
            out.end_object();
        }
        out.end_array();
        out.end_object();
    }

    // Scheduling totals.
    {
        std::size_t c_tours = scheduling.column("tour_count");
        std::size_t c_km = scheduling.column("total_km");
        std::size_t c_failed = scheduling.column("failed");
        long long tours = 0;
        long long failed = 0;
        double km = 0.0;
        for (std::size_t r = 0; r < scheduling.rows.size(); ++r) {
            tours += static_cast<long long>(token_at(scheduling, r, c_tours).value);
            failed += static_cast<long long>(token_at(scheduling, r, c_failed).value);
            km += token_at(scheduling, r, c_km).value;
        }
        out.key("scheduling").begin_object();
        out.key("tour_count").value(tours);
        out.key("total_km").value(km);
        out.key("failed").value(failed);
        out.end_object();
    }

    // Final choice shares, copied verbatim from humat_kpis.csv.
    if (!freight_only) {
        CsvTable humat = require_file("humat_kpis.csv");
        std::size_t c_grouping = humat.column("grouping");
        std::size_t c_alt = humat.column("alternative");
        std::size_t c_share = humat.column("share");
        out.key("humat").begin_object();
        out.key("final_shares").begin_object();
        for (std::size_t r = 0; r < humat.rows.size(); ++r) {
            if (humat.cell(r, c_grouping) == "all") {
                out.key(humat.cell(r, c_alt)).raw_number(token_at(humat, r, c_share).raw);
            }
        }
        out.end_object();
        out.end_object();
    }

    out.end_object();
    std::filesystem::path summary_path = run_dir / "summary.json";
    write_text_file(summary_path, out.str());
    return summary_path;
}

} // namespace lmsim
