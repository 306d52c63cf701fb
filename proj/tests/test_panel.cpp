#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "rpkit/panel.hpp"
#include "rpkit/synth.hpp"
#include "test_util.hpp"

using namespace rpkit;

namespace {

IngestResult ingest_str(const std::string& csv, const CleaningConfig& cfg = {}) {
    std::istringstream in(csv);
    return ingest_transactions(in, cfg);
}

const char* kHeader = "household_id,date,item_id,quantity,expenditure\n";

}  // namespace

TEST_CASE("same-day duplicate rows are summed and the unit price recomputed") {
    auto res = ingest_str(std::string(kHeader) +
                          "h1,2015-03-01,ean1,1,10\n"
                          "h1,2015-03-01,ean1,1,12\n");
    const auto& hh = res.panel.households.at("h1");
    REQUIRE(hh.days.size() == 1);
    REQUIRE(hh.days[0].bundle.size() == 1);
    const auto& ip = hh.days[0].bundle[0];
    CHECK(ip.quantity == doctest::Approx(2.0));
    CHECK(ip.expenditure == doctest::Approx(22.0));
    CHECK(ip.unit_price == doctest::Approx(11.0));
    CHECK(res.report.merged_duplicates == 1);
}

TEST_CASE("expenditure below the 0.5 DKK floor is dropped and counted") {
    auto res = ingest_str(std::string(kHeader) +
                          "h1,2015-03-01,ean1,1,0.25\n"
                          "h1,2015-03-01,ean2,1,5\n");
    CHECK(res.report.below_floor == 1);
    CHECK(res.panel.households.at("h1").days[0].bundle.size() == 1);
}

TEST_CASE("empty file raises the empty-panel error") {
    CHECK_THROWS_AS(ingest_str(std::string(kHeader)), EmptyPanelError);
    CHECK_THROWS_AS(ingest_str(""), EmptyPanelError);
}

TEST_CASE("missing header column is an ingestion error") {
    CHECK_THROWS_AS(ingest_str("household_id,date,quantity,expenditure\nh,2015-01-01,1,5\n"),
                    IngestionError);
}

TEST_CASE("malformed rows are counted and skipped, not fatal") {
    auto res = ingest_str(std::string(kHeader) +
                          "h1,not-a-date,ean1,1,10\n"
                          "h1,2015-02-30,ean1,1,10\n"
                          "h1,2015-03-01,ean1,abc,10\n"
                          "h1,2015-03-01,,1,10\n"
                          "h1,2015-03-01,ean1,-2,10\n"
                          "h1,2015-03-01,ean1,1,0\n"
                          "h1,2015-03-01,ean1,2,18\n");
    CHECK(res.report.malformed == 3);
    CHECK(res.report.missing_fields == 1);
    CHECK(res.report.nonpositive_quantity == 1);
    CHECK(res.report.nonpositive_expenditure == 1);
    CHECK(res.report.rows_kept == 1);
    CHECK(res.panel.households.at("h1").days[0].bundle[0].unit_price == doctest::Approx(9.0));
}

TEST_CASE("vendor flag columns drop rows only when present and truthy") {
    auto res = ingest_str(
        "household_id,date,item_id,quantity,expenditure,outside_denmark,error_flag\n"
        "h1,2015-03-01,a,1,10,0,0\n"
        "h1,2015-03-01,b,1,10,1,0\n"
        "h1,2015-03-01,c,1,10,0,true\n");
    CHECK(res.report.outside_denmark == 1);
    CHECK(res.report.vendor_error == 1);
    CHECK(res.panel.households.at("h1").days[0].bundle.size() == 1);
}

TEST_CASE("days are sorted by date with no duplicates") {
    auto res = ingest_str(std::string(kHeader) +
                          "h1,2015-03-05,a,1,5\n"
                          "h1,2015-01-02,a,1,6\n"
                          "h1,2015-02-01,b,2,8\n");
    const auto& hh = res.panel.households.at("h1");
    REQUIRE(hh.days.size() == 3);
    CHECK(hh.days[0].date < hh.days[1].date);
    CHECK(hh.days[1].date < hh.days[2].date);
    CHECK(hh.days[0].t == 0);
    CHECK(hh.days[2].t == 2);
}

TEST_CASE("ingestion is idempotent on its own output") {
    auto res = ingest_str(std::string(kHeader) +
                          "h2,2015-03-01,a,1,10\n"
                          "h2,2015-03-01,a,2,11\n"
                          "h1,2015-04-01,b,0.5,7.25\n"
                          "h1,2015-02-01,a,3,9\n");
    auto round1 = test_util::csv_of(res.panel);
    auto res2 = ingest_str(round1);
    CHECK(test_util::csv_of(res2.panel) == round1);
}

TEST_CASE("row order never affects the resulting panel") {
    std::vector<std::string> rows = {
        "h1,2015-03-01,a,1,10", "h1,2015-03-01,a,1,12", "h1,2015-01-05,b,2,8",
        "h2,2015-06-01,a,1,3",  "h1,2015-03-01,c,4,9",
    };
    std::string base;
    {
        std::string csv = kHeader;
        for (const auto& r : rows) csv += r + "\n";
        base = test_util::csv_of(ingest_str(csv).panel);
    }
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(rows.begin(), rows.end(), rng);
        std::string csv = kHeader;
        for (const auto& r : rows) csv += r + "\n";
        CHECK(test_util::csv_of(ingest_str(csv).panel) == base);
    }
}

TEST_CASE("budgets conserve total surviving expenditure") {
    auto res = ingest_str(std::string(kHeader) +
                          "h1,2015-03-01,a,1,10\n"
                          "h1,2015-03-01,a,1,12\n"
                          "h1,2015-03-02,b,2,8\n"
                          "h1,2015-03-03,c,1,0.25\n");  // dropped by floor
    double budget_sum = 0.0;
    for (const auto& day : res.panel.households.at("h1").days) budget_sum += day.budget;
    CHECK(budget_sum == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("summary counts days, products and products per trip") {
    auto res = ingest_str(std::string(kHeader) +
                          "h1,2015-03-01,a,1,5\nh1,2015-03-01,b,1,5\nh1,2015-03-01,c,1,5\n");
    auto stats = panel_summary(res.panel);
    REQUIRE(stats.households.size() == 1);
    const auto& s = stats.households[0];
    CHECK(s.days_shopped == 1);
    CHECK(s.distinct_products == 3);
    CHECK(s.products_per_trip == doctest::Approx(3.0));
    CHECK(s.mean_expenditure_per_trip == doctest::Approx(15.0));
}

TEST_CASE("single item bought daily has no missing price cells") {
    auto res = ingest_str(std::string(kHeader) +
                          "h1,2015-03-01,a,1,5\nh1,2015-03-02,a,1,6\nh1,2015-03-03,a,2,7\n");
    auto stats = panel_summary(res.panel);
    CHECK(stats.households[0].fraction_prices_missing == doctest::Approx(0.0));
}

TEST_CASE("summary missing fraction matches the generator's mask ground truth") {
    SyntheticScenario sc;
    sc.households = 40;
    sc.goods = 12;
    sc.periods = 30;
    sc.mask = 0.30;
    sc.seed = 11;
    auto synth = generate_panel(sc);
    auto stats = panel_summary(synth.panel);
    CHECK(std::abs(stats.mean_fraction_missing - 0.30) < 0.01);
    CHECK(std::abs(synth.truth.mask_fraction() - 0.30) < 0.01);
}

TEST_CASE("summary on empty panel throws") {
    TransactionPanel empty;
    CHECK_THROWS_AS(panel_summary(empty), EmptyPanelError);
}

TEST_CASE("date parsing round trips and rejects impossible dates") {
    auto ord = parse_date_ordinal("2015-02-28");
    REQUIRE(ord.has_value());
    CHECK(format_date(*ord) == "2015-02-28");
    CHECK(parse_date_ordinal("2016-02-29").has_value());  // leap year
    CHECK_FALSE(parse_date_ordinal("2015-02-29").has_value());
    CHECK_FALSE(parse_date_ordinal("2015-13-01").has_value());
    CHECK_FALSE(parse_date_ordinal("01/02/2015").has_value());
}
