#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rpkit/common.hpp"

namespace rpkit {

// ISO-8601 calendar date helpers. Ordinal is days since 1970-01-01.
std::optional<long> parse_date_ordinal(const std::string& iso);
std::string format_date(long ordinal);

// One purchased item within a day bundle. unit_price = expenditure/quantity,
// defined exactly on the support of the bundle.
struct ItemPurchase {
    int item = -1;  // household-local index into item_universe
    double quantity = 0.0;
    double expenditure = 0.0;
    double unit_price = 0.0;
};

struct DayRecord {
    int t = 0;          // 0-based observation index within household
    long date = 0;      // ordinal day
    std::vector<ItemPurchase> bundle;
    double budget = 0.0;  // total expenditure of the day

    const ItemPurchase* find(int item) const {
        for (const auto& ip : bundle)
            if (ip.item == item) return &ip;
        return nullptr;
    }
};

struct HouseholdSeries {
    std::string household_id;
    std::vector<DayRecord> days;  // sorted ascending by date, unique dates
    std::vector<std::string> item_universe;
    std::unordered_map<std::string, int> item_index;

    int intern_item(const std::string& id);
    int observations() const { return static_cast<int>(days.size()); }
};

struct TransactionPanel {
    std::map<std::string, HouseholdSeries> households;  // ordered for determinism

    bool empty() const { return households.empty(); }
};

struct CleaningConfig {
    double expenditure_floor = 0.5;  // smallest coin, DKK
    bool honor_flag_columns = true;  // outside_denmark / error_flag, when present
};

struct CleaningReport {
    long rows_read = 0;
    long malformed = 0;            // unparseable rows (counted, skipped)
    long missing_fields = 0;       // empty id/date/item/qty/expenditure
    long nonpositive_quantity = 0;
    long nonpositive_expenditure = 0;
    long below_floor = 0;
    long outside_denmark = 0;
    long vendor_error = 0;
    long rows_kept = 0;
    long merged_duplicates = 0;    // same (household,date,item) rows summed
    long households = 0;

    std::string to_json() const;
};

struct IngestResult {
    TransactionPanel panel;
    CleaningReport report;
};

// Reads `household_id,date,item_id,quantity,expenditure` CSV, applies the
// cleaning rules, aggregates same-day duplicates and derives unit prices.
IngestResult ingest_transactions(std::istream& in, const CleaningConfig& cfg = {});
IngestResult ingest_transactions_file(const std::string& path, const CleaningConfig& cfg = {});

// Canonical CSV emission (ingest(write(panel)) reproduces the panel).
void write_transactions_csv(const TransactionPanel& panel, std::ostream& out);

struct HouseholdSummary {
    std::string household_id;
    int days_shopped = 0;
    int distinct_products = 0;
    long transactions = 0;
    double products_per_trip = 0.0;
    double mean_expenditure_per_trip = 0.0;
    double fraction_prices_missing = 0.0;  // 1 - observed cells / (T * |universe|)
};

struct SummaryStats {
    std::vector<HouseholdSummary> households;
    double mean_days = 0.0;
    double mean_products = 0.0;
    double mean_fraction_missing = 0.0;
};

SummaryStats panel_summary(const TransactionPanel& panel);

}  // namespace rpkit
