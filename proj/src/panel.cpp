#include "rpkit/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rpkit {

namespace {

// Howard Hinnant's civil-day algorithm.
long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long yr = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && leap(y) ? 29 : d[m - 1];
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_double(const std::string& s, double& v) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    return ec == std::errc() && p == e && std::isfinite(v);
}

bool truthy_flag(const std::string& s) {
    return s == "1" || s == "true" || s == "TRUE" || s == "True" || s == "yes";
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::optional<long> parse_date_ordinal(const std::string& iso) {
    int y, m, d;
    char dash1, dash2;
    std::istringstream ss(iso);
    if (!(ss >> y >> dash1 >> m >> dash2 >> d) || dash1 != '-' || dash2 != '-') return std::nullopt;
    if (!ss.eof()) return std::nullopt;
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) return std::nullopt;
    return days_from_civil(y, m, d);
}

std::string format_date(long ordinal) {
    int y, m, d;
    civil_from_days(ordinal, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
}

int HouseholdSeries::intern_item(const std::string& id) {
    auto it = item_index.find(id);
    if (it != item_index.end()) return it->second;
    int idx = static_cast<int>(item_universe.size());
    item_universe.push_back(id);
    item_index.emplace(id, idx);
    return idx;
}

std::string CleaningReport::to_json() const {
    nlohmann::json j{{"rows_read", rows_read},
                     {"malformed", malformed},
                     {"missing_fields", missing_fields},
                     {"nonpositive_quantity", nonpositive_quantity},
                     {"nonpositive_expenditure", nonpositive_expenditure},
                     {"below_floor", below_floor},
                     {"outside_denmark", outside_denmark},
                     {"vendor_error", vendor_error},
                     {"rows_kept", rows_kept},
                     {"merged_duplicates", merged_duplicates},
                     {"households", households}};
    return j.dump(2);
}

IngestResult ingest_transactions(std::istream& in, const CleaningConfig& cfg) {
    if (!in) throw IngestionError("unreadable transaction source");

    std::string line;
    if (!std::getline(in, line)) throw EmptyPanelError("empty transaction source");
    auto header = split_csv_line(line);
    auto col = [&](const std::string& name) -> int {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };
    const int c_hh = col("household_id"), c_date = col("date"), c_item = col("item_id"),
              c_qty = col("quantity"), c_exp = col("expenditure");
    if (c_hh < 0 || c_date < 0 || c_item < 0 || c_qty < 0 || c_exp < 0)
        throw IngestionError("missing required column in transactions header");
    const int c_dk = col("outside_denmark"), c_err = col("error_flag");

    CleaningReport rep;
    // (household, date ordinal, item) -> summed quantity, expenditure
    struct Cell {
        double qty = 0.0, exp = 0.0;
        long rows = 0;
    };
    std::map<std::string, std::map<long, std::map<std::string, Cell>>> agg;

    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++rep.rows_read;
        auto f = split_csv_line(line);
        auto field = [&](int c) -> std::string { return c >= 0 && c < static_cast<int>(f.size()) ? f[c] : std::string(); };
        std::string hh = field(c_hh), date = field(c_date), item = field(c_item);
        std::string qty_s = field(c_qty), exp_s = field(c_exp);
        if (hh.empty() || date.empty() || item.empty() || qty_s.empty() || exp_s.empty()) {
            ++rep.missing_fields;
            continue;
        }
        auto ord = parse_date_ordinal(date);
        double qty, exp;
        if (!ord || !parse_double(qty_s, qty) || !parse_double(exp_s, exp)) {
            ++rep.malformed;
            continue;
        }
        if (cfg.honor_flag_columns && c_dk >= 0 && truthy_flag(field(c_dk))) {
            ++rep.outside_denmark;
            continue;
        }
        if (cfg.honor_flag_columns && c_err >= 0 && truthy_flag(field(c_err))) {
            ++rep.vendor_error;
            continue;
        }
        if (qty <= 0.0) {
            ++rep.nonpositive_quantity;
            continue;
        }
        if (exp <= 0.0) {
            ++rep.nonpositive_expenditure;
            continue;
        }
        if (exp < cfg.expenditure_floor) {
            ++rep.below_floor;
            continue;
        }
        Cell& cell = agg[hh][*ord][item];
        if (cell.rows > 0) ++rep.merged_duplicates;
        cell.qty += qty;
        cell.exp += exp;
        ++cell.rows;
        ++rep.rows_kept;
    }

    TransactionPanel panel;
    for (auto& [hh_id, by_date] : agg) {
        HouseholdSeries hh;
        hh.household_id = hh_id;
        int t = 0;
        for (auto& [ord, items] : by_date) {
            DayRecord day;
            day.t = t++;
            day.date = ord;
            for (auto& [item_id, cell] : items) {
                ItemPurchase ip;
                ip.item = hh.intern_item(item_id);
                ip.quantity = cell.qty;
                ip.expenditure = cell.exp;
                ip.unit_price = cell.exp / cell.qty;
                day.budget += ip.expenditure;
                day.bundle.push_back(ip);
            }
            hh.days.push_back(std::move(day));
        }
        panel.households.emplace(hh_id, std::move(hh));
    }
    rep.households = static_cast<long>(panel.households.size());
    if (panel.households.empty()) throw EmptyPanelError("no households survive cleaning");
    return {std::move(panel), rep};
}

IngestResult ingest_transactions_file(const std::string& path, const CleaningConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open " + path);
    return ingest_transactions(in, cfg);
}

void write_transactions_csv(const TransactionPanel& panel, std::ostream& out) {
    out << "household_id,date,item_id,quantity,expenditure\n";
    for (const auto& [hh_id, hh] : panel.households) {
        for (const auto& day : hh.days) {
            for (const auto& ip : day.bundle) {
                out << hh_id << ',' << format_date(day.date) << ','
                    << hh.item_universe[ip.item] << ',' << fmt_double(ip.quantity) << ','
                    << fmt_double(ip.expenditure) << '\n';
            }
        }
    }
}

SummaryStats panel_summary(const TransactionPanel& panel) {
    if (panel.empty()) throw EmptyPanelError("panel_summary on empty panel");
    SummaryStats out;
    double sum_days = 0.0, sum_products = 0.0, sum_missing = 0.0;
    for (const auto& [hh_id, hh] : panel.households) {
        HouseholdSummary s;
        s.household_id = hh_id;
        s.days_shopped = hh.observations();
        s.distinct_products = static_cast<int>(hh.item_universe.size());
        long observed_cells = 0;
        double total_exp = 0.0;
        for (const auto& day : hh.days) {
            s.transactions += static_cast<long>(day.bundle.size());
            observed_cells += static_cast<long>(day.bundle.size());
            total_exp += day.budget;
        }
        s.products_per_trip = static_cast<double>(s.transactions) / s.days_shopped;
        s.mean_expenditure_per_trip = total_exp / s.days_shopped;
        const long cells = static_cast<long>(s.days_shopped) * s.distinct_products;
        s.fraction_prices_missing = cells ? 1.0 - static_cast<double>(observed_cells) / cells : 0.0;
        sum_days += s.days_shopped;
        sum_products += s.distinct_products;
        sum_missing += s.fraction_prices_missing;
        out.households.push_back(std::move(s));
    }
    const double n = static_cast<double>(out.households.size());
    out.mean_days = sum_days / n;
    out.mean_products = sum_products / n;
    out.mean_fraction_missing = sum_missing / n;
    return out;
}

}  // namespace rpkit
