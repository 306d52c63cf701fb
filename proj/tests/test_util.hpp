#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rpkit/panel.hpp"
#include "rpkit/revpref.hpp"

namespace test_util {

inline rpkit::ExpenditureMatrix make_e(const std::vector<std::vector<double>>& rows) {
    const int T = static_cast<int>(rows.size());
    rpkit::ExpenditureMatrix E(T);
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < T; ++s) E.at(t, s) = rows[t][s];
    return E;
}

// Series from explicit full-support price/quantity tables.
inline rpkit::HouseholdSeries make_series(const std::vector<std::vector<double>>& prices,
                                          const std::vector<std::vector<double>>& bundles,
                                          const std::string& id = "hh") {
    rpkit::HouseholdSeries hh;
    hh.household_id = id;
    const int K = static_cast<int>(prices[0].size());
    for (int k = 0; k < K; ++k) hh.intern_item("g" + std::to_string(k));
    for (size_t t = 0; t < prices.size(); ++t) {
        rpkit::DayRecord day;
        day.t = static_cast<int>(t);
        day.date = 16436 + static_cast<long>(t);
        for (int k = 0; k < K; ++k) {
            if (bundles[t][k] <= 0.0) continue;
            rpkit::ItemPurchase ip;
            ip.item = k;
            ip.quantity = bundles[t][k];
            ip.unit_price = prices[t][k];
            ip.expenditure = ip.quantity * ip.unit_price;
            day.budget += ip.expenditure;
            day.bundle.push_back(ip);
        }
        hh.days.push_back(std::move(day));
    }
    return hh;
}

// Random integer-valued instance (full support) for fuzzing.
inline rpkit::HouseholdSeries random_series(std::mt19937_64& rng, int max_t = 7, int max_k = 4,
                                            int max_val = 20) {
    std::uniform_int_distribution<int> t_dist(2, max_t), k_dist(2, max_k),
        v_dist(1, max_val);
    const int T = t_dist(rng), K = k_dist(rng);
    std::vector<std::vector<double>> p(T, std::vector<double>(K)), x(T, std::vector<double>(K));
    for (int t = 0; t < T; ++t)
        for (int k = 0; k < K; ++k) {
            p[t][k] = v_dist(rng);
            x[t][k] = v_dist(rng);
        }
    return make_series(p, x);
}

inline std::string csv_of(const rpkit::TransactionPanel& panel) {
    std::ostringstream out;
    rpkit::write_transactions_csv(panel, out);
    return out.str();
}

}  // namespace test_util
