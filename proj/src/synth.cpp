#include "rpkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

namespace rpkit {

namespace {

constexpr long kEpochDay = 16436;  // 2015-01-01

std::string household_name(int index, int count) {
    int width = 1;
    for (int c = count - 1; c >= 10; c /= 10) ++width;
    char buf[32];
    std::snprintf(buf, sizeof buf, "h%0*d", width < 4 ? 4 : width, index);
    return buf;
}

template <class Rng>
double lognormal(Rng& rng, double mu, double sigma) {
    // Box-Muller on deterministic uniforms
    const double u1 = unit_uniform(rng);
    const double u2 = unit_uniform(rng);
    const double z = std::sqrt(-2.0 * std::log(u1 + 1e-300)) * std::cos(6.283185307179586 * u2);
    return std::exp(mu + sigma * z);
}

template <class Rng>
double exponential(Rng& rng) {
    return -std::log(1.0 - unit_uniform(rng) + 1e-300);
}

}  // namespace

void SyntheticScenario::validate() const {
    if (households < 1 || goods < 1 || periods < 1)
        throw ParameterError("scenario counts must be positive");
    if (theta < 0.0 || theta > 1.0) throw ParameterError("theta must be in [0,1]");
    if (mask < 0.0 || mask >= 1.0) throw ParameterError("mask fraction must be in [0,1)");
    if (price_sigma < 0.0 || budget_sigma < 0.0) throw ParameterError("sigma must be >= 0");
    if (ces_elasticity <= 0.0) throw ParameterError("CES elasticity must be positive");
    if (!weights.empty()) {
        if (static_cast<int>(weights.size()) != goods)
            throw ParameterError("weights length must equal goods");
        double sum = 0.0;
        for (double w : weights) {
            if (w <= 0.0) throw ParameterError("weights must be positive");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("weights must sum to 1");
    }
}

std::vector<double> cobb_douglas_demand(const std::vector<double>& weights,
                                        const std::vector<double>& prices, double budget) {
    if (budget <= 0.0) throw ParameterError("budget must be positive");
    std::vector<double> x(weights.size());
    for (size_t k = 0; k < weights.size(); ++k) {
        if (prices[k] <= 0.0) throw ParameterError("prices must be positive");
        x[k] = weights[k] * budget / prices[k];
    }
    return x;
}

std::vector<double> ces_demand(const std::vector<double>& weights, double sigma,
                               const std::vector<double>& prices, double budget) {
    if (budget <= 0.0) throw ParameterError("budget must be positive");
    double denom = 0.0;
    for (size_t k = 0; k < weights.size(); ++k) {
        if (prices[k] <= 0.0) throw ParameterError("prices must be positive");
        denom += std::pow(weights[k], sigma) * std::pow(prices[k], 1.0 - sigma);
    }
    std::vector<double> x(weights.size());
    for (size_t k = 0; k < weights.size(); ++k)
        x[k] = std::pow(weights[k] / prices[k], sigma) * budget / denom;
    return x;
}

HouseholdSeries generate_household(const SyntheticScenario& sc, int index, long* masked_cells,
                                   long* total_cells) {
    std::mt19937_64 rng(stream_seed(sc.seed, "synth-household", static_cast<std::uint64_t>(index)));

    std::vector<double> weights = sc.weights;
    if (weights.empty()) {
        weights.resize(sc.goods);
        double sum = 0.0;
        for (double& w : weights) {
            w = exponential(rng) + 1e-3;
            sum += w;
        }
        for (double& w : weights) w /= sum;
    }

    HouseholdSeries hh;
    hh.household_id = household_name(index, sc.households);
    for (int k = 0; k < sc.goods; ++k) hh.intern_item("g" + std::to_string(k));

    std::vector<double> prices(sc.goods), sub_w, sub_p;
    std::vector<int> considered;
    for (int t = 0; t < sc.periods; ++t) {
        for (int k = 0; k < sc.goods; ++k) prices[k] = lognormal(rng, sc.price_mu, sc.price_sigma);
        const double w = sc.budget_law == BudgetLaw::Fixed
                             ? std::exp(sc.budget_mu)
                             : lognormal(rng, sc.budget_mu, sc.budget_sigma);

        considered.clear();
        for (int k = 0; k < sc.goods; ++k) {
            const bool masked = sc.mask > 0.0 && unit_uniform(rng) < sc.mask;
            if (masked) {
                if (masked_cells) ++*masked_cells;
            } else {
                considered.push_back(k);
            }
            if (total_cells) ++*total_cells;
        }
        if (considered.empty()) {
            // keep at least one good per day
            const int k = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(sc.goods)));
            considered.push_back(k);
            if (masked_cells) --*masked_cells;
        }

        sub_w.clear();
        sub_p.clear();
        double wsum = 0.0;
        for (int k : considered) {
            sub_w.push_back(weights[k]);
            sub_p.push_back(prices[k]);
            wsum += weights[k];
        }
        for (double& v : sub_w) v /= wsum;

        std::vector<double> x;
        const bool tremble = sc.theta > 0.0 && unit_uniform(rng) < sc.theta;
        if (tremble) {
            // random budget-exhausting bundle: normalized exponential spending shares
            std::vector<double> share(considered.size());
            double ssum = 0.0;
            for (double& v : share) {
                v = exponential(rng) + 1e-6;
                ssum += v;
            }
            x.resize(considered.size());
            for (size_t j = 0; j < x.size(); ++j) x[j] = share[j] / ssum * w / sub_p[j];
        } else if (sc.utility == UtilityModel::CobbDouglas) {
            x = cobb_douglas_demand(sub_w, sub_p, w);
        } else {
            x = ces_demand(sub_w, sc.ces_elasticity, sub_p, w);
        }

        DayRecord day;
        day.t = t;
        day.date = kEpochDay + t;
        for (size_t j = 0; j < considered.size(); ++j) {
            ItemPurchase ip;
            ip.item = considered[j];
            ip.quantity = x[j];
            ip.expenditure = sub_p[j] * x[j];
            // same derivation as ingestion, so CSV round trips bit-exactly
            ip.unit_price = ip.expenditure / ip.quantity;
            day.budget += ip.expenditure;
            day.bundle.push_back(ip);
        }
        hh.days.push_back(std::move(day));
    }
    return hh;
}

SyntheticPanel generate_panel(const SyntheticScenario& sc) {
    sc.validate();
    SyntheticPanel out;
    out.truth.households = sc.households;
    out.truth.mask_requested = sc.mask;
    out.truth.rational = sc.theta == 0.0;
    out.truth.seed = sc.seed;
    for (int i = 0; i < sc.households; ++i) {
        HouseholdSeries hh =
            generate_household(sc, i, &out.truth.masked_cells, &out.truth.total_cells);
        out.panel.households.emplace(hh.household_id, std::move(hh));
    }
    return out;
}

std::string GroundTruth::to_json() const {
    nlohmann::json j{{"households", households},
                     {"mask_requested", mask_requested},
                     {"masked_cells", masked_cells},
                     {"total_cells", total_cells},
                     {"mask_fraction", mask_fraction()},
                     {"rational", rational},
                     {"seed", seed}};
    return j.dump(2);
}

HouseholdSeries fixture_gale_cycle() {
    // 3 goods, 3 observations; R0 at e=1 is exactly the cycle 0->1->2->0 with
    // every edge strict and no reverse edges, so WARP holds while GARP fails.
    static const double P[3][3] = {{9, 4, 1}, {8, 2, 9}, {3, 6, 5}};
    static const double X[3][3] = {{6, 1, 7}, {3, 6, 7}, {7, 6, 2}};
    HouseholdSeries hh;
    hh.household_id = "gale";
    for (int k = 0; k < 3; ++k) hh.intern_item("g" + std::to_string(k));
    for (int t = 0; t < 3; ++t) {
        DayRecord day;
        day.t = t;
        day.date = kEpochDay + t;
        for (int k = 0; k < 3; ++k) {
            ItemPurchase ip;
            ip.item = k;
            ip.quantity = X[t][k];
            ip.unit_price = P[t][k];
            ip.expenditure = ip.quantity * ip.unit_price;
            day.budget += ip.expenditure;
            day.bundle.push_back(ip);
        }
        hh.days.push_back(std::move(day));
    }
    return hh;
}

namespace {

// Exhaustive GARP check: search every ordered tuple of distinct observations
// for an R0 chain closed by a strict edge. Independent of the bitset engine.
struct BruteRelations {
    int T;
    std::vector<char> r0, p0;
    bool r0_at(int t, int s) const { return r0[t * T + s]; }
    bool p0_at(int t, int s) const { return p0[t * T + s]; }
};

BruteRelations brute_relations(const ExpenditureMatrix& E, double e, double eps, bool interval_above) {
    BruteRelations rel;
    rel.T = E.T;
    rel.r0.assign(static_cast<size_t>(E.T) * E.T, 0);
    rel.p0.assign(static_cast<size_t>(E.T) * E.T, 0);
    for (int t = 0; t < E.T; ++t)
        for (int s = 0; s < E.T; ++s) {
            const double lhs = e * E.at(t, t);
            const double tol = eps * E.at(t, t);
            const bool weak = lhs >= E.at(t, s) - tol;
            const bool strict = interval_above ? weak : lhs > E.at(t, s) + tol;
            rel.r0[t * E.T + s] = weak;
            rel.p0[t * E.T + s] = strict;
        }
    return rel;
}

bool chain_search(const BruteRelations& rel, std::vector<int>& chain, std::vector<char>& used) {
    const int tail = chain.back();
    const int head = chain.front();
    if (static_cast<int>(chain.size()) >= 2 && rel.p0_at(tail, head)) return true;
    for (int next = 0; next < rel.T; ++next) {
        if (used[next] || !rel.r0_at(tail, next)) continue;
        used[next] = 1;
        chain.push_back(next);
        if (chain_search(rel, chain, used)) return true;
        chain.pop_back();
        used[next] = 0;
    }
    return false;
}

bool brute_garp_holds(const BruteRelations& rel) {
    std::vector<int> chain;
    std::vector<char> used(rel.T, 0);
    for (int start = 0; start < rel.T; ++start) {
        chain.assign(1, start);
        std::fill(used.begin(), used.end(), 0);
        used[start] = 1;
        if (chain_search(rel, chain, used)) return false;
    }
    return true;
}

bool brute_warp_holds(const BruteRelations& rel) {
    for (int t = 0; t < rel.T; ++t)
        for (int s = 0; s < rel.T; ++s)
            if (t != s && rel.r0_at(t, s) && rel.p0_at(s, t)) return false;
    return true;
}

}  // namespace

bool brute_force_garp(const ExpenditureMatrix& E, double e, double eps) {
    return brute_garp_holds(brute_relations(E, e, eps, false));
}

bool brute_force_warp(const ExpenditureMatrix& E, double e, double eps) {
    return brute_warp_holds(brute_relations(E, e, eps, false));
}

double brute_force_aei(const ExpenditureMatrix& E, double eps) {
    if (E.T > 10) throw ParameterError("brute_force_aei limited to T <= 10");
    if (E.T <= 1) return 1.0;
    if (brute_garp_holds(brute_relations(E, 1.0, eps, false))) return 1.0;

    std::vector<double> cand{0.0, 1.0};
    for (int t = 0; t < E.T; ++t)
        for (int s = 0; s < E.T; ++s) {
            const double r = E.at(t, s) / E.at(t, t);
            if (r > eps && r < 1.0 - eps) cand.push_back(r);
        }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    // ascending scan for the first failure, at a candidate or on the open
    // interval just above it; the supremum of the satisfying set is that
    // candidate either way
    for (size_t i = 0; i < cand.size(); ++i) {
        if (!brute_garp_holds(brute_relations(E, cand[i], eps, false))) return cand[i];
        if (i + 1 < cand.size() &&
            !brute_garp_holds(brute_relations(E, cand[i], eps, true)))
            return cand[i];
    }
    return 1.0;
}

}  // namespace rpkit
