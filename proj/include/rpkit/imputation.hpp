#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "rpkit/revpref.hpp"

namespace rpkit {

// Multiset of observed unit prices for one item; sampling is proportional
// to multiplicity.
struct EmpiricalPriceDistribution {
    std::vector<double> prices;

    template <class Rng>
    double sample(Rng& rng) const {
        return prices[bounded(rng, prices.size())];
    }
    bool degenerate() const { return prices.size() <= 1; }
};

enum class PoolScope { Pooled, PerHousehold };

struct PriceBank {
    PoolScope scope = PoolScope::Pooled;
    std::unordered_map<std::string, EmpiricalPriceDistribution> pooled;
    // household -> item -> distribution (PerHousehold scope only)
    std::unordered_map<std::string, std::unordered_map<std::string, EmpiricalPriceDistribution>> per_household;
    // (household,item) pairs that had zero in-household observations and fell
    // back to the pooled distribution
    std::vector<std::pair<std::string, std::string>> fallbacks;

    const EmpiricalPriceDistribution* find(const std::string& household_id,
                                           const std::string& item_id) const;
};

PriceBank build_price_distributions(const TransactionPanel& panel,
                                    PoolScope scope = PoolScope::Pooled);

// Items required by the household's cross-expenditure cells that have no
// observed price anywhere in the bank.
std::vector<std::string> unpriceable_items(const HouseholdSeries& hh, const PriceBank& bank);

// Split of the cross-expenditure matrix into the observed part and the
// missing-price terms. Built once per household; each Monte-Carlo draw only
// touches the missing cells.
struct ExpenditureDecomposition {
    int T = 0;
    int K = 0;
    ExpenditureMatrix e_obs;
    // missing_at[t] = household-local item ids with unobserved price at t
    std::vector<std::vector<int>> missing_at;
    long missing_cells = 0;
    // dense K x T quantity matrix: qmat(k, s) = quantity of item k in bundle s
    Eigen::MatrixXd qmat;
    // reconstruct scratch; the scatter pattern of sampled prices into p_scratch
    // is fixed, so it is zero-initialized once and only overwritten after
    mutable Eigen::MatrixXd p_scratch, prod_scratch;

    static ExpenditureDecomposition build(const HouseholdSeries& hh);

    // out = e_obs + sum of sampled-price terms; sampled[t] aligns with
    // missing_at[t].
    void reconstruct(const std::vector<std::vector<double>>& sampled,
                     ExpenditureMatrix& out) const;
};

struct MonteCarloEstimate {
    std::string household_id;
    int draws = 0;
    std::vector<double> garp_aei;
    std::vector<double> warp_aei;
    double aei_hat = 0.0;       // mean of GARP-AEI draws
    double aei_sd = 0.0;        // sample sd across draws
    double warp_aei_hat = 0.0;
    double rho_hat = 0.0;       // fraction of draws with |warp - garp| > rho_tol
    std::uint64_t seed = 0;
};

struct McOptions {
    int draws = 1000;
    std::uint64_t seed = 0;
    EngineOptions engine;
    double rho_tol = 1e-9;
};

// Per draw, one price is sampled for each missing (t,item) pair and reused
// across every bundle valued at day-t prices; draw d uses an RNG stream
// derived from (seed, household_id, d).
MonteCarloEstimate estimate_aei(const HouseholdSeries& hh, const PriceBank& bank,
                                const McOptions& opts = {});

struct ConvergenceDiagnostic {
    std::vector<double> running_mean;
    int stabilization_draw = 1;  // smallest m with |mean(m') - mean(M)| < tol for all m' >= m
};

ConvergenceDiagnostic convergence_diagnostic(const MonteCarloEstimate& est, double tol = 0.01);

}  // namespace rpkit
