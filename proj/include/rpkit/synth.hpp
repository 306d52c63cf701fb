#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rpkit/imputation.hpp"

namespace rpkit {

enum class UtilityModel { CobbDouglas, Ces };
enum class BudgetLaw { Fixed, LogNormal };

struct SyntheticScenario {
    int households = 100;
    int goods = 5;
    int periods = 20;

    // i.i.d. log-normal unit prices per (day, good)
    double price_mu = 0.0;
    double price_sigma = 0.3;

    UtilityModel utility = UtilityModel::CobbDouglas;
    double ces_elasticity = 0.5;
    // empty -> weights drawn per household (Dirichlet via normalized exponentials)
    std::vector<double> weights;

    BudgetLaw budget_law = BudgetLaw::LogNormal;
    double budget_mu = 5.0;
    double budget_sigma = 0.25;

    // probability of replacing the optimal bundle by a random
    // budget-exhausting bundle
    double theta = 0.0;
    // fraction of (day,good) price cells masked: the good is simply not
    // purchased that day, so its price is unobserved
    double mask = 0.0;

    std::uint64_t seed = 0;

    void validate() const;  // throws ParameterError
};

// x_k = a_k * w / p_k (weights summing to one; spends exactly w)
std::vector<double> cobb_douglas_demand(const std::vector<double>& weights,
                                        const std::vector<double>& prices, double budget);

// CES demand with elasticity of substitution sigma
std::vector<double> ces_demand(const std::vector<double>& weights, double sigma,
                               const std::vector<double>& prices, double budget);

struct GroundTruth {
    int households = 0;
    double mask_requested = 0.0;
    long masked_cells = 0;
    long total_cells = 0;
    bool rational = false;  // theta == 0 and full support
    std::uint64_t seed = 0;

    double mask_fraction() const {
        return total_cells ? static_cast<double>(masked_cells) / total_cells : 0.0;
    }
    std::string to_json() const;
};

struct SyntheticPanel {
    TransactionPanel panel;
    GroundTruth truth;
};

// Single household, streamable (index selects the household's RNG stream).
HouseholdSeries generate_household(const SyntheticScenario& sc, int index,
                                   long* masked_cells = nullptr, long* total_cells = nullptr);

SyntheticPanel generate_panel(const SyntheticScenario& sc);

// Checked-in 3-good, 3-observation series: WARP-consistent at e=1 but
// GARP-violating through a 3-cycle (WARP-AEI = 1, GARP-AEI = 58/65).
HouseholdSeries fixture_gale_cycle();

// Exponential-time oracle for the Afriat index: exhaustive cycle search over
// ordered observation tuples at every candidate efficiency level. T <= 10.
double brute_force_aei(const ExpenditureMatrix& E, double eps = 1e-9);

// Same exhaustive machinery for the axioms themselves (test oracle).
bool brute_force_garp(const ExpenditureMatrix& E, double e, double eps = 1e-9);
bool brute_force_warp(const ExpenditureMatrix& E, double e, double eps = 1e-9);

}  // namespace rpkit
