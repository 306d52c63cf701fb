#include "rpkit/imputation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rpkit {

const EmpiricalPriceDistribution* PriceBank::find(const std::string& household_id,
                                                  const std::string& item_id) const {
    if (scope == PoolScope::PerHousehold) {
        auto hh = per_household.find(household_id);
        if (hh != per_household.end()) {
            auto it = hh->second.find(item_id);
            if (it != hh->second.end() && !it->second.prices.empty()) return &it->second;
        }
    }
    auto it = pooled.find(item_id);
    if (it != pooled.end() && !it->second.prices.empty()) return &it->second;
    return nullptr;
}

PriceBank build_price_distributions(const TransactionPanel& panel, PoolScope scope) {
    if (panel.empty()) throw EmptyPanelError("cannot build price distributions from empty panel");
    PriceBank bank;
    bank.scope = scope;
    for (const auto& [hh_id, hh] : panel.households) {
        auto* local = scope == PoolScope::PerHousehold ? &bank.per_household[hh_id] : nullptr;
        for (const auto& day : hh.days) {
            for (const auto& ip : day.bundle) {
                const std::string& item = hh.item_universe[ip.item];
                bank.pooled[item].prices.push_back(ip.unit_price);
                if (local) (*local)[item].prices.push_back(ip.unit_price);
            }
        }
    }
    if (scope == PoolScope::PerHousehold) {
        // items a household needs but never bought fall back to the pooled pool
        for (const auto& [hh_id, hh] : panel.households) {
            const auto& local = bank.per_household[hh_id];
            for (const auto& item : hh.item_universe)
                if (!local.count(item)) bank.fallbacks.emplace_back(hh_id, item);
        }
    }
    return bank;
}

std::vector<std::string> unpriceable_items(const HouseholdSeries& hh, const PriceBank& bank) {
    std::vector<std::string> missing;
    for (const auto& item : hh.item_universe)
        if (!bank.find(hh.household_id, item)) missing.push_back(item);
    return missing;
}

ExpenditureDecomposition ExpenditureDecomposition::build(const HouseholdSeries& hh) {
    const int T = hh.observations();
    const int K = static_cast<int>(hh.item_universe.size());
    ExpenditureDecomposition d;
    d.T = T;
    d.e_obs = ExpenditureMatrix(T);
    d.missing_at.resize(T);

    d.K = K;
    d.qmat = Eigen::MatrixXd::Zero(K, T);
    for (int s = 0; s < T; ++s)
        for (const auto& ip : hh.days[s].bundle) d.qmat(ip.item, s) = ip.quantity;

    std::vector<double> price_at(K);
    for (int t = 0; t < T; ++t) {
        std::fill(price_at.begin(), price_at.end(), -1.0);
        for (const auto& ip : hh.days[t].bundle) price_at[ip.item] = ip.unit_price;
        for (int k = 0; k < K; ++k)
            if (price_at[k] < 0.0) d.missing_at[t].push_back(k);
        d.missing_cells += static_cast<long>(d.missing_at[t].size());

        for (int s = 0; s < T; ++s) {
            double total = 0.0;
            for (const auto& ip : hh.days[s].bundle) {
                const double p = price_at[ip.item];
                if (p > 0.0) total += p * ip.quantity;
            }
            d.e_obs.at(t, s) = total;
        }
    }
    return d;
}

void ExpenditureDecomposition::reconstruct(const std::vector<std::vector<double>>& sampled,
                                           ExpenditureMatrix& out) const {
    out = e_obs;
    if (missing_cells == 0) return;
    using RowMajorMap =
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    RowMajorMap out_map(out.data.data(), T, T);
    // dense when missing prices are plentiful: one K-wide matrix product beats
    // row-by-row accumulation
    if (missing_cells * 8 > static_cast<long>(T) * K) {
        if (p_scratch.size() == 0) {
            p_scratch = Eigen::MatrixXd::Zero(T, K);
            prod_scratch.resize(T, T);
        }
        for (int t = 0; t < T; ++t)
            for (size_t j = 0; j < missing_at[t].size(); ++j)
                p_scratch(t, missing_at[t][j]) = sampled[t][j];
        prod_scratch.noalias() = p_scratch * qmat;
        out_map += prod_scratch;
        return;
    }
    for (int t = 0; t < T; ++t)
        for (size_t j = 0; j < missing_at[t].size(); ++j)
            out_map.row(t).noalias() += sampled[t][j] * qmat.row(missing_at[t][j]);
}

MonteCarloEstimate estimate_aei(const HouseholdSeries& hh, const PriceBank& bank,
                                const McOptions& opts) {
    if (opts.draws < 1) throw ParameterError("draw count must be >= 1");
    MonteCarloEstimate est;
    est.household_id = hh.household_id;
    est.draws = opts.draws;
    est.seed = opts.seed;

    auto missing = unpriceable_items(hh, bank);
    if (!missing.empty()) {
        std::ostringstream msg;
        msg << "household " << hh.household_id << " has unpriceable items:";
        for (const auto& item : missing) msg << ' ' << item;
        throw UnpriceableItemError(msg.str());
    }

    const auto decomp = ExpenditureDecomposition::build(hh);

    // Distribution pointers resolved once per (t, missing item) slot.
    std::vector<std::vector<const EmpiricalPriceDistribution*>> dists(decomp.T);
    for (int t = 0; t < decomp.T; ++t)
        for (int k : decomp.missing_at[t])
            dists[t].push_back(bank.find(hh.household_id, hh.item_universe[k]));

    est.garp_aei.resize(opts.draws);
    est.warp_aei.resize(opts.draws);

    if (decomp.missing_cells == 0) {
        // fully priced: every draw is the same single evaluation
        const auto E = cross_expenditure(hh);
        const auto res = efficiency(E, opts.engine);
        std::fill(est.garp_aei.begin(), est.garp_aei.end(), res.garp_aei);
        std::fill(est.warp_aei.begin(), est.warp_aei.end(), res.warp_aei);
    } else {
        std::vector<std::vector<double>> sampled(decomp.T);
        for (int t = 0; t < decomp.T; ++t) sampled[t].resize(decomp.missing_at[t].size());
        ExpenditureMatrix E(decomp.T);
        for (int d = 0; d < opts.draws; ++d) {
            SplitMix64 rng(
                stream_seed(opts.seed, hh.household_id, static_cast<std::uint64_t>(d)));
            for (int t = 0; t < decomp.T; ++t)
                for (size_t j = 0; j < sampled[t].size(); ++j)
                    sampled[t][j] = dists[t][j]->sample(rng);
            decomp.reconstruct(sampled, E);
            const auto res = efficiency(E, opts.engine);
            est.garp_aei[d] = res.garp_aei;
            est.warp_aei[d] = res.warp_aei;
        }
    }

    const int M = opts.draws;
    // degenerate draw sets (e.g. fully priced data) get an exact mean and zero sd
    const auto [g_min, g_max] = std::minmax_element(est.garp_aei.begin(), est.garp_aei.end());
    if (*g_min == *g_max) {
        est.aei_hat = *g_min;
        est.warp_aei_hat = est.warp_aei[0];
        est.rho_hat = std::abs(est.warp_aei[0] - est.garp_aei[0]) > opts.rho_tol ? 1.0 : 0.0;
        return est;
    }
    est.aei_hat = std::accumulate(est.garp_aei.begin(), est.garp_aei.end(), 0.0) / M;
    est.warp_aei_hat = std::accumulate(est.warp_aei.begin(), est.warp_aei.end(), 0.0) / M;
    double ss = 0.0;
    int differs = 0;
    for (int d = 0; d < M; ++d) {
        const double dev = est.garp_aei[d] - est.aei_hat;
        ss += dev * dev;
        if (std::abs(est.warp_aei[d] - est.garp_aei[d]) > opts.rho_tol) ++differs;
    }
    est.aei_sd = M > 1 ? std::sqrt(ss / (M - 1)) : 0.0;
    est.rho_hat = static_cast<double>(differs) / M;
    return est;
}

ConvergenceDiagnostic convergence_diagnostic(const MonteCarloEstimate& est, double tol) {
    if (est.draws < 2) throw ParameterError("convergence diagnostic needs at least 2 draws");
    ConvergenceDiagnostic diag;
    const int M = est.draws;
    diag.running_mean.resize(M);
    double sum = 0.0;
    for (int m = 0; m < M; ++m) {
        sum += est.garp_aei[m];
        diag.running_mean[m] = sum / (m + 1);
    }
    const double final_mean = diag.running_mean[M - 1];
    int stab = M;
    for (int m = M; m >= 1; --m) {
        if (std::abs(diag.running_mean[m - 1] - final_mean) < tol)
            stab = m;
        else
            break;
    }
    diag.stabilization_draw = stab;
    return diag;
}

}  // namespace rpkit
