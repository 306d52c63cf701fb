// Acceptance suite: one PASS/FAIL line per criterion. Exit 0 iff all pass.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rpkit/imputation.hpp"
#include "rpkit/panel.hpp"
#include "rpkit/revpref.hpp"
#include "rpkit/stats.hpp"
#include "rpkit/synth.hpp"
#include "test_util.hpp"

using namespace rpkit;
using Clock = std::chrono::steady_clock;

namespace {

bool g_all_ok = true;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const std::string& desc, bool ok, double elapsed) {
    std::printf("criterion %d: %s - %s (%.1fs)\n", id, ok ? "PASS" : "FAIL", desc.c_str(),
                elapsed);
    std::fflush(stdout);
    g_all_ok = g_all_ok && ok;
}

// machine-scaled wall budget: the reference budget assumes 8 cores
double scale_budget(double reference_seconds) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return reference_seconds * 8.0 / std::min(8u, hw);
}

// ---------------------------------------------------------------- criterion 1

bool criterion_oracle_equivalence() {
    std::mt19937_64 rng(1001);
    for (int trial = 0; trial < 1000; ++trial) {
        auto E = cross_expenditure(test_util::random_series(rng, 7, 4, 20));
        const double oracle = brute_force_aei(E);
        const double exact = aei(E, Axiom::Garp, AeiMethod::Exact);
        if (std::abs(exact - oracle) > 1e-9) return false;
        const double bisect = aei(E, Axiom::Garp, AeiMethod::Bisection, 1e-7);
        if (std::abs(bisect - oracle) > 1e-6) return false;
    }
    return true;
}

// ---------------------------------------------------------------- criterion 2

bool criterion_rationality_fixture() {
    for (int model = 0; model < 2; ++model) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            SyntheticScenario sc;
            sc.households = 1;
            sc.goods = 20;
            sc.periods = 50;
            sc.theta = 0.0;
            sc.seed = seed;
            sc.utility = model ? UtilityModel::Ces : UtilityModel::CobbDouglas;
            auto hh = generate_household(sc, 0);
            if (aei(cross_expenditure(hh), Axiom::Garp) != 1.0) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------- criterion 3

bool criterion_hand_fixtures() {
    if (std::abs(aei(test_util::make_e({{10, 8}, {11, 13}}), Axiom::Garp) - 11.0 / 13.0) > 1e-9)
        return false;
    if (aei(test_util::make_e({{8, 4}, {4, 2}}), Axiom::Garp) != 1.0) return false;

    auto gale = cross_expenditure(fixture_gale_cycle());
    if (aei(gale, Axiom::Warp) != 1.0) return false;
    if (aei(gale, Axiom::Garp) >= 1.0) return false;
    // rho on complete data: WARP and GARP indices differ on every (single) draw
    if (std::abs(aei(gale, Axiom::Warp) - aei(gale, Axiom::Garp)) <= 1e-9) return false;

    // two-good panels never need transitivity: WARP-AEI == GARP-AEI
    std::mt19937_64 rng(3003);
    for (int trial = 0; trial < 300; ++trial) {
        auto E = cross_expenditure(test_util::random_series(rng, 7, 2, 20));
        if (std::abs(aei(E, Axiom::Warp) - aei(E, Axiom::Garp)) > 1e-12) return false;
    }
    return true;
}

// ---------------------------------------------------------------- criterion 4

bool criterion_ordering_monotonicity() {
    std::mt19937_64 rng(4004);
    for (int trial = 0; trial < 500; ++trial) {
        auto E = cross_expenditure(test_util::random_series(rng));
        if (aei(E, Axiom::Warp) < aei(E, Axiom::Garp) - 1e-12) return false;
    }
    for (int trial = 0; trial < 500; ++trial) {
        auto hh = test_util::random_series(rng, 7, 4);
        auto longer = cross_expenditure(hh);
        hh.days.pop_back();
        auto shorter = cross_expenditure(hh);
        if (aei(shorter, Axiom::Garp) < aei(longer, Axiom::Garp) - 1e-12) return false;
    }
    for (int trial = 0; trial < 200; ++trial) {
        auto hh = test_util::random_series(rng);
        auto E = cross_expenditure(hh);
        const double base = aei(E, Axiom::Garp);

        auto scaled = E;
        for (int t = 0; t < E.T; ++t)
            for (int s = 0; s < E.T; ++s) scaled.at(t, s) *= 0.5 + 2.0 * (t % 3);
        if (std::abs(aei(scaled, Axiom::Garp) - base) > 1e-12) return false;

        auto hh2 = hh;
        for (auto& day : hh2.days)
            for (auto& ip : day.bundle)
                if (ip.item == 0) {
                    ip.quantity *= 8.0;
                    ip.unit_price /= 8.0;
                }
        if (std::abs(aei(cross_expenditure(hh2), Axiom::Garp) - base) > 1e-12) return false;
    }
    return true;
}

// ---------------------------------------------------------------- criterion 5

bool criterion_convergence() {
    SyntheticScenario sc;
    sc.households = 200;
    sc.goods = 10;
    sc.periods = 20;
    sc.mask = 0.30;
    sc.theta = 0.3;
    sc.seed = 55;
    auto synth = generate_panel(sc);
    auto bank = build_price_distributions(synth.panel, PoolScope::Pooled);
    McOptions opts;
    opts.draws = 1000;
    opts.seed = 5;
    int converged = 0;
    for (const auto& [id, hh] : synth.panel.households) {
        auto est = estimate_aei(hh, bank, opts);
        double mean250 = 0.0;
        for (int d = 0; d < 250; ++d) mean250 += est.garp_aei[d];
        mean250 /= 250.0;
        if (std::abs(mean250 - est.aei_hat) < 0.01) ++converged;
    }
    return converged >= 190;
}

// ---------------------------------------------------------------- criterion 6

bool criterion_noise_monotonicity() {
    auto mean_aei = [](double theta) {
        SyntheticScenario sc;
        sc.households = 200;
        sc.goods = 4;
        sc.periods = 15;
        sc.theta = theta;
        sc.seed = 66;
        double sum = 0.0;
        for (int i = 0; i < sc.households; ++i)
            sum += aei(cross_expenditure(generate_household(sc, i)), Axiom::Garp);
        return sum / sc.households;
    };
    const double m0 = mean_aei(0.0), m1 = mean_aei(0.1), m3 = mean_aei(0.3), m5 = mean_aei(0.5);
    return m0 > m1 && m1 > m3 && m3 > m5;
}

// ---------------------------------------------------------------- criterion 7

bool criterion_regression_layer() {
    using namespace rpkit::stats;

    // OLS fixture to 1e-10
    {
        Eigen::MatrixXd X(5, 1), Y(5, 1);
        X << 1, 2, 3, 4, 5;
        Y << 1, 2, 2, 4, 5;
        auto fit = ols_pooled(Y, X, {"x"});
        const double s2 = 0.8 / 3.0;
        if (std::abs(fit.beta[0] + 0.2) > 1e-10) return false;
        if (std::abs(fit.beta[1] - 1.0) > 1e-10) return false;
        if (std::abs(fit.se[0] - std::sqrt(s2 * 1.1)) > 1e-10) return false;
        if (std::abs(fit.se[1] - std::sqrt(s2 / 10.0)) > 1e-10) return false;
    }

    std::mt19937_64 rng(7007);
    std::normal_distribution<double> nd(0.0, 1.0);
    const int n = 100, p = 8;
    Eigen::MatrixXd raw(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) raw(i, j) = nd(rng);
    std::vector<std::string> names;
    for (int j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
    auto dm = standardize(raw, names, {0, 0, 0, 0, 1, 1, 1, 1}, {"g0", "g1"});
    std::vector<int> own_group(p);
    for (int j = 0; j < p; ++j) own_group[j] = j;
    std::vector<std::string> own_names;
    for (int j = 0; j < p; ++j) own_names.push_back("s" + std::to_string(j));
    auto dm_own = standardize(raw, names, own_group, own_names);

    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i)
        y[i] = 1.5 * dm.W(i, 0) - 1.0 * dm.W(i, 1) + 0.5 * dm.W(i, 5) + 0.2 * nd(rng);

    // lambda >= lambda_max zeroes the lasso
    Eigen::VectorXd yc = y.array() - y.mean();
    const double lam_max = (dm.W.transpose() * yc / n).cwiseAbs().maxCoeff();
    if (lasso(dm, y, lam_max * 1.000001).coef.cwiseAbs().maxCoeff() != 0.0) return false;

    // SGL reductions and own-group GL = lasso
    for (double lam : {0.05, 0.2, 0.5}) {
        auto l = lasso(dm, y, lam);
        if ((sparse_group_lasso(dm, y, lam, 1.0).coef - l.coef).cwiseAbs().maxCoeff() > 1e-6)
            return false;
        auto gl = group_lasso(dm, y, lam);
        if ((sparse_group_lasso(dm, y, lam, 0.0).coef - gl.coef).cwiseAbs().maxCoeff() > 1e-6)
            return false;
        auto l_own = lasso(dm_own, y, lam);
        if ((group_lasso(dm_own, y, lam).coef - l_own.coef).cwiseAbs().maxCoeff() > 1e-6)
            return false;
    }

    // Rubin pooling of identical draws = single run
    {
        Eigen::MatrixXd Y3(n, 3);
        Y3 << y, y, y;
        Eigen::MatrixXd X = raw.leftCols(3);
        auto one = ols_pooled(y, X, {"a", "b", "c"});
        auto three = ols_pooled(Y3, X, {"a", "b", "c"});
        if ((one.se - three.se).cwiseAbs().maxCoeff() > 1e-14) return false;
        if ((one.beta - three.beta).cwiseAbs().maxCoeff() > 1e-14) return false;
    }

    // KKT residuals of CV-selected fits
    CvConfig cv;
    cv.folds = 10;
    cv.seed = 17;
    if (kkt_residual(dm, y, lasso_cv(dm, y, cv)) > 1e-6) return false;
    if (kkt_residual(dm, y, group_lasso_cv(dm, y, cv)) > 1e-6) return false;
    CvConfig cv_sgl = cv;
    cv_sgl.grid_points = 40;
    if (kkt_residual(dm, y, sparse_group_lasso_cv(dm, y, cv_sgl)) > 1e-6) return false;
    return true;
}

// ---------------------------------------------------------------- criterion 8

bool criterion_performance(double budget_seconds) {
    // single T=366 transitive closure under 10 ms
    {
        std::mt19937_64 rng(8001);
        BitMatrix r0(366);
        for (int i = 0; i < 366; ++i)
            for (int j = 0; j < 366; ++j)
                if (rng() % 2) r0.set(i, j);
        const auto t0 = Clock::now();
        r0.close_transitively();
        if (seconds_since(t0) > 0.010) {
            std::fprintf(stderr, "  closure took %.4fs\n", seconds_since(t0));
            return false;
        }
    }

    // paper-shaped panel, streamed household by household
    SyntheticScenario sc;
    sc.households = 1664;
    sc.goods = 488;
    sc.periods = 130;
    sc.mask = 0.30;
    sc.theta = 0.1;
    sc.seed = 88;
    McOptions opts;
    opts.draws = 1000;
    opts.seed = 8;

    const auto t0 = Clock::now();
    double aei_sum = 0.0, rho_sum = 0.0;
    bool first_household_fast = true;
    for (int i = 0; i < sc.households; ++i) {
        auto hh = generate_household(sc, i);
        TransactionPanel solo;
        solo.households.emplace(hh.household_id, hh);
        auto bank = build_price_distributions(solo, PoolScope::Pooled);
        const auto h0 = Clock::now();
        auto est = estimate_aei(hh, bank, opts);
        if (i == 0 && seconds_since(h0) > 2.0) first_household_fast = false;
        aei_sum += est.aei_hat;
        rho_sum += est.rho_hat;
        if ((i + 1) % 100 == 0)
            std::fprintf(stderr, "  %d/%d households, %.0fs elapsed\n", i + 1, sc.households,
                         seconds_since(t0));
    }
    const double elapsed = seconds_since(t0);
    std::fprintf(stderr, "  panel mean aei %.4f, mean rho %.4f, %.0fs (budget %.0fs)\n",
                 aei_sum / sc.households, rho_sum / sc.households, elapsed, budget_seconds);
    return first_household_fast && elapsed < budget_seconds;
}

// ---------------------------------------------------------------- criterion 9

bool criterion_determinism() {
    const char* bin = std::getenv("RPKIT_BIN");
    if (!bin) {
        std::fprintf(stderr, "  RPKIT_BIN not set\n");
        return false;
    }
    namespace fs = std::filesystem;
    const auto d = fs::temp_directory_path() / ("rpkit_acc_" + std::to_string(::getpid()));
    fs::create_directories(d);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    auto run = [&](const std::string& args) {
        const std::string cmd = std::string(bin) + " " + args + " > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) && WEXITSTATUS(status) == 0;
    };
    const std::string panel1 = (d / "p1.csv").string(), panel2 = (d / "p2.csv").string();
    const std::string common = " --households 10 --goods 6 --periods 12 --mask 0.3 --seed 5";
    if (!run("simulate --output " + panel1 + common)) return false;
    if (!run("simulate --output " + panel2 + common)) return false;
    if (slurp(panel1) != slurp(panel2)) return false;

    for (const std::string extra :
         {std::string(" --draws 50 --seed 3"),
          std::string(" --draws 50 --seed 3 --pool household --method bisect")}) {
        const std::string r1 = (d / "r1.jsonl").string(), r2 = (d / "r2.jsonl").string();
        const std::string s1 = (d / "s1.svg").string(), s2 = (d / "s2.svg").string();
        if (!run("aei --input " + panel1 + " --output " + r1 + " --hist-svg " + s1 + extra))
            return false;
        if (!run("aei --input " + panel1 + " --output " + r2 + " --hist-svg " + s2 + extra))
            return false;
        if (slurp(r1) != slurp(r2) || slurp(s1) != slurp(s2)) return false;
    }
    return true;
}

template <class F>
void check(int id, const std::string& desc, F&& fn, double runtime_cap = 0.0) {
    const auto t0 = Clock::now();
    bool ok = false;
    try {
        ok = fn();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "  exception: %s\n", e.what());
    }
    const double elapsed = seconds_since(t0);
    if (runtime_cap > 0.0 && elapsed > runtime_cap) ok = false;
    report(id, desc, ok, elapsed);
}

}  // namespace

int main() {
    check(1, "oracle equivalence on 1000 random instances", criterion_oracle_equivalence, 60.0);
    check(2, "200 maximizing panels reach AEI=1 exactly", criterion_rationality_fixture, 5.0);
    check(3, "hand fixtures and two-good rho=0", criterion_hand_fixtures);
    check(4, "ordering, monotonicity and invariance suites", criterion_ordering_monotonicity);
    check(5, "running mean stabilizes by draw 250 for >=95% of households",
          criterion_convergence);
    check(6, "mean AEI strictly decreasing in trembling probability",
          criterion_noise_monotonicity);
    check(7, "regression layer fixtures, reductions, Rubin pooling and KKT",
          criterion_regression_layer);
    check(8, "paper-shaped aei+rho run within the scaled wall budget",
          [] { return criterion_performance(scale_budget(600.0)); });
    check(9, "byte-identical reruns under a fixed seed", criterion_determinism);
    std::printf("%s\n", g_all_ok ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED");
    return g_all_ok ? 0 : 1;
}
