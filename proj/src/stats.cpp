#include "rpkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace rpkit::stats {

namespace {

constexpr double kConvergeTol = 1e-8;
constexpr int kMaxSweeps = 100000;

double soft_threshold(double z, double g) {
    if (z > g) return z - g;
    if (z < -g) return z + g;
    return 0.0;
}

void require_standardized(const DesignMatrix& dm) {
    const double n = dm.n();
    for (int j = 0; j < dm.p(); ++j) {
        const double mean = dm.W.col(j).mean();
        const double sd = std::sqrt(dm.W.col(j).squaredNorm() / n - mean * mean);
        if (std::abs(mean) > 1e-6 || std::abs(sd - 1.0) > 1e-6)
            throw ParameterError("design matrix is not standardized; call standardize() first");
    }
}

std::vector<std::vector<int>> group_members(const DesignMatrix& dm) {
    std::vector<std::vector<int>> members(dm.groups());
    for (int j = 0; j < dm.p(); ++j) members[dm.group[j]].push_back(j);
    for (const auto& m : members)
        if (m.empty()) throw ParameterError("empty covariate group");
    return members;
}

void finalize_fit(RegularizedFit& fit, const DesignMatrix& dm) {
    fit.active.clear();
    for (int j = 0; j < dm.p(); ++j)
        if (fit.coef[j] != 0.0) fit.active.push_back(j);
    fit.group_norms.assign(dm.groups(), 0.0);
    for (int j = 0; j < dm.p(); ++j)
        fit.group_norms[dm.group[j]] += fit.coef[j] * fit.coef[j];
    for (double& g : fit.group_norms) g = std::sqrt(g);
}

// Cyclic coordinate descent for the l1 problem on standardized columns
// (so each column's squared norm / N is 1 and updates are closed-form).
Eigen::VectorXd lasso_path_point(const Eigen::MatrixXd& W, const Eigen::VectorXd& yc,
                                 double lambda, Eigen::VectorXd delta) {
    const int n = static_cast<int>(W.rows());
    const int p = static_cast<int>(W.cols());
    Eigen::VectorXd resid = yc - W * delta;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double max_change = 0.0;
        for (int j = 0; j < p; ++j) {
            const double old = delta[j];
            const double rho = W.col(j).dot(resid) / n + old * (W.col(j).squaredNorm() / n);
            const double upd = soft_threshold(rho, lambda) / (W.col(j).squaredNorm() / n);
            if (upd != old) {
                resid += W.col(j) * (old - upd);
                delta[j] = upd;
                max_change = std::max(max_change, std::abs(upd - old));
            }
        }
        if (max_change < kConvergeTol) break;
    }
    return delta;
}

// Block coordinate descent for the sparse group lasso penalty
// lambda[(1-omega) sum_g ||d_g|| + omega ||d||_1]; omega=0 is the group
// lasso. Inner solve per block is proximal gradient.
Eigen::VectorXd sgl_path_point(const Eigen::MatrixXd& W, const Eigen::VectorXd& yc,
                               const std::vector<std::vector<int>>& members, double lambda,
                               double omega, Eigen::VectorXd delta) {
    const int n = static_cast<int>(W.rows());
    const double lam1 = lambda * omega;
    const double lam2 = lambda * (1.0 - omega);

    struct Block {
        Eigen::MatrixXd Wg;
        double lipschitz;
    };
    std::vector<Block> blocks;
    blocks.reserve(members.size());
    for (const auto& cols : members) {
        Block b;
        b.Wg.resize(n, static_cast<int>(cols.size()));
        for (size_t c = 0; c < cols.size(); ++c) b.Wg.col(static_cast<int>(c)) = W.col(cols[c]);
        Eigen::MatrixXd gram = b.Wg.transpose() * b.Wg / n;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        b.lipschitz = std::max(es.eigenvalues().maxCoeff(), 1e-12);
        blocks.push_back(std::move(b));
    }

    Eigen::VectorXd resid = yc - W * delta;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double max_change = 0.0;
        for (size_t g = 0; g < members.size(); ++g) {
            const auto& cols = members[g];
            const auto& blk = blocks[g];
            Eigen::VectorXd dg(cols.size());
            for (size_t c = 0; c < cols.size(); ++c) dg[static_cast<int>(c)] = delta[cols[c]];

            Eigen::VectorXd r_partial = resid + blk.Wg * dg;  // residual excluding group g

            // whole-group zero test on the soft-thresholded gradient
            Eigen::VectorXd z = blk.Wg.transpose() * r_partial / n;
            Eigen::VectorXd zs = z.unaryExpr([&](double v) { return soft_threshold(v, lam1); });
            Eigen::VectorXd dg_new;
            if (zs.norm() <= lam2 + 1e-15) {
                dg_new = Eigen::VectorXd::Zero(dg.size());
            } else {
                // proximal gradient iterations within the block
                dg_new = dg;
                const double step = 1.0 / blk.lipschitz;
                for (int it = 0; it < kMaxSweeps; ++it) {
                    Eigen::VectorXd grad = blk.Wg.transpose() * (blk.Wg * dg_new - r_partial) / n;
                    Eigen::VectorXd u = dg_new - step * grad;
                    u = u.unaryExpr([&](double v) { return soft_threshold(v, step * lam1); });
                    const double un = u.norm();
                    Eigen::VectorXd next = un <= step * lam2
                                               ? Eigen::VectorXd::Zero(u.size()).eval()
                                               : (u * (1.0 - step * lam2 / un)).eval();
                    const double change = (next - dg_new).lpNorm<Eigen::Infinity>();
                    dg_new = next;
                    if (change < 1e-10) break;
                }
            }
            const double change = (dg_new - dg).lpNorm<Eigen::Infinity>();
            if (change > 0.0) {
                resid = r_partial - blk.Wg * dg_new;
                for (size_t c = 0; c < cols.size(); ++c) delta[cols[c]] = dg_new[static_cast<int>(c)];
                max_change = std::max(max_change, change);
            }
        }
        if (max_change < kConvergeTol) break;
    }
    return delta;
}

double lambda_max_lasso(const Eigen::MatrixXd& W, const Eigen::VectorXd& yc) {
    return (W.transpose() * yc / W.rows()).cwiseAbs().maxCoeff();
}

double lambda_max_sgl(const Eigen::MatrixXd& W, const Eigen::VectorXd& yc,
                      const std::vector<std::vector<int>>& members, double omega) {
    // smallest lambda that zeroes every group:
    // ||soft(z_g, omega*lambda)||_2 <= (1-omega)*lambda, solved by bisection
    const int n = static_cast<int>(W.rows());
    double lam_max = 0.0;
    for (const auto& cols : members) {
        Eigen::VectorXd z(cols.size());
        for (size_t c = 0; c < cols.size(); ++c)
            z[static_cast<int>(c)] = W.col(cols[c]).dot(yc) / n;
        const double zmax = z.cwiseAbs().maxCoeff();
        if (zmax == 0.0) continue;
        double lo = 0.0, hi = omega > 0.0 ? zmax / omega : z.norm() / std::max(1.0 - omega, 1e-12);
        auto zero_at = [&](double lam) {
            double ss = 0.0;
            for (int c = 0; c < z.size(); ++c) {
                const double v = soft_threshold(z[c], omega * lam);
                ss += v * v;
            }
            return std::sqrt(ss) <= (1.0 - omega) * lam;
        };
        while (!zero_at(hi)) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (zero_at(mid))
                hi = mid;
            else
                lo = mid;
        }
        lam_max = std::max(lam_max, hi);
    }
    return lam_max;
}

std::vector<double> lambda_grid(double lam_max, const CvConfig& cv) {
    std::vector<double> grid(cv.grid_points);
    const double log_max = std::log(lam_max);
    const double log_min = std::log(lam_max * cv.grid_ratio);
    for (int i = 0; i < cv.grid_points; ++i) {
        const double f = cv.grid_points == 1 ? 0.0 : static_cast<double>(i) / (cv.grid_points - 1);
        grid[i] = std::exp(log_max + f * (log_min - log_max));  // descending
    }
    return grid;
}

std::vector<int> fold_assignment(int n, int folds, std::uint64_t seed) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(mix64(seed ^ 0x5eedf01dULL));
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(i + 1)));
        std::swap(idx[i], idx[j]);
    }
    std::vector<int> fold(n);
    for (int i = 0; i < n; ++i) fold[idx[i]] = i % folds;
    return fold;
}

// Generic CV driver: fits a path of (lambda, omega) points per fold with warm
// starts, then refits the winner on the full data.
template <class Fitter>
RegularizedFit cv_select(const DesignMatrix& dm, const Eigen::VectorXd& y, const CvConfig& cv,
                         const std::vector<double>& omega_grid, Fitter&& fit_point) {
    require_standardized(dm);
    const int n = dm.n();
    if (cv.folds < 2 || cv.folds > n) throw ParameterError("invalid fold count");
    const double ybar = y.mean();
    Eigen::VectorXd yc = y.array() - ybar;
    const auto fold = fold_assignment(n, cv.folds, cv.seed);

    struct GridPoint {
        double lambda, omega;
        std::vector<double> fold_mse;
    };
    std::vector<GridPoint> points;
    for (double omega : omega_grid) {
        const double lam_max = std::max(lambda_max_sgl(dm.W, yc, group_members(dm), omega), 1e-12);
        for (double lam : lambda_grid(lam_max, cv)) points.push_back({lam, omega, {}});
    }

    for (int f = 0; f < cv.folds; ++f) {
        std::vector<int> train, test;
        for (int i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(i);
        Eigen::MatrixXd Wtr(train.size(), dm.p());
        Eigen::VectorXd ytr(train.size());
        for (size_t i = 0; i < train.size(); ++i) {
            Wtr.row(static_cast<int>(i)) = dm.W.row(train[i]);
            ytr[static_cast<int>(i)] = y[train[i]];
        }
        const double ytr_bar = ytr.mean();
        Eigen::VectorXd ytr_c = ytr.array() - ytr_bar;

        Eigen::VectorXd warm = Eigen::VectorXd::Zero(dm.p());
        double prev_omega = points.empty() ? 1.0 : points.front().omega;
        for (auto& pt : points) {
            if (pt.omega != prev_omega) {
                warm.setZero();  // new omega segment restarts the path
                prev_omega = pt.omega;
            }
            warm = fit_point(Wtr, ytr_c, pt.lambda, pt.omega, warm);
            double mse = 0.0;
            for (int i : test) {
                const double pred = ytr_bar + dm.W.row(i).dot(warm);
                mse += (y[i] - pred) * (y[i] - pred);
            }
            pt.fold_mse.push_back(mse / test.size());
        }
    }

    const GridPoint* best = nullptr;
    double best_mse = 0.0;
    RegularizedFit fit;
    for (const auto& pt : points) {
        const double mean =
            std::accumulate(pt.fold_mse.begin(), pt.fold_mse.end(), 0.0) / pt.fold_mse.size();
        double ss = 0.0;
        for (double v : pt.fold_mse) ss += (v - mean) * (v - mean);
        const double sd =
            pt.fold_mse.size() > 1 ? std::sqrt(ss / (pt.fold_mse.size() - 1)) : 0.0;
        fit.cv_path.push_back({pt.lambda, pt.omega, mean, sd});
        if (!best || mean < best_mse) {
            best = &pt;
            best_mse = mean;
        }
    }

    Eigen::VectorXd full = fit_point(dm.W, yc, best->lambda, best->omega,
                                     Eigen::VectorXd::Zero(dm.p()));
    fit.intercept = ybar;
    fit.coef = full;
    fit.lambda = best->lambda;
    fit.omega = best->omega;
    finalize_fit(fit, dm);
    return fit;
}

}  // namespace

DesignMatrix standardize(const Eigen::MatrixXd& raw, std::vector<std::string> names,
                         std::vector<int> group, std::vector<std::string> group_names) {
    const int n = static_cast<int>(raw.rows());
    const int p = static_cast<int>(raw.cols());
    if (n < 2) throw ParameterError("need at least two rows to standardize");
    if (static_cast<int>(names.size()) != p || static_cast<int>(group.size()) != p)
        throw ParameterError("names/group size mismatch");
    std::vector<char> seen(group_names.size(), 0);
    for (int g : group) {
        if (g < 0 || g >= static_cast<int>(group_names.size()))
            throw ParameterError("group id out of range");
        seen[g] = 1;
    }
    for (size_t g = 0; g < seen.size(); ++g)
        if (!seen[g]) throw ParameterError("group '" + group_names[g] + "' has no columns");

    DesignMatrix dm;
    dm.W.resize(n, p);
    dm.col_mean.resize(p);
    dm.col_sd.resize(p);
    for (int j = 0; j < p; ++j) {
        const double mean = raw.col(j).mean();
        const double var = (raw.col(j).array() - mean).square().sum() / n;
        if (var <= 0.0)
            throw ParameterError("constant column '" + names[j] + "' cannot be standardized");
        const double sd = std::sqrt(var);
        dm.col_mean[j] = mean;
        dm.col_sd[j] = sd;
        dm.W.col(j) = (raw.col(j).array() - mean) / sd;
    }
    dm.names = std::move(names);
    dm.group = std::move(group);
    dm.group_names = std::move(group_names);
    return dm;
}

PooledOlsFit ols_pooled(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                        const std::vector<std::string>& names) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    const int m = static_cast<int>(Y.cols());
    if (m < 1) throw ParameterError("need at least one imputation draw");
    if (Y.rows() != n) throw ParameterError("regressand/design row mismatch");
    if (n <= p + 1) throw InsufficientDataError("need more rows than coefficients");

    Eigen::MatrixXd Xd(n, p + 1);
    Xd.col(0).setOnes();
    Xd.rightCols(p) = X;

    Eigen::MatrixXd xtx = Xd.transpose() * Xd;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
    if (!lu.isInvertible()) {
        // name the offending columns via the LU's detected kernel
        Eigen::MatrixXd kernel = lu.kernel();
        std::ostringstream msg;
        msg << "singular design; collinear columns:";
        for (int j = 0; j < p + 1; ++j)
            if (kernel.row(j).cwiseAbs().maxCoeff() > 1e-8)
                msg << ' ' << (j == 0 ? "(Intercept)" : names[j - 1]);
        throw RankDeficiencyError(msg.str());
    }
    Eigen::MatrixXd xtx_inv = lu.inverse();

    PooledOlsFit fit;
    fit.n = n;
    fit.draws = m;
    fit.names.push_back("(Intercept)");
    for (const auto& s : names) fit.names.push_back(s);
    fit.per_draw_beta.resize(p + 1, m);

    Eigen::VectorXd within = Eigen::VectorXd::Zero(p + 1);
    for (int d = 0; d < m; ++d) {
        Eigen::VectorXd beta = xtx_inv * (Xd.transpose() * Y.col(d));
        fit.per_draw_beta.col(d) = beta;
        const Eigen::VectorXd resid = Y.col(d) - Xd * beta;
        const double s2 = resid.squaredNorm() / (n - p - 1);
        within += s2 * xtx_inv.diagonal();
    }
    within /= m;

    fit.beta = fit.per_draw_beta.rowwise().mean();
    Eigen::VectorXd between = Eigen::VectorXd::Zero(p + 1);
    if (m > 1) {
        for (int d = 0; d < m; ++d) {
            const Eigen::VectorXd dev = fit.per_draw_beta.col(d) - fit.beta;
            between += dev.cwiseProduct(dev);
        }
        between /= (m - 1);
    }
    // Rubin's rules: total variance = within + (1 + 1/M) * between
    Eigen::VectorXd total = within + (1.0 + 1.0 / m) * between;
    fit.within_se = within.cwiseSqrt();
    fit.se = total.cwiseSqrt();
    fit.tstat = fit.beta.cwiseQuotient(fit.se);
    fit.pval.resize(p + 1);
    for (int j = 0; j <= p; ++j) fit.pval[j] = student_t_pvalue(fit.tstat[j], n - p - 1);
    return fit;
}

RegularizedFit lasso(const DesignMatrix& dm, const Eigen::VectorXd& y, double lambda) {
    require_standardized(dm);
    if (lambda < 0.0) throw ParameterError("lambda must be >= 0");
    const double ybar = y.mean();
    Eigen::VectorXd yc = y.array() - ybar;
    RegularizedFit fit;
    fit.intercept = ybar;
    fit.coef = lasso_path_point(dm.W, yc, lambda, Eigen::VectorXd::Zero(dm.p()));
    fit.lambda = lambda;
    fit.omega = 1.0;
    finalize_fit(fit, dm);
    return fit;
}

RegularizedFit lasso_cv(const DesignMatrix& dm, const Eigen::VectorXd& y, const CvConfig& cv) {
    return cv_select(dm, y, cv, {1.0},
                     [](const Eigen::MatrixXd& W, const Eigen::VectorXd& yc, double lam,
                        double, Eigen::VectorXd warm) {
                         return lasso_path_point(W, yc, lam, std::move(warm));
                     });
}

RegularizedFit group_lasso(const DesignMatrix& dm, const Eigen::VectorXd& y, double lambda) {
    return sparse_group_lasso(dm, y, lambda, 0.0);
}

RegularizedFit group_lasso_cv(const DesignMatrix& dm, const Eigen::VectorXd& y,
                              const CvConfig& cv) {
    auto members = group_members(dm);
    return cv_select(dm, y, cv, {0.0},
                     [members](const Eigen::MatrixXd& W, const Eigen::VectorXd& yc, double lam,
                               double, Eigen::VectorXd warm) {
                         return sgl_path_point(W, yc, members, lam, 0.0, std::move(warm));
                     });
}

RegularizedFit sparse_group_lasso(const DesignMatrix& dm, const Eigen::VectorXd& y,
                                  double lambda, double omega) {
    require_standardized(dm);
    if (lambda < 0.0) throw ParameterError("lambda must be >= 0");
    if (omega < 0.0 || omega > 1.0) throw ParameterError("omega must be in [0,1]");
    auto members = group_members(dm);
    const double ybar = y.mean();
    Eigen::VectorXd yc = y.array() - ybar;
    RegularizedFit fit;
    fit.intercept = ybar;
    fit.coef = sgl_path_point(dm.W, yc, members, lambda, omega, Eigen::VectorXd::Zero(dm.p()));
    fit.lambda = lambda;
    fit.omega = omega;
    finalize_fit(fit, dm);
    return fit;
}

RegularizedFit sparse_group_lasso_cv(const DesignMatrix& dm, const Eigen::VectorXd& y,
                                     const CvConfig& cv, std::vector<double> omega_grid) {
    if (omega_grid.empty())
        for (int i = 1; i <= 19; ++i) omega_grid.push_back(i / 20.0);
    auto members = group_members(dm);
    return cv_select(dm, y, cv, omega_grid,
                     [members](const Eigen::MatrixXd& W, const Eigen::VectorXd& yc, double lam,
                               double omega, Eigen::VectorXd warm) {
                         return sgl_path_point(W, yc, members, lam, omega, std::move(warm));
                     });
}

OriginalScaleFit unstandardize(const RegularizedFit& fit, const DesignMatrix& dm) {
    OriginalScaleFit out;
    out.coef = fit.coef.cwiseQuotient(dm.col_sd);
    out.intercept = fit.intercept - out.coef.dot(dm.col_mean);
    return out;
}

double kkt_residual(const DesignMatrix& dm, const Eigen::VectorXd& y, const RegularizedFit& fit) {
    const int n = dm.n();
    Eigen::VectorXd yc = y.array() - fit.intercept;
    Eigen::VectorXd resid = yc - dm.W * fit.coef;
    Eigen::VectorXd grad = dm.W.transpose() * resid / n;  // negative gradient of the loss
    const double lam1 = fit.lambda * fit.omega;
    const double lam2 = fit.lambda * (1.0 - fit.omega);
    auto members = group_members(dm);

    double worst = 0.0;
    for (const auto& cols : members) {
        double gnorm = 0.0;
        for (int j : cols) gnorm += fit.coef[j] * fit.coef[j];
        gnorm = std::sqrt(gnorm);
        if (gnorm == 0.0) {
            // group stationarity: ||soft(grad_g, lam1)|| <= lam2
            double ss = 0.0;
            for (int j : cols) {
                const double v = soft_threshold(grad[j], lam1);
                ss += v * v;
            }
            worst = std::max(worst, std::sqrt(ss) - lam2);
        } else {
            for (int j : cols) {
                const double group_term = lam2 * fit.coef[j] / gnorm;
                if (fit.coef[j] != 0.0) {
                    const double sign = fit.coef[j] > 0.0 ? 1.0 : -1.0;
                    worst = std::max(worst, std::abs(grad[j] - lam1 * sign - group_term));
                } else {
                    worst = std::max(worst, std::abs(grad[j] - group_term) - lam1);
                }
            }
        }
    }
    return std::max(worst, 0.0);
}

std::vector<GroupImportanceRow> group_importance(const RegularizedFit& fit,
                                                 const DesignMatrix& dm) {
    std::vector<GroupImportanceRow> rows(dm.groups());
    double norm_sum = 0.0;
    for (int g = 0; g < dm.groups(); ++g) {
        rows[g].group = dm.group_names[g];
        rows[g].norm = fit.group_norms[g];
        norm_sum += fit.group_norms[g];
    }
    for (int j = 0; j < dm.p(); ++j) {
        ++rows[dm.group[j]].total;
        if (fit.coef[j] != 0.0) ++rows[dm.group[j]].active;
    }
    for (auto& r : rows) {
        r.std_norm = r.total ? r.norm / std::sqrt(static_cast<double>(r.total)) : 0.0;
        r.pct = norm_sum > 0.0 ? 100.0 * r.norm / norm_sum : 0.0;
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.norm > b.norm; });
    return rows;
}

double cronbach_alpha(const Eigen::MatrixXd& items) {
    const int n = static_cast<int>(items.rows());
    const int k = static_cast<int>(items.cols());
    if (k < 2) throw ParameterError("Cronbach's alpha needs at least two items");
    if (n < 2) throw ParameterError("Cronbach's alpha needs at least two observations");
    auto sample_var = [n](const Eigen::VectorXd& v) {
        const double mean = v.mean();
        return (v.array() - mean).square().sum() / (n - 1);
    };
    double item_var_sum = 0.0;
    for (int j = 0; j < k; ++j) item_var_sum += sample_var(items.col(j));
    const double total_var = sample_var(items.rowwise().sum());
    if (total_var <= 0.0) throw ParameterError("zero total variance; alpha undefined");
    return k / (k - 1.0) * (1.0 - item_var_sum / total_var);
}

namespace {

// Regularized incomplete beta by continued fraction (Lentz).
double betacf(double a, double b, double x) {
    const double eps = 3e-14, fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

double betai(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log(1.0 - x);
    const double bt = std::exp(ln);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_pvalue(double t, double nu) {
    if (nu <= 0.0) throw ParameterError("degrees of freedom must be positive");
    return betai(0.5 * nu, 0.5, nu / (nu + t * t));
}

}  // namespace rpkit::stats
