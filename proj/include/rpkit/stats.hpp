#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rpkit/common.hpp"

namespace rpkit::stats {

// Covariate matrix with group structure and standardization bookkeeping.
struct DesignMatrix {
    Eigen::MatrixXd W;                    // N x p, standardized (mean 0, sd 1)
    std::vector<std::string> names;       // p column names
    std::vector<int> group;               // p column -> group id
    std::vector<std::string> group_names; // G names
    Eigen::VectorXd col_mean;             // original-scale stats
    Eigen::VectorXd col_sd;

    int n() const { return static_cast<int>(W.rows()); }
    int p() const { return static_cast<int>(W.cols()); }
    int groups() const { return static_cast<int>(group_names.size()); }
};

// Standardizes columns to mean 0, sd 1 (population sd). Constant columns are
// rejected. The group map must partition the columns.
DesignMatrix standardize(const Eigen::MatrixXd& raw, std::vector<std::string> names,
                         std::vector<int> group, std::vector<std::string> group_names);

struct PooledOlsFit {
    std::vector<std::string> names;   // p+1 with leading intercept
    Eigen::VectorXd beta;             // Rubin-pooled coefficients
    Eigen::VectorXd se;               // sqrt(within + (1+1/M) between)
    Eigen::VectorXd within_se;
    Eigen::VectorXd tstat;
    Eigen::VectorXd pval;             // two-sided, t(N-p-1)
    Eigen::MatrixXd per_draw_beta;    // (p+1) x M
    int n = 0;
    int draws = 0;
};

// OLS of each imputation draw's regressand on X (intercept added internally),
// pooled by Rubin's rules. Y is N x M (one column per draw).
PooledOlsFit ols_pooled(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                        const std::vector<std::string>& names);

struct CvPoint {
    double lambda = 0.0;
    double omega = 1.0;
    double mean_mse = 0.0;
    double sd_mse = 0.0;
};

struct RegularizedFit {
    double intercept = 0.0;
    Eigen::VectorXd coef;         // standardized scale
    double lambda = 0.0;
    double omega = 1.0;           // 1 = lasso, 0 = group lasso
    std::vector<CvPoint> cv_path;
    std::vector<int> active;
    std::vector<double> group_norms;  // ||delta(g)||_2 per group
};

struct CvConfig {
    int folds = 10;
    std::uint64_t seed = 0;
    int grid_points = 100;
    double grid_ratio = 1e-4;  // smallest lambda = ratio * lambda_max
};

// (1/2N)||y - a - W d||^2 + lambda ||d||_1, cyclic coordinate descent.
RegularizedFit lasso(const DesignMatrix& dm, const Eigen::VectorXd& y, double lambda);
RegularizedFit lasso_cv(const DesignMatrix& dm, const Eigen::VectorXd& y, const CvConfig& cv = {});

// + lambda sum_g ||d(g)||_2, block coordinate descent.
RegularizedFit group_lasso(const DesignMatrix& dm, const Eigen::VectorXd& y, double lambda);
RegularizedFit group_lasso_cv(const DesignMatrix& dm, const Eigen::VectorXd& y, const CvConfig& cv = {});

// + lambda [ (1-omega) sum_g ||d(g)||_2 + omega ||d||_1 ]
RegularizedFit sparse_group_lasso(const DesignMatrix& dm, const Eigen::VectorXd& y,
                                  double lambda, double omega);
// CV over the lambda grid and omega in {0.05,...,0.95}
RegularizedFit sparse_group_lasso_cv(const DesignMatrix& dm, const Eigen::VectorXd& y,
                                     const CvConfig& cv = {},
                                     std::vector<double> omega_grid = {});

// Map a standardized-scale fit back to original covariate units.
struct OriginalScaleFit {
    double intercept = 0.0;
    Eigen::VectorXd coef;
};
OriginalScaleFit unstandardize(const RegularizedFit& fit, const DesignMatrix& dm);

// Max KKT (subgradient) residual of a fit; near zero at an optimum.
double kkt_residual(const DesignMatrix& dm, const Eigen::VectorXd& y, const RegularizedFit& fit);

struct GroupImportanceRow {
    std::string group;
    int active = 0;
    int total = 0;
    double norm = 0.0;       // ||delta(g)||_2
    double std_norm = 0.0;   // norm / sqrt(|g|)
    double pct = 0.0;        // share of sum of raw norms, in percent
};

std::vector<GroupImportanceRow> group_importance(const RegularizedFit& fit, const DesignMatrix& dm);

// k/(k-1) * (1 - sum var_i / var_total), sample variances. k >= 2.
double cronbach_alpha(const Eigen::MatrixXd& items);

// Two-sided p-value of a t statistic with nu degrees of freedom.
double student_t_pvalue(double t, double nu);

}  // namespace rpkit::stats
