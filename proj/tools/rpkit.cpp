// rpkit: revealed-preference decision-quality toolkit.
// Pipeline: ingest -> simulate/aei/rho -> regress -> report.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rpkit/imputation.hpp"
#include "rpkit/panel.hpp"
#include "rpkit/revpref.hpp"
#include "rpkit/stats.hpp"
#include "rpkit/synth.hpp"

using nlohmann::json;

namespace {

std::string resolve_input(const std::string& path) {
    namespace fs = std::filesystem;
    if (path.empty() || fs::path(path).is_absolute() || fs::exists(path)) return path;
    if (const char* dir = std::getenv("RPKIT_DATA_DIR")) {
        fs::path candidate = fs::path(dir) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    return path;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw rpkit::Error("cannot open output file " + path);
    return out;
}

std::string fmt(double v, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

struct HouseholdResult {
    std::string household_id;
    bool skipped = false;
    std::string reason;
    rpkit::MonteCarloEstimate est;
    int stabilization_draw = 1;
};

struct RunSettings {
    int draws = 1000;
    std::uint64_t seed = 0;
    double tol = 1e-6;
    std::string method = "exact";
    std::string pool = "panel";
    int threads = 1;
    int bins = 30;
};

rpkit::McOptions mc_options(const RunSettings& s) {
    rpkit::McOptions opts;
    opts.draws = s.draws;
    opts.seed = s.seed;
    opts.engine.tol = s.tol;
    opts.engine.method =
        s.method == "bisect" ? rpkit::AeiMethod::Bisection : rpkit::AeiMethod::Exact;
    return opts;
}

std::vector<HouseholdResult> run_panel(const rpkit::TransactionPanel& panel,
                                       const RunSettings& settings) {
    const auto scope = settings.pool == "household" ? rpkit::PoolScope::PerHousehold
                                                    : rpkit::PoolScope::Pooled;
    const auto bank = rpkit::build_price_distributions(panel, scope);
    const auto opts = mc_options(settings);

    std::vector<const rpkit::HouseholdSeries*> series;
    for (const auto& [id, hh] : panel.households) series.push_back(&hh);
    std::vector<HouseholdResult> results(series.size());

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < series.size(); i = next.fetch_add(1)) {
            HouseholdResult& r = results[i];
            r.household_id = series[i]->household_id;
            try {
                r.est = rpkit::estimate_aei(*series[i], bank, opts);
                r.stabilization_draw =
                    r.est.draws >= 2 ? rpkit::convergence_diagnostic(r.est).stabilization_draw : 1;
            } catch (const rpkit::UnpriceableItemError& e) {
                r.skipped = true;
                r.reason = e.what();
            }
        }
    };
    const int nthreads = std::max(1, settings.threads);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return results;
}

void write_results_jsonl(const std::vector<HouseholdResult>& results, const std::string& path) {
    auto out = open_out(path);
    for (const auto& r : results) {
        json j;
        j["household_id"] = r.household_id;
        if (r.skipped) {
            j["skipped"] = true;
            j["reason"] = r.reason;
        } else {
            j["aei_hat"] = r.est.aei_hat;
            j["aei_sd"] = r.est.aei_sd;
            j["warp_aei_hat"] = r.est.warp_aei_hat;
            j["rho_hat"] = r.est.rho_hat;
            j["draws"] = r.est.draws;
            j["stabilization_draw"] = r.stabilization_draw;
        }
        out << j.dump() << '\n';
    }
}

void write_draws_csv(const std::vector<HouseholdResult>& results, const std::string& path) {
    auto out = open_out(path);
    out << "household_id";
    int draws = 0;
    for (const auto& r : results)
        if (!r.skipped) draws = std::max(draws, r.est.draws);
    for (int d = 0; d < draws; ++d) out << ",draw" << d;
    out << '\n';
    for (const auto& r : results) {
        if (r.skipped) continue;
        out << r.household_id;
        for (double v : r.est.garp_aei) out << ',' << fmt(v, 9);
        out << '\n';
    }
}

struct Summary {
    double mean = 0.0, sd = 0.0, median = 0.0, min = 0.0, max = 0.0;
    int n = 0;
};

Summary summarize(std::vector<double> values) {
    Summary s;
    s.n = static_cast<int>(values.size());
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.max = values.back();
    s.median = s.n % 2 ? values[s.n / 2] : 0.5 * (values[s.n / 2 - 1] + values[s.n / 2]);
    for (double v : values) s.mean += v;
    s.mean /= s.n;
    for (double v : values) s.sd += (v - s.mean) * (v - s.mean);
    s.sd = s.n > 1 ? std::sqrt(s.sd / (s.n - 1)) : 0.0;
    return s;
}

void write_summary(std::ostream& out, const std::string& label, const Summary& s) {
    out << label << " summary (" << s.n << " households)\n"
        << "  mean   " << fmt(s.mean, 4) << '\n'
        << "  sd     " << fmt(s.sd, 4) << '\n'
        << "  median " << fmt(s.median, 4) << '\n'
        << "  min    " << fmt(s.min, 4) << '\n'
        << "  max    " << fmt(s.max, 4) << '\n';
}

std::vector<long> histogram_bins(const std::vector<double>& values, int bins) {
    std::vector<long> counts(bins, 0);
    for (double v : values) {
        int b = static_cast<int>(v * bins);
        if (b >= bins) b = bins - 1;
        if (b < 0) b = 0;
        ++counts[b];
    }
    return counts;
}

void write_histogram_csv(const std::vector<double>& values, int bins, const std::string& path) {
    auto counts = histogram_bins(values, bins);
    auto out = open_out(path);
    out << "bin_lo,bin_hi,count\n";
    for (int b = 0; b < bins; ++b)
        out << fmt(static_cast<double>(b) / bins, 6) << ',' << fmt((b + 1.0) / bins, 6) << ','
            << counts[b] << '\n';
}

void write_histogram_svg(const std::vector<double>& values, int bins, const std::string& path,
                         const std::string& title) {
    auto counts = histogram_bins(values, bins);
    const long peak = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
    const int width = 640, height = 400, margin = 40;
    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << title << "</text>\n";
    const double plot_w = width - 2.0 * margin, plot_h = height - 2.0 * margin;
    for (int b = 0; b < bins; ++b) {
        const double h = peak ? plot_h * counts[b] / peak : 0.0;
        out << "<rect x=\"" << fmt(margin + plot_w * b / bins, 2) << "\" y=\""
            << fmt(height - margin - h, 2) << "\" width=\"" << fmt(plot_w / bins - 1.0, 2)
            << "\" height=\"" << fmt(h, 2) << "\" fill=\"#4477aa\"/>\n";
    }
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
        << width - margin << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << margin << "\" y=\"" << height - margin + 16
        << "\" font-size=\"10\">0</text>\n";
    out << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 16
        << "\" text-anchor=\"end\" font-size=\"10\">1</text>\n";
    out << "</svg>\n";
}

std::vector<double> collect(const std::vector<HouseholdResult>& results,
                            double rpkit::MonteCarloEstimate::*field) {
    std::vector<double> v;
    for (const auto& r : results)
        if (!r.skipped) v.push_back(r.est.*field);
    return v;
}

// ---------------------------------------------------------------- covariates

struct CovariateTable {
    std::vector<std::string> household_ids;
    Eigen::MatrixXd W;
    std::vector<std::string> names;
    std::vector<int> group;
    std::vector<std::string> group_names;
};

struct ColumnSchema {
    std::string type = "numeric";  // numeric | categorical
    std::string reference;
    std::string group;
};

std::vector<std::string> split_line(const std::string& line) {
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

CovariateTable load_covariates(const std::string& csv_path, const std::string& schema_path) {
    std::map<std::string, ColumnSchema> schema;
    if (!schema_path.empty()) {
        std::ifstream in(resolve_input(schema_path));
        if (!in) throw rpkit::Error("cannot open schema " + schema_path);
        json j = json::parse(in);
        for (const auto& col : j.at("columns")) {
            ColumnSchema cs;
            cs.type = col.value("type", "numeric");
            cs.reference = col.value("reference", "");
            cs.group = col.value("group", "");
            schema[col.at("name").get<std::string>()] = cs;
        }
    }

    std::ifstream in(resolve_input(csv_path));
    if (!in) throw rpkit::Error("cannot open covariates " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw rpkit::Error("empty covariates file");
    auto header = split_line(line);
    if (header.empty() || header[0] != "household_id")
        throw rpkit::Error("covariates must start with household_id column");

    std::vector<std::vector<std::string>> rows;
    CovariateTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_line(line);
        f.resize(header.size());
        table.household_ids.push_back(f[0]);
        rows.push_back(std::move(f));
    }

    struct OutCol {
        std::string name;
        std::string group;
        std::vector<double> values;
    };
    std::vector<OutCol> cols;
    for (size_t c = 1; c < header.size(); ++c) {
        const auto& col_name = header[c];
        ColumnSchema cs;
        if (auto it = schema.find(col_name); it != schema.end()) cs = it->second;
        const std::string group = cs.group.empty() ? col_name : cs.group;
        if (cs.type == "categorical") {
            std::vector<std::string> levels;
            for (const auto& r : rows)
                if (std::find(levels.begin(), levels.end(), r[c]) == levels.end())
                    levels.push_back(r[c]);
            std::sort(levels.begin(), levels.end());
            for (const auto& level : levels) {
                if (level == cs.reference || (cs.reference.empty() && level == levels.front()))
                    continue;  // omitted reference level
                OutCol oc;
                oc.name = col_name + "=" + level;
                oc.group = group;
                for (const auto& r : rows) oc.values.push_back(r[c] == level ? 1.0 : 0.0);
                cols.push_back(std::move(oc));
            }
        } else {
            OutCol oc;
            oc.name = col_name;
            oc.group = group;
            for (const auto& r : rows) {
                try {
                    oc.values.push_back(std::stod(r[c]));
                } catch (...) {
                    throw rpkit::Error("non-numeric value '" + r[c] + "' in column " + col_name);
                }
            }
            cols.push_back(std::move(oc));
        }
    }

    table.W.resize(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j) {
        table.names.push_back(cols[j].name);
        auto it = std::find(table.group_names.begin(), table.group_names.end(), cols[j].group);
        int gid;
        if (it == table.group_names.end()) {
            gid = static_cast<int>(table.group_names.size());
            table.group_names.push_back(cols[j].group);
        } else {
            gid = static_cast<int>(it - table.group_names.begin());
        }
        table.group.push_back(gid);
        for (size_t i = 0; i < rows.size(); ++i)
            table.W(static_cast<int>(i), static_cast<int>(j)) = cols[j].values[i];
    }
    return table;
}

std::string stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    if (p < 0.1) return ".";
    return "";
}

// ------------------------------------------------------------------ commands

int cmd_ingest(const std::string& input, const std::string& output, const std::string& report,
               double floor) {
    rpkit::CleaningConfig cfg;
    cfg.expenditure_floor = floor;
    auto result = rpkit::ingest_transactions_file(resolve_input(input), cfg);
    if (!output.empty()) {
        auto out = open_out(output);
        rpkit::write_transactions_csv(result.panel, out);
    }
    if (!report.empty()) open_out(report) << result.report.to_json() << '\n';
    std::cout << "ingested " << result.report.households << " households, kept "
              << result.report.rows_kept << "/" << result.report.rows_read << " rows\n";
    return 0;
}

int cmd_simulate(const rpkit::SyntheticScenario& sc, const std::string& output,
                 const std::string& truth_path) {
    auto synth = rpkit::generate_panel(sc);
    auto out = open_out(output);
    rpkit::write_transactions_csv(synth.panel, out);
    if (!truth_path.empty()) open_out(truth_path) << synth.truth.to_json() << '\n';
    std::cout << "simulated " << sc.households << " households (" << sc.periods << " days, "
              << sc.goods << " goods), mask fraction " << fmt(synth.truth.mask_fraction(), 4)
              << '\n';
    return 0;
}

int cmd_aei(const std::string& input, const std::string& output, const std::string& summary_path,
            const std::string& hist_csv, const std::string& hist_svg,
            const std::string& draws_path, const RunSettings& settings) {
    auto ingest = rpkit::ingest_transactions_file(resolve_input(input));
    auto results = run_panel(ingest.panel, settings);
    if (!output.empty()) write_results_jsonl(results, output);
    if (!draws_path.empty()) write_draws_csv(results, draws_path);
    auto values = collect(results, &rpkit::MonteCarloEstimate::aei_hat);
    const auto s = summarize(values);
    std::ostringstream block;
    write_summary(block, "AEI", s);
    std::cout << block.str();
    if (!summary_path.empty()) open_out(summary_path) << block.str();
    if (!hist_csv.empty()) write_histogram_csv(values, settings.bins, hist_csv);
    if (!hist_svg.empty()) write_histogram_svg(values, settings.bins, hist_svg, "AEI distribution");
    long skipped = std::count_if(results.begin(), results.end(),
                                 [](const auto& r) { return r.skipped; });
    if (skipped) std::cout << skipped << " household(s) skipped (unpriceable items)\n";
    return 0;
}

int cmd_rho(const std::string& input, const std::string& output, const RunSettings& settings) {
    auto ingest = rpkit::ingest_transactions_file(resolve_input(input));
    auto results = run_panel(ingest.panel, settings);
    if (!output.empty()) write_results_jsonl(results, output);
    auto values = collect(results, &rpkit::MonteCarloEstimate::rho_hat);
    const auto s = summarize(values);
    std::cout << "rho_hat panel mean " << fmt(s.mean, 4) << " over " << s.n << " households\n";
    return 0;
}

int cmd_report(const std::string& results_path, const std::string& summary_path,
               const std::string& hist_csv, const std::string& hist_svg, int bins) {
    std::ifstream in(resolve_input(results_path));
    if (!in) throw rpkit::Error("cannot open results " + results_path);
    std::vector<double> aei, rho;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.value("skipped", false)) continue;
        aei.push_back(j.at("aei_hat").get<double>());
        rho.push_back(j.at("rho_hat").get<double>());
    }
    std::ostringstream block;
    write_summary(block, "AEI", summarize(aei));
    write_summary(block, "rho", summarize(rho));
    std::cout << block.str();
    if (!summary_path.empty()) open_out(summary_path) << block.str();
    if (!hist_csv.empty()) write_histogram_csv(aei, bins, hist_csv);
    if (!hist_svg.empty()) write_histogram_svg(aei, bins, hist_svg, "AEI distribution");
    return 0;
}

int cmd_regress(const std::string& results_path, const std::string& covariates_path,
                const std::string& schema_path, const std::string& draws_path,
                const std::string& model, double lambda, double omega, int folds,
                std::uint64_t seed, const std::string& output, const std::string& table_path) {
    // regressand: aei_hat per household (plus per-draw matrix for OLS pooling)
    std::ifstream in(resolve_input(results_path));
    if (!in) throw rpkit::Error("cannot open results " + results_path);
    std::map<std::string, double> aei_by_hh;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.value("skipped", false)) continue;
        aei_by_hh[j.at("household_id").get<std::string>()] = j.at("aei_hat").get<double>();
    }

    std::map<std::string, std::vector<double>> draws_by_hh;
    if (!draws_path.empty()) {
        std::ifstream din(resolve_input(draws_path));
        if (!din) throw rpkit::Error("cannot open draws " + draws_path);
        std::getline(din, line);  // header
        while (std::getline(din, line)) {
            if (line.empty()) continue;
            auto f = split_line(line);
            std::vector<double> v;
            for (size_t i = 1; i < f.size(); ++i) v.push_back(std::stod(f[i]));
            draws_by_hh[f[0]] = std::move(v);
        }
    }

    auto cov = load_covariates(covariates_path, schema_path);

    // inner join on household_id
    std::vector<int> keep;
    for (size_t i = 0; i < cov.household_ids.size(); ++i)
        if (aei_by_hh.count(cov.household_ids[i])) keep.push_back(static_cast<int>(i));
    const int n = static_cast<int>(keep.size());
    const int p = static_cast<int>(cov.names.size());
    if (n < p + 2)
        throw rpkit::InsufficientDataError("join yields " + std::to_string(n) +
                                           " rows for " + std::to_string(p) + " covariates");

    Eigen::MatrixXd W(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        W.row(i) = cov.W.row(keep[i]);
        y[i] = aei_by_hh.at(cov.household_ids[keep[i]]);
    }

    json out;
    std::ostringstream table;
    if (model == "ols") {
        int m = 1;
        for (const auto& [hh, v] : draws_by_hh) m = std::max(m, static_cast<int>(v.size()));
        Eigen::MatrixXd Y(n, m);
        for (int i = 0; i < n; ++i) {
            auto it = draws_by_hh.find(cov.household_ids[keep[i]]);
            if (it != draws_by_hh.end() && static_cast<int>(it->second.size()) == m)
                for (int d = 0; d < m; ++d) Y(i, d) = it->second[d];
            else
                Y.row(i).setConstant(y[i]);
        }
        auto fit = rpkit::stats::ols_pooled(Y, W, cov.names);
        out["model"] = "ols";
        out["draws"] = fit.draws;
        table << "OLS (Rubin-pooled over " << fit.draws << " draws)\n";
        table << "  coefficient            estimate        se        t         p\n";
        json coefs = json::array();
        for (size_t j = 0; j < fit.names.size(); ++j) {
            coefs.push_back({{"name", fit.names[j]},
                             {"estimate", fit.beta[j]},
                             {"se", fit.se[j]},
                             {"t", fit.tstat[j]},
                             {"p", fit.pval[j]}});
            char buf[160];
            std::snprintf(buf, sizeof buf, "  %-22s %9.4f %9.4f %8.3f %9.4f %s\n",
                          fit.names[j].c_str(), fit.beta[j], fit.se[j], fit.tstat[j],
                          fit.pval[j], stars(fit.pval[j]).c_str());
            table << buf;
        }
        table << "  signif: *** p<0.001, ** p<0.01, * p<0.05, . p<0.1\n";
        out["coefficients"] = coefs;
    } else {
        auto dm = rpkit::stats::standardize(W, cov.names, cov.group, cov.group_names);
        rpkit::stats::CvConfig cv;
        cv.folds = folds;
        cv.seed = seed;
        rpkit::stats::RegularizedFit fit;
        if (model == "lasso")
            fit = lambda >= 0.0 ? rpkit::stats::lasso(dm, y, lambda)
                                : rpkit::stats::lasso_cv(dm, y, cv);
        else if (model == "gl")
            fit = lambda >= 0.0 ? rpkit::stats::group_lasso(dm, y, lambda)
                                : rpkit::stats::group_lasso_cv(dm, y, cv);
        else if (model == "sgl")
            fit = lambda >= 0.0 ? rpkit::stats::sparse_group_lasso(dm, y, lambda,
                                                                   omega >= 0.0 ? omega : 0.95)
                                : rpkit::stats::sparse_group_lasso_cv(dm, y, cv);
        else
            throw rpkit::ParameterError("unknown model " + model);

        auto orig = rpkit::stats::unstandardize(fit, dm);
        out["model"] = model;
        out["lambda"] = fit.lambda;
        out["omega"] = fit.omega;
        out["intercept"] = fit.intercept;
        json coefs = json::array();
        for (int j = 0; j < dm.p(); ++j)
            coefs.push_back({{"name", dm.names[j]},
                             {"standardized", fit.coef[j]},
                             {"original_scale", orig.coef[j]}});
        out["coefficients"] = coefs;
        json path = json::array();
        for (const auto& cp : fit.cv_path)
            path.push_back({{"lambda", cp.lambda},
                            {"omega", cp.omega},
                            {"mean_mse", cp.mean_mse},
                            {"sd_mse", cp.sd_mse}});
        out["cv_path"] = path;

        table << model << " fit: lambda=" << fmt(fit.lambda, 6) << " omega=" << fmt(fit.omega, 2)
              << " active=" << fit.active.size() << "/" << dm.p() << '\n';
        table << "  coefficient            std.coef\n";
        for (int j : fit.active) {
            char buf[120];
            std::snprintf(buf, sizeof buf, "  %-22s %9.5f\n", dm.names[j].c_str(), fit.coef[j]);
            table << buf;
        }
        {
            auto importance = rpkit::stats::group_importance(fit, dm);
            table << "\n  group importance\n";
            table << "  group                   active    norm  std.norm   % of total\n";
            json imp = json::array();
            for (const auto& r : importance) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "  %-22s %3d/%-3d %8.4f %8.4f %10.1f\n",
                              r.group.c_str(), r.active, r.total, r.norm, r.std_norm, r.pct);
                table << buf;
                imp.push_back({{"group", r.group},
                               {"active", r.active},
                               {"total", r.total},
                               {"norm", r.norm},
                               {"std_norm", r.std_norm},
                               {"pct", r.pct}});
            }
            out["group_importance"] = imp;
        }
    }

    std::cout << table.str();
    if (!output.empty()) open_out(output) << out.dump(2) << '\n';
    if (!table_path.empty()) open_out(table_path) << table.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"revealed-preference decision-quality toolkit"};
    app.set_config("--config");
    app.require_subcommand(1);

    // shared run settings
    RunSettings rs;
    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--draws", rs.draws, "Monte-Carlo draws per household")->check(CLI::PositiveNumber);
        sub->add_option("--seed", rs.seed, "RNG seed");
        sub->add_option("--tol", rs.tol, "bisection tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--method", rs.method, "AEI method")->check(CLI::IsMember({"exact", "bisect"}));
        sub->add_option("--pool", rs.pool, "price pooling scope")->check(CLI::IsMember({"panel", "household"}));
        sub->add_option("--threads", rs.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--bins", rs.bins, "histogram bin count")->check(CLI::PositiveNumber);
    };

    // ingest
    std::string in_path, out_path, report_path;
    double floor = 0.5;
    auto* ingest = app.add_subcommand("ingest", "clean a raw transaction CSV");
    ingest->add_option("--input", in_path)->required();
    ingest->add_option("--output", out_path);
    ingest->add_option("--report", report_path);
    ingest->add_option("--floor", floor, "expenditure floor in DKK");

    // simulate
    rpkit::SyntheticScenario sc;
    std::string sim_out, truth_out, utility = "cobb";
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic panel");
    simulate->add_option("--output", sim_out)->required();
    simulate->add_option("--truth", truth_out);
    simulate->add_option("--households", sc.households)->check(CLI::PositiveNumber);
    simulate->add_option("--goods", sc.goods)->check(CLI::PositiveNumber);
    simulate->add_option("--periods", sc.periods)->check(CLI::PositiveNumber);
    simulate->add_option("--theta", sc.theta);
    simulate->add_option("--mask", sc.mask);
    simulate->add_option("--seed", sc.seed);
    simulate->add_option("--utility", utility)->check(CLI::IsMember({"cobb", "ces"}));
    simulate->add_option("--ces-elasticity", sc.ces_elasticity);
    simulate->add_option("--price-sigma", sc.price_sigma);
    simulate->add_option("--budget-mu", sc.budget_mu);
    simulate->add_option("--budget-sigma", sc.budget_sigma);

    // aei
    std::string aei_in, aei_out, aei_summary, aei_hist_csv, aei_hist_svg, aei_draws;
    auto* aei_cmd = app.add_subcommand("aei", "estimate per-household AEI by price resampling");
    aei_cmd->add_option("--input", aei_in)->required();
    aei_cmd->add_option("--output", aei_out);
    aei_cmd->add_option("--summary", aei_summary);
    aei_cmd->add_option("--hist-csv", aei_hist_csv);
    aei_cmd->add_option("--hist-svg", aei_hist_svg);
    aei_cmd->add_option("--dump-draws", aei_draws);
    add_run_flags(aei_cmd);

    // rho
    std::string rho_in, rho_out;
    auto* rho_cmd = app.add_subcommand("rho", "transitivity-failure incidence per household");
    rho_cmd->add_option("--input", rho_in)->required();
    rho_cmd->add_option("--output", rho_out);
    add_run_flags(rho_cmd);

    // report
    std::string rep_results, rep_summary, rep_hist_csv, rep_hist_svg;
    int rep_bins = 30;
    auto* report = app.add_subcommand("report", "summarize a results JSON-lines file");
    report->add_option("--results", rep_results)->required();
    report->add_option("--summary", rep_summary);
    report->add_option("--hist-csv", rep_hist_csv);
    report->add_option("--hist-svg", rep_hist_svg);
    report->add_option("--bins", rep_bins)->check(CLI::PositiveNumber);

    // regress
    std::string rg_results, rg_cov, rg_schema, rg_draws, rg_model = "ols", rg_out, rg_table;
    double rg_lambda = -1.0, rg_omega = -1.0;
    int rg_folds = 10;
    std::uint64_t rg_seed = 0;
    auto* regress = app.add_subcommand("regress", "regress AEI estimates on covariates");
    regress->add_option("--results", rg_results)->required();
    regress->add_option("--covariates", rg_cov)->required();
    regress->add_option("--schema", rg_schema);
    regress->add_option("--draws-file", rg_draws);
    regress->add_option("--model", rg_model)->check(CLI::IsMember({"ols", "lasso", "gl", "sgl"}));
    regress->add_option("--lambda", rg_lambda, "fixed lambda (default: 10-fold CV)");
    regress->add_option("--omega", rg_omega, "fixed omega for sgl");
    regress->add_option("--folds", rg_folds)->check(CLI::PositiveNumber);
    regress->add_option("--seed", rg_seed);
    regress->add_option("--output", rg_out);
    regress->add_option("--table", rg_table);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return cmd_ingest(in_path, out_path, report_path, floor);
        if (*simulate) {
            sc.utility = utility == "ces" ? rpkit::UtilityModel::Ces : rpkit::UtilityModel::CobbDouglas;
            return cmd_simulate(sc, sim_out, truth_out);
        }
        if (*aei_cmd)
            return cmd_aei(aei_in, aei_out, aei_summary, aei_hist_csv, aei_hist_svg, aei_draws, rs);
        if (*rho_cmd) return cmd_rho(rho_in, rho_out, rs);
        if (*report) return cmd_report(rep_results, rep_summary, rep_hist_csv, rep_hist_svg, rep_bins);
        if (*regress)
            return cmd_regress(rg_results, rg_cov, rg_schema, rg_draws, rg_model, rg_lambda,
                               rg_omega, rg_folds, rg_seed, rg_out, rg_table);
    } catch (const rpkit::EmptyPanelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const rpkit::InsufficientDataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
