#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string bin() {
    const char* b = std::getenv("RPKIT_BIN");
    REQUIRE(b != nullptr);
    return b;
}

fs::path work_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("rpkit_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd =
        bin() + " " + args + " > " + (work_dir() / "stdout.txt").string() + " 2> " +
        (work_dir() / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<json> read_jsonl(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::vector<json> rows;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(json::parse(line));
    return rows;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("end-to-end pipeline: simulate, aei, rho, report, regress") {
    const auto d = work_dir();
    const auto panel = d / "panel.csv";
    const auto truth = d / "truth.json";

    REQUIRE(run("simulate --output " + q(panel) + " --truth " + q(truth) +
                " --households 12 --goods 5 --periods 10 --mask 0.3 --theta 0.2 --seed 7") == 0);
    CHECK(fs::exists(panel));
    json t = json::parse(slurp(truth));
    CHECK(t.at("households") == 12);
    CHECK(std::abs(t.at("masked_cells").get<double>() / t.at("total_cells").get<double>() - 0.3) <
          0.05);

    const auto results = d / "results.jsonl";
    const auto summary = d / "summary.txt";
    const auto hist_csv = d / "hist.csv";
    const auto hist_svg = d / "hist.svg";
    const auto draws = d / "draws.csv";
    REQUIRE(run("aei --input " + q(panel) + " --output " + q(results) + " --summary " +
                q(summary) + " --hist-csv " + q(hist_csv) + " --hist-svg " + q(hist_svg) +
                " --dump-draws " + q(draws) + " --draws 30 --seed 11 --bins 10") == 0);

    auto rows = read_jsonl(results);
    REQUIRE(rows.size() == 12);
    for (const auto& r : rows) {
        REQUIRE_FALSE(r.value("skipped", false));
        const double aei = r.at("aei_hat").get<double>();
        CHECK(aei > 0.0);
        CHECK(aei <= 1.0);
        CHECK(r.at("warp_aei_hat").get<double>() >= aei - 1e-12);
        CHECK(r.at("rho_hat").get<double>() >= 0.0);
        CHECK(r.at("draws") == 30);
        CHECK(r.at("stabilization_draw").get<int>() >= 1);
    }
    CHECK(slurp(summary).find("AEI summary (12 households)") != std::string::npos);

    // histogram counts add up to the household count
    {
        std::ifstream in(hist_csv);
        std::string line;
        std::getline(in, line);
        CHECK(line == "bin_lo,bin_hi,count");
        long total = 0;
        int bins = 0;
        while (std::getline(in, line)) {
            ++bins;
            total += std::stol(line.substr(line.rfind(',') + 1));
        }
        CHECK(bins == 10);
        CHECK(total == 12);
    }
    CHECK(slurp(hist_svg).find("<svg") != std::string::npos);

    // reruns with the same seed are byte-identical
    const auto results2 = d / "results2.jsonl";
    REQUIRE(run("aei --input " + q(panel) + " --output " + q(results2) +
                " --draws 30 --seed 11") == 0);
    CHECK(slurp(results) == slurp(results2));

    // a different seed changes at least one household on masked data
    const auto results3 = d / "results3.jsonl";
    REQUIRE(run("aei --input " + q(panel) + " --output " + q(results3) +
                " --draws 30 --seed 12") == 0);
    CHECK(slurp(results) != slurp(results3));

    // threads do not change the output
    const auto results4 = d / "results4.jsonl";
    REQUIRE(run("aei --input " + q(panel) + " --output " + q(results4) +
                " --draws 30 --seed 11 --threads 3") == 0);
    CHECK(slurp(results) == slurp(results4));

    // rho over the same panel
    const auto rho_out = d / "rho.jsonl";
    REQUIRE(run("rho --input " + q(panel) + " --output " + q(rho_out) +
                " --draws 30 --seed 11") == 0);
    auto rho_rows = read_jsonl(rho_out);
    REQUIRE(rho_rows.size() == 12);
    CHECK(slurp(rho_out) == slurp(results));  // same estimator, same stream

    // report from the results file
    const auto rep_summary = d / "report.txt";
    REQUIRE(run("report --results " + q(results) + " --summary " + q(rep_summary)) == 0);
    const auto rep = slurp(rep_summary);
    CHECK(rep.find("AEI summary (12 households)") != std::string::npos);
    CHECK(rep.find("rho summary (12 households)") != std::string::npos);

    // covariates keyed by the household ids that actually came out
    const auto cov = d / "cov.csv";
    const auto schema = d / "schema.json";
    {
        std::ofstream out(cov);
        out << "household_id,income,size,region\n";
        int i = 0;
        for (const auto& r : rows) {
            out << r.at("household_id").get<std::string>() << ',' << (300 + 10 * i) << ','
                << (1 + i % 4) << ',' << (i % 2 ? "east" : "west") << '\n';
            ++i;
        }
        std::ofstream s(schema);
        s << R"({"columns":[
              {"name":"income","type":"numeric","group":"economics"},
              {"name":"size","type":"numeric","group":"economics"},
              {"name":"region","type":"categorical","reference":"west"}]})";
    }

    const auto ols_out = d / "ols.json";
    const auto ols_table = d / "ols.txt";
    REQUIRE(run("regress --results " + q(results) + " --covariates " + q(cov) + " --schema " +
                q(schema) + " --draws-file " + q(draws) + " --model ols --output " + q(ols_out) +
                " --table " + q(ols_table)) == 0);
    json ols = json::parse(slurp(ols_out));
    CHECK(ols.at("model") == "ols");
    CHECK(ols.at("draws") == 30);
    REQUIRE(ols.at("coefficients").size() == 4);  // intercept, income, size, region=east
    CHECK(ols.at("coefficients")[0].at("name") == "(Intercept)");
    CHECK(slurp(ols_table).find("Rubin-pooled over 30 draws") != std::string::npos);

    const auto lasso_out = d / "lasso.json";
    REQUIRE(run("regress --results " + q(results) + " --covariates " + q(cov) + " --schema " +
                q(schema) + " --model lasso --lambda 0.01 --output " + q(lasso_out)) == 0);
    json las = json::parse(slurp(lasso_out));
    CHECK(las.at("model") == "lasso");
    CHECK(las.at("lambda") == doctest::Approx(0.01));
    CHECK(las.at("group_importance").size() == 2);  // economics + region

    const auto sgl_out = d / "sgl.json";
    REQUIRE(run("regress --results " + q(results) + " --covariates " + q(cov) + " --schema " +
                q(schema) + " --model sgl --lambda 0.01 --omega 0.5 --output " + q(sgl_out)) == 0);
    CHECK(json::parse(slurp(sgl_out)).at("omega") == doctest::Approx(0.5));
}

TEST_CASE("ingest applies the cleaning rules and writes a report") {
    const auto d = work_dir();
    const auto raw = d / "raw.csv";
    {
        std::ofstream out(raw);
        out << "household_id,date,item_id,quantity,expenditure\n"
            << "h1,2015-03-01,a,1,10\n"
            << "h1,2015-03-01,a,1,12\n"
            << "h1,2015-03-02,b,2,0.2\n"
            << "h1,bad-date,c,1,5\n";
    }
    const auto cleaned = d / "clean.csv";
    const auto report = d / "ingest_report.json";
    REQUIRE(run("ingest --input " + q(raw) + " --output " + q(cleaned) + " --report " +
                q(report)) == 0);
    json rep = json::parse(slurp(report));
    CHECK(rep.at("rows_read") == 4);
    CHECK(rep.at("below_floor") == 1);
    CHECK(rep.at("malformed") == 1);
    CHECK(rep.at("merged_duplicates") == 1);
    CHECK(slurp(cleaned).find("h1,2015-03-01,a,2,22") != std::string::npos);

    // a lower floor keeps the small purchase
    REQUIRE(run("ingest --input " + q(raw) + " --output " + q(cleaned) + " --floor 0.1") == 0);
    CHECK(slurp(cleaned).find("2015-03-02,b") != std::string::npos);
}

TEST_CASE("error conditions map to distinct exit codes") {
    const auto d = work_dir();

    // missing input file
    CHECK(run("aei --input " + q(d / "no_such_file.csv")) == 2);

    // header-only csv: empty panel
    const auto empty = d / "empty.csv";
    std::ofstream(empty) << "household_id,date,item_id,quantity,expenditure\n";
    CHECK(run("ingest --input " + q(empty)) == 3);

    // too few joined rows for the covariate count
    const auto results = d / "tiny_results.jsonl";
    std::ofstream(results) << R"({"household_id":"h1","aei_hat":0.9,"rho_hat":0.0})" << "\n";
    const auto cov = d / "tiny_cov.csv";
    std::ofstream(cov) << "household_id,a,b,c\nh1,1,2,3\n";
    CHECK(run("regress --results " + q(results) + " --covariates " + q(cov) +
              " --model ols") == 4);

    // unknown flag is a CLI parse error
    CHECK(run("aei --no-such-flag") != 0);
}
