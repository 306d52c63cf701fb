#include "rpkit/revpref.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace rpkit {

void BitMatrix::close_transitively() {
    const int n = n_;
    const int w = words_;
    for (int k = 0; k < n; ++k) {
        const std::uint64_t* rk = row(k);
        for (int i = 0; i < n; ++i) {
            if (i == k) continue;
            if (get(i, k)) {
                std::uint64_t* ri = row(i);
                for (int j = 0; j < w; ++j) ri[j] |= rk[j];
            }
        }
    }
}

bool BitMatrix::intersects_transposed(const BitMatrix& other, int* wi, int* wj) const {
    for (int i = 0; i < n_; ++i) {
        const std::uint64_t* ri = row(i);
        for (int word = 0; word < words_; ++word) {
            std::uint64_t bits = ri[word];
            while (bits) {
                const int j = word * 64 + std::countr_zero(bits);
                bits &= bits - 1;
                if (other.get(j, i)) {
                    if (wi) *wi = i;
                    if (wj) *wj = j;
                    return true;
                }
            }
        }
    }
    return false;
}

ExpenditureMatrix cross_expenditure(const HouseholdSeries& hh) {
    const int T = hh.observations();
    ExpenditureMatrix E(T);
    const int K = static_cast<int>(hh.item_universe.size());
    std::vector<double> price_at(K);
    for (int t = 0; t < T; ++t) {
        std::fill(price_at.begin(), price_at.end(), -1.0);
        for (const auto& ip : hh.days[t].bundle) price_at[ip.item] = ip.unit_price;
        for (int s = 0; s < T; ++s) {
            double total = 0.0;
            for (const auto& ip : hh.days[s].bundle) {
                const double p = price_at[ip.item];
                if (p < 0.0)
                    throw IncompletePriceError("missing price for item '" +
                                               hh.item_universe[ip.item] + "' at observation " +
                                               std::to_string(t) + " of household " +
                                               hh.household_id);
                total += p * ip.quantity;
            }
            E.at(t, s) = total;
        }
    }
    return E;
}

namespace {

// Expenditure ratios rho[t][s] = E[t][s] / E[t][t]; every relation test is a
// comparison of e against a ratio.
std::vector<double> ratio_matrix(const ExpenditureMatrix& E) {
    const int T = E.T;
    std::vector<double> rho(static_cast<size_t>(T) * T);
    for (int t = 0; t < T; ++t) {
        const double wt = E.at(t, t);
        for (int s = 0; s < T; ++s) rho[static_cast<size_t>(t) * T + s] = E.at(t, s) / wt;
    }
    return rho;
}

void fill_relations(const std::vector<double>& rho, int T, double e, double eps,
                    BitMatrix& r0, BitMatrix& p0) {
    if (r0.size() == T) {
        r0.clear();
        p0.clear();
    } else {
        r0 = BitMatrix(T);
        p0 = BitMatrix(T);
    }
    for (int t = 0; t < T; ++t) {
        const double* row = rho.data() + static_cast<size_t>(t) * T;
        for (int s = 0; s < T; ++s) {
            if (row[s] <= e + eps) r0.set(t, s);
            if (row[s] < e - eps) p0.set(t, s);
        }
    }
}

bool garp_holds(const BitMatrix& r0, const BitMatrix& p0, Witness* witness,
                BitMatrix& scratch) {
    scratch = r0;  // vector assignment reuses storage at equal size
    BitMatrix& r = scratch;
    r.close_transitively();
    int t, s;
    if (r.intersects_transposed(p0, &t, &s)) {
        if (witness) *witness = {t, s};
        return false;
    }
    return true;
}

bool warp_holds(const BitMatrix& r0, const BitMatrix& p0, Witness* witness) {
    const int T = r0.size();
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < T; ++s)
            if (t != s && r0.get(t, s) && p0.get(s, t)) {
                if (witness) *witness = {t, s};
                return false;
            }
    return true;
}

struct LevelChecker {
    const std::vector<double>& rho;
    int T;
    double eps;
    Axiom axiom;
    BitMatrix r0, p0, scratch;

    // axiom at efficiency level e exactly
    bool at(double e) {
        fill_relations(rho, T, e, eps, r0, p0);
        return axiom == Axiom::Garp ? garp_holds(r0, p0, nullptr, scratch)
                                    : warp_holds(r0, p0, nullptr);
    }

    // axiom on the open interval just above candidate c (no further candidate
    // in between): both relations reduce to { rho <= c }
    bool above(double c) {
        fill_relations(rho, T, c, eps, r0, p0);
        return axiom == Axiom::Garp ? garp_holds(r0, r0, nullptr, scratch)
                                    : warp_holds(r0, r0, nullptr);
    }
};

std::vector<double> candidate_levels(const std::vector<double>& rho, double eps) {
    std::vector<double> c;
    c.reserve(rho.size() + 2);
    c.push_back(0.0);
    c.push_back(1.0);
    for (double v : rho)
        if (v > eps && v < 1.0 - eps) c.push_back(v);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
}

double aei_exact(const std::vector<double>& rho, int T, Axiom axiom, double eps,
                 const std::vector<double>* cand_shared = nullptr, bool* at_one = nullptr) {
    LevelChecker chk{rho, T, eps, axiom, BitMatrix(), BitMatrix(), BitMatrix()};
    const bool ok_at_one = chk.at(1.0);
    if (at_one) *at_one = ok_at_one;
    if (ok_at_one) return 1.0;
    std::vector<double> cand_own;
    if (!cand_shared) cand_own = candidate_levels(rho, eps);
    const std::vector<double>& cand = cand_shared ? *cand_shared : cand_own;
    // Satisfaction is downward-closed in e, so binary search for the largest
    // satisfying candidate.
    int lo = 0, hi = static_cast<int>(cand.size()) - 1;
    if (!chk.at(cand[0])) return cand[0];
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (chk.at(cand[mid]))
            lo = mid;
        else
            hi = mid;
    }
    // AEI is either the largest satisfying candidate (violation begins on the
    // open interval above it) or the next candidate (violation begins exactly
    // there, leaving [0, c_next) satisfied).
    return chk.above(cand[lo]) ? cand[hi] : cand[lo];
}

double aei_bisect(const std::vector<double>& rho, int T, Axiom axiom, double tol, double eps,
                  bool* at_one = nullptr) {
    LevelChecker chk{rho, T, eps, axiom, BitMatrix(), BitMatrix(), BitMatrix()};
    const bool ok_at_one = chk.at(1.0);
    if (at_one) *at_one = ok_at_one;
    if (ok_at_one) return 1.0;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (chk.at(mid))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

RelationSet relations_at(const ExpenditureMatrix& E, double e, double eps) {
    if (e < 0.0 || e > 1.0) throw ParameterError("efficiency level must be in [0,1]");
    RelationSet rel;
    rel.T = E.T;
    rel.e = e;
    auto rho = ratio_matrix(E);
    fill_relations(rho, E.T, e, eps, rel.r0, rel.p0);
    rel.r = rel.r0;
    rel.r.close_transitively();
    return rel;
}

bool check_garp_e(const ExpenditureMatrix& E, double e, double eps, Witness* witness) {
    auto rho = ratio_matrix(E);
    BitMatrix r0, p0, scratch;
    fill_relations(rho, E.T, e, eps, r0, p0);
    return garp_holds(r0, p0, witness, scratch);
}

bool check_warp_e(const ExpenditureMatrix& E, double e, double eps, Witness* witness) {
    auto rho = ratio_matrix(E);
    BitMatrix r0, p0;
    fill_relations(rho, E.T, e, eps, r0, p0);
    return warp_holds(r0, p0, witness);
}

double aei(const ExpenditureMatrix& E, Axiom axiom, AeiMethod method, double tol, double eps) {
    if (E.T <= 1) return 1.0;
    if (method == AeiMethod::Bisection && tol <= 0.0)
        throw ParameterError("bisection tolerance must be positive");
    auto rho = ratio_matrix(E);
    return method == AeiMethod::Exact ? aei_exact(rho, E.T, axiom, eps)
                                      : aei_bisect(rho, E.T, axiom, tol, eps);
}

EfficiencyResult efficiency(const ExpenditureMatrix& E, const EngineOptions& opts) {
    EfficiencyResult res;
    res.method = opts.method;
    if (E.T <= 1) return res;
    // both axioms share one ratio matrix and (for the exact method) one sorted
    // candidate set
    auto rho = ratio_matrix(E);
    if (opts.method == AeiMethod::Exact) {
        auto cand = candidate_levels(rho, opts.eps);
        res.garp_aei = aei_exact(rho, E.T, Axiom::Garp, opts.eps, &cand, &res.garp_satisfied_at_1);
        res.warp_aei = aei_exact(rho, E.T, Axiom::Warp, opts.eps, &cand, &res.warp_satisfied_at_1);
    } else {
        if (opts.tol <= 0.0) throw ParameterError("bisection tolerance must be positive");
        res.garp_aei = aei_bisect(rho, E.T, Axiom::Garp, opts.tol, opts.eps,
                                  &res.garp_satisfied_at_1);
        res.warp_aei = aei_bisect(rho, E.T, Axiom::Warp, opts.tol, opts.eps,
                                  &res.warp_satisfied_at_1);
    }
    return res;
}

}  // namespace rpkit
