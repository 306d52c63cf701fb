#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "rpkit/panel.hpp"

namespace rpkit {

// Square boolean matrix packed into 64-bit words per row.
class BitMatrix {
public:
    BitMatrix() = default;
    explicit BitMatrix(int n) : n_(n), words_((n + 63) / 64), bits_(static_cast<size_t>(n) * words_, 0) {}

    int size() const { return n_; }

    bool get(int i, int j) const {
        return (bits_[static_cast<size_t>(i) * words_ + (j >> 6)] >> (j & 63)) & 1ULL;
    }
    void set(int i, int j) {
        bits_[static_cast<size_t>(i) * words_ + (j >> 6)] |= 1ULL << (j & 63);
    }
    void clear() { std::fill(bits_.begin(), bits_.end(), 0ULL); }

    const std::uint64_t* row(int i) const { return bits_.data() + static_cast<size_t>(i) * words_; }
    std::uint64_t* row(int i) { return bits_.data() + static_cast<size_t>(i) * words_; }
    int words_per_row() const { return words_; }

    // In-place reachability closure (word-parallel Floyd-Warshall).
    void close_transitively();

    // True iff some row of (*this) AND the corresponding column of other's
    // transpose intersect: exists (i,j) with this(i,j) && other(j,i).
    bool intersects_transposed(const BitMatrix& other, int* wi = nullptr, int* wj = nullptr) const;

    bool operator==(const BitMatrix& o) const = default;

private:
    int n_ = 0;
    int words_ = 0;
    std::vector<std::uint64_t> bits_;
};

struct ExpenditureMatrix {
    int T = 0;
    std::vector<double> data;  // row-major, data[t*T+s] = p_t . x_s

    ExpenditureMatrix() = default;
    explicit ExpenditureMatrix(int t) : T(t), data(static_cast<size_t>(t) * t, 0.0) {}

    double& at(int t, int s) { return data[static_cast<size_t>(t) * T + s]; }
    double at(int t, int s) const { return data[static_cast<size_t>(t) * T + s]; }
};

// E[t][s] = cost of bundle s at day-t prices. Requires complete prices:
// every item appearing in any bundle must be priced at every t.
// Throws IncompletePriceError otherwise.
ExpenditureMatrix cross_expenditure(const HouseholdSeries& hh);

struct RelationSet {
    int T = 0;
    BitMatrix r0;  // e*E[t][t] >= E[t][s]
    BitMatrix p0;  // e*E[t][t] >  E[t][s]
    BitMatrix r;   // transitive closure of r0
    double e = 1.0;
};

struct Witness {
    int t = -1;
    int s = -1;
};

enum class Axiom { Garp, Warp };
enum class AeiMethod { Exact, Bisection };

struct EngineOptions {
    double eps = 1e-9;       // tie tolerance on the expenditure-ratio scale
    AeiMethod method = AeiMethod::Exact;
    double tol = 1e-6;       // bisection convergence
};

RelationSet relations_at(const ExpenditureMatrix& E, double e, double eps = 1e-9);

// GARP_e: no (t,s) with x_t R^e x_s and x_s P0^e x_t.
bool check_garp_e(const ExpenditureMatrix& E, double e, double eps = 1e-9,
                  Witness* witness = nullptr);

// WARP_e: direct pairs only, no closure.
bool check_warp_e(const ExpenditureMatrix& E, double e, double eps = 1e-9,
                  Witness* witness = nullptr);

// Afriat efficiency index: sup { e in [0,1] : axiom holds at e }.
double aei(const ExpenditureMatrix& E, Axiom axiom, AeiMethod method = AeiMethod::Exact,
           double tol = 1e-6, double eps = 1e-9);

struct EfficiencyResult {
    double garp_aei = 1.0;
    double warp_aei = 1.0;
    bool garp_satisfied_at_1 = true;
    bool warp_satisfied_at_1 = true;
    AeiMethod method = AeiMethod::Exact;
};

EfficiencyResult efficiency(const ExpenditureMatrix& E, const EngineOptions& opts = {});

}  // namespace rpkit
