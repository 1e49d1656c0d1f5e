#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ruinlab::exact {

// Thrown when a formula is asked outside the range where it is numerically
// meaningful; the message names the path to use instead.
class regime_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class TableKind { proportional, simple };

// Dense triangular table of win probabilities p(m,n) (kind=proportional) or
// q(m,n) (kind=simple), filled by dynamic programming along anti-diagonals
// m+n = s. Every interior entry is a convex combination of the previous
// diagonal, so the fill is stable in double precision. Immutable once built.
class ProbabilityTable {
public:
    // Full tables are capped at m+n <= 4000 (~64 MB); use values_at() for
    // larger single points.
    static constexpr int kMaxFullTotal = 4000;

    static ProbabilityTable build(TableKind kind, int max_total);

    double at(int m, int n) const;
    int max_total() const { return max_total_; }
    TableKind kind() const { return kind_; }

    // CSV with header "m,n,p" (or "m,n,q"), 15 significant digits.
    void write_csv(std::ostream& os) const;

private:
    ProbabilityTable(TableKind kind, int max_total)
        : kind_(kind), max_total_(max_total) {}

    TableKind kind_;
    int max_total_;
    std::vector<double> values_;  // diagonal-major, offset_[s] + m
    std::vector<std::size_t> offset_;
};

// Rolling two-diagonal evaluation of arbitrary (m,n) points without storing
// the full triangle. Points may total up to m+n <= 30000.
constexpr int kMaxSliceTotal = 30000;
std::vector<double> values_at(TableKind kind,
                              std::span<const std::pair<int, int>> points);

// Exact rational evaluation of the alternating sum
//   p(m,n) = sum_{j=0}^{n} (-1)^j/j! * (n-j)^{m+n}/(m+n-j)!.
// Individual terms exceed double range long before m+n = 200 while the result
// stays in [0,1], hence the exact-arithmetic regime m+n <= 60.
constexpr int kExplicitMaxTotal = 60;
mpq_class p_explicit(int m, int n);

// q(m,n) = sum_{k=0}^{n-1} 2^{-(m+k)} C(m+k-1,k), accumulated in log space so
// the leading 2^{-m} cannot underflow.
double q_explicit(int m, int n);

// Closed form of the generating function sum_{m,n} p(m,n) x^m y^n on
// [0,1)x[0,1). The diagonal x=y is a removable singularity that this
// evaluator refuses rather than resolving.
double generating_function_closed(double x, double y);

// Eulerian numbers A(n,k), k = 0..n-1, by the standard integer recurrence.
std::vector<std::vector<mpz_class>> eulerian_triangle(int n_max);

struct EulerianReport {
    bool ok = false;
    std::string convention;          // e.g. "A(m+n, n-1)"
    std::vector<std::string> aliases;  // equivalent index maps (triangle symmetry)
    int pairs_checked = 0;
    std::string detail;
};

// Brute-force determination of the index convention under which
// (m+n)! * (p(m,n) - p(m+1,n-1)) equals an Eulerian number, followed by an
// exact integer check of the relation over all m >= 1, n >= 1, m+n <= m_max.
EulerianReport verify_eulerian_relation(int m_max);

}  // namespace ruinlab::exact
