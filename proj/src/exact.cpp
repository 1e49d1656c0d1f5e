#include "ruinlab/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

namespace ruinlab::exact {

namespace {

// One anti-diagonal step: prev holds row s-1, next receives row s.
// p(m,n) = n/s * p(m-1,n) + m/s * p(m,n-1) with n = s-m; boundaries
// p(0,n)=1, p(m,0)=0. The simple war replaces the weights by 1/2.
void fill_diagonal(TableKind kind, int s, const double* prev, double* next) {
    next[0] = 1.0;
    next[s] = 0.0;
    if (kind == TableKind::proportional) {
        const double inv_s = 1.0 / s;
        for (int m = 1; m < s; ++m)
            next[m] = ((s - m) * prev[m - 1] + m * prev[m]) * inv_s;
    } else {
        for (int m = 1; m < s; ++m)
            next[m] = 0.5 * (prev[m - 1] + prev[m]);
    }
}

double log_add_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

}  // namespace

ProbabilityTable ProbabilityTable::build(TableKind kind, int max_total) {
    if (max_total < 1)
        throw std::length_error("ProbabilityTable: max_total must be >= 1");
    if (max_total > kMaxFullTotal)
        throw std::length_error("ProbabilityTable: max_total exceeds full-table capacity " +
                                std::to_string(kMaxFullTotal) + "; use values_at()");
    ProbabilityTable t(kind, max_total);
    t.offset_.resize(max_total + 1);
    std::size_t total = 0;
    for (int s = 0; s <= max_total; ++s) {
        t.offset_[s] = total;
        total += static_cast<std::size_t>(s) + 1;
    }
    t.values_.resize(total);
    t.values_[0] = 1.0;  // p(0,0), see Open Questions: the value never feeds m+n >= 1
    for (int s = 1; s <= max_total; ++s)
        fill_diagonal(kind, s, &t.values_[t.offset_[s - 1]], &t.values_[t.offset_[s]]);
    return t;
}

double ProbabilityTable::at(int m, int n) const {
    if (m < 0 || n < 0 || m + n > max_total_)
        throw std::out_of_range("ProbabilityTable::at: (m,n) outside stored range");
    return values_[offset_[m + n] + m];
}

void ProbabilityTable::write_csv(std::ostream& os) const {
    os << (kind_ == TableKind::proportional ? "m,n,p\n" : "m,n,q\n");
    char buf[64];
    for (int s = 1; s <= max_total_; ++s) {
        for (int m = 0; m <= s; ++m) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.15g\n", m, s - m,
                          values_[offset_[s] + m]);
            os << buf;
        }
    }
}

std::vector<double> values_at(TableKind kind,
                              std::span<const std::pair<int, int>> points) {
    int smax = 0;
    for (const auto& [m, n] : points) {
        if (m < 0 || n < 0 || m + n < 1)
            throw std::domain_error("values_at: need m,n >= 0 and m+n >= 1");
        smax = std::max(smax, m + n);
    }
    if (smax > kMaxSliceTotal)
        throw std::length_error("values_at: m+n exceeds slice capacity");

    std::multimap<int, std::size_t> by_total;  // diagonal -> point index
    for (std::size_t i = 0; i < points.size(); ++i)
        by_total.emplace(points[i].first + points[i].second, i);

    std::vector<double> out(points.size());
    std::vector<double> a(static_cast<std::size_t>(smax) + 1), b(a.size());
    double* prev = a.data();
    double* next = b.data();
    prev[0] = 1.0;
    for (int s = 1; s <= smax; ++s) {
        fill_diagonal(kind, s, prev, next);
        auto [lo, hi] = by_total.equal_range(s);
        for (auto it = lo; it != hi; ++it)
            out[it->second] = next[points[it->second].first];
        std::swap(prev, next);
    }
    return out;
}

mpq_class p_explicit(int m, int n) {
    if (m < 0 || n < 0) throw std::domain_error("p_explicit: negative fortune");
    if (m + n == 0) throw std::domain_error("p_explicit: m+n must be >= 1");
    if (m + n > kExplicitMaxTotal)
        throw regime_error("p_explicit: m+n > 60 is outside the exact-arithmetic "
                           "regime; use the DP table (ProbabilityTable / values_at)");
    const int s = m + n;
    mpz_class fact_j = 1;       // j!
    mpz_class fact_sj;          // (s-j)!
    mpz_fac_ui(fact_sj.get_mpz_t(), static_cast<unsigned long>(s));
    mpq_class sum = 0;
    for (int j = 0; j <= n; ++j) {
        if (j > 0) {
            fact_j *= j;
            mpz_divexact_ui(fact_sj.get_mpz_t(), fact_sj.get_mpz_t(),
                            static_cast<unsigned long>(s - j + 1));
        }
        if (n - j == 0) continue;  // (n-j)^s vanishes (s >= 1)
        mpz_class num;
        mpz_ui_pow_ui(num.get_mpz_t(), static_cast<unsigned long>(n - j),
                      static_cast<unsigned long>(s));
        mpq_class term(num, fact_j * fact_sj);
        term.canonicalize();
        if (j % 2 == 0)
            sum += term;
        else
            sum -= term;
    }
    sum.canonicalize();
    return sum;
}

double q_explicit(int m, int n) {
    if (m < 0 || n < 0) throw std::domain_error("q_explicit: negative fortune");
    if (m + n == 0) throw std::domain_error("q_explicit: m+n must be >= 1");
    if (n == 0) return 0.0;
    if (m == 0) return 1.0;
    // term_k = 2^{-(m+k)} C(m+k-1,k); term_{k}/term_{k-1} = (m+k-1)/(2k)
    double lt = -m * M_LN2;
    double lsum = lt;
    for (int k = 1; k <= n - 1; ++k) {
        lt += std::log((m + k - 1) / (2.0 * k));
        lsum = log_add_exp(lsum, lt);
    }
    return std::min(1.0, std::exp(lsum));
}

double generating_function_closed(double x, double y) {
    if (!(x >= 0.0 && x < 1.0 && y >= 0.0 && y < 1.0))
        throw std::domain_error("generating_function_closed: need (x,y) in [0,1)^2");
    if (std::abs(x - y) <= 1e-6)
        throw std::domain_error("generating_function_closed: |x-y| <= 1e-6 is too "
                                "close to the removable singularity at x = y");
    const double xe = x * std::exp(-x);
    const double ye = y * std::exp(-y);
    return xe / (xe - ye) + (y / (1.0 - y)) / (y - x);
}

std::vector<std::vector<mpz_class>> eulerian_triangle(int n_max) {
    if (n_max < 1) throw std::domain_error("eulerian_triangle: n_max >= 1");
    std::vector<std::vector<mpz_class>> tri(n_max + 1);
    tri[1] = {mpz_class(1)};
    for (int n = 2; n <= n_max; ++n) {
        tri[n].assign(n, 0);
        for (int k = 0; k < n; ++k) {
            // A(n,k) = (k+1) A(n-1,k) + (n-k) A(n-1,k-1)
            if (k < n - 1) tri[n][k] += (k + 1) * tri[n - 1][k];
            if (k >= 1) tri[n][k] += (n - k) * tri[n - 1][k - 1];
        }
    }
    return tri;
}

EulerianReport verify_eulerian_relation(int m_max) {
    if (m_max < 2 || m_max > 20)
        throw std::domain_error("verify_eulerian_relation: m_max in [2,20]");
    const auto tri = eulerian_triangle(m_max);

    struct Candidate {
        std::string name;
        int (*index)(int m, int n, int s);
    };
    const Candidate candidates[] = {
        {"A(m+n, n-1)", [](int, int n, int) { return n - 1; }},
        {"A(m+n, n)", [](int, int n, int) { return n; }},
        {"A(m+n, m-1)", [](int m, int, int) { return m - 1; }},
        {"A(m+n, m)", [](int m, int, int) { return m; }},
    };

    EulerianReport rep;
    std::vector<std::string> matching;
    for (const auto& cand : candidates) {
        bool all_ok = true;
        int checked = 0;
        for (int s = 2; s <= m_max && all_ok; ++s) {
            for (int m = 1; m <= s - 1 && all_ok; ++m) {
                const int n = s - m;
                mpq_class delta = p_explicit(m, n);
                delta -= (n - 1 == 0) ? mpq_class(0) : p_explicit(m + 1, n - 1);
                mpz_class fact;
                mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(s));
                mpq_class lhs = delta * fact;
                lhs.canonicalize();
                if (lhs.get_den() != 1) {
                    all_ok = false;
                    break;
                }
                const int k = cand.index(m, n, s);
                if (k < 0 || k >= s || lhs.get_num() != tri[s][k]) {
                    all_ok = false;
                    break;
                }
                ++checked;
            }
        }
        if (all_ok) {
            matching.push_back(cand.name);
            rep.pairs_checked = checked;
        }
    }
    if (matching.empty()) {
        rep.ok = false;
        rep.detail = "no index convention matches the full range";
        return rep;
    }
    rep.ok = true;
    rep.convention = matching.front();
    rep.aliases.assign(matching.begin() + 1, matching.end());
    rep.detail = "exact integer equality for all m >= 1, n >= 1, m+n <= " +
                 std::to_string(m_max);
    return rep;
}

}  // namespace ruinlab::exact
