#include "qmcpde/cbc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include "qmcpde/fft.hpp"
#include "qmcpde/parallel.hpp"
#include "qmcpde/summation.hpp"

namespace qmcpde {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Candidates whose cost is within this fraction of the cost scale of the
// best one are ties; the smallest wins.
constexpr double kTieTolerance = 1e-12;
// FFT-computed costs within this window of the minimum are re-evaluated
// directly before selecting.
constexpr double kShortlistWindow = 1e-9;
// Top-order accumulators below this magnitude are not activated.
constexpr double kUnderflowCutoff = 1e-300;

// Gamma_l / Gamma_{l-1} for l = 1..s. Entry 0 is unused.
std::vector<double> order_ratios(const PodWeights& w, std::size_t s) {
    std::vector<double> r(s + 1, 0.0);
    for (std::size_t l = 1; l <= s; ++l) {
        const double hi = w.log_order(l);
        const double lo = w.log_order(l - 1);
        if (hi == kNegInf) {
            r[l] = 0.0;
        } else if (lo == kNegInf) {
            throw std::invalid_argument("order weight Gamma_" + std::to_string(l - 1) +
                                        " = 0 but Gamma_" + std::to_string(l) + " > 0");
        } else {
            r[l] = std::exp(hi - lo);
        }
    }
    return r;
}

// B2(k/n) for k = 0..n-1, mirrored so that entry n-k equals entry k bitwise.
std::vector<double> kernel_table(std::uint64_t n) {
    std::vector<double> t(n);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::uint64_t k = 0; k <= n / 2; ++k) t[k] = kernel_b2(static_cast<double>(k) * inv);
    for (std::uint64_t k = n / 2 + 1; k < n; ++k) t[k] = t[n - k];
    return t;
}

void check_args(std::uint64_t n, std::size_t s, const PodWeights& weights) {
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("CBC needs n a power of 2, got " + std::to_string(n));
    if (s == 0) throw std::invalid_argument("CBC needs s >= 1");
    if (weights.dimension() < s)
        throw std::invalid_argument("weights cover " + std::to_string(weights.dimension()) +
                                    " dimensions, CBC asked for " + std::to_string(s));
}

// Order accumulators P_l(i) = Gamma_l * e_l(gamma_1 w_1(i), ..., gamma_d w_d(i)),
// where w_j(i) = B2(frac(i z_j / n)).
class CbcState {
public:
    CbcState(std::uint64_t n, std::size_t s, const PodWeights& weights)
        : n_(n), ratio_(order_ratios(weights, s)), omega_(kernel_table(n)),
          acc_(1, std::vector<double>(n, 1.0)) {}

    std::uint64_t n() const { return n_; }
    const std::vector<double>& omega() const { return omega_; }

    // q(i) = sum_{l=1}^{top+1} Gamma_l e_{l-1}(i): the weight that the next
    // component's kernel value multiplies at point i.
    std::vector<double> next_multiplier() const {
        std::vector<double> q(n_, 0.0);
        const std::size_t top = acc_.size() - 1;
        parallel_chunks([&](std::size_t lo, std::size_t hi) {
            for (std::size_t l = 0; l <= top && l + 1 < ratio_.size(); ++l) {
                const double r = ratio_[l + 1];
                if (r == 0.0) continue;
                const auto& a = acc_[l];
                for (std::size_t i = lo; i < hi; ++i) q[i] += r * a[i];
            }
        });
        return q;
    }

    // Sum_i B2(frac(i z / n)) q(i), summed in index order.
    double direct_cost(std::uint64_t z, const std::vector<double>& q) const {
        const std::uint64_t mask = n_ - 1;
        double t = 0.0;
        std::uint64_t k = 0;
        for (std::uint64_t i = 0; i < n_; ++i, k = (k + z) & mask) t += omega_[k] * q[i];
        return t;
    }

    void append(std::uint64_t z, double gamma) {
        const std::size_t d = acc_.size();  // orders 0..d-1 active before this call
        const bool room = d < ratio_.size();
        const double r_new = room ? ratio_[d] : 0.0;
        if (room && r_new != 0.0 && gamma != 0.0) acc_.emplace_back(n_, 0.0);
        const std::size_t top = acc_.size() - 1;
        const std::uint64_t mask = n_ - 1;
        parallel_chunks([&](std::size_t lo, std::size_t hi) {
            for (std::size_t l = top; l >= 1; --l) {
                const double c = gamma * ratio_[l];
                if (c == 0.0) continue;
                auto& cur = acc_[l];
                const auto& prev = acc_[l - 1];
                for (std::size_t i = lo; i < hi; ++i)
                    cur[i] += c * omega_[(i * z) & mask] * prev[i];
            }
        });
        if (top == d) {
            double peak = 0.0;
            for (double v : acc_.back()) peak = std::max(peak, std::fabs(v));
            if (peak < kUnderflowCutoff) acc_.pop_back();
        }
    }

    double checksum() const {
        std::vector<double> sums;
        for (const auto& a : acc_) sums.push_back(pairwise_sum(a));
        return pairwise_sum(sums);
    }

private:
    template <class F>
    void parallel_chunks(F&& f) const {
        constexpr std::size_t kChunk = 4096;
        const std::size_t chunks = (n_ + kChunk - 1) / kChunk;
        parallel_for(chunks, [&](std::size_t c) {
            f(c * kChunk, std::min<std::size_t>(n_, (c + 1) * kChunk));
        });
    }

    std::uint64_t n_;
    std::vector<double> ratio_;
    std::vector<double> omega_;
    std::vector<std::vector<double>> acc_;
};

double cost_scale(const std::vector<double>& q) {
    double s = 0.0;
    for (double v : q) s += std::fabs(v);
    return s / 6.0;
}

// Smallest candidate whose cost is within the tie tolerance of the minimum.
// `cands` is ascending.
std::size_t select_candidate(const std::vector<std::uint64_t>& cands,
                             const std::vector<double>& cost, double scale) {
    const double best = *std::min_element(cost.begin(), cost.end());
    const double limit = best + kTieTolerance * scale;
    for (std::size_t c = 0; c < cands.size(); ++c)
        if (cost[c] <= limit) return c;
    return 0;
}

std::vector<std::uint64_t> odd_candidates(std::uint64_t n) {
    if (n == 1) return {0};
    std::vector<std::uint64_t> c;
    c.reserve(n / 2);
    for (std::uint64_t z = 1; z < n; z += 2) c.push_back(z);
    return c;
}

template <class Chooser>
CbcResult run_cbc(std::uint64_t n, std::size_t s, const PodWeights& weights, Chooser&& choose) {
    check_args(n, s, weights);
    CbcState state(n, s, weights);
    std::vector<std::uint64_t> z;
    std::vector<double> by_dim;
    double e2 = 0.0;
    for (std::size_t d = 0; d < s; ++d) {
        const double gamma = weights.dim(d);
        const auto q = state.next_multiplier();
        std::uint64_t pick = n == 1 ? 0 : 1;
        if (gamma != 0.0 && n > 2) pick = choose(state, q);
        e2 += gamma * state.direct_cost(pick, q) / static_cast<double>(n);
        state.append(pick, gamma);
        z.push_back(pick);
        by_dim.push_back(e2);
    }
    return CbcResult{LatticeRule(n, std::move(z)), e2, std::move(by_dim), state.checksum()};
}

} // namespace

double wce_squared(const LatticeRule& rule, const PodWeights& weights) {
    const std::size_t s = rule.dimension();
    if (weights.dimension() < s)
        throw std::invalid_argument("rule has dimension " + std::to_string(s) +
                                    " but weights only " + std::to_string(weights.dimension()));
    const auto ratio = order_ratios(weights, s);
    const std::uint64_t n = rule.size();
    const auto omega = kernel_table(n);
    const auto& z = rule.generator();
    std::vector<double> per_point(n);
    parallel_for(n, [&](std::size_t i) {
        std::vector<double> p(s + 1, 0.0);
        p[0] = 1.0;
        for (std::size_t j = 0; j < s; ++j) {
            const double x = weights.dim(j) * omega[(i * z[j]) & (n - 1)];
            if (x == 0.0) continue;
            for (std::size_t l = j + 1; l >= 1; --l) p[l] += x * ratio[l] * p[l - 1];
        }
        double t = 0.0;
        for (std::size_t l = 1; l <= s; ++l) t += p[l];
        per_point[i] = t;
    });
    return pairwise_mean(per_point);
}

CbcResult cbc_naive(std::uint64_t n, std::size_t s, const PodWeights& weights) {
    const auto cands = odd_candidates(n);
    return run_cbc(n, s, weights, [&](const CbcState& st, const std::vector<double>& q) {
        std::vector<double> cost(cands.size());
        parallel_for(cands.size(), [&](std::size_t c) { cost[c] = st.direct_cost(cands[c], q); });
        return cands[select_candidate(cands, cost, cost_scale(q))];
    });
}

namespace {

// Circulant structure of the kernel matrix over odd residues mod n = 2^m.
// Points i = 2^t v with v odd form blocks indexed by r = m - t; for r >= 3
// the odd residues mod 2^r are {+-5^e}, and B2 is even about 1/2, so each
// block is a cyclic correlation of length 2^(r-2).
class FastPlan {
public:
    explicit FastPlan(std::uint64_t n) : n_(n), m_(static_cast<unsigned>(std::countr_zero(n))) {
        for (unsigned r = 3; r <= m_; ++r) {
            Block b;
            b.r = r;
            const std::uint64_t mod = std::uint64_t{1} << r;
            const std::size_t len = mod / 4;
            b.pow5.resize(len);
            std::vector<double> w(len);
            std::uint64_t v = 1;
            for (std::size_t e = 0; e < len; ++e) {
                b.pow5[e] = v;
                w[e] = kernel_b2(static_cast<double>(v) / static_cast<double>(mod));
                v = (v * 5) & (mod - 1);
            }
            b.w_hat.assign(w.begin(), w.end());
            fft_radix2(b.w_hat, false);
            blocks_.push_back(std::move(b));
        }
        // z = +-5^a mod n  ->  a
        dlog_.assign(n, 0);
        if (m_ >= 3) {
            for (std::size_t e = 0; e < blocks_.back().pow5.size(); ++e) {
                const auto v = blocks_.back().pow5[e];
                dlog_[v] = e;
                dlog_[n - v] = e;
            }
        }
    }

    // Cost of every odd candidate z (index (z-1)/2).
    std::vector<double> costs(const std::vector<double>& omega, const std::vector<double>& q) const {
        double base = omega[0] * q[0];
        if (m_ >= 1) base += omega[n_ / 2] * q[n_ / 2];
        if (m_ >= 2) base += omega[n_ / 4] * (q[n_ / 4] + q[3 * n_ / 4]);
        std::vector<std::vector<double>> corr;
        for (const auto& b : blocks_) {
            const std::uint64_t stride = n_ >> b.r;  // 2^t
            const std::uint64_t mod = std::uint64_t{1} << b.r;
            std::vector<double> qq(b.pow5.size());
            for (std::size_t e = 0; e < qq.size(); ++e)
                qq[e] = q[stride * b.pow5[e]] + q[stride * (mod - b.pow5[e])];
            corr.push_back(cyclic_correlation_with(b.w_hat, qq));
        }
        std::vector<double> out(n_ / 2, base);
        for (std::uint64_t z = 1; z < n_; z += 2) {
            double t = base;
            const std::size_t a = dlog_[z];
            for (std::size_t k = 0; k < blocks_.size(); ++k)
                t += corr[k][a & (corr[k].size() - 1)];
            out[z / 2] = t;
        }
        return out;
    }

private:
    struct Block {
        unsigned r = 0;
        std::vector<std::uint64_t> pow5;
        std::vector<std::complex<double>> w_hat;
    };

    std::uint64_t n_;
    unsigned m_;
    std::vector<Block> blocks_;
    std::vector<std::size_t> dlog_;
};

} // namespace

CbcResult cbc_fast(std::uint64_t n, std::size_t s, const PodWeights& weights) {
    check_args(n, s, weights);
    const FastPlan plan(n);
    return run_cbc(n, s, weights, [&](const CbcState& st, const std::vector<double>& q) {
        // A constant multiplier sees the same multiset of kernel values for
        // every odd z, so all candidates tie.
        if (std::all_of(q.begin(), q.end(), [&](double v) { return v == q.front(); }))
            return std::uint64_t{1};
        const auto approx = plan.costs(st.omega(), q);
        const double scale = cost_scale(q);
        const double best = *std::min_element(approx.begin(), approx.end());
        std::vector<std::uint64_t> shortlist;
        for (std::size_t c = 0; c < approx.size(); ++c)
            if (approx[c] <= best + kShortlistWindow * scale) shortlist.push_back(2 * c + 1);
        std::vector<double> cost(shortlist.size());
        parallel_for(shortlist.size(),
                     [&](std::size_t c) { cost[c] = st.direct_cost(shortlist[c], q); });
        return shortlist[select_candidate(shortlist, cost, scale)];
    });
}

} // namespace qmcpde
