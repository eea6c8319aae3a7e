#include "qmcpde/estimators.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "qmcpde/cbc.hpp"
#include "qmcpde/io.hpp"
#include "qmcpde/parallel.hpp"
#include "qmcpde/rng.hpp"
#include "qmcpde/summation.hpp"

namespace qmcpde {

double EstimatorResult::rms_value() const {
    if (!rms) throw std::logic_error("rms estimate undefined: needs r >= 2 random shifts");
    return *rms;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> map_point(std::span<const double> t, Mapping mapping) {
    return mapping == Mapping::uniform ? map_uniform(t) : map_lognormal(t);
}

// Evaluates f at the mapped points of one shifted lattice, returning the
// values in index order.
std::vector<double> evaluate_lattice(const Integrand& f, const LatticeRule& rule,
                                     Mapping mapping, std::span<const double> shift) {
    std::vector<double> values(rule.size());
    parallel_for(rule.size(), [&](std::size_t i) {
        const auto t = lattice_point(rule, i, shift);
        values[i] = f.eval(map_point(t, mapping));
    });
    return values;
}

double sample_variance(const std::vector<std::vector<double>>& groups) {
    std::vector<double> means;
    std::size_t count = 0;
    for (const auto& g : groups) {
        means.push_back(pairwise_sum(g));
        count += g.size();
    }
    if (count < 2) return 0.0;
    const double mean = pairwise_sum(means) / static_cast<double>(count);
    std::vector<double> ss;
    for (const auto& g : groups) {
        std::vector<double> d(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) d[i] = (g[i] - mean) * (g[i] - mean);
        ss.push_back(pairwise_sum(d));
    }
    return pairwise_sum(ss) / static_cast<double>(count - 1);
}

void check_dimension(const Integrand& f, std::size_t s) {
    if (f.dimension != 0 && f.dimension != s)
        throw std::invalid_argument("integrand has dimension " + std::to_string(f.dimension) +
                                    ", rule has " + std::to_string(s));
}

} // namespace

EstimatorResult single_level_det(const Integrand& f, const LatticeRule& rule, Mapping mapping,
                                 std::span<const double> fixed_shift) {
    check_dimension(f, rule.dimension());
    if (mapping == Mapping::lognormal &&
        std::any_of(fixed_shift.begin(), fixed_shift.end(), [](double v) { return v == 0.0; }))
        throw std::domain_error("lognormal mapping needs a fixed shift with nonzero components");
    const auto t0 = Clock::now();
    std::vector<std::vector<double>> values{evaluate_lattice(f, rule, mapping, fixed_shift)};
    EstimatorResult res;
    res.estimate = pairwise_mean(values.front());
    res.shift_means = {res.estimate};
    res.evaluations = rule.size();
    res.solves = res.evaluations * f.solves_per_eval;
    res.work = static_cast<double>(res.evaluations) * f.work_per_eval;
    res.sample_variance = sample_variance(values);
    res.seconds = seconds_since(t0);
    return res;
}

EstimatorResult single_level_ran(const Integrand& f, const LatticeRule& rule, Mapping mapping,
                                 const ShiftSet& shifts) {
    check_dimension(f, rule.dimension());
    if (shifts.count() == 0) throw std::invalid_argument("need at least one random shift");
    const auto t0 = Clock::now();
    std::vector<std::vector<double>> values;
    EstimatorResult res;
    for (const auto& shift : shifts.shifts) {
        values.push_back(evaluate_lattice(f, rule, mapping, shift));
        res.shift_means.push_back(pairwise_mean(values.back()));
    }
    const double r = static_cast<double>(shifts.count());
    res.estimate = pairwise_mean(res.shift_means);
    if (shifts.count() >= 2) {
        std::vector<double> dev(res.shift_means.size());
        for (std::size_t k = 0; k < dev.size(); ++k) {
            const double d = res.shift_means[k] - res.estimate;
            dev[k] = d * d;
        }
        res.rms = std::sqrt(pairwise_sum(dev) / (r * (r - 1.0)));
    }
    res.evaluations = rule.size() * shifts.count();
    res.solves = res.evaluations * f.solves_per_eval;
    res.work = static_cast<double>(res.evaluations) * f.work_per_eval;
    res.sample_variance = sample_variance(values);
    res.seconds = seconds_since(t0);
    return res;
}

EstimatorResult monte_carlo(const Integrand& f, std::uint64_t n, Mapping mapping,
                            std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("Monte Carlo needs n >= 2 samples");
    if (f.dimension == 0) throw std::invalid_argument("Monte Carlo needs the integrand dimension");
    const auto t0 = Clock::now();
    const std::size_t s = f.dimension;
    std::vector<std::vector<double>> values(1, std::vector<double>(n));
    parallel_for(n, [&](std::size_t i) {
        std::vector<double> t(s);
        // Midpoint of the 2^-53 cell keeps every sample strictly inside (0,1).
        for (std::size_t j = 0; j < s; ++j)
            t[j] = (static_cast<double>(hash_combine(seed, i, j) >> 11) + 0.5) * 0x1.0p-53;
        values[0][i] = f.eval(map_point(t, mapping));
    });
    EstimatorResult res;
    res.estimate = pairwise_mean(values[0]);
    res.sample_variance = sample_variance(values);
    res.rms = std::sqrt(res.sample_variance / static_cast<double>(n));
    res.evaluations = n;
    res.solves = n * f.solves_per_eval;
    res.work = static_cast<double>(n) * f.work_per_eval;
    res.seconds = seconds_since(t0);
    return res;
}

Integrand single_level_integrand(const Problem& problem) {
    const std::size_t m = elements_for_width(problem.h);
    auto solver = std::make_shared<const FemSolver>(problem.field, m, problem.kappa);
    auto g = std::make_shared<const Functional>(Functional::from_function(problem.g, m));
    Integrand f;
    f.dimension = field_dimension(problem.field);
    f.solves_per_eval = 1;
    f.work_per_eval = static_cast<double>(m);
    f.eval = [solver, g](std::span<const double> y) { return g->apply(solver->solve(y).u); };
    return f;
}

LevelSchedule::LevelSchedule(std::vector<Level> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw std::invalid_argument("level schedule is empty");
    for (std::size_t l = 0; l < levels_.size(); ++l) {
        const auto& lv = levels_[l];
        if (lv.s == 0 || lv.elements < 2 || !std::has_single_bit(lv.elements) ||
            !std::has_single_bit(lv.n) || lv.r == 0)
            throw std::invalid_argument("level " + std::to_string(l) +
                                        " needs s >= 1, 1/h and n powers of 2, r >= 1");
        if (l > 0 && (lv.s < levels_[l - 1].s || lv.elements < levels_[l - 1].elements))
            throw std::invalid_argument("level " + std::to_string(l) +
                                        " breaks monotonicity: s must not decrease and h "
                                        "must not increase");
    }
}

LevelSchedule LevelSchedule::geometric(std::size_t L, std::size_t s, double h0, std::uint64_t n0,
                                       std::size_t r, std::uint64_t factor,
                                       std::uint64_t n_min) {
    if (factor < 1 || !std::has_single_bit(factor))
        throw std::invalid_argument("n reduction factor must be a power of 2");
    const std::size_t m0 = elements_for_width(h0);
    std::vector<Level> levels;
    std::uint64_t n = n0;
    for (std::size_t l = 0; l <= L; ++l) {
        levels.push_back(Level{s, m0 << l, std::max(n, std::min(n_min, n0)), r});
        n /= factor;
    }
    return LevelSchedule(std::move(levels));
}

int LevelSchedule::theta_indicator(std::size_t l) const {
    if (l == 0 || l >= levels_.size()) return 0;
    return levels_[l].s != levels_[l - 1].s ? 1 : 0;
}

Integrand level_difference_integrand(const Problem& problem, const LevelSchedule& schedule,
                                     std::size_t level) {
    const Level& fine = schedule[level];
    auto fine_solver = std::make_shared<const FemSolver>(truncate_field(problem.field, fine.s),
                                                         fine.elements, problem.kappa);
    auto fine_g =
        std::make_shared<const Functional>(Functional::from_function(problem.g, fine.elements));
    Integrand f;
    f.dimension = fine.s;
    if (level == 0) {
        f.solves_per_eval = 1;
        f.work_per_eval = static_cast<double>(fine.elements);
        f.eval = [fine_solver, fine_g](std::span<const double> y) {
            return fine_g->apply(fine_solver->solve(y).u);
        };
        return f;
    }
    const Level& coarse = schedule[level - 1];
    auto coarse_solver = std::make_shared<const FemSolver>(
        truncate_field(problem.field, coarse.s), coarse.elements, problem.kappa);
    auto coarse_g =
        std::make_shared<const Functional>(Functional::from_function(problem.g, coarse.elements));
    const std::size_t sc = coarse.s;
    f.solves_per_eval = 2;
    f.work_per_eval = static_cast<double>(fine.elements + coarse.elements);
    f.eval = [=](std::span<const double> y) {
        const double gf = fine_g->apply(fine_solver->solve(y).u);
        const double gc = coarse_g->apply(coarse_solver->solve(y.first(sc)).u);
        return gf - gc;
    };
    return f;
}

RuleFactory cbc_rule_factory(PodWeights weights) {
    return [w = std::move(weights)](std::uint64_t n, std::size_t s) {
        return cbc_fast(n, s, w).rule;
    };
}

MultiLevelResult multi_level(const Problem& problem, const LevelSchedule& schedule,
                             Mapping mapping, std::uint64_t seed, const RuleFactory& rules) {
    const auto t0 = Clock::now();
    MultiLevelResult out;
    std::vector<double> estimates, variances;
    for (std::size_t l = 0; l < schedule.size(); ++l) {
        const Level& lv = schedule[l];
        const auto f = level_difference_integrand(problem, schedule, l);
        const auto rule = rules(lv.n, lv.s);
        const auto shifts = draw_shifts(lv.r, lv.s, derive_seed(seed, l));
        out.levels.push_back(single_level_ran(f, rule, mapping, shifts));
        const auto& res = out.levels.back();
        estimates.push_back(res.estimate);
        if (res.rms) variances.push_back(*res.rms * *res.rms);
        out.total.evaluations += res.evaluations;
        out.total.solves += res.solves;
        out.total.work += res.work;
    }
    double total = 0.0;
    for (double e : estimates) total += e;
    out.total.estimate = total;
    if (variances.size() == schedule.size()) {
        double v = 0.0;
        for (double x : variances) v += x;
        out.total.rms = std::sqrt(v);
    }
    out.total.seconds = seconds_since(t0);
    return out;
}

std::optional<double> fit_loglog_slope(std::span<const StudyRow> rows) {
    if (rows.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rows) {
        if (!(r.rms > 0.0) || !std::isfinite(r.rms)) return std::nullopt;
        const double x = std::log(static_cast<double>(r.n));
        const double y = std::log(r.rms);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double k = static_cast<double>(rows.size());
    const double den = k * sxx - sx * sx;
    if (den == 0.0) return std::nullopt;
    return (k * sxy - sx * sy) / den;
}

namespace {

void check_n_list(const std::vector<std::uint64_t>& ns) {
    if (ns.empty()) throw std::invalid_argument("study needs at least one n");
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (!std::has_single_bit(ns[i])) throw std::invalid_argument("study n must be powers of 2");
        if (i > 0 && ns[i] <= ns[i - 1]) throw std::invalid_argument("study n must ascend");
    }
}

StudyRow row_from(std::uint64_t n, const EstimatorResult& r) {
    return StudyRow{n, r.estimate, r.rms.value_or(0.0), r.solves, r.seconds};
}

StudyRow run_single(const Integrand& f, const RuleFactory& rules, const StudyOptions& o,
                    std::uint64_t n) {
    const std::uint64_t seed = derive_seed(o.seed, n);
    if (o.method == Method::mc) return row_from(n, monte_carlo(f, n * o.r, o.mapping, seed));
    const auto rule = rules(n, f.dimension);
    return row_from(n, single_level_ran(f, rule, o.mapping, draw_shifts(o.r, f.dimension, seed)));
}

} // namespace

StudyTable convergence_study(const Integrand& f, const RuleFactory& rules,
                             const StudyOptions& options) {
    if (options.method == Method::ml)
        throw std::invalid_argument("multi-level study needs a PDE problem");
    check_n_list(options.n_list);
    StudyTable table;
    for (auto n : options.n_list) table.rows.push_back(run_single(f, rules, options, n));
    table.slope = fit_loglog_slope(table.rows);
    return table;
}

StudyTable convergence_study(const Problem& problem, const RuleFactory& rules,
                             const StudyOptions& options) {
    if (options.method != Method::ml)
        return convergence_study(single_level_integrand(problem), rules, options);
    check_n_list(options.n_list);
    StudyTable table;
    const double h0 = problem.h * static_cast<double>(std::uint64_t{1} << options.ml_levels);
    for (auto n : options.n_list) {
        const auto schedule =
            LevelSchedule::geometric(options.ml_levels, field_dimension(problem.field), h0, n,
                                     options.r, options.ml_factor, options.ml_n_min);
        const auto res =
            multi_level(problem, schedule, options.mapping, derive_seed(options.seed, n), rules);
        table.rows.push_back(row_from(n, res.total));
    }
    table.slope = fit_loglog_slope(table.rows);
    return table;
}

std::string study_csv(const StudyTable& table, bool include_timing) {
    std::ostringstream os;
    os << "n,estimate,rms,solves,seconds\n";
    for (const auto& r : table.rows)
        os << r.n << ',' << format_double(r.estimate) << ',' << format_double(r.rms) << ','
           << r.solves << ',' << format_double(include_timing ? r.seconds : 0.0) << '\n';
    return os.str();
}

} // namespace qmcpde
