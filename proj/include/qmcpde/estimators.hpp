#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmcpde/pde.hpp"
#include "qmcpde/points.hpp"
#include "qmcpde/theory.hpp"

namespace qmcpde {

enum class Mapping { uniform, lognormal };

/// y -> real. Must be pure; evaluations may run concurrently.
struct Integrand {
    std::function<double(std::span<const double>)> eval;
    std::size_t dimension = 0;
    /// FEM solves and work (element count summed over solves) per call.
    std::uint64_t solves_per_eval = 0;
    double work_per_eval = 0.0;
};

struct EstimatorResult {
    double estimate = 0.0;
    std::vector<double> shift_means;
    /// Absent for deterministic rules and single-shift runs.
    std::optional<double> rms;
    std::uint64_t evaluations = 0;
    std::uint64_t solves = 0;
    double work = 0.0;
    double seconds = 0.0;
    /// Sample variance of the integrand over every evaluated point.
    double sample_variance = 0.0;

    double rms_value() const;
};

EstimatorResult single_level_det(const Integrand& f, const LatticeRule& rule, Mapping mapping,
                                 std::span<const double> fixed_shift);

/// Randomly shifted rule: per-shift means Q_k, estimate mean(Q_k),
/// rms sqrt(sum (Q_k - estimate)^2 / (r (r - 1))). With r = 1 the rms is
/// left empty.
EstimatorResult single_level_ran(const Integrand& f, const LatticeRule& rule, Mapping mapping,
                                 const ShiftSet& shifts);

/// n i.i.d. samples; rms is the standard error of the mean.
EstimatorResult monte_carlo(const Integrand& f, std::uint64_t n, Mapping mapping,
                            std::uint64_t seed);

/// PDE problem: truncated field, mesh width, source term and functional.
struct Problem {
    Field field;
    double h = 1.0 / 128.0;
    NodalFunction kappa = [](double) { return 1.0; };
    NodalFunction g = [](double) { return 1.0; };
};

/// y -> G(u_h^s(y)).
Integrand single_level_integrand(const Problem& problem);

struct Level {
    std::size_t s = 1;
    std::size_t elements = 2;  // 1/h
    std::uint64_t n = 1;
    std::size_t r = 2;
};

class LevelSchedule {
public:
    explicit LevelSchedule(std::vector<Level> levels);

    /// h_l = h0 2^-l, n_l = max(n0 / factor^l, n_min), s_l = s.
    static LevelSchedule geometric(std::size_t L, std::size_t s, double h0, std::uint64_t n0,
                                   std::size_t r, std::uint64_t factor = 2,
                                   std::uint64_t n_min = 16);

    std::size_t size() const { return levels_.size(); }
    const Level& operator[](std::size_t l) const { return levels_.at(l); }
    const std::vector<Level>& levels() const { return levels_; }
    /// 1 if the truncation dimension changes entering level l (l >= 1).
    int theta_indicator(std::size_t l) const;

private:
    std::vector<Level> levels_;
};

/// Level-l difference integrand G(u_l) - G(u_{l-1}) on s_l parameters;
/// level 0 is G(u_0).
Integrand level_difference_integrand(const Problem& problem, const LevelSchedule& schedule,
                                     std::size_t level);

using RuleFactory = std::function<LatticeRule(std::uint64_t n, std::size_t s)>;

/// Fast CBC with the given weights (dimension >= any requested s).
RuleFactory cbc_rule_factory(PodWeights weights);

struct MultiLevelResult {
    EstimatorResult total;
    std::vector<EstimatorResult> levels;
};

/// Sum of independent randomly shifted estimates of the level differences.
/// Level l draws its shifts from derive_seed(seed, l).
MultiLevelResult multi_level(const Problem& problem, const LevelSchedule& schedule,
                             Mapping mapping, std::uint64_t seed, const RuleFactory& rules);

enum class Method { qmc, mc, ml };

struct StudyRow {
    std::uint64_t n = 0;
    double estimate = 0.0;
    double rms = 0.0;
    std::uint64_t solves = 0;
    double seconds = 0.0;
};

struct StudyTable {
    std::vector<StudyRow> rows;
    /// Least-squares slope of log(rms) against log(n); empty when any rms is
    /// zero or not finite.
    std::optional<double> slope;
};

struct StudyOptions {
    Method method = Method::qmc;
    Mapping mapping = Mapping::uniform;
    std::vector<std::uint64_t> n_list;
    std::size_t r = 16;
    std::uint64_t seed = 0;
    // Multi-level only: number of levels above the coarsest (the coarsest
    // mesh is h * 2^ml_levels) and the per-level n reduction factor.
    std::size_t ml_levels = 3;
    std::uint64_t ml_factor = 2;
    std::uint64_t ml_n_min = 16;
};

/// Runs the chosen estimator for each n. For mc, r*n samples are used so
/// the cost matches the qmc rows; for ml, n is the coarsest-level n0 and
/// the finest mesh is the problem's h.
StudyTable convergence_study(const Problem& problem, const RuleFactory& rules,
                             const StudyOptions& options);
/// qmc and mc only, for closed-form integrands.
StudyTable convergence_study(const Integrand& f, const RuleFactory& rules,
                             const StudyOptions& options);

std::optional<double> fit_loglog_slope(std::span<const StudyRow> rows);

/// CSV with header n,estimate,rms,solves,seconds.
std::string study_csv(const StudyTable& table, bool include_timing = true);

} // namespace qmcpde
