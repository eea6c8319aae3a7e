#include "qmcpde/pde.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qmcpde {

namespace {

std::atomic<std::uint64_t> g_solves{0};

void check_field_params(double a0, double amplitude, double decay, std::size_t s) {
    if (!(a0 > 0.0)) throw std::invalid_argument("a0 must be positive");
    if (!(amplitude >= 0.0)) throw std::invalid_argument("amplitude must be non-negative");
    if (!(decay > 1.0)) throw std::invalid_argument("decay exponent must exceed 1");
    if (s == 0) throw std::invalid_argument("truncation dimension s must be >= 1");
}

double sin_mode(std::size_t j, double x) {
    return std::sin(static_cast<double>(j) * std::numbers::pi * x);
}

} // namespace

UniformField::UniformField(double a0, double amplitude, double decay, std::size_t s)
    : a0_(a0), amplitude_(amplitude), decay_(decay), s_(s) {
    check_field_params(a0, amplitude, decay, s);
    double spread = 0.0;
    for (std::size_t j = s; j >= 1; --j) spread += psi_norm(j);
    a_min_ = a0 - 0.5 * spread;
    a_max_ = a0 + 0.5 * spread;
    if (!(a_min_ > 0.0)) {
        std::ostringstream os;
        os << "uniform field is not elliptic: a_min = a0 - sum_j A j^-decay / 2 = " << a_min_;
        throw EllipticityError(os.str());
    }
}

double UniformField::psi_norm(std::size_t j) const {
    return amplitude_ * std::pow(static_cast<double>(j), -decay_);
}

DecayModel UniformField::decay_model() const { return decay_model(default_p0()); }

DecayModel UniformField::decay_model(double p0) const {
    DecayModel d;
    d.p0 = p0;
    d.b.resize(s_);
    for (std::size_t j = 1; j <= s_; ++j) d.b[j - 1] = b(j);
    return d;
}

UniformField UniformField::truncated(std::size_t s) const {
    return UniformField(a0_, amplitude_, decay_, s);
}

LognormalField::LognormalField(double a0, double amplitude, double decay, std::size_t s)
    : a0_(a0), amplitude_(amplitude), decay_(decay), s_(s) {
    check_field_params(a0, amplitude, decay, s);
}

double LognormalField::mu(std::size_t j) const {
    return amplitude_ * amplitude_ * std::pow(static_cast<double>(j), -2.0 * decay_);
}

double LognormalField::xi(std::size_t j, double x) { return std::numbers::sqrt2 * sin_mode(j, x); }

LognormalField LognormalField::truncated(std::size_t s) const {
    return LognormalField(a0_, amplitude_, decay_, s);
}

std::size_t field_dimension(const Field& f) {
    return std::visit([](const auto& v) { return v.dimension(); }, f);
}

Field truncate_field(const Field& f, std::size_t s) {
    return std::visit([s](const auto& v) -> Field { return v.truncated(s); }, f);
}

double eval_coefficient(const Field& field, double x, std::span<const double> y) {
    if (y.size() != field_dimension(field))
        throw std::invalid_argument("parameter vector has length " + std::to_string(y.size()) +
                                    ", field has s = " +
                                    std::to_string(field_dimension(field)));
    if (const auto* uf = std::get_if<UniformField>(&field)) {
        double a = 0.0;
        for (std::size_t j = y.size(); j >= 1; --j) {
            const double yj = y[j - 1];
            if (!(yj >= -0.5 && yj <= 0.5))
                throw std::domain_error("uniform parameter y_" + std::to_string(j) + " = " +
                                        std::to_string(yj) + " outside [-1/2, 1/2]");
            a += yj * uf->psi_norm(j) * sin_mode(j, x);
        }
        return uf->a0() + a;
    }
    const auto& lf = std::get<LognormalField>(field);
    double e = 0.0;
    for (std::size_t j = y.size(); j >= 1; --j)
        e += y[j - 1] * std::sqrt(lf.mu(j)) * LognormalField::xi(j, x);
    return lf.a0() * std::exp(e);
}

Functional::Functional(std::vector<double> nodal, NodalFunction source)
    : g_(std::move(nodal)), source_(std::move(source)) {
    if (g_.size() < 2) throw std::invalid_argument("functional needs at least one element");
}

Functional Functional::from_function(const NodalFunction& g, std::size_t elements) {
    std::vector<double> v(elements + 1);
    const double h = 1.0 / static_cast<double>(elements);
    for (std::size_t i = 0; i <= elements; ++i) v[i] = g(static_cast<double>(i) * h);
    return Functional(std::move(v), g);
}

Functional Functional::on_mesh(std::size_t elements) const {
    if (elements == this->elements()) return *this;
    if (source_) return from_function(source_, elements);
    const std::size_t from = this->elements();
    std::vector<double> v(elements + 1);
    for (std::size_t i = 0; i <= elements; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(elements) *
                         static_cast<double>(from);
        const std::size_t k = std::min(static_cast<std::size_t>(x), from - 1);
        const double t = x - static_cast<double>(k);
        v[i] = (1.0 - t) * g_[k] + t * g_[k + 1];
    }
    return Functional(std::move(v));
}

double Functional::apply(std::span<const double> v) const {
    if (v.size() != g_.size())
        throw std::invalid_argument("functional and solution meshes differ");
    const double h = 1.0 / static_cast<double>(elements());
    double s = 0.0;
    for (std::size_t e = 0; e + 1 < g_.size(); ++e) {
        const double va = v[e], vb = v[e + 1], ga = g_[e], gb = g_[e + 1];
        s += 2.0 * va * ga + va * gb + vb * ga + 2.0 * vb * gb;
    }
    return s * h / 6.0;
}

double FemSystem::relative_residual() const {
    const std::size_t n = interior();
    double rmax = 0.0, kmax = 0.0, umax = 0.0, fmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double ku = diag[i] * u[i + 1];
        double row = std::fabs(diag[i]);
        if (i > 0) {
            ku += off[i - 1] * u[i];
            row += std::fabs(off[i - 1]);
        }
        if (i + 1 < n) {
            ku += off[i] * u[i + 2];
            row += std::fabs(off[i]);
        }
        rmax = std::max(rmax, std::fabs(ku - load[i]));
        kmax = std::max(kmax, row);
        umax = std::max(umax, std::fabs(u[i + 1]));
        fmax = std::max(fmax, std::fabs(load[i]));
    }
    const double scale = kmax * umax + fmax;
    return scale == 0.0 ? rmax : rmax / scale;
}

std::uint64_t total_solves() { return g_solves.load(); }

std::size_t elements_for_width(double h) {
    if (!(h > 0.0 && h <= 0.5)) throw std::invalid_argument("mesh width h must lie in (0, 1/2]");
    const double m = 1.0 / h;
    const auto mi = static_cast<std::size_t>(std::llround(m));
    if (std::fabs(m - static_cast<double>(mi)) > 1e-9 * m || !std::has_single_bit(mi))
        throw std::invalid_argument("mesh width h must be 1/M with M a power of 2");
    return mi;
}

namespace {

std::vector<double> assemble_load(const NodalFunction& kappa, std::size_t elements) {
    const double h = 1.0 / static_cast<double>(elements);
    std::vector<double> k(elements + 1);
    for (std::size_t i = 0; i <= elements; ++i) k[i] = kappa(static_cast<double>(i) * h);
    std::vector<double> f(elements - 1);
    for (std::size_t i = 1; i < elements; ++i)
        f[i - 1] = h / 6.0 * (k[i - 1] + 4.0 * k[i] + k[i + 1]);
    return f;
}

// Thomas algorithm for the SPD tridiagonal system; writes into u[1..n].
void tridiagonal_solve(const std::vector<double>& diag, const std::vector<double>& off,
                       const std::vector<double>& rhs, std::vector<double>& u) {
    const std::size_t n = diag.size();
    std::vector<double> c(n), d(n);
    double beta = diag[0];
    c[0] = n > 1 ? off[0] / beta : 0.0;
    d[0] = rhs[0] / beta;
    for (std::size_t i = 1; i < n; ++i) {
        beta = diag[i] - off[i - 1] * c[i - 1];
        c[i] = i + 1 < n ? off[i] / beta : 0.0;
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / beta;
    }
    u[n] = d[n - 1];
    for (std::size_t i = n - 1; i >= 1; --i) u[i] = d[i - 1] - c[i - 1] * u[i + 1];
}

FemSystem solve_assembled(std::vector<double> a_mid, std::vector<double> load) {
    const std::size_t m = a_mid.size();
    if (m < 2) throw std::invalid_argument("mesh needs at least 2 elements");
    for (std::size_t e = 0; e < m; ++e) {
        if (!(a_mid[e] > 0.0)) {
            std::ostringstream os;
            os << "coefficient a = " << a_mid[e] << " <= 0 on element " << e << " (midpoint x = "
               << (static_cast<double>(e) + 0.5) / static_cast<double>(m) << ")";
            throw EllipticityError(os.str());
        }
    }
    FemSystem sys;
    sys.elements = m;
    sys.h = 1.0 / static_cast<double>(m);
    const double inv_h = static_cast<double>(m);
    sys.diag.resize(m - 1);
    sys.off.resize(m - 2);
    for (std::size_t i = 1; i < m; ++i) sys.diag[i - 1] = (a_mid[i - 1] + a_mid[i]) * inv_h;
    for (std::size_t i = 1; i + 1 < m; ++i) sys.off[i - 1] = -a_mid[i] * inv_h;
    sys.load = std::move(load);
    sys.u.assign(m + 1, 0.0);
    tridiagonal_solve(sys.diag, sys.off, sys.load, sys.u);
    sys.a_mid = std::move(a_mid);
    g_solves.fetch_add(1, std::memory_order_relaxed);
    return sys;
}

} // namespace

FemSystem solve_with_coefficient(std::span<const double> a_mid, const NodalFunction& kappa) {
    return solve_assembled(std::vector<double>(a_mid.begin(), a_mid.end()),
                           assemble_load(kappa, a_mid.size()));
}

FemSystem solve(const Field& field, std::span<const double> y, double h,
                const NodalFunction& kappa) {
    const std::size_t m = elements_for_width(h);
    std::vector<double> a(m);
    for (std::size_t e = 0; e < m; ++e)
        a[e] = eval_coefficient(field, (static_cast<double>(e) + 0.5) / static_cast<double>(m), y);
    return solve_assembled(std::move(a), assemble_load(kappa, m));
}

double qoi(const FemSystem& sys, const Functional& g) {
    if (g.elements() == sys.elements) return g.apply(sys.u);
    return g.on_mesh(sys.elements).apply(sys.u);
}

double energy_seminorm(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double inv_h = static_cast<double>(v.size() - 1);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const double d = v[i + 1] - v[i];
        s += d * d;
    }
    return std::sqrt(s * inv_h);
}

double dual_norm(const NodalFunction& f, std::size_t elements) {
    const std::vector<double> ones(elements, 1.0);
    return energy_seminorm(solve_with_coefficient(ones, f).u);
}

FemSystem solve_first_derivative(const UniformField& field, std::span<const double> y,
                                 double h, std::size_t j, const FemSystem& base) {
    if (j == 0 || j > field.dimension())
        throw std::out_of_range("derivative direction " + std::to_string(j) + " outside 1.." +
                                std::to_string(field.dimension()));
    const std::size_t m = elements_for_width(h);
    if (base.elements != m) throw std::invalid_argument("base solution is on a different mesh");
    (void)y;  // the operator is taken from base.a_mid, assembled at y
    // rhs_i = -(K(psi_j) u)_i with psi_j sampled at midpoints.
    std::vector<double> psi(m);
    for (std::size_t e = 0; e < m; ++e)
        psi[e] = field.psi_norm(j) * sin_mode(j, (static_cast<double>(e) + 0.5) /
                                                     static_cast<double>(m));
    const double inv_h = static_cast<double>(m);
    std::vector<double> rhs(m - 1);
    for (std::size_t i = 1; i < m; ++i) {
        const double left = psi[i - 1] * (base.u[i] - base.u[i - 1]);
        const double right = psi[i] * (base.u[i + 1] - base.u[i]);
        rhs[i - 1] = -(left - right) * inv_h;
    }
    return solve_assembled(base.a_mid, std::move(rhs));
}

FemSolver::FemSolver(Field field, std::size_t elements, const NodalFunction& kappa)
    : field_(std::move(field)), elements_(elements), s_(field_dimension(field_)),
      load_(assemble_load(kappa, elements)),
      lognormal_(std::holds_alternative<LognormalField>(field_)) {
    if (elements < 2 || !std::has_single_bit(elements))
        throw std::invalid_argument("mesh must have M >= 2 elements, M a power of 2");
    modes_.resize(elements * s_);
    for (std::size_t e = 0; e < elements; ++e) {
        const double x = (static_cast<double>(e) + 0.5) / static_cast<double>(elements);
        for (std::size_t j = 1; j <= s_; ++j) {
            double c;
            if (const auto* uf = std::get_if<UniformField>(&field_))
                c = uf->psi_norm(j) * sin_mode(j, x);
            else
                c = std::sqrt(std::get<LognormalField>(field_).mu(j)) * LognormalField::xi(j, x);
            modes_[e * s_ + j - 1] = c;
        }
    }
    a0_ = std::visit([](const auto& f) { return f.a0(); }, field_);
}

FemSystem FemSolver::solve(std::span<const double> y) const {
    if (y.size() != s_)
        throw std::invalid_argument("parameter vector has length " + std::to_string(y.size()) +
                                    ", field has s = " + std::to_string(s_));
    if (!lognormal_)
        for (std::size_t j = 0; j < s_; ++j)
            if (!(y[j] >= -0.5 && y[j] <= 0.5))
                throw std::domain_error("uniform parameter y_" + std::to_string(j + 1) +
                                        " outside [-1/2, 1/2]");
    std::vector<double> a(elements_);
    for (std::size_t e = 0; e < elements_; ++e) {
        const double* row = modes_.data() + e * s_;
        double acc = 0.0;
        for (std::size_t j = s_; j-- > 0;) acc += y[j] * row[j];
        a[e] = lognormal_ ? a0_ * std::exp(acc) : a0_ + acc;
    }
    return solve_assembled(std::move(a), load_);
}

} // namespace qmcpde
