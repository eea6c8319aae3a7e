#include "qmcpde/cli.hpp"

#include <CLI11.hpp>

#include <bit>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qmcpde/cbc.hpp"
#include "qmcpde/expr.hpp"
#include "qmcpde/io.hpp"
#include "qmcpde/points.hpp"

namespace qmcpde {

namespace {

const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> d = {
        // problem
        {"model", "uniform"},
        {"a0", "1"},
        {"amplitude", "1"},
        {"decay", "3"},
        {"s", "100"},
        {"h", "1/128"},
        {"kappa", "1"},
        {"g", "1"},
        {"b", ""},
        {"p0", ""},
        // qmc
        {"m", "10"},
        {"r", "16"},
        {"seed", "0"},
        {"lambda", "auto"},
        {"delta", "0.1"},
        // study
        {"m_min", "7"},
        {"m_max", "13"},
        {"timing", "true"},
        // multi-level
        {"levels", "3"},
        {"ml_factor", "2"},
        {"ml_n_min", "16"},
        // paths
        {"output", "z.txt"},
        {"csv", "study.csv"},
    };
    return d;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

Config::Config() : values_(defaults()) {}

const std::vector<std::string>& Config::known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [key, _] : defaults()) k.push_back(key);
        return k;
    }();
    return keys;
}

void Config::set(const std::string& key, const std::string& value) {
    if (!defaults().contains(key)) throw ConfigError(key, "unknown configuration key");
    values_[key] = value;
}

bool Config::has(const std::string& key) const {
    const auto it = values_.find(key);
    return it != values_.end() && !it->second.empty();
}

const std::string& Config::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key, "unknown configuration key");
    return it->second;
}

std::string Config::text(const std::string& key) const {
    if (!has(key)) throw ConfigError(key, "missing configuration key");
    return raw(key);
}

double Config::number(const std::string& key) const {
    const auto t = text(key);
    try {
        return evaluate_constant(t);
    } catch (const ExprError& e) {
        throw ConfigError(key, e.what());
    }
}

std::uint64_t Config::integer(const std::string& key) const {
    const double v = number(key);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19)
        throw ConfigError(key, "expected a non-negative integer, got '" + raw(key) + "'");
    return static_cast<std::uint64_t>(v);
}

bool Config::flag(const std::string& key) const {
    const auto t = text(key);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(key, "expected true or false, got '" + t + "'");
}

Config Config::parse(std::istream& in) {
    Config c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value', got '" + line + "'", lineno);
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (!defaults().contains(key)) throw ParseError("unknown configuration key '" + key + "'", lineno);
        c.values_[key] = value;
    }
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path.string(), 0);
    return parse(in);
}

namespace {

NodalFunction spatial(const Config& c, const std::string& key) {
    try {
        return compile_expression(c.text(key), "x");
    } catch (const ExprError& e) {
        throw ConfigError(key, e.what());
    }
}

// Rethrows module precondition failures tagged with the config key.
template <class F>
auto with_key(const std::string& key, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const EllipticityError& e) {
        throw EllipticityError(key + ": " + e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const std::domain_error& e) {
        throw std::domain_error(key + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
    }
}

} // namespace

Setup validate(const Config& c) {
    const auto model = c.text("model");
    if (model != "uniform" && model != "lognormal")
        throw ConfigError("model", "expected uniform or lognormal, got '" + model + "'");
    const double a0 = c.number("a0");
    const double amplitude = c.number("amplitude");
    const double decay = c.number("decay");
    const auto s = static_cast<std::size_t>(c.integer("s"));
    if (s == 0) throw ConfigError("s", "must be >= 1");

    Field field = model == "uniform"
                      ? Field(with_key("amplitude",
                                       [&] { return UniformField(a0, amplitude, decay, s); }))
                      : Field(with_key("amplitude",
                                       [&] { return LognormalField(a0, amplitude, decay, s); }));
    Setup st{field, Problem{field}, Mapping::uniform, DecayModel{}, 0.0, 0.0, PodWeights{}, 0, 0, 0};
    st.mapping = model == "uniform" ? Mapping::uniform : Mapping::lognormal;
    st.problem.field = st.field;
    st.problem.h = c.number("h");
    with_key("h", [&] { return elements_for_width(st.problem.h); });
    st.problem.kappa = spatial(c, "kappa");
    st.problem.g = spatial(c, "g");

    const auto m = c.integer("m");
    if (m > 30) throw ConfigError("m", "log2 of the point count must be <= 30");
    st.n = std::uint64_t{1} << m;
    st.r = static_cast<std::size_t>(c.integer("r"));
    if (st.r == 0) throw ConfigError("r", "need at least one shift");
    st.seed = c.integer("seed");
    st.delta = c.number("delta");
    if (!(st.delta > 0.0 && st.delta < 0.5)) throw ConfigError("delta", "must lie in (0, 1/2)");

    // Decay sequence: explicit b_j, else from the field.
    if (c.has("b")) {
        std::function<double(double)> bexpr;
        try {
            bexpr = compile_expression(c.text("b"), "j");
        } catch (const ExprError& e) {
            throw ConfigError("b", e.what());
        }
        st.decay.b.resize(s);
        for (std::size_t j = 1; j <= s; ++j) {
            const double v = bexpr(static_cast<double>(j));
            if (!(v >= 0.0) || !std::isfinite(v))
                throw ConfigError("b", "b_" + std::to_string(j) + " = " + std::to_string(v) +
                                           " is not finite and non-negative");
            st.decay.b[j - 1] = v;
        }
        st.decay.p0 = c.has("p0") ? c.number("p0") : 0.0;
        if (!c.has("p0") && c.raw("lambda") == "auto")
            throw ConfigError("p0", "missing configuration key (required with b and lambda = auto)");
    } else {
        const double default_p0 = 0.5 * (1.0 / decay + 1.0);
        const double p0 = c.has("p0") ? c.number("p0") : default_p0;
        if (const auto* uf = std::get_if<UniformField>(&st.field)) {
            st.decay = uf->decay_model(p0);
        } else {
            // Lognormal runs reuse the uniform weight recipe with
            // b_j = ||sqrt(mu_j) xi_j||_inf.
            const auto& lf = std::get<LognormalField>(st.field);
            st.decay.p0 = p0;
            st.decay.b.resize(s);
            for (std::size_t j = 1; j <= s; ++j)
                st.decay.b[j - 1] = std::sqrt(2.0 * lf.mu(j));
        }
    }
    if (c.raw("lambda") == "auto") {
        st.lambda = with_key("p0", [&] { return choose_lambda(st.decay.p0, st.delta); });
    } else {
        st.lambda = c.number("lambda");
        if (!(st.lambda > 0.5 && st.lambda <= 1.0))
            throw ConfigError("lambda", "must be auto or lie in (1/2, 1]");
    }
    st.weights = with_key("lambda", [&] { return pod_weights(st.decay, st.lambda); });
    return st;
}

ConstructOutput cmd_construct(const Config& c) {
    const Setup st = validate(c);
    const std::size_t s = st.decay.dimension();
    const auto res = cbc_fast(st.n, s, st.weights);
    ConstructOutput out;
    out.z = res.rule.generator();
    out.wce2 = res.wce2;
    std::ostringstream meta;
    meta << "# lattice rule metadata\n"
         << "n = " << st.n << '\n'
         << "m = " << c.integer("m") << '\n'
         << "s = " << s << '\n'
         << "lambda = " << format_double(st.lambda) << '\n'
         << "delta = " << format_double(st.delta) << '\n'
         << "p0 = " << format_double(st.decay.p0) << '\n'
         << "model = " << c.text("model") << '\n';
    if (c.has("b"))
        meta << "b = " << c.raw("b") << '\n';
    else
        meta << "b = field: amplitude * j^-decay / a_min\n";
    meta << "a0 = " << c.raw("a0") << '\n'
         << "amplitude = " << c.raw("amplitude") << '\n'
         << "decay = " << c.raw("decay") << '\n'
         << "weights = pod\n"
         << "wce2 = " << format_double(res.wce2) << '\n'
         << "predicted_rate = " << format_double(predicted_rate(st.decay.p0, st.delta)) << '\n';
    out.metadata = meta.str();
    return out;
}

namespace {

std::string format_rows(const PointBlock& block, std::uint64_t count) {
    std::string out;
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto row = block.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ' ';
            out += format_double(row[j]);
        }
        out += '\n';
    }
    return out;
}

} // namespace

std::string cmd_points_lattice(const std::vector<std::uint64_t>& z, std::uint64_t n,
                               std::uint64_t count, std::optional<std::uint64_t> shift_seed) {
    if (count > n) throw std::invalid_argument("count " + std::to_string(count) + " exceeds n = " +
                                               std::to_string(n));
    std::vector<std::uint64_t> zn(z);
    for (auto& v : zn) v %= n;
    const LatticeRule rule(n, zn);
    const auto shift = shift_seed ? draw_shift(0, z.size(), *shift_seed)
                                  : std::vector<double>(z.size(), 0.0);
    return format_rows(generate_block(rule, shift), count);
}

std::string cmd_points_digital(const GeneratingMatrices& mats, std::uint64_t count) {
    if (count > mats.size())
        throw std::invalid_argument("count " + std::to_string(count) + " exceeds 2^m = " +
                                    std::to_string(mats.size()));
    return format_rows(digital_block(mats), count);
}

SolveOutput cmd_solve(const Config& c, const std::vector<double>& y_in) {
    const Setup st = validate(c);
    const std::size_t s = field_dimension(st.field);
    std::vector<double> y = y_in;
    if (y.empty()) y.assign(s, 0.0);
    if (y.size() != s)
        throw ConfigError("s", "parameter vector has " + std::to_string(y.size()) +
                                   " entries, expected " + std::to_string(s));
    const auto sys = solve(st.field, y, st.problem.h, st.problem.kappa);
    SolveOutput out;
    out.qoi = qoi(sys, Functional::from_function(st.problem.g, sys.elements));
    out.energy = energy_seminorm(sys.u);
    if (const auto* uf = std::get_if<UniformField>(&st.field))
        out.energy_bound = dual_norm(st.problem.kappa, sys.elements) / uf->a_min();
    std::ostringstream os;
    for (std::size_t i = 0; i < sys.u.size(); ++i)
        os << format_double(static_cast<double>(i) * sys.h) << ' ' << format_double(sys.u[i])
           << '\n';
    out.dump = os.str();
    return out;
}

Method parse_method(const std::string& name) {
    if (name == "qmc") return Method::qmc;
    if (name == "mc") return Method::mc;
    if (name == "ml") return Method::ml;
    throw ConfigError("method", "expected qmc, mc or ml, got '" + name + "'");
}

StudyOutput cmd_study(const Config& c, Method method) {
    const Setup st = validate(c);
    const auto m_min = c.integer("m_min");
    const auto m_max = c.integer("m_max");
    if (m_min > m_max || m_max > 30) throw ConfigError("m_max", "need m_min <= m_max <= 30");
    StudyOptions opt;
    opt.method = method;
    opt.mapping = st.mapping;
    for (auto m = m_min; m <= m_max; ++m) opt.n_list.push_back(std::uint64_t{1} << m);
    opt.r = st.r;
    opt.seed = st.seed;
    opt.ml_levels = static_cast<std::size_t>(c.integer("levels"));
    opt.ml_factor = c.integer("ml_factor");
    opt.ml_n_min = c.integer("ml_n_min");
    if (method == Method::ml) {
        const double h0 = st.problem.h * std::ldexp(1.0, static_cast<int>(opt.ml_levels));
        if (!(h0 <= 0.5)) throw ConfigError("levels", "coarsest mesh h * 2^levels exceeds 1/2");
    }
    StudyOutput out;
    out.table = convergence_study(st.problem, cbc_rule_factory(st.weights), opt);
    out.csv = study_csv(out.table, c.flag("timing"));
    const double predicted = method == Method::mc ? 0.5 : predicted_rate(st.decay.p0, st.delta);
    std::ostringstream os;
    os << "method=" << (method == Method::qmc ? "qmc" : method == Method::mc ? "mc" : "ml")
       << " slope=" << (out.table.slope ? format_double(*out.table.slope) : "undefined")
       << " predicted_rate=" << format_double(predicted);
    out.summary = os.str();
    return out;
}

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2 };

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            v.push_back(evaluate_constant(item));
        } catch (const ExprError& e) {
            throw ConfigError("y", e.what());
        }
    }
    return v;
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-")
        out << text;
    else
        write_file_atomic(path, text);
}

} // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tailored lattice rules and QMC estimators for a random-coefficient diffusion problem"};
    app.require_subcommand(1);

    struct Common {
        std::string config;
        std::vector<std::string> sets;
        std::map<std::string, std::string> flags;
    };
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "key = value configuration file");
        sub->add_option("--set", common.sets, "override a configuration key (key=value)");
        for (const char* key : {"s", "m", "b", "p0", "lambda", "delta", "seed", "r", "model"}) {
            sub->add_option_function<std::string>(
                std::string("--") + key,
                [&common, key](const std::string& v) { common.flags[key] = v; },
                std::string("configuration key ") + key);
        }
    };

    auto* construct = app.add_subcommand("construct", "build a generating vector by fast CBC");
    add_common(construct);
    std::string construct_out;
    construct->add_option("--output,-o", construct_out, "generating vector file (default: config 'output')");

    auto* points = app.add_subcommand("points", "print lattice or digital-net points");
    std::string vector_file, matrix_file, points_out;
    std::uint64_t points_n = 0, points_count = 0, points_m = 0;
    std::optional<std::uint64_t> shift_seed;
    auto* vec_opt = points->add_option("--vector", vector_file, "generating vector file");
    auto* mat_opt = points->add_option("--matrices", matrix_file, "generating matrix (.col) file");
    vec_opt->excludes(mat_opt);
    points->add_option("--n", points_n, "number of lattice points (power of 2)");
    points->add_option("--m", points_m, "log2 of the number of lattice points");
    points->add_option("--count", points_count, "points to print (default: all)");
    points->add_option("--shift-seed", shift_seed, "seed of a random shift (default: unshifted)");
    points->add_option("--output,-o", points_out, "output file (default: stdout)");

    auto* solve_cmd = app.add_subcommand("solve", "solve the PDE at one parameter vector");
    add_common(solve_cmd);
    std::string y_text, dump_path;
    solve_cmd->add_option("--y", y_text, "comma-separated parameter vector (default: zeros)");
    solve_cmd->add_option("--dump", dump_path, "write x, u_h(x) columns to this file");

    auto* study = app.add_subcommand("study", "convergence study; writes CSV");
    add_common(study);
    std::string method_name = "qmc", csv_path;
    study->add_option("--method", method_name, "qmc, mc or ml");
    study->add_option("--csv", csv_path, "CSV output (default: config 'csv')");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    }

    auto make_config = [&] {
        Config c = common.config.empty() ? Config() : Config::load(common.config);
        for (const auto& kv : common.sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError(kv, "--set expects key=value");
            c.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
        }
        for (const auto& [k, v] : common.flags) c.set(k, v);
        return c;
    };

    try {
        if (construct->parsed()) {
            const Config c = make_config();
            const auto res = cmd_construct(c);
            const std::string path = construct_out.empty() ? c.text("output") : construct_out;
            std::ostringstream z;
            write_generating_vector(z, res.z);
            write_file_atomic(path, z.str());
            write_file_atomic(path + ".meta", res.metadata);
            out << "wrote " << path << " (n=" << (std::uint64_t{1} << c.integer("m"))
                << ", s=" << res.z.size() << ", wce2=" << format_double(res.wce2) << ")\n";
        } else if (points->parsed()) {
            std::string text;
            if (!matrix_file.empty()) {
                const auto mats = read_generating_matrices(matrix_file);
                text = cmd_points_digital(mats, points_count ? points_count : mats.size());
            } else if (!vector_file.empty()) {
                const auto z = read_generating_vector(vector_file);
                std::uint64_t n = points_n;
                if (n == 0 && points_m == 0)
                    throw ConfigError("n", "missing: give --n or --m with --vector");
                if (n == 0) n = std::uint64_t{1} << points_m;
                text = cmd_points_lattice(z, n, points_count ? points_count : n, shift_seed);
            } else {
                throw ConfigError("vector", "missing: give --vector or --matrices");
            }
            write_or_print(points_out, text, out);
        } else if (solve_cmd->parsed()) {
            const Config c = make_config();
            const auto res = cmd_solve(c, parse_list(y_text));
            out << "G = " << format_double(res.qoi) << "\n"
                << "energy = " << format_double(res.energy) << "\n";
            if (res.energy_bound > 0.0)
                out << "energy_bound = " << format_double(res.energy_bound) << "\n";
            if (!dump_path.empty()) write_file_atomic(dump_path, res.dump);
        } else if (study->parsed()) {
            const Config c = make_config();
            const auto method = parse_method(method_name);
            const auto res = cmd_study(c, method);
            write_file_atomic(csv_path.empty() ? c.text("csv") : csv_path, res.csv);
            out << res.summary << "\n";
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    }
    return kOk;
}

} // namespace qmcpde
