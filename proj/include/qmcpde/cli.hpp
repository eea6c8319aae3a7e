#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmcpde/estimators.hpp"
#include "qmcpde/pde.hpp"
#include "qmcpde/theory.hpp"

namespace qmcpde {

/// Bad or missing configuration entry; names the key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::invalid_argument(key + ": " + what), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Flat `key = value` configuration with '#' comments. Every known key has
/// a default; numeric values accept constant expressions such as 1/128.
class Config {
public:
    Config();

    static Config parse(std::istream& in);
    static Config load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;
    const std::string& raw(const std::string& key) const;

    std::string text(const std::string& key) const;
    double number(const std::string& key) const;
    std::uint64_t integer(const std::string& key) const;
    bool flag(const std::string& key) const;

    static const std::vector<std::string>& known_keys();

private:
    std::map<std::string, std::string> values_;
};

/// Everything derived from a validated configuration.
struct Setup {
    Field field;
    Problem problem;
    Mapping mapping = Mapping::uniform;
    DecayModel decay;
    double lambda = 0.0;
    double delta = 0.0;
    PodWeights weights;
    std::uint64_t n = 0;
    std::size_t r = 0;
    std::uint64_t seed = 0;
};

/// Checks every key against the owning module's preconditions and builds
/// the problem, decay sequence and weights.
Setup validate(const Config& config);

struct ConstructOutput {
    std::vector<std::uint64_t> z;
    double wce2 = 0.0;
    std::string metadata;
};

ConstructOutput cmd_construct(const Config& config);

/// Lattice points from a generating vector, optionally randomly shifted.
std::string cmd_points_lattice(const std::vector<std::uint64_t>& z, std::uint64_t n,
                               std::uint64_t count, std::optional<std::uint64_t> shift_seed);
/// Digital-net points from generating matrices.
std::string cmd_points_digital(const GeneratingMatrices& mats, std::uint64_t count);

struct SolveOutput {
    double qoi = 0.0;
    double energy = 0.0;
    double energy_bound = 0.0;
    std::string dump;  // "x u" rows
};

SolveOutput cmd_solve(const Config& config, const std::vector<double>& y);

struct StudyOutput {
    StudyTable table;
    std::string csv;
    std::string summary;
};

StudyOutput cmd_study(const Config& config, Method method);

Method parse_method(const std::string& name);

/// Full command-line entry point. Exit codes: 0 success, 1 usage or
/// configuration error, 2 numerical failure.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace qmcpde
