#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ehaloha/model.hpp"

namespace ehaloha::cli {

//! Invalid configuration; the CLI exits with status 1.
class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

enum class Command
{
    simulate,
    sweep,
    aux_verify,
    lemma1_verify,
    drift,
    remark3,
};

std::string to_string(Command c);
Command parse_command(std::string_view name);

//! Grid of values: "x", "a,b,c", or "start:stop:step" (stop included when
//! reachable within 1e-9).
struct Grid
{
    std::string text;
    std::vector<double> values;

    friend bool operator==(Grid const& a, Grid const& b) { return a.values == b.values; }
};

Grid parse_grid(std::string_view text);

struct ExperimentConfig
{
    Command command = Command::simulate;
    std::uint64_t seed = 42;

    Grid lambda = parse_grid("0.3");
    Grid c = parse_grid("1");
    double p = 0.5;
    std::string arrival = "poisson";
    std::string harvest = "reciprocal";  //!< reciprocal | power | constant
    Grid alpha = parse_grid("0.5,2");
    double mu = 1.0;

    std::uint64_t horizon = 0;  //!< 0 selects the command default
    std::uint64_t burn_in = 1'000;
    std::uint64_t replications = 0;  //!< 0 selects the command default
    std::uint64_t stride = 1;
    int windows = 40;
    std::int64_t q_ceiling = std::int64_t{1} << 48;

    std::int64_t start_q = 100'000;
    std::int64_t start_v = 2;
    int k = 200;
    std::string lyapunov = "q_plus_v";  //!< q_plus_v | q_only

    double margin = 0.05;
    std::int64_t radius = -1;  //!< -1 selects ceil((c + lambda + 1) / p)
    double delta = 0.05;
    int lag_cap = 200;
    std::int64_t w0 = 10;

    std::string out = "out";
    std::string format = "csv";  //!< csv | json
    unsigned threads = 0;        //!< 0 selects EHALOHA_THREADS or hardware concurrency

    //! Throws ConfigError.
    void validate() const;

    //! Model parameters for single-point commands (first grid values).
    ModelParams model_params(double alpha_value) const;

    std::uint64_t replications_or(std::uint64_t fallback) const
    {
        return replications > 0 ? replications : fallback;
    }

    unsigned effective_threads() const;

    //! Slots per run: 1e3 per path for lemma1-verify, 1e6 otherwise.
    std::uint64_t effective_horizon() const;

    friend bool operator==(ExperimentConfig const&, ExperimentConfig const&) = default;
};

nlohmann::ordered_json to_json(ExperimentConfig const& cfg);
ExperimentConfig config_from_json(nlohmann::json const& doc);

ExperimentConfig load_config(std::string const& path);

struct ParsedArgs
{
    ExperimentConfig config;
    std::optional<std::string> dump_config;
    bool help = false;
    std::string help_text;
};

//! Parse argv (without the program name). File values from --config are the
//! baseline and explicit flags override them.
ParsedArgs parse_args(std::vector<std::string> const& args);

}  // namespace ehaloha::cli
