#include "ehaloha/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <CLI11.hpp>

#include "ehaloha/parallel.hpp"

namespace ehaloha::cli {

namespace {

constexpr double kGridTolerance = 1e-9;

struct CommandName
{
    Command command;
    char const* name;
    char const* help;
};

constexpr CommandName kCommands[] = {
    {Command::simulate, "simulate", "One trajectory of (q, v)"},
    {Command::sweep, "sweep", "Stability classification over a (lambda, c) grid"},
    {Command::aux_verify, "aux-verify", "Auxiliary chain: success rate, lag, stationarity"},
    {Command::lemma1_verify, "lemma1-verify", "Thinning-with-immigration chain checks"},
    {Command::drift, "drift", "k-step Lyapunov drift from a large state"},
    {Command::remark3, "remark3", "Power-law harvesting mu(q) = min(c / q^alpha, 1)"},
};

double parse_number(std::string_view s)
{
    std::string const str(s);
    std::size_t used = 0;
    double v = 0.0;
    try
    {
        v = std::stod(str, &used);
    }
    catch (std::exception const&)
    {
        throw ConfigError("not a number: '" + str + "'");
    }
    if (used != str.size() || !std::isfinite(v))
    {
        throw ConfigError("not a number: '" + str + "'");
    }
    return v;
}

// Grid points are snapped to 1e-12 so 0.05 + 2 * 0.05 prints as 0.15.
double snap(double x)
{
    return std::round(x * 1e12) / 1e12;
}

void require(bool ok, std::string const& msg)
{
    if (!ok)
    {
        throw ConfigError(msg);
    }
}

}  // namespace

std::string to_string(Command c)
{
    for (auto const& entry : kCommands)
    {
        if (entry.command == c)
        {
            return entry.name;
        }
    }
    return "unknown";
}

Command parse_command(std::string_view name)
{
    for (auto const& entry : kCommands)
    {
        if (name == entry.name)
        {
            return entry.command;
        }
    }
    throw ConfigError("unknown command '" + std::string(name) + "'");
}

Grid parse_grid(std::string_view text)
{
    Grid g;
    g.text = std::string(text);
    if (text.empty())
    {
        throw ConfigError("empty grid");
    }
    if (text.find(':') != std::string_view::npos)
    {
        auto const a = text.find(':');
        auto const b = text.find(':', a + 1);
        if (b == std::string_view::npos || text.find(':', b + 1) != std::string_view::npos)
        {
            throw ConfigError("grid must be start:stop:step, got '" + g.text + "'");
        }
        double const start = parse_number(text.substr(0, a));
        double const stop = parse_number(text.substr(a + 1, b - a - 1));
        double const step = parse_number(text.substr(b + 1));
        if (!(step > 0.0) || stop < start)
        {
            throw ConfigError("grid needs step > 0 and stop >= start: '" + g.text + "'");
        }
        for (std::int64_t i = 0;; ++i)
        {
            double const x = start + static_cast<double>(i) * step;
            if (x > stop + kGridTolerance)
            {
                break;
            }
            g.values.push_back(snap(x));
        }
        return g;
    }
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        auto const next = text.find(',', pos);
        auto const piece = text.substr(pos, next == std::string_view::npos ? std::string_view::npos
                                                                            : next - pos);
        g.values.push_back(parse_number(piece));
        if (next == std::string_view::npos)
        {
            break;
        }
        pos = next + 1;
    }
    return g;
}

void ExperimentConfig::validate() const
{
    for (double l : lambda.values)
    {
        require(l > 0.0 && l < 1.0, "lambda must lie in (0,1)");
    }
    for (double cv : c.values)
    {
        require(cv > 0.0, "c must be positive");
    }
    require(p > 0.0 && p <= 1.0, "p must lie in (0,1]");
    for (double a : alpha.values)
    {
        require(a > 0.0, "alpha must be positive");
    }
    require(arrival == "poisson" || arrival == "bernoulli" || arrival == "geometric",
            "arrival law must be poisson, bernoulli or geometric");
    require(harvest == "reciprocal" || harvest == "power" || harvest == "constant",
            "harvest policy must be reciprocal, power or constant");
    require(mu > 0.0 && mu <= 1.0, "mu must lie in (0,1]");
    require(format == "csv" || format == "json", "format must be csv or json");
    require(lyapunov == "q_plus_v" || lyapunov == "q_only", "lyapunov must be q_plus_v or q_only");
    require(stride >= 1, "stride must be >= 1");
    require(windows >= 3, "windows must be >= 3");
    require(q_ceiling > 0, "q ceiling must be positive");
    require(k >= 1, "k must be >= 1");
    require(start_q >= 0 && start_v >= 0 && start_v <= start_q, "start state needs 0 <= v <= q");
    require(margin >= 0.0, "margin must be non-negative");
    require(delta > 0.0, "delta must be positive");
    require(lag_cap >= 1, "lag cap must be >= 1");
    require(w0 >= 0, "w0 must be non-negative");
    require(!out.empty(), "output path must not be empty");

    bool const single_point = command != Command::sweep;
    if (single_point)
    {
        require(lambda.values.size() == 1, "this command takes a single lambda value");
        require(c.values.size() == 1, "this command takes a single c value");
    }
    if (command == Command::sweep || command == Command::remark3)
    {
        require(effective_horizon() >= 10'000, "classification needs a horizon of at least 1e4");
    }
    if (command == Command::remark3)
    {
        for (double a : alpha.values)
        {
            require(a != 1.0, "remark3 needs alpha != 1");
        }
    }
    if (command == Command::aux_verify)
    {
        require(effective_horizon() > burn_in, "horizon must exceed burn-in");
    }
    if (command == Command::simulate && harvest == "power")
    {
        require(alpha.values.size() == 1, "simulate with a power-law policy takes one alpha");
    }
}

ModelParams ExperimentConfig::model_params(double alpha_value) const
{
    ModelParams mp;
    mp.lambda = lambda.values.front();
    mp.c = c.values.front();
    mp.p = p;
    mp.arrival = parse_arrival_law(arrival);
    if (harvest == "power")
    {
        mp.harvest = PowerLaw{alpha_value};
    }
    else if (harvest == "constant")
    {
        mp.harvest = ConstantRate{mu};
    }
    return mp;
}

std::uint64_t ExperimentConfig::effective_horizon() const
{
    if (horizon > 0)
    {
        return horizon;
    }
    return command == Command::lemma1_verify ? 1'000 : 1'000'000;
}

unsigned ExperimentConfig::effective_threads() const
{
    return threads > 0 ? threads : default_parallelism();
}

nlohmann::ordered_json to_json(ExperimentConfig const& cfg)
{
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["command"] = to_string(cfg.command);
    j["seed"] = cfg.seed;
    j["lambda"] = cfg.lambda.text;
    j["c"] = cfg.c.text;
    j["p"] = cfg.p;
    j["arrival"] = cfg.arrival;
    j["harvest"] = cfg.harvest;
    j["alpha"] = cfg.alpha.text;
    j["mu"] = cfg.mu;
    j["horizon"] = cfg.horizon;
    j["burn_in"] = cfg.burn_in;
    j["replications"] = cfg.replications;
    j["stride"] = cfg.stride;
    j["windows"] = cfg.windows;
    j["q_ceiling"] = cfg.q_ceiling;
    j["start_q"] = cfg.start_q;
    j["start_v"] = cfg.start_v;
    j["k"] = cfg.k;
    j["lyapunov"] = cfg.lyapunov;
    j["margin"] = cfg.margin;
    j["radius"] = cfg.radius;
    j["delta"] = cfg.delta;
    j["lag_cap"] = cfg.lag_cap;
    j["w0"] = cfg.w0;
    j["out"] = cfg.out;
    j["format"] = cfg.format;
    j["threads"] = cfg.threads;
    return j;
}

namespace {

template<class T>
void read_field(nlohmann::json const& doc, char const* key, T& field)
{
    if (auto it = doc.find(key); it != doc.end())
    {
        try
        {
            field = it->get<T>();
        }
        catch (nlohmann::json::exception const& e)
        {
            throw ConfigError(std::string("config field '") + key + "': " + e.what());
        }
    }
}

void read_grid(nlohmann::json const& doc, char const* key, Grid& field)
{
    if (auto it = doc.find(key); it != doc.end())
    {
        if (it->is_number())
        {
            field = parse_grid(it->dump());
        }
        else if (it->is_string())
        {
            field = parse_grid(it->get<std::string>());
        }
        else
        {
            throw ConfigError(std::string("config field '") + key + "' must be a number or grid string");
        }
    }
}

}  // namespace

ExperimentConfig config_from_json(nlohmann::json const& doc)
{
    if (!doc.is_object())
    {
        throw ConfigError("config must be a JSON object");
    }
    static std::vector<std::string> const known
        = {"schema_version", "command", "seed",     "lambda",   "c",       "p",
           "arrival",        "harvest", "alpha",    "mu",       "horizon", "burn_in",
           "replications",   "stride",  "windows",  "q_ceiling", "start_q", "start_v",
           "k",              "lyapunov", "margin",  "radius",   "delta",   "lag_cap",
           "w0",             "out",     "format",   "threads"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
    {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
        {
            throw ConfigError("unknown config field '" + it.key() + "'");
        }
    }
    ExperimentConfig cfg;
    if (auto it = doc.find("command"); it != doc.end())
    {
        cfg.command = parse_command(it->get<std::string>());
    }
    read_field(doc, "seed", cfg.seed);
    read_grid(doc, "lambda", cfg.lambda);
    read_grid(doc, "c", cfg.c);
    read_field(doc, "p", cfg.p);
    read_field(doc, "arrival", cfg.arrival);
    read_field(doc, "harvest", cfg.harvest);
    read_grid(doc, "alpha", cfg.alpha);
    read_field(doc, "mu", cfg.mu);
    read_field(doc, "horizon", cfg.horizon);
    read_field(doc, "burn_in", cfg.burn_in);
    read_field(doc, "replications", cfg.replications);
    read_field(doc, "stride", cfg.stride);
    read_field(doc, "windows", cfg.windows);
    read_field(doc, "q_ceiling", cfg.q_ceiling);
    read_field(doc, "start_q", cfg.start_q);
    read_field(doc, "start_v", cfg.start_v);
    read_field(doc, "k", cfg.k);
    read_field(doc, "lyapunov", cfg.lyapunov);
    read_field(doc, "margin", cfg.margin);
    read_field(doc, "radius", cfg.radius);
    read_field(doc, "delta", cfg.delta);
    read_field(doc, "lag_cap", cfg.lag_cap);
    read_field(doc, "w0", cfg.w0);
    read_field(doc, "out", cfg.out);
    read_field(doc, "format", cfg.format);
    read_field(doc, "threads", cfg.threads);
    return cfg;
}

ExperimentConfig load_config(std::string const& path)
{
    std::ifstream is(path);
    if (!is)
    {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    nlohmann::json doc;
    try
    {
        is >> doc;
    }
    catch (nlohmann::json::parse_error const& e)
    {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
    return config_from_json(doc);
}

ParsedArgs parse_args(std::vector<std::string> const& args)
{
    ParsedArgs parsed;
    ExperimentConfig& cfg = parsed.config;

    // First pass: the config file is the baseline that flags override.
    bool command_from_file = false;
    for (std::size_t i = 0; i < args.size(); ++i)
    {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size())
        {
            path = args[i + 1];
        }
        else if (args[i].rfind("--config=", 0) == 0)
        {
            path = args[i].substr(9);
        }
        if (!path.empty())
        {
            cfg = load_config(path);
            std::ifstream is(path);
            command_from_file = nlohmann::json::parse(is).contains("command");
        }
    }

    CLI::App app{"Slotted random access with adaptive energy harvesting: simulation and analysis",
                 "ehaloha"};
    app.require_subcommand(0, 1);
    std::vector<CLI::App*> subs;
    for (auto const& entry : kCommands)
    {
        auto* sub = app.add_subcommand(entry.name, entry.help);
        sub->fallthrough();
        subs.push_back(sub);
    }

    std::string config_path;
    std::string dump_path;
    std::string lambda = cfg.lambda.text;
    std::string c = cfg.c.text;
    std::string alpha = cfg.alpha.text;

    app.add_option("--config", config_path, "JSON config file (flags override its values)");
    app.add_option("--dump-config", dump_path, "Write the effective config as JSON");
    app.add_option("--seed", cfg.seed, "Master seed");
    app.add_option("--lambda", lambda, "Arrival mean: value, list or start:stop:step");
    app.add_option("--c", c, "Harvest constant: value, list or start:stop:step");
    app.add_option("--p", cfg.p, "Transmit probability");
    app.add_option("--arrival-law", cfg.arrival, "poisson | bernoulli | geometric");
    app.add_option("--harvest-policy", cfg.harvest, "reciprocal | power | constant");
    app.add_option("--alpha", alpha, "Power-law exponent(s)");
    app.add_option("--mu", cfg.mu, "Constant harvest probability");
    app.add_option("--horizon", cfg.horizon, "Slots per run (0: command default)");
    app.add_option("--burn-in", cfg.burn_in, "Discarded slots for long-run estimates");
    app.add_option("--replications", cfg.replications, "Independent replications (0: default)");
    app.add_option("--stride", cfg.stride, "Keep every stride-th trajectory record");
    app.add_option("--windows", cfg.windows, "Windows for trend classification");
    app.add_option("--q-ceiling", cfg.q_ceiling, "Abort when q exceeds this value");
    app.add_option("--start-q", cfg.start_q, "Drift start state q");
    app.add_option("--start-v", cfg.start_v, "Drift start state v");
    app.add_option("--k", cfg.k, "Drift horizon in slots");
    app.add_option("--lyapunov", cfg.lyapunov, "q_plus_v | q_only");
    app.add_option("--margin", cfg.margin, "Boundary margin excluded from sweep scoring");
    app.add_option("--radius", cfg.radius, "Largest initial value for the lag search (-1: default)");
    app.add_option("--delta", cfg.delta, "Tolerance for the lag search (checked at delta/3)");
    app.add_option("--lag-cap", cfg.lag_cap, "Largest step examined by the lag search");
    app.add_option("--w0", cfg.w0, "Initial population of the thinning chain");
    app.add_option("--out", cfg.out, "Output directory");
    app.add_option("--format", cfg.format, "csv | json");
    app.add_option("--threads", cfg.threads, "Worker threads (0: EHALOHA_THREADS or all cores)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    }
    catch (CLI::CallForHelp const&)
    {
        parsed.help = true;
        parsed.help_text = app.help();
        return parsed;
    }
    catch (CLI::ParseError const& e)
    {
        throw ConfigError(e.what());
    }

    bool got_command = false;
    for (std::size_t i = 0; i < subs.size(); ++i)
    {
        if (subs[i]->parsed())
        {
            cfg.command = kCommands[i].command;
            got_command = true;
        }
    }
    if (!got_command && !command_from_file)
    {
        throw ConfigError("no command given; expected one of simulate, sweep, aux-verify, "
                          "lemma1-verify, drift, remark3");
    }
    cfg.lambda = parse_grid(lambda);
    cfg.c = parse_grid(c);
    cfg.alpha = parse_grid(alpha);
    if (!dump_path.empty())
    {
        parsed.dump_config = dump_path;
    }
    cfg.validate();
    return parsed;
}

}  // namespace ehaloha::cli
