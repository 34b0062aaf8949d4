#include "wmattr/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "wmattr/errors.hpp"

namespace wmattr {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string, std::less<>> kExperimentKeys = {"n",           "tau",  "s",           "samples_per_user",
                                                            "fdr_samples", "seed", "bound_source"};
const std::set<std::string, std::less<>> kSelectionKeys = {"strategy", "depth", "bsta_node_budget"};
const std::set<std::string, std::less<>> kChannelKeys = {"beta",  "beta_min",   "beta_max",
                                                         "gamma", "gamma_mode", "postprocess"};

void check_keys(const std::string& section, const pt::ptree& body, const std::set<std::string, std::less<>>& known) {
    for (const auto& [key, value] : body) {
        if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }
}

template <typename T>
T get_value(const pt::ptree& body, const std::string& section, const std::string& key, T fallback) {
    const auto raw = body.get_optional<std::string>(key);
    if (!raw) return fallback;
    std::istringstream in(*raw);
    T value{};
    if constexpr (std::is_unsigned_v<T>) {
        if (raw->find('-') != std::string::npos) {
            throw ConfigError("[" + section + "] " + key + " must be non-negative, got '" + *raw + "'");
        }
    }
    if (!(in >> value) || !(in >> std::ws).eof()) {
        throw ConfigError("[" + section + "] " + key + " has invalid value '" + *raw + "'");
    }
    return value;
}

std::string get_text(const pt::ptree& body, const std::string& key, const std::string& fallback) {
    return body.get<std::string>(key, fallback);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

BoundSource parse_bound_source(const std::string& text) {
    if (text == "configured") return BoundSource::Configured;
    if (text == "estimated") return BoundSource::Estimated;
    throw ConfigError("bound_source must be 'configured' or 'estimated', got '" + text + "'");
}

} // namespace

LoadedConfig read_config(std::istream& in) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    pt::ptree tree;
    {
        std::istringstream stream(text);
        try {
            pt::read_ini(stream, tree);
        } catch (const pt::ini_parser_error& e) {
            throw ConfigError(std::string("malformed config: ") + e.what());
        }
    }

    LoadedConfig out;
    {
        std::istringstream stream(text);
        out.profiles = ProfileTable::read_ini(stream);
    }
    ExperimentConfig& cfg = out.experiment;
    for (const auto& [section, body] : tree) {
        if (section == "experiment") {
            check_keys(section, body, kExperimentKeys);
            cfg.n = get_value<std::size_t>(body, section, "n", cfg.n);
            if (auto tau = body.get_optional<std::string>("tau")) {
                try {
                    cfg.tau = Rational::parse(*tau);
                } catch (const std::exception&) {
                    throw ConfigError("[experiment] tau has invalid value '" + *tau + "'");
                }
            }
            cfg.s = get_value<std::size_t>(body, section, "s", cfg.s);
            cfg.samples_per_user = get_value<std::size_t>(body, section, "samples_per_user", cfg.samples_per_user);
            cfg.fdr_samples = get_value<std::size_t>(body, section, "fdr_samples", cfg.fdr_samples);
            cfg.seed = get_value<std::uint64_t>(body, section, "seed", cfg.seed);
            out.seed_set = body.count("seed") > 0;
            cfg.bound_source = parse_bound_source(get_text(body, "bound_source", "configured"));
        } else if (section == "selection") {
            check_keys(section, body, kSelectionKeys);
            if (auto kind = body.get_optional<std::string>("strategy")) cfg.strategy.kind = parse_selection_kind(*kind);
            cfg.strategy.depth = get_value<int>(body, section, "depth", cfg.strategy.depth);
            cfg.strategy.node_budget =
                get_value<std::uint64_t>(body, section, "bsta_node_budget", cfg.strategy.node_budget);
        } else if (section == "channel") {
            check_keys(section, body, kChannelKeys);
            if (body.count("beta") && (body.count("beta_min") || body.count("beta_max"))) {
                throw ConfigError("[channel] sets both beta and a beta range");
            }
            if (body.count("beta")) {
                cfg.beta.lo = cfg.beta.hi = get_value<double>(body, section, "beta", 1.0);
            } else {
                cfg.beta.lo = get_value<double>(body, section, "beta_min", cfg.beta.lo);
                cfg.beta.hi = get_value<double>(body, section, "beta_max", cfg.beta.hi);
            }
            cfg.gamma = get_value<double>(body, section, "gamma", cfg.gamma);
            if (auto mode = body.get_optional<std::string>("gamma_mode")) cfg.gamma_mode = parse_gamma_mode(*mode);
            if (auto name = body.get_optional<std::string>("postprocess")) {
                if (*name == "none") {
                    cfg.postprocess.reset();
                } else {
                    cfg.postprocess = out.profiles.get(*name);
                }
            }
        } else if (!std::string_view(section).starts_with("postprocess:")) {
            throw ConfigError("unknown section [" + section + "]");
        }
    }
    cfg.validate();
    return out;
}

LoadedConfig read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return read_config(in);
}

void write_config(const LoadedConfig& loaded, std::ostream& out) {
    const ExperimentConfig& cfg = loaded.experiment;
    out << "[experiment]\n"
        << "n = " << cfg.n << '\n'
        << "tau = " << cfg.tau.to_string() << '\n'
        << "s = " << cfg.s << '\n'
        << "samples_per_user = " << cfg.samples_per_user << '\n'
        << "fdr_samples = " << cfg.fdr_samples << '\n'
        << "seed = " << cfg.seed << '\n'
        << "bound_source = " << (cfg.bound_source == BoundSource::Configured ? "configured" : "estimated") << "\n\n";
    out << "[selection]\n"
        << "strategy = " << to_string(cfg.strategy.kind) << '\n'
        << "depth = " << cfg.strategy.depth << '\n'
        << "bsta_node_budget = " << cfg.strategy.node_budget << "\n\n";
    out << "[channel]\n";
    if (cfg.beta.lo == cfg.beta.hi) {
        out << "beta = " << format_double(cfg.beta.lo) << '\n';
    } else {
        out << "beta_min = " << format_double(cfg.beta.lo) << '\n'
            << "beta_max = " << format_double(cfg.beta.hi) << '\n';
    }
    out << "gamma = " << format_double(cfg.gamma) << '\n'
        << "gamma_mode = " << to_string(cfg.gamma_mode) << '\n'
        << "postprocess = " << (cfg.postprocess ? cfg.postprocess->name : "none") << "\n\n";
    loaded.profiles.write_ini(out);
}

} // namespace wmattr
