#include "eulermv/config.hpp"

#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

namespace eulermv {

GridSpec RunConfig::grid() const { return GridSpec(dim, points, modes, length); }

ThermoParams RunConfig::thermo() const { return ThermoParams(gamma); }

SolverConfig RunConfig::solver() const {
    SolverConfig s;
    s.h = h;
    s.substeps = substeps;
    s.eps_visc = eps_visc;
    s.R_cutoff = R_cutoff;
    s.eps_noise = noise.eps_cutoff;
    s.thermo = thermo();
    s.mass_solver_tol = mass_solver_tol;
    s.rho_floor = rho_floor;
    s.h_min = h_min;
    s.upwind_transport = upwind;
    return s;
}

namespace {

struct Entry {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

double to_double(const std::string& v, const std::string& where) {
    std::size_t pos = 0;
    double d;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(where + ": '" + v + "' is not a number");
    }
    if (pos != v.size()) throw ConfigError(where + ": trailing characters in '" + v + "'");
    return d;
}

long long to_int(const std::string& v, const std::string& where) {
    std::size_t pos = 0;
    long long i;
    try {
        i = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(where + ": '" + v + "' is not an integer");
    }
    if (pos != v.size()) throw ConfigError(where + ": trailing characters in '" + v + "'");
    return i;
}

bool to_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(where + ": '" + v + "' is not a boolean (true|false)");
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

#define NUM_ENTRY(field)                                                                     \
    Entry{[](RunConfig& c, const std::string& v) { c.field = to_double(v, #field); },        \
          [](const RunConfig& c) { return fmt(c.field); }}
#define INT_ENTRY(field)                                                                     \
    Entry{[](RunConfig& c, const std::string& v) {                                           \
              c.field = static_cast<decltype(c.field)>(to_int(v, #field));                   \
          },                                                                                 \
          [](const RunConfig& c) { return std::to_string(c.field); }}
#define BOOL_ENTRY(field)                                                                    \
    Entry{[](RunConfig& c, const std::string& v) { c.field = to_bool(v, #field); },          \
          [](const RunConfig& c) { return c.field ? std::string("true") : std::string("false"); }}
#define STR_ENTRY(field)                                                                     \
    Entry{[](RunConfig& c, const std::string& v) { c.field = v; },                           \
          [](const RunConfig& c) { return c.field; }}

// ordered so that emit produces a stable canonical layout
const std::vector<std::pair<std::string, std::vector<std::pair<std::string, Entry>>>>& schema() {
    static const std::vector<std::pair<std::string, std::vector<std::pair<std::string, Entry>>>> s = {
        {"run",
         {
             {"kind", STR_ENTRY(kind)},
             {"horizon", NUM_ENTRY(horizon)},
             {"snapshot_interval", NUM_ENTRY(snapshot_interval)},
             {"seed", INT_ENTRY(seed)},
             {"out", STR_ENTRY(out)},
             {"threads", INT_ENTRY(threads)},
         }},
        {"grid",
         {
             {"dim", INT_ENTRY(dim)},
             {"points", INT_ENTRY(points)},
             {"modes", INT_ENTRY(modes)},
             {"length", NUM_ENTRY(length)},
         }},
        {"thermo",
         {
             {"gamma", NUM_ENTRY(gamma)},
         }},
        {"noise",
         {
             {"K", INT_ENTRY(noise.K)},
             {"sigma", NUM_ENTRY(noise.sigma)},
             {"decay_a", NUM_ENTRY(noise.decay_a)},
             {"eps_cutoff", NUM_ENTRY(noise.eps_cutoff)},
             {"family", STR_ENTRY(noise.family)},
             {"hs_budget_cap", NUM_ENTRY(noise.hs_budget_cap)},
         }},
        {"solver",
         {
             {"h", NUM_ENTRY(h)},
             {"substeps", INT_ENTRY(substeps)},
             {"eps_visc", NUM_ENTRY(eps_visc)},
             {"R_cutoff", NUM_ENTRY(R_cutoff)},
             {"mass_solver_tol", NUM_ENTRY(mass_solver_tol)},
             {"rho_floor", NUM_ENTRY(rho_floor)},
             {"h_min", NUM_ENTRY(h_min)},
             {"upwind", BOOL_ENTRY(upwind)},
         }},
        {"initial",
         {
             {"family", STR_ENTRY(initial_family)},
             {"rho_bar", NUM_ENTRY(rho_bar)},
             {"s_bar", NUM_ENTRY(s_bar)},
             {"amplitude", NUM_ENTRY(amplitude)},
             {"mode", INT_ENTRY(mode)},
         }},
        {"ensemble",
         {
             {"n_paths", INT_ENTRY(n_paths)},
             {"test_mode", INT_ENTRY(test_mode)},
         }},
        {"compare",
         {
             {"delta", NUM_ENTRY(delta)},
             {"coarse_factor", INT_ENTRY(coarse_factor)},
             {"envelope", BOOL_ENTRY(envelope)},
         }},
        {"defect",
         {
             {"factor", INT_ENTRY(defect_factor)},
         }},
    };
    return s;
}

#undef NUM_ENTRY
#undef INT_ENTRY
#undef BOOL_ENTRY
#undef STR_ENTRY

const Entry* find_entry(const std::string& section, const std::string& key) {
    for (const auto& [sec, entries] : schema()) {
        if (sec != section) continue;
        for (const auto& [k, e] : entries)
            if (k == key) return &e;
        return nullptr;
    }
    return nullptr;
}

bool known_section(const std::string& section) {
    for (const auto& [sec, entries] : schema())
        if (sec == section) return true;
    return false;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

} // namespace

ParseOutcome parse_config(const std::string& text) {
    ParseOutcome out;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                out.errors.push_back("line " + std::to_string(lineno) + ": unterminated section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!known_section(section))
                out.errors.push_back("line " + std::to_string(lineno) + ": unknown section [" +
                                     section + "]");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            out.errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            out.errors.push_back("line " + std::to_string(lineno) + ": key '" + key +
                                 "' outside any section");
            continue;
        }
        if (!known_section(section)) continue; // already reported
        const Entry* e = find_entry(section, key);
        if (!e) {
            out.errors.push_back("line " + std::to_string(lineno) + ": unknown key '" + key +
                                 "' in section [" + section + "]");
            continue;
        }
        try {
            e->set(out.config, value);
        } catch (const ConfigError& err) {
            out.errors.push_back("line " + std::to_string(lineno) + ": " + err.what());
        }
    }

    // semantic validation, every failure reported
    auto check = [&](const std::function<void()>& f) {
        try {
            f();
        } catch (const ConfigError& err) {
            out.errors.push_back(err.what());
        }
    };
    check([&] { out.config.grid().validate(); });
    check([&] { (void)out.config.thermo(); });
    check([&] { out.config.solver().validate(); });
    check([&] {
        static const std::vector<std::string> kinds = {"simulate", "compare",      "defect",
                                                       "ensemble", "select",       "check-config"};
        for (const auto& k : kinds)
            if (out.config.kind == k) return;
        throw ConfigError("run.kind '" + out.config.kind +
                          "' unknown (simulate|compare|defect|ensemble|select|check-config)");
    });
    check([&] {
        static const std::vector<std::string> fams = {"stationary", "density-pulse",
                                                      "isentropic-wave", "oscillation-pair"};
        for (const auto& f : fams)
            if (out.config.initial_family == f) return;
        throw ConfigError("initial.family '" + out.config.initial_family +
                          "' unknown (stationary|density-pulse|isentropic-wave|oscillation-pair)");
    });
    check([&] {
        if (out.config.noise.family != "cosine" && out.config.noise.family != "constant")
            throw ConfigError("noise.family '" + out.config.noise.family + "' unknown (cosine|constant)");
    });
    check([&] {
        if (out.config.threads < 1) throw ConfigError("run.threads must be at least 1");
    });
    check([&] {
        if (out.config.horizon < 0.0) throw ConfigError("run.horizon must be nonnegative");
    });

    out.ok = out.errors.empty();
    return out;
}

std::string emit_config(const RunConfig& c) {
    std::ostringstream os;
    for (const auto& [sec, entries] : schema()) {
        os << "[" << sec << "]\n";
        for (const auto& [k, e] : entries) os << k << " = " << e.get(c) << "\n";
        os << "\n";
    }
    return os.str();
}

void apply_env_overrides(RunConfig& c) {
    if (const char* v = std::getenv("EULERMV_SEED")) c.seed = std::strtoull(v, nullptr, 10);
    if (const char* v = std::getenv("EULERMV_OUT")) c.out = v;
    if (const char* v = std::getenv("EULERMV_THREADS")) c.threads = std::max(1, std::atoi(v));
}

} // namespace eulermv
