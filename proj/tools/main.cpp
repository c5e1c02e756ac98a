#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "eulermv/harness.hpp"
#include "eulermv/io.hpp"

using namespace eulermv;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_override;
    std::int64_t seed_override = -1;
    int threads_override = 0;
    bool strict = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "run configuration file")->required();
    cmd->add_option("--out", f.out_override, "output directory (overrides the config)");
    cmd->add_option("--seed", f.seed_override, "seed (overrides the config)");
    cmd->add_option("--threads", f.threads_override, "worker cap (overrides the config)");
    cmd->add_flag("--strict", f.strict, "treat warnings as failures");
}

int load_config(const CommonFlags& f, const std::string& kind, RunConfig& cfg) {
    std::string text;
    try {
        text = io::read_text_file(f.config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    ParseOutcome parsed = parse_config(text);
    if (!parsed.ok) {
        std::cerr << "configuration errors in " << f.config_path << ":\n";
        for (const auto& e : parsed.errors) std::cerr << "  - " << e << "\n";
        return 2;
    }
    cfg = parsed.config;
    cfg.kind = kind;
    apply_env_overrides(cfg);
    if (!f.out_override.empty()) cfg.out = f.out_override;
    if (f.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed_override);
    if (f.threads_override > 0) cfg.threads = f.threads_override;
    return 0;
}

int dispatch(const CommonFlags& f, const std::string& kind) {
    RunConfig cfg;
    if (int rc = load_config(f, kind, cfg); rc != 0) return rc;
    try {
        RunResult res = run(cfg, f.strict);
        for (const auto& c : res.manifest.checks)
            std::cout << (c.pass ? "  pass  " : "  FAIL  ") << c.name
                      << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
        std::cout << (res.exit_code == 0 ? "ok" : "failed") << ": " << kind << " -> " << cfg.out
                  << "\n";
        return res.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic Euler measure-valued solution laboratory"};
    app.require_subcommand(1);

    CommonFlags flags[6];
    const char* kinds[5] = {"simulate", "compare", "defect", "ensemble", "select"};
    const char* blurbs[5] = {"run one trajectory and write ledger + snapshots",
                             "weak-strong relative-energy comparison",
                             "coarse-grain a run and check the defect relations",
                             "Monte-Carlo martingale statistics",
                             "toy path-space Markov selection"};
    CLI::App* cmds[5];
    for (int i = 0; i < 5; ++i) {
        cmds[i] = app.add_subcommand(kinds[i], blurbs[i]);
        add_common(cmds[i], flags[i]);
    }

    CLI::App* check = app.add_subcommand("check-config", "parse and echo a configuration");
    add_common(check, flags[5]);

    CLI11_PARSE(app, argc, argv);

    for (int i = 0; i < 5; ++i)
        if (cmds[i]->parsed()) return dispatch(flags[i], kinds[i]);

    if (check->parsed()) {
        RunConfig cfg;
        if (int rc = load_config(flags[5], "check-config", cfg); rc != 0) return rc;
        std::cout << emit_config(cfg);
        return 0;
    }
    return 2;
}
