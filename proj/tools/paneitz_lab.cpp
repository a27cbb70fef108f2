// paneitz-lab: command-line front end for the laboratory.

#include "paneitz/einstein_core.hpp"
#include "paneitz/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

struct Overrides {
    std::map<std::string, std::string> values;
    bool round = false;
};

std::string flag_name(std::string key) {
    for (auto& c : key)
        if (c == '_') c = '-';
    return "--" + key;
}

void add_config_options(CLI::App* sub, Overrides& o, std::optional<std::string>& config_file,
                        std::optional<std::string>& out) {
    sub->add_option("--config", config_file, "key=value configuration file");
    sub->add_option("--out", out, "output root (overrides PANEITZ_LAB_OUT)");
    for (const auto& key : paneitz::config_keys()) {
        if (key == "round") continue;
        sub->add_option(flag_name(key), o.values[key], "override '" + key + "'");
    }
    sub->add_flag("--round", o.round, "round unit sphere, S = n(n-1)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for Paneitz-Branson invariants on Einstein manifolds"};
    app.require_subcommand(1);

    Overrides o;
    std::optional<std::string> config_file, out;
    for (const char* name : {"coeffs", "spectrum", "minimize", "bubble-sweep", "two-plane-bound", "audit"}) {
        auto* sub = app.add_subcommand(name);
        add_config_options(sub, o, config_file, out);
    }
    std::optional<std::string> report_dir;
    auto* rep = app.add_subcommand("report", "consolidate every run under a directory");
    rep->add_option("dir", report_dir, "run root (default: output root)");
    rep->add_option("--out", out, "output root (overrides PANEITZ_LAB_OUT)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rep->parsed()) {
            const auto root = report_dir ? std::filesystem::path(*report_dir) : paneitz::output_root(out);
            const auto r = paneitz::report(root);
            for (const auto& w : r.warnings) std::cerr << w << "\n";
            std::cout << r.summary;
            return r.ok() ? 0 : 3;
        }

        paneitz::ExperimentConfig cfg;
        cfg.command = app.get_subcommands().front()->get_name();
        if (config_file) {
            for (const auto& [k, v] : paneitz::read_config_file(*config_file)) paneitz::apply_setting(cfg, k, v);
        }
        for (const auto& [k, v] : o.values) {
            if (!v.empty()) paneitz::apply_setting(cfg, k, v);
        }
        if (o.round) {
            if (o.values["S"].size()) throw paneitz::UsageError("field 'S': conflicts with --round");
            cfg.round = true;
            cfg.S.reset();
        }
        cfg.out_root = paneitz::output_root(out).string();
        const auto result = paneitz::dispatch(cfg);
        std::cout << result.summary;
        return 0;
    } catch (const paneitz::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const paneitz::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
