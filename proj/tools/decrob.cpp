#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "decrob/experiment.hpp"

namespace {

struct VerbOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::map<std::string, std::string> flags;  // config key -> value
};

void add_flag(CLI::App* sub, VerbOptions& o, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&o, key](const std::string& v) { o.flags[key] = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decrob: decoder robustness experiments"};
    app.require_subcommand(1);
    std::map<std::string, VerbOptions> opts;

    const std::map<std::string, std::string> help{
        {"simulate", "clean FER/BER per decoder and SNR"},
        {"attack", "white-box attacks on each decoder"},
        {"transfer", "perturbations crafted on sources, evaluated on all decoders"},
        {"ablate", "sweep the energy budget alpha with paired frames"},
        {"bounds", "concentration bound values and coverage simulation"},
        {"train", "train the syndrome MLP decoder"},
    };
    for (const auto& verb : decrob::experiment_verbs()) {
        auto& o = opts[verb];
        auto* sub = app.add_subcommand(verb, help.at(verb));
        sub->add_option("-c,--config", o.config_path, "key = value config file");
        sub->add_option("-s,--set", o.overrides, "override a config key (key=value), repeatable");
        add_flag(sub, o, "--code", "code", "code id, e.g. hamming_7_4, ldpc_49_24");
        add_flag(sub, o, "--decoders", "decoders", "comma list: sp, ms, sc, ml, mlp");
        add_flag(sub, o, "--sources", "sources", "comma list of source decoders (transfer)");
        add_flag(sub, o, "--snr", "snr_db", "comma list of Eb/N0 values in dB");
        add_flag(sub, o, "--alpha", "alpha", "comma list of relative budgets");
        add_flag(sub, o, "--attacks", "attacks", "comma list: none, random, fgm, pgd, uap_grad, uap_pca");
        add_flag(sub, o, "--frames", "frames", "frame budget");
        add_flag(sub, o, "--target-errors", "target_errors", "stop after this many frame errors (0: fixed frames)");
        add_flag(sub, o, "--seed", "seed", "master seed");
        add_flag(sub, o, "-o,--output", "output", "output CSV path");
        add_flag(sub, o, "--checkpoint", "checkpoint", "MLP checkpoint path");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    for (const auto& verb : decrob::experiment_verbs()) {
        if (!app.got_subcommand(verb)) continue;
        const auto& o = opts[verb];
        try {
            auto cfg = o.config_path.empty() ? decrob::Config{} : decrob::Config::load(o.config_path);
            for (const auto& [k, v] : o.flags) cfg.set(k, v);
            for (const auto& kv : o.overrides) cfg.set_assignment(kv);
            const auto e = decrob::ExperimentConfig::from(cfg, verb);
            return decrob::run_experiment(verb, e, std::cerr);
        } catch (const std::exception& ex) {
            std::cerr << "decrob " << verb << ": " << ex.what() << '\n';
            return 2;
        }
    }
    return 2;
}
