#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "sarcf/errors.hpp"

namespace {

// Exit codes: 2 config problems, 3 model validity (stability), 4 failed
// experiments, 1 anything else.
int dispatch(const CLI::App& app, const std::string& config_path, bool seed_given,
             std::uint64_t seed, const sarcf::cli::CommandOptions& opts) {
    using namespace sarcf;
    try {
        cli::RunConfig cfg =
            config_path.empty() ? cli::default_run_config() : cli::load_config(config_path);
        if (seed_given) cfg.experiment.seed = seed;

        if (app.got_subcommand("network")) cli::cmd_network(cfg, opts);
        else if (app.got_subcommand("effects")) cli::cmd_effects(cfg, opts);
        else if (app.got_subcommand("fit")) cli::cmd_fit(cfg, opts);
        else if (app.got_subcommand("mc")) cli::cmd_mc(cfg, opts);
        else if (app.got_subcommand("regimes")) cli::cmd_regimes(opts);
        return 0;
    } catch (const cli::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ParamError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ModelError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ExperimentError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and estimation toolkit for causal effects under network interdependence"};
    app.require_subcommand(1);

    std::string config_path;
    sarcf::cli::CommandOptions opts;
    std::uint64_t seed = 0;
    bool seed_given = false;

    const auto add_common = [&](CLI::App* sub, bool with_jobs) {
        sub->add_option("-c,--config", config_path, "JSON config file (defaults used when omitted)");
        sub->add_option("-o,--out", opts.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "override the config seed")
            ->each([&seed_given](const std::string&) { seed_given = true; });
        if (with_jobs)
            sub->add_option("-j,--jobs", opts.jobs, "worker threads for replications")
                ->capture_default_str();
    };

    add_common(app.add_subcommand("network", "emit the interaction matrix and spectral summary"), false);
    add_common(app.add_subcommand("effects", "emit true counterfactual effects and amplification data"), false);
    add_common(app.add_subcommand("fit", "simulate one population and fit the configured estimators"), false);
    add_common(app.add_subcommand("mc", "run the Monte Carlo experiment"), true);
    app.add_subcommand("regimes", "emit the counterfactual regime table")
        ->add_option("-o,--out", opts.out_dir, "output directory")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    return dispatch(app, config_path, seed_given, seed, opts);
}
