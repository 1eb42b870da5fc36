#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <arlcp/commands.hpp>
#include <arlcp/errors.hpp>

namespace {

struct CliState {
    std::optional<std::string> config_path;
    arlcp::CliOverrides overrides;
    std::string score_input;
    bool emit_advantages = false;
    std::string analyze_input;
    int bin_width = 20;
    bool benchmark = false;
    std::string eval_input;
    std::optional<std::string> baseline_path;
};

arlcp::ToolkitConfig build_config(const CliState& state) {
    arlcp::ToolkitConfig cfg;
    if (state.config_path) cfg = arlcp::load_toolkit_config(*state.config_path);
    arlcp::apply_overrides(cfg, state.overrides);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"arlcp: score reasoning-trace rollouts with a complexity-aware composite "
                 "reward, analyze corpora, and run the synthetic policy-gradient trainer"};
    app.require_subcommand(1);

    CliState state;
    app.add_option("--config", state.config_path, "JSON configuration file");
    app.add_option("--output-dir", state.overrides.output_dir,
                   "directory for command outputs (default arlcp_out)");
    app.add_option("--seed", state.overrides.seed, "simulator RNG seed override");
    app.add_option("--n1", state.overrides.n1, "simple/moderate reflection-count threshold");
    app.add_option("--n2", state.overrides.n2, "moderate/hard reflection-count threshold");
    app.add_option("--lambda1", state.overrides.lambda1, "reflection coefficient, simple bucket");
    app.add_option("--lambda2", state.overrides.lambda2,
                   "reflection coefficient, moderate bucket");
    app.add_option("--lambda3", state.overrides.lambda3, "reflection coefficient, hard bucket");
    app.add_option("--alpha", state.overrides.alpha, "total penalty budget");
    app.add_option("--lexicon", state.overrides.lexicon_path,
                   "trigger lexicon file (one phrase per line, # comments)");
    app.add_flag("--emit-advantages", state.emit_advantages,
                 "add leave-one-out advantages to scored records, grouped by prompt_id");

    auto* score = app.add_subcommand("score", "score a rollout corpus with the composite reward");
    score->fallthrough();
    score->add_option("input", state.score_input, "corpus JSONL file")->required();

    auto* analyze = app.add_subcommand("analyze", "emit reflection and accuracy reports");
    analyze->fallthrough();
    analyze->add_option("input", state.analyze_input, "corpus JSONL file")->required();
    analyze->add_option("--bin-width", state.bin_width,
                        "reflection-count bin width for the accuracy report");

    auto* train = app.add_subcommand("train-sim", "run the synthetic policy-gradient trainer");
    train->fallthrough();
    train->add_flag("--benchmark", state.benchmark,
                    "use the built-in three-archetype benchmark configuration");

    auto* eval = app.add_subcommand("eval", "report pass@1 and mean length per dataset");
    eval->fallthrough();
    eval->add_option("input", state.eval_input, "corpus JSONL file")->required();
    eval->add_option("--baseline", state.baseline_path,
                     "eval_report.json from a baseline run; enables delta columns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 4;
    }

    try {
        const arlcp::ToolkitConfig cfg = build_config(state);
        if (score->parsed()) {
            arlcp::cmd_score(state.score_input, cfg, state.emit_advantages);
        } else if (analyze->parsed()) {
            arlcp::cmd_analyze(state.analyze_input, cfg, state.bin_width);
        } else if (train->parsed()) {
            arlcp::cmd_train_sim(cfg, state.benchmark, state.overrides.seed);
        } else if (eval->parsed()) {
            arlcp::cmd_eval(state.eval_input, cfg, state.baseline_path);
        }
    } catch (const arlcp::EmptyInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const arlcp::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const arlcp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const arlcp::InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
