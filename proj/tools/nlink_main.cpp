// Command-line front end: sim / converge / audit subcommands.

#include <nlink/cli.hpp>

#include <CLI11.hpp>

int main(int argc, char** argv) {
    CLI::App app{"planar N-link filament simulator"};
    app.require_subcommand(1);

    nlink::CliOptions opt;
    app.add_option("--out-dir", opt.out_dir, "output directory (overrides config and NLINK_OUT_DIR)");
    app.add_option("--format", opt.format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json", ""}));
    app.add_option("--threads", opt.threads, "worker threads for converge");

    std::string config_path, trajectory_path;
    CLI::App* sim = app.add_subcommand("sim", "run one simulation from a config file");
    sim->add_option("config", config_path, "experiment config")->required();
    CLI::App* conv = app.add_subcommand("converge", "run a refinement study from a config file");
    conv->add_option("config", config_path, "experiment config")->required();
    CLI::App* audit = app.add_subcommand("audit", "audit a trajectory CSV");
    audit->add_option("trajectory", trajectory_path, "trajectory CSV from sim")->required();

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) return nlink::cmd_simulate(config_path, opt);
    if (conv->parsed()) return nlink::cmd_converge(config_path, opt);
    return nlink::cmd_audit(trajectory_path, opt);
}
