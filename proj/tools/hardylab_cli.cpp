// hardylab command line: runs one config file and writes its report.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hardylab/cli.hpp"

int main(int argc, char** argv) {
    namespace hc = hlab::cli;
    CLI::App app{"hardylab: numerical checks of Hardy, log-Hardy and CKN identities"};
    std::string config_path, output, format;
    std::size_t nodes = 0;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "run config (flat key = value)")->required();
    app.add_option("--output", output, "report path (overrides output.path; stdout when empty)");
    app.add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
    auto* nodes_opt = app.add_option("--nodes", nodes, "node count override for every quadrature axis");
    auto* seed_opt = app.add_option("--seed", seed, "seed override");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : hc::exit_invalid;
    }

    hc::RunConfig cfg;
    try {
        cfg = hc::parse_run_config(hc::read_config_file(config_path));
        if (*nodes_opt) {
            if (nodes < 4) throw hlab::InvalidInput("--nodes must be >= 4");
            hc::override_nodes(cfg, nodes);
        }
        if (*seed_opt) cfg.seed = seed;
        if (!format.empty()) cfg.format = format;
        if (!output.empty()) cfg.output_path = output;
    } catch (const hlab::InvalidInput& e) {
        std::cerr << "hardylab: invalid input: " << e.what() << "\n";
        return hc::exit_invalid;
    }

    const hc::RunResult res = hc::run(cfg);
    const std::string text = hc::render(res, cfg.format);
    if (cfg.output_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(cfg.output_path, std::ios::binary);
        if (!out) {
            std::cerr << "hardylab: cannot write '" << cfg.output_path << "'\n";
            return hc::exit_invalid;
        }
        out << text;
    }
    if (res.body.contains("error")) std::cerr << "hardylab: " << res.body["error"].get<std::string>() << "\n";
    std::cerr << "hardylab: " << res.body.value("status", "") << " (exit " << res.exit_code << ")\n";
    return res.exit_code;
}
