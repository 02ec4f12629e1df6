// meqlab: catalog listing, analysis runs and plot-data extraction.

#include <meq/analysis.hpp>
#include <meq/catalog.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

namespace {

int cmd_catalog_list(const std::string& flag)
{
    if (!flag.empty()) {
        const auto& names = meq::flag_names();
        if (std::find(names.begin(), names.end(), flag) == names.end()) {
            std::cerr << "usage error: unknown flag '" << flag << "' (known:";
            for (const auto& n : names) {
                std::cerr << ' ' << n;
            }
            std::cerr << ")\n";
            return 1;
        }
    }
    const auto catalog = meq::build_catalog();
    std::cout << std::left << std::setw(24) << "id" << std::setw(54) << "flags" << std::setw(10) << "equicont" << std::setw(10)
              << "mean_eq" << std::setw(12) << "eq_in_mean" << std::setw(10) << "weyl" << "level\n";
    for (const auto& e : catalog) {
        if (!flag.empty() && !meq::flag_value(e->flags, flag)) {
            continue;
        }
        std::string flags;
        for (const auto& n : meq::flag_names()) {
            if (meq::flag_value(e->flags, n)) {
                flags += (flags.empty() ? "" : ",") + n;
            }
        }
        auto ex = [&](const char* p) { return meq::to_string(e->expected.at(p)); };
        std::cout << std::left << std::setw(24) << e->id << std::setw(54) << (flags.empty() ? "-" : flags) << std::setw(10)
                  << ex("equicontinuous") << std::setw(10) << ex("mean_eq") << std::setw(12) << ex("eq_in_mean") << std::setw(10)
                  << ex("weyl_mean_eq") << e->expectation_level << '\n';
    }
    return 0;
}

int cmd_analyze(const std::string& config_path, const std::string& out_dir)
{
    const auto catalog = meq::build_catalog();
    meq::experiment_config cfg;
    try {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "config error: cannot read '" << config_path << "'\n";
            return 1;
        }
        const auto j = nlohmann::json::parse(in);
        cfg = meq::parse_config(j, catalog);
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "config error: malformed JSON: " << e.what() << '\n';
        return 1;
    } catch (const meq::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
    if (dir.empty()) {
        std::cerr << "usage error: no output directory (--out or output_dir)\n";
        return 1;
    }
    const auto res = meq::run_analysis(cfg, catalog);
    meq::write_outputs(res, cfg, dir);
    std::cout << res.summary;
    std::cout << "report: " << (std::filesystem::path(dir) / "report.json").string() << '\n';
    if (res.contradiction) {
        std::cout << "contradictions:";
        for (const auto& c : res.report["contradictions"]) {
            std::cout << ' ' << c.get<std::string>();
        }
        std::cout << '\n';
        return 2;
    }
    return 0;
}

int cmd_plotdata(const std::string& report_path, const std::string& selector)
{
    std::ifstream in(report_path);
    if (!in) {
        std::cerr << "error: cannot read report '" << report_path << "'\n";
        return 1;
    }
    nlohmann::json report;
    try {
        report = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "error: malformed report: " << e.what() << '\n';
        return 1;
    }
    try {
        const auto names = meq::select_series(report, selector);
        if (selector.empty()) {
            for (const auto& n : names) {
                std::cout << n << '\n';
            }
            return 0;
        }
        std::cout << meq::series_csv(report["series"], names);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"meqlab: mean equicontinuity experiments on a catalog of dynamical systems"};
    app.require_subcommand(1);

    auto* catalog = app.add_subcommand("catalog", "Catalog operations");
    catalog->require_subcommand(1);
    auto* list = catalog->add_subcommand("list", "List catalog entries");
    std::string flag;
    list->add_option("--flag", flag, "Only entries with this flag set");

    auto* analyze = app.add_subcommand("analyze", "Run an experiment config");
    std::string config_path;
    std::string out_dir;
    analyze->add_option("--config", config_path, "Experiment config (JSON)")->required();
    analyze->add_option("--out", out_dir, "Output directory");

    auto* plot = app.add_subcommand("plotdata", "Extract a series from a report as CSV");
    std::string report_path;
    std::string selector;
    plot->add_option("--report", report_path, "report.json")->required();
    plot->add_option("--series", selector, "Series name or substring; empty lists series");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (list->parsed()) {
            return cmd_catalog_list(flag);
        }
        if (analyze->parsed()) {
            return cmd_analyze(config_path, out_dir);
        }
        if (plot->parsed()) {
            return cmd_plotdata(report_path, selector);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
