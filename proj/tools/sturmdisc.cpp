#include <sturmdisc/cli.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

struct Args {
    std::string config;
    std::string out;
    std::string format;
};

void add_io(CLI::App* app, Args& a) {
    app->add_option("--config", a.config, "JSON config file")->required()->check(CLI::ExistingFile);
    app->add_option("--out", a.out, "report path (default: config output.path, else stdout)");
    app->add_option("--format", a.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral experiments for Sturm-Liouville problems with a transmission point"};
    app.set_version_flag("--version", std::string(sturmdisc::version));
    app.require_subcommand(1);

    Args args;
    std::string command, sub;
    for (const std::string& name : sturmdisc::cli::commands()) {
        if (name == "uniq") continue;
        CLI::App* c = app.add_subcommand(name);
        add_io(c, args);
        c->callback([&command, name] { command = name; });
    }
    CLI::App* uniq = app.add_subcommand("uniq", "uniqueness-lab experiments");
    uniq->require_subcommand(1);
    for (const std::string& name : sturmdisc::cli::uniq_experiments()) {
        CLI::App* c = uniq->add_subcommand(name);
        add_io(c, args);
        c->callback([&command, &sub, name] {
            command = "uniq";
            sub = name;
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : sturmdisc::cli::exit_validation;
    }

    std::optional<std::string> out, format;
    if (!args.out.empty()) out = args.out;
    if (!args.format.empty()) format = args.format;
    sturmdisc::cli::RunResult rr;
    try {
        rr = sturmdisc::cli::run_file(args.config, command, sub, out, format);
    } catch (const std::exception& e) {
        std::cerr << "sturmdisc: internal error: " << e.what() << "\n";
        return sturmdisc::cli::exit_computation;
    }
    if (!rr.message.empty()) std::cerr << "sturmdisc: " << rr.message << "\n";
    if (rr.output.empty()) return rr.exit_code;
    if (rr.path.empty()) {
        std::cout << rr.output;
    } else {
        std::ofstream f(rr.path, std::ios::binary);
        f << rr.output;
        if (!f) {
            std::cerr << "sturmdisc: cannot write '" << rr.path << "'\n";
            return sturmdisc::cli::exit_computation;
        }
    }
    return rr.exit_code;
}
