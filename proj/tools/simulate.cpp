// simulate <config-file> [--workers N] [--output PATH] [--list] [--dump-basis] [--format jsonl]
//
// exit codes: 0 success, 1 usage or config error, 2 runtime error (including unwritable output
// and sweeps where every point failed)

#include <dtc/config.hpp>
#include <dtc/experiment.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <string>

namespace {

void list_experiments() {
    for (const auto& e : dtc::experiment_table)
        std::cout << e.name << std::string(12 - std::string(e.name).size(), ' ') << e.description << '\n';
}

void dump_basis(const dtc::ExperimentConfig& c) {
    for (int L : c.sizes()) {
        const dtc::Model m = dtc::make_model(L, c.drive, c.boundary);
        std::cout << "# L=" << L << " dim=" << m.basis->dim() << '\n';
        m.basis->write_csv(std::cout);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kicked PXP / Rydberg chain experiments"};
    std::string config_path, output_path, format;
    int workers = 0;
    bool list = false, dump = false;
    app.add_option("config", config_path, "experiment configuration file");
    app.add_option("--workers", workers, "worker threads (overrides the config)")->check(CLI::Range(1, 1024));
    app.add_option("--output", output_path, "output file (default: config 'output' or stdout)");
    app.add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    app.add_flag("--list", list, "list experiments and exit");
    app.add_flag("--dump-basis", dump, "print the basis of the configured model and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (list) {
        list_experiments();
        return 0;
    }
    if (config_path.empty()) {
        std::cerr << "error: missing config file\n" << app.help();
        return 1;
    }

    dtc::ExperimentConfig cfg;
    try {
        cfg = dtc::load_config(config_path);
    } catch (const dtc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    if (workers > 0)
        cfg.workers = workers;
    if (!output_path.empty())
        cfg.output = output_path;
    if (format == "jsonl")
        cfg.format = dtc::OutputFormat::jsonl;
    else if (format == "csv")
        cfg.format = dtc::OutputFormat::csv;

    try {
        if (dump) {
            dump_basis(cfg);
            return 0;
        }

        std::unique_ptr<std::ofstream> file;
        if (!cfg.output.empty()) {
            file = std::make_unique<std::ofstream>(cfg.output);
            if (!*file) {
                std::cerr << "error: cannot write " << cfg.output << '\n';
                return 2;
            }
        }
        std::unique_ptr<std::ofstream> spectrum;
        if (!cfg.spectrum.empty()) {
            spectrum = std::make_unique<std::ofstream>(cfg.spectrum);
            if (!*spectrum) {
                std::cerr << "error: cannot write " << cfg.spectrum << '\n';
                return 2;
            }
            *spectrum << "tau,quasi_energy,overlap\n";
        }

        const dtc::SweepResult res = dtc::run_experiment(cfg, spectrum.get());
        std::ostream& os = file ? static_cast<std::ostream&>(*file) : std::cout;
        if (cfg.format == dtc::OutputFormat::jsonl)
            res.write_jsonl(os);
        else
            res.write_csv(os);
        os.flush();
        if (!os || (spectrum && !*spectrum)) {
            std::cerr << "error: write failed\n";
            return 2;
        }

        const std::size_t bad = res.error_rows();
        std::cerr << res.rows.size() << " rows, " << bad << " failed, " << res.wall_time << " s\n";
        if (bad > 0) {
            for (std::size_t r = 0; r < res.rows.size(); ++r)
                if (!res.errors[r].empty())
                    std::cerr << "  row " << r << ": " << res.errors[r] << '\n';
            if (bad == res.rows.size())
                return 2;
        }
    } catch (const dtc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
