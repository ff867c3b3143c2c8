// Command-line front end: transverse modes, trap spectra, resonance poles,
// rho sweeps with decay fits, and the three-route golden-rule report.

#include "wgres/config.hpp"
#include "wgres/errors.hpp"
#include "wgres/resonance.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace wgres;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct OutputSink {
    std::optional<fs::path> dir;
    bool want_csv = true;
    bool want_json = true;

    void write(const std::string& stem, const std::string& csv, const json& full) const {
        if (!dir) return;
        fs::create_directories(*dir);
        if (want_csv) {
            std::ofstream out(*dir / (stem + ".csv"));
            out << csv;
        }
        if (want_json) {
            std::ofstream out(*dir / (stem + ".json"));
            out << full.dump(2) << "\n";
        }
    }
};

OutputSink make_sink(const RunConfig& config, const std::string& out_flag,
                     const std::string& format_flag) {
    OutputSink sink;
    std::string dir = out_flag.empty() ? config.output.directory : out_flag;
    if (!dir.empty() && dir != "-") sink.dir = fs::path(dir);
    bool csv = false, js = false;
    for (const auto& f : config.output.formats) {
        csv |= f == "csv";
        js |= f == "json";
    }
    if (!format_flag.empty()) {
        csv = format_flag == "csv";
        js = format_flag == "json";
    }
    sink.want_csv = csv;
    sink.want_json = js;
    return sink;
}

int run_modes(const RunConfig& config, const OutputSink& sink) {
    auto profile = make_profile(config);
    auto modes = solve_modes(profile, 1e-12);
    if (modes.empty())
        std::cerr << "warning: profile binds no transverse mode; table is empty\n";

    std::string csv = "n,energy,amplitude_left,kappa\n";
    json rows = json::array();
    std::cout << "  n        E_n                M_n                kappa_n\n";
    for (const auto& m : modes) {
        csv += std::to_string(m.index) + "," + fmt(m.energy) + "," + fmt(m.amplitude_left) +
               "," + fmt(m.kappa) + "\n";
        rows.push_back({{"n", m.index},
                        {"energy", m.energy},
                        {"amplitude_left", m.amplitude_left},
                        {"edge_right", m.edge_right},
                        {"kappa", m.kappa}});
        std::printf("%3d   %-18.12g %-18.12g %-18.12g\n", m.index, m.energy, m.amplitude_left,
                    m.kappa);
    }
    sink.write("modes", csv, json{{"modes", rows}});
    return 0;
}

TrapSolveOptions trap_options(const RunConfig& config) {
    TrapSolveOptions opts;
    opts.energy_floor = config.numerics.trap_window[0];
    opts.energy_ceiling = config.numerics.trap_window[1];
    return opts;
}

int run_trap(const RunConfig& config, const OutputSink& sink) {
    auto trap = make_trap(config, config.placement.rho);
    auto states = trap_eigenvalues(trap, config.trap.beta, config.numerics.trap_tol,
                                   trap_options(config));
    std::string csv = "n,energy,residual\n";
    json rows = json::array();
    std::cout << "  n        E_n                residual\n";
    for (const auto& st : states) {
        csv += std::to_string(st.index) + "," + fmt(st.energy) + "," + fmt(st.residual) + "\n";
        rows.push_back(
            {{"n", st.index}, {"energy", st.energy}, {"residual", st.residual}});
        std::printf("%3d   %-18.12g %-10.3g\n", st.index, st.energy, st.residual);
    }
    sink.write("trap", csv, json{{"states", rows}});
    return 0;
}

ResonanceSystem build_system(const RunConfig& config, int n, double rho) {
    auto profile = make_profile(config);
    auto trap = make_trap(config, rho);
    return make_resonance_system(profile, trap, config.trap.beta, n, config.numerics.trap_tol,
                                 config.numerics.neighborhood, trap_options(config));
}

json pole_record(const ResonancePole& p) {
    return json{{"trap_index", p.trap_index},
                {"channel_segment", p.channel_segment},
                {"rho", p.rho},
                {"re_z", p.z.real()},
                {"im_z", p.z.imag()},
                {"gamma_leading", p.gamma_leading},
                {"gamma", p.gamma},
                {"residual", p.newton_residual},
                {"iterations", p.iterations}};
}

const char* kSweepHeader = "rho,re_z,im_z,gamma_leading,gamma,residual,iters\n";

std::string sweep_row(double rho, const ResonancePole* p) {
    if (!p)
        return fmt(rho) + ",nan,nan,nan,nan,nan,0\n";
    return fmt(rho) + "," + fmt(p->z.real()) + "," + fmt(p->z.imag()) + "," +
           fmt(p->gamma_leading) + "," + fmt(p->gamma) + "," + fmt(p->newton_residual) + "," +
           std::to_string(p->iterations) + "\n";
}

int run_pole(const RunConfig& config, int n, const OutputSink& sink) {
    auto sys = build_system(config, n, config.placement.rho);
    PoleOptions opts;
    opts.tol = config.numerics.pole_tol;
    opts.regime_threshold = config.numerics.regime_threshold;
    ResonancePole pole = find_pole(sys, opts);
    std::cout << "pole z = " << fmt(pole.z.real()) << " " << (pole.z.imag() < 0 ? "-" : "+")
              << " " << fmt(std::abs(pole.z.imag())) << "i\n"
              << "gamma_leading = " << fmt(pole.gamma_leading)
              << "  gamma = " << fmt(pole.gamma) << "\n"
              << "residual = " << fmt(pole.newton_residual)
              << "  iterations = " << pole.iterations << "\n";
    std::string csv = std::string(kSweepHeader) + sweep_row(pole.rho, &pole);
    sink.write("pole", csv, pole_record(pole));
    return 0;
}

int run_goldenrule(const RunConfig& config, int n, const OutputSink& sink) {
    auto sys = build_system(config, n, config.placement.rho);
    auto channels = golden_rule_channels(sys);
    double overlap = 0.0;
    for (double c : channels) overlap += c;
    double cosine = sys.open_channels ? golden_rule_cos_form(sys) : 0.0;
    double gi = sys.open_channels ? golden_rule_gi_route(sys) : 0.0;
    auto rel = [](double a, double b) {
        double scale = std::max(std::abs(a), std::abs(b));
        return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
    };
    json out{{"open_channels", sys.open_channels},
             {"trap_energy", sys.state.energy},
             {"overlap_form", overlap},
             {"cosine_form", cosine},
             {"gi_route", gi},
             {"rel_diff_overlap_cosine", rel(overlap, cosine)},
             {"rel_diff_overlap_gi", rel(overlap, gi)},
             {"rel_diff_cosine_gi", rel(cosine, gi)},
             {"per_channel", channels}};
    std::cout << "Gamma (overlap) = " << fmt(overlap) << "\n"
              << "Gamma (cosine)  = " << fmt(cosine) << "\n"
              << "Gamma (G^I)     = " << fmt(gi) << "\n"
              << "pairwise rel diffs: " << fmt(rel(overlap, cosine)) << " "
              << fmt(rel(overlap, gi)) << " " << fmt(rel(cosine, gi)) << "\n";
    std::string csv = "route,gamma\noverlap," + fmt(overlap) + "\ncosine," + fmt(cosine) +
                      "\ngi," + fmt(gi) + "\n";
    sink.write("goldenrule", csv, out);
    return 0;
}

int run_sweep(const RunConfig& config, int n, const OutputSink& sink) {
    if (!sink.dir) throw ConfigError("sweep: an output directory is required");
    fs::create_directories(*sink.dir);
    char hash_hex[24];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(config_hash(config)));
    fs::path results = *sink.dir / (std::string("sweep_") + hash_hex + ".csv");

    // resume support: rows for already-computed rho values are kept
    std::vector<double> done;
    if (fs::exists(results)) {
        std::ifstream in(results);
        std::string line;
        std::getline(in, line); // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            done.push_back(std::strtod(line.c_str(), nullptr));
        }
    } else {
        std::ofstream out(results);
        out << kSweepHeader;
    }

    auto grid = sweep_grid(config);
    std::vector<double> pending;
    for (double rho : grid) {
        bool have = false;
        for (double r : done)
            if (std::abs(r - rho) <= 1e-12 * std::max(1.0, rho)) have = true;
        if (!have) pending.push_back(rho);
        else std::cout << "rho = " << fmt(rho) << ": already present, skipping\n";
    }

    // shared physics: the trap spectrum is translation invariant, so one
    // system is built and translated per grid point; anchoring at the first
    // grid point (not the first pending one) keeps resumed runs bit-identical
    std::optional<ResonanceSystem> base;
    if (!pending.empty()) base = build_system(config, n, grid.front());

    struct RowResult {
        double rho;
        std::optional<ResonancePole> pole;
        std::string error;
    };
    std::vector<RowResult> rows(pending.size());
    std::atomic<std::size_t> next{0};
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("WGRES_WORKERS")) {
        int w = std::atoi(env);
        if (w >= 1) workers = static_cast<unsigned>(w);
    }
    workers = std::min<unsigned>(workers, std::max<std::size_t>(pending.size(), 1));

    auto work = [&]() {
        for (std::size_t i = next.fetch_add(1); i < pending.size(); i = next.fetch_add(1)) {
            rows[i].rho = pending[i];
            try {
                double sign = config.placement.side == "below" ? -1.0 : 1.0;
                auto sys = with_translated_measure(*base, 0.0,
                                                   sign * (pending[i] - grid.front()));
                PoleOptions opts;
                opts.tol = config.numerics.pole_tol;
                opts.regime_threshold = config.numerics.regime_threshold;
                rows[i].pole = find_pole(sys, opts);
            } catch (const std::exception& e) {
                rows[i].error = e.what();
            }
        }
    };
    {
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
        work();
        for (auto& th : pool) th.join();
    }

    // single writer appends in grid order
    {
        std::ofstream out(results, std::ios::app);
        for (const auto& row : rows) {
            out << sweep_row(row.rho, row.pole ? &*row.pole : nullptr);
            if (!row.error.empty())
                std::cerr << "rho = " << fmt(row.rho) << " failed: " << row.error << "\n";
        }
    }

    // decay fits over everything available for this configuration
    std::vector<std::pair<double, double>> gamma_samples, shift_samples;
    double trap_energy = base ? base->state.energy : 0.0;
    double open_threshold = 0.0;
    if (base) open_threshold = base->modes[base->open_channels - 1].energy;
    {
        std::ifstream in(results);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            double rho, re_z, im_z, gl;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &rho, &re_z, &im_z, &gl) == 4 &&
                std::isfinite(re_z)) {
                if (std::abs(gl) > 0.0) gamma_samples.push_back({rho, std::abs(gl)});
                double shift = std::abs(re_z - trap_energy);
                if (shift > 0.0) shift_samples.push_back({rho, shift});
            }
        }
    }
    json report{{"config_hash", hash_hex},
                {"trap_energy", trap_energy},
                {"points", grid.size()}};
    if (base && gamma_samples.size() >= 4) {
        DecayFit g = fit_decay(gamma_samples);
        double target = -2.0 * std::sqrt(std::abs(open_threshold));
        report["gamma_fit"] = {{"slope", g.slope},
                               {"target", target},
                               {"r_squared", g.r_squared},
                               {"pass", std::abs(g.slope - target) <= 0.1 * std::abs(target)}};
    }
    if (base && shift_samples.size() >= 4) {
        DecayFit s = fit_decay(shift_samples);
        double target = std::sqrt(2.0 * std::abs(trap_energy));
        report["shift_fit"] = {{"slope", s.slope},
                               {"target_rate", target},
                               {"r_squared", s.r_squared},
                               {"pass", -s.slope >= 0.9 * target}};
    }
    {
        std::ofstream out(*sink.dir / "fit_report.json");
        out << report.dump(2) << "\n";
        // plain two-column series for external plotting
        std::ofstream g(*sink.dir / "gamma_vs_rho.dat");
        for (auto& [r, v] : gamma_samples) g << fmt(r) << " " << fmt(v) << "\n";
        std::ofstream s(*sink.dir / "shift_vs_rho.dat");
        for (auto& [r, v] : shift_samples) s << fmt(r) << " " << fmt(v) << "\n";
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"soft-waveguide resonance toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, format;
    int index = 1;

    auto add_common = [&](CLI::App* cmd, bool with_index) {
        cmd->add_option("--config", config_path, "configuration file")->required();
        cmd->add_option("--out", out_dir, "output directory (overrides config)");
        cmd->add_option("--format", format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        if (with_index) cmd->add_option("--n", index, "trap state index (1-based)");
    };

    auto* cmd_modes = app.add_subcommand("modes", "transverse modes of the strip");
    add_common(cmd_modes, false);
    auto* cmd_trap = app.add_subcommand("trap", "trap bound states");
    add_common(cmd_trap, false);
    auto* cmd_pole = app.add_subcommand("pole", "second-sheet resolvent pole");
    add_common(cmd_pole, true);
    auto* cmd_sweep = app.add_subcommand("sweep", "rho sweep with decay fits");
    add_common(cmd_sweep, true);
    auto* cmd_gr = app.add_subcommand("goldenrule", "three-route golden-rule report");
    add_common(cmd_gr, true);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig config = load_config(config_path);
        OutputSink sink = make_sink(config, out_dir, format);
        if (cmd_modes->parsed()) return run_modes(config, sink);
        if (cmd_trap->parsed()) return run_trap(config, sink);
        if (cmd_pole->parsed()) return run_pole(config, index, sink);
        if (cmd_sweep->parsed()) return run_sweep(config, index, sink);
        if (cmd_gr->parsed()) return run_goldenrule(config, index, sink);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return 2;
    } catch (const RegimeError& e) {
        std::cerr << "regime error: " << e.what() << "\n";
        return 3;
    } catch (const ThresholdError& e) {
        std::cerr << "threshold error: " << e.what() << "\n";
        return 3;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 4;
    } catch (const MultiplicityError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 4;
    } catch (const AccuracyError& e) {
        std::cerr << "accuracy error: " << e.what() << "\n";
        return 5;
    } catch (const BranchError& e) {
        std::cerr << "accuracy error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
