// ringsync command-line front end: one subcommand per campaign plus a single-trajectory
// simulator. Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or configuration error.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ringsync/config.hpp"
#include "ringsync/experiments.hpp"
#include "ringsync/monitors.hpp"
#include "ringsync/report.hpp"
#include "ringsync/rng.hpp"

#ifndef RINGSYNC_VERSION
#define RINGSYNC_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace ringsync;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

struct CampaignFlags {
    std::string config_path;
    std::optional<int> n;
    std::optional<long> samples;
    std::optional<double> h;
    std::optional<double> t_end;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::string out_dir = ".";
};

void add_campaign_flags(CLI::App* cmd, CampaignFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON experiment config (see docs/config.md)");
    cmd->add_option("--n", f.n, "Number of oscillators");
    cmd->add_option("--samples", f.samples, "Number of random initial conditions");
    cmd->add_option("--h", f.h, "RK4 time step");
    cmd->add_option("--t-end", f.t_end, "Integration horizon");
    cmd->add_option("--seed", f.seed, "RNG seed");
    cmd->add_option("--workers", f.workers, "Worker threads (0 = all cores)");
    cmd->add_option("--out-dir", f.out_dir, "Output directory");
}

ExperimentConfig resolve_config(Campaign campaign, const CampaignFlags& f) {
    ExperimentConfig cfg = default_config(campaign);
    if (!f.config_path.empty()) {
        const nlohmann::json j = read_config_file(f.config_path);
        apply_config_json(j, cfg);
        if (cfg.campaign != campaign)
            throw ConfigError("/campaign", "config is for '" + std::string(campaign_name(cfg.campaign)) +
                                               "' but the subcommand runs '" + std::string(campaign_name(campaign)) + "'");
    }
    if (f.n) cfg.n = *f.n;
    if (f.samples) cfg.samples = *f.samples;
    if (f.h) cfg.h = *f.h;
    if (f.t_end) cfg.t_end = *f.t_end;
    if (f.seed) cfg.seed = *f.seed;
    if (f.workers) cfg.workers = *f.workers;
    if (campaign == Campaign::correlation_probe && f.n && f.config_path.empty()) {
        // Default distance list is for n = 1280; drop distances that do not fit a smaller ring.
        std::erase_if(cfg.distances, [&](int d) { return d >= cfg.n; });
    }
    cfg.validate();
    return cfg;
}

/// Files written by one campaign run; removed again if the run fails.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

    fs::path path(const std::string& name) const { return dir_ / name; }

    void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
        const fs::path p = path(name);
        written_.push_back(p);
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
        body(out);
        out.flush();
        if (!out) throw IoError("failed writing '" + p.string() + "'");
    }

    void remove_all() noexcept {
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        written_.clear();
    }

    std::vector<std::string> names() const {
        std::vector<std::string> v;
        for (const auto& p : written_) v.push_back(p.string());
        return v;
    }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
};

template <typename Result>
using Writer = std::function<void(OutputSet&, const Result&)>;

template <typename Result>
int run_campaign(Campaign campaign, const CampaignFlags& flags, Result (*run)(const ExperimentConfig&),
                 const Writer<Result>& write) {
    ExperimentConfig cfg;
    try {
        cfg = resolve_config(campaign, flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error at " << e.what() << '\n';
        return kExitUsage;
    }

    std::error_code ec;
    fs::create_directories(flags.out_dir, ec);
    if (ec) {
        std::cerr << "cannot create output directory '" << flags.out_dir << "': " << ec.message() << '\n';
        return kExitRuntime;
    }

    OutputSet outputs(flags.out_dir);
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Result result = run(cfg);
        write(outputs, result);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        nlohmann::json manifest;
        manifest["tool"] = "ringsync";
        manifest["version"] = RINGSYNC_VERSION;
        manifest["campaign"] = std::string(campaign_name(campaign));
        manifest["config"] = config_to_json(cfg);
        manifest["seed"] = cfg.seed;
        manifest["integrator"] = {{"scheme", "rk4"}, {"h", cfg.h}, {"adaptive", false}};
        manifest["winding_sampling"] = "per integration step";
        manifest["started_at"] = started;
        manifest["finished_at"] = utc_now();
        manifest["wall_seconds"] = wall;
        manifest["summary"] = report::summary(result);
        auto names = outputs.names();
        names.push_back(outputs.path("manifest.json").string());
        manifest["outputs"] = names;
        outputs.write("manifest.json", [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
    } catch (const ConfigError& e) {
        outputs.remove_all();
        std::cerr << "config error at " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        outputs.remove_all();
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}

struct SimulateFlags {
    int n = 80;
    std::optional<int> twist;
    bool random = false;
    double h = 0.01;
    double t_end = 50.0;
    std::uint64_t seed = 1;
    double every = 0.1;
    std::string out;
};

/// Columns: t,q,energy_per_n,max_abs_eta,in_region. q is empty when ill-defined.
int run_simulate(const SimulateFlags& f) {
    std::optional<RingState> init;
    try {
        if (f.twist) {
            init = twisted_state({f.n, *f.twist, 0.0});
        } else {
            auto rng = stream_for(f.seed, 0);
            init = sample_initial_condition(f.n, rng);
        }
        (void)step_count(f.h, f.t_end);
        if (!(f.every > 0.0)) throw InvalidArgument("--every must be > 0");
    } catch (const InvalidArgument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    std::ofstream out(f.out, std::ios::binary);
    if (!out) {
        std::cerr << "cannot open '" << f.out << "' for writing\n";
        return kExitRuntime;
    }
    const long every = std::max(1L, std::lround(f.every / f.h));
    const long last = step_count(f.h, f.t_end);
    const double nd = static_cast<double>(f.n);
    auto row = [&](double t, std::span<const double> diffs, std::optional<int> q) {
        double e = nd;
        for (double d : diffs) e -= std::cos(d);
        const double m = max_abs(diffs);
        out << report::num(t) << ',' << (q ? std::to_string(*q) : std::string()) << ',' << report::num(e / nd) << ','
            << report::num(m) << ',' << (m < kHalfPi ? 1 : 0) << '\n';
    };
    out << "t,q,energy_per_n,max_abs_eta,in_region\n";
    watch_trajectory(*init, f.h, f.t_end, WatchOptions{}, [&](const StepView& v) {
        if (v.k % every == 0 || v.k == last) row(v.t, v.diffs, v.q);
    });
    out.flush();
    if (!out) {
        std::cerr << "failed writing '" << f.out << "'\n";
        std::error_code ec;
        fs::remove(f.out, ec);
        return kExitRuntime;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kuramoto ring simulator and winding-number Monte Carlo campaigns"};
    app.set_version_flag("--version", RINGSYNC_VERSION);
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    SimulateFlags sim;
    auto* simulate = app.add_subcommand("simulate", "Integrate one trajectory and write a CSV trace");
    simulate->set_help_flag("--help", "Print this help message and exit");
    simulate->add_option("--n", sim.n, "Number of oscillators")->capture_default_str();
    auto* twist_opt = simulate->add_option("--twist", sim.twist, "Start at the q-twisted state");
    auto* random_opt = simulate->add_flag("--random", sim.random, "Start from uniform random phases");
    twist_opt->excludes(random_opt);
    simulate->add_option("--h", sim.h, "RK4 time step")->capture_default_str();
    simulate->add_option("--t-end", sim.t_end, "Integration horizon")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "RNG seed for --random")->capture_default_str();
    simulate->add_option("--every", sim.every, "Output cadence in time units")->capture_default_str();
    simulate->add_option("--out", sim.out, "Output CSV path")->required();

    struct Entry {
        const char* name;
        const char* help;
        Campaign campaign;
        CampaignFlags flags;
        CLI::App* cmd = nullptr;
    };
    std::vector<Entry> entries{
        {"qdist", "Winding-number distribution at checkpoint times", Campaign::q_distribution, {}},
        {"timing", "Mean stabilization and entry times against n", Campaign::timing_scan, {}},
        {"corr", "Correlation of phase differences against distance", Campaign::correlation_probe, {}},
        {"entry", "Per-coordinate entry times into |eta| < pi/2", Campaign::entry_times, {}},
        {"energy", "Ensemble energy decay", Campaign::energy_decay, {}},
        {"euler", "Explicit Euler on differences against an RK4 reference", Campaign::euler_compare, {}},
        {"census", "Basin census and Gaussian-vs-exponential model comparison", Campaign::basin_census, {}},
    };
    for (auto& e : entries) {
        e.cmd = app.add_subcommand(e.name, e.help);
        e.cmd->set_help_flag("--help", "Print this help message and exit");
        add_campaign_flags(e.cmd, e.flags);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (simulate->parsed()) {
        if (!sim.twist && !sim.random) {
            std::cerr << "simulate: one of --twist or --random is required\n";
            return kExitUsage;
        }
        return run_simulate(sim);
    }

    auto csv = [](const char* name, auto writer) {
        return [name, writer](OutputSet& out, const auto& r) {
            out.write(name, [&](std::ostream& os) { writer(os, r); });
        };
    };

    for (auto& e : entries) {
        if (!e.cmd->parsed()) continue;
        switch (e.campaign) {
            case Campaign::q_distribution:
                return run_campaign<QDistributionResult>(
                    e.campaign, e.flags, &run_q_distribution, [&](OutputSet& out, const QDistributionResult& r) {
                        csv("qdist.csv", [](std::ostream& os, const QDistributionResult& x) { report::write_csv(os, x); })(out, r);
                        csv("qdist_summary.csv", [](std::ostream& os, const QDistributionResult& x) {
                            report::write_summary_csv(os, x);
                        })(out, r);
                    });
            case Campaign::timing_scan:
                return run_campaign<TimingScanResult>(e.campaign, e.flags, &run_timing_scan,
                                                      csv("timing.csv", [](std::ostream& os, const TimingScanResult& x) {
                                                          report::write_csv(os, x);
                                                      }));
            case Campaign::correlation_probe:
                return run_campaign<CorrelationResult>(e.campaign, e.flags, &run_correlation_probe,
                                                       csv("corr.csv", [](std::ostream& os, const CorrelationResult& x) {
                                                           report::write_csv(os, x);
                                                       }));
            case Campaign::entry_times:
                return run_campaign<EntryTimesResult>(e.campaign, e.flags, &run_entry_times,
                                                      csv("entry.csv", [](std::ostream& os, const EntryTimesResult& x) {
                                                          report::write_csv(os, x);
                                                      }));
            case Campaign::energy_decay:
                return run_campaign<EnergyDecayResult>(e.campaign, e.flags, &run_energy_decay,
                                                       csv("energy.csv", [](std::ostream& os, const EnergyDecayResult& x) {
                                                           report::write_csv(os, x);
                                                       }));
            case Campaign::euler_compare:
                return run_campaign<EulerCompareResult>(e.campaign, e.flags, &run_euler_comparison,
                                                        csv("euler.csv", [](std::ostream& os, const EulerCompareResult& x) {
                                                            report::write_csv(os, x);
                                                        }));
            case Campaign::basin_census:
                return run_campaign<BasinCensus>(e.campaign, e.flags, &run_basin_census,
                                                 [&](OutputSet& out, const BasinCensus& r) {
                                                     csv("census.csv", [](std::ostream& os, const BasinCensus& x) {
                                                         report::write_csv(os, x);
                                                     })(out, r);
                                                     csv("census_fits.csv", [](std::ostream& os, const BasinCensus& x) {
                                                         report::write_fits_csv(os, x);
                                                     })(out, r);
                                                 });
        }
    }
    return kExitUsage;
}
