#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "armst/criterion.hpp"
#include "armst/data.hpp"
#include "armst/error.hpp"
#include "armst/inference.hpp"
#include "armst/sim.hpp"
#include "armst/truth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw armst::Error(armst::ErrorCode::Io, "cannot open '" + path + "' for writing");
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    auto out = open_output(path);
    out << text;
}

armst::TimeUnit unit_flag(const std::string& text) {
    auto u = armst::parse_time_unit(text);
    if (!u) throw armst::Error(armst::ErrorCode::InvalidArgument, "--unit must be years, months or days, got '" + text + "'");
    return *u;
}

struct AnalyzeFlags {
    std::string input;
    std::string method = "ct";
    std::optional<double> lmin, lmax, c, ltilde;
    std::string unit = "years";
    std::size_t grid = 10;
    double alpha = 0.05;
    std::size_t boot = 1000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    bool conservative = false;
    bool stratified = false;
    std::string out;
    std::string profile;
};

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

int cmd_analyze(const AnalyzeFlags& f) {
    using namespace armst;
    const auto method = parse_analysis_method(f.method);
    if (!method) throw Error(ErrorCode::InvalidArgument, "--method must be ct, dt or hulc, got '" + f.method + "'");
    const auto unit = unit_flag(f.unit);
    const auto ds = load_dataset(f.input, unit);

    AnalysisConfig cfg;
    cfg.method = *method;
    cfg.L_min = f.lmin;
    cfg.L_max = f.lmax;
    cfg.grid_points = f.grid;
    cfg.alpha = f.alpha;
    cfg.c = f.c;
    cfg.l_tilde = f.ltilde;
    cfg.unit = unit;
    cfg.seed = f.seed;
    cfg.bootstrap = f.boot;
    cfg.anti_conservative = !f.conservative;
    cfg.stratified_bootstrap = f.stratified;
    cfg.workers = f.workers;
    const auto res = analyze(ds, cfg);

    if (!f.out.empty()) write_text(f.out, to_json(res).dump(2) + "\n");
    if (!f.profile.empty()) {
        const auto& r = res.config;
        std::ostringstream csv;
        if (r.method == AnalysisMethod::Dt)
            write_profile_csv(csv, maximize_discrete(ds, r.grid, r.penalty).profile);
        else
            write_profile_csv(csv, maximize_continuous(ds, r.range.L_min, r.range.L_max, r.penalty, true).profile);
        write_text(f.profile, csv.str());
    }

    auto& os = f.out == "-" ? std::cerr : std::cout;
    os << "method      " << to_string(res.method) << "\n";
    os << "n           " << ds.n() << " (treatment " << ds.n1() << ", control " << ds.n0() << ")\n";
    os << "range       [" << format_double(res.config.range.L_min) << ", " << format_double(res.config.range.L_max) << "] "
       << to_string(res.config.unit) << "\n";
    if (res.method != AnalysisMethod::Hulc)
        os << "penalty     c=" << format_double(res.config.penalty.c)
           << " L_tilde=" << format_double(res.config.penalty.l_tilde) << "\n";
    os << "L_hat       " << format_double(res.L_hat) << "\n";
    os << "kappa_hat   " << format_double(res.kappa_hat) << "\n";
    os << "CI kappa    [" << format_double(res.ci_kappa.lower) << ", " << format_double(res.ci_kappa.upper) << "] ("
       << to_string(res.ci_kappa.method) << ", level " << format_double(res.ci_kappa.level) << ")\n";
    if (res.ci_L)
        os << "CI L        [" << format_double(res.ci_L->lower) << ", " << format_double(res.ci_L->upper) << "]\n";
    os << "p_value     " << (res.p_value ? format_double(*res.p_value) : std::string("n/a")) << "\n";
    os << "reject      " << (res.reject ? "yes" : "no") << "\n";
    if (res.diagnostics.skipped > 0)
        os << "skipped     " << res.diagnostics.skipped << " of " << res.diagnostics.requested << "\n";
    return kExitOk;
}

struct SimulateFlags {
    std::vector<std::string> scenarios{"null"};
    std::vector<std::size_t> ns{600};
    std::optional<std::size_t> reps, boot;
    std::vector<std::string> methods{"ct"};
    std::size_t grid = 10;
    double lmin = 0.2, lmax = 4.2;
    std::optional<double> c_ct, c_dt, ltilde;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    double max_failures = 0.02;
    bool paper_scale = false;
    bool timing = false;
    bool quiet = false;
    std::string out = "armst_sim";
};

int cmd_simulate(const SimulateFlags& f) {
    using namespace armst;
    StudyConfig cfg;
    cfg.scenarios.clear();
    for (const auto& s : f.scenarios) {
        if (s == "all") {
            for (const auto& spec : scenarios()) cfg.scenarios.push_back(spec.name);
        } else {
            find_scenario(s);
            cfg.scenarios.push_back(s);
        }
    }
    cfg.methods.clear();
    for (const auto& m : f.methods) {
        if (m == "all") {
            cfg.methods = all_sim_methods();
            continue;
        }
        const auto parsed = parse_sim_method(m);
        if (!parsed) throw Error(ErrorCode::InvalidArgument, "unknown method '" + m + "'");
        cfg.methods.push_back(*parsed);
    }
    cfg.ns = f.ns;
    if (f.paper_scale) apply_paper_scale(cfg);
    if (f.reps) cfg.reps = *f.reps;
    if (f.boot) cfg.bootstrap = *f.boot;
    cfg.grid_points = f.grid;
    cfg.L_min = f.lmin;
    cfg.L_max = f.lmax;
    cfg.c_ct = f.c_ct;
    cfg.c_dt = f.c_dt;
    cfg.l_tilde = f.ltilde;
    cfg.alpha = f.alpha;
    cfg.seed = f.seed;
    cfg.workers = f.workers;
    cfg.timing = f.timing;
    cfg.max_failure_fraction = f.max_failures;

    ProgressFn progress;
    if (!f.quiet) progress = [](const std::string& msg) { std::cerr << msg << std::endl; };
    const auto report = run_study(cfg, progress);

    write_text(f.out + ".json", to_json(report).dump(2) + "\n");
    std::ostringstream csv;
    write_report_csv(csv, report);
    write_text(f.out + ".csv", csv.str());
    if (!f.quiet) std::cerr << "wrote " << f.out << ".json and " << f.out << ".csv" << std::endl;
    return kExitOk;
}

struct TruthFlags {
    std::string scenario;
    std::size_t points = 200;
    double c = 0;
    double ltilde = 2.2;
    std::string out = "-";
};

int cmd_truth(const TruthFlags& f) {
    using namespace armst;
    const auto& s = find_scenario(f.scenario);
    if (f.points < 2) throw Error(ErrorCode::InvalidArgument, "--points must be at least 2");
    std::ostringstream csv;
    write_truth_curves(csv, s, f.points, PenaltyConfig{f.c, f.ltilde});
    write_text(f.out, csv.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive restricted mean survival time analysis"};
    app.require_subcommand(1);

    AnalyzeFlags af;
    auto* analyze = app.add_subcommand("analyze", "Analyze a trial CSV with columns arm,time,event");
    analyze->add_option("--input", af.input, "Input CSV")->required();
    analyze->add_option("--method", af.method, "ct, dt or hulc")->capture_default_str();
    analyze->add_option("--lmin", af.lmin, "Smallest candidate restriction time (default: 5th percentile of times)");
    analyze->add_option("--lmax", af.lmax, "Largest candidate restriction time (default: largest estimable)");
    analyze->add_option("--unit", af.unit, "Time unit of the data: years, months or days")->capture_default_str();
    analyze->add_option("--grid", af.grid, "Number of grid points (dt)")->capture_default_str();
    analyze->add_option("--c", af.c, "Penalty coefficient (default: unit-aware automatic value)");
    analyze->add_option("--ltilde", af.ltilde, "Penalty target restriction time");
    analyze->add_option("--alpha", af.alpha, "Significance level")->capture_default_str();
    analyze->add_option("--boot", af.boot, "Bootstrap resamples (ct)")->capture_default_str();
    analyze->add_option("--seed", af.seed, "Random seed")->required();
    analyze->add_option("--workers", af.workers, "Worker threads")->capture_default_str();
    analyze->add_flag("--conservative", af.conservative, "Conservative HulC fold count");
    analyze->add_flag("--stratified", af.stratified, "Resample within arms (ct)");
    analyze->add_option("--out", af.out, "Write the result JSON here ('-' for standard output)");
    analyze->add_option("--profile", af.profile, "Write the criterion profile CSV here");

    SimulateFlags sf;
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo study");
    simulate->add_option("--scenario", sf.scenarios, "Scenario names, comma separated, or 'all'")->delimiter(',');
    simulate->add_option("--n", sf.ns, "Sample sizes, comma separated")->delimiter(',');
    simulate->add_option("--reps", sf.reps, "Replicates per cell (default 500)");
    simulate->add_option("--methods", sf.methods, "ct,dt,hulc,rmst,logrank,maxcombo,oracle or 'all'")->delimiter(',');
    simulate->add_option("--boot", sf.boot, "Bootstrap resamples for ct (default 200)");
    simulate->add_option("--grid", sf.grid, "Grid points for dt")->capture_default_str();
    simulate->add_option("--lmin", sf.lmin, "Smallest candidate restriction time")->capture_default_str();
    simulate->add_option("--lmax", sf.lmax, "Largest candidate restriction time")->capture_default_str();
    simulate->add_option("--c-ct", sf.c_ct, "Penalty coefficient for ct");
    simulate->add_option("--c-dt", sf.c_dt, "Penalty coefficient for dt");
    simulate->add_option("--ltilde", sf.ltilde, "Penalty target for ct (default: range midpoint)");
    simulate->add_option("--alpha", sf.alpha, "Significance level")->capture_default_str();
    simulate->add_option("--seed", sf.seed, "Master seed")->required();
    simulate->add_option("--workers", sf.workers, "Worker threads")->capture_default_str();
    simulate->add_option("--max-failures", sf.max_failures, "Largest tolerated fraction of failed replicates per cell")
        ->capture_default_str();
    simulate->add_flag("--paper-scale", sf.paper_scale, "2000 replicates and 1000 bootstrap resamples");
    simulate->add_flag("--timing", sf.timing, "Report mean runtime per method (output no longer reproducible)");
    simulate->add_flag("--quiet", sf.quiet, "No progress messages");
    simulate->add_option("--out", sf.out, "Output prefix for .json and .csv")->capture_default_str();

    TruthFlags tf;
    auto* truth = app.add_subcommand("truth", "Emit true survival, hazard, effect and criterion curves");
    truth->add_option("--scenario", tf.scenario, "Scenario name")->required();
    truth->add_option("--points", tf.points, "Grid points on [0.01, 4.2]")->capture_default_str();
    truth->add_option("--c", tf.c, "Penalty coefficient for the M_pen column")->capture_default_str();
    truth->add_option("--ltilde", tf.ltilde, "Penalty target")->capture_default_str();
    truth->add_option("--out", tf.out, "Output CSV ('-' for standard output)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitData;
    }

    try {
        if (*analyze) return cmd_analyze(af);
        if (*simulate) return cmd_simulate(sf);
        if (*truth) return cmd_truth(tf);
    } catch (const armst::Error& e) {
        std::cerr << "error: " << e.what();
        if (e.line()) std::cerr << " (line " << *e.line() << ")";
        std::cerr << "\n";
        return armst::is_data_error(e.code()) ? kExitData : kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitData;
}
