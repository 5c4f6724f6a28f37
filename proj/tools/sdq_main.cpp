// sdq: analyze a multiclass single-server queue whose arrival rates depend on
// the class in service. Subcommands: validate, stability, fluid, lst,
// branching, simulate, tail. Every run writes its outputs plus a manifest
// under --output-dir; identical manifests produce byte-identical outputs.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdq/sdq.hpp"

namespace {

using sdq::json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::string token;
    std::istringstream in(csv);
    while (std::getline(in, token, ',')) {
        if (token.empty()) continue;
        out.push_back(std::stod(token));
    }
    return out;
}

std::vector<int> parse_classes(const std::string& csv, int k, const char* what) {
    std::vector<int> out;
    for (double v : parse_doubles(csv)) {
        int c = static_cast<int>(v);
        if (c < 1 || c > k)
            throw std::invalid_argument(std::string(what) + ": class index out of range: " +
                                        std::to_string(c));
        out.push_back(c - 1);
    }
    return out;
}

struct RunContext {
    std::string output_dir = ".";
    std::string format = "json";
    std::string model_path;
    json flags = json::object();
    std::vector<std::string> outputs;

    std::filesystem::path path_for(const std::string& name) const {
        return std::filesystem::path(output_dir) / name;
    }

    void write_file(const std::string& name, const std::string& content) {
        std::filesystem::create_directories(output_dir);
        std::ofstream out(path_for(name), std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write output file " + name);
        out << content;
        outputs.push_back(name);
    }

    void write_json(const std::string& name, const json& j) {
        write_file(name, j.dump(2) + "\n");
    }

    void finish(const std::string& subcommand, const json& summary,
                const std::optional<std::string>& csv = std::nullopt) {
        json manifest;
        manifest["artifactVersion"] = sdq::kVersion;
        manifest["subcommand"] = subcommand;
        manifest["model"] = {{"path", model_path}, {"digest", sdq::file_digest(model_path)}};
        manifest["flags"] = flags;
        manifest["seed"] = flags.contains("seed") ? flags["seed"] : json(nullptr);
        manifest["outputs"] = outputs;
        std::filesystem::create_directories(output_dir);
        std::ofstream out(path_for(subcommand + "_manifest.json"), std::ios::binary | std::ios::trunc);
        out << manifest.dump(2) + "\n";
        if (format == "csv" && csv)
            std::cout << *csv;
        else
            std::cout << summary.dump(2) << "\n";
    }
};

json vec_json(const sdq::Vec& v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

json mat_json(const sdq::Mat& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

int cmd_validate(RunContext& ctx) {
    sdq::ModelSpec spec = sdq::load_model(ctx.model_path);
    sdq::ValidationResult res = sdq::validate(spec);
    json out;
    out["ok"] = res.ok();
    json v = json::array();
    for (const auto& viol : res.violations)
        v.push_back({{"field", viol.field}, {"message", viol.message}, {"structural", viol.structural}});
    out["violations"] = v;
    ctx.write_json("validate.json", out);
    ctx.finish("validate", out);
    return res.ok() ? 0 : 1;
}

int cmd_stability(RunContext& ctx, double epsilon) {
    sdq::ModelSpec spec = sdq::load_model(ctx.model_path);
    sdq::StabilityReport rep = sdq::classify(spec, epsilon);
    json out;
    out["rho"] = rep.rho;
    out["verdict"] = sdq::to_string(rep.verdict);
    out["epsilon"] = rep.epsilon;
    out["rowsAllPositive"] = rep.rows_all_positive;
    out["irreducible"] = rep.irreducible;
    switch (rep.verdict) {
        case sdq::Verdict::Stable:
            out["backedBy"] = "global fluid stability (rho < 1)";
            break;
        case sdq::Verdict::Unstable:
            out["backedBy"] = rep.rows_all_positive
                                  ? "weak fluid instability (rho > 1, every row positive)"
                                  : "rho > 1; weak-instability row hypothesis fails";
            break;
        case sdq::Verdict::Boundary:
            out["backedBy"] = rep.irreducible
                                  ? "weak fluid stability at the boundary (irreducible, rho = 1)"
                                  : "rho = 1; boundary result needs irreducibility";
            break;
    }
    out["drainCoefficients"] =
        rep.drain_coefficients ? vec_json(*rep.drain_coefficients) : json(nullptr);
    ctx.write_json("stability.json", out);
    ctx.finish("stability", out);
    return 0;
}

int cmd_fluid(RunContext& ctx, const std::string& q0_csv, const std::string& policy_name,
              const std::string& priority_csv, double horizon) {
    sdq::ModelSpec spec = sdq::load_model(ctx.model_path);
    sdq::Vec q0 = parse_doubles(q0_csv);
    sdq::FluidPolicy policy;
    if (policy_name == "turn") {
        policy = sdq::FluidPolicy::serve_in_turn();
    } else if (policy_name == "priority") {
        std::vector<int> order;
        if (priority_csv.empty())
            for (int i = 0; i < spec.k; ++i) order.push_back(i);
        else
            order = parse_classes(priority_csv, spec.k, "--priority");
        policy = sdq::FluidPolicy::static_priority(order);
    } else {
        throw std::invalid_argument("--policy must be 'priority' or 'turn'");
    }
    sdq::FluidTrajectory traj = sdq::integrate(spec, q0, policy, horizon);
    double rho = sdq::offspring_matrix(spec).rho;

    std::string csv = "t";
    for (int i = 0; i < spec.k; ++i) csv += ",Q_" + std::to_string(i + 1);
    csv += ",Y\n";
    for (const auto& bp : traj.breakpoints) {
        csv += fmt(bp.t);
        for (int i = 0; i < spec.k; ++i) csv += "," + fmt(bp.q[i]);
        csv += "," + fmt(bp.y) + "\n";
    }
    ctx.write_file("fluid.csv", csv);

    json out;
    out["rho"] = rho;
    out["policy"] = traj.policy_name;
    out["horizon"] = horizon;
    out["breakpoints"] = traj.breakpoints.size();
    out["drainTime"] = traj.drain_time ? json(*traj.drain_time) : json(nullptr);
    out["lyapunovDrainTime"] =
        rho < 1.0 ? json(sdq::lyapunov_drain_time(spec, q0)) : json(nullptr);
    ctx.write_json("fluid.json", out);
    ctx.finish("fluid", out, csv);
    return 0;
}

int cmd_lst(RunContext& ctx, double theta_min, double theta_max, int points, double tol) {
    sdq::ModelSpec spec = sdq::load_model(ctx.model_path);
    sdq::LstOptions opts;
    opts.tol = tol;
    sdq::LstGrid grid = sdq::solve_fixed_point(spec, sdq::geometric_grid(theta_min, theta_max, points), opts);

    std::string csv = "theta";
    for (int i = 0; i < spec.k; ++i) csv += ",g_" + std::to_string(i + 1);
    csv += ",residual\n";
    for (std::size_t p = 0; p < grid.thetas.size(); ++p) {
        csv += fmt(grid.thetas[p]);
        for (int i = 0; i < spec.k; ++i) csv += "," + fmt(grid.g(i, p));
        csv += "," + fmt(grid.residual[p]) + "\n";
    }
    ctx.write_file("lst.csv", csv);

    double rho = sdq::offspring_matrix(spec).rho;
    json out;
    out["rho"] = rho;
    out["thetaMin"] = theta_min;
    out["thetaMax"] = theta_max;
    out["points"] = points;
    out["tol"] = grid.tol;
    long long max_iter = 0;
    double max_resid = 0.0;
    for (std::size_t p = 0; p < grid.thetas.size(); ++p) {
        max_iter = std::max(max_iter, grid.iterations[p]);
        max_resid = std::max(max_resid, grid.residual[p]);
    }
    out["maxIterations"] = max_iter;
    out["maxResidual"] = max_resid;
    if (rho < 1.0) {
        sdq::MomentEstimate mom = sdq::moments_from_lst(spec, opts);
        out["meanBusyFromLst"] = vec_json(mom.mean_busy);
        out["meanBusyErrorEstimate"] = vec_json(mom.error_estimate);
        out["meanBusyClosedForm"] = vec_json(sdq::expectations(spec).mean_busy);
    } else {
        out["meanBusyFromLst"] = nullptr;
        out["meanBusyErrorEstimate"] = nullptr;
        out["meanBusyClosedForm"] = nullptr;
    }
    ctx.write_json("lst.json", out);
    ctx.finish("lst", out, csv);
    return 0;
}

int cmd_branching(RunContext& ctx, int cls_1based, long long reps, std::uint64_t seed,
                  long long cap_gen, long long cap_ind) {
    sdq::ModelSpec spec = sdq::load_model(ctx.model_path);
    if (cls_1based < 0 || cls_1based > spec.k)
        throw std::invalid_argument("--class out of range");
    int only = cls_1based  - 1; // -1 = all classes
    sdq::TreeCaps caps{cap_gen, cap_ind};
    sdq::ExtinctionStats st = sdq::extinction_stats(spec, reps, caps, seed, only);

    auto masked = [&](const sdq::Vec& v) {
        json a = json::array();
        for (int i = 0; i < spec.k; ++i)
            a.push_back(only >= 0 && i != only ? json(nullptr) : json(v[i]));
        return a;
    };
    json out;
    out["rho"] = st.rho;
    out["replications"] = st.replications;
    out["seed"] = seed;
    out["extinctFraction"] = masked(st.extinct_fraction);
    out["extinctFractionSE"] = masked(st.extinct_fraction_se);
    out["meanDepth"] = masked(st.mean_depth);
    out["meanBusyMonteCarlo"] = masked(st.mean_total_lifetime);
    out["meanBusyMonteCarloSE"] = masked(st.total_lifetime_se);
    json cens = json::array();
    for (int i = 0; i < spec.k; ++i)
        cens.push_back(only >= 0 && i != only ? json(nullptr) : json(st.censored[i]));
    out["censored"] = cens;
    out["consistentWithRho"] = st.consistent_with_rho;
    if (st.rho < 1.0) {
        sdq::ExpectationTable exp = sdq::expectations(spec);
        out["meanBusyClosedForm"] = vec_json(exp.mean_busy);
        out["tau"] = mat_json(exp.tau);
        out["beta"] = vec_json(exp.beta);
        bool has_pareto = false;
        for (const auto& s : spec.service) has_pareto = has_pareto || s.kind() == sdq::ServiceKind::Pareto;
        if (has_pareto) {
            sdq::TailReference ref = sdq::reference_tail(spec);
            sdq::TailConstants tc = sdq::tail_constants(spec, ref.alpha, ref.c_tilde);
            out["d"] = vec_json(tc.d);
            out["tail"] = {{"alpha", tc.alpha},
                           {"cTilde", vec_json(tc.c_tilde)},
                           {"c", vec_json(tc.c)},
                           {"d", vec_json(tc.d)}};
        } else {
            out["d"] = nullptr;
            out["tail"] = nullptr;
        }
    } else {
        out["meanBusyClosedForm"] = nullptr;
        out["tau"] = nullptr;
        out["beta"] = nullptr;
        out["d"] = nullptr;
        out["tail"] = nullptr;
    }
    ctx.write_json("branching.json", out);
    ctx.finish("branching", out);
    return 0;
}

int cmd_simulate(RunContext& ctx, const std::string& policy_name, const std::string& priority_csv,
                 long long busy_periods, double horizon, std::uint64_t seed,
                 const std::string& trace, int initiator_1based, double warmup,
                 double sample_every) {
    sdq::ModelSpec spec = sdq::load_model(ctx.model_path);
    sdq::SimPolicy policy;
    if (policy_name == "fifo")
        policy = sdq::SimPolicy::FifoHeadOfLine;
    else if (policy_name == "priority-np")
        policy = sdq::SimPolicy::StaticPriorityNonPreemptive;
    else if (policy_name == "priority-pr")
        policy = sdq::SimPolicy::StaticPriorityPreemptiveResume;
    else
        throw std::invalid_argument("--policy must be fifo, priority-np, or priority-pr");
    std::vector<int> priority;
    if (!priority_csv.empty()) priority = parse_classes(priority_csv, spec.k, "--priority");

    double rho = sdq::offspring_matrix(spec).rho;
    std::optional<sdq::ExpectationTable> oracle;
    if (rho < 1.0) oracle = sdq::expectations(spec);

    json out;
    out["rho"] = rho;
    out["policy"] = policy_name;
    out["seed"] = seed;
    if (busy_periods > 0) {
        // forced-initiator busy-period sampling, one block per requested class
        std::vector<int> initiators;
        if (initiator_1based > 0)
            initiators.push_back(initiator_1based - 1);
        else
            for (int i = 0; i < spec.k; ++i) initiators.push_back(i);
        json blocks = json::array();
        for (int cls : initiators) {
            auto samples = sdq::sample_busy_periods(spec, cls, busy_periods, seed, policy, priority);
            double sum = 0.0, sum2 = 0.0, sigma_sum = 0.0, sigma_sum2 = 0.0;
            for (const auto& b : samples) {
                sum += b.length;
                sum2 += b.length * b.length;
                long long served = 0;
                for (long long c : b.customers_served) served += c;
                sigma_sum += static_cast<double>(served);
                sigma_sum2 += static_cast<double>(served) * static_cast<double>(served);
            }
            double n = static_cast<double>(samples.size());
            double mean = sum / n;
            double se = std::sqrt(std::max(sum2 / n - mean * mean, 0.0) / n);
            double sigma_mean = sigma_sum / n;
            double sigma_se = std::sqrt(std::max(sigma_sum2 / n - sigma_mean * sigma_mean, 0.0) / n);
            json b;
            b["initiator"] = cls + 1;
            b["replications"] = samples.size();
            b["meanBusy"] = mean;
            b["meanBusySE"] = se;
            b["meanCustomers"] = sigma_mean;
            b["meanCustomersSE"] = sigma_se;
            if (oracle) {
                double expect = oracle->mean_busy[cls];
                b["meanBusyClosedForm"] = expect;
                b["meanBusyDeviationInSE"] = se > 0.0 ? (mean - expect) / se : 0.0;
            } else {
                b["meanBusyClosedForm"] = nullptr;
                b["meanBusyDeviationInSE"] = nullptr;
            }
            blocks.push_back(b);
        }
        out["mode"] = "busy-periods";
        out["busyPeriods"] = blocks;
    } else {
        sdq::SimConfig cfg;
        cfg.spec = spec;
        cfg.policy = policy;
        cfg.priority = priority;
        cfg.horizon = horizon;
        cfg.seed = seed;
        cfg.warmup = warmup;
        cfg.sample_every = sample_every;
        if (!trace.empty()) {
            cfg.trace_path = (std::filesystem::path(ctx.output_dir) / trace).string();
            std::filesystem::create_directories(ctx.output_dir);
        }
        sdq::SimResult res = sdq::run(cfg);
        out["mode"] = "horizon";
        out["horizon"] = horizon;
        out["tEnd"] = res.summary.t_end;
        out["events"] = res.summary.events;
        out["partial"] = res.summary.partial;
        out["timeAvgWorkload"] = res.summary.time_avg_workload;
        out["timeAvgQueue"] = vec_json(res.summary.time_avg_q);
        out["idleFraction"] = res.summary.idle_fraction;
        out["arrivals"] = res.summary.arrivals;
        out["departures"] = res.summary.departures;
        out["qFinal"] = res.summary.q_final;
        out["busyPeriodsObserved"] = res.busy_periods.size();
        double sum = 0.0;
        for (const auto& b : res.busy_periods) sum += b.length;
        out["meanBusyObserved"] =
            res.busy_periods.empty() ? json(nullptr)
                                     : json(sum / static_cast<double>(res.busy_periods.size()));
        if (!trace.empty()) ctx.outputs.push_back(trace);
        if (sample_every > 0.0) {
            std::string csv = "t";
            for (int i = 0; i < spec.k; ++i) csv += ",Q_" + std::to_string(i + 1);
            csv += ",W,Y\n";
            for (const auto& pt : res.summary.series) {
                csv += fmt(pt.t);
                for (long long q : pt.q) csv += "," + std::to_string(q);
                csv += "," + fmt(pt.workload) + "," + fmt(pt.idle) + "\n";
            }
            ctx.write_file("simulate_series.csv", csv);
        }
    }
    ctx.write_json("simulate.json", out);
    ctx.finish("simulate", out);
    return 0;
}

int cmd_tail(RunContext& ctx, int cls_1based, long long reps, std::uint64_t seed,
             const std::string& quantiles_csv, const std::string& xs_csv) {
    sdq::ModelSpec spec = sdq::load_model(ctx.model_path);
    if (cls_1based < 1 || cls_1based > spec.k) throw std::invalid_argument("--class out of range");
    int cls = cls_1based - 1;
    sdq::Vec lengths = sdq::sample_busy_period_lengths(spec, cls, reps, seed);
    sdq::Vec xs;
    if (!xs_csv.empty()) {
        xs = parse_doubles(xs_csv);
    } else {
        sdq::Vec qs = parse_doubles(quantiles_csv);
        sdq::Vec sorted = lengths;
        std::sort(sorted.begin(), sorted.end());
        for (double q : qs) {
            if (!(q > 0.0) || !(q < 1.0))
                throw std::invalid_argument("--quantiles must lie strictly between 0 and 1");
            std::size_t idx = static_cast<std::size_t>(q * (sorted.size() - 1));
            xs.push_back(sorted[idx]);
        }
    }
    sdq::TailRatioReport rep = sdq::tail_ratio_report(spec, cls, lengths, xs);
    json out;
    out["class"] = cls_1based;
    out["replications"] = rep.replications;
    out["seed"] = seed;
    out["alpha"] = rep.alpha;
    out["d"] = rep.d;
    json pts = json::array();
    for (const auto& p : rep.points) {
        pts.push_back({{"x", p.x},
                       {"exceedances", p.exceedances},
                       {"pHat", p.p_hat},
                       {"ratio", p.ratio},
                       {"ratioLo", p.ratio_lo},
                       {"ratioHi", p.ratio_hi},
                       {"containsD", p.contains_d},
                       {"oneSided", p.one_sided}});
    }
    out["points"] = pts;
    ctx.write_json("tail.json", out);
    ctx.finish("tail", out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"analysis toolkit for multiclass queues with in-service-dependent arrival rates"};
    app.require_subcommand(1);

    RunContext ctx;
    app.add_option("--output-dir", ctx.output_dir, "directory for output files")
        ->capture_default_str();
    app.add_option("--format", ctx.format, "stdout format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    auto add_model = [&](CLI::App* sub) {
        sub->add_option("model", ctx.model_path, "model file (JSON)")->required();
    };

    auto* validate = app.add_subcommand("validate", "check a model file");
    add_model(validate);

    auto* stability = app.add_subcommand("stability", "spectral radius and verdict");
    add_model(stability);
    double epsilon = 1e-9;
    stability->add_option("--epsilon", epsilon, "boundary classification tolerance")
        ->capture_default_str();

    auto* fluid = app.add_subcommand("fluid", "piecewise-linear fluid trajectory");
    add_model(fluid);
    std::string q0_csv;
    std::string fluid_policy = "priority";
    std::string fluid_priority;
    double horizon = 100.0;
    fluid->add_option("--q0", q0_csv, "initial fluid levels, comma separated")->required();
    fluid->add_option("--policy", fluid_policy, "priority or turn")->capture_default_str();
    fluid->add_option("--priority", fluid_priority, "class order for the priority policy (1-based)");
    fluid->add_option("--horizon", horizon, "integration horizon")->capture_default_str();

    auto* lst = app.add_subcommand("lst", "busy-period transform fixed point");
    add_model(lst);
    double theta_min = 1e-3, theta_max = 1e2, lst_tol = 1e-12;
    int points = 64;
    lst->add_option("--theta-min", theta_min)->capture_default_str();
    lst->add_option("--theta-max", theta_max)->capture_default_str();
    lst->add_option("--points", points)->capture_default_str();
    lst->add_option("--tol", lst_tol)->capture_default_str();

    auto* branching = app.add_subcommand("branching", "branching-tree Monte Carlo and expectations");
    add_model(branching);
    int br_class = 0;
    long long br_reps = 10000, cap_gen = 10000, cap_ind = 10000000;
    std::uint64_t br_seed = 0;
    branching->add_option("--class", br_class, "ancestor class (1-based; 0 = all)")
        ->capture_default_str();
    branching->add_option("--reps", br_reps, "tree replications per class")->capture_default_str();
    branching->add_option("--seed", br_seed, "RNG seed")->required();
    branching->add_option("--cap-gen", cap_gen, "generation cap")->capture_default_str();
    branching->add_option("--cap-ind", cap_ind, "individual cap")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "event-driven queue simulation");
    add_model(simulate);
    std::string sim_policy = "fifo", sim_priority, trace;
    long long busy_periods = 0;
    double sim_horizon = 0.0, warmup = 0.0, sample_every = 0.0;
    std::uint64_t sim_seed = 0;
    int initiator = 0;
    simulate->add_option("--policy", sim_policy, "fifo, priority-np, or priority-pr")
        ->capture_default_str();
    simulate->add_option("--priority", sim_priority, "class order for priority policies (1-based)");
    simulate->add_option("--busy-periods", busy_periods,
                         "forced-initiator busy periods per class (busy-period mode)");
    simulate->add_option("--horizon", sim_horizon, "time horizon (horizon mode)");
    simulate->add_option("--seed", sim_seed, "RNG seed")->required();
    simulate->add_option("--trace", trace, "event-log file name (written in --output-dir)");
    simulate->add_option("--initiator", initiator, "initiator class in busy-period mode (0 = all)")
        ->capture_default_str();
    simulate->add_option("--warmup", warmup, "statistics warmup time")->capture_default_str();
    simulate->add_option("--sample-every", sample_every, "trace series sampling interval")
        ->capture_default_str();

    auto* tail = app.add_subcommand("tail", "empirical busy-period tail ratio vs d_i");
    add_model(tail);
    int tail_class = 1;
    long long tail_reps = 100000;
    std::uint64_t tail_seed = 0;
    std::string quantiles = "0.5,0.9,0.99,0.999,0.9999", xs_csv;
    tail->add_option("--class", tail_class, "initiator class (1-based)")->required();
    tail->add_option("--reps", tail_reps, "busy-period replications")->capture_default_str();
    tail->add_option("--seed", tail_seed, "RNG seed")->required();
    tail->add_option("--quantiles", quantiles, "probe at these empirical quantiles")
        ->capture_default_str();
    tail->add_option("--x", xs_csv, "probe at explicit x values instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::ostringstream usage;
        app.exit(e, usage, usage);
        std::cerr << usage.str();
        return 64;
    }

    auto record_flags = [&](CLI::App* sub) {
        for (const CLI::Option* opt : sub->get_options()) {
            if (opt->get_name() == "--help") continue;
            if (!opt->get_lnames().empty() || opt->get_positional()) {
                std::string name = opt->get_positional() ? opt->get_name() : opt->get_lnames()[0];
                std::vector<std::string> vals = opt->results();
                if (vals.empty() && !opt->get_default_str().empty())
                    vals.push_back(opt->get_default_str());
                if (vals.size() == 1)
                    ctx.flags[name] = vals[0];
                else if (!vals.empty())
                    ctx.flags[name] = vals;
            }
        }
        ctx.flags["output-dir"] = ctx.output_dir;
        ctx.flags["format"] = ctx.format;
    };

    try {
        if (validate->parsed()) {
            record_flags(validate);
            return cmd_validate(ctx);
        }
        if (stability->parsed()) {
            record_flags(stability);
            return cmd_stability(ctx, epsilon);
        }
        if (fluid->parsed()) {
            record_flags(fluid);
            return cmd_fluid(ctx, q0_csv, fluid_policy, fluid_priority, horizon);
        }
        if (lst->parsed()) {
            record_flags(lst);
            return cmd_lst(ctx, theta_min, theta_max, points, lst_tol);
        }
        if (branching->parsed()) {
            record_flags(branching);
            return cmd_branching(ctx, br_class, br_reps, br_seed, cap_gen, cap_ind);
        }
        if (simulate->parsed()) {
            record_flags(simulate);
            return cmd_simulate(ctx, sim_policy, sim_priority, busy_periods, sim_horizon, sim_seed,
                                trace, initiator, warmup, sample_every);
        }
        if (tail->parsed()) {
            record_flags(tail);
            return cmd_tail(ctx, tail_class, tail_reps, tail_seed, quantiles, xs_csv);
        }
    } catch (const sdq::ModelParseError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
