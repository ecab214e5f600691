// invlab: solve, simulate, and stress-check the delayed-delivery inventory
// model from a single experiment configuration.
//
// Subcommands
//   solve     backward induction; persists the policy/value tables and the
//             policy structure report
//   simulate  seeded Monte Carlo cost samples (and retained trajectories)
//   diagnose  full diagnostics: martingale decomposition, contraction
//             coefficients, concentration tails, dominance comparisons
//   clt       horizon sweep with variance fit, normality distances, plot data
//   compare   stochastic-order comparison of the optimal policy vs alternatives
//   report    one aggregated summary document
//
// Exit codes: 0 success, 1 configuration/validation failure, 2 one of the
// mathematical acceptance checks reported FAIL, 3 internal error.

#include <cinttypes>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "invlab/invlab.hpp"

using nlohmann::json;
using namespace invlab;

namespace {

struct RunContext {
    ExperimentConfig cfg;
    unsigned workers = 1;
    std::string out_dir;
};

json to_json(const StructureReport& r) {
    json j;
    j["levels_monotone"] = r.levels_monotone;
    j["monotone_tolerance"] = r.monotone_tolerance;
    j["empirical_passive_k"] = r.empirical_passive_k;
    j["predicted_passive_k_zero_based"] = r.predicted_passive_k_zero_based;
    j["predicted_passive_k_one_based"] = r.predicted_passive_k_one_based;
    j["passive_match_zero_based"] = r.passive_match_zero_based;
    j["passive_match_one_based"] = r.passive_match_one_based;
    j["backlog_slope"] = {{"slope", r.slope},
                          {"max_residual", r.slope_max_residual},
                          {"tolerance", r.slope_tolerance},
                          {"pass", r.slope_identity_pass}};
    j["level_bounds"] = {{"lower", r.level_lower_bound},
                         {"upper", r.level_upper_bound},
                         {"checked_from_k", r.bounds_checked_from_k},
                         {"principal_min_level", r.principal_min_level},
                         {"principal_max_level", r.principal_max_level},
                         {"pass", r.level_bounds_pass},
                         {"all_active_min_level", r.all_active_min_level},
                         {"all_active_max_level", r.all_active_max_level}};
    return j;
}

json to_json(const VarianceFit& f) {
    return json{{"slope", f.slope},       {"intercept", f.intercept},
                {"r2", f.r2},             {"beta_hat", f.beta_hat},
                {"pass", f.pass},         {"horizons", f.horizons},
                {"variances", f.variances}};
}

json to_json(const HoeffdingTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"lambda", r.lambda},
                        {"empirical", r.empirical},
                        {"bound", r.bound},
                        {"slack", r.slack},
                        {"pass", r.pass}});
    return rows;
}

json to_json(const DominanceReport& r, const std::string& against) {
    return json{{"against", against},
                {"violation", r.violation},
                {"location", r.location},
                {"eps_a", r.eps_a},
                {"eps_b", r.eps_b},
                {"verdict", to_string(r.verdict)}};
}

PolicySpec make_compare_policy(const ComparePolicy& cp, const ModelParams& p,
                               const DemandModel& d) {
    if (cp.kind == "never_order") return PolicySpec::never_order();
    if (cp.kind == "fixed_base_stock") return PolicySpec::fixed_base_stock(cp.level);
    return PolicySpec::myopic(p, d);
}

std::string compare_label(const ComparePolicy& cp) {
    if (cp.kind == "fixed_base_stock")
        return cp.kind + "(" + format_double(cp.level) + ")";
    return cp.kind;
}

ModelParams params_for(const RunContext& ctx, int horizon) {
    ModelParams p = ctx.cfg.params;
    p.n = horizon;
    return p;
}

bool wants(const RunContext& ctx, const std::string& fmt) {
    for (const auto& f : ctx.cfg.formats)
        if (f == fmt) return true;
    return false;
}

// ---- subcommand bodies; each returns the process exit code ----

int cmd_solve(const RunContext& ctx) {
    const int n = ctx.cfg.horizons.front();
    const ModelParams p = params_for(ctx, n);
    const DemandModel demand = make_demand(ctx.cfg.demand);
    const SolveResult solved = solve(p, demand, ctx.cfg.grid_step);
    const StructureReport rep = structure_report(solved.policy, solved.values, p, demand);

    OutputWriter out(ctx.out_dir);
    {
        std::ostringstream os;
        save_policy(os, p, ctx.cfg.demand, solved);
        out.write("policy.txt", os.str());
    }
    if (wants(ctx, "json")) {
        json j = to_json(rep);
        j["schema_version"] = 1;
        j["n"] = n;
        j["n0"] = solved.policy.n0;
        j["expected_cost"] = solved.expected_cost;
        j["underflow_clamps"] = solved.underflow_clamps;
        out.write("structure_report.json", j.dump(2) + "\n");
    }
    out.finish();
    std::cout << "solve: n=" << n << " expected_cost=" << format_double(solved.expected_cost)
              << " structure_checks=" << (rep.gate_pass() ? "PASS" : "FAIL") << "\n";
    return rep.gate_pass() ? 0 : 2;
}

int cmd_simulate(const RunContext& ctx) {
    const int n = ctx.cfg.horizons.front();
    const ModelParams p = params_for(ctx, n);
    const DemandModel demand = make_demand(ctx.cfg.demand);
    const SolveResult solved = solve(p, demand, ctx.cfg.grid_step);
    const PolicySpec policy = PolicySpec::optimal(solved.policy);
    const BatchResult batch =
        simulate_batch(policy, p, demand, ctx.cfg.replications, ctx.cfg.master_seed,
                       ctx.workers, ctx.cfg.retained_trajectories);

    OutputWriter out(ctx.out_dir);
    if (wants(ctx, "csv")) {
        out.write("costs_n" + std::to_string(n) + ".csv", costs_csv(batch.costs));
        for (std::size_t r = 0; r < batch.retained.size(); ++r)
            out.write("trajectory_r" + std::to_string(r) + ".csv",
                      trajectory_csv(batch.retained[r]));
    }
    out.finish();
    std::cout << "simulate: n=" << n << " R=" << ctx.cfg.replications
              << " mean=" << format_double(batch.summary.mean)
              << " var=" << format_double(batch.summary.variance) << "\n";
    return 0;
}

struct DiagnosticsBundle {
    json report;
    bool gate_pass = true;
    std::vector<double> standardized;
    std::optional<VarianceFit> vfit;
};

DiagnosticsBundle run_diagnostics(const RunContext& ctx) {
    DiagnosticsBundle bundle;
    const int n = ctx.cfg.horizons.front();
    const ModelParams p = params_for(ctx, n);
    const DemandModel demand = make_demand(ctx.cfg.demand);
    const SolveResult solved = solve(p, demand, ctx.cfg.grid_step);
    const PolicySpec policy = PolicySpec::optimal(solved.policy);

    json& j = bundle.report;
    j["schema_version"] = 1;
    j["n"] = n;
    j["expected_cost"] = solved.expected_cost;

    // soft unimodality over a standard shift ladder
    std::vector<double> eps_list;
    for (int i = 0; i <= 8; ++i) eps_list.push_back(demand.J * i / 8.0);
    const auto uni = check_soft_unimodality(demand, eps_list);
    {
        json per = json::array();
        for (const auto& e : uni.per_eps)
            per.push_back({{"eps", e.eps}, {"pass", e.pass}, {"w_hat", e.w_hat}});
        j["unimodality"] = {{"overall", uni.overall}, {"per_eps", per}};
        bundle.gate_pass = bundle.gate_pass && uni.overall;
    }

    // contraction coefficients
    const double kappa = kappa_bound(p, solved.policy.n0);
    j["kappa"] = kappa;
    j["alpha_lower"] = 1.0 - kappa;
    {
        json deltas = json::array();
        for (int period = 1; period <= n; ++period) {
            const auto& row = solved.policy.by_remaining(n - period + 1);
            if (!row.active) continue;
            if (!uni.overall) break;  // delta estimates need the shift formula
            const DeltaEstimate est = dobrushin_delta(solved.policy, demand, period, n);
            deltas.push_back({{"period", est.period},
                              {"k", est.remaining},
                              {"eps_max", est.eps_max},
                              {"delta", est.delta}});
        }
        j["delta_by_period"] = deltas;
        // enlarged-space check at the active period nearest mid-horizon
        int probe = 0;
        for (int period = n / 2; period >= 1 && probe == 0; --period)
            if (solved.policy.by_remaining(n - period + 1).active) probe = period;
        for (int period = n / 2 + 1; period <= n && probe == 0; ++period)
            if (solved.policy.by_remaining(n - period + 1).active) probe = period;
        if (uni.overall && probe > 0) {
            const AugmentedDelta ad = augmented_kernel_delta(solved.policy, demand, p, probe);
            j["augmented_delta"] = {{"delta_x", ad.delta_x}, {"delta_z", ad.delta_z}};
        }
    }

    // martingale suite
    const std::size_t mart_paths = std::min<std::size_t>(ctx.cfg.replications, 1000);
    const MartingaleSuite suite = (mart_paths >= 2)
        ? martingale_suite(policy, p, demand, solved.values, mart_paths, ctx.cfg.master_seed)
        : MartingaleSuite{};
    j["martingale"] = {{"paths", suite.paths},
                       {"max_telescoping_residual", suite.max_telescoping_residual},
                       {"b_hat", suite.b_hat},
                       {"sample_var", suite.sample_var},
                       {"sum_mean_d_sq", suite.sum_mean_d_sq},
                       {"combined_se", suite.combined_se},
                       {"variance_identity_pass", suite.variance_identity_pass},
                       {"clamped_lookups", suite.clamped_lookups}};
    if (suite.paths >= 2) bundle.gate_pass = bundle.gate_pass && suite.variance_identity_pass;

    // conditional-mean residuals at a grid of probes
    {
        json probes = json::array();
        double worst = 0.0;
        const double tol = 1e-3 * std::max(1.0, solved.expected_cost);
        for (double x : {solved.policy.x_lo / 2.0, -0.5 * demand.J, 0.0, solved.policy.s_cap / 2.0}) {
            for (int period : {1, std::max(1, n / 2), n}) {
                const double resid =
                    conditional_mean_check(x, period, solved.values, policy, p, demand);
                worst = std::max(worst, resid);
                probes.push_back({{"x", x}, {"period", period}, {"residual", resid}});
            }
        }
        j["conditional_mean"] = {{"probes", probes},
                                 {"max_residual", worst},
                                 {"tolerance", tol},
                                 {"pass", worst <= tol}};
        bundle.gate_pass = bundle.gate_pass && worst <= tol;
    }

    // cost sample: normality and concentration
    const BatchResult batch = simulate_batch(policy, p, demand, ctx.cfg.replications,
                                             ctx.cfg.master_seed, ctx.workers);
    if (ctx.cfg.replications >= 1000) {
        const DistributionReport rep = clt_test(batch.costs);
        j["ks"] = rep.ks;
        j["moments"] = {{"mean", rep.mean},
                        {"variance", rep.variance},
                        {"skewness", rep.skewness},
                        {"excess_kurtosis", rep.excess_kurtosis}};
        const double sd = std::sqrt(rep.variance);
        bundle.standardized.reserve(batch.costs.size());
        for (double c : batch.costs) bundle.standardized.push_back((c - rep.mean) / sd);
    } else {
        j["ks"] = nullptr;
    }
    if (suite.b_hat > 0.0) {
        const double b_eff = 1.25 * suite.b_hat;  // conservative inflation of the sup
        std::vector<double> lambdas;
        for (double f : {0.5, 1.0, 2.0}) lambdas.push_back(f * std::sqrt(n) * suite.b_hat);
        const HoeffdingTable tab = hoeffding_check(batch.costs, b_eff, n, lambdas);
        j["hoeffding_table"] = to_json(tab);
        j["hoeffding_pass"] = tab.pass;
        bundle.gate_pass = bundle.gate_pass && tab.pass;
    } else {
        j["hoeffding_table"] = json::array();
    }

    // variance growth requires at least three horizons
    if (ctx.cfg.horizons.size() >= 3) {
        const auto sweep = horizon_sweep(PolicyKind::Optimal, 0.0, ctx.cfg.params, demand,
                                         ctx.cfg.horizons, ctx.cfg.replications,
                                         ctx.cfg.master_seed, ctx.workers, ctx.cfg.grid_step);
        const VarianceFit fit = variance_growth(sweep);
        j["variance_fit"] = to_json(fit);
        bundle.vfit = fit;
        bundle.gate_pass = bundle.gate_pass && fit.pass;
    } else {
        j["variance_fit"] = nullptr;
    }

    // stochastic-order comparisons
    {
        json dom = json::array();
        for (const auto& cp : ctx.cfg.compare) {
            const PolicySpec alt = make_compare_policy(cp, p, demand);
            const BatchResult alt_batch =
                simulate_batch(alt, p, demand, ctx.cfg.replications,
                               mix64(ctx.cfg.master_seed ^ 0x5A5A5A5A5A5A5A5AULL), ctx.workers);
            const DominanceReport rep = stochastic_order_compare(batch.costs, alt_batch.costs);
            dom.push_back(to_json(rep, compare_label(cp)));
        }
        j["dominance"] = dom;
    }
    return bundle;
}

int cmd_diagnose(const RunContext& ctx) {
    DiagnosticsBundle bundle = run_diagnostics(ctx);
    const std::string n = std::to_string(ctx.cfg.horizons.front());
    OutputWriter out(ctx.out_dir);
    if (wants(ctx, "json")) out.write("diagnostics.json", bundle.report.dump(2) + "\n");
    if (wants(ctx, "csv") && !bundle.standardized.empty()) {
        out.write("histogram_n" + n + ".csv", histogram_csv(bundle.standardized));
        out.write("qq_n" + n + ".csv", qq_csv(bundle.standardized));
    }
    if (wants(ctx, "csv") && bundle.vfit)
        out.write("variance_vs_n.csv",
                  variance_vs_n_csv(bundle.vfit->horizons, bundle.vfit->variances));
    out.finish();
    std::cout << "diagnose: checks=" << (bundle.gate_pass ? "PASS" : "FAIL") << "\n";
    return bundle.gate_pass ? 0 : 2;
}

int cmd_clt(const RunContext& ctx) {
    const DemandModel demand = make_demand(ctx.cfg.demand);
    const auto sweep =
        horizon_sweep(PolicyKind::Optimal, 0.0, ctx.cfg.params, demand, ctx.cfg.horizons,
                      ctx.cfg.replications, ctx.cfg.master_seed, ctx.workers, ctx.cfg.grid_step);

    OutputWriter out(ctx.out_dir);
    json j;
    j["schema_version"] = 1;
    json ks_entries = json::array();
    bool gate = true;
    std::vector<double> standardized_last;
    for (const auto& hs : sweep) {
        if (wants(ctx, "csv"))
            out.write("sweep_costs_n" + std::to_string(hs.horizon) + ".csv",
                      costs_csv(hs.costs));
        if (hs.costs.size() >= 1000) {
            const DistributionReport rep = clt_test(hs.costs);
            ks_entries.push_back({{"n", hs.horizon},
                                  {"ks", rep.ks},
                                  {"skewness", rep.skewness},
                                  {"excess_kurtosis", rep.excess_kurtosis},
                                  {"mean", rep.mean},
                                  {"variance", rep.variance}});
            if (hs.horizon == sweep.back().horizon) {
                const double sd = std::sqrt(rep.variance);
                for (double c : hs.costs) standardized_last.push_back((c - rep.mean) / sd);
            }
        }
    }
    j["ks"] = ks_entries;
    if (sweep.size() >= 3) {
        const VarianceFit fit = variance_growth(sweep);
        j["variance_fit"] = to_json(fit);
        gate = gate && fit.pass;
        if (wants(ctx, "csv"))
            out.write("variance_vs_n.csv", variance_vs_n_csv(fit.horizons, fit.variances));
    } else {
        j["variance_fit"] = nullptr;
    }
    if (wants(ctx, "csv") && !standardized_last.empty()) {
        const std::string n = std::to_string(sweep.back().horizon);
        out.write("histogram_n" + n + ".csv", histogram_csv(standardized_last));
        out.write("qq_n" + n + ".csv", qq_csv(standardized_last));
    }
    if (wants(ctx, "json")) out.write("clt_report.json", j.dump(2) + "\n");
    out.finish();
    std::cout << "clt: horizons=" << sweep.size() << " checks=" << (gate ? "PASS" : "FAIL")
              << "\n";
    return gate ? 0 : 2;
}

int cmd_compare(const RunContext& ctx) {
    const int n = ctx.cfg.horizons.front();
    const ModelParams p = params_for(ctx, n);
    const DemandModel demand = make_demand(ctx.cfg.demand);
    const SolveResult solved = solve(p, demand, ctx.cfg.grid_step);
    const BatchResult opt = simulate_batch(PolicySpec::optimal(solved.policy), p, demand,
                                           ctx.cfg.replications, ctx.cfg.master_seed, ctx.workers);
    json dom = json::array();
    for (const auto& cp : ctx.cfg.compare) {
        const PolicySpec alt = make_compare_policy(cp, p, demand);
        const BatchResult alt_batch =
            simulate_batch(alt, p, demand, ctx.cfg.replications,
                           mix64(ctx.cfg.master_seed ^ 0x5A5A5A5A5A5A5A5AULL), ctx.workers);
        const DominanceReport rep = stochastic_order_compare(opt.costs, alt_batch.costs);
        dom.push_back(to_json(rep, compare_label(cp)));
        std::cout << "compare vs " << compare_label(cp) << ": " << to_string(rep.verdict)
                  << " V=" << format_double(rep.violation) << "\n";
    }
    OutputWriter out(ctx.out_dir);
    if (wants(ctx, "json"))
        out.write("dominance.json",
                  json{{"schema_version", 1}, {"n", n}, {"dominance", dom}}.dump(2) + "\n");
    out.finish();
    return 0;
}

int cmd_report(const RunContext& ctx) {
    const int n = ctx.cfg.horizons.front();
    const ModelParams p = params_for(ctx, n);
    const DemandModel demand = make_demand(ctx.cfg.demand);
    const SolveResult solved = solve(p, demand, ctx.cfg.grid_step);
    const StructureReport srep = structure_report(solved.policy, solved.values, p, demand);
    DiagnosticsBundle bundle = run_diagnostics(ctx);

    json j;
    j["schema_version"] = 1;
    j["structure"] = to_json(srep);
    j["structure"]["expected_cost"] = solved.expected_cost;
    j["diagnostics"] = bundle.report;
    const bool gate = srep.gate_pass() && bundle.gate_pass;
    j["all_checks_pass"] = gate;

    OutputWriter out(ctx.out_dir);
    out.write("summary.json", j.dump(2) + "\n");
    out.finish();
    std::cout << "report: all_checks=" << (gate ? "PASS" : "FAIL") << "\n";
    return gate ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "invlab: finite-horizon inventory laboratory with delayed deliveries.\n"
        "Configuration is one JSON file; defaults: demand.M = 512 cells per unit\n"
        "of support, run.grid_step = J/256, run.replications = 1000,\n"
        "run.retained_trajectories = 0, output.formats = [csv, json].\n"
        "The environment variable INVLAB_SEED overrides run.master_seed."};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    unsigned workers = 1;
    app.add_option("--config", config_path, "experiment configuration (JSON)")->required();
    app.add_option("--workers", workers, "worker threads for simulation batches");
    app.add_option("--out", out_override, "output directory (overrides the config)");

    for (const char* name : {"solve", "simulate", "diagnose", "clt", "compare", "report"})
        app.add_subcommand(name)->fallthrough(true);

    CLI11_PARSE(app, argc, argv);

    ConfigLoad loaded = load_config(config_path);
    if (!loaded.ok()) {
        std::cerr << "configuration errors:\n" << loaded.describe();
        return 1;
    }

    RunContext ctx;
    ctx.cfg = *loaded.config;
    ctx.workers = std::max(1u, workers);
    ctx.out_dir = out_override.empty() ? ctx.cfg.output_directory : out_override;
    if (const char* env = std::getenv("INVLAB_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') {
            std::cerr << "INVLAB_SEED: not a valid unsigned integer\n";
            return 1;
        }
        ctx.cfg.master_seed = v;
    }

    try {
        const std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "solve") return cmd_solve(ctx);
        if (sub == "simulate") return cmd_simulate(ctx);
        if (sub == "diagnose") return cmd_diagnose(ctx);
        if (sub == "clt") return cmd_clt(ctx);
        if (sub == "compare") return cmd_compare(ctx);
        if (sub == "report") return cmd_report(ctx);
        std::cerr << "unknown subcommand\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
