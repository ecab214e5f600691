#pragma once

// Seeded simulation of the inventory chain and realized costs.
//
// Draw order is normative: within each period the demand D is drawn first,
// then the fulfilment flag Y (Y = 1 iff the uniform variate is < q). Demands
// come from inverse-CDF sampling on the demand grid. Changing either
// convention is a schema-version bump.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "invlab/demand.hpp"
#include "invlab/model.hpp"
#include "invlab/rng.hpp"
#include "invlab/solver.hpp"

namespace invlab {

// ============================================================================
// Policies available to the simulator
// ============================================================================

enum class PolicyKind { Optimal, FixedBaseStock, NeverOrder, Myopic };

inline const char* to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::Optimal: return "optimal";
        case PolicyKind::FixedBaseStock: return "fixed_base_stock";
        case PolicyKind::NeverOrder: return "never_order";
        default: return "myopic";
    }
}

// The myopic rule re-solves the one-period problem each period; with i.i.d.
// demand that target is the same every period, so it is computed once from
// the first-order condition of the single-period objective.
struct PolicySpec {
    PolicyKind kind = PolicyKind::Optimal;
    const PolicyTable* table = nullptr;  // required for Optimal
    double fixed_level = 0.0;            // required for FixedBaseStock
    double myopic_level = 0.0;
    bool myopic_active = false;

    static PolicySpec optimal(const PolicyTable& t) {
        PolicySpec s;
        s.kind = PolicyKind::Optimal;
        s.table = &t;
        return s;
    }
    static PolicySpec fixed_base_stock(double level) {
        PolicySpec s;
        s.kind = PolicyKind::FixedBaseStock;
        s.fixed_level = level;
        return s;
    }
    static PolicySpec never_order() {
        PolicySpec s;
        s.kind = PolicyKind::NeverOrder;
        return s;
    }
    static PolicySpec myopic(const ModelParams& p, const DemandModel& d) {
        PolicySpec s;
        s.kind = PolicyKind::Myopic;
        if (p.q * p.c_p > p.c) {
            s.myopic_active = true;
            s.myopic_level = d.quantile((p.q * p.c_p - p.c) / (p.q * (p.c_h + p.c_p)));
        }
        return s;
    }

    /// Order-up-to target for period i at state x; always >= x.
    [[nodiscard]] double target(int period, double x, int n) const {
        switch (kind) {
            case PolicyKind::Optimal:
                if (!table) throw std::logic_error("policy: optimal variant has no table");
                return order_up_to(*table, period, x, n);
            case PolicyKind::FixedBaseStock:
                return std::max(x, fixed_level);
            case PolicyKind::NeverOrder:
                return x;
            case PolicyKind::Myopic:
                return myopic_active ? std::max(x, myopic_level) : x;
        }
        return x;
    }
};

// ============================================================================
// Trajectories
// ============================================================================

struct Trajectory {
    std::vector<double> x;            // states X_1..X_{n+1}
    std::vector<double> target;       // y_i per period
    std::vector<double> order;        // y_i - X_i
    std::vector<std::uint8_t> filled; // Y_i
    std::vector<double> demand;       // D_i
    std::vector<double> period_cost;  // one-period costs
    std::vector<double> cum_cost;     // running totals

    [[nodiscard]] int periods() const { return static_cast<int>(demand.size()); }
    [[nodiscard]] double total_cost() const { return cum_cost.empty() ? 0.0 : cum_cost.back(); }
};

namespace detail {

inline Trajectory simulate_core(const PolicySpec& policy, const ModelParams& p,
                                std::span<const double> demands,
                                std::span<const std::uint8_t> filled) {
    const int n = p.n;
    Trajectory tr;
    tr.x.reserve(static_cast<std::size_t>(n) + 1);
    tr.target.reserve(n);
    tr.order.reserve(n);
    tr.filled.assign(filled.begin(), filled.end());
    tr.demand.assign(demands.begin(), demands.end());
    tr.period_cost.reserve(n);
    tr.cum_cost.reserve(n);

    double x = p.x0;
    double cum = 0.0;
    tr.x.push_back(x);
    for (int i = 1; i <= n; ++i) {
        const double d = demands[static_cast<std::size_t>(i - 1)];
        const bool y1 = filled[static_cast<std::size_t>(i - 1)] != 0;
        const double y = policy.target(i, x, n);
        const double carried = y1 ? carrying_cost(y - d, p) : carrying_cost(x - d, p);
        const double cost = p.c * (y - x) + carried;
        cum += cost;
        tr.target.push_back(y);
        tr.order.push_back(y - x);
        tr.period_cost.push_back(cost);
        tr.cum_cost.push_back(cum);
        x = y - d;
        tr.x.push_back(x);
    }
    return tr;
}

}  // namespace detail

/// Simulate one path driven by a seeded stream.
inline Trajectory simulate_path(const PolicySpec& policy, const ModelParams& p,
                                const DemandModel& d, StreamSpec stream) {
    CounterRng rng(stream);
    const int n = p.n;
    std::vector<double> demands(static_cast<std::size_t>(n));
    std::vector<std::uint8_t> filled(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        demands[static_cast<std::size_t>(i)] = d.sample(rng.next_unit());  // D first
        filled[static_cast<std::size_t>(i)] = rng.next_unit() < p.q ? 1 : 0;  // then Y
    }
    return detail::simulate_core(policy, p, demands, filled);
}

/// Simulate one path on injected (Y, D) sequences; the golden-test entry.
inline Trajectory simulate_path(const PolicySpec& policy, const ModelParams& p,
                                const DemandModel& d, std::span<const double> demands,
                                std::span<const std::uint8_t> filled) {
    if (static_cast<int>(demands.size()) != p.n || static_cast<int>(filled.size()) != p.n)
        throw std::invalid_argument("simulate_path: injected sequences must have length n");
    for (double v : demands)
        if (!(v >= 0.0 && v <= d.J))
            throw std::invalid_argument("simulate_path: injected demand outside [0, J]");
    for (auto y : filled)
        if (y > 1) throw std::invalid_argument("simulate_path: injected Y values must be 0 or 1");
    return detail::simulate_core(policy, p, demands, filled);
}

// ============================================================================
// Batches and sweeps
// ============================================================================

struct BatchSummary {
    std::size_t replications = 0;
    double mean = 0.0;
    double variance = 0.0;  // Bessel-corrected
    double min = 0.0;
    double max = 0.0;
};

struct BatchResult {
    std::vector<double> costs;  // C_n by replication index
    BatchSummary summary;
    std::vector<Trajectory> retained;
};

// Replication r draws from StreamSpec{master_seed, r}; results do not depend
// on the worker count because each replication writes its own slot and the
// summary accumulates in fixed r-order.
inline BatchResult simulate_batch(const PolicySpec& policy, const ModelParams& p,
                                  const DemandModel& d, std::size_t replications,
                                  std::uint64_t master_seed, unsigned workers = 1,
                                  std::size_t retain_trajectories = 0) {
    if (replications < 1) throw std::invalid_argument("simulate_batch: need at least one replication");
    BatchResult out;
    out.costs.resize(replications);
    const std::size_t retain = std::min(retain_trajectories, replications);
    out.retained.resize(retain);

    auto run_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            Trajectory tr = simulate_path(policy, p, d, StreamSpec{master_seed, r});
            out.costs[r] = tr.total_cost();
            if (r < retain) out.retained[r] = std::move(tr);
        }
    };

    if (workers <= 1 || replications < 2 * workers) {
        run_range(0, replications);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (replications + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t lo = static_cast<std::size_t>(w) * chunk;
            const std::size_t hi = std::min(lo + chunk, replications);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& t : pool) t.join();
    }

    BatchSummary& s = out.summary;
    s.replications = replications;
    s.min = out.costs.front();
    s.max = out.costs.front();
    double sum = 0.0;
    for (double c : out.costs) {
        sum += c;
        s.min = std::min(s.min, c);
        s.max = std::max(s.max, c);
    }
    s.mean = sum / static_cast<double>(replications);
    if (replications > 1) {
        double ss = 0.0;
        for (double c : out.costs) ss += (c - s.mean) * (c - s.mean);
        s.variance = ss / static_cast<double>(replications - 1);
    }
    return out;
}

struct HorizonSample {
    int horizon = 0;
    std::uint64_t seed = 0;
    std::vector<double> costs;
    BatchSummary summary;
};

/// Per-horizon batches with independently derived master seeds. The optimal
/// policy is re-solved at each horizon; other kinds are rebuilt directly.
inline std::vector<HorizonSample> horizon_sweep(PolicyKind kind, double fixed_level,
                                                const ModelParams& base,
                                                const DemandModel& d,
                                                const std::vector<int>& horizons,
                                                std::size_t replications,
                                                std::uint64_t master_seed,
                                                unsigned workers = 1, double h = 0.0) {
    if (horizons.empty()) throw std::invalid_argument("horizon_sweep: no horizons given");
    for (std::size_t i = 1; i < horizons.size(); ++i)
        if (horizons[i] <= horizons[i - 1])
            throw std::invalid_argument("horizon_sweep: horizons must be strictly increasing");

    std::vector<HorizonSample> out;
    out.reserve(horizons.size());
    for (int n : horizons) {
        ModelParams p = base;
        p.n = n;
        HorizonSample hs;
        hs.horizon = n;
        hs.seed = horizon_seed(master_seed, n);
        try {
            SolveResult solved;
            PolicySpec policy;
            if (kind == PolicyKind::Optimal) {
                solved = solve(p, d, h);
                policy = PolicySpec::optimal(solved.policy);
            } else if (kind == PolicyKind::FixedBaseStock) {
                policy = PolicySpec::fixed_base_stock(fixed_level);
            } else if (kind == PolicyKind::Myopic) {
                policy = PolicySpec::myopic(p, d);
            } else {
                policy = PolicySpec::never_order();
            }
            BatchResult batch = simulate_batch(policy, p, d, replications, hs.seed, workers);
            hs.costs = std::move(batch.costs);
            hs.summary = batch.summary;
        } catch (const std::exception& e) {
            throw std::runtime_error("horizon " + std::to_string(n) + ": " + e.what());
        }
        out.push_back(std::move(hs));
    }
    return out;
}

}  // namespace invlab
