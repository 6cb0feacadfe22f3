#include "crs/scan.hpp"

#include <algorithm>

#include "crs/errors.hpp"
#include "crs/parallel.hpp"

namespace crs {

ScanResult min_epsilon(const Cohort& c1, const Cohort& c2, const CensoringSpec& cs1,
                       const CensoringSpec& cs2, std::vector<double> grid,
                       const ScanConfig& cfg) {
    if (grid.empty()) throw input_error("min_epsilon: empty threshold grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !(grid[i] < 1.0))
            throw input_error("min_epsilon: thresholds must lie in (0, 1)");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw input_error("min_epsilon: threshold grid must be strictly increasing");
    }

    auto run_at = [&](double epsilon) {
        TestConfig tc;
        tc.epsilon = epsilon;
        tc.alpha = cfg.alpha;
        tc.bootstrap = cfg.bootstrap;
        tc.tau = cfg.tau;
        tc.measure = cfg.measure;
        tc.seed = cfg.seed;  // shared across thresholds by design
        tc.threads = 1;      // parallelism lives at the grid level here
        return run_similarity_test(c1, c2, cs1, cs2, tc);
    };

    ScanResult result;
    result.grid = std::move(grid);
    result.seed = cfg.seed;
    result.p_values.assign(result.grid.size(), 0.0);
    result.rejects.assign(result.grid.size(), 0);

    parallel_for(result.grid.size(), cfg.threads, [&](std::size_t i) {
        const TestReport r = run_at(result.grid[i]);
        result.p_values[i] = r.p_value;
        result.rejects[i] = r.reject ? 1 : 0;
    });

    bool seen_reject = false;
    std::size_t first_reject = result.grid.size();
    for (std::size_t i = 0; i < result.grid.size(); ++i) {
        if (result.rejects[i]) {
            if (!seen_reject) first_reject = i;
            seen_reject = true;
        } else if (seen_reject) {
            result.monotonicity_violations.push_back(i);
        }
    }
    if (first_reject == result.grid.size()) return result;  // no rejection anywhere: valid

    double hi = result.grid[first_reject];
    if (cfg.refine && first_reject > 0) {
        double lo = result.grid[first_reject - 1];
        while (hi - lo > cfg.refine_resolution) {
            const double mid = 0.5 * (lo + hi);
            const TestReport r = run_at(mid);
            result.refine_grid.push_back(mid);
            result.refine_p_values.push_back(r.p_value);
            if (r.reject)
                hi = mid;
            else
                lo = mid;
        }
    }
    result.epsilon_hat = hi;
    return result;
}

}  // namespace crs
