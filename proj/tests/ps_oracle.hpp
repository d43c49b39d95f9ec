#pragma once

// Independent closed-form processor-sharing calculation used to check the
// event-driven simulator. Works directly from the PS definition: between
// consecutive arrival/departure instants every active flow drains at
// capacity * w_i / sum(w). Deliberately shares no code with linkfp::Timeline.

#include <algorithm>
#include <limits>
#include <vector>

namespace psoracle {

struct OracleFlow {
    double arrival = 0.0;
    double bytes = 0.0;
    double weight = 1.0;
};

// Completion time of each flow, indexed like the input.
inline std::vector<double> completion_times(const std::vector<OracleFlow>& flows,
                                            double capacity) {
    const std::size_t n = flows.size();
    std::vector<double> remaining(n), done(n, 0.0);
    std::vector<bool> arrived(n, false), finished(n, false);
    for (std::size_t i = 0; i < n; ++i) remaining[i] = flows[i].bytes;

    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) t = std::min(t, flows[i].arrival);

    std::size_t left = n;
    while (left > 0) {
        // Admit flows that have arrived by now.
        for (std::size_t i = 0; i < n; ++i)
            if (!arrived[i] && flows[i].arrival <= t) arrived[i] = true;

        double weight_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (arrived[i] && !finished[i]) weight_sum += flows[i].weight;

        const double inf = std::numeric_limits<double>::infinity();
        double next_arrival = inf;
        for (std::size_t i = 0; i < n; ++i)
            if (!arrived[i]) next_arrival = std::min(next_arrival, flows[i].arrival);

        if (weight_sum == 0.0) {
            t = next_arrival;
            continue;
        }

        std::vector<double> completes(n, inf);
        double first_completion = inf;
        for (std::size_t i = 0; i < n; ++i) {
            if (!arrived[i] || finished[i]) continue;
            const double rate = capacity * flows[i].weight / weight_sum;
            completes[i] = t + remaining[i] / rate;
            first_completion = std::min(first_completion, completes[i]);
        }

        const double t_next = std::min(first_completion, next_arrival);
        for (std::size_t i = 0; i < n; ++i) {
            if (!arrived[i] || finished[i]) continue;
            const double rate = capacity * flows[i].weight / weight_sum;
            remaining[i] -= rate * (t_next - t);
        }
        t = t_next;
        const double eps = 1e-12 * std::max(1.0, std::abs(t));
        for (std::size_t i = 0; i < n; ++i) {
            if (!arrived[i] || finished[i]) continue;
            if (completes[i] <= t + eps) {
                finished[i] = true;
                done[i] = completes[i];
                --left;
            }
        }
    }
    return done;
}

}  // namespace psoracle
