#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linkfp/dataset.hpp"
#include "linkfp/linksim.hpp"
#include "linkfp/victims.hpp"

namespace linkfp {

// The measurement benchmark's four attack parameters.
struct ProbeConfig {
    int access_num = 1000;
    int repeat_num = 10;
    int buffer_size_bytes = 4;
    int buffer_num = 100;

    void validate() const;
};

// One labeled bandwidth trace: buffer_num points of 1 / mean_duration_us.
struct Trace {
    std::vector<double> points;
    std::string label;
    ProbeConfig probe_config;
    std::uint64_t seed = 0;
};

// Bytes one kernel invocation pushes through the link: each of access_num
// loop iterations reads and writes one buffer_size element.
double kernel_bytes(const ProbeConfig& config);

// One kernel invocation on the shared timeline: launch overhead, then the
// kernel transfer under contention. Returns the measured (noisy) duration;
// simulated time advances by the true duration.
double invoke_kernel(Timeline& timeline, const ProbeConfig& config, Rng& noise_rng);

// The full measurement loop: buffer_num points, each the inverse of the mean
// of repeat_num invocation durations. The victim (when present) runs
// concurrently from t=0 at a uniformly random initial phase offset.
// Pass nullptr for a baseline (label NONE) trace.
Trace collect_trace(const LinkConfig& link, const VictimProfile* victim,
                    const ProbeConfig& config, std::uint64_t seed);

// traces_per_class traces per profile, each from its own derived stream,
// rows ordered class-major then trace-index-minor. jobs > 1 collects cells
// in parallel; results are identical regardless of jobs.
LabeledDataset collect_corpus(const LinkConfig& link, const ProfileSet& profiles,
                              const ProbeConfig& config, int traces_per_class,
                              std::uint64_t base_seed, int jobs = 1);

}  // namespace linkfp
