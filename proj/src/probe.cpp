#include "linkfp/probe.hpp"

#include <memory>

#include "linkfp/errors.hpp"
#include "linkfp/parallel.hpp"

namespace linkfp {

namespace {

// Stream tags within one trace seed.
enum : std::uint64_t { kNoiseStream = 0, kVictimStream = 1, kPhaseStream = 2 };

}  // namespace

void ProbeConfig::validate() const {
    if (access_num <= 0) throw ValidationError("probe: access-num must be > 0");
    if (repeat_num <= 0) throw ValidationError("probe: repeat-num must be > 0");
    if (buffer_size_bytes <= 0) throw ValidationError("probe: buffer-size must be > 0");
    if (buffer_num <= 0) throw ValidationError("probe: buffer-num must be > 0");
}

double kernel_bytes(const ProbeConfig& config) {
    config.validate();
    return 2.0 * static_cast<double>(config.access_num) *
           static_cast<double>(config.buffer_size_bytes);
}

double invoke_kernel(Timeline& timeline, const ProbeConfig& config, Rng& noise_rng) {
    const LinkConfig& link = timeline.config();
    timeline.advance_to(timeline.now() + link.launch_overhead_us);
    const double elapsed = timeline.transfer(FlowOwner::Probe, kernel_bytes(config));
    const double true_duration = link.launch_overhead_us + elapsed;
    return noisy_duration(noise_rng, true_duration, link.noise_sigma_rel);
}

Trace collect_trace(const LinkConfig& link, const VictimProfile* victim,
                    const ProbeConfig& config, std::uint64_t seed) {
    link.validate();
    config.validate();

    Timeline timeline(link);
    Rng noise_rng(Rng::derive(seed, {kNoiseStream}));
    if (victim) {
        Rng phase_rng(Rng::derive(seed, {kPhaseStream}));
        const double period = victim->period_us(link.capacity_bytes_per_us);
        const double offset = phase_rng.uniform(0.0, period);
        timeline.add_source(std::make_unique<VictimWalker>(
            *victim, link.capacity_bytes_per_us, -offset,
            Rng(Rng::derive(seed, {kVictimStream}))));
    }

    Trace trace;
    trace.label = victim ? victim->code : kLabelNone;
    trace.probe_config = config;
    trace.seed = seed;
    trace.points.reserve(static_cast<std::size_t>(config.buffer_num));
    for (int i = 0; i < config.buffer_num; ++i) {
        double total = 0.0;
        for (int j = 0; j < config.repeat_num; ++j)
            total += invoke_kernel(timeline, config, noise_rng);
        const double mean_duration = total / static_cast<double>(config.repeat_num);
        trace.points.push_back(1.0 / mean_duration);
    }
    return trace;
}

LabeledDataset collect_corpus(const LinkConfig& link, const ProfileSet& profiles,
                              const ProbeConfig& config, int traces_per_class,
                              std::uint64_t base_seed, int jobs) {
    if (traces_per_class < 1)
        throw ValidationError("corpus: traces-per-class must be >= 1");
    profiles.validate();
    config.validate();

    const std::size_t n_classes = profiles.profiles.size();
    const std::size_t n_traces = n_classes * static_cast<std::size_t>(traces_per_class);
    std::vector<Trace> traces(n_traces);
    parallel_for(n_traces, jobs, [&](std::size_t cell) {
        const std::size_t c = cell / static_cast<std::size_t>(traces_per_class);
        const std::size_t t = cell % static_cast<std::size_t>(traces_per_class);
        const std::uint64_t seed = Rng::derive(base_seed, {c, t});
        traces[cell] = collect_trace(link, &profiles.profiles[c], config, seed);
    });

    LabeledDataset dataset;
    dataset.n_features = static_cast<std::size_t>(config.buffer_num);
    for (const Trace& trace : traces) dataset.add_row(trace.points, trace.label);
    return dataset;
}

}  // namespace linkfp
