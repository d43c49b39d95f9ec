#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "linkfp/rng.hpp"

namespace linkfp {

// Parameters of the shared host-device communication link.
struct LinkConfig {
    double capacity_bytes_per_us = 8.0;
    double launch_overhead_us = 50.0;   // fixed cost per kernel invocation
    double noise_sigma_rel = 0.08;      // relative std-dev of measurement noise
    std::uint64_t seed = 0;

    void validate() const;  // throws ValidationError
};

enum class FlowOwner { Probe, Victim };

using FlowId = std::uint64_t;

// A fluid transfer in flight. bytes_remaining drains at the flow's allocated
// share of link capacity and the flow departs exactly when it reaches zero.
struct Flow {
    FlowId id = 0;
    FlowOwner owner = FlowOwner::Probe;
    double bytes_remaining = 0.0;
    double weight = 1.0;
};

struct LinkEvent {
    enum class Kind { Arrival, Completion };
    double time_us = 0.0;
    Kind kind = Kind::Arrival;
    FlowId flow = 0;
    double bytes_remaining = 0.0;
};

void write_event_log(std::ostream& out, const std::vector<LinkEvent>& events);

// Weighted processor sharing: rate_i = capacity * w_i / sum(w). Empty input
// yields an empty vector; the returned rates are aligned with the input order
// and sum to capacity whenever at least one flow is active.
std::vector<double> allocate_rates(const std::vector<Flow>& flows, double capacity);

// A future transfer start.
struct Arrival {
    double time_us = 0.0;
    double bytes = 0.0;
    FlowOwner owner = FlowOwner::Victim;
    double weight = 1.0;
};

// Pull-based producer of arrivals in non-decreasing time order. Lets victim
// schedules unroll lazily so a timeline never needs a horizon up front.
class ArrivalSource {
public:
    virtual ~ArrivalSource() = default;
    virtual std::optional<Arrival> next() = 0;
};

// Deterministic single-link event timeline under processor sharing.
// Strictly single-threaded; one simulation run owns its Timeline exclusively.
class Timeline {
public:
    explicit Timeline(const LinkConfig& config);

    double now() const { return now_; }
    const std::vector<Flow>& active_flows() const { return active_; }
    const LinkConfig& config() const { return config_; }

    void add_source(std::unique_ptr<ArrivalSource> source);

    // Queue a transfer start at an absolute time >= now().
    void schedule(double time_us, FlowOwner owner, double bytes, double weight = 1.0);

    // Process every completion and arrival with event time <= until_us, in
    // time order, draining each active flow by its piecewise-constant rate.
    void advance_to(double until_us);

    // Insert a flow at the current time, run until it departs, and return
    // the elapsed simulated time. Concurrent flows progress consistently.
    double transfer(FlowOwner owner, double bytes, double weight = 1.0);

    void enable_event_log() { log_enabled_ = true; }
    const std::vector<LinkEvent>& event_log() const { return log_; }

private:
    struct PendingArrival {
        Arrival arrival;
        std::uint64_t order;  // insertion tiebreak
        bool operator>(const PendingArrival& o) const {
            if (arrival.time_us != o.arrival.time_us)
                return arrival.time_us > o.arrival.time_us;
            return order > o.order;
        }
    };

    double next_arrival_time();
    void pop_arrivals_at(double time_us);
    void refill_source_peeks();
    FlowId add_flow(FlowOwner owner, double bytes, double weight);
    void log_event(LinkEvent::Kind kind, FlowId id, double bytes_remaining);
    bool flow_active(FlowId id) const;

    LinkConfig config_;
    double now_ = 0.0;
    std::vector<Flow> active_;
    std::vector<PendingArrival> pending_;  // min-heap on (time, order)
    std::vector<std::unique_ptr<ArrivalSource>> sources_;
    std::vector<std::optional<Arrival>> peeks_;
    FlowId next_id_ = 1;
    std::uint64_t next_order_ = 0;
    bool log_enabled_ = false;
    std::vector<LinkEvent> log_;
};

// Measured duration model: true duration scaled by a clamped multiplicative
// Gaussian, max(0.01, 1 + sigma_rel * g). Deterministic given the rng state;
// sigma_rel = 0 returns the input exactly.
double noisy_duration(Rng& rng, double true_duration_us, double sigma_rel);

}  // namespace linkfp
