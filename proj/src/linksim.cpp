#include "linkfp/linksim.hpp"

#include <algorithm>
#include <cmath>

#include "linkfp/errors.hpp"

namespace linkfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tie window for events that should coincide but differ by rounding.
double tie_eps(double t) { return 1e-15 * std::max(1.0, std::abs(t)); }

}  // namespace

void LinkConfig::validate() const {
    if (!(capacity_bytes_per_us > 0.0))
        throw ValidationError("link: capacity must be > 0");
    if (!(launch_overhead_us >= 0.0))
        throw ValidationError("link: launch-overhead must be >= 0");
    if (!(noise_sigma_rel >= 0.0 && noise_sigma_rel <= 0.5))
        throw ValidationError("link: noise-sigma-rel must be in [0, 0.5]");
}

void write_event_log(std::ostream& out, const std::vector<LinkEvent>& events) {
    char buf[128];
    for (const auto& e : events) {
        const char* kind = e.kind == LinkEvent::Kind::Arrival ? "arrival" : "completion";
        std::snprintf(buf, sizeof buf, "%.9f\t%s\t%llu\t%.9f\n", e.time_us, kind,
                      static_cast<unsigned long long>(e.flow), e.bytes_remaining);
        out << buf;
    }
}

std::vector<double> allocate_rates(const std::vector<Flow>& flows, double capacity) {
    std::vector<double> rates(flows.size());
    if (flows.empty()) return rates;
    double total_weight = 0.0;
    for (const Flow& f : flows) {
        if (!(f.weight > 0.0))
            throw ValidationError("flow " + std::to_string(f.id) + ": non-positive weight");
        total_weight += f.weight;
    }
    for (std::size_t i = 0; i < flows.size(); ++i)
        rates[i] = capacity * flows[i].weight / total_weight;
    return rates;
}

Timeline::Timeline(const LinkConfig& config) : config_(config) { config_.validate(); }

void Timeline::add_source(std::unique_ptr<ArrivalSource> source) {
    sources_.push_back(std::move(source));
    peeks_.push_back(sources_.back()->next());
}

void Timeline::schedule(double time_us, FlowOwner owner, double bytes, double weight) {
    if (!(bytes > 0.0)) throw ValidationError("schedule: bytes must be > 0");
    if (time_us < now_ - tie_eps(now_))
        throw InternalError("schedule: arrival in the past");
    pending_.push_back(PendingArrival{Arrival{time_us, bytes, owner, weight}, next_order_++});
    std::push_heap(pending_.begin(), pending_.end(), std::greater<>{});
}

double Timeline::next_arrival_time() {
    double t = pending_.empty() ? kInf : pending_.front().arrival.time_us;
    for (const auto& p : peeks_)
        if (p && p->time_us < t) t = p->time_us;
    return t;
}

FlowId Timeline::add_flow(FlowOwner owner, double bytes, double weight) {
    if (!(weight > 0.0)) throw ValidationError("flow: non-positive weight");
    const FlowId id = next_id_++;
    active_.push_back(Flow{id, owner, bytes, weight});
    log_event(LinkEvent::Kind::Arrival, id, bytes);
    return id;
}

void Timeline::pop_arrivals_at(double time_us) {
    const double limit = time_us + tie_eps(time_us);
    while (!pending_.empty() && pending_.front().arrival.time_us <= limit) {
        std::pop_heap(pending_.begin(), pending_.end(), std::greater<>{});
        const Arrival a = pending_.back().arrival;
        pending_.pop_back();
        add_flow(a.owner, a.bytes, a.weight);
    }
    for (std::size_t s = 0; s < peeks_.size(); ++s) {
        while (peeks_[s] && peeks_[s]->time_us <= limit) {
            const Arrival a = *peeks_[s];
            if (a.time_us < now_ - tie_eps(now_))
                throw InternalError("arrival source moved backward in time");
            if (a.bytes > 0.0) add_flow(a.owner, a.bytes, a.weight);
            peeks_[s] = sources_[s]->next();
        }
    }
}

void Timeline::log_event(LinkEvent::Kind kind, FlowId id, double bytes_remaining) {
    if (!log_enabled_) return;
    if (!log_.empty() && now_ < log_.back().time_us - tie_eps(now_))
        throw InternalError("event log: non-monotone event time");
    log_.push_back(LinkEvent{now_, kind, id, bytes_remaining});
}

bool Timeline::flow_active(FlowId id) const {
    for (const Flow& f : active_)
        if (f.id == id) return true;
    return false;
}

void Timeline::advance_to(double until_us) {
    if (until_us < now_ - tie_eps(now_))
        throw InternalError("advance_to: target time before current time");
    for (;;) {
        const std::vector<double> rates = allocate_rates(active_, config_.capacity_bytes_per_us);

        double t_complete = kInf;
        for (std::size_t i = 0; i < active_.size(); ++i)
            t_complete = std::min(t_complete, now_ + active_[i].bytes_remaining / rates[i]);
        const double t_arrive = next_arrival_time();
        const double t_event = std::min(t_complete, t_arrive);

        const double t_stop = std::min(t_event, until_us);
        const double dt = std::max(0.0, t_stop - now_);
        for (std::size_t i = 0; i < active_.size(); ++i)
            active_[i].bytes_remaining =
                std::max(0.0, active_[i].bytes_remaining - rates[i] * dt);
        now_ = t_stop;

        if (t_event > until_us + tie_eps(until_us)) {
            now_ = until_us;
            return;
        }

        if (t_complete <= t_event + tie_eps(t_event)) {
            // Completions first at an instant, then arrivals.
            const double limit = tie_eps(t_event);
            std::vector<Flow> still_active;
            still_active.reserve(active_.size());
            for (std::size_t i = 0; i < active_.size(); ++i) {
                const double remaining_time = active_[i].bytes_remaining / rates[i];
                if (remaining_time <= limit) {
                    log_event(LinkEvent::Kind::Completion, active_[i].id, 0.0);
                } else {
                    still_active.push_back(active_[i]);
                }
            }
            active_.swap(still_active);
        }
        if (t_arrive <= t_event + tie_eps(t_event)) pop_arrivals_at(now_);
    }
}

double Timeline::transfer(FlowOwner owner, double bytes, double weight) {
    if (!(bytes > 0.0)) throw ValidationError("transfer: bytes must be > 0");
    const double start = now_;
    pop_arrivals_at(now_);  // arrivals due now join before the new flow
    const FlowId id = add_flow(owner, bytes, weight);
    while (flow_active(id)) {
        const std::vector<double> rates = allocate_rates(active_, config_.capacity_bytes_per_us);
        double t_event = next_arrival_time();
        for (std::size_t i = 0; i < active_.size(); ++i)
            t_event = std::min(t_event, now_ + active_[i].bytes_remaining / rates[i]);
        advance_to(t_event);
    }
    return now_ - start;
}

double noisy_duration(Rng& rng, double true_duration_us, double sigma_rel) {
    if (!(true_duration_us > 0.0))
        throw InternalError("noisy_duration: non-positive duration");
    const double factor = std::max(0.01, 1.0 + sigma_rel * rng.gaussian());
    return true_duration_us * factor;
}

}  // namespace linkfp
