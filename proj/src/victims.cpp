#include "linkfp/victims.hpp"

#include <set>

#include "linkfp/errors.hpp"
#include "linkfp/kvfile.hpp"

namespace linkfp {

void VictimProfile::validate() const {
    if (name.empty()) throw ValidationError("profile: empty name");
    if (code.empty()) throw ValidationError("profile '" + name + "': empty code");
    for (const char* reserved : {kLabelNone, kLabelTarget, kLabelOther})
        if (code == reserved)
            throw ValidationError("profile '" + name + "': code '" + code + "' is reserved");
    if (phases.empty())
        throw ValidationError("profile '" + name + "': phase list is empty");
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const Phase& p = phases[i];
        const std::string where = "profile '" + name + "' phase " + std::to_string(i);
        if (!(p.transfer_bytes >= 0.0)) throw ValidationError(where + ": negative transfer_bytes");
        if (!(p.idle_us >= 0.0)) throw ValidationError(where + ": negative idle_us");
        if (!(p.transfer_bytes + p.idle_us > 0.0))
            throw ValidationError(where + ": transfer_bytes + idle_us must be > 0");
        if (!(p.jitter_rel >= 0.0 && p.jitter_rel < 1.0))
            throw ValidationError(where + ": jitter_rel must be in [0, 1)");
    }
}

double VictimProfile::period_us(double capacity_bytes_per_us) const {
    double period = 0.0;
    for (const Phase& p : phases)
        period += p.transfer_bytes / capacity_bytes_per_us + p.idle_us;
    return period;
}

double VictimProfile::duty_cycle(double capacity_bytes_per_us) const {
    double traffic = 0.0;
    for (const Phase& p : phases) traffic += p.transfer_bytes / capacity_bytes_per_us;
    return traffic / period_us(capacity_bytes_per_us);
}

void ProfileSet::validate() const {
    std::set<std::string> names, codes_seen;
    for (const VictimProfile& p : profiles) {
        p.validate();
        if (!names.insert(p.name).second)
            throw ValidationError("profile set: duplicate name '" + p.name + "'");
        if (!codes_seen.insert(p.code).second)
            throw ValidationError("profile set: duplicate code '" + p.code + "'");
    }
}

const VictimProfile* ProfileSet::find_code(const std::string& code) const {
    for (const VictimProfile& p : profiles)
        if (p.code == code) return &p;
    return nullptr;
}

std::vector<std::string> ProfileSet::codes() const {
    std::vector<std::string> out;
    out.reserve(profiles.size());
    for (const VictimProfile& p : profiles) out.push_back(p.code);
    return out;
}

ProfileSet load_profiles(const std::string& path) {
    const KvFile file = KvFile::parse_file(path);
    ProfileSet set;
    for (const KvSection& section : file.sections) {
        if (section.name == "set") {
            set.name = section.value("name").value_or("");
            set.version = section.value("version").value_or("");
            continue;
        }
        if (section.name != "profile")
            throw ParseError(file.origin + ":" + std::to_string(section.line) +
                             ": unknown section [" + section.name + "]");
        VictimProfile profile;
        for (const KvEntry& e : section.entries) {
            if (e.key == "name") {
                profile.name = e.value;
            } else if (e.key == "code") {
                profile.code = e.value;
            } else if (e.key == "phase") {
                const auto fields = split_csv_list(e.value);
                if (fields.size() != 3)
                    throw ParseError(file.origin + ":" + std::to_string(e.line) +
                                     ": phase needs 3 fields (bytes,idle_us,jitter), got " +
                                     std::to_string(fields.size()));
                KvEntry synth = e;
                Phase phase;
                synth.value = fields[0];
                phase.transfer_bytes = kv_double(file, synth);
                synth.value = fields[1];
                phase.idle_us = kv_double(file, synth);
                synth.value = fields[2];
                phase.jitter_rel = kv_double(file, synth);
                profile.phases.push_back(phase);
            } else {
                throw ParseError(file.origin + ":" + std::to_string(e.line) +
                                 ": unknown profile key '" + e.key + "'");
            }
        }
        set.profiles.push_back(std::move(profile));
    }
    set.validate();
    return set;
}

VictimWalker::VictimWalker(const VictimProfile& profile, double capacity_bytes_per_us,
                           double start_time_us, Rng rng)
    : profile_(profile), capacity_(capacity_bytes_per_us), t_(start_time_us), rng_(rng) {
    profile_.validate();
}

std::optional<Arrival> VictimWalker::next() {
    bool any_traffic = false;
    for (const Phase& p : profile_.phases) any_traffic = any_traffic || p.transfer_bytes > 0.0;
    if (!any_traffic) return std::nullopt;  // idle-only profile emits nothing
    for (;;) {
        const Phase& phase = profile_.phases[phase_idx_];
        phase_idx_ = (phase_idx_ + 1) % profile_.phases.size();
        // Two draws per repetition regardless of jitter, so a profile edit
        // never shifts the stream consumed by later phases.
        const double bytes_factor = 1.0 + phase.jitter_rel * rng_.uniform(-1.0, 1.0);
        const double idle_factor = 1.0 + phase.jitter_rel * rng_.uniform(-1.0, 1.0);
        const double bytes = phase.transfer_bytes * bytes_factor;
        const double arrival_time = t_;
        t_ += bytes / capacity_ + phase.idle_us * idle_factor;
        if (bytes > 0.0 && arrival_time >= 0.0)
            return Arrival{arrival_time, bytes, FlowOwner::Victim, 1.0};
    }
}

std::vector<std::pair<double, double>> victim_schedule(const VictimProfile& profile,
                                                       double horizon_us,
                                                       double capacity_bytes_per_us,
                                                       Rng rng,
                                                       double start_time_us) {
    if (!(horizon_us > 0.0)) throw ValidationError("victim_schedule: horizon must be > 0");
    VictimWalker walker(profile, capacity_bytes_per_us, start_time_us, rng);
    std::vector<std::pair<double, double>> schedule;
    for (;;) {
        const std::optional<Arrival> a = walker.next();
        if (!a || a->time_us >= horizon_us) break;
        schedule.emplace_back(a->time_us, a->bytes);
    }
    return schedule;
}

}  // namespace linkfp
