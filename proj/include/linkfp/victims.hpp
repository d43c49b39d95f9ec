#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "linkfp/dataset.hpp"
#include "linkfp/linksim.hpp"
#include "linkfp/rng.hpp"

namespace linkfp {

// One step of a victim's cyclic I/O pattern: a transfer burst followed by an
// idle gap. jitter_rel perturbs both fields multiplicatively per repetition.
struct Phase {
    double transfer_bytes = 0.0;
    double idle_us = 0.0;
    double jitter_rel = 0.0;  // in [0, 1)
};

// Behavioral stand-in for one accelerator's host communication pattern.
// The phase list repeats cyclically forever.
struct VictimProfile {
    std::string name;
    std::string code;
    std::vector<Phase> phases;

    void validate() const;

    // Zero-jitter cycle length: sum of full-capacity transfer times + idles.
    double period_us(double capacity_bytes_per_us) const;
    // Fraction of the period spent transferring (at full capacity).
    double duty_cycle(double capacity_bytes_per_us) const;
};

struct ProfileSet {
    std::string name;
    std::string version;
    std::vector<VictimProfile> profiles;

    void validate() const;
    const VictimProfile* find_code(const std::string& code) const;
    std::vector<std::string> codes() const;
};

// Parses and validates a profile file:
//
//   [set]
//   name = victims8
//   version = 1
//
//   [profile]
//   name = fir
//   code = F
//   phase = 9600,3000,0.05      # transfer_bytes, idle_us, jitter_rel
//
// Throws ParseError with file/line context or ValidationError naming the
// violated invariant.
ProfileSet load_profiles(const std::string& path);

// Open-loop unrolling of a profile's cycle: arrival k+1 follows arrival k by
// the jittered full-capacity transfer time plus the jittered idle gap.
// Contention stretches in-flight transfers but never shifts later arrivals.
// start_time_us may be negative to start mid-cycle; arrivals before t=0 are
// skipped (their jitter draws are still consumed, keeping streams aligned).
class VictimWalker : public ArrivalSource {
public:
    VictimWalker(const VictimProfile& profile, double capacity_bytes_per_us,
                 double start_time_us, Rng rng);

    std::optional<Arrival> next() override;

private:
    const VictimProfile profile_;
    double capacity_;
    double t_;
    std::size_t phase_idx_ = 0;
    Rng rng_;
};

// Static schedule of (arrival_time_us, transfer_bytes) for arrivals in
// [0, horizon_us), unrolled with the same walk as VictimWalker.
std::vector<std::pair<double, double>> victim_schedule(const VictimProfile& profile,
                                                       double horizon_us,
                                                       double capacity_bytes_per_us,
                                                       Rng rng,
                                                       double start_time_us = 0.0);

}  // namespace linkfp
