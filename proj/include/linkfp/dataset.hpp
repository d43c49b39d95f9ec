#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace linkfp {

// Labels reserved by the pipeline; victim profile codes must not collide.
inline constexpr const char* kLabelNone = "NONE";
inline constexpr const char* kLabelTarget = "TARGET";
inline constexpr const char* kLabelOther = "OTHER";

// Global min/max recorded when a dataset was normalized. Test-time data is
// rescaled with the training set's meta, never its own.
struct NormMeta {
    double min = 0.0;
    double max = 1.0;
};

// Row-major feature matrix plus one label per row.
struct LabeledDataset {
    std::size_t n_features = 0;
    std::vector<double> values;
    std::vector<std::string> labels;
    std::optional<NormMeta> norm_meta;

    std::size_t n_rows() const { return labels.size(); }

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * n_features, n_features};
    }
    std::span<double> row(std::size_t i) {
        return {values.data() + i * n_features, n_features};
    }

    void add_row(std::span<const double> features, const std::string& label);

    // Unique labels in lexicographic order; the canonical class order used
    // by every model and report.
    std::vector<std::string> class_codes() const;
    std::map<std::string, int> class_index() const;
    std::map<std::string, std::size_t> class_counts() const;
};

struct SplitPair {
    LabeledDataset train;
    LabeledDataset test;
    std::uint64_t split_seed = 0;
};

// x' = (x - min) / (max - min) with one global (min, max) over the whole
// matrix, recorded in norm_meta. Throws ValidationError on max == min.
LabeledDataset normalize_minmax(const LabeledDataset& dataset);

// Rescale with previously recorded meta, clamping into [0, 1].
LabeledDataset apply_minmax(const LabeledDataset& dataset, NormMeta meta);

// Per-class seeded shuffle; the first ceil(train_fraction * n_c) rows of each
// class go to train. Every class needs >= 2 rows.
SplitPair split_stratified(const LabeledDataset& dataset, double train_fraction,
                           std::uint64_t seed);

// Open-world restructuring: labels collapse to {TARGET, OTHER}; rows of
// unknown_codes are deleted from train only, the test partition keeps them
// (relabeled OTHER).
SplitPair make_open_world(const SplitPair& pair, const std::string& target_code,
                          const std::set<std::string>& unknown_codes);

// CSV persistence: header "f0,..,f{N-1},label", one row per trace, decimal
// point '.', LF line endings. Values round-trip to full double precision.
void save_csv(const LabeledDataset& dataset, const std::string& path);
LabeledDataset load_csv(const std::string& path);

// Formats a double so that parsing it back returns the identical bits.
std::string format_double(double v);

}  // namespace linkfp
