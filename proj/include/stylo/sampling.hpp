#pragma once

#include "stylo/corpus.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stylo {

struct SplitConfig {
    std::size_t train_per_play = 235;
    std::size_t val_per_play = 15;
    std::size_t test_in_per_play = 50;
    std::size_t test_out_per_play = 200;
    std::size_t disputed_per_play = 200;
    std::size_t timeline_per_play = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Where a sample ended up. `train`/`val` never reach analytics;
/// the remaining four are the prediction partitions.
enum class Partition { train, val, test_in, test_out, disputed, timeline };

std::string_view to_string(Partition p);
Partition parse_partition(std::string_view s);

/// Short labels used in prediction files: in, out, disputed, timeline.
std::string_view prediction_label(Partition p);
Partition parse_prediction_label(std::string_view s);

struct DatasetSplit {
    std::map<std::string, std::string> holdout; ///< author -> withheld play_id
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test_in;
    std::vector<std::string> test_out;
    std::vector<std::string> disputed;
    std::vector<std::string> timeline;
    std::uint64_t seed = 0;

    const std::vector<std::string>& ids(Partition p) const;
    std::vector<std::string>& ids(Partition p);
};

inline constexpr Partition kAllPartitions[] = {Partition::train,    Partition::val,      Partition::test_in,
                                               Partition::test_out, Partition::disputed, Partition::timeline};

/// Chooses one holdout play per author uniformly at random, then draws
/// train/val/test_in ids from every other play and test_out ids from the
/// holdout play, without replacement.
///
/// Plays and sample ids are sorted before drawing and every play and author
/// gets its own generator stream derived from (seed, play_id or author), so
/// the result does not depend on input order. Within a play the first
/// train+val+test_in positions of a partial shuffle become train, then val,
/// then test_in. Ids in each list are emitted sorted.
///
/// Throws DataError naming the play when a play has too few samples.
DatasetSplit build_splits(std::span<const SegmentedPlay> primary, const SplitConfig& cfg);

/// Draws disputed_per_play ids from each disputed play. Throws DataError
/// naming a play with fewer samples.
std::vector<std::string> build_disputed_set(std::span<const SegmentedPlay> disputed, const SplitConfig& cfg);

/// Draws timeline_per_play ids from each comparison play. Throws DataError
/// naming a play with fewer samples.
std::vector<std::string> build_timeline_set(std::span<const SegmentedPlay> comparison, const SplitConfig& cfg);

/// Checks the DatasetSplit invariants against the plays it was built from:
/// pairwise-disjoint lists, one holdout per author, train/val/test_in from
/// non-holdout plays and test_out from holdout plays. Returns the violations
/// found (empty when valid).
std::vector<std::string> check_split(const DatasetSplit& split, std::span<const SegmentedPlay> primary);

/// sample_id -> partition lookup over a split.
class SplitIndex {
public:
    explicit SplitIndex(const DatasetSplit& split);

    std::optional<Partition> find(std::string_view sample_id) const;

    /// Registers an extra id (e.g. a merged long-text document) under a partition.
    void add(std::string sample_id, Partition p);

private:
    std::unordered_map<std::string, Partition> map_;
};

} // namespace stylo
