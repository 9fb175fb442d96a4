#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curricuforge/dataset.hpp"
#include "curricuforge/measurer.hpp"

namespace curricuforge {

// Reliability values for every sample of one source under one measurer, in
// the source's sample order. measurer_id == source_id marks source-specific
// reliability; different ids mark cross-source reliability.
struct ReliabilitySet {
    std::string measurer_id;
    std::string source_id;
    std::vector<std::string> sample_ids;
    std::vector<double> values;
};

// Index over a ReliabilitySet: m uniform bins on [0,1], half-open except the
// last, plus the raw values so subset queries stay exact regardless of m.
// zero_count tracks samples at reliability exactly 0.
struct ReliabilityHistogram {
    int bins = 0;
    std::string measurer_id;
    std::string source_id;
    std::vector<std::string> sample_ids;
    std::vector<double> values;
    std::vector<std::vector<std::uint32_t>> members; // per-bin indices into sample_ids
    std::size_t zero_count = 0;
};

/// r(sample) = iou(predicted box, pseudo box) for trained measurers, table
/// lookup for external ones. Values inherit iou's [0,1] range.
ReliabilitySet score_reliability(const MeasurerHandle& m, const SourceSet& source,
                                 std::string measurer_id = {});

ReliabilityHistogram build_histogram(const ReliabilitySet& rset, int bins);

/// Number of samples with reliability in the closed interval [threshold, 1].
/// Threshold 0 selects everything.
std::size_t subset_count(const ReliabilityHistogram& h, double threshold);

/// The sample ids counted by subset_count, in scoring order.
std::vector<std::string> select_subset(const ReliabilityHistogram& h, double threshold);

/// CSV rows (bin_lo,bin_hi,count) after a header row, closed by a
/// "zero_count,<n>" footer. A nonempty provenance JSON string is embedded as
/// a leading "# config: ..." comment line.
void save_histogram_csv(const ReliabilityHistogram& h, const std::string& path,
                        const std::string& provenance = {});

/// Line-delimited {"sample_id", "reliability"} records, the same shape
/// import_external_scores reads. Nonempty provenance becomes a leading
/// {"config": ...} header record.
void save_reliability(const ReliabilitySet& rset, const std::string& path,
                      const std::string& provenance = {});

} // namespace curricuforge
