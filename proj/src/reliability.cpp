#include "curricuforge/reliability.hpp"

#include <fstream>

#include <json.hpp>

#include "curricuforge/errors.hpp"
#include "curricuforge/geometry.hpp"
#include "curricuforge/text.hpp"

namespace curricuforge {
namespace {

void check_threshold(double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw ConfigError("threshold must lie in [0,1]");
    }
}

} // namespace

ReliabilitySet score_reliability(const MeasurerHandle& m, const SourceSet& source,
                                 std::string measurer_id) {
    ReliabilitySet rset;
    rset.measurer_id = std::move(measurer_id);
    rset.source_id = source.source_id;
    rset.sample_ids.reserve(source.samples.size());
    rset.values.reserve(source.samples.size());
    for (const PseudoSample& s : source.samples) {
        const double r = m.is_trained() ? iou(predict(m, s.feature), s.bbox)
                                        : external_score(m, s.sample_id);
        rset.sample_ids.push_back(s.sample_id);
        rset.values.push_back(r);
    }
    return rset;
}

ReliabilityHistogram build_histogram(const ReliabilitySet& rset, int bins) {
    if (bins < 1) throw ConfigError("histogram needs at least one bin");
    ReliabilityHistogram h;
    h.bins = bins;
    h.measurer_id = rset.measurer_id;
    h.source_id = rset.source_id;
    h.sample_ids = rset.sample_ids;
    h.values = rset.values;
    h.members.resize(bins);
    for (std::uint32_t i = 0; i < h.values.size(); ++i) {
        const double r = h.values[i];
        if (!(r >= 0.0 && r <= 1.0)) {
            throw DataError("reliability of '" + h.sample_ids[i] + "' outside [0,1]");
        }
        const int bin = std::min(static_cast<int>(r * bins), bins - 1);
        h.members[bin].push_back(i);
        if (r == 0.0) ++h.zero_count;
    }
    return h;
}

std::size_t subset_count(const ReliabilityHistogram& h, double threshold) {
    check_threshold(threshold);
    std::size_t count = 0;
    for (double v : h.values) {
        if (v >= threshold) ++count;
    }
    return count;
}

std::vector<std::string> select_subset(const ReliabilityHistogram& h, double threshold) {
    check_threshold(threshold);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < h.values.size(); ++i) {
        if (h.values[i] >= threshold) ids.push_back(h.sample_ids[i]);
    }
    return ids;
}

void save_histogram_csv(const ReliabilityHistogram& h, const std::string& path,
                        const std::string& provenance) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    if (!provenance.empty()) out << "# config: " << provenance << '\n';
    out << "bin_lo,bin_hi,count\n";
    for (int b = 0; b < h.bins; ++b) {
        const double lo = static_cast<double>(b) / h.bins;
        const double hi = static_cast<double>(b + 1) / h.bins;
        out << format_double(lo) << ',' << format_double(hi) << ',' << h.members[b].size()
            << '\n';
    }
    out << "zero_count," << h.zero_count << '\n';
    if (!out) throw DataError("write failed: " + path);
}

void save_reliability(const ReliabilitySet& rset, const std::string& path,
                      const std::string& provenance) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    if (!provenance.empty()) out << "{\"config\":" << provenance << "}\n";
    for (std::size_t i = 0; i < rset.sample_ids.size(); ++i) {
        nlohmann::json rec;
        rec["reliability"] = rset.values[i];
        rec["sample_id"] = rset.sample_ids[i];
        out << rec.dump() << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

} // namespace curricuforge
