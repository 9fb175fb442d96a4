#pragma once

#include <string>
#include <vector>

#include "curricuforge/curriculum.hpp"
#include "curricuforge/dataset.hpp"

namespace curricuforge {

struct ReportPaths {
    std::vector<std::string> histogram_csvs; // one per (measurer, source) pair
    std::string pr_csv;
    std::string zero_csv;
    std::string junk_csv; // empty when no manifest was given
};

/// Re-derives every measurer and reliability table from the bundle and the
/// configuration the result was produced with, then writes into out_dir:
/// (a) hist_<measurer>_<source>.csv for every pair, (b) pr_curve.csv sweeping
/// each selection step over the threshold grid from just below 1 down to 0,
/// (c) zero_proportions.csv with each source's exact-zero reliability share,
/// and (d) junk_recall.csv when a manifest is supplied. Output bytes are a
/// deterministic function of the inputs. Results that reference ids or
/// sources absent from the bundle are data errors.
ReportPaths write_reports(const DatasetBundle& bundle, const SelectionResult& result,
                          const CurriculumConfig& cfg, const Manifest* manifest,
                          const std::string& out_dir, const std::string& provenance = {});

} // namespace curricuforge
