#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "curricuforge/geometry.hpp"

namespace curricuforge {

// One pseudo triplet: a feature vector standing in for the (image, expression)
// pair, the expression text, and a pseudo box label. For val/test samples the
// bbox field holds the ground-truth box instead.
struct PseudoSample {
    std::string sample_id;
    std::string source_id;
    std::vector<double> feature;
    std::string expression;
    Box bbox;
    std::optional<int> entity_count_override;

    bool operator==(const PseudoSample&) const = default;
};

struct SourceSet {
    std::string source_id;
    std::string kind;
    std::vector<PseudoSample> samples;

    bool operator==(const SourceSet&) const = default;
};

struct DatasetBundle {
    int feature_dim = 0;
    std::vector<SourceSet> train_sources;
    std::vector<PseudoSample> val;
    std::vector<PseudoSample> test;

    bool operator==(const DatasetBundle&) const = default;

    const SourceSet& source(const std::string& source_id) const;
};

/// Reads a line-delimited bundle file. The first line is a header object
/// {"feature_dim": d, "sources": [{"source_id", "kind"}...]}; every further
/// line is a record {"split", "source_id", "sample_id", "image_w", "image_h",
/// "bbox": [x1,y1,x2,y2], "normalized", "expression", "feature",
/// "entity_count"?}. Pixel-space boxes (normalized=false) are divided by the
/// record's image dimensions. Malformed records raise IngestionError naming
/// the 1-based line number.
DatasetBundle load_bundle(const std::string& path);

/// Inverse of load_bundle. Output is deterministic: fixed key order and
/// shortest round-trip float formatting, so equal bundles serialize to equal
/// bytes. A non-empty provenance JSON text is embedded in the header under
/// "config"; the loader ignores it.
void save_bundle(const DatasetBundle& bundle, const std::string& path,
                 const std::string& provenance = {});

/// Entity count heuristic: lowercase, split on non-alphanumeric characters,
/// drop determiners, prepositions, conjunctions and spatial-relation words,
/// then count maximal contiguous runs of surviving tokens. Never below 1.
int entity_count(const std::string& expression);

/// Heuristic count unless the sample carries an explicit override.
int entity_count(const PseudoSample& sample);

double avg_entities(const SourceSet& source);

struct SourceProfile {
    std::string source_id;
    std::string kind;
    int num_samples = 0;
    double sigma = 0.0;        // stddev of gaussian corner jitter
    double rho = 0.0;          // fraction of samples replaced by junk boxes
    int min_entities = 1;      // expression complexity range, inclusive
    int max_entities = 1;
};

struct SyntheticWorldConfig {
    int feature_dim = 8;
    std::vector<SourceProfile> sources;
    int val_size = 500;
    int test_size = 500;
    std::uint64_t seed = 0;
};

struct ManifestEntry {
    bool is_junk = false;
    Box true_box;

    bool operator==(const ManifestEntry&) const = default;
};

using Manifest = std::map<std::string, ManifestEntry>;

struct SyntheticWorld {
    DatasetBundle bundle;
    Manifest manifest;
};

/// Builds a world from a hidden linear map G: feature -> Box. Clean val and
/// test labels come from G; each train source holds G(feature) with gaussian
/// corner jitter, except exactly floor(rho*N) samples per source whose boxes
/// are replaced by uniform random junk. The manifest records is_junk and the
/// true box for every train sample; selection code never reads it.
SyntheticWorld generate_synthetic(const SyntheticWorldConfig& cfg);

/// Manifest files are line-delimited {"sample_id", "is_junk", "true_box"}
/// records sorted by sample_id, after an optional {"config": ...} provenance
/// line which the loader skips.
void save_manifest(const Manifest& manifest, const std::string& path,
                   const std::string& provenance = {});
Manifest load_manifest(const std::string& path);

} // namespace curricuforge
