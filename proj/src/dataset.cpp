#include "curricuforge/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "curricuforge/errors.hpp"
#include "curricuforge/rng.hpp"

namespace curricuforge {
namespace {

using nlohmann::json;

[[noreturn]] void fail_line(std::size_t line, const std::string& msg) {
    throw IngestionError("line " + std::to_string(line) + ": " + msg);
}

const json& require_field(const json& j, const char* key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end()) fail_line(line, std::string("missing field '") + key + "'");
    return *it;
}

double require_number(const json& j, const char* key, std::size_t line) {
    const json& v = require_field(j, key, line);
    if (!v.is_number()) fail_line(line, std::string("field '") + key + "' is not a number");
    return v.get<double>();
}

std::string require_string(const json& j, const char* key, std::size_t line) {
    const json& v = require_field(j, key, line);
    if (!v.is_string()) fail_line(line, std::string("field '") + key + "' is not a string");
    return v.get<std::string>();
}

json parse_line(const std::string& text, std::size_t line) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail_line(line, "malformed JSON");
    if (!j.is_object()) fail_line(line, "record is not an object");
    return j;
}

std::string padded_id(const std::string& prefix, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%05d", index);
    return prefix + "-" + buf;
}

// Tokens removed by the entity heuristic. Spatial-relation words count as
// function words so that "man on the left of the woman" yields two runs.
bool is_function_word(const std::string& token) {
    static const std::unordered_set<std::string> words = {
        // determiners
        "a", "an", "the", "this", "that", "these", "those", "some", "any", "each", "every",
        "no", "its", "his", "her", "their",
        // prepositions
        "of", "on", "in", "at", "by", "to", "from", "with", "without", "under", "over",
        "beside", "between", "among", "into", "onto", "within", "across", "along", "around",
        "through", "upon", "off", "inside", "outside", "toward", "towards",
        // conjunctions
        "and", "or", "but", "nor", "so", "yet", "while",
        // spatial relations
        "left", "right", "front", "middle", "bottom", "top", "behind", "near", "above",
        "below", "next"};
    return words.contains(token);
}

json sample_record(const PseudoSample& s, const char* split) {
    json rec;
    rec["split"] = split;
    rec["source_id"] = s.source_id;
    rec["sample_id"] = s.sample_id;
    rec["image_w"] = 1;
    rec["image_h"] = 1;
    rec["normalized"] = true;
    rec["bbox"] = {s.bbox.x1, s.bbox.y1, s.bbox.x2, s.bbox.y2};
    rec["expression"] = s.expression;
    rec["feature"] = s.feature;
    if (s.entity_count_override) rec["entity_count"] = *s.entity_count_override;
    return rec;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    return in;
}

} // namespace

const SourceSet& DatasetBundle::source(const std::string& source_id) const {
    for (const SourceSet& s : train_sources) {
        if (s.source_id == source_id) return s;
    }
    throw DataError("unknown source: " + source_id);
}

DatasetBundle load_bundle(const std::string& path) {
    std::ifstream in = open_input(path);
    DatasetBundle bundle;
    std::unordered_set<std::string> seen_ids;
    std::size_t source_index_limit = 0;
    std::string text;
    std::size_t line = 0;
    bool saw_header = false;

    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        json j = parse_line(text, line);

        if (!saw_header) {
            const json& dim = require_field(j, "feature_dim", line);
            if (!dim.is_number_integer() || dim.get<long long>() < 1) {
                fail_line(line, "feature_dim must be a positive integer");
            }
            bundle.feature_dim = dim.get<int>();
            const json& sources = require_field(j, "sources", line);
            if (!sources.is_array()) fail_line(line, "sources must be an array");
            for (const json& s : sources) {
                SourceSet set;
                if (s.is_string()) {
                    set.source_id = s.get<std::string>();
                } else if (s.is_object()) {
                    set.source_id = require_string(s, "source_id", line);
                    if (s.contains("kind")) set.kind = require_string(s, "kind", line);
                } else {
                    fail_line(line, "source entry must be a string or object");
                }
                bundle.train_sources.push_back(std::move(set));
            }
            source_index_limit = bundle.train_sources.size();
            saw_header = true;
            continue;
        }

        PseudoSample s;
        const std::string split = require_string(j, "split", line);
        if (split != "train" && split != "val" && split != "test") {
            fail_line(line, "split must be train, val or test");
        }
        s.sample_id = require_string(j, "sample_id", line);
        s.source_id = require_string(j, "source_id", line);
        s.expression = require_string(j, "expression", line);
        if (!seen_ids.insert(s.sample_id).second) {
            fail_line(line, "duplicate sample_id '" + s.sample_id + "'");
        }

        const double image_w = require_number(j, "image_w", line);
        const double image_h = require_number(j, "image_h", line);
        if (!(image_w > 0.0) || !(image_h > 0.0)) {
            fail_line(line, "image dimensions must be positive");
        }
        const json& normalized = require_field(j, "normalized", line);
        if (!normalized.is_boolean()) fail_line(line, "normalized must be a boolean");

        const json& bbox = require_field(j, "bbox", line);
        if (!bbox.is_array() || bbox.size() != 4) fail_line(line, "bbox must hold 4 numbers");
        for (const json& v : bbox) {
            if (!v.is_number()) fail_line(line, "bbox must hold 4 numbers");
        }
        s.bbox = {bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(),
                  bbox[3].get<double>()};
        if (!normalized.get<bool>()) {
            s.bbox.x1 /= image_w;
            s.bbox.x2 /= image_w;
            s.bbox.y1 /= image_h;
            s.bbox.y2 /= image_h;
        }
        if (!box_is_valid(s.bbox)) {
            fail_line(line, "bbox has non-finite or unordered corners");
        }
        if (!box_in_unit_range(s.bbox)) {
            fail_line(line, "bbox falls outside the unit range after normalization");
        }

        const json& feature = require_field(j, "feature", line);
        if (!feature.is_array() ||
            feature.size() != static_cast<std::size_t>(bundle.feature_dim)) {
            fail_line(line, "feature length does not match declared feature_dim");
        }
        s.feature.reserve(feature.size());
        for (const json& v : feature) {
            if (!v.is_number()) fail_line(line, "feature must hold numbers");
            s.feature.push_back(v.get<double>());
        }

        if (j.contains("entity_count")) {
            const json& ec = j["entity_count"];
            if (!ec.is_number_integer() || ec.get<long long>() < 1) {
                fail_line(line, "entity_count must be a positive integer");
            }
            s.entity_count_override = ec.get<int>();
        }

        if (split == "val") {
            bundle.val.push_back(std::move(s));
        } else if (split == "test") {
            bundle.test.push_back(std::move(s));
        } else {
            bool placed = false;
            for (std::size_t i = 0; i < source_index_limit; ++i) {
                if (bundle.train_sources[i].source_id == s.source_id) {
                    bundle.train_sources[i].samples.push_back(std::move(s));
                    placed = true;
                    break;
                }
            }
            if (!placed) fail_line(line, "train record names undeclared source '" + s.source_id + "'");
        }
    }

    if (!saw_header) throw IngestionError(path + ": no records");
    return bundle;
}

void save_bundle(const DatasetBundle& bundle, const std::string& path,
                 const std::string& provenance) {
    std::ofstream out = open_output(path);
    json header;
    header["feature_dim"] = bundle.feature_dim;
    header["sources"] = json::array();
    for (const SourceSet& s : bundle.train_sources) {
        header["sources"].push_back({{"source_id", s.source_id}, {"kind", s.kind}});
    }
    if (!provenance.empty()) {
        json cfg = json::parse(provenance, nullptr, false);
        if (cfg.is_discarded()) throw ConfigError("provenance is not valid JSON");
        header["config"] = std::move(cfg);
    }
    out << header.dump() << '\n';
    for (const SourceSet& src : bundle.train_sources) {
        for (const PseudoSample& s : src.samples) {
            out << sample_record(s, "train").dump() << '\n';
        }
    }
    for (const PseudoSample& s : bundle.val) out << sample_record(s, "val").dump() << '\n';
    for (const PseudoSample& s : bundle.test) out << sample_record(s, "test").dump() << '\n';
    if (!out) throw DataError("write failed: " + path);
}

int entity_count(const std::string& expression) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : expression) {
        const unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));

    int runs = 0;
    bool in_run = false;
    for (const std::string& t : tokens) {
        if (is_function_word(t)) {
            in_run = false;
        } else {
            if (!in_run) ++runs;
            in_run = true;
        }
    }
    return std::max(runs, 1);
}

int entity_count(const PseudoSample& sample) {
    if (sample.entity_count_override) return *sample.entity_count_override;
    return entity_count(sample.expression);
}

double avg_entities(const SourceSet& source) {
    if (source.samples.empty()) throw DataError("source '" + source.source_id + "' is empty");
    double sum = 0.0;
    for (const PseudoSample& s : source.samples) sum += entity_count(s);
    return sum / static_cast<double>(source.samples.size());
}

namespace {

// Hidden ground-truth map of the synthetic world: centers and half-sizes are
// literally linear in the features, folded and clamped only to keep boxes
// valid. A logistic-decoding model can only approximate this family, so
// training quality stays visible in top-1 accuracy instead of saturating.
struct WorldMap {
    int d;
    std::vector<double> weight; // 4 x d, row-major
    std::array<double, 4> bias;

    explicit WorldMap(int dim, Rng& rng) : d(dim), weight(static_cast<std::size_t>(4) * dim) {
        const double row_scale[4] = {0.26, 0.26, 0.045, 0.045};
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < d; ++c) {
                weight[static_cast<std::size_t>(r) * d + c] =
                    rng.next_gaussian() * row_scale[r] / std::sqrt(static_cast<double>(d));
            }
        }
        bias[0] = 0.5 + rng.next_gaussian() * 0.05;
        bias[1] = 0.5 + rng.next_gaussian() * 0.05;
        bias[2] = 0.085 + rng.next_gaussian() * 0.015;
        bias[3] = 0.085 + rng.next_gaussian() * 0.015;
    }

    Box true_box(const std::vector<double>& feature) const {
        std::array<double, 4> u = bias;
        for (int r = 0; r < 4; ++r) {
            const double* row = weight.data() + static_cast<std::size_t>(r) * d;
            for (int c = 0; c < d; ++c) u[r] += row[c] * feature[c];
        }
        const double cx = std::clamp(u[0], 0.03, 0.97);
        const double cy = std::clamp(u[1], 0.03, 0.97);
        const double hw = std::clamp(std::abs(u[2]), 0.015, 0.45);
        const double hh = std::clamp(std::abs(u[3]), 0.015, 0.45);
        return {std::clamp(cx - hw, 0.0, 1.0), std::clamp(cy - hh, 0.0, 1.0),
                std::clamp(cx + hw, 0.0, 1.0), std::clamp(cy + hh, 0.0, 1.0)};
    }
};

std::vector<double> random_feature(int d, Rng& rng) {
    std::vector<double> f(d);
    for (double& v : f) v = rng.next_gaussian();
    return f;
}

std::string synth_expression(int entities, Rng& rng) {
    static const char* nouns[] = {"man", "woman", "dog", "cat", "car", "chair", "lamp", "cup",
                                  "table", "bird", "boy", "girl", "ball", "tree", "horse", "book"};
    static const char* adjectives[] = {"red", "blue", "green", "small", "large", "young", "old",
                                       "striped"};
    static const char* connectors[] = {" near the ", " above the ", " below the ",
                                       " next to the "};
    std::string expr;
    for (int i = 0; i < entities; ++i) {
        if (i > 0) expr += connectors[rng.next_below(4)];
        if (rng.next_unit() < 0.3) {
            expr += adjectives[rng.next_below(8)];
            expr += ' ';
        }
        expr += nouns[rng.next_below(16)];
    }
    return expr;
}

Box jittered_box(const Box& truth, double sigma, Rng& rng) {
    double g[4] = {rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian(),
                   rng.next_gaussian()};
    double x1 = truth.x1 + sigma * g[0];
    double y1 = truth.y1 + sigma * g[1];
    double x2 = truth.x2 + sigma * g[2];
    double y2 = truth.y2 + sigma * g[3];
    if (x1 > x2) std::swap(x1, x2);
    if (y1 > y2) std::swap(y1, y2);
    return {std::clamp(x1, 0.0, 1.0), std::clamp(y1, 0.0, 1.0), std::clamp(x2, 0.0, 1.0),
            std::clamp(y2, 0.0, 1.0)};
}

// Junk boxes are tiny and uniformly placed: they almost never overlap a
// competent prediction, so their reliability lands at exactly zero.
Box junk_box(Rng& rng) {
    const double cx = rng.next_unit();
    const double cy = rng.next_unit();
    const double w = rng.next_range(0.015, 0.06);
    const double h = rng.next_range(0.015, 0.06);
    return {std::clamp(cx - w / 2.0, 0.0, 1.0), std::clamp(cy - h / 2.0, 0.0, 1.0),
            std::clamp(cx + w / 2.0, 0.0, 1.0), std::clamp(cy + h / 2.0, 0.0, 1.0)};
}

void validate_world_config(const SyntheticWorldConfig& cfg) {
    if (cfg.feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
    if (cfg.sources.empty()) throw ConfigError("at least one source profile is required");
    if (cfg.val_size < 1 || cfg.test_size < 1) {
        throw ConfigError("val_size and test_size must be >= 1");
    }
    std::unordered_set<std::string> ids;
    for (const SourceProfile& p : cfg.sources) {
        if (p.source_id.empty()) throw ConfigError("source_id must be non-empty");
        if (!ids.insert(p.source_id).second) {
            throw ConfigError("duplicate source_id '" + p.source_id + "'");
        }
        if (p.num_samples < 1) throw ConfigError("num_samples must be >= 1");
        if (!(p.rho >= 0.0 && p.rho <= 1.0)) throw ConfigError("rho must lie in [0,1]");
        if (!(p.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
        if (p.min_entities < 1 || p.max_entities < p.min_entities) {
            throw ConfigError("entity range must satisfy 1 <= min <= max");
        }
    }
}

} // namespace

SyntheticWorld generate_synthetic(const SyntheticWorldConfig& cfg) {
    validate_world_config(cfg);
    SyntheticWorld world;
    world.bundle.feature_dim = cfg.feature_dim;

    Rng world_rng(mix_seed(cfg.seed, 0));
    const WorldMap map(cfg.feature_dim, world_rng);

    for (std::size_t si = 0; si < cfg.sources.size(); ++si) {
        const SourceProfile& p = cfg.sources[si];
        Rng rng(mix_seed(cfg.seed, 100 + si));

        std::vector<int> order(p.num_samples);
        for (int i = 0; i < p.num_samples; ++i) order[i] = i;
        rng.shuffle(order);
        const int junk_count = static_cast<int>(p.rho * p.num_samples);
        std::vector<char> junk(p.num_samples, 0);
        for (int i = 0; i < junk_count; ++i) junk[order[i]] = 1;

        SourceSet set;
        set.source_id = p.source_id;
        set.kind = p.kind;
        set.samples.reserve(p.num_samples);
        for (int i = 0; i < p.num_samples; ++i) {
            PseudoSample s;
            s.sample_id = padded_id(p.source_id, i);
            s.source_id = p.source_id;
            s.feature = random_feature(cfg.feature_dim, rng);
            const int entities =
                p.min_entities +
                static_cast<int>(rng.next_below(p.max_entities - p.min_entities + 1));
            s.expression = synth_expression(entities, rng);
            const Box truth = map.true_box(s.feature);
            s.bbox = jittered_box(truth, p.sigma, rng);
            if (junk[i]) s.bbox = junk_box(rng);
            world.manifest[s.sample_id] = {junk[i] != 0, truth};
            set.samples.push_back(std::move(s));
        }
        world.bundle.train_sources.push_back(std::move(set));
    }

    const auto make_labeled = [&](const char* prefix, int count, std::uint64_t stream) {
        Rng rng(mix_seed(cfg.seed, stream));
        std::vector<PseudoSample> out;
        out.reserve(count);
        for (int i = 0; i < count; ++i) {
            PseudoSample s;
            s.sample_id = padded_id(prefix, i);
            s.feature = random_feature(cfg.feature_dim, rng);
            s.expression = synth_expression(1 + static_cast<int>(rng.next_below(2)), rng);
            s.bbox = map.true_box(s.feature);
            out.push_back(std::move(s));
        }
        return out;
    };
    world.bundle.val = make_labeled("val", cfg.val_size, 2);
    world.bundle.test = make_labeled("test", cfg.test_size, 3);
    return world;
}

void save_manifest(const Manifest& manifest, const std::string& path,
                   const std::string& provenance) {
    std::ofstream out = open_output(path);
    if (!provenance.empty()) {
        json cfg = json::parse(provenance, nullptr, false);
        if (cfg.is_discarded()) throw ConfigError("provenance is not valid JSON");
        out << json{{"config", std::move(cfg)}}.dump() << '\n';
    }
    for (const auto& [id, entry] : manifest) {
        json rec;
        rec["sample_id"] = id;
        rec["is_junk"] = entry.is_junk;
        rec["true_box"] = {entry.true_box.x1, entry.true_box.y1, entry.true_box.x2,
                           entry.true_box.y2};
        out << rec.dump() << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in = open_input(path);
    Manifest manifest;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        json j = parse_line(text, line);
        if (j.contains("config") && !j.contains("sample_id")) continue; // provenance header
        const std::string id = require_string(j, "sample_id", line);
        const json& flag = require_field(j, "is_junk", line);
        if (!flag.is_boolean()) fail_line(line, "is_junk must be a boolean");
        const json& tb = require_field(j, "true_box", line);
        if (!tb.is_array() || tb.size() != 4) fail_line(line, "true_box must hold 4 numbers");
        ManifestEntry entry;
        entry.is_junk = flag.get<bool>();
        entry.true_box = {tb[0].get<double>(), tb[1].get<double>(), tb[2].get<double>(),
                          tb[3].get<double>()};
        if (!manifest.emplace(id, entry).second) {
            fail_line(line, "duplicate sample_id '" + id + "'");
        }
    }
    return manifest;
}

} // namespace curricuforge
