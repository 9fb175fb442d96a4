#include "curricuforge/measurer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "curricuforge/errors.hpp"
#include "curricuforge/rng.hpp"
#include "curricuforge/serial.hpp"
#include "curricuforge/text.hpp"

namespace curricuforge {
namespace {

using nlohmann::json;

bool all_finite(const ToyGroundingModel& m) {
    for (double w : m.weight) {
        if (!std::isfinite(w)) return false;
    }
    for (double b : m.bias) {
        if (!std::isfinite(b)) return false;
    }
    return true;
}

BoxParam forward(const ToyGroundingModel& m, const std::vector<double>& feature) {
    std::array<double, 4> u = m.bias;
    for (int r = 0; r < 4; ++r) {
        const double* row = m.weight.data() + static_cast<std::size_t>(r) * m.feature_dim;
        for (int c = 0; c < m.feature_dim; ++c) u[r] += row[c] * feature[c];
    }
    return {u[0], u[1], u[2], u[3]};
}

void append_double(std::string& out, double v) { out += format_double(v); }

std::vector<double> parse_row(const std::string& text, std::size_t expect, std::size_t line) {
    std::vector<double> row;
    row.reserve(expect);
    const char* p = text.data();
    const char* end = p + text.size();
    while (p < end) {
        while (p < end && *p == ' ') ++p;
        if (p == end) break;
        double v = 0.0;
        const auto res = std::from_chars(p, end, v);
        if (res.ec != std::errc()) {
            throw IngestionError("line " + std::to_string(line) + ": malformed number");
        }
        row.push_back(v);
        p = res.ptr;
    }
    if (row.size() != expect) {
        throw IngestionError("line " + std::to_string(line) + ": expected " +
                             std::to_string(expect) + " numbers, found " +
                             std::to_string(row.size()));
    }
    return row;
}

} // namespace

MeasurerHandle MeasurerHandle::trained(ToyGroundingModel m) {
    MeasurerHandle h;
    h.model = std::make_shared<const ToyGroundingModel>(std::move(m));
    return h;
}

MeasurerHandle MeasurerHandle::external(std::map<std::string, double> table) {
    MeasurerHandle h;
    h.scores = std::make_shared<const std::map<std::string, double>>(std::move(table));
    return h;
}

ToyGroundingModel train_model(const SampleRefs& samples, int feature_dim,
                              const TrainConfig& cfg) {
    if (samples.empty()) throw DataError("cannot train on an empty sample set");
    if (feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(cfg.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    for (const PseudoSample* s : samples) {
        if (s->feature.size() != static_cast<std::size_t>(feature_dim)) {
            throw DataError("sample '" + s->sample_id + "' feature dimension mismatch");
        }
    }

    ToyGroundingModel m;
    m.feature_dim = feature_dim;
    m.weight.assign(static_cast<std::size_t>(4) * feature_dim, 0.0);
    m.config = cfg;
    m.epoch_losses.reserve(cfg.epochs);

    const std::size_t n = samples.size();
    const std::size_t wsize = m.weight.size();
    std::vector<double> vel_w(wsize, 0.0);
    std::array<double, 4> vel_b{};
    std::vector<double> grad_w(wsize, 0.0);
    std::array<double, 4> grad_b{};
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(mix_seed(cfg.seed, 1));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        const double lr =
            cfg.cosine_decay
                ? cfg.learning_rate * 0.5 *
                      (1.0 + std::cos(std::numbers::pi * epoch / cfg.epochs))
                : cfg.learning_rate;
        double epoch_loss = 0.0;

        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            const double inv = 1.0 / static_cast<double>(stop - start);
            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            grad_b.fill(0.0);

            for (std::size_t k = start; k < stop; ++k) {
                const PseudoSample& s = *samples[order[k]];
                const BoxParam u = forward(m, s.feature);
                if (!(std::isfinite(u.cx) && std::isfinite(u.cy) && std::isfinite(u.w) &&
                      std::isfinite(u.h))) {
                    throw TrainingError("training diverged to non-finite activations at epoch " +
                                        std::to_string(epoch));
                }
                const LossGrad g = grounding_loss_grad(u, s.bbox, cfg.lambda);
                epoch_loss += g.value;
                for (int r = 0; r < 4; ++r) {
                    const double gr = g.d[r] * inv;
                    double* grow = grad_w.data() + static_cast<std::size_t>(r) * feature_dim;
                    const double* f = s.feature.data();
                    for (int c = 0; c < feature_dim; ++c) grow[c] += gr * f[c];
                    grad_b[r] += gr;
                }
            }

            if (cfg.optimizer == Optimizer::momentum) {
                for (std::size_t i = 0; i < wsize; ++i) {
                    vel_w[i] = cfg.momentum * vel_w[i] - lr * grad_w[i];
                    m.weight[i] += vel_w[i];
                }
                for (int r = 0; r < 4; ++r) {
                    vel_b[r] = cfg.momentum * vel_b[r] - lr * grad_b[r];
                    m.bias[r] += vel_b[r];
                }
            } else {
                for (std::size_t i = 0; i < wsize; ++i) m.weight[i] -= lr * grad_w[i];
                for (int r = 0; r < 4; ++r) m.bias[r] -= lr * grad_b[r];
            }

            if (!all_finite(m)) {
                throw TrainingError("training diverged to non-finite weights at epoch " +
                                    std::to_string(epoch));
            }
        }

        epoch_loss /= static_cast<double>(n);
        if (!std::isfinite(epoch_loss)) {
            throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch));
        }
        m.epoch_losses.push_back(epoch_loss);
    }
    m.final_loss = m.epoch_losses.back();
    return m;
}

MeasurerHandle train_measurer(const SourceSet& source, int feature_dim, const TrainConfig& cfg) {
    if (source.samples.empty()) {
        throw DataError("source '" + source.source_id + "' is empty");
    }
    SampleRefs refs;
    refs.reserve(source.samples.size());
    for (const PseudoSample& s : source.samples) refs.push_back(&s);
    return MeasurerHandle::trained(train_model(refs, feature_dim, cfg));
}

Box predict(const ToyGroundingModel& m, const std::vector<double>& feature) {
    if (feature.size() != static_cast<std::size_t>(m.feature_dim)) {
        throw DataError("feature dimension mismatch");
    }
    return decode(forward(m, feature));
}

Box predict(const MeasurerHandle& m, const std::vector<double>& feature) {
    if (!m.is_trained()) {
        throw ConfigError("external score tables cannot predict boxes");
    }
    return predict(*m.model, feature);
}

double evaluate_top1(const MeasurerHandle& m, const std::vector<PseudoSample>& labeled,
                     double iou_threshold) {
    if (labeled.empty()) throw DataError("cannot evaluate on an empty sample list");
    std::size_t hits = 0;
    for (const PseudoSample& s : labeled) {
        if (iou(predict(m, s.feature), s.bbox) >= iou_threshold) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(labeled.size());
}

MeasurerHandle import_external_scores(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::map<std::string, double> table;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        json j = json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw IngestionError("line " + std::to_string(line) + ": malformed JSON");
        }
        if (j.contains("config") && !j.contains("sample_id")) continue; // provenance header
        if (!j.contains("sample_id") || !j["sample_id"].is_string()) {
            throw IngestionError("line " + std::to_string(line) + ": missing sample_id");
        }
        if (!j.contains("reliability") || !j["reliability"].is_number()) {
            throw IngestionError("line " + std::to_string(line) + ": missing reliability");
        }
        const std::string id = j["sample_id"].get<std::string>();
        const double value = j["reliability"].get<double>();
        if (!(value >= 0.0 && value <= 1.0)) {
            throw IngestionError("line " + std::to_string(line) +
                                 ": reliability outside [0,1]");
        }
        if (!table.emplace(id, value).second) {
            throw IngestionError("line " + std::to_string(line) + ": duplicate sample_id '" +
                                 id + "'");
        }
    }
    if (table.empty()) throw IngestionError(path + ": no records");
    return MeasurerHandle::external(std::move(table));
}

double external_score(const MeasurerHandle& m, const std::string& sample_id) {
    if (m.is_trained() || !m.scores) {
        throw ConfigError("measurer does not carry an external score table");
    }
    const auto it = m.scores->find(sample_id);
    if (it == m.scores->end()) {
        throw CoverageError("score table does not cover sample '" + sample_id + "'");
    }
    return it->second;
}

void save_checkpoint(const ToyGroundingModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    json header;
    header["feature_dim"] = m.feature_dim;
    header["final_loss"] = m.final_loss;
    header["train_config"] = m.config;
    out << header.dump() << '\n';
    std::string row;
    for (int r = 0; r < 4; ++r) {
        row.clear();
        for (int c = 0; c < m.feature_dim; ++c) {
            if (c > 0) row.push_back(' ');
            append_double(row, m.weight[static_cast<std::size_t>(r) * m.feature_dim + c]);
        }
        out << row << '\n';
    }
    row.clear();
    for (int r = 0; r < 4; ++r) {
        if (r > 0) row.push_back(' ');
        append_double(row, m.bias[r]);
    }
    out << row << '\n';
    if (!out) throw DataError("write failed: " + path);
}

ToyGroundingModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::string text;
    if (!std::getline(in, text)) throw IngestionError(path + ": no records");
    json header = json::parse(text, nullptr, false);
    if (header.is_discarded() || !header.is_object()) {
        throw IngestionError("line 1: malformed JSON header");
    }
    ToyGroundingModel m;
    if (!header.contains("feature_dim") || !header["feature_dim"].is_number_integer()) {
        throw IngestionError("line 1: missing feature_dim");
    }
    m.feature_dim = header["feature_dim"].get<int>();
    if (m.feature_dim < 1) throw IngestionError("line 1: feature_dim must be >= 1");
    m.final_loss = header.value("final_loss", 0.0);
    if (header.contains("train_config")) m.config = header["train_config"].get<TrainConfig>();

    m.weight.resize(static_cast<std::size_t>(4) * m.feature_dim);
    for (int r = 0; r < 4; ++r) {
        if (!std::getline(in, text)) throw IngestionError("truncated checkpoint: " + path);
        const auto row = parse_row(text, m.feature_dim, 2 + r);
        std::copy(row.begin(), row.end(),
                  m.weight.begin() + static_cast<std::size_t>(r) * m.feature_dim);
    }
    if (!std::getline(in, text)) throw IngestionError("truncated checkpoint: " + path);
    const auto bias = parse_row(text, 4, 6);
    std::copy(bias.begin(), bias.end(), m.bias.begin());
    if (!all_finite(m)) throw DataError("checkpoint holds non-finite weights: " + path);
    return m;
}

} // namespace curricuforge
