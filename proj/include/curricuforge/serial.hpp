#pragma once

// JSON conversions for configuration types, shared by checkpoint headers,
// config-file parsing and artifact provenance stamps. Field names here are
// the on-disk schema; changing one is a format break.

#include <json.hpp>

#include "curricuforge/curriculum.hpp"
#include "curricuforge/dataset.hpp"
#include "curricuforge/errors.hpp"
#include "curricuforge/measurer.hpp"

namespace curricuforge {

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = {{"learning_rate", c.learning_rate},
         {"epochs", c.epochs},
         {"batch_size", c.batch_size},
         {"lambda", c.lambda},
         {"seed", c.seed},
         {"optimizer", c.optimizer == Optimizer::sgd ? "sgd" : "momentum"},
         {"momentum", c.momentum},
         {"cosine_decay", c.cosine_decay}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lambda = j.value("lambda", c.lambda);
    c.seed = j.value("seed", c.seed);
    if (j.contains("optimizer")) {
        const std::string name = j["optimizer"].get<std::string>();
        if (name == "sgd") {
            c.optimizer = Optimizer::sgd;
        } else if (name == "momentum") {
            c.optimizer = Optimizer::momentum;
        } else {
            throw ConfigError("unknown optimizer '" + name + "'");
        }
    }
    c.momentum = j.value("momentum", c.momentum);
    c.cosine_decay = j.value("cosine_decay", c.cosine_decay);
}

inline void to_json(nlohmann::json& j, const SourceProfile& p) {
    j = {{"source_id", p.source_id}, {"kind", p.kind},
         {"num_samples", p.num_samples}, {"sigma", p.sigma},
         {"rho", p.rho},               {"min_entities", p.min_entities},
         {"max_entities", p.max_entities}};
}

inline void from_json(const nlohmann::json& j, SourceProfile& p) {
    p.source_id = j.value("source_id", p.source_id);
    p.kind = j.value("kind", p.kind);
    p.num_samples = j.value("num_samples", p.num_samples);
    p.sigma = j.value("sigma", p.sigma);
    p.rho = j.value("rho", p.rho);
    p.min_entities = j.value("min_entities", p.min_entities);
    p.max_entities = j.value("max_entities", p.max_entities);
}

inline void to_json(nlohmann::json& j, const SyntheticWorldConfig& c) {
    j = {{"feature_dim", c.feature_dim},
         {"sources", c.sources},
         {"val_size", c.val_size},
         {"test_size", c.test_size},
         {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, SyntheticWorldConfig& c) {
    c.feature_dim = j.value("feature_dim", c.feature_dim);
    if (j.contains("sources")) c.sources = j["sources"].get<std::vector<SourceProfile>>();
    c.val_size = j.value("val_size", c.val_size);
    c.test_size = j.value("test_size", c.test_size);
    c.seed = j.value("seed", c.seed);
}

inline void to_json(nlohmann::json& j, const CurriculumConfig& c) {
    j = {{"h0", c.h0},
         {"delta", c.delta},
         {"validation",
          c.validation == ValidationMode::labeled_val ? "labeled-val" : "held-out-pseudo"},
         {"held_out_fraction", c.held_out_fraction},
         {"bins", c.bins},
         {"train", c.train},
         {"max_greedy_iters", c.max_greedy_iters},
         {"iou_threshold", c.iou_threshold},
         {"rounds", c.rounds}};
    // threads is an execution detail, not a run parameter; artifacts stay
    // byte-identical across thread counts.
}

inline void from_json(const nlohmann::json& j, CurriculumConfig& c) {
    c.h0 = j.value("h0", c.h0);
    c.delta = j.value("delta", c.delta);
    if (j.contains("validation")) {
        const std::string name = j["validation"].get<std::string>();
        if (name == "labeled-val") {
            c.validation = ValidationMode::labeled_val;
        } else if (name == "held-out-pseudo") {
            c.validation = ValidationMode::held_out_pseudo;
        } else {
            throw ConfigError("unknown validation mode '" + name + "'");
        }
    }
    c.held_out_fraction = j.value("held_out_fraction", c.held_out_fraction);
    c.bins = j.value("bins", c.bins);
    if (j.contains("train")) from_json(j["train"], c.train);
    c.max_greedy_iters = j.value("max_greedy_iters", c.max_greedy_iters);
    c.iou_threshold = j.value("iou_threshold", c.iou_threshold);
    c.rounds = j.value("rounds", c.rounds);
}

} // namespace curricuforge
