#include "curricuforge/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include <json.hpp>

#include "curricuforge/errors.hpp"
#include "curricuforge/parallel.hpp"
#include "curricuforge/rng.hpp"

namespace curricuforge {

namespace {

using nlohmann::json;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Grid thresholds are always one multiply-add from the signed index, never an
// accumulated sum, so the same index yields the same double everywhere.
double grid_threshold(double h0, double delta, long k) {
    return h0 + static_cast<double>(k) * delta;
}

double clamp_unit(double h) { return h < 0.0 ? 0.0 : (h > 1.0 ? 1.0 : h); }

double outcome_score(const CandidateOutcome& o) { return o.feasible ? o.accuracy : kNegInf; }

class TrainingEvaluator final : public CandidateEvaluator {
public:
    TrainingEvaluator(const ReliabilityHistogram& hist, std::vector<std::string> base_ids,
                      const ResolvedData& data, const CurriculumConfig& cfg)
        : hist_(hist), data_(data), cfg_(cfg), base_ids_(std::move(base_ids)) {
        for (const SourceSet& src : data_.train)
            for (const PseudoSample& s : src.samples) by_id_.emplace(s.sample_id, &s);
        base_refs_.reserve(base_ids_.size());
        for (const std::string& id : base_ids_) {
            base_refs_.push_back(resolve(id));
            base_lookup_.insert(id);
        }
    }

    CandidateOutcome evaluate(double threshold) override {
        SampleRefs refs = base_refs_;
        for (const std::string& id : select_subset(hist_, threshold))
            if (!base_lookup_.count(id)) refs.push_back(resolve(id));
        CandidateOutcome out;
        out.train_size = refs.size();
        if (refs.empty()) {
            out.accuracy = kNegInf;
            return out;
        }
        out.model = MeasurerHandle::trained(train_model(refs, data_.feature_dim, cfg_.train));
        out.accuracy = evaluate_top1(out.model, data_.val, cfg_.iou_threshold);
        out.feasible = true;
        return out;
    }

private:
    const PseudoSample* resolve(const std::string& id) const {
        const auto it = by_id_.find(id);
        if (it == by_id_.end())
            throw DataError("selection references unknown sample id '" + id + "'");
        return it->second;
    }

    const ReliabilityHistogram& hist_;
    const ResolvedData& data_;
    const CurriculumConfig& cfg_;
    std::vector<std::string> base_ids_;
    SampleRefs base_refs_;
    std::unordered_set<std::string> base_lookup_;
    std::unordered_map<std::string, const PseudoSample*> by_id_;
};

const SourceSet& find_source(const ResolvedData& data, const std::string& source_id) {
    for (const SourceSet& src : data.train)
        if (src.source_id == source_id) return src;
    throw DataError("unknown source '" + source_id + "'");
}

json eval_to_json(const CandidateEval& e) {
    json j;
    j["threshold"] = e.threshold;
    j["accuracy"] = e.feasible ? json(e.accuracy) : json(nullptr);
    j["train_size"] = e.train_size;
    return j;
}

json require(const json& j, const char* key, const char* where) {
    if (!j.is_object() || !j.contains(key))
        throw DataError(std::string(where) + " is missing field '" + key + "'");
    return j.at(key);
}

double require_num(const json& j, const char* key, const char* where) {
    const json v = require(j, key, where);
    if (!v.is_number()) throw DataError(std::string(where) + " field '" + key + "' must be a number");
    return v.get<double>();
}

std::string require_str(const json& j, const char* key, const char* where) {
    const json v = require(j, key, where);
    if (!v.is_string()) throw DataError(std::string(where) + " field '" + key + "' must be a string");
    return v.get<std::string>();
}

} // namespace

void validate_curriculum_config(const CurriculumConfig& cfg) {
    if (!(cfg.h0 >= 0.0 && cfg.h0 <= 1.0)) throw ConfigError("h0 must lie in [0,1]");
    if (!(cfg.delta > 0.0 && cfg.delta <= 0.5))
        throw ConfigError("delta must lie in (0,0.5]");
    if (cfg.bins < 1) throw ConfigError("bins must be positive");
    if (cfg.max_greedy_iters < 1) throw ConfigError("max_greedy_iters must be positive");
    if (!(cfg.iou_threshold >= 0.0 && cfg.iou_threshold <= 1.0))
        throw ConfigError("iou_threshold must lie in [0,1]");
    if (cfg.rounds < 1) throw ConfigError("rounds must be positive");
    if (cfg.validation == ValidationMode::held_out_pseudo &&
        !(cfg.held_out_fraction > 0.0 && cfg.held_out_fraction < 1.0))
        throw ConfigError("held_out_fraction must lie in (0,1)");
}

ResolvedData resolve_validation(const DatasetBundle& bundle, const CurriculumConfig& cfg) {
    validate_curriculum_config(cfg);
    ResolvedData out;
    out.feature_dim = bundle.feature_dim;
    if (cfg.validation == ValidationMode::labeled_val) {
        out.train = bundle.train_sources;
        out.val = bundle.val;
        if (out.val.empty()) throw DataError("validation split is empty");
        return out;
    }
    // A seeded slice of every source doubles as validation; those samples
    // leave the training pool entirely so nothing validates on its own
    // training data.
    for (std::size_t si = 0; si < bundle.train_sources.size(); ++si) {
        const SourceSet& src = bundle.train_sources[si];
        const std::size_t n = src.samples.size();
        const auto k = static_cast<std::size_t>(cfg.held_out_fraction * static_cast<double>(n));
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        Rng rng{mix_seed(cfg.train.seed, 7000 + static_cast<std::uint64_t>(si))};
        rng.shuffle(idx);
        std::vector<char> held(n, 0);
        for (std::size_t t = 0; t < k; ++t) held[idx[t]] = 1;
        SourceSet kept;
        kept.source_id = src.source_id;
        kept.kind = src.kind;
        for (std::size_t i = 0; i < n; ++i) {
            if (held[i])
                out.val.push_back(src.samples[i]);
            else
                kept.samples.push_back(src.samples[i]);
        }
        if (kept.samples.empty() && n > 0)
            throw DataError("held-out split empties source '" + src.source_id + "'");
        out.train.push_back(std::move(kept));
    }
    if (out.val.empty()) throw DataError("validation split is empty");
    return out;
}

std::unique_ptr<CandidateEvaluator> make_training_evaluator(const ReliabilityHistogram& hist,
                                                            std::vector<std::string> base_ids,
                                                            const ResolvedData& data,
                                                            const CurriculumConfig& cfg) {
    return std::make_unique<TrainingEvaluator>(hist, std::move(base_ids), data, cfg);
}

GreedyResult greedy_threshold_search(CandidateEvaluator& evaluator, const CurriculumConfig& cfg,
                                     std::map<long, CandidateOutcome> preseeded) {
    validate_curriculum_config(cfg);
    constexpr double kGridEps = 1e-9; // float dust from h0 + k*delta, not a tolerance knob
    std::map<long, CandidateOutcome> memo = std::move(preseeded);
    std::size_t calls = 0;
    const auto in_range = [&](long k) {
        const double h = grid_threshold(cfg.h0, cfg.delta, k);
        return h >= -kGridEps && h <= 1.0 + kGridEps;
    };
    const auto score = [&](long k) {
        if (!in_range(k)) return kNegInf;
        auto it = memo.find(k);
        if (it == memo.end()) {
            ++calls;
            it = memo.emplace(k, evaluator.evaluate(clamp_unit(grid_threshold(cfg.h0, cfg.delta, k))))
                     .first;
        }
        return outcome_score(it->second);
    };
    long k = 0;
    for (int iter = 0; iter < cfg.max_greedy_iters; ++iter) {
        const double mid = score(k);
        const double lo = score(k - 1);
        const double hi = score(k + 1);
        if (!(lo > mid) && !(hi > mid)) break; // movement needs strict improvement
        if (lo > mid && hi > mid)
            k = (hi > lo) ? k + 1 : k - 1; // exact tie keeps the lower threshold
        else
            k = (lo > mid) ? k - 1 : k + 1;
    }
    GreedyResult out;
    out.h_star = clamp_unit(grid_threshold(cfg.h0, cfg.delta, k));
    out.best = memo.at(k);
    out.evaluations = calls;
    out.evals.reserve(memo.size());
    for (const auto& [kk, o] : memo) {
        CandidateEval e;
        e.threshold = clamp_unit(grid_threshold(cfg.h0, cfg.delta, kk));
        e.feasible = o.feasible;
        e.accuracy = o.feasible ? o.accuracy : kNegInf;
        e.train_size = o.train_size;
        out.evals.push_back(e);
    }
    return out;
}

SelectionResult ssa_run(const DatasetBundle& bundle, const std::string& source_id,
                        const CurriculumConfig& cfg) {
    validate_curriculum_config(cfg);
    const ResolvedData data = resolve_validation(bundle, cfg);
    const SourceSet& src = find_source(data, source_id);
    SelectionResult result;
    MeasurerHandle measurer = train_measurer(src, data.feature_dim, cfg.train);
    for (int round = 1; round <= cfg.rounds; ++round) {
        const ReliabilitySet rset = score_reliability(measurer, src, src.source_id);
        const ReliabilityHistogram hist = build_histogram(rset, cfg.bins);
        const auto evaluator = make_training_evaluator(hist, {}, data, cfg);
        GreedyResult g = greedy_threshold_search(*evaluator, cfg);
        StepLog step;
        step.source_id = source_id;
        step.measurer_id = source_id;
        step.round = round;
        step.h_star = g.h_star;
        step.feasible = g.best.feasible;
        step.threshold_evals = std::move(g.evals);
        result.steps.push_back(std::move(step));
        if (!g.best.feasible)
            throw DataError("source '" + source_id + "' produced no trainable subset");
        result.selected_ids = select_subset(hist, g.h_star);
        result.final_model = g.best.model;
        measurer = g.best.model; // later rounds re-measure with the improved model
    }
    result.final_val_accuracy = evaluate_top1(result.final_model, data.val, cfg.iou_threshold);
    return result;
}

std::vector<std::size_t> order_sources(const std::vector<SourceSet>& sources) {
    std::vector<double> avg(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) avg[i] = avg_entities(sources[i]);
    std::vector<std::size_t> idx(sources.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return avg[a] < avg[b]; });
    return idx;
}

MeasurerChoice select_measurer(const std::vector<ReliabilityHistogram>& hists_for_source,
                               const std::vector<std::string>& measurer_ids,
                               const std::vector<std::string>& base_ids, const ResolvedData& data,
                               const CurriculumConfig& cfg) {
    validate_curriculum_config(cfg);
    if (hists_for_source.empty() || hists_for_source.size() != measurer_ids.size())
        throw ConfigError("select_measurer needs one histogram per measurer");
    std::vector<CandidateOutcome> outcomes(hists_for_source.size());
    for (std::size_t i = 0; i < hists_for_source.size(); ++i) {
        const auto evaluator = make_training_evaluator(hists_for_source[i], base_ids, data, cfg);
        outcomes[i] = evaluator->evaluate(cfg.h0);
    }
    MeasurerChoice choice;
    for (std::size_t i = 1; i < outcomes.size(); ++i)
        if (outcome_score(outcomes[i]) > outcome_score(outcomes[choice.index]))
            choice.index = i; // ties keep the smallest index
    choice.evals.reserve(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        MeasurerEval e;
        e.measurer_id = measurer_ids[i];
        e.feasible = outcomes[i].feasible;
        e.accuracy = outcome_score(outcomes[i]);
        choice.evals.push_back(std::move(e));
    }
    choice.at_h0 = std::move(outcomes[choice.index]);
    return choice;
}

SelectionResult msa_run(const DatasetBundle& bundle, const CurriculumConfig& cfg,
                        const std::vector<std::string>& order_override) {
    validate_curriculum_config(cfg);
    const ResolvedData data = resolve_validation(bundle, cfg);
    const std::size_t n = data.train.size();
    if (n == 0) throw DataError("bundle has no train sources");

    std::vector<std::size_t> order;
    if (order_override.empty()) {
        order = order_sources(data.train);
    } else {
        if (order_override.size() != n)
            throw ConfigError("order override must name every source exactly once");
        std::unordered_set<std::string> seen;
        for (const std::string& id : order_override) {
            if (!seen.insert(id).second)
                throw ConfigError("order override repeats source '" + id + "'");
            for (std::size_t i = 0; i < n; ++i)
                if (data.train[i].source_id == id) order.push_back(i);
        }
        if (order.size() != n) throw ConfigError("order override names an unknown source");
    }

    // All measurers are trained once up-front on their full sources and never
    // retrained; selection only re-trains candidate models.
    std::vector<std::string> measurer_ids(n);
    for (std::size_t i = 0; i < n; ++i) measurer_ids[i] = data.train[i].source_id;
    std::vector<MeasurerHandle> measurers(n);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        measurers[i] = train_measurer(data.train[i], data.feature_dim, cfg.train);
    });
    std::vector<ReliabilitySet> rsets(n * n); // slot (i*n + j): measurer i on source j
    parallel_for(n * n, cfg.threads, [&](std::size_t slot) {
        const std::size_t i = slot / n;
        const std::size_t j = slot % n;
        rsets[slot] = score_reliability(measurers[i], data.train[j], measurer_ids[i]);
    });

    SelectionResult result;
    std::vector<std::string> pool; // D after each step, in selection order
    std::unordered_set<std::string> pool_set;
    for (const std::size_t j : order) {
        std::vector<ReliabilityHistogram> hists;
        hists.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            hists.push_back(build_histogram(rsets[i * n + j], cfg.bins));
        MeasurerChoice choice = select_measurer(hists, measurer_ids, pool, data, cfg);
        const auto evaluator = make_training_evaluator(hists[choice.index], pool, data, cfg);
        std::map<long, CandidateOutcome> preseeded;
        preseeded.emplace(0L, choice.at_h0);
        GreedyResult g = greedy_threshold_search(*evaluator, cfg, std::move(preseeded));
        StepLog step;
        step.source_id = data.train[j].source_id;
        step.measurer_id = measurer_ids[choice.index];
        step.h_star = g.h_star;
        step.feasible = g.best.feasible;
        step.measurer_evals = std::move(choice.evals);
        step.threshold_evals = std::move(g.evals);
        result.steps.push_back(std::move(step));
        if (!g.best.feasible) continue; // nothing trainable here; the pool carries over
        for (std::string& id : select_subset(hists[choice.index], g.h_star))
            if (pool_set.insert(id).second) pool.push_back(std::move(id));
        // The winning candidate was trained on exactly pool-before plus the
        // new subset in this order, so it already is the model for the
        // current pool.
        result.final_model = g.best.model;
    }
    if (!result.final_model.is_trained())
        throw DataError("no source produced a trainable selection");
    result.selected_ids = std::move(pool);
    result.final_val_accuracy = evaluate_top1(result.final_model, data.val, cfg.iou_threshold);
    return result;
}

void save_selection_result(const SelectionResult& result, const std::string& path,
                           const std::string& provenance) {
    json j;
    if (!provenance.empty()) {
        json cfg = json::parse(provenance, nullptr, false);
        if (cfg.is_discarded()) throw ConfigError("provenance is not valid JSON");
        j["config"] = std::move(cfg);
    }
    j["final_val_accuracy"] = result.final_val_accuracy;
    j["selected_ids"] = result.selected_ids;
    json steps = json::array();
    for (const StepLog& s : result.steps) {
        json js;
        js["source_id"] = s.source_id;
        js["measurer_id"] = s.measurer_id;
        js["round"] = s.round;
        js["h_star"] = s.h_star;
        js["feasible"] = s.feasible;
        json me = json::array();
        for (const MeasurerEval& m : s.measurer_evals) {
            json jm;
            jm["measurer_id"] = m.measurer_id;
            jm["accuracy"] = m.feasible ? json(m.accuracy) : json(nullptr);
            me.push_back(std::move(jm));
        }
        js["measurer_evals"] = std::move(me);
        json te = json::array();
        for (const CandidateEval& e : s.threshold_evals) te.push_back(eval_to_json(e));
        js["threshold_evals"] = std::move(te);
        steps.push_back(std::move(js));
    }
    j["steps"] = std::move(steps);
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw DataError("failed while writing '" + path + "'");
}

SelectionResult load_selection_result(const std::string& path, std::string* config_json) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const json j = json::parse(buf.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw DataError("'" + path + "' is not a valid result file");
    if (config_json) *config_json = j.contains("config") ? j.at("config").dump() : std::string();
    SelectionResult result;
    result.final_val_accuracy = require_num(j, "final_val_accuracy", "result");
    const json ids = require(j, "selected_ids", "result");
    if (!ids.is_array()) throw DataError("result field 'selected_ids' must be an array");
    for (const json& id : ids) {
        if (!id.is_string()) throw DataError("result field 'selected_ids' must hold strings");
        result.selected_ids.push_back(id.get<std::string>());
    }
    const json steps = require(j, "steps", "result");
    if (!steps.is_array()) throw DataError("result field 'steps' must be an array");
    for (const json& js : steps) {
        StepLog step;
        step.source_id = require_str(js, "source_id", "result step");
        step.measurer_id = require_str(js, "measurer_id", "result step");
        step.round = static_cast<int>(require_num(js, "round", "result step"));
        step.h_star = require_num(js, "h_star", "result step");
        const json feas = require(js, "feasible", "result step");
        if (!feas.is_boolean()) throw DataError("result step field 'feasible' must be a bool");
        step.feasible = feas.get<bool>();
        const json me = require(js, "measurer_evals", "result step");
        if (!me.is_array()) throw DataError("result step field 'measurer_evals' must be an array");
        for (const json& jm : me) {
            MeasurerEval e;
            e.measurer_id = require_str(jm, "measurer_id", "measurer eval");
            const json acc = require(jm, "accuracy", "measurer eval");
            e.feasible = acc.is_number();
            e.accuracy = e.feasible ? acc.get<double>() : kNegInf;
            step.measurer_evals.push_back(std::move(e));
        }
        const json te = require(js, "threshold_evals", "result step");
        if (!te.is_array()) throw DataError("result step field 'threshold_evals' must be an array");
        for (const json& je : te) {
            CandidateEval e;
            e.threshold = require_num(je, "threshold", "threshold eval");
            const json acc = require(je, "accuracy", "threshold eval");
            e.feasible = acc.is_number();
            e.accuracy = e.feasible ? acc.get<double>() : kNegInf;
            e.train_size = static_cast<std::size_t>(require_num(je, "train_size", "threshold eval"));
            step.threshold_evals.push_back(e);
        }
        result.steps.push_back(std::move(step));
    }
    return result;
}

} // namespace curricuforge
