#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "curricuforge/dataset.hpp"
#include "curricuforge/measurer.hpp"
#include "curricuforge/reliability.hpp"

namespace curricuforge {

enum class ValidationMode { labeled_val, held_out_pseudo };

struct CurriculumConfig {
    double h0 = 0.5;            // 0.2 is the fully supervised prior
    double delta = 0.1;
    ValidationMode validation = ValidationMode::labeled_val;
    double held_out_fraction = 0.1; // held_out_pseudo mode only
    int bins = 1000;
    TrainConfig train;
    int max_greedy_iters = 50;
    double iou_threshold = 0.5; // top-1 success cutoff
    int threads = 1;
    int rounds = 1;             // extra Algorithm-1 passes re-measure with the improved model
};

void validate_curriculum_config(const CurriculumConfig& cfg);

// One candidate evaluation: a model trained on base + subset(threshold) and
// its validation accuracy. Infeasible candidates (empty training set) carry
// accuracy -inf and no model.
struct CandidateOutcome {
    bool feasible = false;
    double accuracy = 0.0;
    std::size_t train_size = 0;
    MeasurerHandle model;
};

// The greedy walk sees candidates only through this interface, so tests can
// inject synthetic performance tables in place of real training.
class CandidateEvaluator {
public:
    virtual ~CandidateEvaluator() = default;
    virtual CandidateOutcome evaluate(double threshold) = 0;
};

// Training data for one step, resolved per the validation mode: in held-out
// mode every source has lost its validation slice.
struct ResolvedData {
    int feature_dim = 0;
    std::vector<SourceSet> train;
    std::vector<PseudoSample> val;
};

ResolvedData resolve_validation(const DatasetBundle& bundle, const CurriculumConfig& cfg);

/// Evaluator that trains a fresh model (same seed every candidate) on
/// base_ids plus the histogram subset at the queried threshold, then scores
/// validation top-1. `data` must outlive the evaluator.
std::unique_ptr<CandidateEvaluator> make_training_evaluator(const ReliabilityHistogram& hist,
                                                            std::vector<std::string> base_ids,
                                                            const ResolvedData& data,
                                                            const CurriculumConfig& cfg);

struct CandidateEval {
    double threshold = 0.0;
    bool feasible = false;
    double accuracy = 0.0;
    std::size_t train_size = 0;
};

struct GreedyResult {
    double h_star = 0.0;
    CandidateOutcome best;
    std::vector<CandidateEval> evals; // every distinct evaluated threshold, ascending
    std::size_t evaluations = 0;      // evaluator calls (out-of-range neighbors cost none)
};

/// Local threshold walk from h0 in steps of delta. Each iteration scores the
/// current point and both neighbors (memoized; out-of-[0,1] neighbors count
/// as -inf) and moves only on strict improvement; when both neighbors win,
/// the higher score is taken and an exact tie falls to the lower threshold.
/// `preseeded` carries outcomes already computed elsewhere, keyed by the
/// signed grid index relative to h0.
GreedyResult greedy_threshold_search(CandidateEvaluator& evaluator, const CurriculumConfig& cfg,
                                     std::map<long, CandidateOutcome> preseeded = {});

struct MeasurerEval {
    std::string measurer_id;
    bool feasible = false;
    double accuracy = 0.0;
};

struct StepLog {
    std::string source_id;
    std::string measurer_id;
    int round = 1;
    double h_star = 0.0;
    bool feasible = true;
    std::vector<MeasurerEval> measurer_evals;   // one per candidate measurer (empty for SSA)
    std::vector<CandidateEval> threshold_evals; // the greedy walk's evaluations
};

struct SelectionResult {
    std::vector<std::string> selected_ids; // dedup union in selection order
    std::vector<StepLog> steps;
    MeasurerHandle final_model; // empty when the result was loaded from a file
    double final_val_accuracy = 0.0;
};

/// Single-source pass: measurer on all pseudo-labels, score, histogram,
/// greedy search with an empty base, final model trained on the winning
/// subset. With cfg.rounds > 1 each extra round re-scores the source using
/// the previous round's final model and re-runs the search.
SelectionResult ssa_run(const DatasetBundle& bundle, const std::string& source_id,
                        const CurriculumConfig& cfg);

/// Indices of `sources` ordered by ascending avg_entities, ties keeping
/// input order.
std::vector<std::size_t> order_sources(const std::vector<SourceSet>& sources);

/// Argmax over measurers of the h0-candidate accuracy on base + subset from
/// that measurer's histogram of source j. Ties pick the smallest index.
struct MeasurerChoice {
    std::size_t index = 0;
    std::vector<MeasurerEval> evals;
    CandidateOutcome at_h0; // the winning measurer's candidate, reusable by the walk
};
MeasurerChoice select_measurer(const std::vector<ReliabilityHistogram>& hists_for_source,
                               const std::vector<std::string>& measurer_ids,
                               const std::vector<std::string>& base_ids, const ResolvedData& data,
                               const CurriculumConfig& cfg);

/// Multi-source pass: all measurers trained up-front, all n*n reliability
/// sets scored, sources walked in entity order (or order_override), each step
/// growing the selected pool that seeds the next step's candidates.
SelectionResult msa_run(const DatasetBundle& bundle, const CurriculumConfig& cfg,
                        const std::vector<std::string>& order_override = {});

/// Result JSON: {"config": <provenance>, "final_val_accuracy", "selected_ids",
/// "steps": [...]}. Deterministic key and array order; infeasible accuracies
/// serialize as null.
void save_selection_result(const SelectionResult& result, const std::string& path,
                           const std::string& provenance = {});

/// Inverse of save_selection_result (the final model is not stored). When
/// config_json is non-null it receives the embedded provenance text.
SelectionResult load_selection_result(const std::string& path, std::string* config_json = nullptr);

} // namespace curricuforge
