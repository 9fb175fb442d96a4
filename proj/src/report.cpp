#include "curricuforge/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "curricuforge/errors.hpp"
#include "curricuforge/measurer.hpp"
#include "curricuforge/parallel.hpp"
#include "curricuforge/reliability.hpp"
#include "curricuforge/text.hpp"

namespace curricuforge {

namespace {

namespace fs = std::filesystem;

std::string sanitize(const std::string& id) {
    std::string out = id;
    for (char& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
        if (!ok) c = '_';
    }
    return out;
}

std::ofstream open_csv(const fs::path& path, const std::string& provenance) {
    std::ofstream out(path, std::ios::binary); // binary keeps LF endings everywhere
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    if (!provenance.empty()) out << "# config: " << provenance << '\n';
    return out;
}

std::size_t source_index(const ResolvedData& data, const std::string& id) {
    for (std::size_t i = 0; i < data.train.size(); ++i)
        if (data.train[i].source_id == id) return i;
    throw DataError("result references unknown source '" + id + "'");
}

// Steps either all belong to one multi-source pass (every round is 1) or form
// one source's re-measuring chain (rounds 1..k on the same source).
bool is_round_chain(const std::vector<StepLog>& steps) {
    bool chain = false;
    for (const StepLog& s : steps) chain = chain || s.round != 1;
    if (!chain) return false;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].source_id != steps[0].source_id || steps[i].round != static_cast<int>(i) + 1)
            throw DataError("result steps form neither a source walk nor a re-measuring chain");
    }
    return true;
}

void write_pr_rows(std::ofstream& out, CandidateEvaluator& evaluator, const StepLog& step,
                   std::size_t step_index, double delta) {
    const long k_max = static_cast<long>(std::ceil(1.0 / delta)) - 1;
    for (long k = k_max; k >= 0; --k) {
        const double t = static_cast<double>(k) * delta;
        const CandidateOutcome o = evaluator.evaluate(t);
        out << step_index << ',' << step.source_id << ',' << step.measurer_id << ','
            << format_double(t) << ','
            << format_double(o.feasible ? o.accuracy
                                        : -std::numeric_limits<double>::infinity())
            << ',' << o.train_size << '\n';
    }
}

} // namespace

ReportPaths write_reports(const DatasetBundle& bundle, const SelectionResult& result,
                          const CurriculumConfig& cfg, const Manifest* manifest,
                          const std::string& out_dir, const std::string& provenance) {
    validate_curriculum_config(cfg);
    const ResolvedData data = resolve_validation(bundle, cfg);
    const std::size_t n = data.train.size();
    if (n == 0) throw DataError("bundle has no train sources");
    if (result.steps.empty()) throw DataError("result has no steps to report on");

    std::unordered_set<std::string> known_ids;
    for (const SourceSet& src : data.train)
        for (const PseudoSample& s : src.samples) known_ids.insert(s.sample_id);
    for (const std::string& id : result.selected_ids)
        if (!known_ids.count(id))
            throw DataError("result references unknown sample id '" + id + "'");
    for (const StepLog& step : result.steps) {
        source_index(data, step.source_id);
        source_index(data, step.measurer_id);
    }

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    ReportPaths paths;

    std::vector<MeasurerHandle> measurers(n);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        measurers[i] = train_measurer(data.train[i], data.feature_dim, cfg.train);
    });
    std::vector<ReliabilityHistogram> hists(n * n); // slot (i*n + j): measurer i on source j
    parallel_for(n * n, cfg.threads, [&](std::size_t slot) {
        const std::size_t i = slot / n;
        const std::size_t j = slot % n;
        hists[slot] = build_histogram(
            score_reliability(measurers[i], data.train[j], data.train[i].source_id), cfg.bins);
    });

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const fs::path p = dir / ("hist_" + sanitize(data.train[i].source_id) + "_" +
                                      sanitize(data.train[j].source_id) + ".csv");
            save_histogram_csv(hists[i * n + j], p.string(), provenance);
            paths.histogram_csvs.push_back(p.string());
        }
    }

    {
        const fs::path p = dir / "zero_proportions.csv";
        std::ofstream out = open_csv(p, provenance);
        out << "source_id,samples,zero_count,zero_proportion\n";
        for (std::size_t j = 0; j < n; ++j) {
            const ReliabilityHistogram& h = hists[j * n + j];
            const std::size_t total = data.train[j].samples.size();
            const double prop =
                total == 0 ? 0.0 : static_cast<double>(h.zero_count) / static_cast<double>(total);
            out << data.train[j].source_id << ',' << total << ',' << h.zero_count << ','
                << format_double(prop) << '\n';
        }
        if (!out) throw DataError("failed while writing '" + p.string() + "'");
        paths.zero_csv = p.string();
    }

    {
        const fs::path p = dir / "pr_curve.csv";
        std::ofstream out = open_csv(p, provenance);
        out << "step,source_id,measurer_id,threshold,accuracy,train_size\n";
        if (is_round_chain(result.steps)) {
            // Re-measuring chain: each round's histogram comes from the model
            // the previous round selected and trained.
            const std::size_t j = source_index(data, result.steps[0].source_id);
            ReliabilityHistogram hist = hists[j * n + j];
            std::unordered_map<std::string, const PseudoSample*> by_id;
            for (const PseudoSample& s : data.train[j].samples) by_id.emplace(s.sample_id, &s);
            for (std::size_t s = 0; s < result.steps.size(); ++s) {
                const StepLog& step = result.steps[s];
                const auto evaluator = make_training_evaluator(hist, {}, data, cfg);
                write_pr_rows(out, *evaluator, step, s + 1, cfg.delta);
                if (s + 1 == result.steps.size()) break;
                SampleRefs refs;
                for (const std::string& id : select_subset(hist, step.h_star))
                    refs.push_back(by_id.at(id));
                if (refs.empty())
                    throw DataError("result step " + std::to_string(s + 1) +
                                    " selects an empty subset");
                const MeasurerHandle next =
                    MeasurerHandle::trained(train_model(refs, data.feature_dim, cfg.train));
                hist = build_histogram(
                    score_reliability(next, data.train[j], step.source_id), cfg.bins);
            }
        } else {
            std::vector<std::string> pool;
            std::unordered_set<std::string> pool_set;
            for (std::size_t s = 0; s < result.steps.size(); ++s) {
                const StepLog& step = result.steps[s];
                const std::size_t i = source_index(data, step.measurer_id);
                const std::size_t j = source_index(data, step.source_id);
                const ReliabilityHistogram& hist = hists[i * n + j];
                const auto evaluator = make_training_evaluator(hist, pool, data, cfg);
                write_pr_rows(out, *evaluator, step, s + 1, cfg.delta);
                if (!step.feasible) continue;
                for (std::string& id : select_subset(hist, step.h_star))
                    if (pool_set.insert(id).second) pool.push_back(std::move(id));
            }
        }
        if (!out) throw DataError("failed while writing '" + p.string() + "'");
        paths.pr_csv = p.string();
    }

    if (manifest) {
        const fs::path p = dir / "junk_recall.csv";
        std::ofstream out = open_csv(p, provenance);
        out << "source_id,junk_total,junk_selected,junk_excluded,junk_recall\n";
        const std::unordered_set<std::string> selected(result.selected_ids.begin(),
                                                       result.selected_ids.end());
        std::size_t grand_total = 0;
        std::size_t grand_selected = 0;
        for (const SourceSet& src : data.train) {
            std::size_t total = 0;
            std::size_t picked = 0;
            for (const PseudoSample& s : src.samples) {
                const auto it = manifest->find(s.sample_id);
                if (it == manifest->end())
                    throw DataError("manifest does not cover sample '" + s.sample_id + "'");
                if (!it->second.is_junk) continue;
                ++total;
                if (selected.count(s.sample_id)) ++picked;
            }
            grand_total += total;
            grand_selected += picked;
            // no junk means nothing could leak, counted as full recall
            const double recall =
                total == 0 ? 1.0
                           : static_cast<double>(total - picked) / static_cast<double>(total);
            out << src.source_id << ',' << total << ',' << picked << ',' << (total - picked)
                << ',' << format_double(recall) << '\n';
        }
        const double recall = grand_total == 0
                                  ? 1.0
                                  : static_cast<double>(grand_total - grand_selected) /
                                        static_cast<double>(grand_total);
        out << "all," << grand_total << ',' << grand_selected << ','
            << (grand_total - grand_selected) << ',' << format_double(recall) << '\n';
        if (!out) throw DataError("failed while writing '" + p.string() + "'");
        paths.junk_csv = p.string();
    }

    return paths;
}

} // namespace curricuforge
