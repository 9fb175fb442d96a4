// curricuforge command line: synthetic world generation, measurer training,
// reliability scoring, curriculum selection (single- and multi-source), and
// report emission. One command per process; exit codes are 0 success,
// 1 usage/config error, 2 data error, 3 numerical failure.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "curricuforge/curriculum.hpp"
#include "curricuforge/dataset.hpp"
#include "curricuforge/errors.hpp"
#include "curricuforge/measurer.hpp"
#include "curricuforge/reliability.hpp"
#include "curricuforge/report.hpp"
#include "curricuforge/serial.hpp"
#include "curricuforge/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace curricuforge;

namespace {

struct Globals {
    json file = json::object(); // parsed config file, empty object when absent
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_dir = ".";
};

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const json j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("config file '" + path + "' is not a JSON object");
    return j;
}

bool given(const CLI::App* sub, const std::string& name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

std::vector<double> parse_number_list(const std::string& text, const char* flag) {
    std::vector<double> out;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t comma = text.find(',', pos);
        const std::string piece =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        double v{};
        const char* b = piece.data();
        const char* e = b + piece.size();
        const auto res = std::from_chars(b, e, v);
        if (piece.empty() || res.ec != std::errc{} || res.ptr != e)
            throw ConfigError(std::string(flag) + " expects comma-separated numbers");
        out.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<std::string> split_ids(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t comma = text.find(',', pos);
        out.push_back(
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

double pick(const std::vector<double>& list, std::size_t i, const char* flag, std::size_t n) {
    if (list.size() == 1) return list[0];
    if (list.size() != n)
        throw ConfigError(std::string(flag) + " needs one value or one per source");
    return list[i];
}

ValidationMode parse_validation(const std::string& name) {
    if (name == "labeled-val") return ValidationMode::labeled_val;
    if (name == "held-out-pseudo") return ValidationMode::held_out_pseudo;
    throw ConfigError("unknown validation mode '" + name + "'");
}

struct TrainFlags {
    int epochs = 30;
    int batch = 64;
    double lr = 0.05;
    double lambda = 1.0;
};

void add_train_flags(CLI::App* sub, TrainFlags& f) {
    sub->add_option("--epochs", f.epochs, "training epochs");
    sub->add_option("--lr", f.lr, "initial learning rate");
    sub->add_option("--batch", f.batch, "minibatch size");
    sub->add_option("--lambda", f.lambda, "overlap term weight in the loss");
}

// Precedence, lowest to highest: built-in defaults, the config file's
// "curriculum.train", its top-level "train", then flags. The seed is always
// the resolved global seed.
TrainConfig resolve_train(const CLI::App* sub, const TrainFlags& f, const Globals& g,
                          TrainConfig tc) {
    if (g.file.contains("train")) from_json(g.file.at("train"), tc);
    tc.seed = g.seed;
    if (given(sub, "--epochs")) tc.epochs = f.epochs;
    if (given(sub, "--lr")) tc.learning_rate = f.lr;
    if (given(sub, "--batch")) tc.batch_size = f.batch;
    if (given(sub, "--lambda")) tc.lambda = f.lambda;
    return tc;
}

struct SelectionFlags {
    std::string bundle;
    std::string source; // ssa only
    std::string order;  // msa only
    double h0 = 0.5;
    double delta = 0.1;
    int bins = 1000;
    int rounds = 1;
    std::string validation;
    double held_out_fraction = 0.1;
    double iou = 0.5;
    TrainFlags train;
};

void add_selection_flags(CLI::App* sub, SelectionFlags& f) {
    sub->add_option("--bundle", f.bundle, "input bundle (JSONL)")->required();
    sub->add_option("--h0", f.h0, "start threshold for the greedy walk");
    sub->add_option("--delta", f.delta, "threshold grid step");
    sub->add_option("--bins", f.bins, "histogram bins");
    sub->add_option("--validation", f.validation, "labeled-val | held-out-pseudo");
    sub->add_option("--held-out-fraction", f.held_out_fraction,
                    "per-source slice used as validation in held-out-pseudo mode");
    sub->add_option("--iou-threshold", f.iou, "top-1 success cutoff");
    add_train_flags(sub, f.train);
}

CurriculumConfig resolve_curriculum(const CLI::App* sub, const SelectionFlags& f,
                                    const Globals& g) {
    CurriculumConfig cfg;
    if (g.file.contains("curriculum")) from_json(g.file.at("curriculum"), cfg);
    cfg.train = resolve_train(sub, f.train, g, cfg.train);
    cfg.threads = g.threads;
    if (given(sub, "--h0")) cfg.h0 = f.h0;
    if (given(sub, "--delta")) cfg.delta = f.delta;
    if (given(sub, "--bins")) cfg.bins = f.bins;
    if (given(sub, "--rounds")) cfg.rounds = f.rounds;
    if (given(sub, "--validation")) cfg.validation = parse_validation(f.validation);
    if (given(sub, "--held-out-fraction")) cfg.held_out_fraction = f.held_out_fraction;
    if (given(sub, "--iou-threshold")) cfg.iou_threshold = f.iou;
    validate_curriculum_config(cfg);
    return cfg;
}

void write_selection_artifacts(const SelectionResult& result, const Globals& g,
                               const json& provenance) {
    fs::create_directories(g.out_dir);
    const fs::path dir(g.out_dir);
    save_selection_result(result, (dir / "result.json").string(), provenance.dump());
    save_checkpoint(*result.final_model.model, (dir / "final_model.ckpt").string());
    const StepLog& last = result.steps.back();
    std::cout << "h_star=" << format_double(last.h_star)
              << " selected=" << result.selected_ids.size()
              << " val_top1=" << format_double(result.final_val_accuracy) << '\n';
    std::cout << "wrote " << (dir / "result.json").string() << " and "
              << (dir / "final_model.ckpt").string() << '\n';
}

int cmd_gen(const CLI::App* sub, const Globals& g, const std::string& out,
            const std::string& manifest_flag, int sources, const std::string& junk,
            const std::string& sigma, const std::string& samples, int dim, int val_size,
            int test_size) {
    SyntheticWorldConfig wc;
    if (g.file.contains("gen")) from_json(g.file.at("gen"), wc);
    wc.seed = g.seed;
    if (given(sub, "--dim")) wc.feature_dim = dim;
    if (given(sub, "--val")) wc.val_size = val_size;
    if (given(sub, "--test")) wc.test_size = test_size;

    if (given(sub, "--sources") || wc.sources.empty()) {
        const int n = given(sub, "--sources") ? sources : 1;
        if (n < 1) throw ConfigError("--sources must be positive");
        const std::vector<double> rho =
            junk.empty() ? std::vector<double>{0.0} : parse_number_list(junk, "--junk");
        const std::vector<double> sig =
            sigma.empty() ? std::vector<double>{0.02} : parse_number_list(sigma, "--sigma");
        const std::vector<double> cnt =
            samples.empty() ? std::vector<double>{1000.0} : parse_number_list(samples, "--samples");
        wc.sources.clear();
        for (int i = 0; i < n; ++i) {
            SourceProfile p;
            p.source_id = "s" + std::to_string(i);
            p.kind = "synthetic";
            const auto ui = static_cast<std::size_t>(i);
            const auto un = static_cast<std::size_t>(n);
            p.num_samples = static_cast<int>(std::llround(pick(cnt, ui, "--samples", un)));
            p.sigma = pick(sig, ui, "--sigma", un);
            p.rho = pick(rho, ui, "--junk", un);
            p.min_entities = 1;
            p.max_entities = 2 * i + 1; // later sources carry longer expressions
            wc.sources.push_back(std::move(p));
        }
    } else {
        const std::size_t n = wc.sources.size();
        if (given(sub, "--junk")) {
            const auto v = parse_number_list(junk, "--junk");
            for (std::size_t i = 0; i < n; ++i) wc.sources[i].rho = pick(v, i, "--junk", n);
        }
        if (given(sub, "--sigma")) {
            const auto v = parse_number_list(sigma, "--sigma");
            for (std::size_t i = 0; i < n; ++i) wc.sources[i].sigma = pick(v, i, "--sigma", n);
        }
        if (given(sub, "--samples")) {
            const auto v = parse_number_list(samples, "--samples");
            for (std::size_t i = 0; i < n; ++i)
                wc.sources[i].num_samples =
                    static_cast<int>(std::llround(pick(v, i, "--samples", n)));
        }
    }

    std::string manifest_path = manifest_flag;
    if (manifest_path.empty()) {
        fs::path p(out);
        p.replace_extension();
        p += ".manifest.jsonl";
        manifest_path = p.string();
    }

    // Provenance records inputs and parameters, never output destinations;
    // the same logical run yields the same bytes wherever it is written.
    const json prov = {{"command", "gen"}, {"seed", g.seed}, {"world", wc}};
    const SyntheticWorld world = generate_synthetic(wc);
    if (const fs::path parent = fs::path(out).parent_path(); !parent.empty())
        fs::create_directories(parent);
    save_bundle(world.bundle, out, prov.dump());
    save_manifest(world.manifest, manifest_path, prov.dump());
    std::size_t total = 0;
    for (const SourceSet& s : world.bundle.train_sources) total += s.samples.size();
    std::cout << "wrote " << out << " (" << total << " train samples, "
              << world.bundle.train_sources.size() << " sources) and " << manifest_path << '\n';
    return 0;
}

int cmd_train_measurer(const CLI::App* sub, const Globals& g, const std::string& bundle_path,
                       const std::string& source_id, const std::string& out,
                       const TrainFlags& tf) {
    const TrainConfig tc = resolve_train(sub, tf, g, TrainConfig{});
    const DatasetBundle bundle = load_bundle(bundle_path);
    const SourceSet& src = bundle.source(source_id);
    const MeasurerHandle m = train_measurer(src, bundle.feature_dim, tc);
    if (const fs::path parent = fs::path(out).parent_path(); !parent.empty())
        fs::create_directories(parent);
    save_checkpoint(*m.model, out);
    std::cout << "final_loss=" << format_double(m.model->final_loss);
    if (!bundle.val.empty())
        std::cout << " val_top1=" << format_double(evaluate_top1(m, bundle.val, 0.5));
    std::cout << '\n' << "wrote " << out << '\n';
    return 0;
}

int cmd_score(const std::string& bundle_path, const std::string& source_id,
              const std::string& checkpoint, const std::string& out) {
    const DatasetBundle bundle = load_bundle(bundle_path);
    const SourceSet& src = bundle.source(source_id);
    ToyGroundingModel model = load_checkpoint(checkpoint);
    if (model.feature_dim != bundle.feature_dim)
        throw DataError("checkpoint feature_dim does not match the bundle");
    const MeasurerHandle handle = MeasurerHandle::trained(std::move(model));
    const ReliabilitySet rset = score_reliability(handle, src, src.source_id);
    const json prov = {{"command", "score"},
                       {"bundle", bundle_path},
                       {"source", source_id},
                       {"checkpoint", checkpoint}};
    if (const fs::path parent = fs::path(out).parent_path(); !parent.empty())
        fs::create_directories(parent);
    save_reliability(rset, out, prov.dump());
    std::cout << "scored " << rset.values.size() << " samples into " << out << '\n';
    return 0;
}

int cmd_hist(const std::string& scores_path, const std::string& out, int bins) {
    const MeasurerHandle ext = import_external_scores(scores_path);
    ReliabilitySet rset;
    rset.measurer_id = "external";
    rset.source_id = "external";
    for (const auto& [id, value] : *ext.scores) {
        rset.sample_ids.push_back(id);
        rset.values.push_back(value);
    }
    const ReliabilityHistogram hist = build_histogram(rset, bins);
    const json prov = {{"command", "hist"}, {"scores", scores_path}, {"bins", bins}};
    if (const fs::path parent = fs::path(out).parent_path(); !parent.empty())
        fs::create_directories(parent);
    save_histogram_csv(hist, out, prov.dump());
    std::cout << "wrote " << out << " (" << rset.values.size() << " scores, zero_count "
              << hist.zero_count << ")\n";
    return 0;
}

int cmd_eval(const std::string& bundle_path, const std::string& checkpoint,
             const std::string& split, const std::string& out, double iou) {
    const DatasetBundle bundle = load_bundle(bundle_path);
    const MeasurerHandle handle = MeasurerHandle::trained(load_checkpoint(checkpoint));
    json report = json::object();
    report["config"] = {{"command", "eval"},
                        {"bundle", bundle_path},
                        {"checkpoint", checkpoint},
                        {"split", split},
                        {"iou_threshold", iou}};
    std::string line;
    if (split == "val" || split == "both") {
        const double acc = evaluate_top1(handle, bundle.val, iou);
        report["val_top1"] = acc;
        line += "val_top1=" + format_double(acc);
    }
    if (split == "test" || split == "both") {
        const double acc = evaluate_top1(handle, bundle.test, iou);
        report["test_top1"] = acc;
        if (!line.empty()) line += ' ';
        line += "test_top1=" + format_double(acc);
    }
    std::cout << line << '\n';
    if (!out.empty()) {
        if (const fs::path parent = fs::path(out).parent_path(); !parent.empty())
            fs::create_directories(parent);
        std::ofstream f(out, std::ios::binary);
        if (!f) throw DataError("cannot write '" + out + "'");
        f << report.dump(2) << '\n';
        std::cout << "wrote " << out << '\n';
    }
    return 0;
}

int cmd_report(const Globals& g, const std::string& bundle_path, const std::string& result_path,
               const std::string& manifest_path) {
    const DatasetBundle bundle = load_bundle(bundle_path);
    std::string cfg_text;
    const SelectionResult result = load_selection_result(result_path, &cfg_text);
    if (cfg_text.empty())
        throw ConfigError("result file carries no embedded configuration to re-derive from");
    const json rc = json::parse(cfg_text, nullptr, false);
    if (rc.is_discarded() || !rc.is_object() || !rc.contains("curriculum"))
        throw ConfigError("result configuration lacks a curriculum section");
    CurriculumConfig cfg;
    from_json(rc.at("curriculum"), cfg);
    cfg.threads = g.threads; // parallelism is a property of this run, not the result
    Manifest manifest;
    const bool with_manifest = !manifest_path.empty();
    if (with_manifest) manifest = load_manifest(manifest_path);
    json prov = {{"command", "report"},
                 {"bundle", bundle_path},
                 {"result", result_path},
                 {"curriculum", cfg}};
    if (with_manifest) prov["manifest"] = manifest_path;
    const ReportPaths paths = write_reports(bundle, result, cfg, with_manifest ? &manifest : nullptr,
                                            g.out_dir, prov.dump());
    for (const std::string& p : paths.histogram_csvs) std::cout << "wrote " << p << '\n';
    std::cout << "wrote " << paths.pr_csv << '\n';
    std::cout << "wrote " << paths.zero_csv << '\n';
    if (!paths.junk_csv.empty()) std::cout << "wrote " << paths.junk_csv << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"curricuforge: reliability-measured curriculum data selection"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_flag = 0;
    int threads_flag = 1;
    std::string out_dir_flag;
    app.add_option("--config", config_path, "JSON config file; flags override its values");
    CLI::Option* seed_opt = app.add_option("--seed", seed_flag, "seed for every random stream");
    CLI::Option* threads_opt =
        app.add_option("--threads", threads_flag, "worker threads (env CURRICUFORGE_THREADS)");
    CLI::Option* out_dir_opt =
        app.add_option("--out-dir", out_dir_flag, "directory for multi-file outputs");

    // gen
    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic world bundle + manifest");
    gen->fallthrough();
    std::string gen_out, gen_manifest, gen_junk, gen_sigma, gen_samples;
    int gen_sources = 1, gen_dim = 8, gen_val = 500, gen_test = 500;
    gen->add_option("--out", gen_out, "bundle output path")->required();
    gen->add_option("--manifest", gen_manifest, "manifest output path (default: <out>.manifest.jsonl)");
    gen->add_option("--sources", gen_sources, "number of sources");
    gen->add_option("--junk", gen_junk, "junk fraction per source (comma list or one value)");
    gen->add_option("--sigma", gen_sigma, "box jitter stddev per source");
    gen->add_option("--samples", gen_samples, "samples per source");
    gen->add_option("--dim", gen_dim, "feature dimension");
    gen->add_option("--val", gen_val, "validation split size");
    gen->add_option("--test", gen_test, "test split size");

    // train-measurer
    CLI::App* trainm = app.add_subcommand("train-measurer", "train a measurer on one source");
    trainm->fallthrough();
    std::string tm_bundle, tm_source, tm_out;
    TrainFlags tm_train;
    trainm->add_option("--bundle", tm_bundle, "input bundle (JSONL)")->required();
    trainm->add_option("--source", tm_source, "source id to train on")->required();
    trainm->add_option("--out", tm_out, "checkpoint output path")->required();
    add_train_flags(trainm, tm_train);

    // score
    CLI::App* score = app.add_subcommand("score", "score a source's reliability with a checkpoint");
    score->fallthrough();
    std::string sc_bundle, sc_source, sc_ckpt, sc_out;
    score->add_option("--bundle", sc_bundle, "input bundle (JSONL)")->required();
    score->add_option("--source", sc_source, "source id to score")->required();
    score->add_option("--checkpoint", sc_ckpt, "measurer checkpoint")->required();
    score->add_option("--out", sc_out, "score file output path")->required();

    // hist
    CLI::App* hist = app.add_subcommand("hist", "build a histogram CSV from a score file");
    hist->fallthrough();
    std::string hs_scores, hs_out;
    int hs_bins = 1000;
    hist->add_option("--scores", hs_scores, "score file (JSONL)")->required();
    hist->add_option("--out", hs_out, "CSV output path")->required();
    hist->add_option("--bins", hs_bins, "histogram bins");

    // ssa
    CLI::App* ssa = app.add_subcommand("ssa", "single-source self-paced selection");
    ssa->fallthrough();
    SelectionFlags ssa_flags;
    add_selection_flags(ssa, ssa_flags);
    ssa->add_option("--source", ssa_flags.source, "source id to select from")->required();
    ssa->add_option("--rounds", ssa_flags.rounds, "re-measuring passes");

    // msa
    CLI::App* msa = app.add_subcommand("msa", "multi-source self-paced selection");
    msa->fallthrough();
    SelectionFlags msa_flags;
    add_selection_flags(msa, msa_flags);
    msa->add_option("--order", msa_flags.order, "source order override (comma list)");

    // eval
    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on labeled splits");
    eval->fallthrough();
    std::string ev_bundle, ev_ckpt, ev_split = "both", ev_out;
    double ev_iou = 0.5;
    eval->add_option("--bundle", ev_bundle, "input bundle (JSONL)")->required();
    eval->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
    eval->add_option("--split", ev_split, "val | test | both")
        ->check(CLI::IsMember({"val", "test", "both"}));
    eval->add_option("--out", ev_out, "JSON report output path");
    eval->add_option("--iou-threshold", ev_iou, "top-1 success cutoff");

    // report
    CLI::App* report = app.add_subcommand("report", "emit histogram/P-R/zero/junk reports");
    report->fallthrough();
    std::string rp_bundle, rp_result, rp_manifest;
    report->add_option("--bundle", rp_bundle, "input bundle (JSONL)")->required();
    report->add_option("--result", rp_result, "selection result file")->required();
    report->add_option("--manifest", rp_manifest, "world manifest for junk accounting");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        Globals g;
        if (!config_path.empty()) g.file = load_config_file(config_path);
        if (seed_opt->count() > 0)
            g.seed = seed_flag;
        else if (g.file.contains("seed"))
            g.seed = g.file.at("seed").get<std::uint64_t>();
        if (threads_opt->count() > 0) {
            g.threads = threads_flag;
        } else if (g.file.contains("threads")) {
            g.threads = g.file.at("threads").get<int>();
        } else if (const char* env = std::getenv("CURRICUFORGE_THREADS")) {
            const std::string text(env);
            int v{};
            const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
            if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
                throw ConfigError("CURRICUFORGE_THREADS must be an integer");
            g.threads = v;
        }
        if (g.threads < 0) throw ConfigError("threads must be nonnegative");
        if (out_dir_opt->count() > 0)
            g.out_dir = out_dir_flag;
        else
            g.out_dir = g.file.value("out_dir", std::string("."));

        if (gen->parsed())
            return cmd_gen(gen, g, gen_out, gen_manifest, gen_sources, gen_junk, gen_sigma,
                           gen_samples, gen_dim, gen_val, gen_test);
        if (trainm->parsed())
            return cmd_train_measurer(trainm, g, tm_bundle, tm_source, tm_out, tm_train);
        if (score->parsed()) return cmd_score(sc_bundle, sc_source, sc_ckpt, sc_out);
        if (hist->parsed()) return cmd_hist(hs_scores, hs_out, hs_bins);
        if (ssa->parsed()) {
            const CurriculumConfig cfg = resolve_curriculum(ssa, ssa_flags, g);
            const json prov = {{"command", "ssa"},
                               {"bundle", ssa_flags.bundle},
                               {"source", ssa_flags.source},
                               {"seed", g.seed},
                               {"curriculum", cfg}};
            const DatasetBundle bundle = load_bundle(ssa_flags.bundle);
            const SelectionResult result = ssa_run(bundle, ssa_flags.source, cfg);
            write_selection_artifacts(result, g, prov);
            return 0;
        }
        if (msa->parsed()) {
            const CurriculumConfig cfg = resolve_curriculum(msa, msa_flags, g);
            json prov = {{"command", "msa"},
                         {"bundle", msa_flags.bundle},
                         {"seed", g.seed},
                         {"curriculum", cfg}};
            std::vector<std::string> order;
            if (given(msa, "--order")) {
                order = split_ids(msa_flags.order);
                prov["order"] = order;
            }
            const DatasetBundle bundle = load_bundle(msa_flags.bundle);
            const SelectionResult result = msa_run(bundle, cfg, order);
            write_selection_artifacts(result, g, prov);
            return 0;
        }
        if (eval->parsed()) return cmd_eval(ev_bundle, ev_ckpt, ev_split, ev_out, ev_iou);
        if (report->parsed()) return cmd_report(g, rp_bundle, rp_result, rp_manifest);
        throw ConfigError("no command given");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
