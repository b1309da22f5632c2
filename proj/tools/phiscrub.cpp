#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "phiscrub/corpus.hpp"
#include "phiscrub/crf.hpp"
#include "phiscrub/eval.hpp"
#include "phiscrub/service.hpp"

#include <httplib.h>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitTraining = 3;
constexpr int kExitModelLoad = 4;
constexpr int kExitThreshold = 5;

using namespace phiscrub;

std::vector<AnnotatedRecord> load_corpus(const std::string& manifest_path) {
    std::vector<AnnotatedRecord> records;
    for (const auto& path : load_manifest(manifest_path))
        records.push_back(load_record_file(path));
    if (records.empty()) throw EmptyCorpus("manifest lists no records");
    return records;
}

std::vector<BioSequence> corpus_to_bio(const std::vector<AnnotatedRecord>& records,
                                       bool quiet) {
    std::vector<BioSequence> data;
    const auto& abbrevs = default_abbreviations();
    for (const auto& record : records) {
        Text text(record.text);
        BioResult bio = to_bio(record, analyze(text, abbrevs));
        for (auto& seq : bio.sequences)
            if (!seq.tokens.empty()) data.push_back(std::move(seq));
        if (!quiet)
            for (const auto& warning : bio.warnings)
                std::cerr << "warning: " << record.id << ": " << warning << '\n';
    }
    return data;
}

int cmd_gen(const std::string& config_path, const std::string& out_dir,
            std::uint64_t seed, bool has_seed, bool quiet) {
    GeneratorConfig config = config_path.empty()
                                 ? GeneratorConfig::defaults()
                                 : load_generator_config_file(config_path);
    const std::uint64_t effective_seed =
        has_seed ? seed : config.seed.value_or(42);

    std::filesystem::create_directories(out_dir);
    const auto records = generate_synthetic(config, effective_seed);
    std::vector<std::string> paths;
    for (const auto& record : records) {
        std::string path = out_dir + "/" + record.id + ".xml";
        save_record_file(record, path);
        paths.push_back(std::move(path));
    }
    save_manifest(paths, out_dir + "/manifest.txt");
    if (!quiet)
        std::cout << records.size() << " records written to " << out_dir
                  << " (seed " << effective_seed << ")\n";
    return kExitOk;
}

int cmd_train(const std::string& corpus_manifest, const std::string& model_out,
              const TrainConfig& config, bool quiet) {
    const auto records = load_corpus(corpus_manifest);
    const auto data = corpus_to_bio(records, quiet);

    if (!quiet)
        std::cout << "training: c1=" << config.c1 << " c2=" << config.c2
                  << " max_iterations=" << config.max_iterations << " templates="
                  << (config.templates.mode == TemplateMode::SHAPE_POS_ONLY
                          ? "shape-pos-only"
                          : "extended")
                  << '\n';
    TrainLog log;
    CrfModel model = train(data, config, &log);
    if (!quiet) {
        for (std::size_t i = 0; i < log.objective.size(); ++i)
            std::cout << "iter " << i << " objective " << log.objective[i] << '\n';
        std::cout << (log.converged ? "converged" : "stopped") << " after "
                  << log.iterations << " iterations; " << model.num_features()
                  << " features, " << model.num_labels() << " labels\n";
    }
    model.save_file(model_out);
    return kExitOk;
}

int cmd_scrub(const std::string& manifest_path, const std::string& input,
              const std::string& output, const std::string& audit_path, bool quiet) {
    const auto pipeline = load_pipeline(PipelineManifest::load_file(manifest_path));

    std::ifstream file_in;
    std::istream* in = &std::cin;
    if (input != "-") {
        file_in.open(input, std::ios::binary);
        if (!file_in) throw InvalidConfig("cannot open input: " + input);
        in = &file_in;
    }
    std::ofstream file_out;
    std::ostream* out = &std::cout;
    if (output != "-") {
        file_out.open(output, std::ios::binary);
        if (!file_out) throw InvalidConfig("cannot open output: " + output);
        out = &file_out;
    }

    std::vector<Replacement> audit;
    ScrubStats stats = pipeline->scrubber.scrub_stream(
        *in, *out, audit_path.empty() ? nullptr : &audit);
    if (!audit_path.empty()) {
        std::ofstream audit_out(audit_path);
        if (!audit_out) throw InvalidConfig("cannot open audit file: " + audit_path);
        audit_out << "input_start\tinput_end\toutput_start\toutput_end\tlabel\t"
                     "placeholder\n";
        for (const auto& r : audit)
            audit_out << r.input_start << '\t' << r.input_end << '\t'
                      << r.output_start << '\t' << r.output_end << '\t'
                      << label_name(r.label) << '\t' << r.placeholder << '\n';
    }
    if (!quiet) {
        std::size_t total = 0;
        for (const auto& [label, n] : stats.counts) total += n;
        std::cerr << total << " spans replaced in " << stats.input_bytes
                  << " bytes (" << stats.wall_ms << " ms)\n";
    }
    return kExitOk;
}

int cmd_eval(const std::string& manifest_path, const std::string& corpus_manifest,
             MatchMode mode, double min_f1, bool quiet) {
    const auto pipeline = load_pipeline(PipelineManifest::load_file(manifest_path));
    const auto records = load_corpus(corpus_manifest);
    const auto& enabled = pipeline->scrubber.config().enabled_labels;

    std::vector<PhiSpan> gold, predicted;
    std::size_t offset = 0;  // shift records onto one disjoint axis
    for (const auto& record : records) {
        Text text(record.text);
        for (const auto& span : record.spans) {
            const Label label = normalize_label(span.label);
            if (!enabled.count(label)) continue;
            gold.push_back(PhiSpan{span.start + offset, span.end + offset, label,
                                   SpanSource::GOLD, 1.0});
        }
        for (auto span : pipeline->scrubber.detect(text)) {
            span.start += offset;
            span.end += offset;
            predicted.push_back(span);
        }
        offset += text.size() + 1;
    }
    EvalReport report = entity_f1(gold, predicted, mode);
    emit_report({{mode == MatchMode::EXACT ? "crf+regex (exact)" : "crf+regex (overlap)",
                  &report, nullptr}},
                std::cout);
    if (!quiet) {
        for (const auto& [label, c] : report.per_label)
            std::cerr << label_name(label) << ": tp=" << c.tp << " fp=" << c.fp
                      << " fn=" << c.fn << " f1=" << c.f1 << '\n';
    }
    if (min_f1 >= 0.0 && report.micro_f1 < min_f1) {
        std::cerr << "f1 " << report.micro_f1 << " below threshold " << min_f1 << '\n';
        return kExitThreshold;
    }
    return kExitOk;
}

int cmd_bench(const std::string& manifest_path, const std::string& file,
              int repetitions, double max_wall_ms) {
    const auto pipeline = load_pipeline(PipelineManifest::load_file(manifest_path));
    const auto reports = run_benchmark(pipeline->scrubber, file, repetitions);
    std::vector<ReportRow> rows;
    for (const auto& r : reports) rows.push_back({"crf+regex", nullptr, &r});
    emit_report(rows, std::cout);
    for (const auto& r : reports) {
        if (!r.ok) {
            std::cerr << "benchmark failed: " << r.reason << '\n';
            return kExitThreshold;
        }
        if (max_wall_ms >= 0.0 && r.wall_ms > max_wall_ms) {
            std::cerr << "wall time " << r.wall_ms << " ms above threshold "
                      << max_wall_ms << " ms\n";
            return kExitThreshold;
        }
    }
    return kExitOk;
}

int cmd_serve(const std::string& manifest_path, const std::string& bind, int port,
              std::size_t max_body, bool quiet) {
    const auto pipeline = load_pipeline(PipelineManifest::load_file(manifest_path));
    ServiceConfig config;
    config.max_body_bytes = max_body;
    auto server = make_server(pipeline->scrubber, config);
    if (!quiet) std::cerr << "listening on " << bind << ':' << port << '\n';
    if (!server->listen(bind, port)) {
        std::cerr << "cannot bind " << bind << ':' << port << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PHI scrubbing pipeline: generate, train, scrub, evaluate, serve"};
    app.require_subcommand(1);
    app.fallthrough();  // let global flags appear after the subcommand

    std::string manifest;
    std::uint64_t seed = 42;
    bool quiet = false;
    app.add_option("--manifest", manifest, "Pipeline manifest (JSON)");
    auto* seed_opt = app.add_option("--seed", seed, "Seed for seeded commands");
    app.add_flag("--quiet", quiet, "Suppress progress output");

    auto* gen = app.add_subcommand("gen", "Generate a synthetic annotated corpus");
    std::string gen_config, gen_out;
    gen->add_option("--config", gen_config, "Generator config (key=value)");
    gen->add_option("--out", gen_out, "Output directory")->required();

    auto* tr = app.add_subcommand("train", "Train the sequence model");
    std::string tr_corpus, tr_model;
    TrainConfig tr_config;
    bool shape_pos_only = false;
    tr->add_option("--corpus", tr_corpus, "Corpus manifest")->required();
    tr->add_option("--out", tr_model, "Model output path")->required();
    tr->add_option("--c1", tr_config.c1, "L1 coefficient");
    tr->add_option("--c2", tr_config.c2, "L2 coefficient");
    tr->add_option("--max-iterations", tr_config.max_iterations, "Iteration cap");
    tr->add_option("--tol", tr_config.convergence_tol, "Relative convergence tolerance");
    tr->add_option("--min-feature-count", tr_config.min_feature_count,
                   "Drop features seen fewer times");
    tr->add_flag("--shape-pos-only", shape_pos_only, "Casing and POS templates only");

    auto* sc = app.add_subcommand("scrub", "Scrub a document ('-' for stdio)");
    std::string sc_in = "-", sc_out = "-", sc_audit;
    sc->add_option("input", sc_in, "Input path or '-'");
    sc->add_option("output", sc_out, "Output path or '-'");
    sc->add_option("--audit", sc_audit, "Write replacement audit TSV here");

    auto* ev = app.add_subcommand("eval", "Score the pipeline on a gold corpus");
    std::string ev_corpus, ev_mode = "exact";
    double min_f1 = -1.0;
    ev->add_option("--corpus", ev_corpus, "Corpus manifest")->required();
    ev->add_option("--mode", ev_mode, "exact or overlap")
        ->check(CLI::IsMember({"exact", "overlap"}));
    ev->add_option("--min-f1", min_f1, "Exit 5 when micro F1 falls below this");

    auto* be = app.add_subcommand("bench", "Time scrub_stream on a file");
    std::string be_file;
    int be_reps = 1;
    double max_wall_ms = -1.0;
    be->add_option("--file", be_file, "Input file")->required();
    be->add_option("--reps", be_reps, "Repetitions")->check(CLI::PositiveNumber);
    be->add_option("--max-wall-ms", max_wall_ms, "Exit 5 when slower than this");

    auto* se = app.add_subcommand("serve", "Run the HTTP scrubbing service");
    std::string bind = "127.0.0.1";
    int port = 8080;
    std::size_t max_body = 16 * 1024 * 1024;
    se->add_option("--bind", bind, "Bind address");
    se->add_option("--port", port, "Port");
    se->add_option("--max-body-bytes", max_body, "Request body cap");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) return cmd_gen(gen_config, gen_out, seed, !seed_opt->empty(), quiet);
        if (*tr) {
            if (shape_pos_only) tr_config.templates.mode = TemplateMode::SHAPE_POS_ONLY;
            return cmd_train(tr_corpus, tr_model, tr_config, quiet);
        }
        if (manifest.empty())
            throw InvalidConfig("--manifest is required for this command");
        if (*sc) return cmd_scrub(manifest, sc_in, sc_out, sc_audit, quiet);
        if (*ev)
            return cmd_eval(manifest, ev_corpus,
                            ev_mode == "overlap" ? MatchMode::OVERLAP : MatchMode::EXACT,
                            min_f1, quiet);
        if (*be) return cmd_bench(manifest, be_file, be_reps, max_wall_ms);
        if (*se) return cmd_serve(manifest, bind, port, max_body, quiet);
    } catch (const DivergedOptimization& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitTraining;
    } catch (const EmptyDataset& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitTraining;
    } catch (const ModelFormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitModelLoad;
    } catch (const ModelNotLoaded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitModelLoad;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}
