#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phiscrub/eval.hpp"
#include "phiscrub/rng.hpp"

using namespace phiscrub;

namespace {

PhiSpan g(std::size_t s, std::size_t e, Label l) {
    return PhiSpan{s, e, l, SpanSource::GOLD, 1.0};
}
PhiSpan m(std::size_t s, std::size_t e, Label l) {
    return PhiSpan{s, e, l, SpanSource::MODEL, 1.0};
}

std::vector<PhiSpan> random_disjoint(Rng& rng, std::size_t max_spans) {
    std::vector<PhiSpan> out;
    std::size_t pos = rng.below(4);
    const std::size_t n = rng.below(max_spans + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t len = 1 + rng.below(5);
        out.push_back(m(pos, pos + len,
                        static_cast<Label>(rng.below(kNumPhiLabels))));
        pos += len + rng.below(4);
    }
    return out;
}

}  // namespace

TEST_CASE("entity scoring examples") {
    const std::vector<PhiSpan> gold = {g(0, 5, Label::NAME), g(9, 13, Label::DATE)};
    auto same = entity_f1(gold, gold, MatchMode::EXACT);
    CHECK(same.micro_precision == 1.0);
    CHECK(same.micro_recall == 1.0);
    CHECK(same.micro_f1 == 1.0);

    auto none = entity_f1(gold, {}, MatchMode::EXACT);
    CHECK(none.micro_precision == 0.0);
    CHECK(none.micro_recall == 0.0);
    CHECK(none.micro_f1 == 0.0);

    auto off = entity_f1({g(0, 5, Label::NAME)}, {m(0, 4, Label::NAME)},
                         MatchMode::EXACT);
    CHECK(off.micro_f1 == 0.0);
    auto lax = entity_f1({g(0, 5, Label::NAME)}, {m(0, 4, Label::NAME)},
                         MatchMode::OVERLAP);
    CHECK(lax.micro_f1 == 1.0);

    // Label must match even when intervals do.
    auto wrong = entity_f1({g(0, 5, Label::NAME)}, {m(0, 5, Label::DATE)},
                           MatchMode::OVERLAP);
    CHECK(wrong.micro_f1 == 0.0);

    CHECK_THROWS_AS(entity_f1({g(0, 5, Label::NAME), g(3, 8, Label::NAME)}, {},
                              MatchMode::EXACT),
                    OverlappingInput);
}

TEST_CASE("count conservation and micro consistency") {
    Rng rng(717);
    for (int round = 0; round < 300; ++round) {
        const auto gold = random_disjoint(rng, 6);
        const auto pred = random_disjoint(rng, 6);
        const auto report = entity_f1(gold, pred, MatchMode::EXACT);
        std::size_t tp = 0, fp = 0, fn = 0;
        for (const auto& [label, c] : report.per_label) {
            tp += c.tp;
            fp += c.fp;
            fn += c.fn;
        }
        CHECK(tp + fn == gold.size());
        CHECK(tp + fp == pred.size());
    }
}

TEST_CASE("overlap mode dominates exact mode") {
    Rng rng(718);
    for (int round = 0; round < 300; ++round) {
        const auto gold = random_disjoint(rng, 5);
        const auto pred = random_disjoint(rng, 5);
        const double exact = entity_f1(gold, pred, MatchMode::EXACT).micro_f1;
        const double lax = entity_f1(gold, pred, MatchMode::OVERLAP).micro_f1;
        CHECK(lax >= exact - 1e-12);
    }
}

TEST_CASE("benchmark collation") {
    std::vector<AnnotatedRecord> records(3);
    records[0].text = "alpha record";
    records[1].text = "beta";
    records[2].text = "gamma text here";

    const auto single = collate_benchmark_text(records, 0);
    CHECK(single == "alpha record");

    const auto big = collate_benchmark_text(records, 2'000'000);
    CHECK(big.size() >= 2'000'000);
    CHECK(big.size() <= 2'000'000 + 20);
    CHECK(big == collate_benchmark_text(records, 2'000'000));
    CHECK(big.substr(0, 18) == "alpha record\n\nbeta");

    CHECK_THROWS_AS(collate_benchmark_text({}, 10), EmptyCorpus);
}

TEST_CASE("report CSV layout") {
    EvalReport eval;
    eval.micro_f1 = 0.5;
    eval.micro_precision = 0.4;
    eval.micro_recall = 0.6;
    BenchReport ok;
    ok.ok = true;
    ok.file_bytes = 100;
    ok.wall_ms = 50.0;
    ok.throughput_bytes_per_s = 2000.0;
    ok.host = "test host";
    BenchReport bad;
    bad.ok = false;
    bad.reason = "broke the system";
    bad.host = "test host";

    std::ostringstream out;
    emit_report({{"a", &eval, nullptr}, {"b", nullptr, &ok}, {"c", nullptr, &bad}},
                out);
    std::istringstream lines(out.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "approach,f1_micro,p,r,wall_ms,bytes,throughput,outcome,host");
    std::getline(lines, line);
    CHECK(line.rfind("a,0.5,0.4,0.6,", 0) == 0);
    std::getline(lines, line);
    CHECK(line.find(",OK,") != std::string::npos);
    std::getline(lines, line);
    CHECK(line.find("-,") != std::string::npos);
    CHECK(line.find("FAILED (broke the system)") != std::string::npos);

    std::ostringstream empty;
    CHECK_THROWS_AS(emit_report({}, empty), InvalidConfig);
}

TEST_CASE("benchmark harness captures failures instead of throwing") {
    GeneratorConfig config = GeneratorConfig::defaults();
    config.count = 20;
    const auto records = generate_synthetic(config, 55);
    std::vector<BioSequence> data;
    for (const auto& rec : records) {
        auto bio = to_bio(rec, analyze(Text(rec.text), default_abbreviations()));
        for (auto& seq : bio.sequences)
            if (!seq.tokens.empty()) data.push_back(std::move(seq));
    }
    TrainConfig tc;
    tc.max_iterations = 25;
    const CrfModel model = train(data, tc);
    const Scrubber scrubber(&model, &default_pattern_table(),
                            ScrubConfig::defaults(), default_abbreviations());

    const auto dir = std::filesystem::temp_directory_path() / "phiscrub_eval_test";
    std::filesystem::create_directories(dir);
    const auto file = (dir / "bench.txt").string();
    collate_benchmark_file(records, 20'000, file);

    const auto reports = run_benchmark(scrubber, file, 3);
    REQUIRE(reports.size() == 3);
    for (const auto& r : reports) {
        CHECK(r.ok);
        CHECK(r.file_bytes >= 20'000);
        CHECK(r.throughput_bytes_per_s > 0.0);
        CHECK(!r.host.empty());
        CHECK(r.peak_spans > 0);
    }

    // Empty input: OK but flagged, throughput zero by convention.
    const auto empty_file = (dir / "empty.txt").string();
    std::ofstream(empty_file).close();
    const auto empty_reports = run_benchmark(scrubber, empty_file, 1);
    REQUIRE(empty_reports.size() == 1);
    CHECK(empty_reports[0].ok);
    CHECK(empty_reports[0].file_bytes == 0);
    CHECK(!empty_reports[0].reason.empty());

    // Missing input: captured, not thrown.
    const auto missing = run_benchmark(scrubber, (dir / "nope.txt").string(), 1);
    REQUIRE(missing.size() == 1);
    CHECK(!missing[0].ok);
    CHECK(!missing[0].reason.empty());

    std::filesystem::remove_all(dir);
}
