#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "phiscrub/corpus.hpp"
#include "phiscrub/labels.hpp"
#include "phiscrub/scrub.hpp"

namespace phiscrub {

struct OverlappingInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MatchMode { EXACT, OVERLAP };

struct LabelCounts {
    std::size_t tp = 0, fp = 0, fn = 0;
    double p = 0.0, r = 0.0, f1 = 0.0;
};

struct EvalReport {
    double micro_precision = 0.0;
    double micro_recall = 0.0;
    double micro_f1 = 0.0;
    std::map<Label, LabelCounts> per_label;
    MatchMode mode = MatchMode::EXACT;
};

/// Entity-level scoring. EXACT: (start, end, label) all equal. OVERLAP:
/// labels equal and intervals intersect, each gold matched at most once,
/// greedy by position. Precision is 0 when there are no predictions.
/// Throws OverlappingInput when either list overlaps itself.
EvalReport entity_f1(const std::vector<PhiSpan>& gold,
                     const std::vector<PhiSpan>& predicted, MatchMode mode);

struct BenchReport {
    std::size_t file_bytes = 0;
    double wall_ms = 0.0;
    double throughput_bytes_per_s = 0.0;
    std::size_t peak_spans = 0;
    bool ok = false;
    std::string reason;  // set when not ok
    std::string host;    // CPU model and core count
};

/// Record texts cycled with blank-line separators until the total is at
/// least target_bytes; target 0 yields a single record. Deterministic.
/// Throws EmptyCorpus on an empty record set.
std::string collate_benchmark_text(const std::vector<AnnotatedRecord>& records,
                                   std::size_t target_bytes);
void collate_benchmark_file(const std::vector<AnnotatedRecord>& records,
                            std::size_t target_bytes, const std::string& path);

/// CPU model string and core count, for report context.
std::string host_description();

/// scrub_stream over the file, once per repetition. Failures are captured
/// in the report outcome, never thrown.
std::vector<BenchReport> run_benchmark(const Scrubber& scrubber,
                                       const std::string& file_path,
                                       int repetitions);

struct ReportRow {
    std::string approach;
    const EvalReport* eval = nullptr;   // either may be null
    const BenchReport* bench = nullptr;
};

/// CSV with columns approach,f1_micro,p,r,wall_ms,bytes,throughput,outcome,
/// host. Failed benchmarks get "-" in the time columns plus the reason.
/// Throws InvalidConfig on an empty row set.
void emit_report(const std::vector<ReportRow>& rows, std::ostream& out);

}  // namespace phiscrub
