#include "phiscrub/eval.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

namespace phiscrub {

namespace {

std::vector<PhiSpan> sorted_checked(std::vector<PhiSpan> spans, const char* which) {
    std::sort(spans.begin(), spans.end(),
              [](const PhiSpan& a, const PhiSpan& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < spans.size(); ++i)
        if (spans[i].start < spans[i - 1].end)
            throw OverlappingInput(std::string(which) + " spans overlap");
    return spans;
}

void finish_counts(LabelCounts& c) {
    c.p = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
    c.r = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
    c.f1 = c.p + c.r > 0.0 ? 2.0 * c.p * c.r / (c.p + c.r) : 0.0;
}

}  // namespace

EvalReport entity_f1(const std::vector<PhiSpan>& gold,
                     const std::vector<PhiSpan>& predicted, MatchMode mode) {
    const auto g = sorted_checked(gold, "gold");
    const auto p = sorted_checked(predicted, "predicted");

    EvalReport report;
    report.mode = mode;
    std::vector<bool> gold_used(g.size(), false);
    for (const auto& pred : p) {
        bool matched = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (gold_used[i] || g[i].label != pred.label) continue;
            const bool hit = mode == MatchMode::EXACT
                                 ? g[i].start == pred.start && g[i].end == pred.end
                                 : g[i].start < pred.end && pred.start < g[i].end;
            if (hit) {
                gold_used[i] = true;
                matched = true;
                break;
            }
        }
        if (matched) ++report.per_label[pred.label].tp;
        else ++report.per_label[pred.label].fp;
    }
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!gold_used[i]) ++report.per_label[g[i].label].fn;

    LabelCounts micro;
    for (auto& [label, counts] : report.per_label) {
        micro.tp += counts.tp;
        micro.fp += counts.fp;
        micro.fn += counts.fn;
        finish_counts(counts);
    }
    finish_counts(micro);
    report.micro_precision = micro.p;
    report.micro_recall = micro.r;
    report.micro_f1 = micro.f1;
    return report;
}

std::string collate_benchmark_text(const std::vector<AnnotatedRecord>& records,
                                   std::size_t target_bytes) {
    if (records.empty()) throw EmptyCorpus("no records to collate");
    std::string out;
    out.reserve(target_bytes + 4096);
    std::size_t i = 0;
    do {
        if (!out.empty()) out += "\n\n";
        out += records[i % records.size()].text;
        ++i;
    } while (out.size() < target_bytes);
    return out;
}

void collate_benchmark_file(const std::vector<AnnotatedRecord>& records,
                            std::size_t target_bytes, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidConfig("cannot write benchmark file: " + path);
    const std::string text = collate_benchmark_text(records, target_bytes);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string host_description() {
    std::string cpu = "unknown cpu";
    std::ifstream info("/proc/cpuinfo");
    std::string line;
    while (std::getline(info, line)) {
        if (line.rfind("model name", 0) == 0) {
            auto colon = line.find(':');
            if (colon != std::string::npos) {
                cpu = line.substr(colon + 1);
                cpu.erase(0, cpu.find_first_not_of(' '));
            }
            break;
        }
    }
    return cpu + " / " + std::to_string(std::thread::hardware_concurrency()) +
           " cores";
}

std::vector<BenchReport> run_benchmark(const Scrubber& scrubber,
                                       const std::string& file_path,
                                       int repetitions) {
    std::vector<BenchReport> reports;
    const std::string host = host_description();
    for (int rep = 0; rep < repetitions; ++rep) {
        BenchReport r;
        r.host = host;
        try {
            std::ifstream in(file_path, std::ios::binary);
            if (!in) throw std::runtime_error("cannot open " + file_path);
            std::ostringstream sink;
            const auto t0 = std::chrono::steady_clock::now();
            ScrubStats stats = scrubber.scrub_stream(in, sink);
            r.wall_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
            r.file_bytes = stats.input_bytes;
            for (const auto& [label, count] : stats.counts) r.peak_spans += count;
            r.throughput_bytes_per_s =
                r.wall_ms > 0.0 ? r.file_bytes / (r.wall_ms / 1000.0) : 0.0;
            r.ok = true;
            if (r.file_bytes == 0) r.reason = "empty input";
        } catch (const std::exception& e) {
            r.ok = false;
            r.reason = e.what();
        }
        reports.push_back(std::move(r));
    }
    return reports;
}

void emit_report(const std::vector<ReportRow>& rows, std::ostream& out) {
    if (rows.empty()) throw InvalidConfig("no report rows");
    out << "approach,f1_micro,p,r,wall_ms,bytes,throughput,outcome,host\n";
    for (const auto& row : rows) {
        out << row.approach << ',';
        if (row.eval) {
            out << row.eval->micro_f1 << ',' << row.eval->micro_precision << ','
                << row.eval->micro_recall << ',';
        } else {
            out << "-,-,-,";
        }
        if (row.bench) {
            if (row.bench->ok) {
                out << row.bench->wall_ms << ',' << row.bench->file_bytes << ','
                    << row.bench->throughput_bytes_per_s << ",OK";
                if (!row.bench->reason.empty()) out << " (" << row.bench->reason << ')';
            } else {
                out << "-," << row.bench->file_bytes << ",-,FAILED ("
                    << row.bench->reason << ')';
            }
            out << ",\"" << row.bench->host << "\"\n";
        } else {
            out << "-,-,-,-,-\n";
        }
    }
}

}  // namespace phiscrub
