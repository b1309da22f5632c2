#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "phiscrub/labels.hpp"
#include "phiscrub/tokenize.hpp"

namespace phiscrub {

struct MalformedXml : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OffsetMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyCorpus : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidConfig : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A gold PHI annotation: offsets are code-point indices into the record body.
struct GoldSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string surface;
    PhiCategory label;

    bool operator==(const GoldSpan&) const = default;
};

/// One annotated record: full body text plus sorted, non-overlapping gold spans.
struct AnnotatedRecord {
    std::string id;
    std::string text;
    std::vector<GoldSpan> spans;

    bool operator==(const AnnotatedRecord&) const = default;
};

/// Parses the XML record layout: a root element with a TEXT child holding the
/// body and a TAGS child of empty elements named by category with
/// id/start/end/text/TYPE attributes.
/// Throws MalformedXml, OffsetMismatch, UnknownCategory.
AnnotatedRecord parse_record(const std::string& xml_text);

/// Inverse of parse_record; parse_record(serialize_record(r)) == r.
std::string serialize_record(const AnnotatedRecord& record);

AnnotatedRecord load_record_file(const std::string& path);
void save_record_file(const AnnotatedRecord& record, const std::string& path);

/// Newline-delimited list of record file paths.
std::vector<std::string> load_manifest(const std::string& path);
void save_manifest(const std::vector<std::string>& paths, const std::string& path);

struct CorpusSplit {
    std::vector<AnnotatedRecord> train;
    std::vector<AnnotatedRecord> test;
    bool empty_test_warning = false;
};

/// Deterministic seeded partition. Train size is floor(n * fraction), bumped
/// to 1 (with a warning flag) when the floor would leave training empty.
CorpusSplit split_corpus(const std::vector<AnnotatedRecord>& records,
                         double train_fraction, std::uint64_t seed);

/// Per-sentence token/tag pair. Tags are "O" or "B-LABEL"/"I-LABEL".
struct BioSequence {
    std::vector<Token> tokens;
    std::vector<std::string> tags;
};

struct BioResult {
    std::vector<BioSequence> sequences;
    std::vector<std::string> warnings;  // spans split at sentence boundaries
};

/// Encodes gold spans over tokenized sentences. Tokens overlapping a span are
/// snapped outward (whole token tagged); spans crossing a sentence boundary
/// are split with a warning.
BioResult to_bio(const AnnotatedRecord& record, const std::vector<Sentence>& sentences);

/// Decodes maximal B/I runs back to spans. An I tag without a matching open
/// run is repaired to B.
std::vector<PhiSpan> bio_to_spans(const BioSequence& seq,
                                  SpanSource source = SpanSource::MODEL);

struct GeneratorConfig {
    std::size_t count = 1000;
    std::size_t mean_length = 500;  // characters per record, roughly
    std::map<Label, double> weights;  // per-label template weights
    std::optional<std::uint64_t> seed;  // from the config file, CLI may override

    static GeneratorConfig defaults();
};

/// Flat key=value file: count, mean_length, weight.<LABEL>.
GeneratorConfig load_generator_config(std::istream& in);
GeneratorConfig load_generator_config_file(const std::string& path);

/// Template-based synthetic corpus with exact gold offsets. Deterministic per
/// seed. Substitute for the license-restricted clinical corpus.
std::vector<AnnotatedRecord> generate_synthetic(const GeneratorConfig& config,
                                                std::uint64_t seed);

}  // namespace phiscrub
