#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "phiscrub/crf.hpp"
#include "phiscrub/labels.hpp"
#include "phiscrub/regex_phi.hpp"
#include "phiscrub/tokenize.hpp"

namespace phiscrub {

struct OverlapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ModelNotLoaded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ReplacementMode { PLACEHOLDER, REDACT_BLACKOUT, LABEL_TAG };

/// NAME->PERSON, DATE->DATE, PHONE/FAX/ZIP/IDNUM->NUMBERS, EMAIL->EMAIL,
/// URL->URL, IPADDRESS->IPADDRESS, ORG->ORG, location labels->LOCATION,
/// AGE->AGE, PROFESSION->PROFESSION.
const std::map<Label, std::string>& default_placeholder_map();

/// LABEL<TAB>PLACEHOLDER per line, '#' comments.
std::map<Label, std::string> load_placeholder_map(std::istream& in);
std::map<Label, std::string> load_placeholder_map_file(const std::string& path);

struct ScrubConfig {
    std::map<Label, std::string> placeholder_map = default_placeholder_map();
    ReplacementMode mode = ReplacementMode::PLACEHOLDER;
    std::size_t chunk_char_limit = 100000;
    std::set<Label> enabled_labels;  // PROFESSION is off by default

    static ScrubConfig defaults();
    void validate() const;  // placeholders [A-Z]+, chunk limit >= 1000
};

struct Replacement {
    std::size_t input_start = 0, input_end = 0;    // code points in the input
    std::size_t output_start = 0, output_end = 0;  // code points in the output
    Label label = Label::O;
    std::string placeholder;
};

struct ScrubStats {
    std::map<Label, std::size_t> counts;
    std::size_t input_chars = 0;
    std::size_t input_bytes = 0;
    double wall_ms = 0.0;
};

struct ScrubResult {
    std::string scrubbed_text;
    std::vector<Replacement> replacements;
    ScrubStats stats;
};

/// Union with precedence: REGEX beats MODEL on overlap; within a source the
/// longer span wins, then the leftmost. Inputs must each be internally
/// disjoint; result is disjoint and sorted.
std::vector<PhiSpan> merge_spans(const std::vector<PhiSpan>& regex_spans,
                                 const std::vector<PhiSpan>& model_spans);

/// Replaces each span per the config; everything outside spans is copied
/// verbatim. Spans must be disjoint, sorted, in bounds (OverlapError).
ScrubResult apply_replacements(const Text& text, const std::vector<PhiSpan>& spans,
                               const ScrubConfig& config);

/// Immutable scrubbing pipeline: sentence split -> chunk (one-sentence
/// overlap) -> regex + CRF decode -> merge -> replace. Shareable across
/// threads once constructed.
class Scrubber {
  public:
    Scrubber(const CrfModel* model, const PatternTable* patterns, ScrubConfig config,
             std::set<std::string> abbreviations);

    ScrubResult scrub_document(const std::string& text) const;

    /// Bounded-memory variant; output bytes equal scrub_document of the whole
    /// input. Optionally collects the audit map.
    ScrubStats scrub_stream(std::istream& in, std::ostream& out,
                            std::vector<Replacement>* audit = nullptr) const;

    /// Detected spans for a standalone text (used by evaluation).
    std::vector<PhiSpan> detect(const Text& text) const;

    const ScrubConfig& config() const { return config_; }

  private:
    struct SegmentOut;
    void process_segment(const std::string& segment, SegmentOut& state) const;

    const CrfModel* model_;
    const PatternTable* patterns_;
    ScrubConfig config_;
    std::set<std::string> abbreviations_;
    std::set<std::string> placeholder_words_;
};

}  // namespace phiscrub
