#include "phiscrub/scrub.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "phiscrub/corpus.hpp"

namespace phiscrub {

const std::map<Label, std::string>& default_placeholder_map() {
    static const std::map<Label, std::string> map = {
        {Label::NAME, "PERSON"},      {Label::PROFESSION, "PROFESSION"},
        {Label::ORG, "ORG"},          {Label::STREET, "LOCATION"},
        {Label::CITY, "LOCATION"},    {Label::STATE, "LOCATION"},
        {Label::COUNTRY, "LOCATION"}, {Label::ZIP, "NUMBERS"},
        {Label::LOC_OTHER, "LOCATION"}, {Label::AGE, "AGE"},
        {Label::DATE, "DATE"},        {Label::PHONE, "NUMBERS"},
        {Label::FAX, "NUMBERS"},      {Label::EMAIL, "EMAIL"},
        {Label::URL, "URL"},          {Label::IPADDRESS, "IPADDRESS"},
        {Label::IDNUM, "NUMBERS"},
    };
    return map;
}

std::map<Label, std::string> load_placeholder_map(std::istream& in) {
    std::map<Label, std::string> out = default_placeholder_map();
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw InvalidConfig("placeholder map line needs LABEL<TAB>PLACEHOLDER");
        out[label_from_name(line.substr(0, tab))] = line.substr(tab + 1);
    }
    return out;
}

std::map<Label, std::string> load_placeholder_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open placeholder map: " + path);
    return load_placeholder_map(in);
}

ScrubConfig ScrubConfig::defaults() {
    ScrubConfig cfg;
    for (int l = 0; l < kNumPhiLabels; ++l) {
        const Label label = static_cast<Label>(l);
        if (label != Label::PROFESSION) cfg.enabled_labels.insert(label);
    }
    return cfg;
}

void ScrubConfig::validate() const {
    if (chunk_char_limit < 1000)
        throw InvalidConfig("chunk_char_limit must be at least 1000");
    for (const auto& [label, ph] : placeholder_map) {
        if (ph.empty()) throw InvalidConfig("empty placeholder for " + label_name(label));
        for (char c : ph)
            if (c < 'A' || c > 'Z')
                throw InvalidConfig("placeholder must match [A-Z]+: " + ph);
    }
}

std::vector<PhiSpan> merge_spans(const std::vector<PhiSpan>& regex_spans,
                                 const std::vector<PhiSpan>& model_spans) {
    std::vector<PhiSpan> candidates;
    candidates.reserve(regex_spans.size() + model_spans.size());
    candidates.insert(candidates.end(), regex_spans.begin(), regex_spans.end());
    candidates.insert(candidates.end(), model_spans.begin(), model_spans.end());
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const PhiSpan& a, const PhiSpan& b) {
                         const bool ar = a.source == SpanSource::REGEX;
                         const bool br = b.source == SpanSource::REGEX;
                         if (ar != br) return ar;  // regex first
                         const auto la = a.end - a.start, lb = b.end - b.start;
                         if (la != lb) return la > lb;
                         return a.start < b.start;
                     });
    std::vector<PhiSpan> kept;
    for (const auto& c : candidates) {
        bool overlaps = false;
        for (const auto& k : kept) {
            if (c.start < k.end && k.start < c.end) {
                overlaps = true;
                break;
            }
        }
        if (!overlaps) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end(),
              [](const PhiSpan& a, const PhiSpan& b) { return a.start < b.start; });
    return kept;
}

namespace {

std::string replacement_text(const PhiSpan& span, const ScrubConfig& config) {
    switch (config.mode) {
        case ReplacementMode::PLACEHOLDER: {
            auto it = config.placeholder_map.find(span.label);
            return it != config.placeholder_map.end() ? it->second
                                                      : label_name(span.label);
        }
        case ReplacementMode::REDACT_BLACKOUT:
            return std::string(span.end - span.start, '#');
        case ReplacementMode::LABEL_TAG:
            return "[" + label_name(span.label) + "]";
    }
    return {};
}

}  // namespace

ScrubResult apply_replacements(const Text& text, const std::vector<PhiSpan>& spans,
                               const ScrubConfig& config) {
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (spans[i].start >= spans[i].end || spans[i].end > text.size())
            throw OverlapError("span out of bounds");
        if (i > 0 && spans[i].start < spans[i - 1].end)
            throw OverlapError("spans overlap or are unsorted");
    }
    ScrubResult result;
    result.scrubbed_text.reserve(text.bytes().size());
    std::size_t prev = 0, out_cp = 0;
    for (const auto& span : spans) {
        result.scrubbed_text += text.slice(prev, span.start);
        out_cp += span.start - prev;
        const std::string rep = replacement_text(span, config);
        result.replacements.push_back(Replacement{span.start, span.end, out_cp,
                                                  out_cp + rep.size(), span.label, rep});
        result.scrubbed_text += rep;
        out_cp += rep.size();  // replacements are ASCII
        prev = span.end;
        ++result.stats.counts[span.label];
    }
    result.scrubbed_text += text.slice(prev, text.size());
    result.stats.input_chars = text.size();
    result.stats.input_bytes = text.bytes().size();
    return result;
}

Scrubber::Scrubber(const CrfModel* model, const PatternTable* patterns,
                   ScrubConfig config, std::set<std::string> abbreviations)
    : model_(model), patterns_(patterns), config_(std::move(config)),
      abbreviations_(std::move(abbreviations)) {
    config_.validate();
    for (const auto& [label, ph] : config_.placeholder_map)
        placeholder_words_.insert(ph);
}

std::vector<PhiSpan> Scrubber::detect(const Text& text) const {
    if (!model_) throw ModelNotLoaded("no CRF model loaded");
    const auto sentences = analyze(text, abbreviations_);
    const std::size_t n = sentences.size();

    std::vector<PhiSpan> regex_all, model_all;
    std::size_t a = 0;
    while (a < n) {
        std::size_t b = a + 1;
        while (b < n && sentences[b].end - sentences[a].start <= config_.chunk_char_limit)
            ++b;
        // Chunks overlap by one sentence; the later chunk owns the overlap.
        const bool overlap = b < n && b - a >= 2;
        const std::size_t owned_hi = overlap ? b - 2 : b - 1;
        const std::size_t emit_lo = sentences[a].start;
        const std::size_t emit_hi = sentences[owned_hi].end;

        if (patterns_) {
            const std::string chunk =
                text.slice(sentences[a].start, sentences[b - 1].end);
            for (auto span : recognize(Text(chunk), *patterns_)) {
                span.start += sentences[a].start;
                span.end += sentences[a].start;
                if (span.start >= emit_lo && span.start < emit_hi &&
                    config_.enabled_labels.count(span.label))
                    regex_all.push_back(span);
            }
        }
        for (std::size_t s = a; s <= owned_hi; ++s) {
            if (sentences[s].tokens.empty()) continue;
            auto [tags, score] = viterbi(*model_, sentences[s].tokens);
            (void)score;
            for (const auto& span :
                 bio_to_spans(BioSequence{sentences[s].tokens, tags})) {
                if (!config_.enabled_labels.count(span.label)) continue;
                // Never re-match placeholder words (keeps scrubbing idempotent).
                bool placeholderish = false;
                std::istringstream words(text.slice(span.start, span.end));
                std::string word;
                while (words >> word) {
                    if (placeholder_words_.count(word)) {
                        placeholderish = true;
                        break;
                    }
                }
                if (!placeholderish) model_all.push_back(span);
            }
        }
        if (overlap) a = b - 1;
        else a = b;
    }
    return merge_spans(regex_all, model_all);
}

struct Scrubber::SegmentOut {
    std::ostream* out = nullptr;
    std::vector<Replacement>* audit = nullptr;
    ScrubStats stats;
    std::size_t in_cp = 0;
    std::size_t out_cp = 0;
};

void Scrubber::process_segment(const std::string& segment, SegmentOut& state) const {
    Text text(segment);
    const auto spans = detect(text);
    ScrubResult local = apply_replacements(text, spans, config_);
    state.out->write(local.scrubbed_text.data(),
                     static_cast<std::streamsize>(local.scrubbed_text.size()));
    if (state.audit) {
        for (auto r : local.replacements) {
            r.input_start += state.in_cp;
            r.input_end += state.in_cp;
            r.output_start += state.out_cp;
            r.output_end += state.out_cp;
            state.audit->push_back(std::move(r));
        }
    }
    for (const auto& [label, count] : local.stats.counts)
        state.stats.counts[label] += count;
    state.stats.input_chars += local.stats.input_chars;
    state.stats.input_bytes += local.stats.input_bytes;
    state.in_cp += text.size();
    state.out_cp += utf8::count(local.scrubbed_text);
}

namespace {

bool is_space_byte(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

/// Byte position where the next segment starts: after a blank line if one
/// exists, else after a sentence boundary, else after the last whitespace.
std::size_t find_cut(const std::string& buf, const std::set<std::string>& abbrevs) {
    auto blank = buf.rfind("\n\n");
    if (blank != std::string::npos) {
        std::size_t q = blank;
        while (q < buf.size() && is_space_byte(buf[q])) ++q;
        return q;
    }
    const std::size_t scan_limit = buf.size() > 64 ? buf.size() - 64 : 0;
    for (std::size_t i = scan_limit; i-- > 0;) {
        const char c = buf[i];
        if (c != '.' && c != '!' && c != '?') continue;
        if (!is_space_byte(buf[i + 1])) continue;
        std::size_t k = i + 1;
        int newlines = 0;
        while (k < buf.size() && is_space_byte(buf[k])) {
            if (buf[k] == '\n') ++newlines;
            ++k;
        }
        if (k >= buf.size()) continue;
        const unsigned char next = static_cast<unsigned char>(buf[k]);
        const bool continuation =
            newlines >= 1 || (next >= 'A' && next <= 'Z') || (next >= '0' && next <= '9');
        if (!continuation) continue;
        if (c == '.') {
            std::size_t w = i;
            while (w > 0 && !is_space_byte(buf[w - 1])) --w;
            if (abbrevs.count(buf.substr(w, i - w + 1))) continue;
        }
        return k;
    }
    for (std::size_t i = buf.size(); i-- > 0;)
        if (is_space_byte(buf[i])) return i + 1;
    // No whitespace at all: cut at a UTF-8 character boundary.
    std::size_t cut = buf.size();
    while (cut > 0 && (static_cast<unsigned char>(buf[cut - 1]) & 0xC0) == 0x80) --cut;
    if (cut > 0 && (static_cast<unsigned char>(buf[cut - 1]) & 0xC0) == 0xC0) --cut;
    return cut == 0 ? buf.size() : cut;
}

}  // namespace

ScrubStats Scrubber::scrub_stream(std::istream& in, std::ostream& out,
                                  std::vector<Replacement>* audit) const {
    const auto t0 = std::chrono::steady_clock::now();
    SegmentOut state;
    state.out = &out;
    state.audit = audit;

    const std::size_t threshold = 2 * config_.chunk_char_limit;
    std::string buffer;
    std::vector<char> block(65536);
    while (in) {
        in.read(block.data(), static_cast<std::streamsize>(block.size()));
        buffer.append(block.data(), static_cast<std::size_t>(in.gcount()));
        while (buffer.size() >= threshold) {
            const std::size_t cut = find_cut(buffer, abbreviations_);
            if (cut == 0 || cut > buffer.size()) break;
            process_segment(buffer.substr(0, cut), state);
            buffer.erase(0, cut);
            if (cut == 0) break;
        }
    }
    if (in.bad()) throw std::runtime_error("read error on scrub input");
    if (!buffer.empty()) process_segment(buffer, state);
    out.flush();
    if (!out) throw std::runtime_error("write error on scrub output");

    state.stats.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
    return state.stats;
}

ScrubResult Scrubber::scrub_document(const std::string& text) const {
    std::istringstream in(text);
    std::ostringstream out;
    ScrubResult result;
    result.stats = scrub_stream(in, out, &result.replacements);
    result.scrubbed_text = out.str();
    return result;
}

}  // namespace phiscrub
