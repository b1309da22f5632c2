#include "phiscrub/corpus.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "phiscrub/rng.hpp"
#include "phiscrub/text.hpp"

namespace phiscrub {

namespace pt = boost::property_tree;

AnnotatedRecord parse_record(const std::string& xml_text) {
    pt::ptree tree;
    std::istringstream in(xml_text);
    try {
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw MalformedXml(e.what());
    }
    if (tree.empty()) throw MalformedXml("empty document");

    const auto& root = tree.front().second;
    AnnotatedRecord record;
    record.id = root.get<std::string>("<xmlattr>.id", "");
    auto text_node = root.get_child_optional("TEXT");
    if (!text_node) throw MalformedXml("missing TEXT element");
    record.text = text_node->get_value<std::string>();

    Text body(record.text);
    auto tags = root.get_child_optional("TAGS");
    if (tags) {
        for (const auto& [name, node] : *tags) {
            if (name == "<xmlattr>") continue;
            Category cat = category_from_name(name);
            auto type_attr = node.get<std::string>("<xmlattr>.TYPE", "");
            std::optional<Subtype> sub = subtype_from_name(type_attr);
            if (!type_attr.empty() && !sub)
                throw UnknownCategory("unknown subtype: " + type_attr);
            GoldSpan span{0, 0, "", PhiCategory(cat, sub)};
            try {
                span.start = node.get<std::size_t>("<xmlattr>.start");
                span.end = node.get<std::size_t>("<xmlattr>.end");
            } catch (const pt::ptree_error& e) {
                throw MalformedXml(std::string("bad tag offsets: ") + e.what());
            }
            span.surface = node.get<std::string>("<xmlattr>.text", "");
            if (span.start >= span.end || span.end > body.size())
                throw OffsetMismatch("span offsets out of range for tag " + name);
            if (body.slice(span.start, span.end) != span.surface)
                throw OffsetMismatch("surface does not match text slice at " +
                                     std::to_string(span.start));
            record.spans.push_back(std::move(span));
        }
    }
    std::sort(record.spans.begin(), record.spans.end(),
              [](const GoldSpan& a, const GoldSpan& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < record.spans.size(); ++i) {
        if (record.spans[i].start < record.spans[i - 1].end)
            throw OffsetMismatch("overlapping gold spans");
    }
    return record;
}

std::string serialize_record(const AnnotatedRecord& record) {
    pt::ptree root;
    root.put("<xmlattr>.id", record.id);
    root.put("TEXT", record.text);
    pt::ptree tags;
    std::size_t i = 0;
    for (const auto& span : record.spans) {
        pt::ptree node;
        node.put("<xmlattr>.id", "P" + std::to_string(i++));
        node.put("<xmlattr>.start", span.start);
        node.put("<xmlattr>.end", span.end);
        node.put("<xmlattr>.text", span.surface);
        node.put("<xmlattr>.TYPE",
                 span.label.subtype() ? subtype_name(*span.label.subtype()) : "");
        tags.add_child(category_name(span.label.category()), node);
    }
    root.add_child("TAGS", tags);
    pt::ptree doc;
    doc.add_child("PhiRecord", root);
    std::ostringstream out;
    pt::write_xml(out, doc);
    return out.str();
}

AnnotatedRecord load_record_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedXml("cannot open record file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_record(buf.str());
}

void save_record_file(const AnnotatedRecord& record, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write record file: " + path);
    out << serialize_record(record);
}

std::vector<std::string> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

void save_manifest(const std::vector<std::string>& paths, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    for (const auto& p : paths) out << p << "\n";
}

CorpusSplit split_corpus(const std::vector<AnnotatedRecord>& records,
                         double train_fraction, std::uint64_t seed) {
    if (records.empty()) throw EmptyCorpus("no records to split");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InvalidConfig("train_fraction must be in (0, 1)");
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::size_t n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(records.size()) * train_fraction));
    CorpusSplit split;
    if (n_train == 0) {
        n_train = 1;
        split.empty_test_warning = true;
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_train ? split.train : split.test).push_back(records[order[i]]);
    }
    if (split.test.empty()) split.empty_test_warning = true;
    return split;
}

BioResult to_bio(const AnnotatedRecord& record,
                 const std::vector<Sentence>& sentences) {
    BioResult result;
    result.sequences.reserve(sentences.size());
    for (const auto& s : sentences)
        result.sequences.push_back(
            BioSequence{s.tokens, std::vector<std::string>(s.tokens.size(), "O")});

    for (const auto& gold : record.spans) {
        const std::string name = label_name(normalize_label(gold.label));
        int sentences_hit = 0;
        for (std::size_t si = 0; si < sentences.size(); ++si) {
            auto& seq = result.sequences[si];
            bool first_in_sentence = true;
            bool hit = false;
            for (std::size_t ti = 0; ti < seq.tokens.size(); ++ti) {
                const Token& tok = seq.tokens[ti];
                if (tok.start < gold.end && gold.start < tok.end) {
                    if (seq.tags[ti] == "O")
                        seq.tags[ti] = (first_in_sentence ? "B-" : "I-") + name;
                    first_in_sentence = false;
                    hit = true;
                }
            }
            if (hit) ++sentences_hit;
        }
        if (sentences_hit > 1) {
            result.warnings.push_back("span [" + std::to_string(gold.start) + "," +
                                      std::to_string(gold.end) +
                                      ") crosses a sentence boundary; split");
        }
    }
    return result;
}

std::vector<PhiSpan> bio_to_spans(const BioSequence& seq, SpanSource source) {
    std::vector<PhiSpan> out;
    std::string open_label;
    std::size_t run_start = 0, run_end = 0;
    auto close = [&]() {
        if (!open_label.empty()) {
            out.push_back(PhiSpan{run_start, run_end, label_from_name(open_label),
                                  source, 1.0});
            open_label.clear();
        }
    };
    for (std::size_t i = 0; i < seq.tags.size(); ++i) {
        const std::string& tag = seq.tags[i];
        if (tag == "O") {
            close();
            continue;
        }
        const std::string label = tag.substr(2);
        const bool begin = tag[0] == 'B' || open_label != label;  // repair I-after-O
        if (begin) {
            close();
            open_label = label;
            run_start = seq.tokens[i].start;
        }
        run_end = seq.tokens[i].end;
    }
    close();
    return out;
}

}  // namespace phiscrub
