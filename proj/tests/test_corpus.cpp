#include <doctest.h>

#include <filesystem>
#include <map>
#include <sstream>

#include "phiscrub/corpus.hpp"
#include "phiscrub/rng.hpp"
#include "phiscrub/tokenize.hpp"

using namespace phiscrub;

namespace {

std::string record_xml(const std::string& body, const std::string& tags) {
    return "<?xml version=\"1.0\"?><PhiRecord id=\"R1\"><TEXT>" + body +
           "</TEXT><TAGS>" + tags + "</TAGS></PhiRecord>";
}

}  // namespace

TEST_CASE("parse_record reads offsets and categories") {
    const std::string body = "Admission date: 2067-01-01 noted.";
    const auto rec = parse_record(record_xml(
        body, "<DATE id=\"P0\" start=\"16\" end=\"26\" text=\"2067-01-01\" TYPE=\"\"/>"));
    CHECK(rec.id == "R1");
    CHECK(rec.text == body);
    REQUIRE(rec.spans.size() == 1);
    CHECK(rec.spans[0].start == 16);
    CHECK(rec.spans[0].end == 26);
    CHECK(rec.spans[0].surface == "2067-01-01");
    CHECK(rec.spans[0].label.category() == Category::DATE);
    CHECK(!rec.spans[0].label.subtype());
}

TEST_CASE("parse_record edge and error cases") {
    CHECK(parse_record(record_xml("no phi here", "")).spans.empty());

    CHECK_THROWS_AS(
        parse_record(record_xml(
            "Admission date: 2067-01-01 noted.",
            "<DATE id=\"P0\" start=\"16\" end=\"26\" text=\"wrong\" TYPE=\"\"/>")),
        OffsetMismatch);
    CHECK_THROWS_AS(
        parse_record(record_xml(
            "short", "<DATE id=\"P0\" start=\"2\" end=\"99\" text=\"x\" TYPE=\"\"/>")),
        OffsetMismatch);
    CHECK_THROWS_AS(parse_record("<PhiRecord><TEXT>unclosed"), MalformedXml);
    CHECK_THROWS_AS(parse_record("<PhiRecord id=\"x\"><TAGS/></PhiRecord>"),
                    MalformedXml);
    CHECK_THROWS_AS(
        parse_record(record_xml(
            "some text", "<BOGUS id=\"P0\" start=\"0\" end=\"4\" text=\"some\"/>")),
        UnknownCategory);
}

TEST_CASE("serialize/parse round trip on generated corpora") {
    GeneratorConfig config = GeneratorConfig::defaults();
    config.count = 50;
    for (const auto& rec : generate_synthetic(config, 313)) {
        CHECK(parse_record(serialize_record(rec)) == rec);
    }
}

TEST_CASE("normalization is total and matches the taxonomy merges") {
    CHECK(normalize_label(PhiCategory(Category::NAME, Subtype::DOCTOR)) == Label::NAME);
    CHECK(normalize_label(PhiCategory(Category::LOCATION, Subtype::HOSPITAL)) ==
          Label::ORG);
    CHECK(normalize_label(PhiCategory(Category::LOCATION, Subtype::ORGANIZATION)) ==
          Label::ORG);
    CHECK(normalize_label(PhiCategory(Category::CONTACT, Subtype::EMAIL)) ==
          Label::EMAIL);
    CHECK(normalize_label(PhiCategory(Category::LOCATION, Subtype::OTHER)) ==
          Label::LOC_OTHER);
    CHECK(normalize_label(PhiCategory(Category::AGE)) == Label::AGE);

    for (const auto& cat : all_phi_categories()) {
        const Label l = normalize_label(cat);
        CHECK(l != Label::O);
        CHECK(label_from_name(label_name(l)) == l);  // names round-trip
    }
    CHECK_THROWS_AS(PhiCategory(Category::AGE, Subtype::DOCTOR), UnknownCategory);
    CHECK_THROWS_AS(PhiCategory(Category::LOCATION), UnknownCategory);
}

TEST_CASE("corpus split sizes and determinism") {
    auto make = [](std::size_t n) {
        std::vector<AnnotatedRecord> recs(n);
        for (std::size_t i = 0; i < n; ++i) recs[i].id = "R" + std::to_string(i);
        return recs;
    };
    auto split = split_corpus(make(1304), 0.9, 1);
    CHECK(split.train.size() == 1173);
    CHECK(split.test.size() == 131);
    CHECK(!split.empty_test_warning);

    auto a = split_corpus(make(10), 0.9, 5);
    auto b = split_corpus(make(10), 0.9, 5);
    CHECK(a.train.size() == 9);
    for (std::size_t i = 0; i < a.train.size(); ++i)
        CHECK(a.train[i].id == b.train[i].id);

    auto single = split_corpus(make(1), 0.9, 3);
    CHECK(single.train.size() == 1);
    CHECK(single.test.empty());
    CHECK(single.empty_test_warning);

    CHECK_THROWS_AS(split_corpus({}, 0.9, 1), EmptyCorpus);
    CHECK_THROWS_AS(split_corpus(make(5), 1.5, 1), InvalidConfig);
}

TEST_CASE("corpus split is a partition") {
    Rng rng(606);
    for (int round = 0; round < 200; ++round) {
        const std::size_t n = 1 + rng.below(40);
        std::vector<AnnotatedRecord> recs(n);
        for (std::size_t i = 0; i < n; ++i) recs[i].id = "R" + std::to_string(i);
        const double frac = 0.05 + 0.9 * rng.unit();
        auto split = split_corpus(recs, frac, rng.next_u64());
        CHECK(split.train.size() + split.test.size() == n);
        std::set<std::string> ids;
        for (const auto& r : split.train) ids.insert(r.id);
        for (const auto& r : split.test) ids.insert(r.id);
        CHECK(ids.size() == n);  // disjoint and jointly exhaustive
    }
}

TEST_CASE("BIO encoding examples") {
    AnnotatedRecord rec;
    rec.text = "seen by Anna Lee Smith today";
    rec.spans = {GoldSpan{8, 22, "Anna Lee Smith",
                          PhiCategory(Category::NAME, Subtype::PATIENT)}};
    auto sents = analyze(Text(rec.text), default_abbreviations());
    auto bio = to_bio(rec, sents);
    REQUIRE(bio.sequences.size() == 1);
    CHECK(bio.sequences[0].tags ==
          std::vector<std::string>{"O", "O", "B-NAME", "I-NAME", "I-NAME", "O"});
    CHECK(bio.warnings.empty());

    AnnotatedRecord empty;
    empty.text = "nothing sensitive here";
    auto all_o = to_bio(empty, analyze(Text(empty.text), default_abbreviations()));
    for (const auto& tag : all_o.sequences[0].tags) CHECK(tag == "O");
}

TEST_CASE("mid-token span snaps outward to the whole token") {
    AnnotatedRecord rec;
    rec.text = "visit Boston soon";
    rec.spans = {GoldSpan{8, 10, "st", PhiCategory(Category::LOCATION, Subtype::CITY)}};
    auto sents = analyze(Text(rec.text), default_abbreviations());
    auto bio = to_bio(rec, sents);
    CHECK(bio.sequences[0].tags == std::vector<std::string>{"O", "B-CITY", "O"});
    auto spans = bio_to_spans(bio.sequences[0]);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].start == 6);
    CHECK(spans[0].end == 12);
}

TEST_CASE("span crossing a sentence boundary splits with a warning") {
    AnnotatedRecord rec;
    rec.text = "Ward Nine. Ward Ten.";
    rec.spans = {GoldSpan{5, 15, "Nine. Ward",
                          PhiCategory(Category::LOCATION, Subtype::OTHER)}};
    auto sents = analyze(Text(rec.text), default_abbreviations());
    REQUIRE(sents.size() == 2);
    auto bio = to_bio(rec, sents);
    CHECK(bio.warnings.size() == 1);
    CHECK(bio.sequences[0].tags ==
          std::vector<std::string>{"O", "B-LOC_OTHER", "I-LOC_OTHER"});
    CHECK(bio.sequences[1].tags[0] == "B-LOC_OTHER");
}

TEST_CASE("bio decode examples and exhaustive 3-token enumeration") {
    auto tok = [](std::size_t s, std::size_t e) {
        Token t;
        t.text = "w";
        t.start = s;
        t.end = e;
        return t;
    };
    const std::vector<Token> toks = {tok(0, 2), tok(3, 5), tok(6, 9)};

    CHECK(bio_to_spans(BioSequence{toks, {"O", "B-DATE", "I-DATE"}}) ==
          std::vector<PhiSpan>{
              PhiSpan{3, 9, Label::DATE, SpanSource::MODEL, 1.0}});
    CHECK(bio_to_spans(BioSequence{toks, {"O", "I-DATE", "O"}}) ==
          std::vector<PhiSpan>{
              PhiSpan{3, 5, Label::DATE, SpanSource::MODEL, 1.0}});
    CHECK(bio_to_spans(BioSequence{toks, {"O", "O", "O"}}).empty());

    const std::vector<std::string> alphabet = {"O", "B-DATE", "I-DATE", "B-NAME",
                                               "I-NAME"};
    for (const auto& a : alphabet)
        for (const auto& b : alphabet)
            for (const auto& c : alphabet) {
                const std::vector<std::string> tags = {a, b, c};
                const auto spans = bio_to_spans(BioSequence{toks, tags});

                // Independent restatement: a span begins wherever a non-O tag
                // is a B, follows O, or changes label; it extends over the
                // following I tags of the same label.
                std::size_t expected = 0;
                for (std::size_t i = 0; i < 3; ++i) {
                    if (tags[i] == "O") continue;
                    const bool begins = tags[i][0] == 'B' || i == 0 ||
                                        tags[i - 1] == "O" ||
                                        tags[i - 1].substr(2) != tags[i].substr(2);
                    if (begins) ++expected;
                }
                CHECK(spans.size() == expected);

                std::size_t covered = 0;
                std::size_t prev_end = 0;
                for (const auto& s : spans) {
                    CHECK(s.start >= prev_end);
                    CHECK(s.start < s.end);
                    prev_end = s.end;
                    for (std::size_t i = 0; i < 3; ++i)
                        if (toks[i].start >= s.start && toks[i].end <= s.end) {
                            ++covered;
                            CHECK(tags[i].substr(2) == label_name(s.label));
                        }
                }
                std::size_t tagged = 0;
                for (const auto& t : tags)
                    if (t != "O") ++tagged;
                CHECK(covered == tagged);
            }
}

TEST_CASE("token-aligned gold spans survive the BIO round trip") {
    GeneratorConfig config = GeneratorConfig::defaults();
    config.count = 40;
    for (const auto& rec : generate_synthetic(config, 777)) {
        auto sents = analyze(Text(rec.text), default_abbreviations());
        auto bio = to_bio(rec, sents);
        CHECK(bio.warnings.empty());
        std::vector<PhiSpan> decoded;
        for (const auto& seq : bio.sequences)
            for (const auto& s : bio_to_spans(seq, SpanSource::GOLD))
                decoded.push_back(s);
        REQUIRE(decoded.size() == rec.spans.size());
        for (std::size_t i = 0; i < decoded.size(); ++i) {
            CHECK(decoded[i].start == rec.spans[i].start);
            CHECK(decoded[i].end == rec.spans[i].end);
            CHECK(decoded[i].label == normalize_label(rec.spans[i].label));
        }
    }
}

TEST_CASE("generator determinism and coverage") {
    GeneratorConfig config = GeneratorConfig::defaults();
    config.count = 0;
    CHECK(generate_synthetic(config, 1).empty());

    config.count = 25;
    const auto a = generate_synthetic(config, 99);
    const auto b = generate_synthetic(config, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    const auto c = generate_synthetic(config, 100);
    CHECK(a != c);

    for (const auto& rec : a) {
        Text body(rec.text);
        std::size_t prev = 0;
        for (const auto& span : rec.spans) {
            CHECK(span.start >= prev);
            CHECK(span.start < span.end);
            CHECK(span.end <= body.size());
            CHECK(body.slice(span.start, span.end) == span.surface);
            prev = span.end;
        }
    }
}

TEST_CASE("default weights cover every label at count 1000") {
    GeneratorConfig config = GeneratorConfig::defaults();
    config.count = 1000;
    std::map<Label, std::size_t> counts;
    for (const auto& rec : generate_synthetic(config, 42))
        for (const auto& span : rec.spans) ++counts[normalize_label(span.label)];
    for (int l = 0; l < kNumPhiLabels; ++l) {
        INFO("label ", label_name(static_cast<Label>(l)));
        CHECK(counts[static_cast<Label>(l)] >= 10);
    }
}

TEST_CASE("generator config file format") {
    std::istringstream in(
        "count=12\nmean_length=120\nweight.NAME=2.5\nweight.FAX=0\nseed=7\n");
    const auto config = load_generator_config(in);
    CHECK(config.count == 12);
    CHECK(config.mean_length == 120);
    CHECK(config.weights.at(Label::NAME) == 2.5);
    CHECK(config.weights.at(Label::FAX) == 0.0);
    CHECK(config.seed == 7);

    std::istringstream bad("count=twelve\n");
    CHECK_THROWS_AS(load_generator_config(bad), InvalidConfig);
    std::istringstream unknown("banana=1\n");
    CHECK_THROWS_AS(load_generator_config(unknown), InvalidConfig);
}

TEST_CASE("record files and manifests round trip on disk") {
    const auto dir = std::filesystem::temp_directory_path() / "phiscrub_corpus_test";
    std::filesystem::create_directories(dir);

    GeneratorConfig config = GeneratorConfig::defaults();
    config.count = 3;
    const auto recs = generate_synthetic(config, 5);
    std::vector<std::string> paths;
    for (const auto& rec : recs) {
        auto path = (dir / (rec.id + ".xml")).string();
        save_record_file(rec, path);
        paths.push_back(path);
    }
    const auto manifest = (dir / "manifest.txt").string();
    save_manifest(paths, manifest);
    CHECK(load_manifest(manifest) == paths);
    for (std::size_t i = 0; i < paths.size(); ++i)
        CHECK(load_record_file(paths[i]) == recs[i]);

    std::filesystem::remove_all(dir);
}
