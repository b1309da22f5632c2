#include "phiscrub/regex_phi.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace phiscrub {

void PatternTable::add(Label label, int priority, const std::string& pattern) {
    for (const auto& e : entries_)
        if (e.priority == priority)
            throw std::runtime_error("duplicate pattern priority " +
                                     std::to_string(priority));
    boost::regex compiled;
    try {
        compiled.assign(pattern, boost::regex::perl);
    } catch (const boost::regex_error& e) {
        throw std::runtime_error("bad pattern for " + label_name(label) + ": " +
                                 e.what());
    }
    entries_.push_back(PatternEntry{label, priority, pattern, std::move(compiled)});
    std::sort(entries_.begin(), entries_.end(),
              [](const PatternEntry& a, const PatternEntry& b) {
                  return a.priority < b.priority;
              });
}

const PatternTable& default_pattern_table() {
    static const PatternTable table = [] {
        PatternTable t;
        t.add(Label::EMAIL, 0,
              R"(\b[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}\b)");
        t.add(Label::URL, 1,
              R"(\bhttps?://[^\s<>"]+|\bwww\.[A-Za-z0-9.-]+\.[A-Za-z]{2,}[^\s<>"]*)");
        t.add(Label::IPADDRESS, 2,
              R"(\b(25[0-5]|2[0-4]\d|1?\d?\d)(\.(25[0-5]|2[0-4]\d|1?\d?\d)){3}\b)");
        t.add(Label::IDNUM, 3, R"(\b\d{3}-\d{2}-\d{4}\b)");  // SSN shape
        t.add(Label::PHONE, 4,
              R"((?:\+1[-. ])?(?:\(\d{3}\)[ .-]?|\b\d{3}[ .-])\d{3}[ .-]\d{4}\b)");
        t.add(Label::ZIP, 5, R"(\b\d{5}(-\d{4})?\b)");
        t.add(Label::IDNUM, 6, R"(\b\d{5,}\b|\b[A-Za-z]{2,}\d{4,}\b)");
        return t;
    }();
    return table;
}

PatternTable load_pattern_table(std::istream& in) {
    PatternTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto t1 = line.find('\t');
        auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw std::runtime_error("pattern table line " + std::to_string(lineno) +
                                     ": expected LABEL<TAB>PRIORITY<TAB>PATTERN");
        table.add(label_from_name(line.substr(0, t1)),
                  std::stoi(line.substr(t1 + 1, t2 - t1 - 1)), line.substr(t2 + 1));
    }
    return table;
}

PatternTable load_pattern_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pattern table: " + path);
    return load_pattern_table(in);
}

namespace {

struct Candidate {
    std::size_t start, end;  // byte offsets until conversion
    Label label;
    int priority;
};

}  // namespace

std::vector<PhiSpan> recognize(const Text& text, const PatternTable& table) {
    const std::string& bytes = text.bytes();
    std::vector<Candidate> candidates;
    for (const auto& entry : table.entries()) {
        auto begin = boost::cregex_iterator(bytes.data(), bytes.data() + bytes.size(),
                                            entry.compiled);
        for (auto it = begin; it != boost::cregex_iterator(); ++it) {
            const auto& m = (*it)[0];
            candidates.push_back(Candidate{
                static_cast<std::size_t>(m.first - bytes.data()),
                static_cast<std::size_t>(m.second - bytes.data()),
                entry.label, entry.priority});
        }
    }
    // priority, then longer, then leftmost
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                         if (a.priority != b.priority) return a.priority < b.priority;
                         const auto la = a.end - a.start, lb = b.end - b.start;
                         if (la != lb) return la > lb;
                         return a.start < b.start;
                     });
    std::vector<Candidate> kept;
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
              [](const Candidate& a, const Candidate& b) { return a.start < b.start; });

    std::vector<PhiSpan> out;
    out.reserve(kept.size());
    for (const auto& c : kept) {
        out.push_back(PhiSpan{text.cp_of_byte(c.start), text.cp_of_byte(c.end),
                              c.label, SpanSource::REGEX, 1.0});
    }
    return out;
}

std::vector<PhiSpan> recognize(const std::string& text, const PatternTable& table) {
    return recognize(Text(text), table);
}

}  // namespace phiscrub
