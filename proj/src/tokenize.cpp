#include "phiscrub/tokenize.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>

namespace phiscrub {

namespace {

bool is_ws(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
           c == U'\v';
}
bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }
bool is_upper(char32_t c) { return c >= U'A' && c <= U'Z'; }
bool is_lower(char32_t c) { return c >= U'a' && c <= U'z'; }
bool is_letter(char32_t c) { return is_upper(c) || is_lower(c) || c >= 0x80; }
bool is_punct(char32_t c) {
    return c < 0x80 && !is_ws(c) && !is_digit(c) && !is_upper(c) && !is_lower(c);
}
bool is_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

}  // namespace

const std::string& pos_name(Pos p) {
    static const std::array<std::string, 12> names = {
        "NOUN", "PROPN", "VERB", "ADJ",  "ADV", "PRON",
        "DET",  "ADP",   "NUM",  "PUNCT", "SYM", "OTHER",
    };
    return names[static_cast<int>(p)];
}

const std::set<std::string>& default_abbreviations() {
    static const std::set<std::string> abbrevs = {
        "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "St.",
        "Jr.", "Sr.", "vs.", "e.g.", "i.e.", "approx.",
    };
    return abbrevs;
}

std::set<std::string> load_abbreviations(std::istream& in) {
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' ||
                                 line.back() == '\r'))
            line.pop_back();
        std::size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        out.insert(line.substr(b));
    }
    return out;
}

std::set<std::string> load_abbreviations_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open abbreviation file: " + path);
    return load_abbreviations(in);
}

std::vector<Sentence> split_sentences(const Text& text,
                                      const std::set<std::string>& abbreviations) {
    const auto& cps = text.cps();
    const std::size_t n = cps.size();
    std::vector<Sentence> out;
    std::size_t i = 0;
    while (i < n) {
        while (i < n && is_ws(cps[i])) ++i;
        if (i == n) break;
        const std::size_t start = i;
        std::size_t last_nonws = i;
        std::size_t end = 0;
        bool closed = false;
        while (i < n && !closed) {
            const char32_t c = cps[i];
            if (!is_ws(c)) last_nonws = i;
            if (is_terminator(c)) {
                std::size_t j = i;
                while (j + 1 < n && is_terminator(cps[j + 1])) ++j;
                const std::size_t after = j + 1;
                if (after >= n) {
                    end = after;
                    i = n;
                    closed = true;
                    break;
                }
                if (is_ws(cps[after])) {
                    std::size_t k = after;
                    int newlines = 0;
                    while (k < n && is_ws(cps[k])) {
                        if (cps[k] == U'\n') ++newlines;
                        ++k;
                    }
                    const bool blank_line = newlines >= 2;
                    const bool continuation =
                        k == n || newlines >= 1 ||
                        is_upper(cps[k]) || is_digit(cps[k]);
                    bool abbrev = false;
                    if (cps[j] == U'.' && !blank_line) {
                        std::size_t w = j;
                        while (w > start && !is_ws(cps[w - 1])) --w;
                        std::string word = text.slice(w, j + 1);
                        abbrev = abbreviations.count(word) > 0;
                    }
                    if (!abbrev && (blank_line || continuation)) {
                        end = j + 1;
                        i = k;
                        closed = true;
                        break;
                    }
                }
                i = j + 1;
                continue;
            }
            if (is_ws(c)) {
                std::size_t k = i;
                int newlines = 0;
                while (k < n && is_ws(cps[k])) {
                    if (cps[k] == U'\n') ++newlines;
                    ++k;
                }
                if (newlines >= 2) {
                    end = last_nonws + 1;
                    i = k;
                    closed = true;
                    break;
                }
                i = k;
                continue;
            }
            ++i;
        }
        if (!closed) end = last_nonws + 1;
        out.push_back(Sentence{start, end, {}});
    }
    return out;
}

std::vector<Sentence> split_sentences(const std::string& text,
                                      const std::set<std::string>& abbreviations) {
    return split_sentences(Text(text), abbreviations);
}

namespace {

bool keep_interior(const std::string& core) {
    if (core.find('@') != std::string::npos) return true;
    if (core.find("://") != std::string::npos) return true;
    for (char c : core)
        if (c >= '0' && c <= '9') return true;
    return false;
}

Token make_token(const Text& text, std::size_t s, std::size_t e) {
    Token t;
    t.text = text.slice(s, e);
    t.start = s;
    t.end = e;
    t.shape = word_shape(t.text);
    return t;
}

}  // namespace

std::vector<Token> tokenize(const Text& text, const Sentence& sentence) {
    const auto& cps = text.cps();
    std::vector<Token> out;
    std::size_t i = sentence.start;
    while (i < sentence.end) {
        while (i < sentence.end && is_ws(cps[i])) ++i;
        if (i >= sentence.end) break;
        std::size_t j = i;
        while (j < sentence.end && !is_ws(cps[j])) ++j;
        // chunk is [i, j)
        std::size_t lead = i;
        while (lead < j && is_punct(cps[lead])) ++lead;
        std::size_t trail = j;
        while (trail > lead && is_punct(cps[trail - 1])) --trail;
        for (std::size_t p = i; p < lead; ++p) out.push_back(make_token(text, p, p + 1));
        if (lead < trail) {
            std::string core = text.slice(lead, trail);
            if (keep_interior(core)) {
                out.push_back(make_token(text, lead, trail));
            } else {
                std::size_t p = lead;
                while (p < trail) {
                    if (is_punct(cps[p])) {
                        out.push_back(make_token(text, p, p + 1));
                        ++p;
                    } else {
                        std::size_t q = p;
                        while (q < trail && !is_punct(cps[q])) ++q;
                        out.push_back(make_token(text, p, q));
                        p = q;
                    }
                }
            }
        }
        for (std::size_t p = trail; p < j; ++p) out.push_back(make_token(text, p, p + 1));
        i = j;
    }
    return out;
}

std::string word_shape(const std::string& token_text) {
    std::string shape;
    std::size_t i = 0;
    const std::size_t n = token_text.size();
    while (i < n && shape.size() < 4) {
        unsigned char c = static_cast<unsigned char>(token_text[i]);
        std::size_t len = 1;
        if (c >= 0xF0) len = 4;
        else if (c >= 0xE0) len = 3;
        else if (c >= 0xC0) len = 2;
        char cls;
        if (c >= 'A' && c <= 'Z') cls = 'X';
        else if ((c >= 'a' && c <= 'z') || c >= 0x80) cls = 'x';
        else if (c >= '0' && c <= '9') cls = 'd';
        else cls = 's';
        shape.push_back(cls);
        i += len;
    }
    return shape;
}

namespace {

const std::unordered_map<std::string, Pos>& lexicon() {
    static const std::unordered_map<std::string, Pos> lex = {
        {"the", Pos::DET},   {"a", Pos::DET},      {"an", Pos::DET},
        {"this", Pos::DET},  {"that", Pos::DET},   {"these", Pos::DET},
        {"those", Pos::DET}, {"each", Pos::DET},   {"every", Pos::DET},
        {"some", Pos::DET},  {"any", Pos::DET},    {"no", Pos::DET},
        {"of", Pos::ADP},    {"in", Pos::ADP},     {"on", Pos::ADP},
        {"at", Pos::ADP},    {"by", Pos::ADP},     {"for", Pos::ADP},
        {"with", Pos::ADP},  {"from", Pos::ADP},   {"to", Pos::ADP},
        {"into", Pos::ADP},  {"over", Pos::ADP},   {"under", Pos::ADP},
        {"between", Pos::ADP}, {"through", Pos::ADP}, {"during", Pos::ADP},
        {"after", Pos::ADP}, {"before", Pos::ADP}, {"about", Pos::ADP},
        {"against", Pos::ADP}, {"as", Pos::ADP},
        {"he", Pos::PRON},   {"she", Pos::PRON},   {"it", Pos::PRON},
        {"they", Pos::PRON}, {"we", Pos::PRON},    {"you", Pos::PRON},
        {"i", Pos::PRON},    {"him", Pos::PRON},   {"her", Pos::PRON},
        {"them", Pos::PRON}, {"us", Pos::PRON},    {"me", Pos::PRON},
        {"his", Pos::PRON},  {"its", Pos::PRON},   {"their", Pos::PRON},
        {"our", Pos::PRON},  {"your", Pos::PRON},  {"my", Pos::PRON},
        {"who", Pos::PRON},  {"which", Pos::PRON},
        {"is", Pos::VERB},   {"are", Pos::VERB},   {"was", Pos::VERB},
        {"were", Pos::VERB}, {"be", Pos::VERB},    {"been", Pos::VERB},
        {"being", Pos::VERB}, {"has", Pos::VERB},  {"have", Pos::VERB},
        {"had", Pos::VERB},  {"do", Pos::VERB},    {"does", Pos::VERB},
        {"did", Pos::VERB},  {"will", Pos::VERB},  {"would", Pos::VERB},
        {"can", Pos::VERB},  {"could", Pos::VERB}, {"should", Pos::VERB},
        {"may", Pos::VERB},  {"might", Pos::VERB}, {"must", Pos::VERB},
        {"denies", Pos::VERB}, {"reports", Pos::VERB}, {"presents", Pos::VERB},
        {"not", Pos::ADV},   {"never", Pos::ADV},  {"also", Pos::ADV},
        {"very", Pos::ADV},  {"often", Pos::ADV},  {"again", Pos::ADV},
        {"then", Pos::ADV},  {"now", Pos::ADV},    {"here", Pos::ADV},
        {"there", Pos::ADV}, {"however", Pos::ADV},
        {"and", Pos::OTHER}, {"or", Pos::OTHER},   {"but", Pos::OTHER},
        {"if", Pos::OTHER},  {"because", Pos::OTHER}, {"while", Pos::OTHER},
    };
    return lex;
}

std::string ascii_lower(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

bool ends_with(const std::string& s, const char* suffix) {
    std::string suf(suffix);
    return s.size() > suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

Pos tag_one(const Token& tok, bool sentence_initial) {
    const std::string lower = ascii_lower(tok.text);
    auto it = lexicon().find(lower);
    if (it != lexicon().end()) return it->second;

    std::size_t letters = 0, digits = 0, punct = 0, total = 0;
    for (unsigned char c : tok.text) {
        if ((c & 0xC0) == 0x80) continue;  // UTF-8 continuation
        ++total;
        if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c >= 0x80) ++letters;
        else if (c >= '0' && c <= '9') ++digits;
        else ++punct;
    }
    if (letters == 0 && digits == 0) return Pos::PUNCT;
    if (digits * 2 >= total) return Pos::NUM;
    if (letters == 0) return Pos::SYM;
    if (punct > 0 && letters * 2 < total) return Pos::SYM;

    const unsigned char first = static_cast<unsigned char>(tok.text[0]);
    const bool capitalized = first >= 'A' && first <= 'Z';
    if (capitalized) {
        if (!sentence_initial) return Pos::PROPN;
        bool inner_upper = false;
        for (std::size_t i = 1; i < tok.text.size(); ++i) {
            unsigned char c = static_cast<unsigned char>(tok.text[i]);
            if (c >= 'A' && c <= 'Z') inner_upper = true;
        }
        if (inner_upper) return Pos::PROPN;
    }
    if (ends_with(lower, "ly")) return Pos::ADV;
    if (ends_with(lower, "ing") || ends_with(lower, "ed")) return Pos::VERB;
    if (ends_with(lower, "ous") || ends_with(lower, "ful") || ends_with(lower, "ive") ||
        ends_with(lower, "al"))
        return Pos::ADJ;
    return Pos::NOUN;
}

}  // namespace

void pos_tag(std::vector<Token>& tokens) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        tokens[i].pos = tag_one(tokens[i], i == 0);
    }
}

std::vector<Sentence> analyze(const Text& text,
                              const std::set<std::string>& abbreviations) {
    auto sentences = split_sentences(text, abbreviations);
    for (auto& s : sentences) {
        s.tokens = tokenize(text, s);
        pos_tag(s.tokens);
    }
    return sentences;
}

}  // namespace phiscrub
