#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "phiscrub/text.hpp"

namespace phiscrub {

/// Coarse part-of-speech tags feeding the tagger features.
enum class Pos {
    NOUN, PROPN, VERB, ADJ, ADV, PRON, DET, ADP, NUM, PUNCT, SYM, OTHER,
};

const std::string& pos_name(Pos p);

struct Token {
    std::string text;
    std::size_t start = 0;  // code-point offsets into the source document
    std::size_t end = 0;
    std::string shape;
    Pos pos = Pos::OTHER;
};

struct Sentence {
    std::size_t start = 0;
    std::size_t end = 0;
    std::vector<Token> tokens;
};

/// Mr., Mrs., Ms., Dr., Prof., St., Jr., Sr., vs., e.g., i.e., approx.
const std::set<std::string>& default_abbreviations();

/// One abbreviation per line, '#' comments, UTF-8.
std::set<std::string> load_abbreviations(std::istream& in);
std::set<std::string> load_abbreviations_file(const std::string& path);

/// Sentence spans only (tokens left empty). Boundaries at . ! ? followed by
/// whitespace and an uppercase/digit/newline continuation, unless the
/// terminator closes an abbreviation from the set. Blank lines always break.
std::vector<Sentence> split_sentences(const Text& text,
                                      const std::set<std::string>& abbreviations);
std::vector<Sentence> split_sentences(const std::string& text,
                                      const std::set<std::string>& abbreviations);

/// Whitespace split with leading/trailing punctuation peeled off. Tokens
/// containing a digit, '@' or "://" keep their interior punctuation so
/// fixed-pattern surfaces like 555-1234 or a@b.org stay atomic.
/// Fills text/start/end/shape; POS is assigned by pos_tag.
std::vector<Token> tokenize(const Text& text, const Sentence& sentence);

/// Casing signature: uppercase->X, lowercase->x, digit->d, other->s,
/// capped at 4 classes ("Boston" -> "Xxxx").
std::string word_shape(const std::string& token_text);

/// Heuristic rule-based tagger; assigns Token::pos in place.
void pos_tag(std::vector<Token>& tokens);

/// split + tokenize + pos over a whole document.
std::vector<Sentence> analyze(const Text& text,
                              const std::set<std::string>& abbreviations);

}  // namespace phiscrub
