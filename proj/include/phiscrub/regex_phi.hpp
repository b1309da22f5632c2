#pragma once

#include <boost/regex.hpp>
#include <iosfwd>
#include <string>
#include <vector>

#include "phiscrub/labels.hpp"
#include "phiscrub/text.hpp"

namespace phiscrub {

struct PatternEntry {
    Label label;
    int priority;  // lower wins on overlap
    std::string pattern;
    boost::regex compiled;
};

/// Ordered recognizer table. Priorities must be unique; patterns scan
/// unanchored over the raw document text.
class PatternTable {
  public:
    void add(Label label, int priority, const std::string& pattern);
    const std::vector<PatternEntry>& entries() const { return entries_; }

  private:
    std::vector<PatternEntry> entries_;
};

/// The seven canonical fixed-pattern recognizers (email, URL, IPv4, SSN,
/// phone, ZIP, generic ID). SSN carries label IDNUM: the flat label set
/// folds all ID subtypes together.
const PatternTable& default_pattern_table();

/// One entry per line: LABEL<TAB>PRIORITY<TAB>PATTERN. '#' comments.
PatternTable load_pattern_table(std::istream& in);
PatternTable load_pattern_table_file(const std::string& path);

/// All matches of all patterns with overlaps resolved by priority, then
/// longer match, then leftmost. Returned spans are disjoint, sorted, with
/// code-point offsets and confidence 1.0.
std::vector<PhiSpan> recognize(const Text& text, const PatternTable& table);
std::vector<PhiSpan> recognize(const std::string& text, const PatternTable& table);

}  // namespace phiscrub
