#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace phiscrub {

/// Top-level PHI categories of the annotation taxonomy.
enum class Category {
    NAME,
    PROFESSION,
    LOCATION,
    AGE,
    DATE,
    CONTACT,
    ID,
};

/// Sub-categories. Legality per category is checked by PhiCategory.
enum class Subtype {
    // NAME
    PATIENT,
    DOCTOR,
    USERNAME,
    // LOCATION
    HOSPITAL,
    ORGANIZATION,
    STREET,
    CITY,
    STATE,
    COUNTRY,
    ZIP,
    OTHER,
    // CONTACT
    PHONE,
    FAX,
    EMAIL,
    URL,
    IPADDRESS,
    // ID
    SSN,
    MRN,
    HEALTHPLAN,
    ACCOUNT,
    LICENSE,
    VEHICLE,
    DEVICE,
    BIOMETRIC,
    IDNUM,
};

/// Flat label set used by the tagger and the scrubber after taxonomy
/// normalization. O marks non-PHI.
enum class Label : std::uint8_t {
    NAME,
    PROFESSION,
    ORG,
    STREET,
    CITY,
    STATE,
    COUNTRY,
    ZIP,
    LOC_OTHER,
    AGE,
    DATE,
    PHONE,
    FAX,
    EMAIL,
    URL,
    IPADDRESS,
    IDNUM,
    O,
};

constexpr int kNumPhiLabels = 17;  // all Labels except O

struct UnknownCategory : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Category plus optional subtype, validated against the taxonomy.
class PhiCategory {
  public:
    PhiCategory(Category category, std::optional<Subtype> subtype = std::nullopt);

    Category category() const { return category_; }
    std::optional<Subtype> subtype() const { return subtype_; }

    bool operator==(const PhiCategory&) const = default;

  private:
    Category category_;
    std::optional<Subtype> subtype_;
};

/// True iff `sub` is a legal subtype of `cat`.
bool subtype_legal(Category cat, Subtype sub);

/// Collapses a category/subtype pair onto the flat label set. Total over
/// all legal PhiCategory values; never yields Label::O.
Label normalize_label(const PhiCategory& c);

const std::string& label_name(Label l);
Label label_from_name(const std::string& name);  // throws UnknownCategory

const std::string& category_name(Category c);
const std::string& subtype_name(Subtype s);
Category category_from_name(const std::string& name);        // throws UnknownCategory
std::optional<Subtype> subtype_from_name(const std::string& name);

/// All legal (category, subtype) combinations, for exhaustive checks.
std::vector<PhiCategory> all_phi_categories();

/// Where a detected span came from.
enum class SpanSource { REGEX, MODEL, GOLD };

/// Half-open character-offset interval carrying a PHI label.
/// Offsets count Unicode scalar values, not bytes.
struct PhiSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    Label label = Label::O;
    SpanSource source = SpanSource::GOLD;
    double confidence = 1.0;

    bool operator==(const PhiSpan&) const = default;
};

}  // namespace phiscrub
