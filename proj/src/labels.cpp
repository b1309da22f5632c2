#include "phiscrub/labels.hpp"

#include <array>
#include <unordered_map>

namespace phiscrub {

namespace {

const std::array<std::string, 18> kLabelNames = {
    "NAME",  "PROFESSION", "ORG",   "STREET", "CITY",      "STATE",
    "COUNTRY", "ZIP",      "LOC_OTHER", "AGE", "DATE",     "PHONE",
    "FAX",   "EMAIL",      "URL",   "IPADDRESS", "IDNUM",  "O",
};

const std::array<std::string, 7> kCategoryNames = {
    "NAME", "PROFESSION", "LOCATION", "AGE", "DATE", "CONTACT", "ID",
};

const std::array<std::string, 26> kSubtypeNames = {
    "PATIENT", "DOCTOR", "USERNAME",
    "HOSPITAL", "ORGANIZATION", "STREET", "CITY", "STATE", "COUNTRY", "ZIP", "OTHER",
    "PHONE", "FAX", "EMAIL", "URL", "IPADDRESS",
    "SSN", "MEDICALRECORD", "HEALTHPLAN", "ACCOUNT", "LICENSE", "VEHICLE",
    "DEVICE", "BIOMETRIC", "IDNUM",
    "",  // padding guard, never used
};

}  // namespace

bool subtype_legal(Category cat, Subtype sub) {
    switch (cat) {
        case Category::NAME:
            return sub == Subtype::PATIENT || sub == Subtype::DOCTOR ||
                   sub == Subtype::USERNAME;
        case Category::LOCATION:
            return sub == Subtype::HOSPITAL || sub == Subtype::ORGANIZATION ||
                   sub == Subtype::STREET || sub == Subtype::CITY ||
                   sub == Subtype::STATE || sub == Subtype::COUNTRY ||
                   sub == Subtype::ZIP || sub == Subtype::OTHER;
        case Category::CONTACT:
            return sub == Subtype::PHONE || sub == Subtype::FAX ||
                   sub == Subtype::EMAIL || sub == Subtype::URL ||
                   sub == Subtype::IPADDRESS;
        case Category::ID:
            return sub == Subtype::SSN || sub == Subtype::MRN ||
                   sub == Subtype::HEALTHPLAN || sub == Subtype::ACCOUNT ||
                   sub == Subtype::LICENSE || sub == Subtype::VEHICLE ||
                   sub == Subtype::DEVICE || sub == Subtype::BIOMETRIC ||
                   sub == Subtype::IDNUM;
        case Category::AGE:
        case Category::DATE:
        case Category::PROFESSION:
            return false;  // these carry no subtype
    }
    return false;
}

PhiCategory::PhiCategory(Category category, std::optional<Subtype> subtype)
    : category_(category), subtype_(subtype) {
    if (subtype_ && !subtype_legal(category_, *subtype_)) {
        throw UnknownCategory("illegal subtype " + subtype_name(*subtype_) +
                              " for category " + category_name(category_));
    }
    if (!subtype_ && (category_ == Category::LOCATION || category_ == Category::CONTACT ||
                      category_ == Category::ID)) {
        throw UnknownCategory("category " + category_name(category_) +
                              " requires a subtype");
    }
}

Label normalize_label(const PhiCategory& c) {
    switch (c.category()) {
        case Category::NAME:
            return Label::NAME;  // all NAME subtypes merged
        case Category::PROFESSION:
            return Label::PROFESSION;
        case Category::AGE:
            return Label::AGE;
        case Category::DATE:
            return Label::DATE;
        case Category::LOCATION:
            switch (*c.subtype()) {
                case Subtype::HOSPITAL:
                case Subtype::ORGANIZATION:
                    return Label::ORG;  // HOSPITAL+ORGANIZATION merged
                case Subtype::STREET: return Label::STREET;
                case Subtype::CITY: return Label::CITY;
                case Subtype::STATE: return Label::STATE;
                case Subtype::COUNTRY: return Label::COUNTRY;
                case Subtype::ZIP: return Label::ZIP;
                default: return Label::LOC_OTHER;
            }
        case Category::CONTACT:
            switch (*c.subtype()) {
                case Subtype::PHONE: return Label::PHONE;
                case Subtype::FAX: return Label::FAX;
                case Subtype::EMAIL: return Label::EMAIL;
                case Subtype::URL: return Label::URL;
                default: return Label::IPADDRESS;
            }
        case Category::ID:
            return Label::IDNUM;  // all ID subtypes combined
    }
    throw UnknownCategory("unreachable category");
}

const std::string& label_name(Label l) { return kLabelNames[static_cast<int>(l)]; }

Label label_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
        if (kLabelNames[i] == name) return static_cast<Label>(i);
    }
    throw UnknownCategory("unknown label: " + name);
}

const std::string& category_name(Category c) {
    return kCategoryNames[static_cast<int>(c)];
}

const std::string& subtype_name(Subtype s) { return kSubtypeNames[static_cast<int>(s)]; }

Category category_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (kCategoryNames[i] == name) return static_cast<Category>(i);
    }
    // i2b2-style plural
    if (name == "IDs") return Category::ID;
    throw UnknownCategory("unknown category: " + name);
}

std::optional<Subtype> subtype_from_name(const std::string& name) {
    if (name.empty()) return std::nullopt;
    for (std::size_t i = 0; i + 1 < kSubtypeNames.size(); ++i) {
        if (kSubtypeNames[i] == name) return static_cast<Subtype>(i);
    }
    return std::nullopt;
}

std::vector<PhiCategory> all_phi_categories() {
    std::vector<PhiCategory> out;
    out.emplace_back(Category::AGE);
    out.emplace_back(Category::DATE);
    out.emplace_back(Category::PROFESSION);
    for (int s = 0; s < 25; ++s) {
        auto sub = static_cast<Subtype>(s);
        for (Category c : {Category::NAME, Category::LOCATION, Category::CONTACT,
                           Category::ID}) {
            if (subtype_legal(c, sub)) out.emplace_back(c, sub);
        }
    }
    return out;
}

}  // namespace phiscrub
