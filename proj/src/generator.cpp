#include <array>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "phiscrub/corpus.hpp"
#include "phiscrub/rng.hpp"

namespace phiscrub {

namespace {

const std::vector<std::string> kFirstNames = {
    "Adam", "Brian", "Clara", "Diane", "Edward", "Fiona", "George", "Helen",
    "Ivan", "Julia", "Kevin", "Laura", "Martin", "Nora", "Oliver", "Paula",
    "Quentin", "Rachel", "Steven", "Teresa", "Victor", "Wendy"};

const std::vector<std::string> kLastNames = {
    "Abbott", "Barnes", "Carter", "Dawson", "Ellis", "Foster", "Griffin",
    "Holloway", "Ingram", "Jensen", "Keller", "Lawson", "Mercer", "Norwood",
    "Osborne", "Parrish", "Quimby", "Redmond", "Sheldon", "Thornton",
    "Underwood", "Vance", "Whitfield"};

const std::vector<std::string> kCities = {
    "Boston", "Cambridge", "Worcester", "Springfield", "Lowell", "Quincy",
    "Newton", "Somerville", "Framingham", "Waltham", "Medford", "Arlington",
    "Salem", "Beverly", "Concord"};

const std::vector<std::string> kStates = {
    "Massachusetts", "Vermont", "Maine", "Connecticut", "Ohio",
    "Oregon", "Arizona", "Colorado", "Georgia", "Indiana"};

const std::vector<std::string> kCountries = {
    "Canada", "France", "Germany", "Brazil", "Japan",
    "India", "Ireland", "Norway", "Spain", "Egypt"};

const std::vector<std::string> kLocOther = {
    "Riverside Park", "Harbor Point", "Gateway Plaza",
    "Sunset Ridge", "Millbrook Commons", "Crescent Square"};

const std::vector<std::string> kProfessions = {
    "teacher", "carpenter", "electrician", "accountant", "librarian",
    "plumber", "farmer", "journalist", "chef", "mechanic"};

const std::vector<std::string> kStreetNames = {
    "Maple", "Oak", "Elm", "Cedar", "Willow", "Franklin",
    "Highland", "Prospect", "Summer", "Winter", "Chestnut", "Lincoln"};

const std::vector<std::string> kStreetTypes = {
    "Street", "Avenue", "Road", "Lane", "Drive", "Court"};

const std::vector<std::string> kOrgPrefix = {
    "Bayside", "Northview", "Lakeside", "Hillcrest", "Riverbend", "Eastbrook"};

const std::vector<std::string> kOrgSuffix = {
    "Medical Group", "Health Partners", "Care Associates", "Wellness Institute"};

const std::vector<std::string> kMonths = {
    "January", "February", "March", "April", "May", "June", "July",
    "August", "September", "October", "November", "December"};

const std::vector<std::string> kEmailDomains = {
    "example.org", "mailhub.net", "carewell.org", "medmail.com"};

const std::vector<std::string> kUrlHosts = {
    "portal.carewell.org", "records.example.org", "www.medboard.org"};

const std::vector<std::string> kUrlPaths = {
    "/visit/summary", "/intake", "/labs/panel", "/help"};

std::string lower(std::string s) {
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
}

std::string digits(Rng& rng, int n, char first_min = '0') {
    std::string out;
    out.push_back(static_cast<char>(first_min + rng.below('9' - first_min + 1)));
    for (int i = 1; i < n; ++i) out.push_back(static_cast<char>('0' + rng.below(10)));
    return out;
}

std::string gen_name(Rng& rng) {
    switch (rng.below(3)) {
        case 0: return rng.pick(kFirstNames) + " " + rng.pick(kLastNames);
        case 1: return rng.pick(kLastNames);
        default: return rng.pick(kFirstNames);
    }
}

std::string gen_org(Rng& rng) {
    switch (rng.below(4)) {
        case 0: return rng.pick(kCities) + " General Hospital";
        case 1: return rng.pick(kLastNames) + " Memorial Hospital";
        case 2: return "St. " + rng.pick(kLastNames) + " Medical Center";
        default: return rng.pick(kOrgPrefix) + " " + rng.pick(kOrgSuffix);
    }
}

std::string gen_street(Rng& rng) {
    return std::to_string(1 + rng.below(999)) + " " + rng.pick(kStreetNames) + " " +
           rng.pick(kStreetTypes);
}

std::string gen_zip(Rng& rng) {
    std::string z = digits(rng, 5);
    if (rng.below(3) == 0) z += "-" + digits(rng, 4);
    return z;
}

std::string gen_date(Rng& rng) {
    const int year = 2060 + static_cast<int>(rng.below(20));
    const int month = 1 + static_cast<int>(rng.below(12));
    const int day = 1 + static_cast<int>(rng.below(28));
    char buf[32];
    switch (rng.below(4)) {
        case 0:
            std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
            return buf;
        case 1:
            std::snprintf(buf, sizeof buf, "%02d/%02d/%04d", month, day, year);
            return buf;
        case 2:
            return kMonths[month - 1] + " " + std::to_string(day) + ", " +
                   std::to_string(year);
        default:
            return std::to_string(day) + " " + kMonths[month - 1] + " " +
                   std::to_string(year);
    }
}

std::string gen_phone(Rng& rng) {
    const std::string a = digits(rng, 3, '2'), b = digits(rng, 3, '2'),
                      c = digits(rng, 4);
    switch (rng.below(4)) {
        case 0: return "(" + a + ") " + b + "-" + c;
        case 1: return a + "-" + b + "-" + c;
        case 2: return a + "." + b + "." + c;
        default: return "+1 " + a + " " + b + " " + c;
    }
}

std::string gen_email(Rng& rng) {
    const std::string f = lower(rng.pick(kFirstNames)), l = lower(rng.pick(kLastNames));
    const std::string& d = rng.pick(kEmailDomains);
    if (rng.below(2) == 0) return f + "." + l + "@" + d;
    return f.substr(0, 1) + l + "@" + d;
}

std::string gen_url(Rng& rng) {
    const std::string& host = rng.pick(kUrlHosts);
    if (host.rfind("www.", 0) == 0 && rng.below(2) == 0)
        return host + rng.pick(kUrlPaths);
    return "https://" + host + rng.pick(kUrlPaths);
}

std::string gen_ip(Rng& rng) {
    std::string out = std::to_string(1 + rng.below(223));
    for (int i = 0; i < 3; ++i) out += "." + std::to_string(rng.below(256));
    return out;
}

struct SlotDef {
    std::string key;
    Label label;
    Category category;
    std::optional<Subtype> subtype;
    std::string (*gen)(Rng&);
};

const std::vector<SlotDef>& slot_defs() {
    static const std::vector<SlotDef> defs = {
        {"NAME", Label::NAME, Category::NAME, Subtype::PATIENT, gen_name},
        {"DOCTOR", Label::NAME, Category::NAME, Subtype::DOCTOR, gen_name},
        {"ORG", Label::ORG, Category::LOCATION, Subtype::HOSPITAL, gen_org},
        {"STREET", Label::STREET, Category::LOCATION, Subtype::STREET, gen_street},
        {"CITY", Label::CITY, Category::LOCATION, Subtype::CITY,
         [](Rng& r) { return r.pick(kCities); }},
        {"STATE", Label::STATE, Category::LOCATION, Subtype::STATE,
         [](Rng& r) { return r.pick(kStates); }},
        {"COUNTRY", Label::COUNTRY, Category::LOCATION, Subtype::COUNTRY,
         [](Rng& r) { return r.pick(kCountries); }},
        {"ZIP", Label::ZIP, Category::LOCATION, Subtype::ZIP, gen_zip},
        {"LOC_OTHER", Label::LOC_OTHER, Category::LOCATION, Subtype::OTHER,
         [](Rng& r) { return r.pick(kLocOther); }},
        {"AGE", Label::AGE, Category::AGE, std::nullopt,
         [](Rng& r) { return std::to_string(21 + r.below(75)); }},
        {"DATE", Label::DATE, Category::DATE, std::nullopt, gen_date},
        {"PHONE", Label::PHONE, Category::CONTACT, Subtype::PHONE, gen_phone},
        {"FAX", Label::FAX, Category::CONTACT, Subtype::FAX, gen_phone},
        {"EMAIL", Label::EMAIL, Category::CONTACT, Subtype::EMAIL, gen_email},
        {"URL", Label::URL, Category::CONTACT, Subtype::URL, gen_url},
        {"IPADDRESS", Label::IPADDRESS, Category::CONTACT, Subtype::IPADDRESS, gen_ip},
        {"SSN", Label::IDNUM, Category::ID, Subtype::SSN,
         [](Rng& r) {
             return digits(r, 3, '1') + "-" + digits(r, 2) + "-" + digits(r, 4);
         }},
        {"MRN", Label::IDNUM, Category::ID, Subtype::MRN,
         [](Rng& r) { return digits(r, 6 + r.below(2), '1'); }},
        {"ACCOUNT", Label::IDNUM, Category::ID, Subtype::ACCOUNT,
         [](Rng& r) { return "AC" + digits(r, 6, '1'); }},
        {"PROFESSION", Label::PROFESSION, Category::PROFESSION, std::nullopt,
         [](Rng& r) { return r.pick(kProfessions); }},
    };
    return defs;
}

struct TemplateDef {
    std::string text;          // literal with {SLOT} markers
    Label weight_label;        // which config weight scales this template
};

const std::vector<TemplateDef>& phi_templates() {
    static const std::vector<TemplateDef> templates = {
        {"Mr. {NAME} was admitted for further evaluation.", Label::NAME},
        {"The patient was accompanied by Mrs. {NAME} during the visit.", Label::NAME},
        {"Dr. {DOCTOR} reviewed the imaging results.", Label::NAME},
        {"{NAME} denies any chest pain at this time.", Label::NAME},
        {"He was transferred to {ORG} for observation.", Label::ORG},
        {"Records were requested from {ORG} last week.", Label::ORG},
        {"The patient lives at {STREET}, {CITY}, {STATE} {ZIP}.", Label::STREET},
        {"Home address is listed as {STREET} in {CITY}.", Label::CITY},
        {"She recently moved to {CITY}, {STATE}.", Label::STATE},
        {"The patient traveled to {COUNTRY} last spring.", Label::COUNTRY},
        {"Family history was obtained from relatives in {COUNTRY}.", Label::COUNTRY},
        {"The fall occurred near {LOC_OTHER} yesterday.", Label::LOC_OTHER},
        {"He walks daily at {LOC_OTHER} for exercise.", Label::LOC_OTHER},
        {"The patient is {AGE} years old.", Label::AGE},
        {"This pleasant patient, aged {AGE}, presented for follow up.", Label::AGE},
        {"He was seen in clinic on {DATE}.", Label::DATE},
        {"An endoscopy was performed on {DATE} without complication.", Label::DATE},
        {"Follow up is scheduled for {DATE}.", Label::DATE},
        {"Laboratory studies from {DATE} were reviewed today.", Label::DATE},
        {"Contact number on file is {PHONE}.", Label::PHONE},
        {"Please call {PHONE} with any questions.", Label::PHONE},
        {"Results were faxed to {FAX} as requested.", Label::FAX},
        {"His email id is {EMAIL} per the intake form.", Label::EMAIL},
        {"Send the summary to {EMAIL} when complete.", Label::EMAIL},
        {"Discharge instructions are posted at {URL} for review.", Label::URL},
        {"Imaging is available at {URL} under the visit tab.", Label::URL},
        {"The monitoring device reports to {IPADDRESS} on the internal network.",
         Label::IPADDRESS},
        {"SSN on record is {SSN}.", Label::IDNUM},
        {"Medical record number {MRN} was verified at registration.", Label::IDNUM},
        {"His policy number is {ACCOUNT} per the insurer.", Label::IDNUM},
        {"He works as a {PROFESSION} in town.", Label::PROFESSION},
        {"She retired from her job as a {PROFESSION} last year.", Label::PROFESSION},
    };
    return templates;
}

const std::vector<std::string>& filler_templates() {
    static const std::vector<std::string> fillers = {
        "No acute distress was noted on examination.",
        "The abdomen was soft and non tender.",
        "Vital signs remained stable throughout the visit.",
        "He denies fever, chills, or night sweats.",
        "Review of systems was otherwise unremarkable.",
        "The patient tolerated the procedure well.",
        "Biopsies were obtained and sent for pathology.",
        "There is no evidence of peptic ulcer disease or neoplasm.",
        "Current medications were reconciled at discharge.",
        "A low sodium diet was recommended.",
        "Blood pressure was 128/74 at rest.",
        "Temperature was 37.2 °C this morning.",
        "He was instructed to return if symptoms worsen.",
        "The wound was clean, dry, and intact.",
    };
    return fillers;
}

std::size_t cp_len(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

const SlotDef& find_slot(const std::string& key) {
    for (const auto& d : slot_defs())
        if (d.key == key) return d;
    throw InvalidConfig("unknown template slot: " + key);
}

/// Renders one template, appending to the record body and gold span list.
void render_template(const std::string& tmpl, Rng& rng, std::string& body,
                     std::size_t& cp_pos, std::vector<GoldSpan>& spans) {
    std::size_t i = 0;
    while (i < tmpl.size()) {
        auto open = tmpl.find('{', i);
        if (open == std::string::npos) {
            const std::string lit = tmpl.substr(i);
            body += lit;
            cp_pos += cp_len(lit);
            break;
        }
        const std::string lit = tmpl.substr(i, open - i);
        body += lit;
        cp_pos += cp_len(lit);
        auto close = tmpl.find('}', open);
        const SlotDef& def = find_slot(tmpl.substr(open + 1, close - open - 1));
        const std::string value = def.gen(rng);
        GoldSpan span{cp_pos, cp_pos + cp_len(value), value,
                      PhiCategory(def.category, def.subtype)};
        spans.push_back(std::move(span));
        body += value;
        cp_pos += cp_len(value);
        i = close + 1;
    }
}

}  // namespace

GeneratorConfig GeneratorConfig::defaults() {
    GeneratorConfig cfg;
    for (int l = 0; l < kNumPhiLabels; ++l)
        cfg.weights[static_cast<Label>(l)] = 1.0;
    cfg.weights[Label::FAX] = 0.5;
    return cfg;
}

GeneratorConfig load_generator_config(std::istream& in) {
    GeneratorConfig cfg = GeneratorConfig::defaults();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidConfig("line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && key.back() == ' ') key.pop_back();
        while (!value.empty() && value.front() == ' ') value.erase(0, 1);
        try {
            if (key == "count") cfg.count = std::stoull(value);
            else if (key == "mean_length") cfg.mean_length = std::stoull(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key.rfind("weight.", 0) == 0)
                cfg.weights[label_from_name(key.substr(7))] = std::stod(value);
            else
                throw InvalidConfig("unknown config key: " + key);
        } catch (const UnknownCategory& e) {
            throw InvalidConfig(e.what());
        } catch (const std::invalid_argument&) {
            throw InvalidConfig("bad value for " + key + ": " + value);
        } catch (const std::out_of_range&) {
            throw InvalidConfig("value out of range for " + key + ": " + value);
        }
    }
    for (const auto& [label, w] : cfg.weights)
        if (w < 0.0) throw InvalidConfig("negative weight for " + label_name(label));
    return cfg;
}

GeneratorConfig load_generator_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open generator config: " + path);
    return load_generator_config(in);
}

std::vector<AnnotatedRecord> generate_synthetic(const GeneratorConfig& config,
                                                std::uint64_t seed) {
    if (config.mean_length < 40)
        throw InvalidConfig("mean_length must be at least 40 characters");

    // Per-template weights: a label's weight is split across its templates.
    std::vector<double> tmpl_weight;
    std::map<Label, int> tmpl_count;
    for (const auto& t : phi_templates()) ++tmpl_count[t.weight_label];
    double total = 0.0;
    for (const auto& t : phi_templates()) {
        auto it = config.weights.find(t.weight_label);
        const double w = (it != config.weights.end() ? it->second : 1.0) /
                         tmpl_count[t.weight_label];
        tmpl_weight.push_back(w);
        total += w;
    }
    const double filler_each = total > 0.0
        ? 0.8 * total / static_cast<double>(filler_templates().size())
        : 1.0;
    for (std::size_t i = 0; i < filler_templates().size(); ++i)
        tmpl_weight.push_back(filler_each);
    total += filler_each * static_cast<double>(filler_templates().size());

    Rng rng(seed);
    std::vector<AnnotatedRecord> out;
    out.reserve(config.count);
    for (std::size_t r = 0; r < config.count; ++r) {
        AnnotatedRecord rec;
        char idbuf[16];
        std::snprintf(idbuf, sizeof idbuf, "R%05zu", r);
        rec.id = idbuf;
        const double target =
            static_cast<double>(config.mean_length) * (0.6 + 0.8 * rng.unit());
        std::size_t cp_pos = 0;
        int since_break = 0;
        while (rec.text.empty() || static_cast<double>(cp_pos) < target) {
            if (!rec.text.empty()) {
                if (since_break >= 4 && rng.below(3) == 0) {
                    rec.text += "\n\n";
                    cp_pos += 2;
                    since_break = 0;
                } else {
                    rec.text += " ";
                    cp_pos += 1;
                }
            }
            double pick = rng.unit() * total;
            std::size_t ti = 0;
            while (ti + 1 < tmpl_weight.size() && pick >= tmpl_weight[ti]) {
                pick -= tmpl_weight[ti];
                ++ti;
            }
            if (ti < phi_templates().size()) {
                render_template(phi_templates()[ti].text, rng, rec.text, cp_pos,
                                rec.spans);
            } else {
                const std::string& f =
                    filler_templates()[ti - phi_templates().size()];
                rec.text += f;
                cp_pos += cp_len(f);
            }
            ++since_break;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace phiscrub
