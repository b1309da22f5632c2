#include "phiscrub/service.hpp"

#include <filesystem>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

namespace phiscrub {

namespace {

using nlohmann::json;

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace

PipelineManifest PipelineManifest::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open manifest: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InvalidConfig("manifest is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object() || doc.value("version", 0) != 1)
        throw InvalidConfig("manifest must be a JSON object with \"version\": 1");
    if (!doc.contains("model") || !doc["model"].is_string())
        throw InvalidConfig("manifest needs a \"model\" path");

    const std::string base = std::filesystem::path(path).parent_path().string();
    PipelineManifest m;
    m.model_path = resolve(base, doc["model"].get<std::string>());
    m.pattern_table_path = resolve(base, doc.value("pattern_table", ""));
    m.placeholder_map_path = resolve(base, doc.value("placeholder_map", ""));
    m.abbreviations_path = resolve(base, doc.value("abbreviations", ""));
    m.chunk_char_limit = doc.value("chunk_char_limit", std::size_t{100000});
    if (doc.contains("enabled_labels")) {
        if (!doc["enabled_labels"].is_array())
            throw InvalidConfig("enabled_labels must be an array of label names");
        for (const auto& name : doc["enabled_labels"]) {
            try {
                m.enabled_labels.insert(label_from_name(name.get<std::string>()));
            } catch (const std::exception& e) {
                throw InvalidConfig(e.what());
            }
        }
    }
    return m;
}

void PipelineManifest::save_file(const std::string& path) const {
    json doc;
    doc["version"] = 1;
    doc["model"] = model_path;
    if (!pattern_table_path.empty()) doc["pattern_table"] = pattern_table_path;
    if (!placeholder_map_path.empty()) doc["placeholder_map"] = placeholder_map_path;
    if (!abbreviations_path.empty()) doc["abbreviations"] = abbreviations_path;
    doc["chunk_char_limit"] = chunk_char_limit;
    if (!enabled_labels.empty()) {
        auto arr = json::array();
        for (Label l : enabled_labels) arr.push_back(label_name(l));
        doc["enabled_labels"] = arr;
    }
    std::ofstream out(path);
    if (!out) throw InvalidConfig("cannot write manifest: " + path);
    out << doc.dump(2) << '\n';
}

std::unique_ptr<Pipeline> load_pipeline(const PipelineManifest& manifest) {
    CrfModel model = CrfModel::load_file(manifest.model_path);
    PatternTable patterns = manifest.pattern_table_path.empty()
                                ? default_pattern_table()
                                : load_pattern_table_file(manifest.pattern_table_path);
    ScrubConfig config = ScrubConfig::defaults();
    if (!manifest.placeholder_map_path.empty())
        config.placeholder_map = load_placeholder_map_file(manifest.placeholder_map_path);
    config.chunk_char_limit = manifest.chunk_char_limit;
    if (!manifest.enabled_labels.empty()) config.enabled_labels = manifest.enabled_labels;
    std::set<std::string> abbreviations =
        manifest.abbreviations_path.empty()
            ? default_abbreviations()
            : load_abbreviations_file(manifest.abbreviations_path);
    config.validate();

    // Construct in place so the scrubber's pointers outlive the struct fields.
    struct Built : Pipeline {
        Built(CrfModel m, PatternTable p, ScrubConfig cfg, std::set<std::string> abbr)
            : Pipeline{std::move(m), std::move(p),
                       Scrubber(&this->model, &this->patterns, std::move(cfg),
                                std::move(abbr))} {}
    };
    return std::make_unique<Built>(std::move(model), std::move(patterns),
                                   std::move(config), std::move(abbreviations));
}

std::unique_ptr<httplib::Server> make_server(const Scrubber& scrubber,
                                             const ServiceConfig& config) {
    auto server = std::make_unique<httplib::Server>();
    server->set_payload_max_length(config.max_body_bytes);

    server->Get("/health", [](const httplib::Request&, httplib::Response& res) {
        json body = {{"status", "ok"}, {"version", kVersion}};
        res.set_content(body.dump(), "application/json");
    });

    server->Post("/scrub", [&scrubber](const httplib::Request& req,
                                       httplib::Response& res) {
        std::string text;
        const std::string ctype = req.get_header_value("Content-Type");
        if (ctype.rfind("application/json", 0) == 0) {
            json doc = json::parse(req.body, nullptr, false);
            if (doc.is_discarded() || !doc.is_object() || !doc.contains("text") ||
                !doc["text"].is_string()) {
                res.status = 400;
                res.set_content(json{{"error", "body must be {\"text\": ...}"}}.dump(),
                                "application/json");
                return;
            }
            text = doc["text"].get<std::string>();
        } else {
            text = req.body;
        }
        try {
            ScrubResult result = scrubber.scrub_document(text);
            json reps = json::array();
            for (const auto& r : result.replacements) {
                reps.push_back({{"input_start", r.input_start},
                                {"input_end", r.input_end},
                                {"output_start", r.output_start},
                                {"output_end", r.output_end},
                                {"label", label_name(r.label)},
                                {"placeholder", r.placeholder}});
            }
            json counts = json::object();
            for (const auto& [label, n] : result.stats.counts)
                counts[label_name(label)] = n;
            json body = {{"scrubbed", result.scrubbed_text},
                         {"replacements", reps},
                         {"stats",
                          {{"counts", counts},
                           {"input_chars", result.stats.input_chars},
                           {"input_bytes", result.stats.input_bytes},
                           {"wall_ms", result.stats.wall_ms}}}};
            res.set_content(body.dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
        }
    });

    server->set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty())
            res.set_content(json{{"error", "status " + std::to_string(res.status)}}.dump(),
                            "application/json");
    });
    return server;
}

}  // namespace phiscrub
