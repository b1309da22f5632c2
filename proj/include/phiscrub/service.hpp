#pragma once

#include <memory>
#include <set>
#include <string>

#include "phiscrub/crf.hpp"
#include "phiscrub/regex_phi.hpp"
#include "phiscrub/scrub.hpp"

namespace httplib {
class Server;
}

namespace phiscrub {

inline constexpr const char* kVersion = "1.0.0";

/// Versioned JSON description of a full scrubbing pipeline: model path,
/// pattern table, placeholder map, abbreviation list, chunk limit, enabled
/// labels. Relative paths resolve against the manifest's directory.
struct PipelineManifest {
    std::string model_path;          // required
    std::string pattern_table_path;  // optional, default table when empty
    std::string placeholder_map_path;
    std::string abbreviations_path;
    std::size_t chunk_char_limit = 100000;
    std::set<Label> enabled_labels;  // empty means the default set

    /// Throws InvalidConfig on missing fields, bad version, unknown labels.
    static PipelineManifest load_file(const std::string& path);
    void save_file(const std::string& path) const;
};

/// All referenced files loaded and validated; owns everything a Scrubber
/// needs. Immutable after construction.
struct Pipeline {
    CrfModel model;
    PatternTable patterns;
    Scrubber scrubber;
};

/// Throws InvalidConfig / ModelFormatError when any referenced file fails
/// to load or parse.
std::unique_ptr<Pipeline> load_pipeline(const PipelineManifest& manifest);

struct ServiceConfig {
    std::size_t max_body_bytes = 16 * 1024 * 1024;
};

/// POST /scrub: text/plain body or {"text": ...}; responds with
/// {"scrubbed", "replacements", "stats"}. Oversized bodies get 413,
/// malformed bodies 400. GET /health reports the version. The scrubber is
/// shared by concurrent handlers and must outlive the server.
std::unique_ptr<httplib::Server> make_server(const Scrubber& scrubber,
                                             const ServiceConfig& config = {});

}  // namespace phiscrub
