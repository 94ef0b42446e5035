#pragma once

#include "qibitz/archive.hpp"
#include "qibitz/disambiguator.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

namespace qibitz {

struct OracleSettings {
    std::string mode = "none";  // none | table | http
    std::string table;          // TSV test double, mode=table
    HttpOracleConfig http;      // mode=http
    std::string cache;          // optional persisted verdict cache
};

/// Pipeline settings. Relative paths in a config file resolve against the
/// file's directory.
struct PipelineConfig {
    ArchiveLocator archive;
    std::string drug_vocabulary;
    std::string gene_vocabulary;
    std::string context_lexicon;  // optional word list overriding the default
    OracleSettings oracle;
    int workers = 1;
    std::size_t queue_capacity = 1024;
    std::string index;
    std::string checkpoint;
    std::string drops_log;
    std::string parse_errors_log;
    int fetch_attempts = 3;
    int retry_backoff_ms = 1000;

    /// Throws ConfigError when required keys are missing, workers < 1, or
    /// two output paths coincide.
    void validate() const;
};

/// Reads `key = value` lines. `[section]` lines prefix following keys with
/// `section.`; values may be double-quoted; `#` starts a comment.
PipelineConfig parse_pipeline_config(std::istream& in, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::string& path);

/// Builds the disambiguator stack the settings describe (cache on top when
/// configured). The returned object owns every layer.
std::unique_ptr<Disambiguator> make_disambiguator(const OracleSettings& settings);

}  // namespace qibitz
