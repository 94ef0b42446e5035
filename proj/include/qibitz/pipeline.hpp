#pragma once

#include "qibitz/config.hpp"
#include "qibitz/errors.hpp"
#include "qibitz/facet_index.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qibitz {

class PipelineError : public Error {
public:
    PipelineError(std::string code, const std::string& message) : Error(std::move(code), message) {}
};

/// Progress of a pipeline over an archive, committed one whole batch at a time.
struct Checkpoint {
    struct Batch {
        std::string name;
        std::size_t upserts = 0;
        std::size_t deletes = 0;
        std::size_t parse_errors = 0;

        bool operator==(const Batch&) const = default;
    };

    std::vector<Batch> batches;  // strictly increasing by name
    std::uint64_t oracle_calls = 0;

    std::optional<std::string> watermark() const;
    /// Throws PipelineError when batch names are not strictly increasing.
    void validate() const;

    nlohmann::json to_json() const;
    static Checkpoint from_json(const nlohmann::json& j);

    /// Absent file -> nullopt. Corrupt file -> PipelineError.
    static std::optional<Checkpoint> load(const std::string& path);
    /// Written to a temporary file then renamed over `path`.
    void save(const std::string& path) const;

    bool operator==(const Checkpoint&) const = default;
};

struct RunReport {
    std::size_t batches = 0;
    std::size_t upserts = 0;
    std::size_t deletes = 0;
    std::size_t parse_errors = 0;
    std::size_t citations = 0;  // citation elements seen, parsed or not
    std::uint64_t oracle_calls = 0;
    std::vector<std::string> processed;

    nlohmann::json to_json() const;
    /// 0 success, 2 partial (parse errors present).
    int exit_code() const { return parse_errors > 0 ? 2 : 0; }
};

/// Test seams. Each hook runs after the named step for a batch; throwing
/// from a hook aborts the run at that point, as a crash would.
struct PipelineHooks {
    std::function<void(const std::string& batch)> after_index_commit;
    std::function<void(const std::string& batch)> after_checkpoint;
};

/// Extract -> transform -> load over an archive of batch files.
///
/// Batches are parsed as a stream; records accumulate in a bounded chunk that
/// is enriched in parallel and committed to the index in event order. After
/// each batch the index snapshot is written, then the checkpoint.
class Pipeline {
public:
    /// `oracle` overrides config.oracle when given; it must outlive the pipeline.
    explicit Pipeline(PipelineConfig config, PipelineHooks hooks = {}, Disambiguator* oracle = nullptr);
    ~Pipeline();

    /// Initial import. Resumes after the checkpoint watermark if a previous
    /// full run was interrupted.
    RunReport run_full();
    /// Processes only batches newer than the checkpoint. Requires a checkpoint.
    RunReport run_incremental();

    struct ReplayReport {
        std::size_t candidates = 0;
        std::size_t records = 0;
        std::size_t still_dropped = 0;
        nlohmann::json to_json() const;
    };
    /// Re-enriches the records named in a drop log with the current oracle,
    /// upserts them, and rewrites the log with whatever is still unresolved.
    ReplayReport replay_drops(const std::string& drops_path);

private:
    RunReport run(bool require_checkpoint);

    PipelineConfig config_;
    PipelineHooks hooks_;
    Disambiguator* oracle_override_;
};

RunReport run_full(const PipelineConfig& config);
RunReport run_incremental(const PipelineConfig& config);

/// Loads the index persisted at `dir`; empty index when nothing is there yet.
void open_index(FacetIndex& index, const std::string& dir);

}  // namespace qibitz
