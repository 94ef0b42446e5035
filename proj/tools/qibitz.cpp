// qibitz: operator entry point for vocabulary checks, ingestion, extraction
// debugging, search and the HTTP service.

#include "qibitz/config.hpp"
#include "qibitz/digest.hpp"
#include "qibitz/disambiguator.hpp"
#include "qibitz/drug_indexer.hpp"
#include "qibitz/enrichment.hpp"
#include "qibitz/facet_index.hpp"
#include "qibitz/gene_indexer.hpp"
#include "qibitz/pipeline.hpp"
#include "qibitz/record_json.hpp"
#include "qibitz/search_service.hpp"
#include "qibitz/vocabulary.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace qibitz;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;

int report_error(const Error& e) {
    std::cerr << "error[" << e.code() << "]: " << e.what() << '\n';
    return kExitFatal;
}

// --- vocab validate -------------------------------------------------------

template <typename Parse>
ValidationReport check_file(const std::string& path, Parse parse) {
    std::ifstream in(path);
    if (!in)
        throw FileNotFoundError(path);
    ValidationReport report;
    auto entries = parse(in, report);
    report.merge(validate(std::span<const typename decltype(entries)::value_type>(entries)));
    return report;
}

void print_issues(const std::string& file, const ValidationReport& r, bool as_json, json& out) {
    if (as_json) {
        auto list = [](const std::vector<ValidationIssue>& issues) {
            json a = json::array();
            for (const auto& i : issues)
                a.push_back({{"row", i.row}, {"rule", i.rule}, {"message", i.message}});
            return a;
        };
        out[file] = {{"errors", list(r.errors)}, {"warnings", list(r.warnings)}};
        return;
    }
    for (const auto& i : r.errors)
        std::cout << file << ":" << i.row << ": error [" << i.rule << "] " << i.message << '\n';
    for (const auto& i : r.warnings)
        std::cout << file << ":" << i.row << ": warning [" << i.rule << "] " << i.message << '\n';
    std::cout << file << ": " << r.errors.size() << " error(s), " << r.warnings.size() << " warning(s)\n";
}

int cmd_vocab_validate(const std::string& drug_path, const std::string& gene_path, bool as_json) {
    const auto drugs = check_file(drug_path, [](std::istream& in, ValidationReport& r) { return parse_drug_rows(in, r); });
    const auto genes = check_file(gene_path, [](std::istream& in, ValidationReport& r) { return parse_gene_rows(in, r); });
    json out = json::object();
    print_issues(drug_path, drugs, as_json, out);
    print_issues(gene_path, genes, as_json, out);
    if (as_json)
        std::cout << out.dump(2) << '\n';
    return drugs.ok() && genes.ok() ? kExitOk : kExitFatal;
}

// --- ingest / replay ------------------------------------------------------

int cmd_ingest(const std::string& config_path, bool incremental, int workers) {
    PipelineConfig config = load_pipeline_config(config_path);
    if (workers > 0)
        config.workers = workers;
    Pipeline pipeline(config);
    const RunReport report = incremental ? pipeline.run_incremental() : pipeline.run_full();
    std::cout << report.to_json().dump(2) << '\n';
    return report.exit_code();
}

int cmd_replay(const std::string& config_path, std::string drops) {
    PipelineConfig config = load_pipeline_config(config_path);
    if (drops.empty())
        drops = config.drops_log;
    if (drops.empty())
        throw ConfigError("no drop log given and none configured");
    Pipeline pipeline(config);
    std::cout << pipeline.replay_drops(drops).to_json().dump(2) << '\n';
    return kExitOk;
}

// --- extract --------------------------------------------------------------

/// Prints every oracle request to stderr before forwarding it.
class TracingDisambiguator : public Disambiguator {
public:
    explicit TracingDisambiguator(Disambiguator& inner) : inner_(&inner) {}
    Verdict verdict(const DisambiguationRequest& req) override {
        std::cerr << "trace: oracle call symbol=" << req.symbol << " digest=" << request_digest(req) << '\n';
        Verdict v = inner_->verdict(req);
        std::cerr << "trace: oracle reply symbol=" << req.symbol << " raw=" << json(v.raw).dump() << '\n';
        return v;
    }

private:
    Disambiguator* inner_;
};

struct ExtractOptions {
    std::string config;
    std::string drugs;
    std::string genes;
    std::string oracle_table;
    std::string text_file;
    Pmid pmid = 0;
    bool trace = false;
    bool json = false;
};

json matches_json(const EnrichedRecord& e, const std::vector<DroppedCandidate>& drops) {
    json d = json::array();
    for (const auto& x : drops)
        d.push_back(json::parse(to_json_line(x)));
    return {{"pmid", e.pmid()},
            {"drugs", e.drugs},
            {"genes", e.genes},
            {"drug_matches", e.drug_matches},
            {"gene_matches", e.gene_matches},
            {"dropped", d}};
}

void print_matches_table(const EnrichedRecord& e, const std::vector<DroppedCandidate>& drops) {
    if (e.drug_matches.empty() && e.gene_matches.empty())
        std::cout << "no matches\n";
    for (const auto& m : e.drug_matches)
        std::cout << "drug  " << m.token << "  " << to_string(m.channel) << "  " << to_string(m.field) << "  "
                  << m.evidence << '\n';
    for (const auto& m : e.gene_matches)
        std::cout << "gene  " << m.symbol << "  " << to_string(m.channel)
                  << (m.tier ? "/" + std::string(to_string(*m.tier)) : std::string()) << "  " << to_string(m.field)
                  << "  " << m.evidence << '\n';
    for (const auto& d : drops)
        std::cout << "dropped  " << d.symbol << "  " << d.reason << '\n';
}

int cmd_extract(const ExtractOptions& o) {
    std::optional<PipelineConfig> config;
    if (!o.config.empty())
        config = load_pipeline_config(o.config);

    const std::string drug_path = !o.drugs.empty() ? o.drugs : config ? config->drug_vocabulary : "";
    const std::string gene_path = !o.genes.empty() ? o.genes : config ? config->gene_vocabulary : "";
    if (drug_path.empty() || gene_path.empty())
        throw ConfigError("extract needs --config or both --drugs and --genes");

    const DrugVocabulary drugs = load_drug_vocabulary_file(drug_path);
    const GeneVocabulary genes = load_gene_vocabulary_file(gene_path);

    std::unique_ptr<Disambiguator> base;
    if (!o.oracle_table.empty())
        base = std::make_unique<TableDisambiguator>(TableDisambiguator::from_file(o.oracle_table));
    else if (config)
        base = make_disambiguator(config->oracle);
    else
        base = std::make_unique<UnavailableDisambiguator>();
    TracingDisambiguator traced(*base);
    Disambiguator& oracle = o.trace ? static_cast<Disambiguator&>(traced) : *base;

    ContextLexicon lexicon = (config && !config->context_lexicon.empty())
                                 ? ContextLexicon::from_file(config->context_lexicon)
                                 : ContextLexicon::defaults();
    DrugIndexer drug_indexer(drugs);
    GeneIndexer gene_indexer(genes, oracle, std::move(lexicon));
    Enricher enricher(drug_indexer, gene_indexer);

    PubMedRecord record;
    if (!o.text_file.empty()) {
        std::ifstream in(o.text_file);
        if (!in)
            throw FileNotFoundError(o.text_file);
        std::ostringstream ss;
        ss << in.rdbuf();
        record.abstract = ss.str();
    } else {
        if (!config)
            throw ConfigError("extract --pmid needs --config to locate the index");
        FacetIndex index;
        open_index(index, config->index);
        auto stored = index.get(o.pmid);
        if (!stored)
            throw Error("not-found", "pmid " + std::to_string(o.pmid) + " is not in the index");
        record = stored->record;
    }

    std::vector<DroppedCandidate> drops;
    const EnrichedRecord e = enricher.enrich(record, [&](const DroppedCandidate& d) { drops.push_back(d); });
    if (o.trace)
        std::cerr << "trace: oracle calls=" << gene_indexer.oracle_calls() << '\n';
    if (o.json)
        std::cout << matches_json(e, drops).dump(2) << '\n';
    else
        print_matches_table(e, drops);
    return kExitOk;
}

// --- search ---------------------------------------------------------------

struct SearchOptions {
    std::string config;
    std::string index;
    FacetQuery query;
    std::optional<int> year_min;
    std::optional<int> year_max;
    bool json = false;
};

std::string resolve_index(const std::string& index, const std::string& config_path) {
    if (!index.empty())
        return index;
    if (!config_path.empty())
        return load_pipeline_config(config_path).index;
    throw ConfigError("need --index or --config");
}

void print_result_table(const FacetResult& r) {
    std::cout << "total: " << r.total << '\n';
    for (const auto& h : r.hits) {
        std::cout << h.pmid << "  " << (h.year ? std::to_string(*h.year) : std::string("----")) << "  " << h.title
                  << '\n';
    }
    for (const auto& [name, values] : r.facets) {
        std::cout << name << ":";
        for (const auto& v : values)
            std::cout << ' ' << v.value << '(' << v.count << ')';
        std::cout << '\n';
    }
}

int cmd_search(SearchOptions o) {
    const std::string dir = resolve_index(o.index, o.config);
    FacetIndex index;
    open_index(index, dir);
    o.query.year_min = o.year_min;
    o.query.year_max = o.year_max;
    const FacetResult r = index.search(o.query);
    if (o.json)
        std::cout << result_to_json(r).dump(2) << '\n';
    else
        print_result_table(r);
    return kExitOk;
}

// --- serve ----------------------------------------------------------------

struct ServeOptions {
    std::string addr = "127.0.0.1:8080";
    std::string config;
    std::string index;
    std::string cors_origin;
    std::string access_log;
};

int cmd_serve(const ServeOptions& o) {
    ServiceConfig sc;
    parse_bind_address(o.addr, sc);
    sc.index_dir = resolve_index(o.index, o.config);
    sc.cors_origin = o.cors_origin;
    sc.access_log = o.access_log;

    // Route SIGTERM/SIGINT to a dedicated thread so shutdown is orderly.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGTERM);
    sigaddset(&signals, SIGINT);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    SearchServer server(sc);
    const int port = server.bind();
    std::cerr << "listening on " << sc.host << ":" << port << '\n';

    std::thread loader([&server] {
        try {
            server.load_index();
            std::cerr << "index loaded\n";
        } catch (const Error& e) {
            std::cerr << "error[" << e.code() << "]: " << e.what() << '\n';
        }
    });
    std::thread waiter([&server, signals] {
        int sig = 0;
        sigwait(&signals, &sig);
        std::cerr << "shutting down\n";
        server.stop();
    });

    server.listen();
    loader.join();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qibitz: PubMed enrichment pipeline and faceted search"};
    app.require_subcommand(1);
    int exit_code = kExitOk;

    // vocab validate
    auto* vocab = app.add_subcommand("vocab", "Vocabulary tools");
    vocab->require_subcommand(1);
    auto* validate_cmd = vocab->add_subcommand("validate", "Check a drug and a gene vocabulary");
    std::string drug_tsv, gene_tsv;
    bool validate_json = false;
    validate_cmd->add_option("drugs", drug_tsv, "Drug vocabulary TSV")->required();
    validate_cmd->add_option("genes", gene_tsv, "Gene vocabulary TSV")->required();
    validate_cmd->add_flag("--json", validate_json, "Print the report as JSON");
    validate_cmd->callback([&] { exit_code = cmd_vocab_validate(drug_tsv, gene_tsv, validate_json); });

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Run the pipeline over the configured archive");
    std::string ingest_config;
    bool full = false, incremental = false;
    int workers = 0;
    auto* full_flag = ingest->add_flag("--full", full, "Initial import (resumes an interrupted one)");
    auto* inc_flag = ingest->add_flag("--incremental", incremental, "Only batches newer than the checkpoint");
    full_flag->excludes(inc_flag);
    ingest->add_option("--config", ingest_config, "Pipeline config file")->required();
    ingest->add_option("--workers", workers, "Override the configured worker count")->check(CLI::PositiveNumber);
    ingest->callback([&] {
        if (!full && !incremental)
            throw CLI::ValidationError("ingest", "one of --full or --incremental is required");
        exit_code = cmd_ingest(ingest_config, incremental, workers);
    });

    // replay
    auto* replay = app.add_subcommand("replay", "Re-adjudicate dropped gene candidates");
    std::string replay_config, replay_drops;
    replay->add_option("--config", replay_config, "Pipeline config file")->required();
    replay->add_option("--drops", replay_drops, "Drop log (defaults to the configured one)");
    replay->callback([&] { exit_code = cmd_replay(replay_config, replay_drops); });

    // extract
    auto* extract = app.add_subcommand("extract", "Show drug and gene matches for one record or text");
    ExtractOptions xo;
    auto* pmid_opt = extract->add_option("--pmid", xo.pmid, "Record in the configured index");
    auto* text_opt = extract->add_option("--text", xo.text_file, "File holding free text");
    pmid_opt->excludes(text_opt);
    extract->add_option("--config", xo.config, "Pipeline config file");
    extract->add_option("--drugs", xo.drugs, "Drug vocabulary TSV");
    extract->add_option("--genes", xo.genes, "Gene vocabulary TSV");
    extract->add_option("--oracle-table", xo.oracle_table, "Verdict table (digest<TAB>verdict)");
    extract->add_flag("--trace", xo.trace, "Print oracle calls to stderr");
    extract->add_flag("--json", xo.json, "Print matches as JSON");
    extract->callback([&] {
        if (pmid_opt->count() == 0 && text_opt->count() == 0)
            throw CLI::ValidationError("extract", "one of --pmid or --text is required");
        exit_code = cmd_extract(xo);
    });

    // search
    auto* search = app.add_subcommand("search", "Query the index");
    SearchOptions so;
    search->add_option("--config", so.config, "Pipeline config file (for the index path)");
    search->add_option("--index", so.index, "Index directory");
    search->add_option("--q", so.query.text, "Free-text terms (all must match)");
    search->add_option("--drug", so.query.drugs, "Drug token (repeatable, OR)");
    search->add_option("--gene", so.query.genes, "Gene symbol (repeatable, OR)");
    search->add_option("--mesh", so.query.mesh, "MeSH descriptor UI (repeatable, OR)");
    search->add_option("--year-min", so.year_min, "Earliest publication year");
    search->add_option("--year-max", so.year_max, "Latest publication year");
    search->add_option("--page", so.query.page, "Page number, from 0");
    search->add_option("--page-size", so.query.page_size, "Hits per page (1-500)");
    search->add_option("--facet-limit", so.query.facet_limit, "Values per facet");
    search->add_flag("--json", so.json, "Print the result as JSON");
    search->callback([&] { exit_code = cmd_search(so); });

    // serve
    auto* serve = app.add_subcommand("serve", "Start the HTTP search API");
    ServeOptions vo;
    serve->add_option("--addr", vo.addr, "Bind address host:port")->capture_default_str();
    serve->add_option("--config", vo.config, "Pipeline config file (for the index path)");
    serve->add_option("--index", vo.index, "Index directory");
    serve->add_option("--cors-origin", vo.cors_origin, "Allowed browser origin")->envname("QIBITZ_CORS_ORIGIN");
    serve->add_option("--access-log", vo.access_log, "Line-delimited JSON access log");
    serve->callback([&] { exit_code = cmd_serve(vo); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitFatal;
    } catch (const Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << '\n';
        return kExitFatal;
    }
    return exit_code;
}
