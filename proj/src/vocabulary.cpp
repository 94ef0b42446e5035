#include "qibitz/vocabulary.hpp"

#include "qibitz/text_match.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace qibitz {

namespace {

constexpr std::string_view kDrugHeader = "token\tpreferred_name\tsynonyms\tmesh_descriptor\tregistry_number";
constexpr std::string_view kGeneHeader = "symbol\tgene_name\tmesh_descriptors\tambiguity_class";
// Trailing optional cells may be omitted entirely.
constexpr std::size_t kMinColumns = 3;
constexpr std::string_view kGeneHeaderWithRegistry =
    "symbol\tgene_name\tmesh_descriptors\tambiguity_class\tregistry_numbers";

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

/// Splits a pipe list; an empty cell yields an empty list, empty pieces are kept
/// so validation can flag them.
std::vector<std::string> split_list(std::string_view cell) {
    std::vector<std::string> out;
    if (trim(cell).empty())
        return out;
    for (auto& piece : split(cell, '|'))
        out.push_back(trim(piece));
    return out;
}

std::optional<std::string> optional_cell(std::string_view cell) {
    auto t = trim(cell);
    if (t.empty())
        return std::nullopt;
    return t;
}

bool has_whitespace(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

/// Reads data lines (skipping comments and blanks) after checking the header.
/// Calls fn(line_number, cells).
template <class Fn>
void for_each_row(std::istream& in, std::span<const std::string_view> headers, ValidationReport& report, Fn&& fn) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        if (!header_seen) {
            header_seen = true;
            auto it = std::find(headers.begin(), headers.end(), std::string_view(line));
            if (it == headers.end()) {
                report.errors.push_back({line_no, "header", "unexpected header: " + line});
                return;
            }
            columns = split(line, '\t').size();
            continue;
        }
        auto cells = split(line, '\t');
        if (cells.size() < kMinColumns || cells.size() > columns) {
            report.errors.push_back({line_no, "malformed-row",
                                     "expected " + std::to_string(columns) + " columns, got " +
                                         std::to_string(cells.size())});
            continue;
        }
        cells.resize(columns);
        fn(line_no, cells);
    }
    if (!header_seen)
        report.errors.push_back({0, "header", "missing header line"});
}

}  // namespace

std::string_view to_string(AmbiguityClass c) {
    switch (c) {
    case AmbiguityClass::Unambiguous:
        return "UNAMBIGUOUS";
    case AmbiguityClass::ContextGated:
        return "CONTEXT_GATED";
    case AmbiguityClass::SemanticGated:
        return "SEMANTIC_GATED";
    }
    return "UNAMBIGUOUS";
}

std::optional<AmbiguityClass> parse_ambiguity_class(std::string_view literal) {
    if (literal == "UNAMBIGUOUS")
        return AmbiguityClass::Unambiguous;
    if (literal == "CONTEXT_GATED")
        return AmbiguityClass::ContextGated;
    if (literal == "SEMANTIC_GATED")
        return AmbiguityClass::SemanticGated;
    return std::nullopt;
}

AmbiguityClass default_ambiguity_class(std::string_view symbol) {
    const bool all_upper =
        !symbol.empty() && std::all_of(symbol.begin(), symbol.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
    return (all_upper && symbol.size() <= 4) ? AmbiguityClass::ContextGated : AmbiguityClass::Unambiguous;
}

bool is_mesh_descriptor(std::string_view ui) {
    return ui.size() >= 2 && ui.front() == 'D' &&
           std::all_of(ui.begin() + 1, ui.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void ValidationReport::merge(const ValidationReport& other) {
    errors.insert(errors.end(), other.errors.begin(), other.errors.end());
    warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
}

namespace {

std::string describe(const ValidationReport& report) {
    std::ostringstream os;
    os << "vocabulary invalid";
    if (!report.errors.empty()) {
        const auto& e = report.errors.front();
        os << ": row " << e.row << " [" << e.rule << "] " << e.message;
        if (report.errors.size() > 1)
            os << " (+" << report.errors.size() - 1 << " more)";
    }
    return os.str();
}

}  // namespace

VocabularyError::VocabularyError(ValidationReport report)
    : Error("vocabulary-invalid", describe(report)), report_(std::move(report)) {}

// ---------------------------------------------------------------------------
// Parsing

std::vector<DrugEntry> parse_drug_rows(std::istream& in, ValidationReport& report) {
    std::vector<DrugEntry> rows;
    const std::string_view headers[] = {kDrugHeader};
    for_each_row(in, headers, report, [&](std::size_t line_no, const std::vector<std::string>& cells) {
        DrugEntry e;
        e.token = trim(cells[0]);
        e.preferred_name = trim(cells[1]);
        e.synonyms = split_list(cells[2]);
        e.mesh_descriptor = optional_cell(cells[3]);
        e.registry_number = optional_cell(cells[4]);
        e.line = line_no;
        rows.push_back(std::move(e));
    });
    return rows;
}

std::vector<GeneEntry> parse_gene_rows(std::istream& in, ValidationReport& report) {
    std::vector<GeneEntry> rows;
    const std::string_view headers[] = {kGeneHeader, kGeneHeaderWithRegistry};
    for_each_row(in, headers, report, [&](std::size_t line_no, const std::vector<std::string>& cells) {
        GeneEntry e;
        e.symbol = trim(cells[0]);
        e.gene_name = trim(cells[1]);
        e.mesh_descriptors = split_list(cells[2]);
        e.line = line_no;
        if (e.symbol.empty()) {
            report.errors.push_back({line_no, "malformed-row", "empty symbol"});
            return;
        }
        const std::string literal = trim(cells[3]);
        if (literal.empty()) {
            e.ambiguity_class = default_ambiguity_class(e.symbol);
        } else if (auto cls = parse_ambiguity_class(literal)) {
            e.ambiguity_class = *cls;
        } else {
            report.errors.push_back({line_no, "unknown-ambiguity-class", "unknown ambiguity class '" + literal + "'"});
            return;
        }
        if (cells.size() > 4)
            e.registry_numbers = split_list(cells[4]);
        rows.push_back(std::move(e));
    });
    return rows;
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate(std::span<const DrugEntry> entries) {
    ValidationReport report;
    std::unordered_map<std::string, const DrugEntry*> tokens;
    std::unordered_map<std::string, const DrugEntry*> synonyms;
    std::unordered_map<std::string, const DrugEntry*> mesh;
    std::unordered_map<std::string, const DrugEntry*> registry;

    for (const auto& e : entries) {
        if (e.token.empty() || has_whitespace(e.token) ||
            std::any_of(e.token.begin(), e.token.end(), [](char c) { return c >= 'A' && c <= 'Z'; })) {
            report.errors.push_back({e.line, "token-format", "token '" + e.token + "' must be lowercase without whitespace"});
        }
        if (auto [it, inserted] = tokens.emplace(e.token, &e); !inserted) {
            report.errors.push_back({e.line, "unique-token",
                                     "token '" + e.token + "' already defined at row " + std::to_string(it->second->line)});
        }
        for (const auto& syn : e.synonyms) {
            const std::string key = text::normalize_phrase(syn);
            if (key.empty()) {
                report.errors.push_back({e.line, "empty-synonym", "empty synonym for token '" + e.token + "'"});
                continue;
            }
            auto [it, inserted] = synonyms.emplace(key, &e);
            if (!inserted && it->second->token != e.token) {
                report.errors.push_back({e.line, "synonym-collision",
                                         "synonym '" + syn + "' maps to both '" + it->second->token + "' and '" +
                                             e.token + "'"});
            }
        }
        if (e.mesh_descriptor) {
            if (!is_mesh_descriptor(*e.mesh_descriptor)) {
                report.errors.push_back({e.line, "mesh-format", "'" + *e.mesh_descriptor + "' is not a MeSH descriptor UI"});
            } else if (auto [it, inserted] = mesh.emplace(*e.mesh_descriptor, &e);
                       !inserted && it->second->token != e.token) {
                report.warnings.push_back({e.line, "mesh-collision",
                                           *e.mesh_descriptor + " already maps to '" + it->second->token +
                                               "'; keeping the first"});
            }
        }
        if (e.registry_number) {
            if (has_whitespace(*e.registry_number)) {
                report.errors.push_back({e.line, "registry-format", "registry number contains whitespace"});
            } else if (auto [it, inserted] = registry.emplace(*e.registry_number, &e);
                       !inserted && it->second->token != e.token) {
                report.warnings.push_back({e.line, "registry-collision",
                                           *e.registry_number + " already maps to '" + it->second->token +
                                               "'; keeping the first"});
            }
        }
    }
    return report;
}

ValidationReport validate(std::span<const GeneEntry> entries) {
    ValidationReport report;
    std::unordered_map<std::string, const GeneEntry*> symbols;
    std::unordered_map<std::string, const GeneEntry*> mesh;
    for (const auto& e : entries) {
        if (e.symbol.empty() || has_whitespace(e.symbol))
            report.errors.push_back({e.line, "symbol-format", "symbol '" + e.symbol + "' is empty or has whitespace"});
        if (auto [it, inserted] = symbols.emplace(e.symbol, &e); !inserted) {
            report.errors.push_back({e.line, "unique-symbol",
                                     "symbol '" + e.symbol + "' already defined at row " + std::to_string(it->second->line)});
        }
        if (e.ambiguity_class == AmbiguityClass::SemanticGated && trim(e.gene_name).empty())
            report.errors.push_back({e.line, "missing-gene-name", "SEMANTIC_GATED symbol '" + e.symbol + "' needs a gene name"});
        for (const auto& d : e.mesh_descriptors) {
            if (!is_mesh_descriptor(d)) {
                report.errors.push_back({e.line, "mesh-format", "'" + d + "' is not a MeSH descriptor UI"});
                continue;
            }
            if (auto [it, inserted] = mesh.emplace(d, &e); !inserted && it->second->symbol != e.symbol) {
                report.warnings.push_back({e.line, "mesh-collision",
                                           d + " already maps to '" + it->second->symbol + "'; keeping the first"});
            }
        }
    }
    return report;
}

ValidationReport validate(const DrugVocabulary& vocab) { return validate(std::span<const DrugEntry>(vocab.entries())); }
ValidationReport validate(const GeneVocabulary& vocab) { return validate(std::span<const GeneEntry>(vocab.entries())); }

// ---------------------------------------------------------------------------
// Construction and lookup

DrugVocabulary DrugVocabulary::from_entries(std::vector<DrugEntry> entries) {
    auto report = validate(std::span<const DrugEntry>(entries));
    if (!report.ok())
        throw VocabularyError(std::move(report));
    DrugVocabulary v;
    v.entries_ = std::move(entries);
    for (std::size_t i = 0; i < v.entries_.size(); ++i) {
        const auto& e = v.entries_[i];
        v.by_token_.emplace(e.token, i);
        for (const auto& syn : e.synonyms)
            v.by_synonym_.emplace(text::normalize_phrase(syn), i);
        if (e.mesh_descriptor)
            v.by_mesh_.emplace(*e.mesh_descriptor, i);  // first row wins
        if (e.registry_number)
            v.by_registry_.emplace(*e.registry_number, i);
    }
    return v;
}

namespace {

template <class Map, class Entries, class Proj>
std::optional<std::string_view> lookup(const Map& map, const Entries& entries, std::string_view key, Proj proj) {
    auto it = map.find(std::string(key));
    if (it == map.end())
        return std::nullopt;
    return std::string_view(proj(entries[it->second]));
}

template <class Map, class Entries, class Proj>
std::map<std::string, std::string> ordered(const Map& map, const Entries& entries, Proj proj) {
    std::map<std::string, std::string> out;
    for (const auto& [k, i] : map)
        out.emplace(k, proj(entries[i]));
    return out;
}

}  // namespace

const DrugEntry* DrugVocabulary::find(std::string_view token) const {
    auto it = by_token_.find(std::string(token));
    return it == by_token_.end() ? nullptr : &entries_[it->second];
}

std::optional<std::string_view> DrugVocabulary::token_for_synonym(std::string_view synonym) const {
    return lookup(by_synonym_, entries_, text::normalize_phrase(synonym), [](const DrugEntry& e) -> const std::string& { return e.token; });
}

std::optional<std::string_view> DrugVocabulary::token_for_mesh(std::string_view descriptor) const {
    return lookup(by_mesh_, entries_, descriptor, [](const DrugEntry& e) -> const std::string& { return e.token; });
}

std::optional<std::string_view> DrugVocabulary::token_for_registry(std::string_view registry_number) const {
    return lookup(by_registry_, entries_, registry_number, [](const DrugEntry& e) -> const std::string& { return e.token; });
}

std::map<std::string, std::string> DrugVocabulary::synonym_map() const {
    return ordered(by_synonym_, entries_, [](const DrugEntry& e) { return e.token; });
}
std::map<std::string, std::string> DrugVocabulary::mesh_map() const {
    return ordered(by_mesh_, entries_, [](const DrugEntry& e) { return e.token; });
}
std::map<std::string, std::string> DrugVocabulary::registry_map() const {
    return ordered(by_registry_, entries_, [](const DrugEntry& e) { return e.token; });
}

GeneVocabulary GeneVocabulary::from_entries(std::vector<GeneEntry> entries) {
    auto report = validate(std::span<const GeneEntry>(entries));
    if (!report.ok())
        throw VocabularyError(std::move(report));
    GeneVocabulary v;
    v.entries_ = std::move(entries);
    for (std::size_t i = 0; i < v.entries_.size(); ++i) {
        v.by_symbol_.emplace(v.entries_[i].symbol, i);
        for (const auto& d : v.entries_[i].mesh_descriptors)
            v.by_mesh_.emplace(d, i);
    }
    return v;
}

const GeneEntry* GeneVocabulary::find(std::string_view symbol) const {
    auto it = by_symbol_.find(std::string(symbol));
    return it == by_symbol_.end() ? nullptr : &entries_[it->second];
}

std::optional<std::string_view> GeneVocabulary::symbol_for_mesh(std::string_view descriptor) const {
    return lookup(by_mesh_, entries_, descriptor, [](const GeneEntry& e) -> const std::string& { return e.symbol; });
}

std::map<std::string, std::string> GeneVocabulary::mesh_map() const {
    return ordered(by_mesh_, entries_, [](const GeneEntry& e) { return e.symbol; });
}

// ---------------------------------------------------------------------------
// Loading and writing

DrugVocabulary load_drug_vocabulary(std::istream& in) {
    ValidationReport report;
    auto rows = parse_drug_rows(in, report);
    if (!report.ok())
        throw VocabularyError(std::move(report));
    return DrugVocabulary::from_entries(std::move(rows));
}

GeneVocabulary load_gene_vocabulary(std::istream& in) {
    ValidationReport report;
    auto rows = parse_gene_rows(in, report);
    if (!report.ok())
        throw VocabularyError(std::move(report));
    return GeneVocabulary::from_entries(std::move(rows));
}

DrugVocabulary load_drug_vocabulary_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FileNotFoundError(path);
    return load_drug_vocabulary(in);
}

GeneVocabulary load_gene_vocabulary_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FileNotFoundError(path);
    return load_gene_vocabulary(in);
}

namespace {

std::string join(const std::vector<std::string>& items, char sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out.push_back(sep);
        out += items[i];
    }
    return out;
}

}  // namespace

void write_drug_vocabulary(std::ostream& out, const DrugVocabulary& vocab) {
    out << kDrugHeader << '\n';
    for (const auto& e : vocab.entries()) {
        out << e.token << '\t' << e.preferred_name << '\t' << join(e.synonyms, '|') << '\t'
            << e.mesh_descriptor.value_or("") << '\t' << e.registry_number.value_or("") << '\n';
    }
}

void write_gene_vocabulary(std::ostream& out, const GeneVocabulary& vocab) {
    out << kGeneHeaderWithRegistry << '\n';
    for (const auto& e : vocab.entries()) {
        out << e.symbol << '\t' << e.gene_name << '\t' << join(e.mesh_descriptors, '|') << '\t'
            << to_string(e.ambiguity_class) << '\t' << join(e.registry_numbers, '|') << '\n';
    }
}

}  // namespace qibitz
