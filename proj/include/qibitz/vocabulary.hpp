#pragma once

#include "qibitz/errors.hpp"

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qibitz {

enum class AmbiguityClass { Unambiguous, ContextGated, SemanticGated };

std::string_view to_string(AmbiguityClass c);
std::optional<AmbiguityClass> parse_ambiguity_class(std::string_view literal);

/// Class used when a gene row leaves the column blank: symbols made only of
/// uppercase letters, four or fewer, are context gated. Semantic gating is
/// never inferred; it must come from the vocabulary file.
AmbiguityClass default_ambiguity_class(std::string_view symbol);

struct DrugEntry {
    std::string token;
    std::string preferred_name;
    std::vector<std::string> synonyms;
    std::optional<std::string> mesh_descriptor;
    std::optional<std::string> registry_number;
    std::size_t line = 0;  // source line, 0 when built in code
};

struct GeneEntry {
    std::string symbol;
    std::string gene_name;
    std::vector<std::string> mesh_descriptors;
    AmbiguityClass ambiguity_class = AmbiguityClass::Unambiguous;
    std::vector<std::string> registry_numbers;  // accepted, never used for lookup
    std::size_t line = 0;
};

struct ValidationIssue {
    std::size_t row = 0;
    std::string rule;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> errors;
    std::vector<ValidationIssue> warnings;

    bool ok() const { return errors.empty(); }
    void merge(const ValidationReport& other);
};

class VocabularyError : public Error {
public:
    explicit VocabularyError(ValidationReport report);
    const ValidationReport& report() const noexcept { return report_; }

private:
    ValidationReport report_;
};

bool is_mesh_descriptor(std::string_view ui);

/// Drug vocabulary with three lookup channels. Immutable once built.
class DrugVocabulary {
public:
    DrugVocabulary() = default;

    /// Throws VocabularyError when the entries violate any invariant.
    static DrugVocabulary from_entries(std::vector<DrugEntry> entries);

    const std::vector<DrugEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    const DrugEntry* find(std::string_view token) const;
    /// Case-insensitive; punctuation runs compare equal to a single space.
    std::optional<std::string_view> token_for_synonym(std::string_view synonym) const;
    std::optional<std::string_view> token_for_mesh(std::string_view descriptor) const;
    std::optional<std::string_view> token_for_registry(std::string_view registry_number) const;

    /// Normalized synonym -> token; ordered for stable comparison.
    std::map<std::string, std::string> synonym_map() const;
    std::map<std::string, std::string> mesh_map() const;
    std::map<std::string, std::string> registry_map() const;

private:
    std::vector<DrugEntry> entries_;
    std::unordered_map<std::string, std::size_t> by_token_;
    std::unordered_map<std::string, std::size_t> by_synonym_;
    std::unordered_map<std::string, std::size_t> by_mesh_;
    std::unordered_map<std::string, std::size_t> by_registry_;
};

/// Gene vocabulary keyed by case-sensitive HGNC symbol.
class GeneVocabulary {
public:
    GeneVocabulary() = default;

    static GeneVocabulary from_entries(std::vector<GeneEntry> entries);

    const std::vector<GeneEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    const GeneEntry* find(std::string_view symbol) const;
    std::optional<std::string_view> symbol_for_mesh(std::string_view descriptor) const;

    std::map<std::string, std::string> mesh_map() const;

private:
    std::vector<GeneEntry> entries_;
    std::unordered_map<std::string, std::size_t> by_symbol_;
    std::unordered_map<std::string, std::size_t> by_mesh_;
};

// Row parsing collects structural problems into `report` and skips the row;
// it never throws on content.
std::vector<DrugEntry> parse_drug_rows(std::istream& in, ValidationReport& report);
std::vector<GeneEntry> parse_gene_rows(std::istream& in, ValidationReport& report);

ValidationReport validate(std::span<const DrugEntry> entries);
ValidationReport validate(std::span<const GeneEntry> entries);
ValidationReport validate(const DrugVocabulary& vocab);
ValidationReport validate(const GeneVocabulary& vocab);

DrugVocabulary load_drug_vocabulary(std::istream& in);
GeneVocabulary load_gene_vocabulary(std::istream& in);
DrugVocabulary load_drug_vocabulary_file(const std::string& path);
GeneVocabulary load_gene_vocabulary_file(const std::string& path);

void write_drug_vocabulary(std::ostream& out, const DrugVocabulary& vocab);
void write_gene_vocabulary(std::ostream& out, const GeneVocabulary& vocab);

}  // namespace qibitz
