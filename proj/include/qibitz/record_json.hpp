#pragma once

#include "qibitz/enrichment.hpp"
#include "qibitz/matches.hpp"
#include "qibitz/pubmed_record.hpp"

#include <nlohmann/json.hpp>

namespace qibitz {

void to_json(nlohmann::json& j, const PubMedRecord& r);
void from_json(const nlohmann::json& j, PubMedRecord& r);
void to_json(nlohmann::json& j, const DrugMatch& m);
void from_json(const nlohmann::json& j, DrugMatch& m);
void to_json(nlohmann::json& j, const GeneMatch& m);
void from_json(const nlohmann::json& j, GeneMatch& m);

/// Flat object: every record field at top level, plus drugs, genes,
/// drug_matches and gene_matches.
void to_json(nlohmann::json& j, const EnrichedRecord& r);
void from_json(const nlohmann::json& j, EnrichedRecord& r);

}  // namespace qibitz
