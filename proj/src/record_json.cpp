#include "qibitz/record_json.hpp"

#include <stdexcept>

namespace qibitz {

namespace {

template <class T, class Parse>
T parse_or_throw(const nlohmann::json& j, const char* key, Parse parse) {
    const auto s = j.at(key).get<std::string>();
    if (auto v = parse(s))
        return *v;
    throw std::invalid_argument(std::string("bad value for ") + key + ": " + s);
}

}  // namespace

void to_json(nlohmann::json& j, const PubMedRecord& r) {
    j = nlohmann::json{{"pmid", r.pmid},
                       {"title", r.title},
                       {"abstract", r.abstract},
                       {"other_terms", r.other_terms},
                       {"mesh_descriptors", r.mesh_descriptors},
                       {"substance_names", r.substance_names},
                       {"registry_numbers", r.registry_numbers},
                       {"legacy_gene_symbols", r.legacy_gene_symbols},
                       {"pub_year", r.pub_year ? nlohmann::json(*r.pub_year) : nlohmann::json(nullptr)},
                       {"journal", r.journal ? nlohmann::json(*r.journal) : nlohmann::json(nullptr)},
                       {"authors", r.authors},
                       {"revision", r.revision}};
}

void from_json(const nlohmann::json& j, PubMedRecord& r) {
    r.pmid = j.at("pmid").get<Pmid>();
    r.title = j.value("title", std::string{});
    r.abstract = j.value("abstract", std::string{});
    r.other_terms = j.value("other_terms", std::vector<std::string>{});
    r.mesh_descriptors = j.value("mesh_descriptors", std::vector<std::string>{});
    r.substance_names = j.value("substance_names", std::vector<std::string>{});
    r.registry_numbers = j.value("registry_numbers", std::vector<std::string>{});
    r.legacy_gene_symbols = j.value("legacy_gene_symbols", std::vector<std::string>{});
    r.pub_year = (j.contains("pub_year") && !j["pub_year"].is_null()) ? std::optional<int>(j["pub_year"].get<int>())
                                                                       : std::nullopt;
    r.journal = (j.contains("journal") && !j["journal"].is_null())
                    ? std::optional<std::string>(j["journal"].get<std::string>())
                    : std::nullopt;
    r.authors = j.value("authors", std::vector<std::string>{});
    r.revision = j.value("revision", std::int64_t{0});
}

void to_json(nlohmann::json& j, const DrugMatch& m) {
    j = nlohmann::json{{"token", m.token},
                       {"channel", to_string(m.channel)},
                       {"evidence", m.evidence},
                       {"field", to_string(m.field)}};
}

void from_json(const nlohmann::json& j, DrugMatch& m) {
    m.token = j.at("token").get<std::string>();
    m.channel = parse_or_throw<DrugChannel>(j, "channel", parse_drug_channel);
    m.evidence = j.at("evidence").get<std::string>();
    m.field = parse_or_throw<SourceField>(j, "field", parse_source_field);
}

void to_json(nlohmann::json& j, const GeneMatch& m) {
    j = nlohmann::json{{"symbol", m.symbol},
                       {"channel", to_string(m.channel)},
                       {"evidence", m.evidence},
                       {"field", to_string(m.field)}};
    if (m.tier)
        j["tier"] = to_string(*m.tier);
}

void from_json(const nlohmann::json& j, GeneMatch& m) {
    m.symbol = j.at("symbol").get<std::string>();
    m.channel = parse_or_throw<GeneChannel>(j, "channel", parse_gene_channel);
    m.evidence = j.at("evidence").get<std::string>();
    m.field = parse_or_throw<SourceField>(j, "field", parse_source_field);
    m.tier = j.contains("tier") ? std::optional<GeneTier>(parse_or_throw<GeneTier>(j, "tier", parse_gene_tier))
                                : std::nullopt;
}

void to_json(nlohmann::json& j, const EnrichedRecord& r) {
    to_json(j, r.record);
    j["drugs"] = r.drugs;
    j["genes"] = r.genes;
    j["drug_matches"] = r.drug_matches;
    j["gene_matches"] = r.gene_matches;
}

void from_json(const nlohmann::json& j, EnrichedRecord& r) {
    from_json(j, r.record);
    r.drugs = j.value("drugs", std::vector<std::string>{});
    r.genes = j.value("genes", std::vector<std::string>{});
    r.drug_matches = j.value("drug_matches", std::vector<DrugMatch>{});
    r.gene_matches = j.value("gene_matches", std::vector<GeneMatch>{});
}

}  // namespace qibitz
