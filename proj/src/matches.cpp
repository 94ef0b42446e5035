#include "qibitz/matches.hpp"

#include <array>
#include <unordered_set>

namespace qibitz {

namespace {

template <class Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view s, const std::array<std::pair<Enum, std::string_view>, N>& names) {
    for (const auto& [value, name] : names) {
        if (name == s)
            return value;
    }
    return std::nullopt;
}

template <class Enum, std::size_t N>
std::string_view name_of(Enum e, const std::array<std::pair<Enum, std::string_view>, N>& names) {
    for (const auto& [value, name] : names) {
        if (value == e)
            return name;
    }
    return "?";
}

constexpr std::array<std::pair<SourceField, std::string_view>, 6> kFields{{
    {SourceField::TI, "TI"},
    {SourceField::AB, "AB"},
    {SourceField::OT, "OT"},
    {SourceField::MH, "MH"},
    {SourceField::NM, "NM"},
    {SourceField::RN, "RN"},
}};
constexpr std::array<std::pair<DrugChannel, std::string_view>, 3> kDrugChannels{{
    {DrugChannel::Text, "TEXT"},
    {DrugChannel::Mesh, "MESH"},
    {DrugChannel::Registry, "REGISTRY"},
}};
constexpr std::array<std::pair<GeneChannel, std::string_view>, 2> kGeneChannels{{
    {GeneChannel::Mesh, "MESH"},
    {GeneChannel::Text, "TEXT"},
}};
constexpr std::array<std::pair<GeneTier, std::string_view>, 3> kTiers{{
    {GeneTier::Direct, "DIRECT"},
    {GeneTier::Context, "CONTEXT"},
    {GeneTier::Semantic, "SEMANTIC"},
}};

}  // namespace

std::string_view to_string(SourceField f) { return name_of(f, kFields); }
std::string_view to_string(DrugChannel c) { return name_of(c, kDrugChannels); }
std::string_view to_string(GeneChannel c) { return name_of(c, kGeneChannels); }
std::string_view to_string(GeneTier t) { return name_of(t, kTiers); }

std::optional<SourceField> parse_source_field(std::string_view s) { return parse_enum(s, kFields); }
std::optional<DrugChannel> parse_drug_channel(std::string_view s) { return parse_enum(s, kDrugChannels); }
std::optional<GeneChannel> parse_gene_channel(std::string_view s) { return parse_enum(s, kGeneChannels); }
std::optional<GeneTier> parse_gene_tier(std::string_view s) { return parse_enum(s, kTiers); }

std::vector<std::string> distinct_tokens(const std::vector<DrugMatch>& matches) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& m : matches) {
        if (seen.insert(m.token).second)
            out.push_back(m.token);
    }
    return out;
}

std::vector<std::string> distinct_symbols(const std::vector<GeneMatch>& matches) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& m : matches) {
        if (seen.insert(m.symbol).second)
            out.push_back(m.symbol);
    }
    return out;
}

}  // namespace qibitz
