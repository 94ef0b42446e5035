#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qibitz {

/// Record field a match came from, by MEDLINE tag.
enum class SourceField { TI, AB, OT, MH, NM, RN };

enum class DrugChannel { Text, Mesh, Registry };
enum class GeneChannel { Mesh, Text };
enum class GeneTier { Direct, Context, Semantic };

std::string_view to_string(SourceField f);
std::string_view to_string(DrugChannel c);
std::string_view to_string(GeneChannel c);
std::string_view to_string(GeneTier t);

std::optional<SourceField> parse_source_field(std::string_view s);
std::optional<DrugChannel> parse_drug_channel(std::string_view s);
std::optional<GeneChannel> parse_gene_channel(std::string_view s);
std::optional<GeneTier> parse_gene_tier(std::string_view s);

struct DrugMatch {
    std::string token;
    DrugChannel channel = DrugChannel::Text;
    std::string evidence;  // synonym as written, descriptor UI, or registry number
    SourceField field = SourceField::TI;

    bool operator==(const DrugMatch&) const = default;
};

struct GeneMatch {
    std::string symbol;
    GeneChannel channel = GeneChannel::Mesh;
    std::optional<GeneTier> tier;  // set only for the text channel
    std::string evidence;
    SourceField field = SourceField::MH;

    bool operator==(const GeneMatch&) const = default;
};

/// Distinct values in first-seen order.
std::vector<std::string> distinct_tokens(const std::vector<DrugMatch>& matches);
std::vector<std::string> distinct_symbols(const std::vector<GeneMatch>& matches);

}  // namespace qibitz
