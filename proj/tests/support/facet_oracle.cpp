#include "support/facet_oracle.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace qibitz::testing {

namespace {

std::set<std::string> tokens(const std::string& text) {
    std::set<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.insert(cur);
            cur.clear();
        }
    }
    if (!cur.empty())
        out.insert(cur);
    return out;
}

bool any_of_in(const std::vector<std::string>& wanted, const std::vector<std::string>& have) {
    for (const auto& w : wanted)
        if (std::find(have.begin(), have.end(), w) != have.end())
            return true;
    return false;
}

std::vector<FacetValue> ranked(const std::map<std::string, std::size_t>& counts, std::size_t limit) {
    std::vector<FacetValue> out;
    for (const auto& [v, c] : counts)
        out.push_back({v, c});
    std::stable_sort(out.begin(), out.end(), [](const FacetValue& a, const FacetValue& b) { return a.count > b.count; });
    if (out.size() > limit)
        out.resize(limit);
    return out;
}

std::vector<std::string> distinct(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

FacetResult brute_force_search(const std::vector<EnrichedRecord>& corpus, const FacetQuery& q) {
    const auto query_terms = tokens(q.text);
    std::vector<const EnrichedRecord*> matched;
    for (const auto& r : corpus) {
        if (!query_terms.empty()) {
            const auto have = tokens(r.record.title + " " + r.record.abstract);
            if (!std::includes(have.begin(), have.end(), query_terms.begin(), query_terms.end()))
                continue;
        }
        if (!q.drugs.empty() && !any_of_in(q.drugs, r.drugs))
            continue;
        if (!q.genes.empty() && !any_of_in(q.genes, r.genes))
            continue;
        if (!q.mesh.empty() && !any_of_in(q.mesh, r.record.mesh_descriptors))
            continue;
        if (q.year_min && (!r.record.pub_year || *r.record.pub_year < *q.year_min))
            continue;
        if (q.year_max && (!r.record.pub_year || *r.record.pub_year > *q.year_max))
            continue;
        matched.push_back(&r);
    }

    std::map<std::string, std::size_t> drugs, genes, mesh, years;
    for (const auto* r : matched) {
        for (const auto& v : distinct(r->drugs))
            ++drugs[v];
        for (const auto& v : distinct(r->genes))
            ++genes[v];
        for (const auto& v : distinct(r->record.mesh_descriptors))
            ++mesh[v];
        if (r->record.pub_year)
            ++years[std::to_string(*r->record.pub_year)];
    }

    FacetResult out;
    out.total = matched.size();
    out.facets["drugs"] = ranked(drugs, q.facet_limit);
    out.facets["genes"] = ranked(genes, q.facet_limit);
    out.facets["mesh"] = ranked(mesh, q.facet_limit);
    out.facets["years"] = ranked(years, q.facet_limit);

    std::vector<const EnrichedRecord*> order = matched;
    std::sort(order.begin(), order.end(), [](const EnrichedRecord* a, const EnrichedRecord* b) {
        if (a->record.pub_year.has_value() != b->record.pub_year.has_value())
            return a->record.pub_year.has_value();
        if (a->record.pub_year != b->record.pub_year)
            return *a->record.pub_year > *b->record.pub_year;
        return a->record.pmid > b->record.pmid;
    });
    for (std::size_t i = q.page * q.page_size; i < order.size() && i < (q.page + 1) * q.page_size; ++i) {
        const auto* r = order[i];
        out.hits.push_back({r->record.pmid, r->record.title, r->record.pub_year, r->drugs, r->genes});
    }
    return out;
}

}  // namespace qibitz::testing
