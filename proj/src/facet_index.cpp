#include "qibitz/facet_index.hpp"

#include "qibitz/digest.hpp"
#include "qibitz/record_json.hpp"
#include "qibitz/text_match.hpp"

#include <omp.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace qibitz {

namespace {

constexpr std::size_t kSegmentRecords = 10000;
constexpr std::size_t kParallelCountThreshold = 20000;

void insert_sorted(std::vector<Pmid>& v, Pmid p) {
    auto it = std::lower_bound(v.begin(), v.end(), p);
    if (it == v.end() || *it != p)
        v.insert(it, p);
}

void erase_sorted(std::vector<Pmid>& v, Pmid p) {
    auto it = std::lower_bound(v.begin(), v.end(), p);
    if (it != v.end() && *it == p)
        v.erase(it);
}

template <class Map>
void post(Map& map, const std::vector<std::string>& values, Pmid p) {
    for (const auto& v : values)
        insert_sorted(map[v], p);
}

template <class Map>
void unpost(Map& map, const std::vector<std::string>& values, Pmid p) {
    for (const auto& v : values) {
        auto it = map.find(v);
        if (it == map.end())
            continue;
        erase_sorted(it->second, p);
        if (it->second.empty())
            map.erase(it);
    }
}

std::vector<Pmid> intersect(const std::vector<Pmid>& a, const std::vector<Pmid>& b) {
    std::vector<Pmid> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

template <class Map>
std::vector<Pmid> union_of(const Map& map, const std::vector<std::string>& values) {
    std::vector<Pmid> out;
    for (const auto& v : values) {
        auto it = map.find(v);
        if (it == map.end())
            continue;
        std::vector<Pmid> merged;
        std::set_union(out.begin(), out.end(), it->second.begin(), it->second.end(), std::back_inserter(merged));
        out = std::move(merged);
    }
    return out;
}

void accumulate(FacetCounts& c, const EnrichedRecord& r) {
    for (const auto& d : r.drugs)
        ++c.drugs[d];
    for (const auto& g : r.genes)
        ++c.genes[g];
    for (const auto& m : r.record.mesh_descriptors)
        ++c.mesh[m];
    if (r.record.pub_year)
        ++c.years[*r.record.pub_year];
}

template <class Map>
void merge_into(Map& into, const Map& from) {
    for (const auto& [k, v] : from)
        into[k] += v;
}

std::vector<FacetValue> rank(std::vector<FacetValue> values, std::size_t limit) {
    std::sort(values.begin(), values.end(), [](const FacetValue& a, const FacetValue& b) {
        return a.count != b.count ? a.count > b.count : a.value < b.value;
    });
    if (values.size() > limit)
        values.resize(limit);
    return values;
}

std::string record_line(const EnrichedRecord& r) {
    nlohmann::json j = r;
    return j.dump();
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw SnapshotError("missing file " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out)
        throw IoError("cannot write " + p.string());
}

fs::path sibling(const fs::path& dir, std::string_view suffix) {
    fs::path clean = dir;
    if (!clean.has_filename())
        clean = clean.parent_path();
    return clean.parent_path() / (clean.filename().string() + std::string(suffix));
}

}  // namespace

// ---------------------------------------------------------------------------

void FacetQuery::validate() const {
    if (page_size < 1 || page_size > kMaxPageSize)
        throw QueryError("page_size must be in [1, " + std::to_string(kMaxPageSize) + "]");
    if (facet_limit < 1)
        throw QueryError("facet_limit must be at least 1");
    if (year_min && year_max && *year_min > *year_max)
        throw QueryError("year_min must not exceed year_max");
}

std::vector<std::string> record_terms(const PubMedRecord& record) {
    auto terms = text::word_tokens(record.title);
    auto more = text::word_tokens(record.abstract);
    terms.insert(terms.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    return terms;
}

FacetCounts count_facets_serial(std::span<const EnrichedRecord* const> records) {
    FacetCounts c;
    for (const EnrichedRecord* r : records)
        accumulate(c, *r);
    return c;
}

FacetCounts count_facets_parallel(std::span<const EnrichedRecord* const> records, int threads) {
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
    std::vector<FacetCounts> partial(static_cast<std::size_t>(nthreads));
    const auto n = static_cast<std::ptrdiff_t>(records.size());
#pragma omp parallel num_threads(nthreads)
    {
        FacetCounts& local = partial[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            accumulate(local, *records[i]);
    }
    FacetCounts total;
    for (const auto& p : partial) {
        merge_into(total.drugs, p.drugs);
        merge_into(total.genes, p.genes);
        merge_into(total.mesh, p.mesh);
        merge_into(total.years, p.years);
    }
    return total;
}

std::map<std::string, std::vector<FacetValue>> rank_facets(const FacetCounts& counts, std::size_t limit) {
    auto to_values = [](const auto& map) {
        std::vector<FacetValue> v;
        v.reserve(map.size());
        for (const auto& [k, c] : map)
            v.push_back({k, c});
        return v;
    };
    std::vector<FacetValue> years;
    for (const auto& [y, c] : counts.years)
        years.push_back({std::to_string(y), c});
    std::map<std::string, std::vector<FacetValue>> out;
    out["drugs"] = rank(to_values(counts.drugs), limit);
    out["genes"] = rank(to_values(counts.genes), limit);
    out["mesh"] = rank(to_values(counts.mesh), limit);
    out["years"] = rank(std::move(years), limit);
    return out;
}

// ---------------------------------------------------------------------------

void FacetIndex::State::add(const std::shared_ptr<const EnrichedRecord>& r) {
    const Pmid p = r->pmid();
    records[p] = r;
    insert_sorted(all, p);
    post(drugs, r->drugs, p);
    post(genes, r->genes, p);
    post(mesh, r->record.mesh_descriptors, p);
    post(terms, record_terms(r->record), p);
}

void FacetIndex::State::drop(const EnrichedRecord& r) {
    const Pmid p = r.pmid();
    unpost(drugs, r.drugs, p);
    unpost(genes, r.genes, p);
    unpost(mesh, r.record.mesh_descriptors, p);
    unpost(terms, record_terms(r.record), p);
    erase_sorted(all, p);
    records.erase(p);
}

void FacetIndex::upsert(EnrichedRecord record) {
    auto shared = std::make_shared<const EnrichedRecord>(std::move(record));
    std::unique_lock lock(mu_);
    if (auto it = state_.records.find(shared->pmid()); it != state_.records.end()) {
        const auto old = it->second;
        state_.drop(*old);
    }
    state_.add(shared);
}

bool FacetIndex::remove(Pmid pmid) {
    std::unique_lock lock(mu_);
    auto it = state_.records.find(pmid);
    if (it == state_.records.end())
        return false;
    const auto old = it->second;
    state_.drop(*old);
    return true;
}

FacetResult FacetIndex::search(const FacetQuery& q) const {
    q.validate();
    std::shared_lock lock(mu_);

    std::optional<std::vector<Pmid>> selected;
    auto narrow = [&](std::vector<Pmid> ids) {
        selected = selected ? intersect(*selected, ids) : std::move(ids);
    };
    for (const auto& term : text::word_tokens(q.text)) {
        auto it = state_.terms.find(term);
        narrow(it == state_.terms.end() ? std::vector<Pmid>{} : it->second);
    }
    if (!q.drugs.empty())
        narrow(union_of(state_.drugs, q.drugs));
    if (!q.genes.empty())
        narrow(union_of(state_.genes, q.genes));
    if (!q.mesh.empty())
        narrow(union_of(state_.mesh, q.mesh));

    const std::vector<Pmid>& candidates = selected ? *selected : state_.all;
    std::vector<const EnrichedRecord*> matched;
    matched.reserve(candidates.size());
    for (Pmid p : candidates) {
        const EnrichedRecord* r = state_.records.at(p).get();
        if (q.year_min || q.year_max) {
            const auto& y = r->record.pub_year;
            if (!y || (q.year_min && *y < *q.year_min) || (q.year_max && *y > *q.year_max))
                continue;
        }
        matched.push_back(r);
    }

    FacetResult result;
    result.total = matched.size();
    const FacetCounts counts = matched.size() >= kParallelCountThreshold
                                   ? count_facets_parallel(matched, count_threads_)
                                   : count_facets_serial(matched);
    result.facets = rank_facets(counts, q.facet_limit);

    // Recency order: year descending (records without a year last), then PMID descending.
    std::sort(matched.begin(), matched.end(), [](const EnrichedRecord* a, const EnrichedRecord* b) {
        const int ya = a->record.pub_year.value_or(-1);
        const int yb = b->record.pub_year.value_or(-1);
        return ya != yb ? ya > yb : a->pmid() > b->pmid();
    });
    const std::size_t first = std::min(matched.size(), q.page * q.page_size);
    const std::size_t last = std::min(matched.size(), first + q.page_size);
    for (std::size_t i = first; i < last; ++i) {
        const EnrichedRecord& r = *matched[i];
        result.hits.push_back({r.pmid(), r.record.title, r.record.pub_year, r.drugs, r.genes});
    }
    return result;
}

std::optional<EnrichedRecord> FacetIndex::get(Pmid pmid) const {
    std::shared_lock lock(mu_);
    auto it = state_.records.find(pmid);
    if (it == state_.records.end())
        return std::nullopt;
    return *it->second;
}

std::size_t FacetIndex::size() const {
    std::shared_lock lock(mu_);
    return state_.records.size();
}

std::vector<Pmid> FacetIndex::pmids() const {
    std::shared_lock lock(mu_);
    return state_.all;
}

std::string FacetIndex::watermark() const {
    std::shared_lock lock(mu_);
    return state_.watermark;
}

void FacetIndex::set_watermark(std::string watermark) {
    std::unique_lock lock(mu_);
    state_.watermark = std::move(watermark);
}

std::string FacetIndex::digest_locked() const {
    Sha256 h;
    for (Pmid p : state_.all) {
        h.update(record_line(*state_.records.at(p)));
        h.update("\n");
    }
    return h.hex_final();
}

std::string FacetIndex::digest() const {
    std::shared_lock lock(mu_);
    return digest_locked();
}

void FacetIndex::snapshot(const fs::path& dir) const {
    std::shared_lock lock(mu_);
    std::error_code ec;
    if (fs::exists(dir, ec) && !fs::is_empty(dir, ec) && !fs::exists(dir / "manifest.json", ec))
        throw SnapshotError("refusing to replace non-snapshot directory " + dir.string());

    const fs::path tmp = sibling(dir, ".tmp");
    const fs::path old = sibling(dir, ".old");
    fs::remove_all(tmp);
    fs::create_directories(tmp / "segments");

    nlohmann::json segments = nlohmann::json::array();
    Sha256 whole;
    for (std::size_t start = 0, seg = 0; start < state_.all.size(); start += kSegmentRecords, ++seg) {
        const std::size_t end = std::min(state_.all.size(), start + kSegmentRecords);
        std::string content;
        for (std::size_t i = start; i < end; ++i) {
            content += record_line(*state_.records.at(state_.all[i]));
            content += '\n';
        }
        whole.update(content);
        std::ostringstream name;
        name << "segments/" << std::setw(5) << std::setfill('0') << seg << ".jsonl";
        write_file(tmp / name.str(), content);
        segments.push_back({{"file", name.str()}, {"records", end - start}, {"sha256", sha256_hex(content)}});
    }
    nlohmann::json manifest = {{"format", 1},
                               {"record_count", state_.all.size()},
                               {"watermark", state_.watermark},
                               {"digest", whole.hex_final()},
                               {"segments", segments}};
    write_file(tmp / "manifest.json", manifest.dump(2) + "\n");

    fs::remove_all(old);
    if (fs::exists(dir))
        fs::rename(dir, old);
    fs::rename(tmp, dir);
    fs::remove_all(old);
}

void FacetIndex::restore(const fs::path& dir) {
    fs::path source = dir;
    std::error_code ec;
    if (!fs::exists(dir / "manifest.json", ec) && fs::exists(sibling(dir, ".old") / "manifest.json", ec))
        source = sibling(dir, ".old");  // interrupted swap
    if (!fs::exists(source / "manifest.json", ec))
        throw SnapshotError("no manifest.json in " + dir.string());

    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(source / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw SnapshotError(std::string("unreadable manifest: ") + e.what());
    }

    State fresh;
    Sha256 whole;
    std::size_t count = 0;
    try {
        for (const auto& seg : manifest.at("segments")) {
            const std::string content = read_file(source / seg.at("file").get<std::string>());
            if (sha256_hex(content) != seg.at("sha256").get<std::string>())
                throw SnapshotError("segment digest mismatch: " + seg.at("file").get<std::string>());
            whole.update(content);
            std::istringstream lines(content);
            std::string line;
            std::size_t in_segment = 0;
            while (std::getline(lines, line)) {
                if (line.empty())
                    continue;
                auto rec = std::make_shared<const EnrichedRecord>(nlohmann::json::parse(line).get<EnrichedRecord>());
                fresh.add(rec);
                ++in_segment;
            }
            if (in_segment != seg.at("records").get<std::size_t>())
                throw SnapshotError("segment record count mismatch: " + seg.at("file").get<std::string>());
            count += in_segment;
        }
        if (count != manifest.at("record_count").get<std::size_t>())
            throw SnapshotError("record count mismatch");
        if (whole.hex_final() != manifest.at("digest").get<std::string>())
            throw SnapshotError("manifest digest mismatch");
        fresh.watermark = manifest.at("watermark").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw SnapshotError(std::string("corrupt snapshot: ") + e.what());
    }

    std::unique_lock lock(mu_);
    state_ = std::move(fresh);
}

}  // namespace qibitz
