#include "qibitz/pubmed_ingest.hpp"

#include <expat.h>
#include <zlib.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace qibitz {

std::string to_json_line(const ParseError& e) {
    nlohmann::json j = {{"batch", e.batch}, {"offset", e.offset}, {"message", e.message}};
    if (e.pmid)
        j["pmid"] = *e.pmid;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Year extraction

namespace {

std::optional<int> plausible_year(std::string_view digits) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || ptr != digits.data() + digits.size())
        return std::nullopt;
    if (value < kMinYear || value > kMaxYear)
        return std::nullopt;
    return value;
}

std::string_view trim_view(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::optional<int> structured_year(const std::optional<std::string>& s) {
    if (!s)
        return std::nullopt;
    return plausible_year(trim_view(*s));
}

std::optional<int> medline_date_year(const std::optional<std::string>& s) {
    if (!s)
        return std::nullopt;
    std::string_view v = *s;
    std::size_t i = 0;
    while (i < v.size()) {
        if (!std::isdigit(static_cast<unsigned char>(v[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < v.size() && std::isdigit(static_cast<unsigned char>(v[j])))
            ++j;
        if (j - i == 4) {
            if (auto y = plausible_year(v.substr(i, 4)))
                return y;
        }
        i = j;
    }
    return std::nullopt;
}

}  // namespace

std::optional<int> extract_year(const YearSources& sources) {
    if (auto y = structured_year(sources.pub_date_year))
        return y;
    if (auto y = medline_date_year(sources.medline_date))
        return y;
    if (auto y = structured_year(sources.article_date))
        return y;
    return structured_year(sources.date_completed);
}

// ---------------------------------------------------------------------------
// Citation parsing (one element, expat)

namespace {

enum class Target {
    None,
    Pmid,
    Title,
    AbstractText,
    Keyword,
    RegistryNumber,
    GeneSymbol,
    PubDateYear,
    MedlineDate,
    ArticleDateYear,
    CompletedYear,
    RevisedYear,
    RevisedMonth,
    RevisedDay,
    JournalTitle,
    LastName,
    Initials,
    ForeName,
    CollectiveName,
    DeletePmid,
};

struct CitationBuilder {
    std::vector<std::string> stack;
    Target target = Target::None;
    std::size_t target_depth = 0;
    std::string text;

    PubMedRecord record;
    bool have_pmid = false;
    std::vector<std::string> abstract_sections;
    YearSources years;
    std::string revised_y, revised_m, revised_d;
    std::string last_name, initials, fore_name, collective;
    std::vector<Pmid> deleted;
    std::string error;

    bool at(std::initializer_list<std::string_view> suffix) const {
        if (suffix.size() > stack.size())
            return false;
        auto it = stack.end() - static_cast<std::ptrdiff_t>(suffix.size());
        for (auto s : suffix) {
            if (*it != s)
                return false;
            ++it;
        }
        return true;
    }

    bool in_citation() const { return stack.size() >= 2 && stack[0] == "PubmedArticle" && stack[1] == "MedlineCitation"; }
    bool in_article() const { return in_citation() && stack.size() >= 3 && stack[2] == "Article"; }

    Target classify() const {
        const std::size_t d = stack.size();
        if (!stack.empty() && stack[0] == "DeleteCitation")
            return (d == 2 && stack[1] == "PMID") ? Target::DeletePmid : Target::None;
        if (!in_citation())
            return Target::None;
        if (d == 3 && stack[2] == "PMID")
            return Target::Pmid;
        if (d == 4 && in_article() && stack[3] == "ArticleTitle")
            return Target::Title;
        if (d == 5 && in_article() && at({"Abstract", "AbstractText"}))
            return Target::AbstractText;
        if (d == 4 && at({"KeywordList", "Keyword"}))
            return Target::Keyword;
        if (d == 5 && at({"ChemicalList", "Chemical", "RegistryNumber"}))
            return Target::RegistryNumber;
        if (d == 4 && at({"GeneSymbolList", "GeneSymbol"}))
            return Target::GeneSymbol;
        if (d == 7 && in_article() && at({"Journal", "JournalIssue", "PubDate", "Year"}))
            return Target::PubDateYear;
        if (d == 7 && in_article() && at({"Journal", "JournalIssue", "PubDate", "MedlineDate"}))
            return Target::MedlineDate;
        if (d == 5 && in_article() && at({"ArticleDate", "Year"}))
            return Target::ArticleDateYear;
        if (d == 4 && at({"DateCompleted", "Year"}))
            return Target::CompletedYear;
        if (d == 4 && at({"DateRevised", "Year"}))
            return Target::RevisedYear;
        if (d == 4 && at({"DateRevised", "Month"}))
            return Target::RevisedMonth;
        if (d == 4 && at({"DateRevised", "Day"}))
            return Target::RevisedDay;
        if (d == 5 && in_article() && at({"Journal", "Title"}))
            return Target::JournalTitle;
        if (d == 6 && in_article() && at({"AuthorList", "Author", "LastName"}))
            return Target::LastName;
        if (d == 6 && in_article() && at({"AuthorList", "Author", "Initials"}))
            return Target::Initials;
        if (d == 6 && in_article() && at({"AuthorList", "Author", "ForeName"}))
            return Target::ForeName;
        if (d == 6 && in_article() && at({"AuthorList", "Author", "CollectiveName"}))
            return Target::CollectiveName;
        return Target::None;
    }

    static const char* attr(const XML_Char** atts, std::string_view name) {
        for (int i = 0; atts[i] != nullptr; i += 2) {
            if (name == atts[i])
                return atts[i + 1];
        }
        return nullptr;
    }

    void start(const XML_Char* name, const XML_Char** atts) {
        stack.emplace_back(name);
        if (target != Target::None)
            return;  // inline markup inside a captured element
        if (in_citation() && stack.size() == 5 && at({"MeshHeadingList", "MeshHeading", "DescriptorName"})) {
            if (const char* ui = attr(atts, "UI"))
                record.mesh_descriptors.emplace_back(ui);
        } else if (in_citation() && stack.size() == 5 && at({"ChemicalList", "Chemical", "NameOfSubstance"})) {
            if (const char* ui = attr(atts, "UI"))
                record.substance_names.emplace_back(ui);
        } else if (in_article() && stack.size() == 5 && at({"AuthorList", "Author"})) {
            last_name.clear();
            initials.clear();
            fore_name.clear();
            collective.clear();
        }
        target = classify();
        if (target != Target::None) {
            target_depth = stack.size();
            text.clear();
        }
    }

    void end() {
        if (target != Target::None && stack.size() == target_depth) {
            finish_target();
            target = Target::None;
        } else if (target == Target::None && in_article() && stack.size() == 5 && at({"AuthorList", "Author"})) {
            finish_author();
        }
        stack.pop_back();
    }

    void chars(const XML_Char* s, int len) {
        if (target != Target::None)
            text.append(s, static_cast<std::size_t>(len));
    }

    static Pmid parse_pmid(std::string_view s) {
        s = trim_view(s);
        Pmid value = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size())
            return 0;
        return value;
    }

    void finish_target() {
        std::string value(trim_view(text));
        switch (target) {
        case Target::Pmid:
            if (!have_pmid) {
                record.pmid = parse_pmid(value);
                have_pmid = true;
            }
            break;
        case Target::Title:
            record.title = value;
            break;
        case Target::AbstractText:
            if (!value.empty())
                abstract_sections.push_back(value);
            break;
        case Target::Keyword:
            record.other_terms.push_back(value);
            break;
        case Target::RegistryNumber:
            if (value != "0")
                record.registry_numbers.push_back(value);
            break;
        case Target::GeneSymbol:
            record.legacy_gene_symbols.push_back(value);
            break;
        case Target::PubDateYear:
            years.pub_date_year = value;
            break;
        case Target::MedlineDate:
            years.medline_date = value;
            break;
        case Target::ArticleDateYear:
            if (!years.article_date)
                years.article_date = value;
            break;
        case Target::CompletedYear:
            years.date_completed = value;
            break;
        case Target::RevisedYear:
            revised_y = value;
            break;
        case Target::RevisedMonth:
            revised_m = value;
            break;
        case Target::RevisedDay:
            revised_d = value;
            break;
        case Target::JournalTitle:
            if (!value.empty())
                record.journal = value;
            break;
        case Target::LastName:
            last_name = value;
            break;
        case Target::Initials:
            initials = value;
            break;
        case Target::ForeName:
            fore_name = value;
            break;
        case Target::CollectiveName:
            collective = value;
            break;
        case Target::DeletePmid:
            if (Pmid p = parse_pmid(value); p > 0)
                deleted.push_back(p);
            break;
        case Target::None:
            break;
        }
    }

    void finish_author() {
        if (!last_name.empty()) {
            std::string name = last_name;
            const std::string& given = initials.empty() ? fore_name : initials;
            if (!given.empty())
                name += " " + given;
            record.authors.push_back(std::move(name));
        } else if (!collective.empty()) {
            record.authors.push_back(collective);
        }
    }

    static int to_int(const std::string& s) {
        int v = 0;
        std::from_chars(s.data(), s.data() + s.size(), v);
        return v;
    }

    static void dedupe(std::vector<std::string>& items) {
        std::unordered_set<std::string> seen;
        std::vector<std::string> out;
        out.reserve(items.size());
        for (auto& item : items) {
            if (!item.empty() && seen.insert(item).second)
                out.push_back(std::move(item));
        }
        items = std::move(out);
    }

    void finalize() {
        for (std::size_t i = 0; i < abstract_sections.size(); ++i) {
            if (i)
                record.abstract.push_back(' ');
            record.abstract += abstract_sections[i];
        }
        record.pub_year = extract_year(years);
        if (!revised_y.empty())
            record.revision = static_cast<std::int64_t>(to_int(revised_y)) * 10000 + to_int(revised_m) * 100 +
                              to_int(revised_d);
        dedupe(record.mesh_descriptors);
        dedupe(record.substance_names);
        dedupe(record.registry_numbers);
        std::erase(record.other_terms, std::string{});
        std::erase(record.legacy_gene_symbols, std::string{});
    }
};

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** atts) {
    static_cast<CitationBuilder*>(data)->start(name, atts);
}
void XMLCALL on_end(void* data, const XML_Char*) { static_cast<CitationBuilder*>(data)->end(); }
void XMLCALL on_chars(void* data, const XML_Char* s, int len) { static_cast<CitationBuilder*>(data)->chars(s, len); }

struct ParserDeleter {
    void operator()(XML_Parser p) const { XML_ParserFree(p); }
};

/// Parses one chunk; returns false and fills builder.error on malformed XML.
bool parse_chunk(std::string_view xml, CitationBuilder& builder) {
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, ParserDeleter> parser(XML_ParserCreate("UTF-8"));
    if (!parser)
        throw std::bad_alloc();
    XML_SetUserData(parser.get(), &builder);
    XML_SetElementHandler(parser.get(), on_start, on_end);
    XML_SetCharacterDataHandler(parser.get(), on_chars);
    if (XML_Parse(parser.get(), xml.data(), static_cast<int>(xml.size()), XML_TRUE) == XML_STATUS_ERROR) {
        std::ostringstream os;
        os << XML_ErrorString(XML_GetErrorCode(parser.get())) << " at line " << XML_GetCurrentLineNumber(parser.get())
           << ", column " << XML_GetCurrentColumnNumber(parser.get());
        builder.error = os.str();
        return false;
    }
    return true;
}

}  // namespace

PubMedRecord parse_citation_xml(std::string_view xml) {
    CitationBuilder b;
    if (!parse_chunk(xml, b))
        throw std::runtime_error(b.error);
    if (b.record.pmid == 0)
        throw std::runtime_error("citation has no valid PMID");
    b.finalize();
    return std::move(b.record);
}

// ---------------------------------------------------------------------------
// Gzip streaming + chunking

namespace {

class GzipReader {
public:
    explicit GzipReader(std::istream& in) : in_(in) {
        zs_.zalloc = Z_NULL;
        zs_.zfree = Z_NULL;
        zs_.opaque = Z_NULL;
        if (inflateInit2(&zs_, 16 + MAX_WBITS) != Z_OK)
            throw BatchError("inflateInit2 failed");
    }
    ~GzipReader() { inflateEnd(&zs_); }
    GzipReader(const GzipReader&) = delete;
    GzipReader& operator=(const GzipReader&) = delete;

    /// Appends decompressed bytes to `out`; returns false at clean end of stream.
    bool read(std::string& out) {
        if (done_)
            return false;
        std::array<char, 1 << 16> outbuf{};
        while (true) {
            if (zs_.avail_in == 0) {
                in_.read(inbuf_.data(), static_cast<std::streamsize>(inbuf_.size()));
                const auto got = in_.gcount();
                if (got <= 0) {
                    if (!seen_any_)
                        throw BatchError("empty input; expected a gzip stream");
                    if (!member_ended_)
                        throw BatchError("truncated gzip stream");
                    done_ = true;
                    return false;
                }
                seen_any_ = true;
                zs_.next_in = reinterpret_cast<Bytef*>(inbuf_.data());
                zs_.avail_in = static_cast<uInt>(got);
            }
            if (member_ended_) {
                // Another gzip member follows (concatenated archives).
                if (inflateReset(&zs_) != Z_OK)
                    throw BatchError("inflateReset failed");
                member_ended_ = false;
            }
            zs_.next_out = reinterpret_cast<Bytef*>(outbuf.data());
            zs_.avail_out = static_cast<uInt>(outbuf.size());
            const int rc = inflate(&zs_, Z_NO_FLUSH);
            if (rc != Z_OK && rc != Z_STREAM_END && rc != Z_BUF_ERROR)
                throw BatchError(std::string("corrupt gzip stream: ") + (zs_.msg ? zs_.msg : "inflate error"));
            const std::size_t produced = outbuf.size() - zs_.avail_out;
            if (rc == Z_STREAM_END)
                member_ended_ = true;
            if (produced > 0) {
                out.append(outbuf.data(), produced);
                return true;
            }
        }
    }

private:
    std::istream& in_;
    z_stream zs_{};
    std::array<char, 1 << 16> inbuf_{};
    bool seen_any_ = false;
    bool member_ended_ = false;
    bool done_ = false;
};

constexpr std::string_view kArticleOpen = "<PubmedArticle";
constexpr std::string_view kArticleClose = "</PubmedArticle>";
constexpr std::string_view kDeleteOpen = "<DeleteCitation";
constexpr std::string_view kDeleteClose = "</DeleteCitation>";

bool is_tag_terminator(char c) { return c == '>' || c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '/'; }

/// Position of `tag` as a real element start (not a longer name such as
/// <PubmedArticleSet>) at or after `from`. npos if absent; `need_more` is set
/// when the match sits at the very end of the buffer.
std::size_t find_open(const std::string& buf, std::string_view tag, std::size_t from, bool& need_more) {
    while (true) {
        const auto pos = buf.find(tag, from);
        if (pos == std::string::npos)
            return pos;
        const auto after = pos + tag.size();
        if (after >= buf.size()) {
            need_more = true;
            return std::string::npos;
        }
        if (is_tag_terminator(buf[after]))
            return pos;
        from = pos + 1;
    }
}

}  // namespace

BatchStats parse_batch(std::istream& compressed, std::string_view batch_name, const EventSink& on_event,
                       const ParseErrorSink& on_error) {
    GzipReader reader(compressed);
    BatchStats stats;
    std::string buf;
    std::uint64_t buf_base = 0;  // absolute offset of buf[0]
    std::vector<Pmid> deletes;
    bool eof = false;

    auto report = [&](std::uint64_t offset, std::optional<Pmid> pmid, std::string message) {
        ++stats.errors;
        if (on_error)
            on_error(ParseError{std::string(batch_name), offset, pmid, std::move(message)});
    };

    auto handle_article = [&](std::string_view xml, std::uint64_t offset) {
        ++stats.citations;
        CitationBuilder b;
        if (!parse_chunk(xml, b)) {
            report(offset, b.have_pmid && b.record.pmid > 0 ? std::optional<Pmid>(b.record.pmid) : std::nullopt,
                   "malformed citation: " + b.error);
            return;
        }
        if (b.record.pmid == 0) {
            report(offset, std::nullopt, "citation has no valid PMID");
            return;
        }
        b.finalize();
        ++stats.upserts;
        on_event(RecordEvent::upsert(std::move(b.record)));
    };

    auto handle_delete = [&](std::string_view xml, std::uint64_t offset) {
        CitationBuilder b;
        if (!parse_chunk(xml, b)) {
            report(offset, std::nullopt, "malformed DeleteCitation: " + b.error);
            return;
        }
        deletes.insert(deletes.end(), b.deleted.begin(), b.deleted.end());
    };

    auto fill = [&]() {
        if (eof)
            return false;
        if (!reader.read(buf)) {
            eof = true;
            return false;
        }
        return true;
    };

    std::size_t scan = 0;
    while (true) {
        // Locate the next element of interest.
        bool need_more = false;
        const auto art = find_open(buf, kArticleOpen, scan, need_more);
        const auto del = find_open(buf, kDeleteOpen, scan, need_more);
        const std::size_t start = std::min(art, del);
        if (start == std::string::npos) {
            // Keep a tail that could hold a split opening tag.
            const std::size_t keep = std::max(kArticleOpen.size(), kDeleteOpen.size());
            if (buf.size() > keep) {
                const std::size_t drop = buf.size() - keep;
                buf.erase(0, drop);
                buf_base += drop;
            }
            scan = 0;
            if (!fill())
                break;
            continue;
        }
        // Drop everything before the element.
        buf.erase(0, start);
        buf_base += start;
        scan = 0;

        const bool is_article = (art == start);
        const std::string_view open = is_article ? kArticleOpen : kDeleteOpen;
        const std::string_view close = is_article ? kArticleClose : kDeleteClose;

        std::size_t search_from = open.size();
        while (true) {
            const auto end = buf.find(close, search_from);
            bool more = false;
            const auto nested = is_article ? find_open(buf, kArticleOpen, open.size(), more) : std::string::npos;
            if (nested != std::string::npos && (end == std::string::npos || nested < end)) {
                // Unclosed citation: report it and resume at the next one.
                ++stats.citations;
                report(buf_base, std::nullopt, "unterminated citation element");
                buf.erase(0, nested);
                buf_base += nested;
                break;
            }
            if (end != std::string::npos) {
                const std::size_t len = end + close.size();
                if (is_article)
                    handle_article(std::string_view(buf).substr(0, len), buf_base);
                else
                    handle_delete(std::string_view(buf).substr(0, len), buf_base);
                buf.erase(0, len);
                buf_base += len;
                break;
            }
            search_from = buf.size() > close.size() ? buf.size() - close.size() : open.size();
            if (!fill()) {
                if (is_article)
                    ++stats.citations;
                report(buf_base, std::nullopt, "unterminated element at end of batch");
                buf.clear();
                break;
            }
        }
        if (eof && buf.empty())
            break;
    }

    for (Pmid p : deletes) {
        ++stats.deletes;
        on_event(RecordEvent::remove(p));
    }
    return stats;
}

ParsedBatch parse_batch_bytes(std::string_view compressed, std::string_view batch_name) {
    ParsedBatch out;
    std::istringstream in{std::string(compressed)};
    out.stats = parse_batch(
        in, batch_name, [&](RecordEvent&& e) { out.events.push_back(std::move(e)); },
        [&](const ParseError& e) { out.errors.push_back(e); });
    return out;
}

std::string gzip_compress(std::string_view bytes) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 16 + MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw std::runtime_error("deflateInit2 failed");
    std::string out;
    out.resize(deflateBound(&zs, static_cast<uLong>(bytes.size())) + 32);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
    zs.avail_in = static_cast<uInt>(bytes.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END)
        throw std::runtime_error("gzip compression failed");
    out.resize(zs.total_out);
    return out;
}

}  // namespace qibitz
