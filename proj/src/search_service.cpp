#include "qibitz/search_service.hpp"

#include "qibitz/record_json.hpp"

#include <httplib.h>

#include <charconv>
#include <chrono>
#include <thread>

namespace qibitz {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || value.empty())
        throw QueryError("parameter " + key + " must be an integer, got '" + value + "'");
    return out;
}

nlohmann::json ranked_to_json(const std::vector<FacetValue>& values, bool numeric) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : values) {
        if (numeric)
            out.push_back({std::stoi(v.value), v.count});
        else
            out.push_back({v.value, v.count});
    }
    return out;
}

}  // namespace

FacetQuery query_from_params(const QueryParams& params) {
    FacetQuery q;
    for (const auto& [key, value] : params) {
        if (key == "q") {
            q.text = q.text.empty() ? value : q.text + " " + value;
        } else if (key == "drug") {
            q.drugs.push_back(value);
        } else if (key == "gene") {
            q.genes.push_back(value);
        } else if (key == "mesh") {
            q.mesh.push_back(value);
        } else if (key == "year_min") {
            q.year_min = parse_number<int>(key, value);
        } else if (key == "year_max") {
            q.year_max = parse_number<int>(key, value);
        } else if (key == "page") {
            q.page = parse_number<std::size_t>(key, value);
        } else if (key == "page_size") {
            q.page_size = parse_number<std::size_t>(key, value);
        } else if (key == "facet_limit") {
            q.facet_limit = parse_number<std::size_t>(key, value);
        } else {
            throw QueryError("unknown parameter " + key);
        }
    }
    q.validate();
    return q;
}

nlohmann::json result_to_json(const FacetResult& result) {
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : result.hits) {
        hits.push_back({{"pmid", h.pmid},
                        {"title", h.title},
                        {"year", h.year ? nlohmann::json(*h.year) : nlohmann::json(nullptr)},
                        {"drugs", h.drugs},
                        {"genes", h.genes}});
    }
    nlohmann::json facets = nlohmann::json::object();
    for (const char* name : {"drugs", "genes", "mesh", "years"}) {
        auto it = result.facets.find(name);
        const std::vector<FacetValue> empty;
        facets[name] = ranked_to_json(it == result.facets.end() ? empty : it->second, std::string_view(name) == "years");
    }
    return {{"total", result.total}, {"hits", hits}, {"facets", facets}};
}

std::string api_error_body(int status, std::string_view code, std::string_view message) {
    return nlohmann::json{{"status", status}, {"code", code}, {"message", message}}.dump();
}

void SearchApi::set_index(std::shared_ptr<const FacetIndex> index) {
    std::lock_guard lock(mu_);
    index_ = std::move(index);
}

void SearchApi::set_loading() {
    std::lock_guard lock(mu_);
    index_.reset();
}

std::shared_ptr<const FacetIndex> SearchApi::current() const {
    std::lock_guard lock(mu_);
    return index_;
}

ApiResponse SearchApi::search(const QueryParams& params) const {
    auto index = current();
    if (!index)
        return {503, api_error_body(503, "loading", "index is not loaded yet")};
    try {
        return {200, result_to_json(index->search(query_from_params(params))).dump()};
    } catch (const QueryError& e) {
        return {400, api_error_body(400, e.code(), e.what())};
    } catch (const std::exception& e) {
        return {500, api_error_body(500, "internal", e.what())};
    }
}

ApiResponse SearchApi::record(std::string_view pmid_text) const {
    auto index = current();
    if (!index)
        return {503, api_error_body(503, "loading", "index is not loaded yet")};
    Pmid pmid = 0;
    auto [ptr, ec] = std::from_chars(pmid_text.data(), pmid_text.data() + pmid_text.size(), pmid);
    if (pmid_text.empty() || ec != std::errc() || ptr != pmid_text.data() + pmid_text.size())
        return {400, api_error_body(400, "bad-pmid", "pmid must be a decimal integer")};
    auto rec = index->get(pmid);
    if (!rec)
        return {404, api_error_body(404, "not-found", "no record with pmid " + std::to_string(pmid))};
    return {200, nlohmann::json(*rec).dump()};
}

ApiResponse SearchApi::health() const {
    auto index = current();
    if (!index)
        return {503, nlohmann::json{{"status", "loading"}, {"record_count", 0}, {"watermark", ""}}.dump()};
    return {200, nlohmann::json{{"status", "ok"}, {"record_count", index->size()}, {"watermark", index->watermark()}}
                     .dump()};
}

void parse_bind_address(std::string_view addr, ServiceConfig& config) {
    const auto colon = addr.rfind(':');
    if (colon == std::string_view::npos)
        throw ConfigError("bind address must look like host:port, got '" + std::string(addr) + "'");
    const std::string host(addr.substr(0, colon));
    const std::string port_text(addr.substr(colon + 1));
    int port = -1;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (port_text.empty() || ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 ||
        port > 65535)
        throw ConfigError("bad port in bind address '" + std::string(addr) + "'");
    config.host = host.empty() ? "0.0.0.0" : host;
    config.port = port;
}

SearchServer::SearchServer(ServiceConfig config)
    : config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
    if (!config_.access_log.empty()) {
        log_.open(config_.access_log, std::ios::app);
        if (!log_)
            throw IoError("cannot open access log " + config_.access_log);
    }

    auto reply = [this](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    server_->Get("/api/search", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, api_.search(req.params));
    });
    server_->Get(R"(/api/records/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, api_.record(req.matches[1].str()));
    });
    server_->Get("/api/health", [this, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, api_.health());
    });
    server_->Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server_->set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
        if (!config_.cors_origin.empty()) {
            res.set_header("Access-Control-Allow-Origin", config_.cors_origin);
            res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
            res.set_header("Vary", "Origin");
        }
        (void)req;
        return httplib::Server::HandlerResponse::Unhandled;
    });
    server_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty())
            res.set_content(api_error_body(res.status, res.status == 404 ? "not-found" : "error", "no such endpoint"),
                            "application/json");
    });
    server_->set_logger([this](const httplib::Request& req, const httplib::Response& res) {
        log_access(req.method, req.target, res.status);
    });
    api_.set_loading();
}

SearchServer::~SearchServer() { stop(); }

int SearchServer::bind() {
    if (config_.port == 0) {
        const int port = server_->bind_to_any_port(config_.host);
        if (port < 0)
            throw ConfigError("cannot bind " + config_.host);
        config_.port = port;
        return port;
    }
    if (!server_->bind_to_port(config_.host, config_.port))
        throw ConfigError("cannot bind " + config_.host + ":" + std::to_string(config_.port));
    return config_.port;
}

void SearchServer::listen() { server_->listen_after_bind(); }

void SearchServer::stop() {
    if (server_)
        server_->stop();
}

void SearchServer::load_index() {
    auto index = std::make_shared<FacetIndex>();
    if (!config_.index_dir.empty())
        index->restore(config_.index_dir);
    api_.set_index(std::move(index));
}

void SearchServer::log_access(const std::string& method, const std::string& path, int status) {
    if (!log_.is_open())
        return;
    const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    nlohmann::json line{{"ts_ms", now}, {"method", method}, {"path", path}, {"status", status}};
    std::lock_guard lock(log_mu_);
    log_ << line.dump() << '\n';
    log_.flush();
}

}  // namespace qibitz
