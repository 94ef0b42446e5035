#pragma once

#include "qibitz/facet_index.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace qibitz {

/// Request parameters, repeated keys allowed (same shape httplib uses).
using QueryParams = std::multimap<std::string, std::string>;

struct ApiResponse {
    int status = 200;
    std::string body;
};

/// Maps `q`, `drug`, `gene`, `mesh`, `year_min`, `year_max`, `page`,
/// `page_size`, `facet_limit` onto a query. Throws QueryError on bad values.
FacetQuery query_from_params(const QueryParams& params);

/// {total, hits, facets}; facet entries are [value, count] pairs and year
/// values are integers.
nlohmann::json result_to_json(const FacetResult& result);

/// {status, code, message}
std::string api_error_body(int status, std::string_view code, std::string_view message);

/// Request handlers, independent of the transport. The index sits behind a
/// swappable handle so a freshly restored snapshot can replace it atomically.
class SearchApi {
public:
    SearchApi() = default;
    explicit SearchApi(std::shared_ptr<const FacetIndex> index) : index_(std::move(index)) {}

    void set_index(std::shared_ptr<const FacetIndex> index);
    /// Marks the service as loading; data endpoints answer 503 until set_index().
    void set_loading();

    ApiResponse search(const QueryParams& params) const;
    ApiResponse record(std::string_view pmid) const;
    ApiResponse health() const;

private:
    std::shared_ptr<const FacetIndex> current() const;

    mutable std::mutex mu_;
    std::shared_ptr<const FacetIndex> index_;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string index_dir;
    std::string cors_origin;  // empty: no CORS headers
    std::string access_log;   // empty: no access log
};

/// Parses "host:port" or ":port". Throws ConfigError.
void parse_bind_address(std::string_view addr, ServiceConfig& config);

/// HTTP front end over SearchApi. The index is restored in the background
/// after the socket is bound, so /api/health answers 503 while it loads.
class SearchServer {
public:
    explicit SearchServer(ServiceConfig config);
    ~SearchServer();

    SearchApi& api() { return api_; }

    /// Binds the socket. Throws ConfigError when the address is unusable.
    /// Returns the bound port (useful with port 0).
    int bind();
    /// Serves until stop(). Call bind() first.
    void listen();
    void stop();

    /// Restores the index directory (blocking) and swaps it in.
    void load_index();

private:
    void log_access(const std::string& method, const std::string& path, int status);

    ServiceConfig config_;
    SearchApi api_;
    std::unique_ptr<httplib::Server> server_;
    std::mutex log_mu_;
    std::ofstream log_;
};

}  // namespace qibitz
