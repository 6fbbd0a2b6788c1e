#include "kgfacet/http_server.hpp"

#include <httplib.h>

namespace kgfacet {

using nlohmann::json;

int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownEntity: return 404;
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::CycleDetected:
    case ErrorCode::DepthExceeded: return 502;
    case ErrorCode::PersistenceFailure:
    case ErrorCode::InvalidConfig: return 500;
    default: return 400;
    }
}

struct HttpServer::Impl {
    SearchService& service;
    httplib::Server server;

    explicit Impl(SearchService& s) : service(s) {}

    template <class Fn>
    void handle(httplib::Response& res, Fn&& fn) {
        try {
            res.status = 200;
            res.set_content(fn().dump(), "application/json");
        } catch (const Error& e) {
            res.status = http_status(e.code());
            res.set_content(e.envelope().dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = 500;
            res.set_content(json{{"code", "Internal"}, {"message", e.what()}, {"detail", nullptr}}.dump(),
                            "application/json");
        }
    }

    void routes() {
        server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"status":"ok"})", "application/json");
        });
        server.Get("/comparisons", [this](const httplib::Request&, httplib::Response& res) {
            handle(res, [&] { return service.list_comparisons(); });
        });
        server.Get("/comparisons/:id", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] { return service.comparison(req.path_params.at("id")); });
        });
        server.Get("/comparisons/:id/facets", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] { return service.facets(req.path_params.at("id")); });
        });
        server.Get("/comparisons/:id/facets/:property/candidates",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       handle(res, [&] {
                           return service.candidates(req.path_params.at("id"), req.path_params.at("property"),
                                                     req.get_param_value("prefix"));
                       });
                   });
        server.Get("/comparisons/:id/facets/:property/levels/:level",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       handle(res, [&] {
                           return service.facet_levels(req.path_params.at("id"), req.path_params.at("property"),
                                                       req.path_params.at("level"));
                       });
                   });
        server.Post("/comparisons/:id/filter", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] { return service.filter(req.path_params.at("id"), parse_body(req.body)); });
        });
        server.Post("/comparisons/:id/save", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] { return service.save(req.path_params.at("id"), parse_body(req.body)); });
        });
        server.Get("/saved/:permalink", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] { return service.saved(req.path_params.at("permalink")); });
        });
        server.Get("/taxonomy/:external_id", [this](const httplib::Request& req, httplib::Response& res) {
            handle(res, [&] { return service.resolve(req.path_params.at("external_id")); });
        });
    }
};

HttpServer::HttpServer(SearchService& service) : impl_(std::make_unique<Impl>(service)) { impl_->routes(); }

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::run() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace kgfacet
