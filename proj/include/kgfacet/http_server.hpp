#pragma once

#include <memory>
#include <string>

#include "kgfacet/error.hpp"
#include "kgfacet/service.hpp"

namespace kgfacet {

int http_status(ErrorCode code);

/// JSON-over-HTTP/1.1 front of a SearchService.
class HttpServer {
public:
    explicit HttpServer(SearchService& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Port 0 picks a free port. Returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    bool run();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace kgfacet
