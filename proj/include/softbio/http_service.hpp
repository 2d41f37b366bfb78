#pragma once

#include "softbio/engine.hpp"

#include <memory>
#include <string>

namespace softbio {

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// Routes one request against the preloaded service. Pure function of its
/// inputs; the socket layer only forwards to it.
HttpResponse handle_request(const RetrievalService& service, const std::string& method, const std::string& path,
                            const std::string& body);

/// HTTP front end over a RetrievalService. Responses carry permissive CORS
/// headers for the console.
class HttpServer {
public:
    explicit HttpServer(const RetrievalService& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds `host:port` (port 0 picks a free one) and returns the bound port.
    int bind(const std::string& host, int port);
    /// Blocks until stop() is called.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace softbio
