#include "whatif/http_server.hpp"

#include <iostream>

#include "httplib.h"

namespace whatif {

namespace {

void set_cors(httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
}

}  // namespace

void serve(Service& service, const std::string& host, int port) {
    httplib::Server server;
    auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query;
        for (const auto& [k, v] : req.params) query.emplace(k, v);
        const Response out = service.handle(req.method, req.path, query, req.body);
        res.status = out.status;
        set_cors(res);
        res.set_content(out.body, out.content_type);
    };
    server.Get(".*", dispatch);
    server.Post(".*", dispatch);
    server.Options(".*", dispatch);
    std::cerr << "listening on http://" << host << ":" << port << "\n";
    if (!server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace whatif
