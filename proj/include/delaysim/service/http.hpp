// Copyright 2026 The delaysim Authors. Licensed under the Apache License,
// Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <httplib.h>

#include "delaysim/service/service.hpp"

namespace delaysim::service {

// Routes every GET and POST to Service::handle.
inline void bind_routes(httplib::Server& server, Service& service) {
  auto forward = [&service](httplib::Request const& req, httplib::Response& res) {
    Query query;
    for (auto const& [k, v] : req.params) query.emplace(k, v);
    auto out = service.handle(req.method, req.path, query, req.body);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  server.Get(R"(/.*)", forward);
  server.Post(R"(/.*)", forward);
}

}  // namespace delaysim::service
