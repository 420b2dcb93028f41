// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "whatif/service.hpp"

#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#endif
#include <httplib.h>

namespace whatif {

/// Routes every GET and POST on `server` through `service.handle`.
inline void mount(httplib::Server& server, const Service& service) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    Query query(req.params.begin(), req.params.end());
    const auto out = service.handle(req.method, req.path, query, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
}

}  // namespace whatif
