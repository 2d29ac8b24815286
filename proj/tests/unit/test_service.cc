// Copyright 2026 The xling Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "xling/service.h"

#include <future>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "test_util.h"
#include "xling/error.h"

using namespace xling;
using nlohmann::json;

namespace {

const std::filesystem::path kWorkspace =
    std::filesystem::path(XLING_SOURCE_DIR) / "tests/fixtures/workspace";

const Workspace& fixture() {
  static const Workspace ws = load_workspace(kWorkspace);
  return ws;
}

Response get(const Workspace& ws, std::string_view path, const QueryParams& query = {}) {
  return handle_request(ws, "GET", path, query, "");
}

std::vector<std::string> codes_of(const json& arr, const char* key = "code") {
  std::vector<std::string> out;
  for (const auto& item : arr) out.push_back(item.at(key).get<std::string>());
  return out;
}

void check_error(const Response& r, int status, const std::string& code) {
  CHECK(r.status == status);
  const auto doc = json::parse(r.body);
  CHECK(doc.at("code") == code);
  CHECK_FALSE(doc.at("message").get<std::string>().empty());
}

}  // namespace

TEST_SUITE("service") {

TEST_CASE("workspace loads and caches hypotheses") {
  const auto& ws = fixture();
  CHECK(ws.graph.nodes.size() == 4);
  CHECK(ws.graph.edges.size() == 12);
  CHECK(ws.configs.size() == 4);
  CHECK(ws.downstream.size() == 2);
  CHECK_FALSE(ws.hypothesis_cache.empty());
  CHECK_THROWS_AS(load_workspace(kWorkspace / "missing"), IoError);
}

TEST_CASE("workspace validation rejects dangling references") {
  Workspace ws = fixture();
  ws.configs[0].recipients_low.push_back("zz");
  CHECK_THROWS_AS(ws.validate(), ValidationError);
  ws = fixture();
  ws.configs[1].id = ws.configs[0].id;
  CHECK_THROWS_AS(ws.validate(), ValidationError);
  ws = fixture();
  ws.downstream.begin()->second.scores[{"nope", "xa", "xb"}] = 0.5;
  CHECK_THROWS_AS(ws.validate(), ValidationError);
}

TEST_CASE("GET /graph matches the exported document") {
  const auto r = get(fixture(), "/graph");
  CHECK(r.status == 200);
  CHECK(r.body == testing::read_file(kWorkspace / "graph.json"));
}

TEST_CASE("GET /languages filters") {
  struct Case {
    int line;
    QueryParams query;
    std::vector<std::string> codes;
  };
  const Case cases[] = {
      {__LINE__, {}, {"xa", "xb", "xc", "xd"}},
      {__LINE__, {{"wals_feature", "81A"}, {"value", "SOV"}}, {"xa", "xb"}},
      {__LINE__, {{"wals_feature", "81A"}, {"value", "OVS"}}, {}},
      {__LINE__, {{"wals_feature", "99Z"}, {"value", "SOV"}}, {}},
      {__LINE__, {{"family", "Alpha"}}, {"xa", "xb"}},
      {__LINE__, {{"script", "Grek"}}, {"xd"}},
      {__LINE__, {{"family", "Alpha"}, {"script", "Cyrl"}}, {}},
      {__LINE__, {{"blood_type", "O"}}, {"xc"}},
      {__LINE__, {{"blood_type", "ABplus"}}, {"xa", "xb"}},
      {__LINE__, {{"blood_type", "Isolate"}}, {"xd"}},
  };
  for (const auto& c : cases) {
    CAPTURE(c.line);
    const auto r = get(fixture(), "/languages", c.query);
    REQUIRE(r.status == 200);
    CHECK(codes_of(json::parse(r.body)) == c.codes);
  }
  const auto all = json::parse(get(fixture(), "/languages").body);
  const auto& xa = fixture().graph.node("xa");
  CHECK(all[0]["donation"] == xa.donation);
  CHECK(all[0]["wals"]["81A"] == "SOV");
}

TEST_CASE("GET /edges filters") {
  const auto& g = fixture().graph;
  auto count = [&](auto pred) {
    std::size_t n = 0;
    for (const auto& [key, e] : g.edges) n += pred(e) ? 1 : 0;
    return n;
  };
  struct Case {
    int line;
    QueryParams query;
    std::size_t expected;
  };
  const Case cases[] = {
      {__LINE__, {}, 12},
      {__LINE__, {{"source", "xa"}}, 3},
      {__LINE__, {{"source", "xa"}, {"target", "xb"}}, 1},
      {__LINE__, {{"shared_script", "true"}}, 2},
      {__LINE__, {{"shared_family", "1"}}, 2},
      {__LINE__, {{"shared_family", "false"}}, 10},
      {__LINE__, {{"min_ft", "0"}}, count([](const TransferEdge& e) { return e.ft >= 0; })},
      {__LINE__, {{"max_ft", "-0.1"}}, count([](const TransferEdge& e) { return e.ft <= -0.1; })},
      {__LINE__, {{"bin", "Negative"}},
       count([](const TransferEdge& e) { return e.bin == TransferBin::kNegative; })},
  };
  for (const auto& c : cases) {
    CAPTURE(c.line);
    const auto r = get(fixture(), "/edges", c.query);
    REQUIRE(r.status == 200);
    CHECK(json::parse(r.body).size() == c.expected);
  }
  const auto one = json::parse(get(fixture(), "/edges", {{"source", "xa"}, {"target", "xb"}}).body);
  CHECK(one[0]["ft"] == g.edge("xa", "xb").ft);
  CHECK(one[0]["bin"] == std::string(to_string(g.edge("xa", "xb").bin)));
}

TEST_CASE("VeryPositive filter on an all-neutral graph is empty") {
  Workspace ws;
  for (const auto& c : {"a", "b", "c"}) {
    LanguageNode n;
    n.meta = {c, "F", "Latn", {}};
    ws.graph.nodes[c] = n;
  }
  for (const auto& s : {"a", "b", "c"}) {
    for (const auto& t : {"a", "b", "c"}) {
      if (std::string(s) != t) ws.graph.edges[{s, t}] = {s, t, 0.0, 0.0, TransferBin::kNeutral};
    }
  }
  const auto r = get(ws, "/edges", {{"bin", "VeryPositive"}});
  CHECK(r.status == 200);
  CHECK(r.body == "[]");
}

TEST_CASE("GET /analytics and /hypotheses equal library output") {
  const auto& ws = fixture();
  CHECK(json::parse(get(ws, "/analytics").body) == analytics_to_json(ws.graph));
  json expected = json::array();
  for (const auto& h : evaluate_hypotheses(ws.graph, ws.downstream, ws.configs)) {
    expected.push_back(hypothesis_to_json(h));
  }
  CHECK(json::parse(get(ws, "/hypotheses").body) == expected);
}

TEST_CASE("POST /whatif equals a direct selection") {
  const auto& ws = fixture();
  struct Case {
    int line;
    std::string body;
    SelectionRequest request;
  };
  auto req = [](SelectionMode mode, std::size_t k, std::size_t f, std::set<std::string> ex,
                std::uint64_t seed = 0) {
    SelectionRequest r;
    r.mode = mode;
    r.k = k;
    r.min_families = f;
    r.excluded = std::move(ex);
    r.seed = seed;
    return r;
  };
  const Case cases[] = {
      {__LINE__, R"({"k": 2, "mode": "most_donating", "min_families": 2, "exclude": ["xb"]})",
       req(SelectionMode::kMostDonating, 2, 2, {"xb"})},
      {__LINE__, R"({"k": 2, "mode": "least_donating", "min_families": 1, "exclude": ["xd"]})",
       req(SelectionMode::kLeastDonating, 2, 1, {"xd"})},
      {__LINE__, R"({"k": 2, "mode": "random", "min_families": 2, "seed": 9})",
       req(SelectionMode::kRandom, 2, 2, {}, 9)},
      {__LINE__, R"({"mode": "control", "exclude": ["xa", "xb"]})",
       req(SelectionMode::kControl, 4, 3, {"xa", "xb"})},
  };
  for (const auto& c : cases) {
    CAPTURE(c.line);
    const auto r = handle_request(ws, "POST", "/whatif", {}, c.body);
    REQUIRE(r.status == 200);
    const auto doc = json::parse(r.body);
    const auto donors = select_pretrain_set(ws.graph, c.request);
    CHECK(doc["donors"].get<std::vector<std::string>>() == donors);
    CHECK(doc["donation_sum"] == donation_sum(ws.graph, donors));
    CHECK(doc.contains("allocation"));
    CHECK(handle_request(ws, "POST", "/whatif", {}, c.body).body == r.body);
  }
}

TEST_CASE("error responses") {
  const auto& ws = fixture();
  const std::string before = graph_to_json(ws.graph).dump();
  struct Case {
    int line;
    std::string method;
    std::string path;
    QueryParams query;
    std::string body;
    int status;
    std::string code;
  };
  const Case cases[] = {
      {__LINE__, "GET", "/nope", {}, "", 404, "not_found"},
      {__LINE__, "POST", "/graph", {}, "", 405, "method_not_allowed"},
      {__LINE__, "GET", "/whatif", {}, "", 405, "method_not_allowed"},
      {__LINE__, "GET", "/graph", {{"x", "1"}}, "", 400, "invalid_request"},
      {__LINE__, "GET", "/languages", {{"wals_feature", "81A"}}, "", 400, "invalid_request"},
      {__LINE__, "GET", "/languages", {{"blood_type", "B"}}, "", 400, "invalid_request"},
      {__LINE__, "GET", "/edges", {{"source", "zz"}}, "", 400, "invalid_request"},
      {__LINE__, "GET", "/edges", {{"min_ft", "low"}}, "", 400, "invalid_request"},
      {__LINE__, "GET", "/edges", {{"shared_script", "maybe"}}, "", 400, "invalid_request"},
      {__LINE__, "GET", "/edges", {{"bin", "Huge"}}, "", 400, "invalid_request"},
      {__LINE__, "POST", "/whatif", {}, "{not json", 400, "invalid_request"},
      {__LINE__, "POST", "/whatif", {}, "[1, 2]", 400, "invalid_request"},
      {__LINE__, "POST", "/whatif", {}, R"({"k": "four"})", 400, "invalid_request"},
      {__LINE__, "POST", "/whatif", {}, R"({"kk": 4})", 400, "invalid_request"},
      {__LINE__, "POST", "/whatif", {}, R"({"mode": "best"})", 400, "invalid_request"},
      {__LINE__, "POST", "/whatif", {}, R"({"exclude": ["zz"]})", 400, "invalid_request"},
      {__LINE__, "POST", "/whatif", {}, R"({"k": 9, "min_families": 1})", 422, "infeasible"},
      {__LINE__, "POST", "/whatif", {}, R"({"k": 2, "min_families": 4})", 422, "infeasible"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.line);
    check_error(handle_request(ws, c.method, c.path, c.query, c.body), c.status, c.code);
  }
  CHECK(graph_to_json(ws.graph).dump() == before);
}

TEST_CASE("service config and bind address") {
  testing::TempDir tmp;
  testing::write_file(tmp / "svc.conf",
                      "# explorer backend\nworkspace_dir = ws\nbind=0.0.0.0:9000\n"
                      "cors_origin=http://localhost:5173\n");
  const auto cfg = read_service_config(tmp / "svc.conf");
  CHECK(cfg.workspace_dir == tmp.path() / "ws");
  CHECK(cfg.bind == "0.0.0.0:9000");
  CHECK(cfg.cors_origin == "http://localhost:5173");
  testing::write_file(tmp / "bad.conf", "port=1\n");
  CHECK_THROWS_AS(read_service_config(tmp / "bad.conf"), ValidationError);
  testing::write_file(tmp / "bad2.conf", "bind=nowhere\n");
  CHECK_THROWS_AS(read_service_config(tmp / "bad2.conf"), ValidationError);
  CHECK_THROWS_AS(read_service_config(tmp / "none.conf"), IoError);

  const auto b = parse_bind("127.0.0.1:8080");
  CHECK(b.host == "127.0.0.1");
  CHECK(b.port == 8080);
  for (const char* bad : {"8080", ":80", "h:", "h:70000", "h:-1", "h:x"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_bind(bad), ValidationError);
  }
}

TEST_CASE("HTTP server: concurrent readers see serial responses") {
  const auto& ws = fixture();
  Server server(ws, "http://explorer.test");
  const int port = server.bind({"127.0.0.1", 0});
  REQUIRE(port > 0);
  std::thread loop([&] { server.listen(); });
  server.wait_until_ready();

  const std::vector<std::string> paths = {"/graph", "/languages?family=Alpha", "/edges?source=xc",
                                          "/analytics", "/hypotheses"};
  std::vector<std::string> serial;
  for (const auto& p : paths) {
    const auto q = p.find('?');
    QueryParams query;
    if (q != std::string::npos) {
      const auto kv = p.substr(q + 1);
      query[kv.substr(0, kv.find('='))] = kv.substr(kv.find('=') + 1);
    }
    serial.push_back(get(ws, p.substr(0, q), query).body);
  }

  std::vector<std::future<bool>> readers;
  for (int t = 0; t < 8; ++t) {
    readers.push_back(std::async(std::launch::async, [&, t] {
      httplib::Client client("127.0.0.1", port);
      bool ok = true;
      for (int rep = 0; rep < 5; ++rep) {
        const std::size_t i = static_cast<std::size_t>(t + rep) % paths.size();
        auto res = client.Get(paths[i]);
        ok = ok && res && res->status == 200 && res->body == serial[i];
      }
      return ok;
    }));
  }
  for (auto& r : readers) CHECK(r.get());

  httplib::Client client("127.0.0.1", port);
  const std::string body = R"({"k": 2, "min_families": 2, "mode": "most_donating"})";
  auto a = client.Post("/whatif", body, "application/json");
  auto b = client.Post("/whatif", body, "application/json");
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->status == 200);
  CHECK(a->body == b->body);
  CHECK(a->get_header_value("Access-Control-Allow-Origin") == "http://explorer.test");
  CHECK(a->get_header_value("Content-Type") == "application/json");
  auto missing = client.Get("/missing");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  auto pre = client.Options("/whatif");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  server.stop();
  loop.join();
}

}  // TEST_SUITE
