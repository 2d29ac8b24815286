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

#include <algorithm>
#include <fstream>
#include <set>

#include "httplib.h"
#include "xling/error.h"
#include "xling/text_util.h"

namespace xling {
namespace {

using nlohmann::json;

class NotFound : public Error {
 public:
  using Error::Error;
};
class MethodNotAllowed : public Error {
 public:
  using Error::Error;
};

Response json_response(int status, const json& doc) { return {status, doc.dump()}; }

Response error_response(int status, std::string_view code, std::string_view message) {
  return json_response(status, {{"code", code}, {"message", message}});
}

void require_known(const QueryParams& query, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : query) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("unknown query parameter '" + key + "'");
    }
  }
}

const std::string* param(const QueryParams& query, const char* key) {
  auto it = query.find(key);
  return it == query.end() ? nullptr : &it->second;
}

bool parse_flag(const std::string& v, const char* key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError(std::string(key) + " must be true or false, got '" + v + "'");
}

json node_json(const std::string& code, const LanguageNode& n) {
  return {{"code", code},
          {"family", n.meta.family},
          {"script", n.meta.script},
          {"mono_mrr", n.mono_mrr},
          {"donation", n.donation},
          {"recipience", n.recipience},
          {"blood_type", to_string(n.blood_type)},
          {"wals", n.meta.wals}};
}

json edge_json(const TransferEdge& e) {
  return {{"source", e.source},
          {"target", e.target},
          {"ft", e.ft},
          {"ft_percent", e.ft_percent},
          {"bin", to_string(e.bin)}};
}

json languages(const Workspace& ws, const QueryParams& query) {
  require_known(query, {"family", "script", "blood_type", "wals_feature", "value"});
  const auto* family = param(query, "family");
  const auto* script = param(query, "script");
  const auto* blood = param(query, "blood_type");
  const auto* feature = param(query, "wals_feature");
  const auto* value = param(query, "value");
  if (static_cast<bool>(feature) != static_cast<bool>(value)) {
    throw ValidationError("wals_feature and value must be given together");
  }
  std::optional<BloodType> blood_type;
  if (blood) blood_type = parse_blood_type(*blood);
  json out = json::array();
  for (const auto& [code, n] : ws.graph.nodes) {
    if (family && n.meta.family != *family) continue;
    if (script && n.meta.script != *script) continue;
    if (blood_type && n.blood_type != *blood_type) continue;
    if (feature) {
      auto it = n.meta.wals.find(*feature);
      if (it == n.meta.wals.end() || it->second != *value) continue;
    }
    out.push_back(node_json(code, n));
  }
  return out;
}

json edges(const Workspace& ws, const QueryParams& query) {
  require_known(query, {"source", "target", "bin", "min_ft", "max_ft", "shared_script",
                        "shared_family"});
  const auto* source = param(query, "source");
  const auto* target = param(query, "target");
  std::optional<TransferBin> bin;
  if (const auto* b = param(query, "bin")) bin = parse_bin(*b);
  std::optional<double> min_ft, max_ft;
  if (const auto* v = param(query, "min_ft")) min_ft = parse_double(*v, "min_ft");
  if (const auto* v = param(query, "max_ft")) max_ft = parse_double(*v, "max_ft");
  std::optional<bool> shared_script, shared_family;
  if (const auto* v = param(query, "shared_script")) shared_script = parse_flag(*v, "shared_script");
  if (const auto* v = param(query, "shared_family")) shared_family = parse_flag(*v, "shared_family");
  if (source) ws.graph.node(*source);
  if (target) ws.graph.node(*target);

  json out = json::array();
  for (const auto& [key, e] : ws.graph.edges) {
    if (source && e.source != *source) continue;
    if (target && e.target != *target) continue;
    if (bin && e.bin != *bin) continue;
    if (min_ft && e.ft < *min_ft) continue;
    if (max_ft && e.ft > *max_ft) continue;
    const auto& s = ws.graph.node(e.source).meta;
    const auto& t = ws.graph.node(e.target).meta;
    if (shared_script && (s.script == t.script) != *shared_script) continue;
    if (shared_family && (s.family == t.family) != *shared_family) continue;
    out.push_back(edge_json(e));
  }
  return out;
}

json whatif(const Workspace& ws, std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed body: ") + e.what());
  }
  const auto req = parse_whatif(doc);
  const auto config = make_pretrain_config(ws.graph, req.selection, req.id, req.recipients,
                                           req.budget_chars);
  json out = manifest_to_json(config);
  out["donation_sum"] = donation_sum(ws.graph, config.donors);
  return out;
}

Response dispatch(const Workspace& ws, std::string_view method, std::string_view path,
                  const QueryParams& query, std::string_view body) {
  const bool get = method == "GET";
  auto expect = [&](bool ok) {
    if (!ok) throw MethodNotAllowed(std::string(method) + " not allowed on " + std::string(path));
  };
  if (path == "/graph") {
    expect(get);
    require_known(query, {});
    return {200, graph_to_json(ws.graph).dump(2) + "\n"};
  }
  if (path == "/languages") {
    expect(get);
    return json_response(200, languages(ws, query));
  }
  if (path == "/edges") {
    expect(get);
    return json_response(200, edges(ws, query));
  }
  if (path == "/analytics") {
    expect(get);
    require_known(query, {});
    return json_response(200, analytics_to_json(ws.graph));
  }
  if (path == "/hypotheses") {
    expect(get);
    require_known(query, {});
    json out = json::array();
    for (const auto& h : ws.hypothesis_cache) out.push_back(hypothesis_to_json(h));
    return json_response(200, out);
  }
  if (path == "/whatif") {
    expect(method == "POST");
    require_known(query, {});
    return json_response(200, whatif(ws, body));
  }
  throw NotFound("no endpoint " + std::string(path));
}

template <typename T>
T field(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

void Workspace::validate() const {
  std::set<std::string> ids;
  for (const auto& c : configs) {
    c.validate();
    if (!ids.insert(c.id).second) throw ValidationError("duplicate config id '" + c.id + "'");
    for (const auto& l : c.languages()) graph.node(l);
  }
  for (const auto& [task, res] : downstream) {
    for (const auto& [key, value] : res.scores) {
      const auto& [config, source, target] = key;
      if (!ids.count(config)) {
        throw ValidationError("results (" + task + ") reference unknown config '" + config + "'");
      }
      graph.node(source);
      graph.node(target);
    }
  }
}

Workspace load_workspace(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("workspace " + dir.string() + " is not a directory");
  Workspace ws;
  ws.graph = load_graph(dir / "graph.json");
  if (fs::is_directory(dir / "configs")) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir / "configs")) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) ws.configs.push_back(read_manifest(f));
  }
  if (fs::exists(dir / "results.tsv")) ws.downstream = read_downstream_results(dir / "results.tsv");
  ws.validate();
  if (!ws.configs.empty() && !ws.downstream.empty()) {
    ws.hypothesis_cache = evaluate_hypotheses(ws.graph, ws.downstream, ws.configs);
  }
  return ws;
}

ServiceConfig read_service_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open service config " + path.string());
  ServiceConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ValidationError(where + ": expected key=value");
    const auto key = trim(std::string_view(t).substr(0, eq));
    const auto value = trim(std::string_view(t).substr(eq + 1));
    if (key == "workspace_dir") {
      cfg.workspace_dir = value;
      if (cfg.workspace_dir.is_relative()) cfg.workspace_dir = path.parent_path() / cfg.workspace_dir;
    } else if (key == "bind") {
      parse_bind(value);
      cfg.bind = value;
    } else if (key == "cors_origin") {
      cfg.cors_origin = value;
    } else {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

BindAddress parse_bind(std::string_view bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw ValidationError("bind address must be host:port, got '" + std::string(bind) + "'");
  }
  BindAddress out;
  out.host = std::string(bind.substr(0, colon));
  const long long port = parse_int(bind.substr(colon + 1), "bind port");
  if (port < 0 || port > 65535) throw ValidationError("bind port out of range");
  out.port = static_cast<int>(port);
  return out;
}

WhatIfRequest parse_whatif(const json& body) {
  if (!body.is_object()) throw ValidationError("whatif body must be an object");
  static const std::set<std::string> kKeys = {
      "k", "mode", "min_families", "exclude", "force_include", "seed",
      "id", "recipients_high", "recipients_low", "budget_chars"};
  for (const auto& [key, value] : body.items()) {
    if (!kKeys.count(key)) throw ValidationError("unknown field '" + key + "'");
  }
  WhatIfRequest req;
  auto& sel = req.selection;
  if (body.contains("k")) sel.k = field<std::size_t>(body, "k");
  if (body.contains("mode")) sel.mode = parse_selection_mode(field<std::string>(body, "mode"));
  if (body.contains("min_families")) sel.min_families = field<std::size_t>(body, "min_families");
  if (body.contains("exclude")) {
    const auto ex = field<std::vector<std::string>>(body, "exclude");
    sel.excluded.insert(ex.begin(), ex.end());
  }
  if (body.contains("force_include")) {
    sel.force_include = field<std::vector<std::string>>(body, "force_include");
  }
  if (body.contains("seed")) sel.seed = field<std::uint64_t>(body, "seed");
  if (body.contains("id")) req.id = field<std::string>(body, "id");
  if (body.contains("recipients_high")) {
    req.recipients.high = field<std::vector<std::string>>(body, "recipients_high");
  }
  if (body.contains("recipients_low")) {
    req.recipients.low = field<std::vector<std::string>>(body, "recipients_low");
  }
  if (body.contains("budget_chars")) req.budget_chars = field<std::uint64_t>(body, "budget_chars");
  return req;
}

Response handle_request(const Workspace& workspace, std::string_view method,
                        std::string_view path, const QueryParams& query, std::string_view body) {
  try {
    return dispatch(workspace, method, path, query, body);
  } catch (const NotFound& e) {
    return error_response(404, "not_found", e.what());
  } catch (const MethodNotAllowed& e) {
    return error_response(405, "method_not_allowed", e.what());
  } catch (const InfeasibleError& e) {
    return error_response(422, "infeasible", e.what());
  } catch (const ValidationError& e) {
    return error_response(400, "invalid_request", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

struct Server::Impl {
  const Workspace& workspace;
  std::string cors_origin;
  httplib::Server http;

  void serve(const httplib::Request& req, httplib::Response& res) {
    if (!cors_origin.empty()) {
      res.set_header("Access-Control-Allow-Origin", cors_origin);
      res.set_header("Vary", "Origin");
    }
    if (req.method == "OPTIONS") {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
      return;
    }
    QueryParams query;
    for (const auto& [k, v] : req.params) query[k] = v;
    const auto out = handle_request(workspace, req.method, req.path, query, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  }
};

Server::Server(const Workspace& workspace, std::string cors_origin)
    : impl_(new Impl{workspace, std::move(cors_origin), {}}) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    impl_->serve(req, res);
  };
  impl_->http.Get(".*", handler);
  impl_->http.Post(".*", handler);
  impl_->http.Put(".*", handler);
  impl_->http.Delete(".*", handler);
  impl_->http.Options(".*", handler);
}

Server::~Server() { stop(); }

int Server::bind(const BindAddress& address) {
  if (address.port == 0) {
    const int port = impl_->http.bind_to_any_port(address.host);
    if (port < 0) throw IoError("cannot bind " + address.host);
    return port;
  }
  if (!impl_->http.bind_to_port(address.host, address.port)) {
    throw IoError("cannot bind " + address.host + ":" + std::to_string(address.port));
  }
  return address.port;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace xling
